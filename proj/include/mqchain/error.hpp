#pragma once

#include <stdexcept>
#include <string>

namespace mqchain {

enum class ErrorKind {
  invalid_spec,
  domain,
  capacity,
  unsupported_model,
  degenerate_input,
  singularity,
  dimension_mismatch,
};

const char* to_string(ErrorKind kind) noexcept;

// Every failure raised by the library carries a kind so front ends can map
// it to an exit status without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace mqchain
