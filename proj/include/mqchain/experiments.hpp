#pragma once

// Command-line experiments: parameter sweeps over the analytic modules with
// CSV output, plus the oracle-equivalence verification suite.

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mqchain/core_model.hpp"

namespace mqchain {

inline constexpr const char* kEngineVersion = "1.0.0";

enum class GridSpacing { linear, log };

/// Inclusive grid `start:stop:count[:log]`.
struct GridSpec {
  double start = 0.0;
  double stop = 0.0;
  int count = 1;
  GridSpacing spacing = GridSpacing::linear;

  static GridSpec parse(std::string_view text);
  void check() const;
  std::vector<double> values() const;
  std::string to_string() const;
};

enum class Command { intensities, transfer, relaxation, verify };
enum class IntensityModel { infinite, finite };
enum class RelaxationMode { stationary, decay, times };

const char* to_string(Command c);
const char* to_string(IntensityModel m);
const char* to_string(RelaxationMode m);

struct ExperimentConfig {
  Command command = Command::intensities;
  int n_spins = 150;
  Boundary boundary = Boundary::open;
  CouplingMode coupling = CouplingMode::nearest_neighbor;
  double d_nn = 16.4e3;
  IntensityModel model = IntensityModel::infinite;
  std::optional<GridSpec> tau_grid;
  std::optional<GridSpec> t_grid;
  std::optional<double> tau;  // preparation time of relaxation decay
  int source = 1;
  std::optional<int> target;  // defaults to the last spin
  RelaxationMode mode = RelaxationMode::stationary;
  bool verify = false;
  std::string output;  // empty: standard output
  int threads = 1;
  std::optional<double> tolerance;  // overrides every verify tolerance
  std::vector<std::string> checks;  // verify subset, by name prefix

  ChainSpec chain() const;
  /// Fills every defaulted grid and index so the echo is self-contained.
  ExperimentConfig resolved() const;
  /// key = value pairs in config-file syntax.
  std::vector<std::pair<std::string, std::string>> echo() const;
};

/// Rectangular table of finite values with a #-prefixed metadata header.
class CurveTable {
 public:
  explicit CurveTable(std::vector<std::string> columns);

  const std::vector<std::string>& columns() const noexcept { return columns_; }
  const std::vector<std::vector<double>>& rows() const noexcept { return rows_; }

  void add_row(std::vector<double> row);
  void add_metadata(std::string line);
  void add_summary(std::string line);

  /// Column line and data rows, the part that must be reproducible.
  std::string body() const;
  void write(std::ostream& os) const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<double>> rows_;
  std::vector<std::string> metadata_;
  std::vector<std::string> summary_;
};

/// Shortest decimal text that parses back to the same double.
std::string format_number(double v);

struct CommandResult {
  CurveTable table;
  int exit_status = 0;
};

CurveTable cmd_intensities(const ExperimentConfig& config);
CurveTable cmd_transfer(const ExperimentConfig& config);
CommandResult cmd_relaxation(const ExperimentConfig& config);

struct VerifyCheck {
  std::string name;
  double tolerance = 0.0;
  double observed = 0.0;
  bool passed = false;
};

struct VerifyReport {
  std::vector<VerifyCheck> checks;
  bool passed() const;
  /// CSV rows `check,tolerance,observed,passed`.
  std::string body() const;
};

VerifyReport cmd_verify(const ExperimentConfig& config);

namespace exit_code {
inline constexpr int success = 0;
inline constexpr int usage = 2;
inline constexpr int verification = 3;
inline constexpr int capacity = 4;
}  // namespace exit_code

/// Full front end: parses arguments, runs the command, writes the table.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mqchain
