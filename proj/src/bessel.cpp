#include <cmath>
#include <string>
#include <vector>

#include "detail/summation.hpp"
#include "mqchain/core_model.hpp"

namespace mqchain {
namespace {

void check_envelope(int order, double x) {
  if (!std::isfinite(x) || std::abs(x) > kBesselMaxArgument)
    throw Error(ErrorKind::domain,
                "bessel_j: |x| must not exceed 1e4, got " + std::to_string(x));
  if (order < 0 || order > kBesselMaxOrder)
    throw Error(ErrorKind::domain,
                "bessel_j: |order| must not exceed 200, got " + std::to_string(order));
}

}  // namespace

// Miller's algorithm: run J_{k-1} = (2k/x) J_k - J_{k+1} downward from an
// order far past both max_order and the turning point |x|, then fix the scale
// with J_0 + 2 sum_k J_{2k} = 1. Downward recurrence is stable for every
// order, so one pass serves the whole envelope.
std::vector<double> bessel_j_sequence(int max_order, double x) {
  check_envelope(max_order, x);
  std::vector<double> out(static_cast<std::size_t>(max_order) + 1, 0.0);
  if (x == 0.0) {
    out[0] = 1.0;
    return out;
  }

  const double ax = std::abs(x);
  const double reach = std::max(static_cast<double>(max_order), std::ceil(ax));
  int start = static_cast<int>(reach + 30.0 + std::ceil(12.0 * std::cbrt(reach)));
  if (start % 2 != 0) ++start;

  constexpr double kRescaleAbove = 1.0e250;
  constexpr double kRescaleBy = 1.0e-250;

  double j_above = 0.0;  // J_{k+1}
  double j_here = 1.0e-300;  // J_k, arbitrary seed
  detail::CompensatedSum norm;
  norm.add(2.0 * j_here);  // start is even

  for (int k = start; k >= 1; --k) {
    const double j_below = (2.0 * k / ax) * j_here - j_above;
    j_above = j_here;
    j_here = j_below;
    const int order = k - 1;
    if (order <= max_order) out[static_cast<std::size_t>(order)] = j_here;
    if (order % 2 == 0) norm.add(order == 0 ? j_here : 2.0 * j_here);

    if (std::abs(j_here) > kRescaleAbove) {
      j_here *= kRescaleBy;
      j_above *= kRescaleBy;
      norm.scale(kRescaleBy);
      for (int m = order; m <= max_order; ++m) out[static_cast<std::size_t>(m)] *= kRescaleBy;
    }
  }

  const double scale = 1.0 / norm.value();
  for (int m = 0; m <= max_order; ++m) {
    double v = out[static_cast<std::size_t>(m)] * scale;
    if (x < 0.0 && m % 2 != 0) v = -v;
    out[static_cast<std::size_t>(m)] = v;
  }
  return out;
}

double bessel_j(int order, double x) {
  if (order < -kBesselMaxOrder) check_envelope(kBesselMaxOrder + 1, x);
  const int n = order < 0 ? -order : order;
  check_envelope(n, x);
  const double v = bessel_j_sequence(n, x)[static_cast<std::size_t>(n)];
  return (order < 0 && n % 2 != 0) ? -v : v;
}

}  // namespace mqchain
