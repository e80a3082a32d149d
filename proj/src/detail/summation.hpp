#pragma once

#include <cmath>

namespace mqchain::detail {

// Neumaier summation; the result is independent of magnitude ordering to
// well below 1e-13 for the sums used here.
struct CompensatedSum {
  double sum = 0.0;
  double carry = 0.0;

  void add(double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      carry += (sum - t) + v;
    } else {
      carry += (v - t) + sum;
    }
    sum = t;
  }
  void scale(double f) {
    sum *= f;
    carry *= f;
  }
  double value() const { return sum + carry; }
};

}  // namespace mqchain::detail
