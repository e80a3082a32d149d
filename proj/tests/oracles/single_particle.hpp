#pragma once

// Test-only transfer amplitude from the one-excitation sector: the hopping
// matrix (D/2)(|i><i+1| + h.c.) has eigenvalues D cos k, and the polarization
// ratio is |<m| exp(-i h t) |l>|^2.

#include <complex>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

namespace mqchain::oracle {

inline double hopping_ratio(int n, int l, int m, double d, double t) {
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i) h(i, i + 1) = h(i + 1, i) = d / 2;
  const Eigen::MatrixXcd u = (h * std::complex<double>(0.0, -t)).exp();
  return std::norm(u(m - 1, l - 1));
}

}  // namespace mqchain::oracle
