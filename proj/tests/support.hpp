#pragma once

#include <vector>

#include "mqchain/core_model.hpp"

namespace mqchain::test {

inline constexpr double kD = 16.4e3;

inline std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = n == 1 ? a : a + (b - a) * i / (n - 1);
  return v;
}

inline ChainSpec chain(int n, Boundary b = Boundary::open,
                       CouplingMode mode = CouplingMode::nearest_neighbor, double d = kD) {
  ChainSpec spec;
  spec.n_spins = n;
  spec.boundary = b;
  spec.coupling.mode = mode;
  spec.coupling.d_nn = d;
  return spec;
}

inline ChainSpec ring(int n, CouplingMode mode = CouplingMode::nearest_neighbor) {
  return chain(n, Boundary::cyclic, mode);
}

}  // namespace mqchain::test
