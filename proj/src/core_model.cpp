#include "mqchain/core_model.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

namespace mqchain {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_spec: return "invalid-spec";
    case ErrorKind::domain: return "domain";
    case ErrorKind::capacity: return "capacity";
    case ErrorKind::unsupported_model: return "unsupported-model";
    case ErrorKind::degenerate_input: return "degenerate-input";
    case ErrorKind::singularity: return "singularity";
    case ErrorKind::dimension_mismatch: return "dimension-mismatch";
  }
  return "unknown";
}

const char* to_string(Boundary b) noexcept {
  return b == Boundary::open ? "open" : "cyclic";
}

const char* to_string(CouplingMode m) noexcept {
  return m == CouplingMode::nearest_neighbor ? "nn" : "full";
}

double DipolarGeometry::nearest_neighbor_coupling() const {
  constexpr double hbar = 1.054571817e-34;  // J s
  if (!(a > 0.0)) throw Error(ErrorKind::invalid_spec, "lattice spacing must be positive");
  const double c = std::cos(theta);
  return std::abs(gamma * gamma * hbar * (1.0 - 3.0 * c * c) / (2.0 * a * a * a));
}

CouplingModel CouplingModel::from_geometry(CouplingMode mode, const DipolarGeometry& g) {
  CouplingModel model;
  model.mode = mode;
  model.d_nn = g.nearest_neighbor_coupling();
  model.raw_params = g;
  return model;
}

int chain_distance(const ChainSpec& spec, int i, int j) {
  const int d = std::abs(i - j);
  if (spec.boundary == Boundary::cyclic) return std::min(d, spec.n_spins - d);
  return d;
}

CouplingMatrix::CouplingMatrix(Boundary boundary, CouplingMode mode, double d_nn,
                               Eigen::MatrixXd values)
    : boundary_(boundary), mode_(mode), d_nn_(d_nn), values_(std::move(values)) {
  if (values_.rows() != values_.cols())
    throw Error(ErrorKind::invalid_spec, "coupling matrix must be square");
}

CouplingMatrix CouplingMatrix::scaled(double factor) const {
  return CouplingMatrix(boundary_, mode_, d_nn_ * std::abs(factor), values_ * factor);
}

void validate(const ChainSpec& spec) {
  if (spec.n_spins < 2)
    throw Error(ErrorKind::invalid_spec,
                "chain needs at least 2 spins, got " + std::to_string(spec.n_spins));
  if (!(spec.coupling.d_nn > 0.0) || !std::isfinite(spec.coupling.d_nn))
    throw Error(ErrorKind::invalid_spec, "d_nn must be a finite positive magnitude");
}

CouplingMatrix build_couplings(const ChainSpec& spec) {
  validate(spec);
  const int n = spec.n_spins;
  const double d = spec.coupling.d_nn;
  Eigen::MatrixXd values = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i <= n; ++i) {
    for (int j = i + 1; j <= n; ++j) {
      const int r = chain_distance(spec, i, j);
      double v = 0.0;
      if (spec.coupling.mode == CouplingMode::nearest_neighbor) {
        v = (r == 1) ? d : 0.0;
      } else {
        v = d / static_cast<double>(r * r * r);
      }
      values(i - 1, j - 1) = v;
      values(j - 1, i - 1) = v;
    }
  }
  return CouplingMatrix(spec.boundary, spec.coupling.mode, d, std::move(values));
}

}  // namespace mqchain
