#pragma once

// Chain geometry, dipolar couplings and the Bessel kernel shared by the
// analytic modules.
//
// Conventions used throughout the library:
//   * spins are indexed 1..N in every public interface;
//   * couplings and frequencies are in rad/s, times in seconds;
//   * coupling magnitudes are stored positive. The overall sign of D_ij is a
//     phase convention that leaves every intensity and transfer probability
//     unchanged.

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "mqchain/error.hpp"

namespace mqchain {

enum class Boundary { open, cyclic };
enum class CouplingMode { nearest_neighbor, full_dipolar };

const char* to_string(Boundary b) noexcept;
const char* to_string(CouplingMode m) noexcept;

/// Geometric parameters from which the nearest-neighbour coupling follows:
/// D = gamma^2 hbar |1 - 3 cos^2 theta| / (2 a^3).
struct DipolarGeometry {
  double gamma = 0.0;  // rad s^-1 T^-1
  double a = 0.0;      // m
  double theta = 0.0;  // rad

  double nearest_neighbor_coupling() const;
};

struct CouplingModel {
  CouplingMode mode = CouplingMode::nearest_neighbor;
  double d_nn = 16.4e3;  // rad/s, magnitude
  std::optional<DipolarGeometry> raw_params;

  static CouplingModel from_geometry(CouplingMode mode, const DipolarGeometry& g);
};

struct ChainSpec {
  int n_spins = 2;
  Boundary boundary = Boundary::open;
  CouplingModel coupling;
};

/// Pairwise distance used by the coupling law. Open chains use |i-j|; rings
/// use the shorter arc so that the wrap bond (1, N) is a nearest neighbour.
int chain_distance(const ChainSpec& spec, int i, int j);

/// Symmetric N x N coupling table D_ij (rad/s), zero diagonal. Indices passed
/// to `operator()` are 1-based.
class CouplingMatrix {
 public:
  CouplingMatrix(Boundary boundary, CouplingMode mode, double d_nn,
                 Eigen::MatrixXd values);

  int n_spins() const noexcept { return static_cast<int>(values_.rows()); }
  Boundary boundary() const noexcept { return boundary_; }
  CouplingMode mode() const noexcept { return mode_; }
  /// Nearest-neighbour constant D that drives the preparation dynamics.
  double d_nn() const noexcept { return d_nn_; }

  double operator()(int i, int j) const { return values_(i - 1, j - 1); }
  const Eigen::MatrixXd& values() const noexcept { return values_; }

  /// Copy with every D_ij multiplied by `factor` (negative factors flip the
  /// sign convention; d_nn is scaled by |factor|).
  CouplingMatrix scaled(double factor) const;

 private:
  Boundary boundary_;
  CouplingMode mode_;
  double d_nn_;
  Eigen::MatrixXd values_;
};

void validate(const ChainSpec& spec);

CouplingMatrix build_couplings(const ChainSpec& spec);

/// Envelope inside which bessel_j is guaranteed to 1e-12 absolute.
inline constexpr int kBesselMaxOrder = 200;
inline constexpr double kBesselMaxArgument = 1.0e4;

/// Bessel function of the first kind J_n(x), integer order.
double bessel_j(int order, double x);

/// J_0(x), ..., J_max_order(x) from a single recurrence pass.
std::vector<double> bessel_j_sequence(int max_order, double x);

}  // namespace mqchain
