#pragma once

// Free-fermion solutions for nearest-neighbour chains: multiple-quantum
// coherence intensities on the preparation period and the polarization
// transfer ratio.

#include <map>
#include <optional>
#include <span>
#include <vector>

#include "mqchain/core_model.hpp"

namespace mqchain {

/// Boundary condition seen by the Jordan-Wigner fermions of a ring. The even
/// and odd fermion-parity sectors see antiperiodic and periodic momenta.
enum class FermionSector { periodic, antiperiodic };

struct FermionSpectrum {
  Boundary boundary = Boundary::open;
  std::vector<double> wavevectors;
  std::vector<double> energies;  // rad/s
  double larmor_offset = 0.0;    // rad/s
};

/// Open chains: k = pi n / (N + 1), n = 1..N.
/// Cyclic chains: k = 2 pi n / N, n = -N/2 .. N/2 - 1 (even N only).
/// epsilon_k = D cos k + omega0.
FermionSpectrum spectrum(const ChainSpec& spec, double omega0 = 0.0);

/// Momenta of one parity sector of an even ring: 2 pi (n + s) / N with
/// s = 0 (periodic) or 1/2 (antiperiodic).
std::vector<double> ring_wavevectors(int n_spins, FermionSector sector);

/// Coherence order -> intensity. `n_spins` is empty for the infinite chain.
struct CoherenceSpectrum {
  std::map<int, double> intensities;
  double tau = 0.0;
  std::optional<int> n_spins;

  double intensity(int order) const;
  double total() const;
};

/// G0 = 1/2 + J0(4 D tau)/2, G(+-2) = 1/4 - J0(4 D tau)/4.
CoherenceSpectrum mq_intensities_infinite(double tau, double d_nn);

/// Exact intensities of an even nearest-neighbour ring.
///
/// The state I_z spreads evenly over both fermion-parity sectors, and each
/// sector evolves with its own momentum set, so
///   G0 = 1/2 sum_s (1/N) sum_{k in s} cos^2(2 D tau sin k),
///   G(+-2) = 1/2 sum_s (1/2N) sum_{k in s} sin^2(2 D tau sin k).
/// Matches the exact-diagonalization oracle to rounding.
CoherenceSpectrum mq_intensities_finite(double tau, const ChainSpec& spec);

struct TransferResult {
  int source = 1;
  int target = 1;
  double time = 0.0;
  double ratio = 0.0;
};

/// <I_mz>(t) / <I_lz>(0) for polarization starting on spin l of an open
/// nearest-neighbour chain:
///   (4 / (N+1)^2) |sum_k exp(-i eps_k t) sin(k l) sin(k m)|^2.
///
/// The closed form was derived for odd l and odd N. It is evaluated for every
/// index here; for even l or m it describes the flip-flop dynamics, while the
/// two-quantum dynamics differs by the sign of the target polarization.
TransferResult transfer_ratio(const ChainSpec& spec, int source, int target, double t,
                              double omega0 = 0.0);

std::vector<TransferResult> transfer_profile(const ChainSpec& spec, int source, int target,
                                             std::span<const double> t_grid,
                                             double omega0 = 0.0);

}  // namespace mqchain
