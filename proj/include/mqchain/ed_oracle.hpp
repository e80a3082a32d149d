#pragma once

// Brute-force verifier: dense spin operators on the full 2^N product space,
// exact time evolution through eigendecomposition, and coherence-order
// bookkeeping. Used to validate every closed-form result in the library.
//
// Basis: index bit (N - s) holds spin s (1-based), so spin 1 is the most
// significant qubit. A cleared bit is spin up (m = +1/2).

#include <complex>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "mqchain/core_model.hpp"
#include "mqchain/fermion_engine.hpp"
#include "mqchain/zz_relaxation.hpp"

namespace mqchain {

using ComplexMatrix = Eigen::MatrixXcd;

/// Largest chain the oracle accepts. One dense operator at N = 12 is
/// 4096 x 4096 complex doubles = 256 MiB; an evolution holds about four.
inline constexpr int kOracleMaxSpins = 12;

void require_oracle_capacity(int n_spins);

struct SpinOperator {
  int n_spins = 0;
  ComplexMatrix matrix;
};

enum class DensityConvention { normalized, traceless_deviation };

struct DensityMatrix {
  int n_spins = 0;
  ComplexMatrix matrix;
  DensityConvention convention = DensityConvention::traceless_deviation;
};

struct CoherenceDecomposition {
  std::map<int, DensityMatrix> components;
};

enum class Axis { x, y, z };

SpinOperator spin_component(Axis axis, int spin, int n_spins);
SpinOperator total_iz(int n_spins);

/// Phase increment of the preparation pulses, stored in units of pi so that
/// quarter-turn multiples produce exact phase factors.
struct PhaseIncrement {
  double over_pi = 0.0;
};

enum class HamiltonianKind { two_quantum, two_quantum_phase, flip_flop, zz, secular_dd };

/// Pair sums run over unordered pairs i < j with D_ij from `couplings`:
///   two_quantum        -1/2 sum D_ij (I+_i I+_j + I-_i I-_j)
///   two_quantum_phase  -1/2 sum D_ij (e^{-2i phi} I+_i I+_j + e^{2i phi} I-_i I-_j)
///   flip_flop          sum D_ij (I+_i I-_j + I-_i I+_j)
///   zz                 2 sum D_ij I_iz I_jz
///   secular_dd         sum D_ij (2 I_iz I_jz - I_ix I_jx - I_iy I_jy)
SpinOperator build_hamiltonian(HamiltonianKind kind, const CouplingMatrix& couplings,
                               PhaseIncrement phase = {});

/// U = prod_{even i} exp(-i pi I_ix).
SpinOperator unitary_even_flip(int n_spins);

/// Constant c with U H_two_quantum U^dagger = c H_flip_flop on open
/// nearest-neighbour chains.
inline constexpr double kUnitaryMapConstant = -0.5;

/// Caches the eigendecomposition of a Hamiltonian, factored into the blocks
/// that H leaves invariant in the product basis.
class Propagator {
 public:
  explicit Propagator(const SpinOperator& h);

  int n_spins() const noexcept { return n_spins_; }
  int block_count() const noexcept { return static_cast<int>(blocks_.size()); }

  ComplexMatrix unitary(double t) const;

  /// e^{-iHt} rho e^{iHt}.
  DensityMatrix evolve(const DensityMatrix& rho, double t) const;
  std::vector<DensityMatrix> evolve(const DensityMatrix& rho, std::span<const double> times) const;

  /// Tr(e^{-iHt} x e^{iHt} y) for every t.
  std::vector<std::complex<double>> correlation(const ComplexMatrix& x, const ComplexMatrix& y,
                                                std::span<const double> times) const;

 private:
  struct Block {
    std::vector<int> states;
    Eigen::VectorXd energies;
    ComplexMatrix vectors;
  };

  std::vector<ComplexMatrix> to_eigenbasis(const ComplexMatrix& x) const;

  int n_spins_ = 0;
  int dim_ = 0;
  std::vector<Block> blocks_;
};

DensityMatrix evolve(const DensityMatrix& rho, const SpinOperator& h, double t);

/// Splits rho by the magnetization difference of its row and column states.
CoherenceDecomposition coherence_decompose(const DensityMatrix& rho);

/// Tr(rho_n rho_{-n}) / Tr(I_z^2) for every order n present in rho.
CoherenceSpectrum coherence_intensities(const DensityMatrix& rho);

/// I_z evolved for tau under the two-quantum Hamiltonian of `spec`, traced
/// into coherence intensities.
CoherenceSpectrum mq_experiment(const ChainSpec& spec, double tau);
std::vector<CoherenceSpectrum> mq_experiment(const ChainSpec& spec, std::span<const double> taus);

/// Density matrix sigma(tau) of the preparation period on the
/// nearest-neighbour version of the chain.
DensityMatrix preparation_state(const ChainSpec& spec, double tau);

enum class RelaxationKind { zz, secular_dd };

/// F_0 and F_{+2} on the evolution period. sigma(tau) is prepared with the
/// nearest-neighbour couplings of `spec`; the relaxation Hamiltonian uses the
/// full coupling model of `spec`. Returns {order 0, order 2}.
std::vector<RelaxationCurve> relaxation_profile(const ChainSpec& spec, double tau,
                                                RelaxationKind kind,
                                                std::span<const double> t_grid);

/// Same, with an explicitly supplied relaxation coupling table.
std::vector<RelaxationCurve> relaxation_profile(const ChainSpec& spec, double tau,
                                                RelaxationKind kind,
                                                const CouplingMatrix& relaxation_couplings,
                                                std::span<const double> t_grid);

enum class TransferEvolution { flip_flop, two_quantum };

struct OracleTransfer {
  double ratio = 0.0;
  /// Set when l or m is even, outside the parity assumption of the closed form.
  bool parity_flagged = false;
};

/// <I_mz>(t) / <I_lz>(0) by direct evolution of the state polarized on spin l.
/// Without beta the traceless deviation I_lz is used; with beta the full
/// thermal state exp(beta I_lz) / Z. flip_flop evolves under
/// kUnitaryMapConstant * H_ff, the image of the two-quantum Hamiltonian.
OracleTransfer transfer_oracle(const ChainSpec& spec, int source, int target, double t,
                               TransferEvolution evolution = TransferEvolution::flip_flop,
                               std::optional<double> beta = std::nullopt);

std::vector<OracleTransfer> transfer_oracle(const ChainSpec& spec, int source, int target,
                                            std::span<const double> times,
                                            TransferEvolution evolution = TransferEvolution::flip_flop,
                                            std::optional<double> beta = std::nullopt);

double max_abs(const ComplexMatrix& m);

}  // namespace mqchain
