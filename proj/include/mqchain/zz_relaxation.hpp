#pragma once

// Dipolar relaxation of the multiple-quantum coherences on the evolution
// period, in the model that keeps only the Ising part of the secular dipolar
// Hamiltonian.

#include <span>
#include <vector>

#include "mqchain/core_model.hpp"

namespace mqchain {

struct RelaxationCurve {
  double tau = 0.0;
  int order = 0;
  std::vector<double> times;
  std::vector<double> f_values;
};

struct SecondMomentResult {
  double tau = 0.0;
  double m2 = 0.0;   // rad^2/s^2
  double t_e = 0.0;  // s
};

/// Long-time plateau of the zeroth-order intensity relative to its initial
/// value, infinite chain: 2 J0^2(2 D tau) / (1 + J0(4 D tau)).
double stationary_f0(double tau, double d_nn);

/// Finite-ring analogue: c_N^2 / G0 with c_N the coefficient of I_z in the
/// zeroth-order part of sigma(tau), averaged over both parity sectors.
double stationary_f0_finite(double tau, const ChainSpec& spec);

/// Coefficient c_N(tau) = Tr(sigma_0 I_z) / Tr(I_z^2) of an even NN ring.
double iz_projection_finite(double tau, const ChainSpec& spec);

/// One spin pair (m < m') of the +-2 coherence with its share of G2.
struct CoherencePair {
  int m = 0;
  int m_prime = 0;
  double weight = 0.0;
};

/// Pair decomposition of sigma_{+-2}(tau) for the chain the couplings were
/// built for. Open chains use the infinite-chain kernel
///   weight = J_{m'-m}^2(2 D tau) / N  (odd m'-m),
/// over the index set 1..N with no wraparound. Even rings use the exact
/// finite kernel, where J_d is replaced by the sector-averaged discrete
/// transform of sin(2 D tau sin k). D is couplings.d_nn().
std::vector<CoherencePair> second_order_pairs(double tau, const CouplingMatrix& couplings);

/// F_{+-2}(tau, t) = sum_pairs weight * prod_{n != m, m'} cos((D_nm + D_nm') t).
double f2_decay(double tau, double t, const CouplingMatrix& couplings);

RelaxationCurve f2_curve(double tau, std::span<const double> times,
                         const CouplingMatrix& couplings);

/// M2 = -F''(tau, 0) / F(tau, 0), evaluated analytically, and t_e = sqrt(2/M2).
/// Refuses tau whose second-order intensity is below 1e-12.
SecondMomentResult second_moment(double tau, const CouplingMatrix& couplings);

/// exp(-m2 t^2 / 2).
double gaussian_envelope(double m2, double t);

}  // namespace mqchain
