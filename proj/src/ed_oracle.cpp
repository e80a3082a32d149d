#include "mqchain/ed_oracle.hpp"

#include <bit>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>

namespace mqchain {
namespace {

using cplx = std::complex<double>;

unsigned spin_mask(int spin, int n_spins) { return 1u << (n_spins - spin); }

double spin_z(unsigned state, int spin, int n_spins) {
  return (state & spin_mask(spin, n_spins)) ? -0.5 : 0.5;
}

int dimension(int n_spins) { return 1 << n_spins; }

double normalization(int n_spins) {
  // Tr(I_z^2) = N 2^{N-2}
  return n_spins * std::ldexp(1.0, n_spins - 2);
}

// cos(pi x), sin(pi x) with exact values on multiples of 1/2.
std::pair<double, double> cos_sin_pi(double x) {
  double r = std::fmod(x, 2.0);
  if (r < 0.0) r += 2.0;
  if (r == 0.0) return {1.0, 0.0};
  if (r == 0.5) return {0.0, 1.0};
  if (r == 1.0) return {-1.0, 0.0};
  if (r == 1.5) return {0.0, -1.0};
  return {std::cos(std::numbers::pi * r), std::sin(std::numbers::pi * r)};
}

struct DisjointSets {
  std::vector<int> parent;
  explicit DisjointSets(int n) : parent(static_cast<std::size_t>(n)) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int a) {
    while (parent[a] != a) {
      parent[a] = parent[parent[a]];
      a = parent[a];
    }
    return a;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

DensityMatrix diagonal_state(int n_spins, const Eigen::VectorXcd& diag, DensityConvention conv) {
  DensityMatrix rho;
  rho.n_spins = n_spins;
  rho.matrix = diag.asDiagonal();
  rho.convention = conv;
  return rho;
}

ChainSpec nearest_neighbor_version(const ChainSpec& spec) {
  ChainSpec nn = spec;
  nn.coupling.mode = CouplingMode::nearest_neighbor;
  return nn;
}

}  // namespace

void require_oracle_capacity(int n_spins) {
  if (n_spins > kOracleMaxSpins)
    throw Error(ErrorKind::capacity, "exact diagonalization is limited to " +
                                         std::to_string(kOracleMaxSpins) + " spins, got " +
                                         std::to_string(n_spins));
  if (n_spins < 1) throw Error(ErrorKind::invalid_spec, "need at least one spin");
}

double max_abs(const ComplexMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

SpinOperator spin_component(Axis axis, int spin, int n_spins) {
  require_oracle_capacity(n_spins);
  if (spin < 1 || spin > n_spins) throw Error(ErrorKind::domain, "spin index out of range");
  const int dim = dimension(n_spins);
  const unsigned mask = spin_mask(spin, n_spins);
  SpinOperator op{n_spins, ComplexMatrix::Zero(dim, dim)};
  for (int b = 0; b < dim; ++b) {
    const unsigned s = static_cast<unsigned>(b);
    const int flipped = static_cast<int>(s ^ mask);
    switch (axis) {
      case Axis::z: op.matrix(b, b) = spin_z(s, spin, n_spins); break;
      case Axis::x: op.matrix(flipped, b) = 0.5; break;
      case Axis::y:
        // I+ raises a down spin with amplitude 1; I_y = (I+ - I-) / 2i.
        op.matrix(flipped, b) = (s & mask) ? cplx(0.0, -0.5) : cplx(0.0, 0.5);
        break;
    }
  }
  return op;
}

SpinOperator total_iz(int n_spins) {
  require_oracle_capacity(n_spins);
  const int dim = dimension(n_spins);
  SpinOperator op{n_spins, ComplexMatrix::Zero(dim, dim)};
  for (int b = 0; b < dim; ++b)
    op.matrix(b, b) = 0.5 * n_spins - std::popcount(static_cast<unsigned>(b));
  return op;
}

SpinOperator build_hamiltonian(HamiltonianKind kind, const CouplingMatrix& couplings,
                               PhaseIncrement phase) {
  const int n = couplings.n_spins();
  require_oracle_capacity(n);
  const int dim = dimension(n);
  SpinOperator h{n, ComplexMatrix::Zero(dim, dim)};

  cplx raise_phase{1.0, 0.0};
  if (kind == HamiltonianKind::two_quantum_phase) {
    const auto [c, s] = cos_sin_pi(2.0 * phase.over_pi);
    raise_phase = cplx(c, -s);  // e^{-2i phi}
  }

  for (int i = 1; i <= n; ++i) {
    for (int j = i + 1; j <= n; ++j) {
      const double d = couplings(i, j);
      if (d == 0.0) continue;
      const unsigned mi = spin_mask(i, n);
      const unsigned mj = spin_mask(j, n);
      const unsigned both = mi | mj;
      for (int b = 0; b < dim; ++b) {
        const unsigned s = static_cast<unsigned>(b);
        const bool down_i = s & mi;
        const bool down_j = s & mj;
        switch (kind) {
          case HamiltonianKind::two_quantum:
          case HamiltonianKind::two_quantum_phase:
            if (down_i && down_j) {
              h.matrix(static_cast<int>(s & ~both), b) += -0.5 * d * raise_phase;
            } else if (!down_i && !down_j) {
              h.matrix(static_cast<int>(s | both), b) += -0.5 * d * std::conj(raise_phase);
            }
            break;
          case HamiltonianKind::flip_flop:
            if (down_i != down_j) h.matrix(static_cast<int>(s ^ both), b) += d;
            break;
          case HamiltonianKind::zz:
            h.matrix(b, b) += 2.0 * d * spin_z(s, i, n) * spin_z(s, j, n);
            break;
          case HamiltonianKind::secular_dd:
            h.matrix(b, b) += 2.0 * d * spin_z(s, i, n) * spin_z(s, j, n);
            // -(IxIx + IyIy) = -(I+I- + I-I+) / 2
            if (down_i != down_j) h.matrix(static_cast<int>(s ^ both), b) += -0.5 * d;
            break;
        }
      }
    }
  }
  return h;
}

SpinOperator unitary_even_flip(int n_spins) {
  require_oracle_capacity(n_spins);
  const int dim = dimension(n_spins);
  unsigned mask = 0;
  int flips = 0;
  for (int s = 2; s <= n_spins; s += 2) {
    mask |= spin_mask(s, n_spins);
    ++flips;
  }
  // exp(-i pi I_x) = -2i I_x for spin 1/2.
  cplx factor{1.0, 0.0};
  for (int k = 0; k < flips; ++k) factor *= cplx(0.0, -1.0);
  SpinOperator u{n_spins, ComplexMatrix::Zero(dim, dim)};
  for (int b = 0; b < dim; ++b) u.matrix(static_cast<int>(static_cast<unsigned>(b) ^ mask), b) = factor;
  return u;
}

Propagator::Propagator(const SpinOperator& h) : n_spins_(h.n_spins) {
  require_oracle_capacity(n_spins_);
  dim_ = static_cast<int>(h.matrix.rows());
  if (h.matrix.cols() != dim_ || dim_ != dimension(n_spins_))
    throw Error(ErrorKind::dimension_mismatch, "Hamiltonian dimension does not match 2^N");

  DisjointSets sets(dim_);
  for (int c = 0; c < dim_; ++c)
    for (int r = 0; r < dim_; ++r)
      if (r != c && h.matrix(r, c) != cplx(0.0, 0.0)) sets.unite(r, c);

  std::vector<int> block_of(static_cast<std::size_t>(dim_), -1);
  for (int s = 0; s < dim_; ++s) {
    const int root = sets.find(s);
    if (block_of[root] < 0) {
      block_of[root] = static_cast<int>(blocks_.size());
      blocks_.emplace_back();
    }
    blocks_[block_of[root]].states.push_back(s);
  }

  for (auto& block : blocks_) {
    const int m = static_cast<int>(block.states.size());
    ComplexMatrix sub(m, m);
    for (int c = 0; c < m; ++c)
      for (int r = 0; r < m; ++r) sub(r, c) = h.matrix(block.states[r], block.states[c]);
    if (m == 1) {
      block.energies = Eigen::VectorXd::Constant(1, sub(0, 0).real());
      block.vectors = ComplexMatrix::Identity(1, 1);
      continue;
    }
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(sub);
    if (solver.info() != Eigen::Success)
      throw Error(ErrorKind::singularity, "eigendecomposition did not converge");
    block.energies = solver.eigenvalues();
    block.vectors = solver.eigenvectors();
  }
}

// Returns x in the eigenbasis as a grid of block-pair tiles.
std::vector<ComplexMatrix> Propagator::to_eigenbasis(const ComplexMatrix& x) const {
  if (x.rows() != dim_ || x.cols() != dim_)
    throw Error(ErrorKind::dimension_mismatch, "operator dimension does not match propagator");
  const std::size_t nb = blocks_.size();
  std::vector<ComplexMatrix> tiles(nb * nb);
  for (std::size_t a = 0; a < nb; ++a) {
    const auto& sa = blocks_[a].states;
    for (std::size_t b = 0; b < nb; ++b) {
      const auto& sb = blocks_[b].states;
      ComplexMatrix tile(sa.size(), sb.size());
      bool any = false;
      for (std::size_t c = 0; c < sb.size(); ++c)
        for (std::size_t r = 0; r < sa.size(); ++r) {
          tile(r, c) = x(sa[r], sb[c]);
          any = any || tile(r, c) != cplx(0.0, 0.0);
        }
      if (any) tiles[a * nb + b] = blocks_[a].vectors.adjoint() * tile * blocks_[b].vectors;
    }
  }
  return tiles;
}

ComplexMatrix Propagator::unitary(double t) const {
  ComplexMatrix u = ComplexMatrix::Zero(dim_, dim_);
  for (const auto& block : blocks_) {
    const Eigen::VectorXcd phases =
        (block.energies.cast<cplx>() * cplx(0.0, -t)).array().exp().matrix();
    const ComplexMatrix sub = block.vectors * phases.asDiagonal() * block.vectors.adjoint();
    const auto& s = block.states;
    for (std::size_t c = 0; c < s.size(); ++c)
      for (std::size_t r = 0; r < s.size(); ++r) u(s[r], s[c]) = sub(r, c);
  }
  return u;
}

std::vector<DensityMatrix> Propagator::evolve(const DensityMatrix& rho,
                                              std::span<const double> times) const {
  if (rho.n_spins != n_spins_)
    throw Error(ErrorKind::dimension_mismatch, "density matrix and Hamiltonian sizes differ");
  const auto tiles = to_eigenbasis(rho.matrix);
  const std::size_t nb = blocks_.size();
  std::vector<DensityMatrix> out;
  out.reserve(times.size());
  for (double t : times) {
    std::vector<Eigen::VectorXcd> phases(nb);
    for (std::size_t a = 0; a < nb; ++a)
      phases[a] = (blocks_[a].energies.cast<cplx>() * cplx(0.0, -t)).array().exp().matrix();

    DensityMatrix result{n_spins_, ComplexMatrix::Zero(dim_, dim_), rho.convention};
    for (std::size_t a = 0; a < nb; ++a) {
      for (std::size_t b = 0; b < nb; ++b) {
        const ComplexMatrix& tile = tiles[a * nb + b];
        if (tile.size() == 0) continue;
        const ComplexMatrix rotated = phases[a].asDiagonal() * tile * phases[b].conjugate().asDiagonal();
        const ComplexMatrix back = blocks_[a].vectors * rotated * blocks_[b].vectors.adjoint();
        const auto& sa = blocks_[a].states;
        const auto& sb = blocks_[b].states;
        for (std::size_t c = 0; c < sb.size(); ++c)
          for (std::size_t r = 0; r < sa.size(); ++r) result.matrix(sa[r], sb[c]) = back(r, c);
      }
    }
    out.push_back(std::move(result));
  }
  return out;
}

DensityMatrix Propagator::evolve(const DensityMatrix& rho, double t) const {
  const double times[] = {t};
  return std::move(evolve(rho, times).front());
}

std::vector<cplx> Propagator::correlation(const ComplexMatrix& x, const ComplexMatrix& y,
                                          std::span<const double> times) const {
  const auto xt = to_eigenbasis(x);
  const auto yt = to_eigenbasis(y);
  const std::size_t nb = blocks_.size();
  std::vector<cplx> out(times.size(), cplx(0.0, 0.0));
  // Tr(X(t) Y) = sum_{p,q} e^{-i(w_p - w_q)t} X_pq Y_qp
  for (std::size_t a = 0; a < nb; ++a) {
    for (std::size_t b = 0; b < nb; ++b) {
      const ComplexMatrix& xab = xt[a * nb + b];
      const ComplexMatrix& yba = yt[b * nb + a];
      if (xab.size() == 0 || yba.size() == 0) continue;
      const auto& ea = blocks_[a].energies;
      const auto& eb = blocks_[b].energies;
      for (Eigen::Index q = 0; q < xab.cols(); ++q) {
        for (Eigen::Index p = 0; p < xab.rows(); ++p) {
          const cplx w = xab(p, q) * yba(q, p);
          if (w == cplx(0.0, 0.0)) continue;
          const double omega = ea(p) - eb(q);
          for (std::size_t k = 0; k < times.size(); ++k)
            out[k] += w * std::polar(1.0, -omega * times[k]);
        }
      }
    }
  }
  return out;
}

DensityMatrix evolve(const DensityMatrix& rho, const SpinOperator& h, double t) {
  if (rho.n_spins != h.n_spins)
    throw Error(ErrorKind::dimension_mismatch, "density matrix and Hamiltonian sizes differ");
  return Propagator(h).evolve(rho, t);
}

CoherenceDecomposition coherence_decompose(const DensityMatrix& rho) {
  const int dim = static_cast<int>(rho.matrix.rows());
  CoherenceDecomposition out;
  for (int c = 0; c < dim; ++c) {
    for (int r = 0; r < dim; ++r) {
      const cplx v = rho.matrix(r, c);
      if (v == cplx(0.0, 0.0)) continue;
      const int order = std::popcount(static_cast<unsigned>(c)) - std::popcount(static_cast<unsigned>(r));
      auto it = out.components.find(order);
      if (it == out.components.end()) {
        it = out.components
                 .emplace(order, DensityMatrix{rho.n_spins, ComplexMatrix::Zero(dim, dim),
                                               rho.convention})
                 .first;
      }
      it->second.matrix(r, c) = v;
    }
  }
  return out;
}

CoherenceSpectrum coherence_intensities(const DensityMatrix& rho) {
  const int dim = static_cast<int>(rho.matrix.rows());
  std::map<int, double> sums;
  for (int c = 0; c < dim; ++c) {
    for (int r = 0; r < dim; ++r) {
      const cplx v = rho.matrix(r, c);
      if (v == cplx(0.0, 0.0)) continue;
      const int order = std::popcount(static_cast<unsigned>(c)) - std::popcount(static_cast<unsigned>(r));
      sums[order] += (v * rho.matrix(c, r)).real();
    }
  }
  CoherenceSpectrum out;
  out.n_spins = rho.n_spins;
  const double norm = normalization(rho.n_spins);
  for (const auto& [order, s] : sums) out.intensities[order] = s / norm;
  return out;
}

std::vector<CoherenceSpectrum> mq_experiment(const ChainSpec& spec, std::span<const double> taus) {
  validate(spec);
  require_oracle_capacity(spec.n_spins);
  for (double tau : taus)
    if (!(tau >= 0.0)) throw Error(ErrorKind::domain, "preparation time must be non-negative");
  const Propagator prop(build_hamiltonian(HamiltonianKind::two_quantum, build_couplings(spec)));
  const DensityMatrix iz{spec.n_spins, total_iz(spec.n_spins).matrix,
                         DensityConvention::traceless_deviation};
  const auto states = prop.evolve(iz, taus);
  std::vector<CoherenceSpectrum> out;
  out.reserve(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    out.push_back(coherence_intensities(states[i]));
    out.back().tau = taus[i];
  }
  return out;
}

CoherenceSpectrum mq_experiment(const ChainSpec& spec, double tau) {
  const double taus[] = {tau};
  return mq_experiment(spec, taus).front();
}

DensityMatrix preparation_state(const ChainSpec& spec, double tau) {
  const ChainSpec nn = nearest_neighbor_version(spec);
  validate(nn);
  require_oracle_capacity(nn.n_spins);
  if (!(tau >= 0.0)) throw Error(ErrorKind::domain, "preparation time must be non-negative");
  const Propagator prop(build_hamiltonian(HamiltonianKind::two_quantum, build_couplings(nn)));
  const DensityMatrix iz{nn.n_spins, total_iz(nn.n_spins).matrix,
                         DensityConvention::traceless_deviation};
  return prop.evolve(iz, tau);
}

std::vector<RelaxationCurve> relaxation_profile(const ChainSpec& spec, double tau,
                                                RelaxationKind kind,
                                                const CouplingMatrix& relaxation_couplings,
                                                std::span<const double> t_grid) {
  if (relaxation_couplings.n_spins() != spec.n_spins)
    throw Error(ErrorKind::dimension_mismatch, "relaxation couplings do not match the chain");
  const DensityMatrix sigma = preparation_state(spec, tau);
  const auto parts = coherence_decompose(sigma);
  const int dim = dimension(spec.n_spins);
  auto component = [&](int order) -> ComplexMatrix {
    const auto it = parts.components.find(order);
    return it == parts.components.end() ? ComplexMatrix::Zero(dim, dim) : it->second.matrix;
  };

  const Propagator prop(build_hamiltonian(
      kind == RelaxationKind::zz ? HamiltonianKind::zz : HamiltonianKind::secular_dd,
      relaxation_couplings));
  const double norm = normalization(spec.n_spins);

  std::vector<RelaxationCurve> curves;
  for (int order : {0, 2}) {
    RelaxationCurve curve;
    curve.tau = tau;
    curve.order = order;
    curve.times.assign(t_grid.begin(), t_grid.end());
    const auto corr = prop.correlation(component(order), component(-order), t_grid);
    for (const cplx& v : corr) curve.f_values.push_back(v.real() / norm);
    curves.push_back(std::move(curve));
  }
  return curves;
}

std::vector<RelaxationCurve> relaxation_profile(const ChainSpec& spec, double tau,
                                                RelaxationKind kind,
                                                std::span<const double> t_grid) {
  return relaxation_profile(spec, tau, kind, build_couplings(spec), t_grid);
}

std::vector<OracleTransfer> transfer_oracle(const ChainSpec& spec, int source, int target,
                                            std::span<const double> times,
                                            TransferEvolution evolution,
                                            std::optional<double> beta) {
  validate(spec);
  require_oracle_capacity(spec.n_spins);
  if (spec.coupling.mode != CouplingMode::nearest_neighbor || spec.boundary != Boundary::open)
    throw Error(ErrorKind::invalid_spec, "transfer oracle needs an open nearest-neighbour chain");
  const int n = spec.n_spins;
  if (source < 1 || source > n || target < 1 || target > n)
    throw Error(ErrorKind::domain, "spin index out of range 1.." + std::to_string(n));

  const CouplingMatrix couplings = build_couplings(spec);
  SpinOperator h = evolution == TransferEvolution::flip_flop
                       ? build_hamiltonian(HamiltonianKind::flip_flop, couplings)
                       : build_hamiltonian(HamiltonianKind::two_quantum, couplings);
  if (evolution == TransferEvolution::flip_flop) h.matrix *= kUnitaryMapConstant;

  const int dim = dimension(n);
  Eigen::VectorXcd diag(dim);
  DensityConvention conv = DensityConvention::traceless_deviation;
  if (beta) {
    // exp(beta I_lz) / (2^N cosh(beta/2))
    const double z = std::ldexp(std::cosh(*beta / 2.0), n);
    for (int b = 0; b < dim; ++b)
      diag(b) = std::exp(*beta * spin_z(static_cast<unsigned>(b), source, n)) / z;
    conv = DensityConvention::normalized;
  } else {
    for (int b = 0; b < dim; ++b) diag(b) = spin_z(static_cast<unsigned>(b), source, n);
  }
  const DensityMatrix rho0 = diagonal_state(n, diag, conv);
  const ComplexMatrix target_z = spin_component(Axis::z, target, n).matrix;
  const ComplexMatrix source_z = spin_component(Axis::z, source, n).matrix;
  const double initial = (rho0.matrix * source_z).trace().real();

  const Propagator prop(h);
  const auto corr = prop.correlation(rho0.matrix, target_z, times);
  const bool flagged = source % 2 == 0 || target % 2 == 0;
  std::vector<OracleTransfer> out;
  out.reserve(corr.size());
  for (const cplx& v : corr) out.push_back({v.real() / initial, flagged});
  return out;
}

OracleTransfer transfer_oracle(const ChainSpec& spec, int source, int target, double t,
                               TransferEvolution evolution, std::optional<double> beta) {
  const double times[] = {t};
  return transfer_oracle(spec, source, target, times, evolution, beta).front();
}

}  // namespace mqchain
