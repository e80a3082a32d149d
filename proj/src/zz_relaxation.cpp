#include "mqchain/zz_relaxation.hpp"

#include <cmath>
#include <string>

#include "detail/summation.hpp"
#include "mqchain/fermion_engine.hpp"

namespace mqchain {
namespace {

constexpr double kDegenerateIntensity = 1e-12;
// J_d(x) for d > 200 and x <= 50 is below 1e-96, far under rounding of the
// pair sums, so those orders can be dropped on long open chains.
constexpr double kBesselTailArgument = 50.0;

void require_times(double tau, double t) {
  if (!(tau >= 0.0) || !std::isfinite(tau))
    throw Error(ErrorKind::domain, "preparation time must be finite and non-negative");
  if (!(t >= 0.0) || !std::isfinite(t))
    throw Error(ErrorKind::domain, "evolution time must be finite and non-negative");
}

// Squared amplitude of pair distance d on an even ring, averaged over the
// two parity sectors.
std::vector<double> ring_pair_kernel(int n, double x) {
  std::vector<double> kernel(static_cast<std::size_t>(n), 0.0);
  for (auto sector : {FermionSector::periodic, FermionSector::antiperiodic}) {
    const auto ks = ring_wavevectors(n, sector);
    for (int d = 1; d < n; d += 2) {
      detail::CompensatedSum s;
      for (double k : ks) s.add(std::sin(x * std::sin(k)) * std::sin(k * d));
      const double amp = s.value() / n;
      kernel[static_cast<std::size_t>(d)] += 0.5 * amp * amp;
    }
  }
  return kernel;
}

std::vector<double> open_pair_kernel(int n, double x) {
  std::vector<double> kernel(static_cast<std::size_t>(n), 0.0);
  int max_order = n - 1;
  if (max_order > kBesselMaxOrder) {
    if (std::abs(x) > kBesselTailArgument)
      throw Error(ErrorKind::domain,
                  "chains longer than 201 spins need 2 D tau <= 50 for the Bessel kernel");
    max_order = kBesselMaxOrder;
  }
  const auto j = bessel_j_sequence(max_order, x);
  for (int d = 1; d <= max_order; d += 2) kernel[static_cast<std::size_t>(d)] = j[d] * j[d];
  return kernel;
}

double cos_product(const Eigen::MatrixXd& dij, int m, int mp, double t) {
  double p = 1.0;
  const int n = static_cast<int>(dij.rows());
  for (int k = 0; k < n; ++k) {
    if (k == m || k == mp) continue;
    const double a = dij(k, m) + dij(k, mp);
    if (a != 0.0) p *= std::cos(a * t);
  }
  return p;
}

}  // namespace

double stationary_f0(double tau, double d_nn) {
  require_times(tau, 0.0);
  const double j_half = bessel_j(0, 2.0 * d_nn * tau);
  const double denom = 1.0 + bessel_j(0, 4.0 * d_nn * tau);
  if (denom < 1e-13) throw Error(ErrorKind::singularity, "stationary_f0: 1 + J0(4 D tau) vanishes");
  return 2.0 * j_half * j_half / denom;
}

double iz_projection_finite(double tau, const ChainSpec& spec) {
  // Validates spec exactly as the intensity sums do.
  (void)mq_intensities_finite(tau, spec);
  const int n = spec.n_spins;
  const double x = 2.0 * spec.coupling.d_nn * tau;
  detail::CompensatedSum c;
  for (auto sector : {FermionSector::periodic, FermionSector::antiperiodic})
    for (double k : ring_wavevectors(n, sector)) c.add(std::cos(x * std::sin(k)));
  return c.value() / (2.0 * n);
}

double stationary_f0_finite(double tau, const ChainSpec& spec) {
  const double c = iz_projection_finite(tau, spec);
  const double g0 = mq_intensities_finite(tau, spec).intensity(0);
  if (g0 < 1e-13) throw Error(ErrorKind::singularity, "stationary_f0_finite: G0 vanishes");
  return c * c / g0;
}

std::vector<CoherencePair> second_order_pairs(double tau, const CouplingMatrix& couplings) {
  require_times(tau, 0.0);
  const int n = couplings.n_spins();
  const double x = 2.0 * couplings.d_nn() * tau;
  std::vector<double> kernel;
  if (couplings.boundary() == Boundary::cyclic) {
    if (n % 2 != 0)
      throw Error(ErrorKind::invalid_spec, "ring pair kernel needs even N, got " + std::to_string(n));
    kernel = ring_pair_kernel(n, x);
  } else {
    kernel = open_pair_kernel(n, x);
  }

  std::vector<CoherencePair> pairs;
  pairs.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(n) / 4);
  for (int m = 1; m <= n; ++m) {
    for (int mp = m + 1; mp <= n; mp += 2) {
      const double w = kernel[static_cast<std::size_t>(mp - m)] / n;
      if (w != 0.0) pairs.push_back({m, mp, w});
    }
  }
  return pairs;
}

RelaxationCurve f2_curve(double tau, std::span<const double> times,
                         const CouplingMatrix& couplings) {
  for (double t : times) require_times(tau, t);
  const auto pairs = second_order_pairs(tau, couplings);
  const Eigen::MatrixXd& dij = couplings.values();

  RelaxationCurve curve;
  curve.tau = tau;
  curve.order = 2;
  curve.times.assign(times.begin(), times.end());
  curve.f_values.reserve(times.size());
  for (double t : times) {
    detail::CompensatedSum f;
    for (const auto& p : pairs) f.add(p.weight * cos_product(dij, p.m - 1, p.m_prime - 1, t));
    curve.f_values.push_back(f.value());
  }
  return curve;
}

double f2_decay(double tau, double t, const CouplingMatrix& couplings) {
  const double times[] = {t};
  return f2_curve(tau, times, couplings).f_values.front();
}

SecondMomentResult second_moment(double tau, const CouplingMatrix& couplings) {
  const auto pairs = second_order_pairs(tau, couplings);
  const Eigen::MatrixXd& dij = couplings.values();
  const int n = couplings.n_spins();

  detail::CompensatedSum g2, curvature;
  for (const auto& p : pairs) {
    const int m = p.m - 1;
    const int mp = p.m_prime - 1;
    double rate = 0.0;
    for (int k = 0; k < n; ++k) {
      if (k == m || k == mp) continue;
      const double a = dij(k, m) + dij(k, mp);
      rate += a * a;
    }
    g2.add(p.weight);
    curvature.add(p.weight * rate);
  }
  if (g2.value() < kDegenerateIntensity)
    throw Error(ErrorKind::degenerate_input,
                "second_moment: second-order intensity vanishes at tau=" + std::to_string(tau));

  SecondMomentResult out;
  out.tau = tau;
  out.m2 = curvature.value() / g2.value();
  out.t_e = std::sqrt(2.0 / out.m2);
  return out;
}

double gaussian_envelope(double m2, double t) {
  if (!(m2 >= 0.0) || !(t >= 0.0))
    throw Error(ErrorKind::domain, "gaussian_envelope needs m2 >= 0 and t >= 0");
  return std::exp(-m2 * t * t / 2.0);
}

}  // namespace mqchain
