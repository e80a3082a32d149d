#include "mqchain/fermion_engine.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "detail/summation.hpp"

namespace mqchain {
namespace {

void require_nearest_neighbor(const ChainSpec& spec) {
  if (spec.coupling.mode != CouplingMode::nearest_neighbor)
    throw Error(ErrorKind::unsupported_model,
                "free-fermion solution needs nearest-neighbour couplings");
}

void require_even_ring(const ChainSpec& spec) {
  if (spec.boundary != Boundary::cyclic)
    throw Error(ErrorKind::invalid_spec, "coherence sums need a cyclic chain");
  if (spec.n_spins % 2 != 0)
    throw Error(ErrorKind::invalid_spec,
                "cyclic fermion momenta need even N, got " + std::to_string(spec.n_spins));
}

void require_tau(double tau) {
  if (!(tau >= 0.0) || !std::isfinite(tau))
    throw Error(ErrorKind::domain, "preparation time must be finite and non-negative");
}

}  // namespace

double CoherenceSpectrum::intensity(int order) const {
  const auto it = intensities.find(order);
  return it == intensities.end() ? 0.0 : it->second;
}

double CoherenceSpectrum::total() const {
  detail::CompensatedSum s;
  for (const auto& [order, g] : intensities) s.add(g);
  return s.value();
}

std::vector<double> ring_wavevectors(int n_spins, FermionSector sector) {
  const double shift = sector == FermionSector::periodic ? 0.0 : 0.5;
  std::vector<double> ks;
  ks.reserve(static_cast<std::size_t>(n_spins));
  for (int n = -n_spins / 2; n < n_spins / 2; ++n)
    ks.push_back(2.0 * std::numbers::pi * (n + shift) / n_spins);
  return ks;
}

FermionSpectrum spectrum(const ChainSpec& spec, double omega0) {
  validate(spec);
  require_nearest_neighbor(spec);
  FermionSpectrum out;
  out.boundary = spec.boundary;
  out.larmor_offset = omega0;
  const int n = spec.n_spins;
  if (spec.boundary == Boundary::open) {
    for (int i = 1; i <= n; ++i) out.wavevectors.push_back(std::numbers::pi * i / (n + 1));
  } else {
    require_even_ring(spec);
    out.wavevectors = ring_wavevectors(n, FermionSector::periodic);
  }
  out.energies.reserve(out.wavevectors.size());
  for (double k : out.wavevectors)
    out.energies.push_back(spec.coupling.d_nn * std::cos(k) + omega0);
  return out;
}

CoherenceSpectrum mq_intensities_infinite(double tau, double d_nn) {
  require_tau(tau);
  const double j0 = bessel_j(0, 4.0 * d_nn * tau);
  CoherenceSpectrum out;
  out.tau = tau;
  out.intensities[0] = 0.5 + 0.5 * j0;
  out.intensities[2] = 0.25 - 0.25 * j0;
  out.intensities[-2] = out.intensities[2];
  return out;
}

CoherenceSpectrum mq_intensities_finite(double tau, const ChainSpec& spec) {
  require_tau(tau);
  validate(spec);
  require_nearest_neighbor(spec);
  require_even_ring(spec);

  const int n = spec.n_spins;
  const double angle = 2.0 * spec.coupling.d_nn * tau;
  detail::CompensatedSum zero, two;
  for (auto sector : {FermionSector::periodic, FermionSector::antiperiodic}) {
    for (double k : ring_wavevectors(n, sector)) {
      const double s = std::sin(angle * std::sin(k));
      const double c = std::cos(angle * std::sin(k));
      zero.add(c * c);
      two.add(s * s);
    }
  }
  CoherenceSpectrum out;
  out.tau = tau;
  out.n_spins = n;
  out.intensities[0] = zero.value() / (2.0 * n);
  out.intensities[2] = two.value() / (4.0 * n);
  out.intensities[-2] = out.intensities[2];
  return out;
}

TransferResult transfer_ratio(const ChainSpec& spec, int source, int target, double t,
                              double omega0) {
  validate(spec);
  require_nearest_neighbor(spec);
  if (spec.boundary != Boundary::open)
    throw Error(ErrorKind::invalid_spec, "state transfer needs an open chain");
  const int n = spec.n_spins;
  if (source < 1 || source > n || target < 1 || target > n)
    throw Error(ErrorKind::domain, "spin index out of range 1.." + std::to_string(n));
  if (!std::isfinite(t)) throw Error(ErrorKind::domain, "time must be finite");

  const FermionSpectrum fs = spectrum(spec, omega0);
  std::complex<double> amp{0.0, 0.0};
  for (std::size_t i = 0; i < fs.wavevectors.size(); ++i) {
    const double k = fs.wavevectors[i];
    const double weight = std::sin(k * source) * std::sin(k * target);
    amp += std::polar(weight, -fs.energies[i] * t);
  }
  const double scale = 2.0 / (n + 1);
  return TransferResult{source, target, t, std::norm(amp * scale)};
}

std::vector<TransferResult> transfer_profile(const ChainSpec& spec, int source, int target,
                                             std::span<const double> t_grid, double omega0) {
  std::vector<TransferResult> out;
  out.reserve(t_grid.size());
  for (double t : t_grid) out.push_back(transfer_ratio(spec, source, target, t, omega0));
  return out;
}

}  // namespace mqchain
