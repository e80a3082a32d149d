#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "mqchain/ed_oracle.hpp"
#include "oracles/kron_reference.hpp"
#include "support.hpp"

using namespace mqchain;
using test::chain;
using test::kD;
using test::linspace;
using test::ring;
using cplx = std::complex<double>;

namespace {

DensityMatrix density(const ComplexMatrix& m) {
  return DensityMatrix{static_cast<int>(std::lround(std::log2(static_cast<double>(m.rows())))), m,
                       DensityConvention::traceless_deviation};
}

}  // namespace

TEST_CASE("operators match explicit Kronecker products") {
  const int n = 4;
  for (int s = 1; s <= n; ++s) {
    CHECK(max_abs(spin_component(Axis::x, s, n).matrix - oracle::site('x', s, n)) == 0.0);
    CHECK(max_abs(spin_component(Axis::y, s, n).matrix - oracle::site('y', s, n)) == 0.0);
    CHECK(max_abs(spin_component(Axis::z, s, n).matrix - oracle::site('z', s, n)) == 0.0);
  }
  CHECK(max_abs(total_iz(n).matrix - oracle::total_z(n)) == 0.0);
}

TEST_CASE("Hamiltonians match their Kronecker constructions") {
  const int n = 5;
  const auto c = build_couplings(chain(n, Boundary::open, CouplingMode::full_dipolar));
  oracle::Mat tq = oracle::Mat::Zero(1 << n, 1 << n), ff = tq, zz = tq, dz = tq;
  for (int i = 1; i <= n; ++i)
    for (int j = i + 1; j <= n; ++j) {
      using oracle::site;
      const double d = c(i, j);
      tq += -0.5 * d * (site('+', i, n) * site('+', j, n) + site('-', i, n) * site('-', j, n));
      ff += d * (site('+', i, n) * site('-', j, n) + site('-', i, n) * site('+', j, n));
      zz += 2.0 * d * site('z', i, n) * site('z', j, n);
      dz += d * (2.0 * site('z', i, n) * site('z', j, n) - site('x', i, n) * site('x', j, n) -
                 site('y', i, n) * site('y', j, n));
    }
  CHECK(max_abs(build_hamiltonian(HamiltonianKind::two_quantum, c).matrix - tq) < 1e-12 * kD);
  CHECK(max_abs(build_hamiltonian(HamiltonianKind::flip_flop, c).matrix - ff) < 1e-12 * kD);
  CHECK(max_abs(build_hamiltonian(HamiltonianKind::zz, c).matrix - zz) < 1e-12 * kD);
  CHECK(max_abs(build_hamiltonian(HamiltonianKind::secular_dd, c).matrix - dz) < 1e-12 * kD);
}

TEST_CASE("every Hamiltonian is Hermitian") {
  const auto c = build_couplings(chain(6, Boundary::open, CouplingMode::full_dipolar));
  for (auto kind : {HamiltonianKind::two_quantum, HamiltonianKind::two_quantum_phase, HamiltonianKind::flip_flop,
                    HamiltonianKind::zz, HamiltonianKind::secular_dd}) {
    const auto h = build_hamiltonian(kind, c, {0.17}).matrix;
    CHECK(max_abs(h - h.adjoint()) == 0.0);
  }
}

TEST_CASE("two spins under the two-quantum Hamiltonian") {
  const double d = 1000.0;
  const auto h = build_hamiltonian(HamiltonianKind::two_quantum, build_couplings(chain(2, Boundary::open,
                                                                                       CouplingMode::nearest_neighbor, d)))
                     .matrix;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) {
      const bool corner = (r == 0 && c == 3) || (r == 3 && c == 0);
      CHECK(std::abs(h(r, c)) == (corner ? d / 2 : 0.0));
    }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h);
  const auto e = es.eigenvalues();
  CHECK(e(0) == doctest::Approx(-d / 2));
  CHECK(std::abs(e(1)) < 1e-12);
  CHECK(std::abs(e(2)) < 1e-12);
  CHECK(e(3) == doctest::Approx(d / 2));
}

TEST_CASE("two spins under the Ising Hamiltonian") {
  const double d = 1000.0;
  const auto h = build_hamiltonian(HamiltonianKind::zz, build_couplings(chain(2, Boundary::open,
                                                                              CouplingMode::nearest_neighbor, d)))
                     .matrix;
  CHECK(max_abs(h - ComplexMatrix(Eigen::VectorXcd{{d / 2, -d / 2, -d / 2, d / 2}}.asDiagonal())) == 0.0);
}

TEST_CASE("a quarter-turn phase flips the two-quantum Hamiltonian") {
  for (int n : {2, 5, 7}) {
    const auto c = build_couplings(chain(n, Boundary::open, CouplingMode::full_dipolar));
    const auto h0 = build_hamiltonian(HamiltonianKind::two_quantum, c).matrix;
    const auto hphi = build_hamiltonian(HamiltonianKind::two_quantum_phase, c, {0.5}).matrix;
    CHECK(max_abs(hphi + h0) == 0.0);
  }
}

TEST_CASE("even-site flips map the two-quantum onto the flip-flop Hamiltonian") {
  for (int n = 2; n <= 8; ++n) {
    const auto c = build_couplings(chain(n));
    const auto u = unitary_even_flip(n).matrix;
    const ComplexMatrix mapped = u * build_hamiltonian(HamiltonianKind::two_quantum, c).matrix * u.adjoint();
    const auto ff = build_hamiltonian(HamiltonianKind::flip_flop, c).matrix;
    CHECK(max_abs(mapped - kUnitaryMapConstant * ff) < 1e-12 * kD);
    const ComplexMatrix u2 = u * u;
    for (int i = 0; i < u2.rows(); ++i) CHECK(std::abs(std::abs(u2(i, i)) - 1.0) < 1e-15);
    CHECK(max_abs(ComplexMatrix(u2.diagonal().asDiagonal()) - u2) < 1e-15);
  }
  CHECK(max_abs(unitary_even_flip(1).matrix - ComplexMatrix::Identity(2, 2)) == 0.0);
}

TEST_CASE("eigendecomposition agrees with a matrix exponential") {
  const int n = 5;
  const auto c = build_couplings(chain(n, Boundary::open, CouplingMode::full_dipolar));
  const auto rho = density(oracle::site('x', 2, n) + oracle::total_z(n));
  for (auto kind : {HamiltonianKind::two_quantum, HamiltonianKind::secular_dd}) {
    const auto h = build_hamiltonian(kind, c);
    for (double t : {0.0, 0.37 / kD, 4.1 / kD}) {
      const auto out = evolve(rho, h, t);
      CHECK(max_abs(out.matrix - oracle::evolve_expm(h.matrix, rho.matrix, t)) < 1e-11);
    }
  }
}

TEST_CASE("evolution basics") {
  const int n = 6;
  const auto h = build_hamiltonian(HamiltonianKind::two_quantum, build_couplings(ring(n)));
  const auto rho = density(total_iz(n).matrix + spin_component(Axis::x, 3, n).matrix);
  CHECK(max_abs(evolve(rho, h, 0.0).matrix - rho.matrix) < 1e-14);

  const auto out = evolve(rho, h, 2.3 / kD);
  CHECK(std::abs(out.matrix.trace() - rho.matrix.trace()) < 1e-11);
  CHECK(std::abs((out.matrix * out.matrix).trace() - (rho.matrix * rho.matrix).trace()) < 1e-11);

  const auto zz = build_hamiltonian(HamiltonianKind::zz, build_couplings(ring(n)));
  const auto iz = density(total_iz(n).matrix);
  CHECK(max_abs(evolve(iz, zz, 7.0 / kD).matrix - iz.matrix) < 1e-12);

  const Propagator prop(h);
  const auto u = prop.unitary(1.1 / kD);
  CHECK(max_abs(u * u.adjoint() - ComplexMatrix::Identity(u.rows(), u.cols())) < 1e-12);
  CHECK(prop.block_count() > 1);
}

TEST_CASE("coherence decomposition") {
  const int n = 4;
  const auto iz = coherence_decompose(density(total_iz(n).matrix));
  REQUIRE(iz.components.size() == 1);
  CHECK(iz.components.count(0) == 1);

  const ComplexMatrix raise = spin_component(Axis::x, 1, 2).matrix + cplx(0, 1) * spin_component(Axis::y, 1, 2).matrix;
  const ComplexMatrix raise2 = spin_component(Axis::x, 2, 2).matrix + cplx(0, 1) * spin_component(Axis::y, 2, 2).matrix;
  const auto pp = coherence_decompose(density(raise * raise2));
  REQUIRE(pp.components.size() == 1);
  CHECK(pp.components.count(2) == 1);

  const auto sigma = preparation_state(chain(6, Boundary::open, CouplingMode::full_dipolar), 0.9 / kD);
  const auto parts = coherence_decompose(sigma);
  ComplexMatrix sum = ComplexMatrix::Zero(sigma.matrix.rows(), sigma.matrix.cols());
  const auto z = total_iz(6).matrix;
  for (const auto& [order, part] : parts.components) {
    sum += part.matrix;
    CHECK(max_abs(z * part.matrix - part.matrix * z - order * part.matrix) < 1e-13);
    const auto again = coherence_decompose(part);
    REQUIRE(again.components.size() == 1);
    CHECK(max_abs(again.components.begin()->second.matrix - part.matrix) == 0.0);
  }
  CHECK(max_abs(sum - sigma.matrix) < 1e-13);
}

TEST_CASE("nearest-neighbour preparation only creates zero and double quantum coherence") {
  for (const auto& spec : {ring(8), chain(8)}) {
    for (double x : {0.4, 1.3}) {
      const auto g = coherence_intensities(preparation_state(spec, x / kD));
      for (const auto& [order, v] : g.intensities)
        if (order != 0 && std::abs(order) != 2) CHECK(std::abs(v) < 1e-12);
    }
  }
}

TEST_CASE("intensities of the dense experiment") {
  const auto zero = mq_experiment(ring(8), 0.0);
  CHECK(std::abs(zero.intensity(0) - 1.0) < 1e-14);
  for (const auto& [order, v] : zero.intensities)
    if (order != 0) CHECK(v < 1e-28);

  const auto taus = linspace(0.0, 2.0 / kD, 7);
  const auto batch = mq_experiment(ring(8), taus);
  for (std::size_t i = 0; i < taus.size(); ++i) {
    const auto f = mq_intensities_finite(taus[i], ring(8));
    for (int order : {0, 2, -2}) CHECK(std::abs(batch[i].intensity(order) - f.intensity(order)) < 1e-10);
    CHECK(std::abs(batch[i].total() - 1.0) < 1e-12);
  }

  // I_z projection of the evolved state is the zeroth-order intensity in
  // the large-N limit only; at finite N it is the sector average c_N.
  const auto sigma = preparation_state(ring(8), 0.5 / kD);
  const auto iz = total_iz(8).matrix;
  const double c = (sigma.matrix * iz).trace().real() / (iz * iz).trace().real();
  CHECK(c < 1.0);
  CHECK(c > 0.0);
}

TEST_CASE("dipolar tails leak little signal into higher orders") {
  const auto g = mq_experiment(chain(8, Boundary::open, CouplingMode::full_dipolar), 1.0 / kD);
  double higher = 0.0;
  for (const auto& [order, v] : g.intensities)
    if (order != 0 && std::abs(order) != 2) higher += v;
  MESSAGE("higher-order share " << higher);
  CHECK(higher < 0.03);
}

TEST_CASE("relaxation profiles start from the preparation intensities") {
  const auto spec = ring(8);
  const double tau = 0.7 / kD;
  const auto times = linspace(0.0, 3.0 / kD, 6);
  const auto g = mq_experiment(spec, tau);
  for (auto kind : {RelaxationKind::zz, RelaxationKind::secular_dd}) {
    const auto curves = relaxation_profile(spec, tau, kind, times);
    REQUIRE(curves.size() == 2);
    CHECK(curves[0].order == 0);
    CHECK(curves[1].order == 2);
    CHECK(std::abs(curves[0].f_values[0] - g.intensity(0)) < 1e-12);
    CHECK(std::abs(curves[1].f_values[0] - g.intensity(2)) < 1e-12);
  }
  const auto zz = relaxation_profile(spec, tau, RelaxationKind::zz, times);
  const auto analytic = f2_curve(tau, times, build_couplings(spec));
  for (std::size_t i = 0; i < times.size(); ++i) CHECK(std::abs(zz[1].f_values[i] - analytic.f_values[i]) < 1e-10);
}

TEST_CASE("full secular dipolar relaxation settles near the Ising plateau") {
  const auto spec = ring(8);
  const double tau = 0.4 / kD;
  const auto times = linspace(15.0 / kD, 25.0 / kD, 101);
  const auto curves = relaxation_profile(spec, tau, RelaxationKind::secular_dd, times);
  const double g0 = mq_intensities_finite(tau, spec).intensity(0);
  double mean = 0.0;
  for (double v : curves[0].f_values) mean += v / g0;
  mean /= static_cast<double>(times.size());
  MESSAGE("secular plateau " << mean << " vs " << stationary_f0_finite(tau, spec));
  CHECK(std::abs(mean - stationary_f0_finite(tau, spec)) < 5e-2);
}

TEST_CASE("transfer under the two-quantum Hamiltonian") {
  const double t = std::numbers::sqrt2 * std::numbers::pi / kD;
  CHECK(std::abs(transfer_oracle(chain(3), 1, 3, t, TransferEvolution::flip_flop).ratio - 1.0) < 1e-9);
  CHECK(std::abs(transfer_oracle(chain(3), 1, 3, t, TransferEvolution::two_quantum).ratio - 1.0) < 1e-9);
  CHECK(transfer_oracle(chain(4), 2, 2, 0.0).ratio == doctest::Approx(1.0).epsilon(1e-14));

  // Even target: the two evolutions differ by the sign of the polarization.
  const double s = 1.3 / kD;
  const auto ff = transfer_oracle(chain(5), 1, 2, s, TransferEvolution::flip_flop);
  const auto tq = transfer_oracle(chain(5), 1, 2, s, TransferEvolution::two_quantum);
  MESSAGE("N=5 l=1 m=2: flip-flop " << ff.ratio << ", two-quantum " << tq.ratio);
  CHECK(tq.parity_flagged);
  CHECK(!transfer_oracle(chain(5), 1, 3, s).parity_flagged);
}

TEST_CASE("thermal states transfer like the high-temperature state") {
  for (double beta : {0.1, 1.0, 5.0})
    for (int m = 1; m <= 5; ++m) {
      const double t = 2.2 / kD;
      CHECK(std::abs(transfer_oracle(chain(5), 1, m, t, TransferEvolution::two_quantum, beta).ratio -
                     transfer_oracle(chain(5), 1, m, t, TransferEvolution::two_quantum).ratio) < 1e-9);
    }
}

TEST_CASE("oracle limits") {
  auto kind_of = [](auto fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::invalid_spec;
  };
  CHECK(kind_of([] { total_iz(13); }) == ErrorKind::capacity);
  CHECK(kind_of([] { mq_experiment(ring(14), 1e-5); }) == ErrorKind::capacity);
  CHECK(kind_of([] { transfer_oracle(ring(4), 1, 2, 0.0); }) == ErrorKind::invalid_spec);
  CHECK(kind_of([] { spin_component(Axis::z, 0, 3); }) == ErrorKind::domain);
  CHECK(kind_of([] {
          evolve(density(total_iz(3).matrix), build_hamiltonian(HamiltonianKind::zz, build_couplings(chain(4))), 1.0);
        }) == ErrorKind::dimension_mismatch);
}
