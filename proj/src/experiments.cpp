#include "mqchain/experiments.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>

#include <CLI11.hpp>

#include "detail/parallel.hpp"
#include "mqchain/ed_oracle.hpp"
#include "mqchain/fermion_engine.hpp"
#include "mqchain/zz_relaxation.hpp"

namespace mqchain {
namespace {

Error usage_error(const std::string& what) { return Error(ErrorKind::invalid_spec, what); }

double parse_double(std::string_view text, const char* what) {
  double v = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last)
    throw usage_error(std::string("cannot parse ") + what + " '" + std::string(text) + "'");
  return v;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

CurveTable start_table(const ExperimentConfig& config, std::vector<std::string> columns) {
  CurveTable table(std::move(columns));
  table.add_metadata(std::string("mqchain ") + kEngineVersion);
  table.add_metadata("generated: " + utc_timestamp());
  for (const auto& [key, value] : config.echo()) table.add_metadata("config: " + key + " = " + value);
  return table;
}

}  // namespace

// ---------------------------------------------------------------- grids

const char* to_string(Command c) {
  switch (c) {
    case Command::intensities: return "intensities";
    case Command::transfer: return "transfer";
    case Command::relaxation: return "relaxation";
    case Command::verify: return "verify";
  }
  return "?";
}

const char* to_string(IntensityModel m) { return m == IntensityModel::infinite ? "infinite" : "finite"; }

const char* to_string(RelaxationMode m) {
  switch (m) {
    case RelaxationMode::stationary: return "stationary";
    case RelaxationMode::decay: return "decay";
    case RelaxationMode::times: return "times";
  }
  return "?";
}


GridSpec GridSpec::parse(std::string_view text) {
  std::vector<std::string_view> parts;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = text.find(':', pos);
    parts.push_back(text.substr(pos, next == std::string_view::npos ? next : next - pos));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  if (parts.size() != 3 && parts.size() != 4)
    throw usage_error("grid must look like start:stop:count[:log], got '" + std::string(text) + "'");
  GridSpec g;
  g.start = parse_double(parts[0], "grid start");
  g.stop = parse_double(parts[1], "grid stop");
  const double count = parse_double(parts[2], "grid count");
  if (count != std::floor(count) || count < 1 || count > 1e7)
    throw usage_error("grid count must be a positive integer");
  g.count = static_cast<int>(count);
  if (parts.size() == 4) {
    if (parts[3] == "log") {
      g.spacing = GridSpacing::log;
    } else if (parts[3] == "lin" || parts[3] == "linear") {
      g.spacing = GridSpacing::linear;
    } else {
      throw usage_error("grid spacing must be 'log' or 'linear'");
    }
  }
  g.check();
  return g;
}

void GridSpec::check() const {
  if (!std::isfinite(start) || !std::isfinite(stop)) throw usage_error("grid bounds must be finite");
  if (count < 1) throw usage_error("grid needs at least one point");
  if (start > stop) throw usage_error("grid start exceeds stop");
  if (count > 1 && start == stop) throw usage_error("grid with several points needs start < stop");
  if (spacing == GridSpacing::log && !(start > 0.0))
    throw usage_error("log grid needs a positive start");
}

std::vector<double> GridSpec::values() const {
  check();
  std::vector<double> v(static_cast<std::size_t>(count));
  if (count == 1) {
    v[0] = start;
    return v;
  }
  for (int i = 0; i < count; ++i) {
    const double f = static_cast<double>(i) / (count - 1);
    if (spacing == GridSpacing::linear) {
      v[i] = start + f * (stop - start);
    } else {
      v[i] = start * std::pow(stop / start, f);
    }
  }
  v.back() = stop;
  return v;
}

std::string GridSpec::to_string() const {
  std::string s = format_number(start) + ":" + format_number(stop) + ":" + std::to_string(count);
  if (spacing == GridSpacing::log) s += ":log";
  return s;
}

// ---------------------------------------------------------------- config

ChainSpec ExperimentConfig::chain() const {
  ChainSpec spec;
  spec.n_spins = n_spins;
  spec.boundary = boundary;
  spec.coupling.mode = coupling;
  spec.coupling.d_nn = d_nn;
  return spec;
}

ExperimentConfig ExperimentConfig::resolved() const {
  ExperimentConfig c = *this;
  if (!(c.d_nn > 0.0) || !std::isfinite(c.d_nn)) throw usage_error("--d-nn must be positive");
  if (c.threads < 1) throw usage_error("--threads must be at least 1");
  const double unit = 1.0 / c.d_nn;
  if (!c.tau_grid) c.tau_grid = GridSpec{0.0, 5.0 * unit, 101, GridSpacing::linear};
  if (!c.t_grid) {
    const double span = c.command == Command::relaxation ? 5.0 : 20.0;
    c.t_grid = GridSpec{0.0, span * unit, c.command == Command::relaxation ? 101 : 401,
                        GridSpacing::linear};
  }
  if (!c.tau) c.tau = unit;
  if (!c.target) c.target = c.n_spins;
  c.tau_grid->check();
  c.t_grid->check();
  return c;
}

std::vector<std::pair<std::string, std::string>> ExperimentConfig::echo() const {
  const ExperimentConfig c = resolved();
  std::vector<std::pair<std::string, std::string>> kv = {
      {"command", mqchain::to_string(c.command)},
      {"n-spins", std::to_string(c.n_spins)},
      {"boundary", mqchain::to_string(c.boundary)},
      {"coupling", mqchain::to_string(c.coupling)},
      {"d-nn", format_number(c.d_nn)},
  };
  switch (c.command) {
    case Command::intensities:
      kv.emplace_back("model", mqchain::to_string(c.model));
      kv.emplace_back("tau-grid", c.tau_grid->to_string());
      break;
    case Command::transfer:
      kv.emplace_back("source", std::to_string(c.source));
      kv.emplace_back("target", std::to_string(*c.target));
      kv.emplace_back("t-grid", c.t_grid->to_string());
      break;
    case Command::relaxation:
      kv.emplace_back("mode", mqchain::to_string(c.mode));
      kv.emplace_back("model", mqchain::to_string(c.model));
      if (c.mode == RelaxationMode::decay) {
        kv.emplace_back("tau", format_number(*c.tau));
        kv.emplace_back("t-grid", c.t_grid->to_string());
        kv.emplace_back("verify", c.verify ? "true" : "false");
      } else {
        kv.emplace_back("tau-grid", c.tau_grid->to_string());
      }
      break;
    case Command::verify:
      if (c.tolerance) kv.emplace_back("tolerance", format_number(*c.tolerance));
      if (!c.checks.empty()) {
        std::string joined;
        for (const auto& s : c.checks) joined += (joined.empty() ? "" : ",") + s;
        kv.emplace_back("checks", joined);
      }
      break;
  }
  return kv;
}

// ---------------------------------------------------------------- table

std::string format_number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw std::runtime_error("number formatting failed");
  return std::string(buf, ptr);
}

CurveTable::CurveTable(std::vector<std::string> columns) : columns_(std::move(columns)) {
  if (columns_.empty()) throw std::invalid_argument("table needs at least one column");
}

void CurveTable::add_row(std::vector<double> row) {
  if (row.size() != columns_.size()) throw std::invalid_argument("row width does not match header");
  for (double v : row)
    if (!std::isfinite(v)) throw std::invalid_argument("table values must be finite");
  rows_.push_back(std::move(row));
}

void CurveTable::add_metadata(std::string line) { metadata_.push_back(std::move(line)); }
void CurveTable::add_summary(std::string line) { summary_.push_back(std::move(line)); }

std::string CurveTable::body() const {
  std::string s;
  for (std::size_t i = 0; i < columns_.size(); ++i) s += (i ? "," : "") + columns_[i];
  s += '\n';
  for (const auto& row : rows_) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) s += ',';
      s += format_number(row[i]);
    }
    s += '\n';
  }
  return s;
}

void CurveTable::write(std::ostream& os) const {
  for (const auto& m : metadata_) os << "# " << m << '\n';
  os << body();
  for (const auto& m : summary_) os << "# summary: " << m << '\n';
}

// ---------------------------------------------------------------- commands

CurveTable cmd_intensities(const ExperimentConfig& config) {
  const ExperimentConfig c = config.resolved();
  const auto taus = c.tau_grid->values();
  CurveTable table = start_table(c, {"tau", "G0", "G2", "sum"});
  const ChainSpec spec = c.chain();
  if (c.model == IntensityModel::finite) (void)mq_intensities_finite(0.0, spec);

  const auto spectra = detail::parallel_map(taus.size(), c.threads, [&](std::size_t i) {
    return c.model == IntensityModel::infinite ? mq_intensities_infinite(taus[i], c.d_nn)
                                               : mq_intensities_finite(taus[i], spec);
  });
  double max_gap = 0.0;
  for (const auto& g : spectra) {
    const double g0 = g.intensity(0);
    const double g2 = g.intensity(2);
    table.add_row({g.tau, g0, g2, g0 + g.intensity(2) + g.intensity(-2)});
    if (c.model == IntensityModel::finite)
      max_gap = std::max(max_gap, std::abs(g0 - mq_intensities_infinite(g.tau, c.d_nn).intensity(0)));
  }
  if (c.model == IntensityModel::finite)
    table.add_summary("max_abs_dG0 = " + format_number(max_gap));
  return table;
}

CurveTable cmd_transfer(const ExperimentConfig& config) {
  const ExperimentConfig c = config.resolved();
  const auto times = c.t_grid->values();
  CurveTable table = start_table(c, {"t", "ratio"});
  const ChainSpec spec = c.chain();
  const auto results = detail::parallel_map(times.size(), c.threads, [&](std::size_t i) {
    return transfer_ratio(spec, c.source, *c.target, times[i]);
  });
  double best = -1.0;
  double best_t = 0.0;
  for (const auto& r : results) {
    table.add_row({r.time, r.ratio});
    if (r.ratio > best) {
      best = r.ratio;
      best_t = r.time;
    }
  }
  table.add_summary("max_ratio = " + format_number(best));
  table.add_summary("argmax_t = " + format_number(best_t));
  return table;
}

CommandResult cmd_relaxation(const ExperimentConfig& config) {
  const ExperimentConfig c = config.resolved();
  const ChainSpec spec = c.chain();

  if (c.mode == RelaxationMode::stationary) {
    const auto taus = c.tau_grid->values();
    CurveTable table = start_table(c, {"tau", "F0st"});
    const auto values = detail::parallel_map(taus.size(), c.threads, [&](std::size_t i) {
      return c.model == IntensityModel::infinite ? stationary_f0(taus[i], c.d_nn)
                                                 : stationary_f0_finite(taus[i], spec);
    });
    for (std::size_t i = 0; i < taus.size(); ++i) table.add_row({taus[i], values[i]});
    return {std::move(table), exit_code::success};
  }

  const CouplingMatrix couplings = build_couplings(spec);

  if (c.mode == RelaxationMode::times) {
    const auto taus = c.tau_grid->values();
    CurveTable table = start_table(c, {"tau", "M2", "t_e"});
    struct Row {
      bool ok = false;
      SecondMomentResult r;
    };
    const auto rows = detail::parallel_map(taus.size(), c.threads, [&](std::size_t i) {
      try {
        return Row{true, second_moment(taus[i], couplings)};
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::degenerate_input) throw;
        return Row{false, {taus[i], 0.0, 0.0}};
      }
    });
    for (const auto& row : rows) {
      if (row.ok) {
        table.add_row({row.r.tau, row.r.m2, row.r.t_e});
      } else {
        table.add_metadata("skipped tau = " + format_number(row.r.tau) +
                           ": second-order intensity below 1e-12");
      }
    }
    return {std::move(table), exit_code::success};
  }

  // decay
  const auto times = c.t_grid->values();
  const double tau = *c.tau;
  CurveTable table = start_table(c, {"t", "F2", "gaussian"});
  const auto chunks = detail::parallel_map(times.size(), c.threads, [&](std::size_t i) {
    return f2_decay(tau, times[i], couplings);
  });
  const double f_initial = f2_decay(tau, 0.0, couplings);
  const SecondMomentResult moment = second_moment(tau, couplings);
  for (std::size_t i = 0; i < times.size(); ++i)
    table.add_row({times[i], chunks[i], f_initial * gaussian_envelope(moment.m2, times[i])});
  table.add_summary("M2 = " + format_number(moment.m2));
  table.add_summary("t_e = " + format_number(moment.t_e));

  int status = exit_code::success;
  if (c.verify) {
    constexpr double kTolerance = 1e-10;
    const auto curves = relaxation_profile(spec, tau, RelaxationKind::zz, couplings, times);
    double worst = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i)
      worst = std::max(worst, std::abs(curves[1].f_values[i] - chunks[i]));
    const bool ok = worst <= kTolerance;
    table.add_summary("verify_max_abs_dF2 = " + format_number(worst));
    table.add_summary("verify_tolerance = " + format_number(kTolerance));
    table.add_summary(std::string("verify_passed = ") + (ok ? "true" : "false"));
    if (!ok) status = exit_code::verification;
  }
  return {std::move(table), status};
}

// ---------------------------------------------------------------- verify

bool VerifyReport::passed() const {
  for (const auto& c : checks)
    if (!c.passed) return false;
  return true;
}

std::string VerifyReport::body() const {
  std::string s = "check,tolerance,observed,passed\n";
  for (const auto& c : checks)
    s += c.name + "," + format_number(c.tolerance) + "," + format_number(c.observed) + "," +
         (c.passed ? "1" : "0") + "\n";
  return s;
}

namespace {

class Suite {
 public:
  Suite(const ExperimentConfig& c) : config_(c) {}

  bool wants(const std::string& name) const {
    if (config_.checks.empty()) return true;
    for (const auto& prefix : config_.checks)
      if (name.rfind(prefix, 0) == 0) return true;
    return false;
  }

  template <typename Fn>
  void run(const std::string& name, double tolerance, Fn observe) {
    if (!wants(name)) return;
    const double tol = config_.tolerance.value_or(tolerance);
    const double observed = observe();
    report_.checks.push_back({name, tol, observed, std::isfinite(observed) && observed <= tol});
  }

  VerifyReport take() { return std::move(report_); }

 private:
  ExperimentConfig config_;
  VerifyReport report_;
};

ChainSpec make_chain(int n, Boundary b, CouplingMode mode, double d) {
  ChainSpec s;
  s.n_spins = n;
  s.boundary = b;
  s.coupling.mode = mode;
  s.coupling.d_nn = d;
  return s;
}

std::vector<double> linspace(double a, double b, int n) {
  return GridSpec{a, b, n, GridSpacing::linear}.values();
}

}  // namespace

VerifyReport cmd_verify(const ExperimentConfig& config) {
  const double d = config.d_nn;
  Suite suite(config);

  suite.run("intensities.sum_rule_infinite", 1e-12, [&] {
    double worst = 0.0;
    for (double x : linspace(0.0, 5.0, 200))
      worst = std::max(worst, std::abs(mq_intensities_infinite(x / d, d).total() - 1.0));
    return worst;
  });

  const auto prep_taus = linspace(0.0, 3.0 / d, 20);
  for (int n : {4, 6, 8, 10}) {
    const ChainSpec ring = make_chain(n, Boundary::cyclic, CouplingMode::nearest_neighbor, d);
    const std::string tag = "intensities.ring_N" + std::to_string(n);
    if (!suite.wants(tag)) continue;
    const auto oracle = mq_experiment(ring, prep_taus);
    suite.run(tag, 1e-10, [&] {
      double worst = 0.0;
      for (const auto& g : oracle) {
        const auto f = mq_intensities_finite(g.tau, ring);
        for (int order : {0, 2, -2}) worst = std::max(worst, std::abs(f.intensity(order) - g.intensity(order)));
      }
      return worst;
    });
    suite.run(tag + "_higher_orders", 1e-12, [&] {
      double worst = 0.0;
      for (const auto& g : oracle)
        for (const auto& [order, v] : g.intensities)
          if (order != 0 && std::abs(order) != 2) worst = std::max(worst, std::abs(v));
      return worst;
    });
  }

  for (int n = 2; n <= 9; ++n) {
    const ChainSpec chain = make_chain(n, Boundary::open, CouplingMode::nearest_neighbor, d);
    suite.run("transfer.oracle_N" + std::to_string(n), 1e-10, [&] {
      double worst = 0.0;
      for (int i = 0; i < 10; ++i) {
        const int l = 1 + i % n;
        const int m = 1 + (3 * i + 1) % n;
        const double t = 0.7 * (i + 1) / d;
        worst = std::max(worst, std::abs(transfer_ratio(chain, l, m, t).ratio -
                                         transfer_oracle(chain, l, m, t).ratio));
      }
      return worst;
    });
    suite.run("transfer.conservation_N" + std::to_string(n), 1e-10, [&] {
      double worst = 0.0;
      for (double t : {0.3 / d, 2.1 / d, 7.7 / d}) {
        double total = 0.0;
        for (int m = 1; m <= n; ++m) total += transfer_ratio(chain, 1, m, t).ratio;
        worst = std::max(worst, std::abs(total - 1.0));
      }
      return worst;
    });
  }

  suite.run("transfer.perfect_N3", 1e-9, [&] {
    const ChainSpec chain = make_chain(3, Boundary::open, CouplingMode::nearest_neighbor, d);
    const double t = std::numbers::sqrt2 * std::numbers::pi / d;
    return std::max({1.0 - transfer_ratio(chain, 1, 3, t).ratio,
                     1.0 - transfer_oracle(chain, 1, 3, t, TransferEvolution::flip_flop).ratio,
                     1.0 - transfer_oracle(chain, 1, 3, t, TransferEvolution::two_quantum).ratio});
  });

  suite.run("transfer.thermal_N5", 1e-9, [&] {
    const ChainSpec chain = make_chain(5, Boundary::open, CouplingMode::nearest_neighbor, d);
    double worst = 0.0;
    for (double beta : {0.1, 1.0, 5.0})
      for (double t : {0.5 / d, 3.0 / d})
        for (int m = 1; m <= 5; ++m)
          worst = std::max(worst, std::abs(transfer_oracle(chain, 1, m, t, TransferEvolution::two_quantum, beta).ratio -
                                           transfer_oracle(chain, 1, m, t, TransferEvolution::two_quantum).ratio));
    return worst;
  });

  suite.run("unitary.map_N2_to_N8", 1e-12, [&] {
    double worst = 0.0;
    for (int n = 2; n <= 8; ++n) {
      const auto couplings = build_couplings(make_chain(n, Boundary::open, CouplingMode::nearest_neighbor, d));
      const auto u = unitary_even_flip(n).matrix;
      const ComplexMatrix mapped = u * build_hamiltonian(HamiltonianKind::two_quantum, couplings).matrix * u.adjoint();
      const ComplexMatrix ff = build_hamiltonian(HamiltonianKind::flip_flop, couplings).matrix;
      worst = std::max(worst, max_abs(mapped - kUnitaryMapConstant * ff) / d);
    }
    return worst;
  });

  suite.run("unitary.phase_shift_sign", 0.0, [&] {
    double worst = 0.0;
    for (int n = 2; n <= 6; ++n) {
      const auto couplings = build_couplings(make_chain(n, Boundary::open, CouplingMode::full_dipolar, d));
      const auto h0 = build_hamiltonian(HamiltonianKind::two_quantum, couplings).matrix;
      const auto hphi = build_hamiltonian(HamiltonianKind::two_quantum_phase, couplings, {0.5}).matrix;
      worst = std::max(worst, max_abs(hphi + h0));
    }
    return worst;
  });

  for (int n : {4, 6, 8, 10}) {
    suite.run("relaxation.f2_initial_N" + std::to_string(n), 1e-10, [&] {
      const ChainSpec ring = make_chain(n, Boundary::cyclic, CouplingMode::nearest_neighbor, d);
      const auto couplings = build_couplings(ring);
      double worst = 0.0;
      for (double x : linspace(0.0, 3.0, 20))
        worst = std::max(worst, std::abs(f2_decay(x / d, 0.0, couplings) -
                                         mq_intensities_finite(x / d, ring).intensity(2)));
      return worst;
    });
  }

  suite.run("relaxation.f2_oracle_N8", 1e-10, [&] {
    const ChainSpec ring = make_chain(8, Boundary::cyclic, CouplingMode::nearest_neighbor, d);
    const auto couplings = build_couplings(ring);
    const auto times = linspace(0.0, 3.0 / d, 10);
    double worst = 0.0;
    for (double x : linspace(0.1, 2.0, 10)) {
      const auto curves = relaxation_profile(ring, x / d, RelaxationKind::zz, times);
      const auto analytic = f2_curve(x / d, times, couplings);
      for (std::size_t i = 0; i < times.size(); ++i)
        worst = std::max(worst, std::abs(curves[1].f_values[i] - analytic.f_values[i]));
    }
    return worst;
  });

  suite.run("relaxation.stationary_N8", 1e-3, [&] {
    const ChainSpec ring = make_chain(8, Boundary::cyclic, CouplingMode::nearest_neighbor, d);
    const auto relax = build_couplings(make_chain(8, Boundary::cyclic, CouplingMode::full_dipolar, d));
    const double tau = 0.4 / d;
    const auto times = linspace(10.0 / d, 20.0 / d, 200);
    const auto curves = relaxation_profile(ring, tau, RelaxationKind::zz, relax, times);
    const double f0 = mq_intensities_finite(tau, ring).intensity(0);
    double mean = 0.0;
    for (double v : curves[0].f_values) mean += v / f0;
    mean /= static_cast<double>(times.size());
    return std::abs(mean - stationary_f0_finite(tau, ring));
  });

  suite.run("relaxation.second_moment_N8", 1e-6, [&] {
    const auto couplings = build_couplings(make_chain(8, Boundary::open, CouplingMode::full_dipolar, d));
    const double h = 1e-4 / d;
    double worst = 0.0;
    for (double x : linspace(0.3, 3.0, 10)) {
      const double tau = x / d;
      const double f0 = f2_decay(tau, 0.0, couplings);
      const double fh = f2_decay(tau, h, couplings);
      const double curvature = 2.0 * (fh - f0) / (h * h);  // F is even in t
      const double m2_fd = -curvature / f0;
      const double m2 = second_moment(tau, couplings).m2;
      worst = std::max(worst, std::abs(m2_fd - m2) / m2);
    }
    return worst;
  });

  suite.run("bessel.normalization", 1e-10, [&] {
    double worst = 0.0;
    for (double x : {0.5, 5.0, 20.0, 50.0}) {
      const int k = static_cast<int>(std::ceil(x)) + 40;
      const auto j = bessel_j_sequence(k, x);
      double total = j[0] * j[0];
      for (int n = 1; n <= k; ++n) total += 2.0 * j[n] * j[n];
      worst = std::max(worst, 1.0 - total);
    }
    return worst;
  });

  return suite.take();
}

// ---------------------------------------------------------------- front end

namespace {

template <typename E>
std::map<std::string, E> choices(std::initializer_list<std::pair<const char*, E>> items) {
  std::map<std::string, E> m;
  for (const auto& [k, v] : items) m.emplace(k, v);
  return m;
}

void emit(const CurveTable& table, const ExperimentConfig& c, std::ostream& out) {
  if (c.output.empty() || c.output == "-") {
    table.write(out);
    return;
  }
  std::ofstream file(c.output);
  if (!file) throw usage_error("cannot open output file '" + c.output + "'");
  table.write(file);
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multiple-quantum NMR spin-chain dynamics: coherence intensities, "
               "state transfer and ZZ-model relaxation"};
  app.set_config("--config", "", "Flat key = value file mirroring the flags");
  app.require_subcommand(1);

  ExperimentConfig c;
  std::string tau_grid, t_grid;
  std::optional<int> target;
  std::optional<double> tau, tolerance;
  std::string checks;

  app.add_option("--n-spins", c.n_spins, "Number of spins N")->capture_default_str();
  app.add_option("--boundary", c.boundary, "Chain boundary")
      ->transform(CLI::CheckedTransformer(choices<Boundary>({{"open", Boundary::open}, {"cyclic", Boundary::cyclic}})))
      ->option_text("open|cyclic");
  app.add_option("--coupling", c.coupling, "Coupling model")
      ->transform(CLI::CheckedTransformer(choices<CouplingMode>(
          {{"nn", CouplingMode::nearest_neighbor}, {"full", CouplingMode::full_dipolar}})))
      ->option_text("nn|full");
  app.add_option("--d-nn", c.d_nn, "Nearest-neighbour coupling D (rad/s)")->capture_default_str();
  app.add_option("--model", c.model, "Intensity model")
      ->transform(CLI::CheckedTransformer(choices<IntensityModel>(
          {{"infinite", IntensityModel::infinite}, {"finite", IntensityModel::finite}})))
      ->option_text("infinite|finite");
  app.add_option("--tau-grid", tau_grid, "Preparation times start:stop:count[:log] (s)");
  app.add_option("--t-grid", t_grid, "Evolution times start:stop:count[:log] (s)");
  app.add_option("--tau", tau, "Preparation time for relaxation decay (s)");
  app.add_option("--source", c.source, "Initially polarized spin l");
  app.add_option("--target", target, "Observed spin m (default N)");
  app.add_option("--mode", c.mode, "Relaxation output")
      ->transform(CLI::CheckedTransformer(choices<RelaxationMode>({{"stationary", RelaxationMode::stationary},
                                                                  {"decay", RelaxationMode::decay},
                                                                  {"times", RelaxationMode::times}})))
      ->option_text("stationary|decay|times");
  app.add_flag("--verify", c.verify, "Cross-check relaxation decay against exact diagonalization");
  app.add_option("--output", c.output, "Output path (default: standard output)");
  app.add_option("--threads", c.threads, "Worker threads for grid sweeps")->capture_default_str();
  app.add_option("--tolerance", tolerance, "verify: replace every tolerance with this value");
  app.add_option("--checks", checks, "verify: comma-separated check name prefixes");

  auto* sub_int = app.add_subcommand("intensities", "Coherence intensities G0, G2 versus tau");
  auto* sub_tr = app.add_subcommand("transfer", "Polarization transfer ratio versus t");
  auto* sub_rel = app.add_subcommand("relaxation", "ZZ-model relaxation curves");
  auto* sub_ver = app.add_subcommand("verify", "Oracle-equivalence suite");
  for (auto* s : {sub_int, sub_tr, sub_rel, sub_ver}) s->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_code::success : exit_code::usage;
  }

  try {
    if (sub_int->parsed()) c.command = Command::intensities;
    if (sub_tr->parsed()) c.command = Command::transfer;
    if (sub_rel->parsed()) c.command = Command::relaxation;
    if (sub_ver->parsed()) c.command = Command::verify;
    if (!tau_grid.empty()) c.tau_grid = GridSpec::parse(tau_grid);
    if (!t_grid.empty()) c.t_grid = GridSpec::parse(t_grid);
    c.tau = tau;
    c.target = target;
    c.tolerance = tolerance;
    std::stringstream ss(checks);
    for (std::string item; std::getline(ss, item, ',');)
      if (!item.empty()) c.checks.push_back(item);

    switch (c.command) {
      case Command::intensities:
        emit(cmd_intensities(c), c, out);
        return exit_code::success;
      case Command::transfer:
        emit(cmd_transfer(c), c, out);
        return exit_code::success;
      case Command::relaxation: {
        if (c.verify && c.mode != RelaxationMode::decay)
          throw usage_error("--verify applies to --mode decay only");
        if (c.verify) require_oracle_capacity(c.n_spins);
        const auto result = cmd_relaxation(c);
        emit(result.table, c, out);
        if (result.exit_status != exit_code::success)
          err << "verification failed: analytic decay deviates from the oracle\n";
        return result.exit_status;
      }
      case Command::verify: {
        const VerifyReport report = cmd_verify(c);
        if (report.checks.empty()) throw usage_error("--checks selected no verification checks");
        std::ostringstream text;
        text << "# mqchain " << kEngineVersion << '\n' << "# generated: " << utc_timestamp() << '\n';
        for (const auto& [key, value] : c.echo()) text << "# config: " << key << " = " << value << '\n';
        text << report.body();
        std::size_t failed = 0;
        for (const auto& check : report.checks) failed += check.passed ? 0 : 1;
        text << "# summary: " << report.checks.size() << " checks, " << failed << " failed\n";
        if (c.output.empty() || c.output == "-") {
          out << text.str();
        } else {
          std::ofstream file(c.output);
          if (!file) throw usage_error("cannot open output file '" + c.output + "'");
          file << text.str();
        }
        return report.passed() ? exit_code::success : exit_code::verification;
      }
    }
  } catch (const Error& e) {
    err << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
    return e.kind() == ErrorKind::capacity ? exit_code::capacity : exit_code::usage;
  }
  return exit_code::usage;
}

}  // namespace mqchain
