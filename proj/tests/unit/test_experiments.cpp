#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "mqchain/experiments.hpp"
#include "support.hpp"

using namespace mqchain;
using test::kD;

namespace {

struct Run {
  int status = -1;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "mqchain");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Run r;
  r.status = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

// Runs the installed binary so exit statuses are observed as a shell sees them.
Run binary(const std::string& args) {
  Run r;
  const std::string command = std::string(MQCHAIN_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(command.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t got = 0;
  while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::string body(const std::string& text) {
  std::istringstream in(text);
  std::string out;
  for (std::string line; std::getline(in, line);)
    if (line.rfind("# generated", 0) != 0) out += line + '\n';
  return out;
}

std::vector<std::vector<double>> rows(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::vector<double>> out;
  bool header = true;
  for (std::string line; std::getline(in, line);) {
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      continue;
    }
    std::vector<double> row;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) row.push_back(std::stod(cell));
    out.push_back(row);
  }
  return out;
}

std::string summary(const std::string& text, const std::string& key) {
  const auto at = text.find("# summary: " + key + " = ");
  if (at == std::string::npos) return {};
  const auto start = at + 14 + key.size();
  return text.substr(start, text.find('\n', start) - start);
}

}  // namespace

TEST_CASE("grid parsing") {
  const auto g = GridSpec::parse("0:1:5");
  CHECK(g.values() == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
  const auto lg = GridSpec::parse("1e-6:1e-3:4:log");
  const auto v = lg.values();
  CHECK(v.front() == 1e-6);
  CHECK(v.back() == 1e-3);
  CHECK(v[1] == doctest::Approx(1e-5));
  CHECK(GridSpec::parse("2:2:1").values() == std::vector<double>{2.0});
  CHECK(GridSpec::parse(lg.to_string()).values() == v);
  for (const char* bad : {"", "0:1", "0:1:0", "0:1:2.5", "1:0:3", "0:1:3:cubic", "0:1:3:log", "a:1:3",
                          "0:1:3:log:x", "1:1:3"})
    CHECK_THROWS_AS(GridSpec::parse(bad), Error);
}

TEST_CASE("numbers print in shortest round-trip form") {
  CHECK(format_number(0.5) == "0.5");
  CHECK(format_number(1.0) == "1");
  const double x = 0.1 + 0.2;
  CHECK(std::stod(format_number(x)) == x);
}

TEST_CASE("tables reject ragged or non-finite rows") {
  CurveTable t({"a", "b"});
  t.add_row({1.0, 2.0});
  CHECK_THROWS(t.add_row({1.0}));
  CHECK_THROWS(t.add_row({1.0, std::nan("")}));
  CHECK(t.body() == "a,b\n1,2\n");
}

TEST_CASE("infinite intensities start at one and pass one half at the J0 zero") {
  const double tau_half = 2.404825557695773 / (4 * kD);
  const auto r = cli({"intensities", "--tau-grid", "0:" + format_number(2 * tau_half) + ":3"});
  REQUIRE(r.status == 0);
  const auto data = rows(r.out);
  REQUIRE(data.size() == 3);
  CHECK(data[0][1] == 1.0);
  CHECK(data[0][2] == 0.0);
  CHECK(std::abs(data[1][1] - 0.5) < 1e-10);
  for (const auto& row : data) CHECK(std::abs(row[3] - 1.0) < 1e-14);
}

TEST_CASE("finite ring report its gap from the infinite chain") {
  const auto r = cli({"intensities", "--model", "finite", "--n-spins", "8", "--boundary", "cyclic", "--tau-grid",
                      "0:" + format_number(1.0 / kD) + ":11"});
  REQUIRE(r.status == 0);
  double gap = 0.0;
  for (const auto& row : rows(r.out)) {
    const double tau = row[0];
    const double g0 = 0.5 + 0.5 * std::cyl_bessel_j(0.0, 4 * kD * tau);
    gap = std::max(gap, std::abs(row[1] - g0));
  }
  REQUIRE(!summary(r.out, "max_abs_dG0").empty());
  CHECK(std::stod(summary(r.out, "max_abs_dG0")) == doctest::Approx(gap).epsilon(1e-6));
}

TEST_CASE("transfer summaries") {
  const double t_star = std::numbers::sqrt2 * std::numbers::pi / kD;
  const auto r = cli({"transfer", "--n-spins", "3", "--source", "1", "--target", "3", "--t-grid",
                      "0:" + format_number(2 * t_star) + ":2001"});
  REQUIRE(r.status == 0);
  CHECK(std::stod(summary(r.out, "max_ratio")) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(std::stod(summary(r.out, "argmax_t")) == doctest::Approx(t_star).epsilon(1e-3));

  const auto same = cli({"transfer", "--n-spins", "6", "--source", "2", "--target", "2"});
  REQUIRE(same.status == 0);
  CHECK(rows(same.out)[0][1] == doctest::Approx(1.0).epsilon(1e-14));

  const auto long_chain = cli({"transfer", "--n-spins", "21", "--source", "1", "--t-grid",
                               "0:" + format_number(40 / kD) + ":4001"});
  REQUIRE(long_chain.status == 0);
  CHECK(std::abs(std::stod(summary(long_chain.out, "max_ratio")) - 0.6196705078683765) < 1e-12);
}

TEST_CASE("relaxation outputs") {
  const auto st = cli({"relaxation", "--mode", "stationary", "--tau-grid", "0:" + format_number(3 / kD) + ":7"});
  REQUIRE(st.status == 0);
  CHECK(rows(st.out)[0][1] == 1.0);

  const auto times = cli({"relaxation", "--mode", "times", "--coupling", "full", "--n-spins", "150", "--tau-grid",
                          "0:" + format_number(3 / kD) + ":16"});
  REQUIRE(times.status == 0);
  const auto data = rows(times.out);
  CHECK(data.size() == 15);  // tau = 0 carries no double-quantum signal
  for (const auto& row : data) {
    CHECK(row[0] > 0.0);
    CHECK(row[2] > 0.0);
    CHECK(std::isfinite(row[2]));
  }

  const auto decay = cli({"relaxation", "--mode", "decay", "--n-spins", "8", "--boundary", "cyclic", "--tau",
                          format_number(0.3 / kD), "--verify"});
  CHECK(decay.status == 0);
  CHECK(rows(decay.out).size() == 101);
}

TEST_CASE("identical configurations give identical table bodies") {
  const std::vector<std::vector<std::string>> configs{
      {"intensities", "--model", "finite", "--n-spins", "10", "--boundary", "cyclic", "--threads", "3"},
      {"transfer", "--n-spins", "9", "--source", "3"},
      {"relaxation", "--mode", "times", "--n-spins", "40", "--coupling", "full", "--threads", "2"},
      {"relaxation", "--mode", "decay", "--n-spins", "30", "--coupling", "full"},
      {"verify", "--checks", "transfer.perfect,bessel"}};
  for (const auto& args : configs) {
    const auto a = cli(args);
    const auto b = cli(args);
    CHECK(a.status == 0);
    CHECK(body(a.out) == body(b.out));
  }
  const auto one = cli({"relaxation", "--mode", "times", "--n-spins", "40", "--coupling", "full", "--threads", "1"});
  const auto four = cli({"relaxation", "--mode", "times", "--n-spins", "40", "--coupling", "full", "--threads", "4"});
  CHECK(rows(one.out) == rows(four.out));
}

TEST_CASE("config files mirror the flags and flags override them") {
  const std::string path = "mqchain_test_config.ini";
  {
    std::ofstream f(path);
    f << "n-spins = 5\nsource = 1\ntarget = 5\n";
  }
  const auto from_file = cli({"transfer", "--config", path});
  REQUIRE(from_file.status == 0);
  CHECK(from_file.out.find("# config: n-spins = 5") != std::string::npos);
  const auto overridden = cli({"transfer", "--config", path, "--n-spins", "7", "--target", "7"});
  REQUIRE(overridden.status == 0);
  CHECK(overridden.out.find("# config: n-spins = 7") != std::string::npos);
  std::remove(path.c_str());
}

TEST_CASE("verification subsets") {
  const auto r = cli({"verify", "--checks", "transfer"});
  CHECK(r.status == 0);
  CHECK(r.out.find("transfer.perfect_N3,") != std::string::npos);
  CHECK(r.out.find("intensities.") == std::string::npos);
  const auto none = cli({"verify", "--checks", "nothing"});
  CHECK(none.status == exit_code::usage);
}

TEST_CASE("exit statuses of the binary") {
  CHECK(binary("verify").status == exit_code::success);
  CHECK(binary("verify --tolerance 0").status == exit_code::verification);
  CHECK(binary("intensities --tau-grid 1:0:3").status == exit_code::usage);
  CHECK(binary("intensities --boundary sideways").status == exit_code::usage);
  CHECK(binary("").status == exit_code::usage);
  CHECK(binary("transfer --n-spins 4 --target 9").status == exit_code::usage);
  CHECK(binary("relaxation --mode decay --n-spins 14 --boundary cyclic --verify").status == exit_code::capacity);
  CHECK(binary("--help").status == exit_code::success);
}

TEST_CASE("output goes to the requested file") {
  const std::string path = "mqchain_test_output.csv";
  const auto r = cli({"intensities", "--output", path});
  CHECK(r.status == 0);
  CHECK(r.out.empty());
  std::ifstream f(path);
  std::stringstream text;
  text << f.rdbuf();
  CHECK(rows(text.str()).size() == 101);
  std::remove(path.c_str());
}
