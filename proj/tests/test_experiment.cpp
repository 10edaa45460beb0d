#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "aoii/experiment.hpp"

using namespace aoii;

namespace {

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::vector<std::string> fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("aoii_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST_CASE("delay and mode parsing") {
  const auto g = DelayChoice::parse("geometric:0.7");
  CHECK(g.kind == DelayChoice::Kind::geometric);
  CHECK(g.name() == "geometric");
  CHECK(g.parameter_text() == "0.7");
  CHECK(DelayChoice::parse("zipf:3").parameter_text() == "3");
  CHECK(DelayChoice::parse("file:/tmp/x.txt").parameter_text() == "/tmp/x.txt");
  CHECK_THROWS(DelayChoice::parse("geometric"));
  CHECK_THROWS(DelayChoice::parse("geometric:1.5"));
  CHECK_THROWS(DelayChoice::parse("poisson:2"));
  CHECK(parse_mode("sweep") == Mode::sweep);
  CHECK_THROWS(parse_mode("plot"));
}

TEST_CASE("experiment validation") {
  ExperimentSpec spec;
  CHECK_NOTHROW(spec.validate());
  spec.p_grid = {0.6};
  CHECK_THROWS(spec.validate());
  spec.p_grid = {};
  CHECK_THROWS(spec.validate());
  spec = ExperimentSpec{};
  spec.tau_grid.clear();
  CHECK_THROWS(spec.validate());
  spec = ExperimentSpec{};
  spec.mode = Mode::compare;
  spec.runs = 1;
  CHECK_THROWS(spec.validate());
}

TEST_CASE("analytic grid csv") {
  ExperimentSpec spec;
  std::ostringstream out, err;
  REQUIRE(run_experiment(spec, out, err) == 0);
  const auto rows = lines_of(out.str());
  REQUIRE(rows.size() == 21);
  CHECK(rows[0] ==
        "assumption,delay,delay_params,p,tau,aoii_analytic,idle_sum,head_busy_sum,tail_sigma,aoii_sim_mean,"
        "aoii_sim_stderr,runs,epochs,seed");
  const auto first = fields(rows[1]);
  REQUIRE(first.size() == 14);
  CHECK(first[0] == "a1");
  CHECK(first[1] == "geometric");
  CHECK(first[2] == "0.7");
  CHECK(first[3] == "0.1");
  CHECK(first[4] == "0");
  CHECK_FALSE(first[5].empty());
  for (std::size_t i = 9; i < 14; ++i) CHECK(first[i].empty());
  const auto last = fields(rows[20]);
  CHECK(last[3] == "0.4");
  CHECK(last[4] == "inf");
  CHECK(std::stod(last[5]) == doctest::Approx(1.25));
}

TEST_CASE("compare output is deterministic and carries z-scores") {
  ExperimentSpec spec;
  spec.mode = Mode::compare;
  spec.assumption = Assumption::terminating;
  spec.p_grid = {0.2, 0.4};
  spec.tau_grid = {PolicyThreshold(1), PolicyThreshold::infinite()};
  spec.runs = 5;
  spec.epochs = 4000;
  spec.seed = 42;
  std::ostringstream a, b, err;
  const int status = run_experiment(spec, a, err);
  spec.threads = 1;
  run_experiment(spec, b, err);
  CHECK(a.str() == b.str());
  CHECK(status != 1);
  const auto rows = lines_of(a.str());
  REQUIRE(rows.size() == 5);
  CHECK(rows[0].substr(rows[0].size() - 8) == ",z_score");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto f = fields(rows[i]);
    REQUIRE(f.size() == 15);
    CHECK(f[11] == "5");
    CHECK(f[12] == "4000");
    CHECK(f[13] == "42");
    CHECK_FALSE(f[14].empty());
  }
}

TEST_CASE("simulate mode works for a unit-delay channel") {
  ExperimentSpec spec;
  spec.mode = Mode::simulate;
  spec.t_max = 1;
  spec.p_grid = {0.3};
  spec.tau_grid = {PolicyThreshold(0)};
  spec.runs = 3;
  spec.epochs = 2000;
  std::ostringstream out, err;
  REQUIRE(run_experiment(spec, out, err) == 0);
  const auto f = fields(lines_of(out.str()).at(1));
  for (std::size_t i = 5; i < 9; ++i) CHECK(f[i].empty());
  CHECK_FALSE(f[9].empty());

  spec.mode = Mode::analytic;
  std::ostringstream out2, err2;
  CHECK(run_experiment(spec, out2, err2) == 1);
  CHECK(err2.str().find("t_max") != std::string::npos);
}

TEST_CASE("sweep writes csv and svg, trace writes per-slot files") {
  const auto dir = scratch_dir("sweep");
  ExperimentSpec spec;
  spec.mode = Mode::sweep;
  spec.delay = DelayChoice::parse("zipf:3");
  spec.p_grid = {0.1, 0.3};
  spec.tau_grid = {PolicyThreshold(0), PolicyThreshold(2)};
  spec.runs = 3;
  spec.epochs = 3000;
  spec.out_dir = dir;
  spec.trace = true;
  std::ostringstream out, err;
  CHECK(run_experiment(spec, out, err) != 1);
  CHECK(std::filesystem::exists(dir / "sweep_a1_zipf.csv"));
  const auto svg = slurp(dir / "sweep_a1_zipf.svg");
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
  std::size_t polylines = 0, circles = 0;
  for (auto pos = svg.find("<polyline"); pos != std::string::npos; pos = svg.find("<polyline", pos + 1)) ++polylines;
  for (auto pos = svg.find("<circle"); pos != std::string::npos; pos = svg.find("<circle", pos + 1)) ++circles;
  CHECK(polylines == 2);
  CHECK(circles == 4 + 2);  // grid markers plus one legend marker per tau

  const auto trace = lines_of(slurp(dir / "trace_a1_zipf_p0.1_tau2.csv"));
  REQUIRE(trace.size() == 3001);
  CHECK(trace[0] == "slot,X,X_hat,delta,t,i");
  CHECK(trace[1] == "0,0,0,0,0,-1");
  std::filesystem::remove_all(dir);
}

TEST_CASE("verify mode passes on a small configuration") {
  ExperimentSpec spec;
  spec.mode = Mode::verify;
  spec.p_grid = {0.2};
  spec.t_max = 4;
  std::ostringstream out, err;
  CHECK(run_experiment(spec, out, err) == 0);
  CHECK(out.str().find("FAIL") == std::string::npos);
  CHECK(out.str().find("kernel-enumeration") != std::string::npos);
  CHECK(out.str().find("aoii-chain") != std::string::npos);
}

TEST_CASE("delay files") {
  const auto dir = scratch_dir("file");
  std::filesystem::create_directories(dir);
  {
    std::ofstream f(dir / "delay.txt");
    f << "0.6\n0.3\noverflow: 0.1\n";
  }
  ExperimentSpec spec;
  spec.assumption = Assumption::terminating;
  spec.delay = DelayChoice::parse("file:" + (dir / "delay.txt").string());
  spec.p_grid = {0.25};
  spec.tau_grid = {PolicyThreshold(1)};
  std::ostringstream out, err;
  CHECK(run_experiment(spec, out, err) == 0);
  CHECK(make_params(spec, 0.25).t_max() == 2);

  spec.assumption = Assumption::capped;
  std::ostringstream out2, err2;
  CHECK(run_experiment(spec, out2, err2) == 1);
  std::filesystem::remove_all(dir);
}
