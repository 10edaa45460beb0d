#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "aoii/model.hpp"

using namespace aoii;

namespace {

// (1,1) entry of the explicit source transition matrix raised to t.
double matrix_power_stay(double p, int t) {
  Eigen::Matrix2d step;
  step << 1 - p, p, p, 1 - p;
  Eigen::Matrix2d acc = Eigen::Matrix2d::Identity();
  for (int i = 0; i < t; ++i) acc = acc * step;
  return acc(0, 0);
}

double sum(const DelaySpec& d) {
  double s = d.overflow;
  for (double v : d.pmf) s += v;
  return s;
}

}  // namespace

TEST_CASE("same-state probability examples") {
  CHECK(same_state_prob(0.37, 0) == 1.0);
  CHECK(same_state_prob(0.3, 1) == doctest::Approx(0.7).epsilon(1e-15));
  // Two-step paths: stay-stay or flip-flip.
  CHECK(same_state_prob(0.2, 2) == doctest::Approx(0.8 * 0.8 + 0.2 * 0.2).epsilon(1e-15));
  CHECK(same_state_prob(0.5, 7) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("same-state probability matches the matrix power") {
  for (double p : {0.01, 0.05, 0.2, 0.35, 0.5}) {
    for (int t = 0; t <= 64; ++t) {
      CAPTURE(p);
      CAPTURE(t);
      CHECK(std::abs(same_state_prob(p, t) - matrix_power_stay(p, t)) <= 1e-12);
      CHECK(std::abs(flipped_state_prob(p, t) - (1.0 - matrix_power_stay(p, t))) <= 1e-12);
    }
  }
}

TEST_CASE("geometric delay") {
  const auto unit = geometric_delay(1.0, 5, Assumption::capped);
  CHECK(unit.pmf == std::vector<double>{1, 0, 0, 0, 0});

  const auto a2 = geometric_delay(0.7, 5, Assumption::terminating);
  CHECK(a2.overflow == doctest::Approx(0.00243).epsilon(1e-12));
  CHECK(std::abs(sum(a2) - 1.0) <= 1e-12);
  CHECK(a2.pmf[1] == doctest::Approx(0.21).epsilon(1e-12));

  const auto a1 = geometric_delay(0.7, 5, Assumption::capped);
  const double raw[] = {0.7, 0.21, 0.063, 0.0189, 0.00567};
  double raw_sum = 0.0;
  for (double r : raw) raw_sum += r;
  for (int t = 1; t <= 5; ++t) CHECK(a1.prob(t) == doctest::Approx(raw[t - 1] / raw_sum).epsilon(1e-12));
  CHECK(a1.overflow == 0.0);
  CHECK(std::abs(sum(a1) - 1.0) <= 1e-12);
}

TEST_CASE("zipf delay") {
  const auto z = zipf_delay(3.0, 5);
  double norm = 0.0;
  for (int i = 1; i <= 5; ++i) norm += 1.0 / (i * i * i);
  CHECK(z.prob(1) == doctest::Approx(1.0 / norm).epsilon(1e-14));
  CHECK(z.prob(1) == doctest::Approx(0.84341).epsilon(1e-5));
  CHECK(std::abs(sum(z) - 1.0) <= 1e-12);
  const auto steep = zipf_delay(80.0, 5);
  CHECK(steep.prob(1) == doctest::Approx(1.0));
  CHECK(steep.prob(2) < 1e-20);
}

TEST_CASE("constructor outputs satisfy their mode's sum invariant") {
  for (int t_max : {1, 2, 5, 12}) {
    for (double ps : {0.1, 0.5, 0.7, 1.0}) {
      CHECK_NOTHROW(geometric_delay(ps, t_max, Assumption::capped).validate(Assumption::capped));
      CHECK_NOTHROW(geometric_delay(ps, t_max, Assumption::terminating).validate(Assumption::terminating));
    }
    for (double a : {0.5, 1.0, 3.0}) {
      CHECK_NOTHROW(zipf_delay(a, t_max).validate(Assumption::capped));
      CHECK_NOTHROW(zipf_delay(a, t_max).validate(Assumption::terminating));
    }
  }
}

TEST_CASE("expected transmission time") {
  CHECK(expected_transmission_time(ModelParams(0.2, Assumption::capped, DelaySpec{{1, 0}, 0})) == 1.0);
  CHECK(expected_transmission_time(ModelParams(0.2, Assumption::capped, DelaySpec{{0.2, 0.2, 0.2, 0.2, 0.2}, 0})) ==
        doctest::Approx(3.0).epsilon(1e-14));

  double direct = 5 * std::pow(0.3, 5);
  for (int t = 1; t <= 5; ++t) direct += t * std::pow(0.3, t - 1) * 0.7;
  const ModelParams a2(0.2, Assumption::terminating, geometric_delay(0.7, 5, Assumption::terminating));
  CHECK(expected_transmission_time(a2) == doctest::Approx(direct).epsilon(1e-14));

  for (double ps : {0.05, 0.3, 0.9}) {
    for (auto mode : {Assumption::capped, Assumption::terminating}) {
      const ModelParams params(0.3, mode, geometric_delay(ps, 6, mode));
      const double et = expected_transmission_time(params);
      CHECK(et >= 1.0);
      CHECK(et <= 6.0);
    }
  }
}

TEST_CASE("parameter validation") {
  const auto d = geometric_delay(0.7, 5, Assumption::capped);
  CHECK_THROWS_AS(ModelParams(0.0, Assumption::capped, d), std::invalid_argument);
  CHECK_THROWS_AS(ModelParams(0.51, Assumption::capped, d), std::invalid_argument);
  CHECK_NOTHROW(ModelParams(0.5, Assumption::capped, d));
  CHECK_THROWS_AS(ModelParams(0.2, Assumption::capped, DelaySpec{{0.5, 0.4}, 0}), std::invalid_argument);
  CHECK_THROWS_AS(ModelParams(0.2, Assumption::capped, DelaySpec{{0.5, 0.4}, 0.1}), std::invalid_argument);
  CHECK_NOTHROW(ModelParams(0.2, Assumption::terminating, DelaySpec{{0.5, 0.4}, 0.1}));

  const ModelParams single(0.2, Assumption::capped, DelaySpec{{1.0}, 0});
  CHECK_THROWS_AS(single.require_analytic(), std::invalid_argument);
  CHECK_NOTHROW(ModelParams(0.2, Assumption::capped, d).require_analytic());
}

TEST_CASE("delay file parsing") {
  const auto d = parse_delay_text("# two-slot channel\n0.5\n\n0.2\noverflow: 0.3\n");
  CHECK(d.pmf == std::vector<double>{0.5, 0.2});
  CHECK(d.overflow == doctest::Approx(0.3));
  CHECK_THROWS(parse_delay_text("0.5\nabc\n"));
  CHECK_THROWS(parse_delay_text(""));
}

TEST_CASE("threshold parsing and policy") {
  CHECK(PolicyThreshold::parse("inf").is_infinite());
  CHECK(PolicyThreshold::parse("3").value() == 3);
  CHECK(PolicyThreshold::parse("3").to_string() == "3");
  CHECK(PolicyThreshold::infinite().to_string() == "inf");
  CHECK_THROWS(PolicyThreshold::parse("-1"));
  CHECK_THROWS(PolicyThreshold::parse("x"));
  CHECK_THROWS_AS(PolicyThreshold::infinite().value(), std::logic_error);
  CHECK(PolicyThreshold(2).transmits_at(2));
  CHECK_FALSE(PolicyThreshold(2).transmits_at(1));
  CHECK_FALSE(PolicyThreshold::infinite().transmits_at(1'000'000));
  CHECK(parse_assumption("a2") == Assumption::terminating);
  CHECK_THROWS(parse_assumption("a3"));
}
