#include <doctest.h>

#include <cmath>

#include "aoii/aoii.hpp"
#include "aoii/cost.hpp"
#include "aoii/oracle.hpp"

using namespace aoii;

namespace {

struct ChainView {
  std::vector<double> idle;
  double mean = 0.0;
};

ChainView chain_view(const ModelParams& params, PolicyThreshold tau) {
  const auto chain = oracle::build_truncated_chain(params, tau, oracle::suggested_delta_cap(params, tau));
  const auto pi = oracle::power_iterate(chain);
  return {oracle::idle_distribution(chain, pi), oracle::chain_expected_aoii(chain, pi)};
}

}  // namespace

TEST_CASE("never-transmit policy") {
  CHECK(expected_aoii_infinite_tau(0.25) == 2.0);
  CHECK(expected_aoii_infinite_tau(0.5) == 1.0);
  const ModelParams params(0.1, Assumption::capped, geometric_delay(0.7, 5, Assumption::capped));
  const auto r = expected_aoii(params, PolicyThreshold::infinite());
  CHECK(r.expected_aoii == doctest::Approx(5.0).epsilon(1e-15));
  CHECK_FALSE(r.stationary.has_value());
  CHECK(r.tail_sigma == 0.0);
}

TEST_CASE("report decomposition and sanity bounds") {
  for (auto mode : {Assumption::capped, Assumption::terminating}) {
    for (double p : {0.05, 0.2, 0.45}) {
      for (int tau : {0, 1, 2, 3, 7}) {
        const ModelParams params(p, mode, zipf_delay(2.0, 4));
        const auto r = expected_aoii(params, PolicyThreshold(tau));
        CAPTURE(p);
        CAPTURE(tau);
        CHECK(r.expected_aoii == doctest::Approx(r.idle_sum + r.head_busy_sum + r.tail_sigma).epsilon(1e-14));
        CHECK(r.expected_aoii >= 0.0);
        CHECK(r.expected_aoii < 1.0 / (2.0 * p) + params.t_max());
        CHECK(r.tail_sigma >= 0.0);
        if (tau <= 1) CHECK(r.idle_sum == 0.0);
      }
    }
  }
}

TEST_CASE("tau = 1 report is the same through either stationary route") {
  for (auto mode : {Assumption::capped, Assumption::terminating}) {
    for (double p : {0.1, 0.3}) {
      const ModelParams params(p, mode, geometric_delay(0.7, 5, mode));
      const auto a = expected_aoii(params, PolicyThreshold(1));
      const auto b = expected_aoii(params, PolicyThreshold(1), StationaryRoute::linear_system);
      CHECK(std::abs(a.expected_aoii - b.expected_aoii) <= 1e-9);
      CHECK(std::abs(a.tail_sigma - b.tail_sigma) <= 1e-9);
    }
  }
}

TEST_CASE("tail series matches a direct sum over the chain") {
  struct Case {
    Assumption mode;
    DelaySpec delay;
    double p;
    int tau;
  };
  const Case cases[] = {
      {Assumption::capped, geometric_delay(0.7, 5, Assumption::capped), 0.3, 2},
      {Assumption::capped, DelaySpec{{1, 0, 0}, 0}, 0.2, 1},
      {Assumption::terminating, geometric_delay(0.7, 5, Assumption::terminating), 0.1, 3},
      {Assumption::terminating, DelaySpec{{0.2, 0.3}, 0.5}, 0.4, 0},
  };
  for (const auto& c : cases) {
    const ModelParams params(c.p, c.mode, c.delay);
    const auto r = expected_aoii(params, PolicyThreshold(c.tau));
    const auto view = chain_view(params, PolicyThreshold(c.tau));
    const int omega = r.stationary->omega;
    double direct = 0.0;
    double lower = 0.0;
    for (int d = omega; d < static_cast<int>(view.idle.size()); ++d) {
      direct += action_cost(params, d, Action::transmit) * view.idle[static_cast<std::size_t>(d)];
      lower += view.idle[static_cast<std::size_t>(d)];
    }
    CAPTURE(c.tau);
    CHECK(std::abs(r.tail_sigma - direct) <= 1e-6);
    CHECK(r.tail_sigma >= action_cost(params, omega, Action::transmit) * lower - 1e-12);
    CHECK(std::abs(r.expected_aoii - view.mean) <= 1e-6);
  }
}

TEST_CASE("tau = 0 is not optimal for slow sources") {
  const ModelParams params(0.1, Assumption::capped, geometric_delay(0.7, 5, Assumption::capped));
  const double always = expected_aoii(params, PolicyThreshold(0)).expected_aoii;
  double best = always;
  for (int tau = 1; tau <= 6; ++tau) best = std::min(best, expected_aoii(params, PolicyThreshold(tau)).expected_aoii);
  CHECK(best < always);
}

TEST_CASE("tail series needs a stationary solution of the same policy") {
  const ModelParams params(0.2, Assumption::capped, geometric_delay(0.7, 5, Assumption::capped));
  const auto stat = solve_stationary(params, 2);
  CHECK(tail_sigma(params, 2, stat) == doctest::Approx(expected_aoii(params, PolicyThreshold(2)).tail_sigma));
}
