#include "aoii/aoii.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "aoii/cost.hpp"
#include "aoii/kernel.hpp"

namespace aoii {

double expected_aoii_infinite_tau(double p) {
  if (!(p > 0.0 && p <= 0.5)) throw std::invalid_argument(fmt::format("p = {} outside (0, 1/2]", p));
  return 1.0 / (2.0 * p);
}

double tail_sigma(const ModelParams& params, int tau, const StationarySolution& stat) {
  params.require_analytic();
  if (stat.tau != tau || stat.omega != params.t_max() + tau + 1) {
    throw std::invalid_argument("stationary solution was computed for a different threshold");
  }
  const int t_max = params.t_max();
  const int omega = stat.omega;
  const double p = params.p();
  auto pi = [&](int i) { return stat.pi[static_cast<std::size_t>(i)]; };

  // Weight of the direct jump source -> source + t for source >= 1, discard
  // branch included in terminating mode.
  auto jump = [&](int source, int t) {
    double w = params.delay_prob(t) * conditional_kernel(params, source, source + t, t);
    if (params.assumption() == Assumption::terminating) {
      w += params.overflow() * terminated_kernel(params, source, source + t);
    }
    return w;
  };

  double numerator = 0.0;
  double loop = 0.0;
  for (int t = 1; t <= t_max; ++t) {
    if (params.assumption() == Assumption::capped) {
      const double w = params.delay_prob(t) * conditional_kernel(params, 1, 1 + t, t);
      const double shortcut = params.delay_prob(t) * p * std::pow(1.0 - p, t - 1);
      if (std::abs(w - shortcut) > 1e-12 * std::max(1.0, shortcut)) {
        throw std::logic_error(fmt::format("direct-jump weight {} disagrees with p(1-p)^(t-1) form {}", w, shortcut));
      }
      double head_cost = 0.0;
      double head_mass = 0.0;
      for (int i = omega - t; i <= omega - 1; ++i) {
        head_cost += action_cost(params, i, Action::transmit) * pi(i);
        head_mass += pi(i);
      }
      const double pi_t = w * (head_mass + stat.tail);
      numerator += w * head_cost + tail_cost_increment(params, t) * pi_t;
      loop += w;
    } else {
      double head_cost = 0.0;
      double pi_t = jump(omega, t) * stat.tail;
      for (int i = omega - t; i <= omega - 1; ++i) {
        const double w = jump(i, t);
        head_cost += w * action_cost(params, i, Action::transmit) * pi(i);
        pi_t += w * pi(i);
      }
      numerator += head_cost + tail_cost_increment(params, t) * pi_t;
      loop += jump(omega, t);
    }
  }
  const double denominator = 1.0 - loop;
  if (!(denominator > 0.0)) {
    throw std::logic_error(fmt::format("tail series denominator {} is not positive", denominator));
  }
  return numerator / denominator;
}

AoiiReport expected_aoii(const ModelParams& params, PolicyThreshold tau, StationaryRoute route) {
  AoiiReport report;
  report.tau = tau;
  report.p = params.p();
  report.assumption = params.assumption();
  report.t_max = params.t_max();

  if (tau.is_infinite()) {
    report.idle_sum = expected_aoii_infinite_tau(params.p());
    report.expected_aoii = report.idle_sum;
    return report;
  }

  params.require_analytic();
  const int threshold = tau.value();
  StationarySolution stat = (threshold <= 1 && !(threshold == 1 && route == StationaryRoute::linear_system))
                                ? solve_stationary_smalltau(params, threshold)
                                : solve_stationary(params, threshold);

  for (int i = 0; i < threshold; ++i) {
    report.idle_sum += action_cost(params, i, Action::idle) * stat.pi[static_cast<std::size_t>(i)];
  }
  for (int i = threshold; i < stat.omega; ++i) {
    report.head_busy_sum += action_cost(params, i, Action::transmit) * stat.pi[static_cast<std::size_t>(i)];
  }
  report.tail_sigma = tail_sigma(params, threshold, stat);
  report.expected_aoii = report.idle_sum + report.head_busy_sum + report.tail_sigma;
  report.stationary = std::move(stat);
  return report;
}

}  // namespace aoii
