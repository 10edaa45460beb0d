#include "aoii/cost.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace aoii {
namespace {

double step_cost(double p, int delta, int k) {
  const double q = 1.0 - p;
  double sum = 0.0;
  if (delta == 0) {
    for (int h = 1; h <= k; ++h) sum += h * same_state_prob(p, k - h) * p * std::pow(q, h - 1);
    return sum;
  }
  for (int h = 1; h <= k - 1; ++h) sum += h * flipped_state_prob(p, k - h) * p * std::pow(q, h - 1);
  return sum + (delta + k) * std::pow(q, k);
}

double transmission_cost(double p, int delta, int t) {
  double sum = 0.0;
  for (int k = 0; k < t; ++k) sum += step_cost(p, delta, k);
  return sum;
}

void check_delta(int delta) {
  if (delta < 0) throw std::out_of_range(fmt::format("AoII {} must be non-negative", delta));
}

}  // namespace

double conditional_step_cost(const ModelParams& params, int delta, int k) {
  check_delta(delta);
  if (k < 0 || k > params.t_max() - 1) {
    throw std::out_of_range(fmt::format("step {} outside [0, {}]", k, params.t_max() - 1));
  }
  return step_cost(params.p(), delta, k);
}

double conditional_transmission_cost(const ModelParams& params, int delta, int t) {
  check_delta(delta);
  if (t < 1 || t > params.t_max()) {
    throw std::out_of_range(fmt::format("transmission time {} outside [1, {}]", t, params.t_max()));
  }
  return transmission_cost(params.p(), delta, t);
}

double action_cost(const ModelParams& params, int delta, Action action) {
  check_delta(delta);
  if (action == Action::idle) return static_cast<double>(delta);
  const double p = params.p();
  double cost = 0.0;
  for (int t = 1; t <= params.t_max(); ++t) {
    const double w = params.delay_prob(t);
    if (w != 0.0) cost += w * transmission_cost(p, delta, t);
  }
  if (params.assumption() == Assumption::terminating && params.overflow() != 0.0) {
    cost += params.overflow() * transmission_cost(p, delta, params.t_max());
  }
  return cost;
}

double tail_cost_increment(const ModelParams& params, int t) {
  if (t < 1 || t > params.t_max()) {
    throw std::out_of_range(fmt::format("shift {} outside [1, {}]", t, params.t_max()));
  }
  const double p = params.p();
  const double q = 1.0 - p;
  // Over i occupied slots the AoII difference t survives with probability (1-p)^k at step k.
  auto growth = [&](int i) { return t * (1.0 - std::pow(q, i)) / p; };
  double inc = 0.0;
  for (int i = 1; i <= params.t_max(); ++i) inc += params.delay_prob(i) * growth(i);
  if (params.assumption() == Assumption::terminating) inc += params.overflow() * growth(params.t_max());
  return inc;
}

}  // namespace aoii
