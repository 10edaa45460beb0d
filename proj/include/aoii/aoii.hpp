#pragma once

// Expected AoII of a threshold policy, split into the idle head, the
// transmitting head and the analytic tail series.

#include <optional>

#include "aoii/model.hpp"
#include "aoii/stationary.hpp"

namespace aoii {

struct AoiiReport {
  double expected_aoii = 0.0;
  double idle_sum = 0.0;       // sum_{delta < tau} C(delta, idle) pi_delta
  double head_busy_sum = 0.0;  // sum_{tau <= delta < omega} C(delta, transmit) pi_delta
  double tail_sigma = 0.0;     // sum_{delta >= omega} C(delta, transmit) pi_delta
  PolicyThreshold tau;
  double p = 0.0;
  Assumption assumption = Assumption::capped;
  int t_max = 0;
  std::optional<StationarySolution> stationary;  // empty for tau = inf
};

/// Which stationary solver feeds the report for tau = 1.
enum class StationaryRoute { automatic, linear_system };

/// Never-transmit policy: 1 / (2p).
double expected_aoii_infinite_tau(double p);

/// Sum of C(delta, transmit) pi_delta over delta >= omega, in closed form.
/// Throws std::logic_error if the series denominator is not positive.
double tail_sigma(const ModelParams& params, int tau, const StationarySolution& stat);

/// tau = inf uses the closed form; tau in {0, 1} the explicit stationary
/// forms; larger tau the linear system. `route` forces the linear system for
/// tau = 1.
AoiiReport expected_aoii(const ModelParams& params, PolicyThreshold tau,
                         StationaryRoute route = StationaryRoute::automatic);

}  // namespace aoii
