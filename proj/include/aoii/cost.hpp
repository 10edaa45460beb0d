#pragma once

// Expected AoII accumulated while a decision taken at an idle state occupies
// the channel. The slot of the decision itself is always included.

#include "aoii/model.hpp"

namespace aoii {

/// Expected AoII k slots after a transmission starts at idle AoII `delta`,
/// given the transmission is still in flight. Requires 0 <= k <= t_max - 1.
double conditional_step_cost(const ModelParams& params, int delta, int k);

/// Expected AoII summed over the t slots of a transmission lasting t slots
/// (1 <= t <= t_max).
double conditional_transmission_cost(const ModelParams& params, int delta, int t);

/// C(delta, idle) = delta; C(delta, transmit) averages the transmission cost
/// over the delay law, with discarded transmissions costed as t_max slots.
double action_cost(const ModelParams& params, int delta, Action action);

/// C(delta, transmit) - C(delta - t, transmit) for delta > t, which does not
/// depend on delta. Requires 1 <= t <= t_max.
double tail_cost_increment(const ModelParams& params, int t);

}  // namespace aoii
