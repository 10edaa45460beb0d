#pragma once

// Brute-force references for the closed forms: exhaustive enumeration of
// source trajectories during one transmission, and the full slot-by-slot
// chain over (delta, elapsed, channel) states truncated at a cap.

#include <cstdint>
#include <utility>
#include <vector>

#include "aoii/model.hpp"

namespace aoii::oracle {

enum class Outcome { delivered, discarded };

inline constexpr int kMaxEnumeratedSlots = 12;

/// Distribution of the idle AoII reached when a transmission started at
/// `delta` ends after t slots (index = AoII). Enumerates all 2^t flip
/// sequences. Throws std::out_of_range for t < 1 or t > 12.
std::vector<double> enumerate_kernel(const ModelParams& params, int delta, int t,
                                     Outcome outcome = Outcome::delivered);

/// Expected AoII summed over the t occupied slots (start slot included).
double enumerate_cost(const ModelParams& params, int delta, int t);

/// Expected AoII k slots after the start, transmission still in flight.
double enumerate_step_cost(const ModelParams& params, int delta, int k);

struct Transition {
  std::int32_t to;
  double prob;
};

/// Row-stochastic single-slot chain reachable from (0, 0, idle). Mass that
/// would exceed the cap is absorbed at AoII = cap.
class TruncatedChain {
 public:
  int delta_cap() const { return delta_cap_; }
  const std::vector<SystemState>& states() const { return states_; }
  const std::vector<std::vector<Transition>>& rows() const { return rows_; }
  std::size_t size() const { return states_.size(); }
  /// Index of `s`, or -1 if the state is not in the chain.
  std::int64_t index_of(const SystemState& s) const;

  /// Per-slot completion hazards: at elapsed e (0-based, before the slot),
  /// the probability the transmission is delivered / discarded at the end
  /// of that slot given it has lasted e slots.
  const std::vector<double>& delivery_hazard() const { return deliver_; }
  const std::vector<double>& discard_hazard() const { return discard_; }

  /// Law of the channel occupation implied by the hazards: entry t-1 is the
  /// probability of delivery after exactly t slots; `second` is the discard
  /// probability.
  std::pair<std::vector<double>, double> duration_marginal() const;

 private:
  friend TruncatedChain build_truncated_chain(const ModelParams&, PolicyThreshold, int);
  int delta_cap_ = 0;
  int t_max_ = 0;
  std::vector<SystemState> states_;
  std::vector<std::vector<Transition>> rows_;
  std::vector<std::int32_t> lookup_;
  std::vector<double> deliver_;
  std::vector<double> discard_;
};

/// Smallest cap accepted for a policy: omega + 10 t_max (10 t_max + 1 for
/// the never-transmit policy).
int minimum_delta_cap(const ModelParams& params, PolicyThreshold tau);

/// A cap large enough that the stationary mass at the cap is far below
/// 1e-10 for the given policy.
int suggested_delta_cap(const ModelParams& params, PolicyThreshold tau);

/// Throws std::invalid_argument below the minimum cap and
/// std::length_error above 10^7 states.
TruncatedChain build_truncated_chain(const ModelParams& params, PolicyThreshold tau, int delta_cap);

/// Lazy power iteration pi <- (pi + pi P) / 2 from the idle AoII-zero state
/// until ||pi P - pi||_1 <= tol. Throws std::runtime_error after
/// `max_iterations`.
std::vector<double> power_iterate(const TruncatedChain& chain, double tol = 1e-12,
                                  int max_iterations = 1'000'000);

/// Idle-state probabilities indexed by AoII, length cap + 1.
std::vector<double> idle_distribution(const TruncatedChain& chain, const std::vector<double>& pi);

/// Time-average AoII, sum over states of delta * pi.
double chain_expected_aoii(const TruncatedChain& chain, const std::vector<double>& pi);

/// Stationary mass on states with AoII equal to the cap.
double cap_mass(const TruncatedChain& chain, const std::vector<double>& pi);

}  // namespace aoii::oracle
