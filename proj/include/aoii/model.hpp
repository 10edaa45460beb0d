#pragma once

// System parameters for a slotted transmitter/receiver pair observing a
// two-state symmetric Markov source through a channel with random integer
// transmission delay.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace aoii {

/// How transmissions longer than t_max are handled.
///  - Capped: the delay never exceeds t_max and every update is delivered.
///  - Terminating: a transmission still running at the end of slot t_max is
///    either delivered (probability p_{t_max}) or discarded (overflow mass).
enum class Assumption { capped, terminating };

std::string_view to_string(Assumption a);
Assumption parse_assumption(std::string_view text);

/// Transmission-time distribution p_1..p_{t_max}, plus the mass of
/// transmissions that would outlast t_max (terminating mode only).
struct DelaySpec {
  std::vector<double> pmf;
  double overflow = 0.0;

  int t_max() const { return static_cast<int>(pmf.size()); }

  /// p_t for 1 <= t <= t_max, zero elsewhere.
  double prob(int t) const {
    return (t >= 1 && t <= t_max()) ? pmf[static_cast<std::size_t>(t - 1)] : 0.0;
  }

  /// Throws std::invalid_argument when the sums do not match the mode.
  void validate(Assumption assumption) const;
};

/// Geometric delay p_t = (1-p_s)^{t-1} p_s. Capped mode truncates to
/// [1, t_max] and renormalizes; terminating mode keeps the raw pmf and puts
/// (1-p_s)^{t_max} into the overflow.
DelaySpec geometric_delay(double success_prob, int t_max, Assumption assumption);

/// Zipf delay p_t = t^{-a} / sum_{i<=t_max} i^{-a}. No overflow.
DelaySpec zipf_delay(double exponent, int t_max);

/// Parses one probability per line (line n is p_n). A final line
/// `overflow: <x>` sets the overflow mass. Blank lines and `#` comments are
/// ignored.
DelaySpec parse_delay_text(std::string_view text);
DelaySpec load_delay_file(const std::filesystem::path& path);

class ModelParams {
 public:
  /// Requires 0 < p <= 1/2, t_max >= 1 and a delay consistent with the mode.
  /// The analytic engine additionally requires t_max >= 2.
  ModelParams(double p, Assumption assumption, DelaySpec delay);

  double p() const { return p_; }
  Assumption assumption() const { return assumption_; }
  const DelaySpec& delay() const { return delay_; }
  int t_max() const { return delay_.t_max(); }

  double delay_prob(int t) const { return delay_.prob(t); }
  /// Overflow mass p_{t+}; always zero in capped mode.
  double overflow() const { return delay_.overflow; }

  /// Throws std::invalid_argument if t_max < 2.
  void require_analytic() const;

 private:
  double p_;
  Assumption assumption_;
  DelaySpec delay_;
};

/// Threshold policy: transmit whenever the channel is idle and AoII >= tau.
/// An infinite threshold never transmits.
class PolicyThreshold {
 public:
  constexpr PolicyThreshold() = default;
  explicit PolicyThreshold(int tau);
  static constexpr PolicyThreshold infinite() { return PolicyThreshold{kInfinite, 0}; }

  constexpr bool is_infinite() const { return tau_ == kInfinite; }
  /// Threshold value; throws std::logic_error for the infinite policy.
  int value() const;
  constexpr bool transmits_at(std::int64_t delta) const {
    return !is_infinite() && delta >= tau_;
  }

  /// "inf" or a decimal integer.
  std::string to_string() const;
  static PolicyThreshold parse(std::string_view text);

  friend constexpr bool operator==(PolicyThreshold, PolicyThreshold) = default;

 private:
  static constexpr int kInfinite = -1;
  constexpr PolicyThreshold(int raw, int) : tau_(raw) {}
  int tau_ = 0;
};

enum class Action { idle = 0, transmit = 1 };

/// Channel flag of the state triplet: idle, busy sending a value equal to the
/// receiver's estimate, or busy sending the opposite value.
enum class Channel : int { idle = -1, same = 0, differ = 1 };

/// Beginning-of-slot state (AoII, elapsed transmission slots, channel flag).
struct SystemState {
  std::int64_t delta = 0;
  int elapsed = 0;
  Channel channel = Channel::idle;

  /// Channel is idle if and only if elapsed == 0.
  bool valid() const { return (channel == Channel::idle) == (elapsed == 0) && delta >= 0; }
  friend bool operator==(const SystemState&, const SystemState&) = default;
};

/// Probability the source is in its starting state after t slots:
/// (1 + (1-2p)^t) / 2, with value 1 at t = 0.
double same_state_prob(double p, int t);

/// 1 - same_state_prob(p, t), evaluated without cancellation.
double flipped_state_prob(double p, int t);

/// Mean slots the channel stays busy per transmission. Terminating mode
/// counts discarded transmissions as t_max slots.
double expected_transmission_time(const ModelParams& params);

}  // namespace aoii
