#include "aoii/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

#include <fmt/format.h>

namespace aoii::oracle {
namespace {

constexpr std::size_t kMaxStates = 10'000'000;

void check_slots(int t, int lowest) {
  if (t < lowest || t > kMaxEnumeratedSlots) {
    throw std::out_of_range(fmt::format("enumeration length {} outside [{}, {}]", t, lowest, kMaxEnumeratedSlots));
  }
}

// Walks every flip sequence of length `slots`. The receiver estimate is 0
// and the source starts at 1 when delta > 0. `visit(prob, aoii_per_slot)`
// receives the AoII at relative slots 0..slots.
template <typename Visit>
void for_each_path(double p, int delta, int slots, bool deliver_at_end, Visit&& visit) {
  const int start = delta > 0 ? 1 : 0;
  const int sent = start;
  std::vector<std::int64_t> aoii(static_cast<std::size_t>(slots) + 1);
  for (std::uint32_t mask = 0; mask < (1u << slots); ++mask) {
    double prob = 1.0;
    int x = start;
    aoii[0] = delta;
    for (int j = 1; j <= slots; ++j) {
      const bool flip = (mask >> (j - 1)) & 1u;
      prob *= flip ? p : 1.0 - p;
      x ^= flip ? 1 : 0;
      const int estimate = (j == slots && deliver_at_end) ? sent : 0;
      aoii[static_cast<std::size_t>(j)] = (x == estimate) ? 0 : aoii[static_cast<std::size_t>(j - 1)] + 1;
    }
    visit(prob, aoii);
  }
}

std::size_t slots_per_delta(int t_max) { return static_cast<std::size_t>(2 * t_max - 1); }

std::size_t state_key(const SystemState& s, int t_max) {
  std::size_t code = 0;
  if (s.channel == Channel::same) code = static_cast<std::size_t>(s.elapsed);
  if (s.channel == Channel::differ) code = static_cast<std::size_t>(t_max - 1 + s.elapsed);
  return static_cast<std::size_t>(s.delta) * slots_per_delta(t_max) + code;
}

}  // namespace

std::vector<double> enumerate_kernel(const ModelParams& params, int delta, int t, Outcome outcome) {
  check_slots(t, 1);
  if (delta < 0) throw std::out_of_range("AoII must be non-negative");
  std::vector<double> dist(static_cast<std::size_t>(delta + t) + 1, 0.0);
  for_each_path(params.p(), delta, t, outcome == Outcome::delivered, [&](double prob, const auto& aoii) {
    dist[static_cast<std::size_t>(aoii.back())] += prob;
  });
  return dist;
}

double enumerate_cost(const ModelParams& params, int delta, int t) {
  check_slots(t, 1);
  if (delta < 0) throw std::out_of_range("AoII must be non-negative");
  double total = 0.0;
  for_each_path(params.p(), delta, t, true, [&](double prob, const auto& aoii) {
    std::int64_t sum = 0;
    for (int j = 0; j < t; ++j) sum += aoii[static_cast<std::size_t>(j)];
    total += prob * static_cast<double>(sum);
  });
  return total;
}

double enumerate_step_cost(const ModelParams& params, int delta, int k) {
  check_slots(k, 0);
  if (delta < 0) throw std::out_of_range("AoII must be non-negative");
  if (k == 0) return delta;
  double total = 0.0;
  // The transmission is still in flight at slot k, so the estimate is unchanged.
  for_each_path(params.p(), delta, k, false, [&](double prob, const auto& aoii) {
    total += prob * static_cast<double>(aoii.back());
  });
  return total;
}

std::int64_t TruncatedChain::index_of(const SystemState& s) const {
  if (!s.valid() || s.delta > delta_cap_ || s.elapsed >= t_max_) return -1;
  return lookup_[state_key(s, t_max_)];
}

std::pair<std::vector<double>, double> TruncatedChain::duration_marginal() const {
  std::vector<double> delivered(static_cast<std::size_t>(t_max_), 0.0);
  double survive = 1.0;
  double dropped = 0.0;
  for (int e = 0; e < t_max_; ++e) {
    const double d = deliver_[static_cast<std::size_t>(e)];
    const double x = discard_[static_cast<std::size_t>(e)];
    delivered[static_cast<std::size_t>(e)] = survive * d;
    dropped += survive * x;
    survive *= 1.0 - d - x;
  }
  return {delivered, dropped};
}

int minimum_delta_cap(const ModelParams& params, PolicyThreshold tau) {
  if (tau.is_infinite()) return 10 * params.t_max() + 1;
  return params.t_max() + tau.value() + 1 + 10 * params.t_max();
}

int suggested_delta_cap(const ModelParams& params, PolicyThreshold tau) {
  // Between resets the AoII grows by one per slot with probability at most
  // 1 - p, so the stationary mass above omega + n decays like (1-p)^n.
  const int decay = static_cast<int>(std::ceil(std::log(1e-15) / std::log(1.0 - params.p())));
  return minimum_delta_cap(params, tau) + decay;
}

TruncatedChain build_truncated_chain(const ModelParams& params, PolicyThreshold tau, int delta_cap) {
  if (delta_cap < minimum_delta_cap(params, tau)) {
    throw std::invalid_argument(
        fmt::format("delta cap {} below the minimum {}", delta_cap, minimum_delta_cap(params, tau)));
  }
  const int t_max = params.t_max();
  const std::size_t capacity = (static_cast<std::size_t>(delta_cap) + 1) * slots_per_delta(t_max);
  if (capacity > kMaxStates) {
    throw std::length_error(fmt::format("truncated chain would hold up to {} states (limit {})", capacity, kMaxStates));
  }

  TruncatedChain chain;
  chain.delta_cap_ = delta_cap;
  chain.t_max_ = t_max;
  chain.lookup_.assign(capacity, -1);

  // Remaining mass P(T > e), discard mass included.
  const bool terminating = params.assumption() == Assumption::terminating;
  std::vector<double> remaining(static_cast<std::size_t>(t_max) + 1, 0.0);
  remaining[static_cast<std::size_t>(t_max)] = terminating ? params.overflow() : 0.0;
  for (int e = t_max - 1; e >= 0; --e) {
    remaining[static_cast<std::size_t>(e)] = remaining[static_cast<std::size_t>(e + 1)] + params.delay_prob(e + 1);
  }
  chain.deliver_.assign(static_cast<std::size_t>(t_max), 0.0);
  chain.discard_.assign(static_cast<std::size_t>(t_max), 0.0);
  for (int e = 0; e < t_max; ++e) {
    const double r = remaining[static_cast<std::size_t>(e)];
    if (r <= 0.0) {
      chain.deliver_[static_cast<std::size_t>(e)] = 1.0;  // unreachable elapsed time
      continue;
    }
    chain.deliver_[static_cast<std::size_t>(e)] = params.delay_prob(e + 1) / r;
    if (e == t_max - 1) chain.discard_[static_cast<std::size_t>(e)] = remaining[static_cast<std::size_t>(t_max)] / r;
  }

  const double p = params.p();
  std::deque<std::int32_t> frontier;
  auto intern = [&](const SystemState& s) -> std::int32_t {
    auto& slot = chain.lookup_[state_key(s, t_max)];
    if (slot < 0) {
      slot = static_cast<std::int32_t>(chain.states_.size());
      chain.states_.push_back(s);
      chain.rows_.emplace_back();
      frontier.push_back(slot);
    }
    return slot;
  };
  auto grow = [&](std::int64_t delta) { return std::min<std::int64_t>(delta + 1, delta_cap); };

  intern(SystemState{0, 0, Channel::idle});
  std::vector<std::pair<SystemState, double>> out;
  while (!frontier.empty()) {
    const std::int32_t from = frontier.front();
    frontier.pop_front();
    const SystemState s = chain.states_[static_cast<std::size_t>(from)];
    out.clear();

    // Receiver estimate is 0 by symmetry; the source is 1 iff delta > 0.
    const int x = s.delta > 0 ? 1 : 0;
    const bool in_flight = s.channel != Channel::idle || tau.transmits_at(s.delta);
    if (!in_flight) {
      for (int flip = 0; flip <= 1; ++flip) {
        const int next = x ^ flip;
        out.emplace_back(SystemState{next == 0 ? 0 : grow(s.delta), 0, Channel::idle}, flip ? p : 1.0 - p);
      }
    } else {
      const Channel flag = s.channel != Channel::idle ? s.channel : (x == 1 ? Channel::differ : Channel::same);
      const int sent = flag == Channel::differ ? 1 : 0;
      const int e = s.elapsed;
      const double deliver = chain.deliver_[static_cast<std::size_t>(e)];
      const double discard = chain.discard_[static_cast<std::size_t>(e)];
      const double carry = e + 1 < t_max ? remaining[static_cast<std::size_t>(e + 1)] / remaining[static_cast<std::size_t>(e)] : 0.0;
      for (int flip = 0; flip <= 1; ++flip) {
        const double pf = flip ? p : 1.0 - p;
        const int next = x ^ flip;
        if (deliver > 0.0) {
          out.emplace_back(SystemState{next == sent ? 0 : grow(s.delta), 0, Channel::idle}, pf * deliver);
        }
        if (discard > 0.0) {
          out.emplace_back(SystemState{next == 0 ? 0 : grow(s.delta), 0, Channel::idle}, pf * discard);
        }
        if (carry > 0.0) {
          out.emplace_back(SystemState{next == 0 ? 0 : grow(s.delta), e + 1, flag}, pf * carry);
        }
      }
    }

    std::vector<Transition> row;
    for (const auto& [to, prob] : out) {
      if (prob == 0.0) continue;
      const std::int32_t idx = intern(to);
      auto it = std::find_if(row.begin(), row.end(), [&](const Transition& tr) { return tr.to == idx; });
      if (it == row.end()) row.push_back({idx, prob});
      else it->prob += prob;
    }
    chain.rows_[static_cast<std::size_t>(from)] = std::move(row);
  }
  return chain;
}

std::vector<double> power_iterate(const TruncatedChain& chain, double tol, int max_iterations) {
  const std::size_t n = chain.size();
  std::vector<double> pi(n, 0.0);
  std::vector<double> next(n, 0.0);
  pi[0] = 1.0;
  for (int iter = 0; iter < max_iterations; ++iter) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double mass = pi[i];
      if (mass == 0.0) continue;
      for (const auto& tr : chain.rows()[i]) next[static_cast<std::size_t>(tr.to)] += mass * tr.prob;
    }
    double residual = 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      residual += std::abs(next[i] - pi[i]);
      total += next[i];
    }
    if (residual <= tol) {
      for (double& v : pi) v /= total;
      return pi;
    }
    for (std::size_t i = 0; i < n; ++i) pi[i] = 0.5 * (pi[i] + next[i]) / total;
  }
  throw std::runtime_error(fmt::format("power iteration did not reach tolerance {} in {} iterations", tol, max_iterations));
}

std::vector<double> idle_distribution(const TruncatedChain& chain, const std::vector<double>& pi) {
  std::vector<double> idle(static_cast<std::size_t>(chain.delta_cap()) + 1, 0.0);
  for (std::size_t i = 0; i < chain.size(); ++i) {
    const auto& s = chain.states()[i];
    if (s.channel == Channel::idle) idle[static_cast<std::size_t>(s.delta)] += pi[i];
  }
  return idle;
}

double chain_expected_aoii(const TruncatedChain& chain, const std::vector<double>& pi) {
  double total = 0.0;
  for (std::size_t i = 0; i < chain.size(); ++i) total += static_cast<double>(chain.states()[i].delta) * pi[i];
  return total;
}

double cap_mass(const TruncatedChain& chain, const std::vector<double>& pi) {
  double total = 0.0;
  for (std::size_t i = 0; i < chain.size(); ++i) {
    if (chain.states()[i].delta == chain.delta_cap()) total += pi[i];
  }
  return total;
}

}  // namespace aoii::oracle
