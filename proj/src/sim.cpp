#include "aoii/sim.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "parallel.hpp"

namespace aoii::sim {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t run_seed(std::uint64_t seed, int run_index) {
  return splitmix64(seed + static_cast<std::uint64_t>(run_index + 1) * 0x9E3779B97F4A7C15ull);
}

DelayDraw sample_delay(const DelaySpec& delay, Assumption assumption, Rng& rng) {
  const double u = rng.uniform();
  double cumulative = 0.0;
  int last_positive = 1;
  for (int t = 1; t <= delay.t_max(); ++t) {
    const double w = delay.prob(t);
    if (w <= 0.0) continue;
    last_positive = t;
    cumulative += w;
    if (u < cumulative) return {t, false};
  }
  if (assumption == Assumption::terminating && delay.overflow > 0.0) return {delay.t_max(), true};
  // u landed in the rounding gap above the pmf total.
  return {last_positive, false};
}

RunStats simulate_run(const ModelParams& params, PolicyThreshold tau, std::int64_t epochs,
                      std::uint64_t seed, const std::function<void(const SlotRecord&)>& trace) {
  if (epochs < 1) throw std::invalid_argument("epochs must be positive");
  Rng rng(seed);
  const double p = params.p();

  int source = 0;
  int estimate = 0;
  std::int64_t delta = 0;
  bool busy = false;
  int elapsed = 0;
  int duration = 0;
  bool will_discard = false;
  int sent = 0;

  RunStats stats;
  double total = 0.0;

  std::int64_t slot = 0;
  std::int64_t last_correct = 0;
  auto advance = [&] {
    source ^= rng.bernoulli(p) ? 1 : 0;
    if (busy) {
      ++elapsed;
      if (elapsed == duration) {
        if (will_discard) {
          ++stats.discards;
        } else {
          estimate = sent;
          ++stats.deliveries;
        }
        busy = false;
        elapsed = 0;
      }
    }
    ++slot;
    if (source == estimate) last_correct = slot;
    delta = source == estimate ? 0 : delta + 1;
    // AoII is the time since the estimate was last correct.
    if (delta != slot - last_correct) throw std::logic_error("AoII diverged from its definition");
  };

  for (std::int64_t k = 0; k < epochs; ++k) {
    if (trace) {
      const Channel ch = !busy ? Channel::idle : (sent == estimate ? Channel::same : Channel::differ);
      trace(SlotRecord{k, source, estimate, delta, elapsed, ch});
    }
    if (!busy && tau.transmits_at(delta)) {
      const DelayDraw draw = sample_delay(params.delay(), params.assumption(), rng);
      busy = true;
      elapsed = 0;
      duration = draw.duration;
      will_discard = draw.discarded;
      sent = source;
      ++stats.transmissions_started;
    } else if (!busy && elapsed != 0) {
      throw std::logic_error("idle channel with a running transmission clock");
    }
    total += static_cast<double>(delta);
    advance();
  }
  while (busy) advance();

  stats.mean_aoii = total / static_cast<double>(epochs);
  return stats;
}

SimResult run(const SimConfig& config) {
  if (config.runs < 1) throw std::invalid_argument("at least one run is required");
  std::vector<RunStats> per_run(static_cast<std::size_t>(config.runs));
  detail::parallel_for(per_run.size(), config.threads, [&](std::size_t r) {
    per_run[r] = simulate_run(config.params, config.tau, config.epochs, run_seed(config.seed, static_cast<int>(r)));
  });

  SimResult result;
  double sum = 0.0;
  for (const auto& s : per_run) {
    result.per_run_means.push_back(s.mean_aoii);
    sum += s.mean_aoii;
    result.transmissions_started += s.transmissions_started;
    result.deliveries += s.deliveries;
    result.discards += s.discards;
  }
  const double n = static_cast<double>(per_run.size());
  result.mean_aoii = sum / n;
  if (per_run.size() > 1) {
    double ss = 0.0;
    for (double m : result.per_run_means) ss += (m - result.mean_aoii) * (m - result.mean_aoii);
    result.stderr_aoii = std::sqrt(ss / (n - 1.0) / n);
  }
  return result;
}

}  // namespace aoii::sim
