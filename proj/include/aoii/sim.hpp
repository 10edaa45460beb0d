#pragma once

// Slotted Monte Carlo simulation of source, threshold transmitter, delayed
// channel and last-update receiver.
//
// Slot k proceeds as: (1) if the channel is idle and AoII >= tau, start
// sending X_k and draw its duration; (2) the source flips with probability p;
// (3) a transmission whose duration ends at this boundary is delivered (the
// estimate becomes the sent value) or discarded; (4) AoII becomes 0 if the
// source matches the estimate, otherwise grows by one. AoII is accumulated
// at the start of every slot.
//
// Random streams: run r of a configuration with seed s draws from
// std::mt19937_64 seeded with splitmix64(s + (r + 1) * 0x9E3779B97F4A7C15).
// Uniforms take the top 53 bits of each draw, so results are identical
// across platforms and standard libraries.

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "aoii/model.hpp"

namespace aoii::sim {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  bool bernoulli(double prob) { return uniform() < prob; }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);
/// Seed of run `run_index` derived from the configuration seed.
std::uint64_t run_seed(std::uint64_t seed, int run_index);

struct DelayDraw {
  int duration = 1;
  bool discarded = false;
};

/// Capped mode: duration per the pmf. Terminating mode: with the overflow
/// probability returns {t_max, discarded}.
DelayDraw sample_delay(const DelaySpec& delay, Assumption assumption, Rng& rng);

struct SimConfig {
  ModelParams params;
  PolicyThreshold tau;
  std::int64_t epochs = 25000;  // slots per run
  int runs = 15;
  std::uint64_t seed = 1;
  /// Worker threads; 0 picks std::thread::hardware_concurrency().
  unsigned threads = 0;
};

struct SimResult {
  double mean_aoii = 0.0;
  double stderr_aoii = 0.0;  // across-run standard error
  std::vector<double> per_run_means;
  std::int64_t transmissions_started = 0;
  std::int64_t deliveries = 0;
  std::int64_t discards = 0;
};

/// One slot of a sample path, as seen at the start of the slot.
struct SlotRecord {
  std::int64_t slot = 0;
  int source = 0;
  int estimate = 0;
  std::int64_t delta = 0;
  int elapsed = 0;
  Channel channel = Channel::idle;
};

struct RunStats {
  double mean_aoii = 0.0;
  std::int64_t transmissions_started = 0;
  std::int64_t deliveries = 0;
  std::int64_t discards = 0;
};

/// One run of `epochs` slots from (0, 0, idle). An in-flight transmission at
/// the horizon is completed afterwards (no AoII counted) so that started
/// transmissions always resolve.
RunStats simulate_run(const ModelParams& params, PolicyThreshold tau, std::int64_t epochs,
                      std::uint64_t seed, const std::function<void(const SlotRecord&)>& trace = {});

/// All runs, in parallel; the merge is a sum over runs in index order.
SimResult run(const SimConfig& config);

}  // namespace aoii::sim
