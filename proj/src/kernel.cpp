#include "aoii/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace aoii {
namespace {

constexpr double kPropertyTolerance = 1e-12;

// Delivered-after-t kernel without range checks; zero for t outside [1, t_max].
double delivered(const ModelParams& params, int delta, int next, int t) {
  if (t < 1 || t > params.t_max() || next < 0) return 0.0;
  const double p = params.p();
  const double q = 1.0 - p;
  if (delta == 0) {
    if (next == 0) return same_state_prob(p, t);
    if (next <= t) return same_state_prob(p, t - next) * p * std::pow(q, next - 1);
    return 0.0;
  }
  if (next == 0) return same_state_prob(p, t);
  if (next == delta + t) return p * std::pow(q, t - 1);
  if (next == 1) return flipped_state_prob(p, t - 1) * q;
  if (next <= t - 1) return flipped_state_prob(p, t - next) * p * p * std::pow(q, next - 2);
  return 0.0;
}

double discarded(const ModelParams& params, int delta, int next) {
  const int t_max = params.t_max();
  if (delta == 0) return delivered(params, 0, next, t_max);
  if (next < 0) return 0.0;
  const double p = params.p();
  const double q = 1.0 - p;
  if (next == 0) return flipped_state_prob(p, t_max);
  if (next == delta + t_max) return std::pow(q, t_max);
  if (next <= t_max - 1) return flipped_state_prob(p, t_max - next) * p * std::pow(q, next - 1);
  return 0.0;
}

double idle_kernel(double p, int delta, int next) {
  if (delta == 0) {
    if (next == 0) return 1.0 - p;
    if (next == 1) return p;
    return 0.0;
  }
  if (next == 0) return p;
  if (next == delta + 1) return 1.0 - p;
  return 0.0;
}

void check_delta(int delta, int next) {
  if (delta < 0 || next < 0) {
    throw std::out_of_range(fmt::format("AoII values must be non-negative (got {}, {})", delta, next));
  }
}

}  // namespace

double conditional_kernel(const ModelParams& params, int delta, int delta_next, int t) {
  check_delta(delta, delta_next);
  if (t < 1 || t > params.t_max()) {
    throw std::out_of_range(fmt::format("transmission time {} outside [1, {}]", t, params.t_max()));
  }
  return delivered(params, delta, delta_next, t);
}

double terminated_kernel(const ModelParams& params, int delta, int delta_next) {
  if (params.assumption() != Assumption::terminating) {
    throw std::logic_error("the discard kernel exists only when transmissions can be terminated (a2)");
  }
  check_delta(delta, delta_next);
  return discarded(params, delta, delta_next);
}

double aggregate_kernel(const ModelParams& params, int delta, int delta_next, Action action) {
  check_delta(delta, delta_next);
  if (action == Action::idle) return idle_kernel(params.p(), delta, delta_next);
  double total = 0.0;
  for (int t = 1; t <= params.t_max(); ++t) {
    total += params.delay_prob(t) * delivered(params, delta, delta_next, t);
  }
  if (params.assumption() == Assumption::terminating) {
    total += params.overflow() * discarded(params, delta, delta_next);
  }
  return total;
}

double aggregate_kernel_by_offset(const ModelParams& params, int delta, int delta_next) {
  check_delta(delta, delta_next);
  const int t_max = params.t_max();
  const int offset = delta_next - delta;
  double total = 0.0;
  if (delta_next <= t_max - 1) {
    for (int t = std::max(delta_next, 1); t <= t_max; ++t) {
      total += params.delay_prob(t) * delivered(params, delta, delta_next, t);
    }
    // From delta = 0 the direct path t' = delta_next is already the first
    // term of the band sum.
    if (delta > 0 && delta < delta_next) {
      total += params.delay_prob(offset) * delivered(params, delta, delta_next, offset);
    }
  } else {
    total = params.delay_prob(offset) * delivered(params, delta, delta_next, offset);
  }
  if (params.assumption() == Assumption::terminating) {
    total += params.overflow() * discarded(params, delta, delta_next);
  }
  return total;
}

KernelTable::KernelTable(const ModelParams& params, int rows, int cols)
    : params_(&params), rows_(rows), cols_(cols),
      values_(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols)) {
  for (int i = 0; i < rows_; ++i) {
    for (int j = 0; j < cols_; ++j) {
      values_[static_cast<std::size_t>(i) * static_cast<std::size_t>(cols_) + static_cast<std::size_t>(j)] =
          aggregate_kernel(params, i, j, Action::transmit);
    }
  }
}

double KernelTable::operator()(int delta, int delta_next) const {
  if (delta >= 0 && delta < rows_ && delta_next >= 0 && delta_next < cols_) {
    return values_[static_cast<std::size_t>(delta) * static_cast<std::size_t>(cols_) +
                   static_cast<std::size_t>(delta_next)];
  }
  return aggregate_kernel(*params_, delta, delta_next, Action::transmit);
}

bool KernelPropertyReport::passed() const {
  for (const auto& c : checks) {
    if (!c.passed) return false;
  }
  return true;
}

KernelPropertyReport verify_kernel_properties(const ModelParams& params) {
  const int t_max = params.t_max();
  const int limit = 3 * t_max;
  const bool terminating = params.assumption() == Assumption::terminating;
  auto kernel = [&](int d, int n) { return aggregate_kernel(params, d, n, Action::transmit); };

  KernelPropertyReport report;
  auto fail = [](PropertyCheck& check, std::string what) {
    if (check.passed) {
      check.passed = false;
      check.counterexample = std::move(what);
    }
  };

  PropertyCheck independence{"low-band independence of delta", true, {}};
  for (int next = 0; next <= t_max - 1; ++next) {
    const int lowest = terminating ? std::max(1, next) : next;
    const double reference = kernel(lowest, next);
    for (int delta = lowest + 1; delta <= limit; ++delta) {
      const double value = kernel(delta, next);
      if (std::abs(value - reference) > kPropertyTolerance) {
        fail(independence, fmt::format("P[{},{}] = {} but P[{},{}] = {}", delta, next, value, lowest, next, reference));
      }
    }
  }
  report.checks.push_back(std::move(independence));

  PropertyCheck shift{"shift invariance above t_max", true, {}};
  for (int delta = terminating ? 1 : 0; delta <= limit; ++delta) {
    for (int next = t_max; next <= limit; ++next) {
      for (int s = 1; s <= t_max; ++s) {
        const double a = kernel(delta, next);
        const double b = kernel(delta + s, next + s);
        if (std::abs(a - b) > kPropertyTolerance) {
          fail(shift, fmt::format("P[{},{}] = {} but P[{},{}] = {}", delta, next, a, delta + s, next + s, b));
        }
      }
    }
  }
  report.checks.push_back(std::move(shift));

  PropertyCheck zeros{"zero regions", true, {}};
  for (int delta = 0; delta <= limit; ++delta) {
    for (int next = 0; next <= limit + t_max + 2; ++next) {
      const bool must_vanish = next > delta + t_max || (next > t_max - 1 && next < delta + 1);
      if (must_vanish && kernel(delta, next) != 0.0) {
        fail(zeros, fmt::format("P[{},{}] = {} should be 0", delta, next, kernel(delta, next)));
      }
    }
  }
  report.checks.push_back(std::move(zeros));

  PropertyCheck rows{"row sums and range", true, {}};
  for (int delta = 0; delta <= limit; ++delta) {
    for (Action action : {Action::idle, Action::transmit}) {
      double sum = 0.0;
      for (int next = 0; next <= delta + t_max; ++next) {
        const double v = aggregate_kernel(params, delta, next, action);
        if (v < 0.0 || v > 1.0) {
          fail(rows, fmt::format("P[{},{}]({}) = {} outside [0,1]", delta, next, static_cast<int>(action), v));
        }
        sum += v;
      }
      if (std::abs(sum - 1.0) > kPropertyTolerance) {
        fail(rows, fmt::format("row {} (action {}) sums to {}", delta, static_cast<int>(action), sum));
      }
    }
  }
  report.checks.push_back(std::move(rows));

  PropertyCheck offset_form{"offset form matches delay average", true, {}};
  for (int delta = 0; delta <= limit; ++delta) {
    for (int next = 0; next <= delta + t_max + 1; ++next) {
      const double a = kernel(delta, next);
      const double b = aggregate_kernel_by_offset(params, delta, next);
      if (std::abs(a - b) > kPropertyTolerance) {
        fail(offset_form, fmt::format("P[{},{}]: delay average {} vs offset form {}", delta, next, a, b));
      }
    }
  }
  report.checks.push_back(std::move(offset_form));

  return report;
}

}  // namespace aoii
