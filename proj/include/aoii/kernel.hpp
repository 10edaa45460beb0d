#pragma once

// Multi-step transition probabilities between idle states (delta, 0, idle).
// A transmission started at slot k carries the source value of slot k; a
// delivery after t slots sets the receiver's estimate at slot k + t.

#include <string>
#include <vector>

#include "aoii/model.hpp"

namespace aoii {

/// Probability that a transmission started at idle AoII `delta` and delivered
/// after exactly `t` slots ends at idle AoII `delta_next`.
/// Throws std::out_of_range unless 1 <= t <= t_max.
double conditional_kernel(const ModelParams& params, int delta, int delta_next, int t);

/// Same transition when the transmission is discarded at the end of slot
/// t_max. Only defined in terminating mode (std::logic_error otherwise).
double terminated_kernel(const ModelParams& params, int delta, int delta_next);

/// P_{delta, delta_next}(action), averaged over the delay law.
double aggregate_kernel(const ModelParams& params, int delta, int delta_next, Action action);

/// The transmit kernel written by offset t' = delta_next - delta, with the
/// conditional kernel taken as zero outside 1 <= t' <= t_max. Equal to
/// aggregate_kernel(..., Action::transmit); kept as an independent route.
double aggregate_kernel_by_offset(const ModelParams& params, int delta, int delta_next);

/// Dense cache of the transmit kernel over [0, rows) x [0, cols).
class KernelTable {
 public:
  KernelTable(const ModelParams& params, int rows, int cols);

  /// Cached value inside the table, computed on demand outside it.
  double operator()(int delta, int delta_next) const;

  int rows() const { return rows_; }
  int cols() const { return cols_; }

 private:
  const ModelParams* params_;
  int rows_;
  int cols_;
  std::vector<double> values_;
};

struct PropertyCheck {
  std::string name;
  bool passed = true;
  std::string counterexample;  // first failure, empty when passed
};

struct KernelPropertyReport {
  std::vector<PropertyCheck> checks;
  bool passed() const;
};

/// Checks the structural properties of the transmit kernel on
/// delta, delta_next <= 3 t_max and shifts up to t_max:
///   independence of delta on the low band, shift invariance above t_max,
///   the zero regions, row sums and [0, 1] range for both actions.
KernelPropertyReport verify_kernel_properties(const ModelParams& params);

}  // namespace aoii
