#pragma once

// Stationary probabilities of the idle states (delta, 0, idle) under a
// finite threshold policy. Only the head delta < omega = t_max + tau + 1 is
// kept explicitly; the rest is lumped into the tail mass.

#include <ostream>
#include <vector>

#include "aoii/model.hpp"

namespace aoii {

struct StationarySolution {
  int tau = 0;
  int omega = 0;
  std::vector<double> pi;  // pi[0..omega-1]
  double tail = 0.0;       // sum of pi over delta >= omega
  /// Largest absolute residual over every balance equation of the lumped
  /// system (including any equation not used by the solver).
  double residual = 0.0;

  /// sum_{delta < tau} pi + ET * (sum_{delta >= tau} pi); equals 1.
  double normalization(double expected_transmission_time) const;
  /// Mass of idle states where the policy transmits.
  double transmitting_mass() const;
};

/// Solves the (omega+1)-unknown linear system for 1 <= tau < infinity by
/// dense LU with partial pivoting. Throws std::runtime_error if the system is
/// singular or its condition estimate exceeds 1e12, and std::logic_error if
/// a component is below -1e-12.
StationarySolution solve_stationary(const ModelParams& params, int tau);

/// Explicit forward substitution for tau in {0, 1}; no matrix solve.
StationarySolution solve_stationary_smalltau(const ModelParams& params, int tau);

/// Residual of every lumped balance equation plus normalization for a
/// candidate solution (tau >= 0).
double stationary_residual(const ModelParams& params, const StationarySolution& solution);

/// Stationary law of the never-transmit policy: pi_0 = 1/2,
/// pi_delta = p (1-p)^{delta-1} / 2.
class NeverTransmitLaw {
 public:
  explicit NeverTransmitLaw(double p);
  double operator()(int delta) const;
  /// Mass of delta >= from.
  double tail(int from) const;
  double p() const { return p_; }

 private:
  double p_;
};

NeverTransmitLaw stationary_never_transmit(double p);

/// CSV with header `delta,pi`, one row per head component, final row
/// `tail,<Pi>`.
void write_stationary_csv(std::ostream& out, const StationarySolution& solution);

}  // namespace aoii
