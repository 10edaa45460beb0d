#pragma once

// Experiment runner behind the command-line tool: grid evaluation over
// (p, tau), simulation comparison, SVG sweeps and oracle verification.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "aoii/aoii.hpp"
#include "aoii/model.hpp"
#include "aoii/sim.hpp"

namespace aoii {

enum class Mode { analytic, simulate, compare, sweep, verify };

std::string_view to_string(Mode mode);
Mode parse_mode(std::string_view text);

struct DelayChoice {
  enum class Kind { geometric, zipf, file };
  Kind kind = Kind::geometric;
  double parameter = 0.7;  // success probability or Zipf exponent
  std::string path;        // file kind only

  /// "geometric", "zipf" or "file".
  std::string name() const;
  /// Parameter as written in the CSV `delay_params` column.
  std::string parameter_text() const;
  /// `geometric:<p_s>`, `zipf:<a>` or `file:<path>`.
  static DelayChoice parse(std::string_view text);
};

struct ExperimentSpec {
  Mode mode = Mode::analytic;
  Assumption assumption = Assumption::capped;
  DelayChoice delay;
  int t_max = 5;
  std::vector<double> p_grid{0.1, 0.2, 0.3, 0.4};
  std::vector<PolicyThreshold> tau_grid{PolicyThreshold(0), PolicyThreshold(1), PolicyThreshold(2),
                                        PolicyThreshold(3), PolicyThreshold::infinite()};
  int runs = 15;
  std::int64_t epochs = 25000;
  std::uint64_t seed = 1;
  std::optional<std::filesystem::path> out_dir;
  bool trace = false;
  unsigned threads = 0;

  /// Throws std::invalid_argument on empty grids, p outside (0, 1/2] or
  /// non-positive run sizes.
  void validate() const;
};

DelaySpec make_delay(const ExperimentSpec& spec);
ModelParams make_params(const ExperimentSpec& spec, double p);

/// One grid point. Simulation fields are empty in analytic mode and analytic
/// fields are empty in simulate mode.
struct ExperimentRow {
  double p = 0.0;
  PolicyThreshold tau;
  std::optional<AoiiReport> analytic;
  std::optional<sim::SimResult> simulation;

  /// |analytic - simulated| / stderr when both are present.
  std::optional<double> z_score() const;
};

/// Column list shared by every mode; compare and sweep append `z_score`.
std::string csv_header(Mode mode);
std::string csv_row(const ExperimentSpec& spec, const ExperimentRow& row);

/// Evaluates the grid in deterministic (p-major, tau-minor) order.
std::vector<ExperimentRow> evaluate_grid(const ExperimentSpec& spec);

/// Self-contained SVG: x = p, one colour per tau, analytic values as lines
/// and simulated values as markers.
std::string render_sweep_svg(const ExperimentSpec& spec, const std::vector<ExperimentRow>& rows);

struct VerificationRow {
  std::string suite;
  double p = 0.0;
  std::string tau;  // empty when the suite does not depend on tau
  bool passed = true;
  std::string detail;
};

/// Oracle equivalence suites for every p (and finite tau) in the grid.
std::vector<VerificationRow> run_verification(const ExperimentSpec& spec);

/// CSV (and SVG for sweeps) go to `out_dir` when set, otherwise CSV goes to
/// `out`. Diagnostics go to `err`. Returns 0 on success, 1 on errors,
/// 2 when a check fails (verification failure or |z| > 3).
int run_experiment(const ExperimentSpec& spec, std::ostream& out, std::ostream& err);

}  // namespace aoii
