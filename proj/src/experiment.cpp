#include "aoii/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include "aoii/cost.hpp"
#include "aoii/kernel.hpp"
#include "aoii/oracle.hpp"
#include "aoii/stationary.hpp"
#include "parallel.hpp"

namespace aoii {
namespace {

double parse_number(std::string_view text, std::string_view what) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end || text.empty()) {
    throw std::invalid_argument(fmt::format("cannot parse {} from '{}'", what, text));
  }
  return value;
}

std::string file_stem(const ExperimentSpec& spec, std::string_view prefix) {
  return fmt::format("{}_{}_{}", prefix, to_string(spec.assumption), spec.delay.name());
}

std::filesystem::path output_dir(const ExperimentSpec& spec) {
  return spec.out_dir.value_or(std::filesystem::path("."));
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error(fmt::format("cannot open {} for writing", path.string()));
  file << contents;
  if (!file) throw std::runtime_error(fmt::format("failed writing {}", path.string()));
}

bool simulates(Mode mode) { return mode == Mode::simulate || mode == Mode::compare || mode == Mode::sweep; }
bool evaluates(Mode mode) { return mode != Mode::simulate; }
bool has_z(Mode mode) { return mode == Mode::compare || mode == Mode::sweep; }

// Tracks the largest deviation of a suite and where it happened.
struct Worst {
  explicit Worst(double tol) : tolerance(tol) {}

  double tolerance;
  double error = 0.0;
  std::string where;
  bool failed = false;

  template <typename Where>
  void add(double got, double want, Where&& describe) {
    const double e = std::abs(got - want);
    if (!(e <= tolerance)) {  // NaN counts as a failure
      if (!failed) where = fmt::format("{}: got {} expected {}", describe(), got, want);
      failed = true;
    }
    if (e > error || std::isnan(e)) error = e;
  }

  VerificationRow row(std::string suite, double p, std::string tau = {}) const {
    VerificationRow r{std::move(suite), p, std::move(tau), !failed, {}};
    r.detail = failed ? where : fmt::format("max error {:.3g} (tol {:.0e})", error, tolerance);
    return r;
  }
};

}  // namespace

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::analytic: return "analytic";
    case Mode::simulate: return "simulate";
    case Mode::compare: return "compare";
    case Mode::sweep: return "sweep";
    case Mode::verify: return "verify";
  }
  return "?";
}

Mode parse_mode(std::string_view text) {
  for (Mode m : {Mode::analytic, Mode::simulate, Mode::compare, Mode::sweep, Mode::verify}) {
    if (text == to_string(m)) return m;
  }
  throw std::invalid_argument(fmt::format("unknown mode '{}'", text));
}

std::string DelayChoice::name() const {
  switch (kind) {
    case Kind::geometric: return "geometric";
    case Kind::zipf: return "zipf";
    case Kind::file: return "file";
  }
  return "?";
}

std::string DelayChoice::parameter_text() const {
  return kind == Kind::file ? path : fmt::format("{}", parameter);
}

DelayChoice DelayChoice::parse(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw std::invalid_argument(fmt::format("delay '{}' must look like geometric:<p_s>, zipf:<a> or file:<path>", text));
  }
  const auto kind = text.substr(0, colon);
  const auto arg = text.substr(colon + 1);
  DelayChoice choice;
  if (kind == "geometric") {
    choice.kind = Kind::geometric;
    choice.parameter = parse_number(arg, "geometric success probability");
    if (!(choice.parameter > 0.0 && choice.parameter <= 1.0)) {
      throw std::invalid_argument(fmt::format("geometric success probability {} outside (0, 1]", choice.parameter));
    }
  } else if (kind == "zipf") {
    choice.kind = Kind::zipf;
    choice.parameter = parse_number(arg, "Zipf exponent");
    if (!std::isfinite(choice.parameter)) throw std::invalid_argument("Zipf exponent must be finite");
  } else if (kind == "file") {
    choice.kind = Kind::file;
    choice.parameter = 0.0;
    choice.path = std::string(arg);
    if (choice.path.empty()) throw std::invalid_argument("file: delay needs a path");
  } else {
    throw std::invalid_argument(fmt::format("unknown delay family '{}'", kind));
  }
  return choice;
}

void ExperimentSpec::validate() const {
  if (p_grid.empty()) throw std::invalid_argument("p grid is empty");
  if (tau_grid.empty()) throw std::invalid_argument("tau grid is empty");
  for (double p : p_grid) {
    if (!(p > 0.0 && p <= 0.5)) throw std::invalid_argument(fmt::format("p = {} outside (0, 0.5]", p));
  }
  if (t_max < 1) throw std::invalid_argument("tmax must be positive");
  if (runs < 1) throw std::invalid_argument("runs must be positive");
  if (epochs < 1) throw std::invalid_argument("epochs must be positive");
  if (has_z(mode) && runs < 2) throw std::invalid_argument("compare and sweep need at least two runs");
}

DelaySpec make_delay(const ExperimentSpec& spec) {
  switch (spec.delay.kind) {
    case DelayChoice::Kind::geometric: return geometric_delay(spec.delay.parameter, spec.t_max, spec.assumption);
    case DelayChoice::Kind::zipf: return zipf_delay(spec.delay.parameter, spec.t_max);
    case DelayChoice::Kind::file: return load_delay_file(spec.delay.path);
  }
  throw std::logic_error("unhandled delay kind");
}

ModelParams make_params(const ExperimentSpec& spec, double p) {
  return ModelParams(p, spec.assumption, make_delay(spec));
}

std::optional<double> ExperimentRow::z_score() const {
  if (!analytic || !simulation) return std::nullopt;
  const double diff = std::abs(analytic->expected_aoii - simulation->mean_aoii);
  if (simulation->stderr_aoii > 0.0) return diff / simulation->stderr_aoii;
  return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
}

std::string csv_header(Mode mode) {
  std::string h =
      "assumption,delay,delay_params,p,tau,aoii_analytic,idle_sum,head_busy_sum,tail_sigma,"
      "aoii_sim_mean,aoii_sim_stderr,runs,epochs,seed";
  if (has_z(mode)) h += ",z_score";
  return h;
}

std::string csv_row(const ExperimentSpec& spec, const ExperimentRow& row) {
  std::string params = spec.delay.parameter_text();
  if (params.find_first_of(",\"\n") != std::string::npos) {
    std::string quoted = "\"";
    for (char c : params) quoted += c == '"' ? std::string("\"\"") : std::string(1, c);
    params = quoted + "\"";
  }
  std::string line = fmt::format("{},{},{},{},{}", to_string(spec.assumption), spec.delay.name(), params, row.p,
                                 row.tau.to_string());
  if (row.analytic) {
    const auto& a = *row.analytic;
    line += fmt::format(",{},{},{},{}", a.expected_aoii, a.idle_sum, a.head_busy_sum, a.tail_sigma);
  } else {
    line += ",,,,";
  }
  if (row.simulation) {
    line += fmt::format(",{},{},{},{},{}", row.simulation->mean_aoii, row.simulation->stderr_aoii, spec.runs,
                        spec.epochs, spec.seed);
  } else {
    line += ",,,,,";
  }
  if (has_z(spec.mode)) {
    const auto z = row.z_score();
    line += z ? fmt::format(",{}", *z) : std::string(",");
  }
  return line;
}

std::vector<ExperimentRow> evaluate_grid(const ExperimentSpec& spec) {
  spec.validate();
  std::vector<ExperimentRow> rows;
  for (double p : spec.p_grid) {
    for (PolicyThreshold tau : spec.tau_grid) rows.push_back(ExperimentRow{p, tau, std::nullopt, std::nullopt});
  }
  // Grid points run in parallel; each simulation stays single-threaded so
  // the work is not oversubscribed.
  detail::parallel_for(rows.size(), spec.threads, [&](std::size_t i) {
    auto& row = rows[i];
    const ModelParams params = make_params(spec, row.p);
    if (evaluates(spec.mode)) row.analytic = expected_aoii(params, row.tau);
    if (simulates(spec.mode)) {
      row.simulation = sim::run(sim::SimConfig{params, row.tau, spec.epochs, spec.runs, spec.seed, 1});
    }
  });
  return rows;
}

std::string render_sweep_svg(const ExperimentSpec& spec, const std::vector<ExperimentRow>& rows) {
  constexpr double width = 720, height = 480;
  constexpr double left = 70, right = 140, top = 40, bottom = 60;
  constexpr double plot_w = width - left - right, plot_h = height - top - bottom;
  static constexpr const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                            "#9467bd", "#8c564b", "#e377c2", "#17becf"};

  double p_lo = std::numeric_limits<double>::infinity(), p_hi = -p_lo, y_hi = 0.0;
  for (const auto& r : rows) {
    p_lo = std::min(p_lo, r.p);
    p_hi = std::max(p_hi, r.p);
    if (r.analytic) y_hi = std::max(y_hi, r.analytic->expected_aoii);
    if (r.simulation) y_hi = std::max(y_hi, r.simulation->mean_aoii);
  }
  if (rows.empty()) p_lo = 0.0, p_hi = 0.5;
  if (p_hi - p_lo < 1e-9) p_lo -= 0.05, p_hi += 0.05;
  y_hi = y_hi > 0.0 ? y_hi * 1.08 : 1.0;
  auto sx = [&](double p) { return left + (p - p_lo) / (p_hi - p_lo) * plot_w; };
  auto sy = [&](double y) { return top + plot_h - y / y_hi * plot_h; };

  std::string svg = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\" "
      "font-family=\"sans-serif\" font-size=\"12\">\n"
      "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      "<text x=\"{2}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">Expected AoII vs p ({3}, {4} {5}, t_max={6})</text>\n",
      width, height, left + plot_w / 2, to_string(spec.assumption), spec.delay.name(), spec.delay.parameter_text(),
      rows.empty() ? spec.t_max : make_delay(spec).t_max());

  // Axes and ticks.
  svg += fmt::format("<g stroke=\"black\"><line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\"/>"
                     "<line x1=\"{0}\" y1=\"{3}\" x2=\"{0}\" y2=\"{1}\"/></g>\n",
                     left, top + plot_h, left + plot_w, top);
  constexpr int ticks = 5;
  for (int i = 0; i <= ticks; ++i) {
    const double p = p_lo + (p_hi - p_lo) * i / ticks;
    const double y = y_hi * i / ticks;
    svg += fmt::format("<line x1=\"{0:.1f}\" y1=\"{1}\" x2=\"{0:.1f}\" y2=\"{2}\" stroke=\"black\"/>"
                       "<text x=\"{0:.1f}\" y=\"{3}\" text-anchor=\"middle\">{4:.3g}</text>\n",
                       sx(p), top + plot_h, top + plot_h + 5, top + plot_h + 20, p);
    svg += fmt::format("<line x1=\"{0}\" y1=\"{1:.1f}\" x2=\"{2}\" y2=\"{1:.1f}\" stroke=\"#ddd\"/>"
                       "<text x=\"{3}\" y=\"{4:.1f}\" text-anchor=\"end\">{5:.3g}</text>\n",
                       left, sy(y), left + plot_w, left - 6, sy(y) + 4, y);
  }
  svg += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">p</text>\n", left + plot_w / 2, height - 18);
  svg += fmt::format("<text x=\"18\" y=\"{0}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {0})\">"
                     "expected AoII</text>\n",
                     top + plot_h / 2);

  for (std::size_t k = 0; k < spec.tau_grid.size(); ++k) {
    const PolicyThreshold tau = spec.tau_grid[k];
    const char* colour = palette[k % std::size(palette)];
    std::vector<const ExperimentRow*> series;
    for (const auto& r : rows) {
      if (r.tau == tau) series.push_back(&r);
    }
    std::sort(series.begin(), series.end(), [](auto* a, auto* b) { return a->p < b->p; });

    std::string points;
    for (const auto* r : series) {
      if (r->analytic) points += fmt::format("{:.2f},{:.2f} ", sx(r->p), sy(r->analytic->expected_aoii));
    }
    if (!points.empty()) {
      points.pop_back();
      svg += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"2\" points=\"{}\"/>\n", colour, points);
    }
    for (const auto* r : series) {
      if (!r->simulation) continue;
      svg += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"4\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>\n",
                         sx(r->p), sy(r->simulation->mean_aoii), colour);
    }
    const double ly = top + 10 + 20.0 * static_cast<double>(k);
    svg += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"{3}\" stroke-width=\"2\"/>"
                       "<circle cx=\"{4}\" cy=\"{1}\" r=\"4\" fill=\"none\" stroke=\"{3}\"/>"
                       "<text x=\"{5}\" y=\"{6}\">tau={7}</text>\n",
                       left + plot_w + 15, ly, left + plot_w + 45, colour, left + plot_w + 30, left + plot_w + 52,
                       ly + 4, tau.to_string());
  }
  const double note_y = top + 20 + 20.0 * static_cast<double>(spec.tau_grid.size());
  svg += fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"10\">lines: analytic</text>\n", left + plot_w + 15, note_y);
  svg += fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"10\">markers: simulation</text>\n", left + plot_w + 15,
                     note_y + 14);
  svg += "</svg>\n";
  return svg;
}

std::vector<VerificationRow> run_verification(const ExperimentSpec& spec) {
  spec.validate();
  constexpr double kExact = 1e-12;
  std::vector<VerificationRow> out;
  for (double p : spec.p_grid) {
    const ModelParams params = make_params(spec, p);
    params.require_analytic();
    const int t_max = params.t_max();
    const int t_hi = std::min({6, t_max, oracle::kMaxEnumeratedSlots});
    const bool terminating = params.assumption() == Assumption::terminating;

    Worst kernel{kExact};
    for (int d = 0; d <= 8; ++d) {
      for (int t = 1; t <= t_hi; ++t) {
        const auto dist = oracle::enumerate_kernel(params, d, t);
        for (int n = 0; n < static_cast<int>(dist.size()) + 2; ++n) {
          const double want = n < static_cast<int>(dist.size()) ? dist[static_cast<std::size_t>(n)] : 0.0;
          kernel.add(conditional_kernel(params, d, n, t), want,
                     [&] { return fmt::format("delivered delta={} next={} t={}", d, n, t); });
        }
      }
      if (terminating && t_max <= oracle::kMaxEnumeratedSlots) {
        const auto dist = oracle::enumerate_kernel(params, d, t_max, oracle::Outcome::discarded);
        for (int n = 0; n < static_cast<int>(dist.size()); ++n) {
          kernel.add(terminated_kernel(params, d, n), dist[static_cast<std::size_t>(n)],
                     [&] { return fmt::format("discarded delta={} next={}", d, n); });
        }
      }
    }
    out.push_back(kernel.row("kernel-enumeration", p));

    Worst sums{kExact};
    for (int d = 0; d <= 8; ++d) {
      for (Action a : {Action::idle, Action::transmit}) {
        double total = 0.0;
        for (int n = 0; n <= d + t_max + 1; ++n) total += aggregate_kernel(params, d, n, a);
        sums.add(total, 1.0, [&] { return fmt::format("row delta={} action={}", d, static_cast<int>(a)); });
      }
      for (int t = 1; t <= t_max; ++t) {
        double total = 0.0;
        for (int n = 0; n <= d + t; ++n) total += conditional_kernel(params, d, n, t);
        sums.add(total, 1.0, [&] { return fmt::format("conditional row delta={} t={}", d, t); });
      }
    }
    out.push_back(sums.row("kernel-row-sums", p));

    Worst cost{kExact};
    for (int d = 0; d <= 8; ++d) {
      for (int k = 0; k < t_hi; ++k) {
        cost.add(conditional_step_cost(params, d, k), oracle::enumerate_step_cost(params, d, k),
                 [&] { return fmt::format("step cost delta={} k={}", d, k); });
      }
      for (int t = 1; t <= t_hi; ++t) {
        cost.add(conditional_transmission_cost(params, d, t), oracle::enumerate_cost(params, d, t),
                 [&] { return fmt::format("transmission cost delta={} t={}", d, t); });
      }
    }
    out.push_back(cost.row("cost-enumeration", p));

    Worst increment{kExact};
    for (int t = 1; t <= t_max; ++t) {
      const double inc = tail_cost_increment(params, t);
      for (int d = t + 1; d <= t + 20; ++d) {
        increment.add(inc, action_cost(params, d, Action::transmit) - action_cost(params, d - t, Action::transmit),
                      [&] { return fmt::format("increment t={} delta={}", t, d); });
      }
    }
    out.push_back(increment.row("tail-increment", p));

    const auto props = verify_kernel_properties(params);
    VerificationRow prop_row{"kernel-properties", p, {}, props.passed(), {}};
    for (const auto& c : props.checks) {
      if (!c.passed) {
        prop_row.detail = fmt::format("{}: {}", c.name, c.counterexample);
        break;
      }
    }
    if (prop_row.passed) prop_row.detail = fmt::format("{} checks", props.checks.size());
    out.push_back(std::move(prop_row));

    Worst routes{1e-9};
    {
      const auto closed = expected_aoii(params, PolicyThreshold(1));
      const auto linear = expected_aoii(params, PolicyThreshold(1), StationaryRoute::linear_system);
      for (std::size_t i = 0; i < closed.stationary->pi.size(); ++i) {
        routes.add(linear.stationary->pi[i], closed.stationary->pi[i], [&] { return fmt::format("pi_{}", i); });
      }
      routes.add(linear.stationary->tail, closed.stationary->tail, [] { return std::string("tail mass"); });
      routes.add(linear.expected_aoii, closed.expected_aoii, [] { return std::string("expected AoII"); });
    }
    out.push_back(routes.row("tau1-routes", p, "1"));

    for (PolicyThreshold tau : spec.tau_grid) {
      const auto chain = oracle::build_truncated_chain(params, tau, oracle::suggested_delta_cap(params, tau));
      const auto pi = oracle::power_iterate(chain);
      const auto idle = oracle::idle_distribution(chain, pi);
      const auto report = expected_aoii(params, tau);

      Worst stat{1e-8};
      if (tau.is_infinite()) {
        const NeverTransmitLaw law(p);
        for (std::size_t d = 0; d < std::min<std::size_t>(idle.size(), 64); ++d) {
          stat.add(law(static_cast<int>(d)), idle[d], [&] { return fmt::format("pi_{}", d); });
        }
      } else {
        const auto& s = *report.stationary;
        double tail = 0.0;
        for (std::size_t d = 0; d < idle.size(); ++d) {
          if (d < s.pi.size()) {
            stat.add(s.pi[d], idle[d], [&] { return fmt::format("pi_{}", d); });
          } else {
            tail += idle[d];
          }
        }
        stat.add(s.tail, tail, [] { return std::string("tail mass"); });
      }
      out.push_back(stat.row("stationary-chain", p, tau.to_string()));

      Worst mean{1e-6};
      mean.add(report.expected_aoii, oracle::chain_expected_aoii(chain, pi),
               [] { return std::string("expected AoII"); });
      mean.add(oracle::cap_mass(chain, pi), 0.0, [] { return std::string("mass at the truncation cap"); });
      out.push_back(mean.row("aoii-chain", p, tau.to_string()));
    }
  }
  return out;
}

int run_experiment(const ExperimentSpec& spec, std::ostream& out, std::ostream& err) {
  try {
    spec.validate();
    if (spec.out_dir) std::filesystem::create_directories(*spec.out_dir);

    if (spec.mode == Mode::verify) {
      const auto rows = run_verification(spec);
      std::size_t suite_w = 5;
      for (const auto& r : rows) suite_w = std::max(suite_w, r.suite.size());
      std::ostringstream table;
      table << fmt::format("{:<{}}  {:<6} {:<4} {:<6} {}\n", "suite", suite_w, "p", "tau", "result", "detail");
      const VerificationRow* first_failure = nullptr;
      for (const auto& r : rows) {
        table << fmt::format("{:<{}}  {:<6} {:<4} {:<6} {}\n", r.suite, suite_w, r.p, r.tau.empty() ? "-" : r.tau,
                             r.passed ? "PASS" : "FAIL", r.detail);
        if (!r.passed && !first_failure) first_failure = &r;
      }
      out << table.str();
      if (spec.out_dir) write_file(*spec.out_dir / file_stem(spec, "verify").append(".txt"), table.str());
      if (first_failure) {
        err << fmt::format("verification failed: {} (p={}{}): {}\n", first_failure->suite, first_failure->p,
                           first_failure->tau.empty() ? "" : ", tau=" + first_failure->tau, first_failure->detail);
        return 2;
      }
      return 0;
    }

    const auto rows = evaluate_grid(spec);
    std::string csv = csv_header(spec.mode) + "\n";
    for (const auto& r : rows) csv += csv_row(spec, r) + "\n";
    if (spec.out_dir) {
      const auto path = *spec.out_dir / (file_stem(spec, to_string(spec.mode)) + ".csv");
      write_file(path, csv);
      out << "wrote " << path.string() << "\n";
    } else {
      out << csv;
    }

    if (spec.mode == Mode::sweep) {
      const auto path = output_dir(spec) / (file_stem(spec, "sweep") + ".svg");
      write_file(path, render_sweep_svg(spec, rows));
      err << "wrote " << path.string() << "\n";
    }

    if (spec.trace) {
      if (!simulates(spec.mode)) {
        err << "note: --trace only applies to simulating modes\n";
      } else {
        for (const auto& r : rows) {
          std::string trace = "slot,X,X_hat,delta,t,i\n";
          sim::simulate_run(make_params(spec, r.p), r.tau, spec.epochs, sim::run_seed(spec.seed, 0),
                            [&](const sim::SlotRecord& s) {
                              trace += fmt::format("{},{},{},{},{},{}\n", s.slot, s.source, s.estimate, s.delta,
                                                   s.elapsed, static_cast<int>(s.channel));
                            });
          const auto path =
              output_dir(spec) / fmt::format("{}_p{}_tau{}.csv", file_stem(spec, "trace"), r.p, r.tau.to_string());
          write_file(path, trace);
        }
      }
    }

    if (has_z(spec.mode)) {
      for (const auto& r : rows) {
        const auto z = r.z_score();
        if (z && !(*z <= 3.0)) {
          err << fmt::format("analytic and simulated AoII disagree at p={}, tau={}: analytic {}, simulated {} "
                             "+/- {} (z = {:.2f})\n",
                             r.p, r.tau.to_string(), r.analytic->expected_aoii, r.simulation->mean_aoii,
                             r.simulation->stderr_aoii, *z);
          return 2;
        }
      }
    }
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace aoii
