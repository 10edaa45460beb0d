// aoii: analytic evaluation, simulation, comparison sweeps and oracle
// verification for threshold transmission policies.

#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "aoii/experiment.hpp"

namespace {

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto first = item.find_first_not_of(" \t");
    const auto last = item.find_last_not_of(" \t");
    if (first != std::string::npos) items.push_back(item.substr(first, last - first + 1));
  }
  return items;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ",") + s;
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  aoii::ExperimentSpec spec;

  std::string mode = "analytic";
  std::string assumption = "a1";
  std::string delay = "geometric:0.7";
  // Lists are also accepted as repeated flags or config arrays.
  std::vector<std::string> p_list{"0.1,0.2,0.3,0.4"};
  std::vector<std::string> tau_list{"0,1,2,3,inf"};
  std::string out_dir;

  if (const char* env = std::getenv("AOII_SEED")) {
    try {
      spec.seed = std::stoull(env);
    } catch (const std::exception&) {
      std::cerr << "error: AOII_SEED='" << env << "' is not an unsigned integer\n";
      return 1;
    }
  }

  CLI::App app{"Expected AoII of threshold policies over a random-delay channel"};
  app.set_config("--config", "", "Key-value file mirroring the flags; flags on the command line win");
  app.add_option("--mode", mode, "analytic | simulate | compare | sweep | verify")
      ->check(CLI::IsMember({"analytic", "simulate", "compare", "sweep", "verify"}))
      ->capture_default_str();
  app.add_option("--assumption", assumption, "a1 (capped delay) or a2 (discard after tmax)")
      ->check(CLI::IsMember({"a1", "a2"}))
      ->capture_default_str();
  app.add_option("--delay", delay, "geometric:<p_s>, zipf:<a> or file:<path>")->capture_default_str();
  app.add_option("--tmax", spec.t_max, "Largest transmission time (ignored for file: delays)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--p", p_list, "Comma-separated source flip probabilities in (0, 0.5]")->capture_default_str();
  app.add_option("--tau", tau_list, "Comma-separated thresholds; 'inf' never transmits")->capture_default_str();
  app.add_option("--runs", spec.runs, "Simulation runs per grid point")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--epochs", spec.epochs, "Slots per simulation run")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--seed", spec.seed, "Base seed (default from AOII_SEED, else 1)")->capture_default_str();
  app.add_option("--threads", spec.threads, "Worker threads, 0 = all cores")->capture_default_str();
  app.add_option("--out", out_dir, "Directory for CSV/SVG/trace files (CSV goes to stdout when unset)");
  app.add_flag("--trace", spec.trace, "Write the per-slot trace of run 0 for every simulated grid point");

  CLI11_PARSE(app, argc, argv);

  try {
    spec.mode = aoii::parse_mode(mode);
    spec.assumption = aoii::parse_assumption(assumption);
    spec.delay = aoii::DelayChoice::parse(delay);
    spec.p_grid.clear();
    for (const auto& s : split_list(join(p_list))) {
      std::size_t used = 0;
      spec.p_grid.push_back(std::stod(s, &used));
      if (used != s.size()) throw std::invalid_argument("bad p value '" + s + "'");
    }
    spec.tau_grid.clear();
    for (const auto& s : split_list(join(tau_list))) spec.tau_grid.push_back(aoii::PolicyThreshold::parse(s));
    if (!out_dir.empty()) spec.out_dir = out_dir;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  return aoii::run_experiment(spec, std::cout, std::cerr);
}
