#include "aoii/model.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

namespace aoii {
namespace {

constexpr double kSumTolerance = 1e-12;

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double parse_double(std::string_view text, std::string_view what) {
  text = trim(text);
  double value = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw std::invalid_argument(fmt::format("cannot parse {} from '{}'", what, text));
  }
  return value;
}

}  // namespace

std::string_view to_string(Assumption a) {
  return a == Assumption::capped ? "a1" : "a2";
}

Assumption parse_assumption(std::string_view text) {
  text = trim(text);
  if (text == "a1" || text == "A1" || text == "capped") return Assumption::capped;
  if (text == "a2" || text == "A2" || text == "terminating") return Assumption::terminating;
  throw std::invalid_argument(fmt::format("unknown assumption '{}' (expected a1 or a2)", text));
}

void DelaySpec::validate(Assumption assumption) const {
  if (pmf.empty()) throw std::invalid_argument("delay pmf is empty");
  double total = 0.0;
  for (std::size_t i = 0; i < pmf.size(); ++i) {
    if (!(pmf[i] >= 0.0) || !std::isfinite(pmf[i])) {
      throw std::invalid_argument(fmt::format("delay pmf entry p_{} = {} is not a probability", i + 1, pmf[i]));
    }
    total += pmf[i];
  }
  if (!(overflow >= 0.0) || !std::isfinite(overflow)) {
    throw std::invalid_argument(fmt::format("delay overflow {} is not a probability", overflow));
  }
  if (assumption == Assumption::capped && overflow != 0.0) {
    throw std::invalid_argument("capped delay (a1) must not carry overflow mass");
  }
  if (std::abs(total + overflow - 1.0) > kSumTolerance) {
    throw std::invalid_argument(
        fmt::format("delay pmf sums to {} (+ overflow {}), expected 1", total, overflow));
  }
}

DelaySpec geometric_delay(double success_prob, int t_max, Assumption assumption) {
  if (!(success_prob > 0.0 && success_prob <= 1.0)) {
    throw std::invalid_argument(fmt::format("geometric success probability {} outside (0, 1]", success_prob));
  }
  if (t_max < 1) throw std::invalid_argument("t_max must be positive");
  DelaySpec spec;
  spec.pmf.resize(static_cast<std::size_t>(t_max));
  const double fail = 1.0 - success_prob;
  for (int t = 1; t <= t_max; ++t) {
    spec.pmf[static_cast<std::size_t>(t - 1)] = std::pow(fail, t - 1) * success_prob;
  }
  const double beyond = std::pow(fail, t_max);
  if (assumption == Assumption::terminating) {
    spec.overflow = beyond;
  } else {
    double total = 0.0;
    for (double v : spec.pmf) total += v;
    for (double& v : spec.pmf) v /= total;
  }
  return spec;
}

DelaySpec zipf_delay(double exponent, int t_max) {
  if (!(exponent > 0.0)) throw std::invalid_argument(fmt::format("zipf exponent {} must be positive", exponent));
  if (t_max < 1) throw std::invalid_argument("t_max must be positive");
  DelaySpec spec;
  spec.pmf.resize(static_cast<std::size_t>(t_max));
  double norm = 0.0;
  for (int i = 1; i <= t_max; ++i) norm += std::pow(static_cast<double>(i), -exponent);
  for (int t = 1; t <= t_max; ++t) {
    spec.pmf[static_cast<std::size_t>(t - 1)] = std::pow(static_cast<double>(t), -exponent) / norm;
  }
  return spec;
}

DelaySpec parse_delay_text(std::string_view text) {
  DelaySpec spec;
  bool saw_overflow = false;
  int line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (saw_overflow) {
      throw std::invalid_argument(fmt::format("delay file line {}: overflow must be the final entry", line_no));
    }
    if (line.starts_with("overflow:")) {
      spec.overflow = parse_double(line.substr(9), "overflow");
      saw_overflow = true;
      continue;
    }
    spec.pmf.push_back(parse_double(line, fmt::format("p_{}", spec.pmf.size() + 1)));
  }
  if (spec.pmf.empty()) throw std::invalid_argument("delay file contains no probabilities");
  return spec;
}

DelaySpec load_delay_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument(fmt::format("cannot open delay file '{}'", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_delay_text(buf.str());
}

ModelParams::ModelParams(double p, Assumption assumption, DelaySpec delay)
    : p_(p), assumption_(assumption), delay_(std::move(delay)) {
  if (!(p_ > 0.0 && p_ <= 0.5)) {
    throw std::invalid_argument(fmt::format("source flip probability p = {} outside (0, 1/2]", p_));
  }
  delay_.validate(assumption_);
}

void ModelParams::require_analytic() const {
  if (t_max() < 2) {
    throw std::invalid_argument("the analytic engine requires t_max >= 2 (t_max = 1 is the unit-delay system)");
  }
}

PolicyThreshold::PolicyThreshold(int tau) : tau_(tau) {
  if (tau < 0) throw std::invalid_argument(fmt::format("threshold {} must be non-negative", tau));
}

int PolicyThreshold::value() const {
  if (is_infinite()) throw std::logic_error("infinite threshold has no finite value");
  return tau_;
}

std::string PolicyThreshold::to_string() const {
  return is_infinite() ? std::string("inf") : std::to_string(tau_);
}

PolicyThreshold PolicyThreshold::parse(std::string_view text) {
  text = trim(text);
  if (text == "inf" || text == "infinity" || text == "Inf") return infinite();
  int value = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end || text.empty()) {
    throw std::invalid_argument(fmt::format("cannot parse threshold '{}'", text));
  }
  return PolicyThreshold(value);
}

double same_state_prob(double p, int t) {
  if (t <= 0) return 1.0;
  return 0.5 * (1.0 + std::pow(1.0 - 2.0 * p, t));
}

double flipped_state_prob(double p, int t) {
  if (t <= 0) return 0.0;
  return 0.5 * (1.0 - std::pow(1.0 - 2.0 * p, t));
}

double expected_transmission_time(const ModelParams& params) {
  double et = 0.0;
  for (int t = 1; t <= params.t_max(); ++t) et += t * params.delay_prob(t);
  if (params.assumption() == Assumption::terminating) et += params.t_max() * params.overflow();
  return et;
}

}  // namespace aoii
