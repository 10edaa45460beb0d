#include "aoii/stationary.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "aoii/kernel.hpp"

namespace aoii {
namespace {

constexpr double kConditionLimit = 1e12;
constexpr double kNegativeTolerance = 1e-12;

std::string describe(const ModelParams& params, int tau) {
  return fmt::format("p={}, t_max={}, assumption={}, tau={}", params.p(), params.t_max(),
                     to_string(params.assumption()), tau);
}

KernelTable make_table(const ModelParams& params, int omega) {
  return KernelTable(params, omega + params.t_max() + 1, omega + 2 * params.t_max() + 1);
}

// Clamps rounding noise just below zero; anything more negative is a bug.
void finalize(StationarySolution& sol, const ModelParams& params) {
  auto fix = [&](double& v, const char* what, int index) {
    if (v < -kNegativeTolerance) {
      throw std::logic_error(fmt::format("stationary {}[{}] = {} is negative ({})", what, index, v,
                                         describe(params, sol.tau)));
    }
    if (v < 0.0) v = 0.0;
  };
  for (std::size_t i = 0; i < sol.pi.size(); ++i) fix(sol.pi[i], "pi", static_cast<int>(i));
  fix(sol.tail, "tail", sol.omega);
}

}  // namespace

double StationarySolution::normalization(double expected_transmission_time) const {
  double idle = 0.0;
  for (int i = 0; i < tau; ++i) idle += pi[static_cast<std::size_t>(i)];
  return idle + expected_transmission_time * transmitting_mass();
}

double StationarySolution::transmitting_mass() const {
  double busy = tail;
  for (int i = tau; i < omega; ++i) busy += pi[static_cast<std::size_t>(i)];
  return busy;
}

StationarySolution solve_stationary(const ModelParams& params, int tau) {
  params.require_analytic();
  if (tau < 1) throw std::invalid_argument(fmt::format("linear-system route needs tau >= 1 (got {})", tau));

  const int t_max = params.t_max();
  const int omega = t_max + tau + 1;
  const int n = omega + 1;  // pi_0 .. pi_{omega-1}, Pi
  const int tail_col = omega;
  const double p = params.p();
  const double et = expected_transmission_time(params);
  const KernelTable P = make_table(params, omega);

  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);

  // Adds `coef` times the transmitting mass sum_{i=from}^{omega-1} pi_i + Pi.
  auto add_mass = [&](int row, int from, double coef) {
    for (int i = from; i < omega; ++i) A(row, i) += coef;
    A(row, tail_col) += coef;
  };

  // The pi_0 balance equation is implied by the others and is left out;
  // stationary_residual still checks it.
  int row = 0;

  A(row, 1) += 1.0;
  A(row, 0) -= p;
  add_mass(row, tau, -P(1, 1));
  ++row;

  for (int d = 2; d <= t_max - 1; ++d, ++row) {
    A(row, d) += 1.0;
    if (d - 1 < tau) {
      A(row, d - 1) -= 1.0 - p;
      add_mass(row, tau, -P(tau, d));
    } else {
      for (int i = tau; i <= d - 1; ++i) A(row, i) -= P(i, d);
      add_mass(row, d, -P(d, d));
    }
  }

  for (int d = t_max; d <= omega - 1; ++d, ++row) {
    A(row, d) += 1.0;
    if (d - 1 < tau) {
      A(row, d - 1) -= 1.0 - p;
    } else {
      for (int i = tau; i <= d - 1; ++i) A(row, i) -= P(i, d);
    }
  }

  A(row, tail_col) += 1.0;
  for (int i = tau + 1; i <= omega - 1; ++i) {
    double out = 0.0;
    for (int k = tau + 1; k <= i; ++k) out += P(i, t_max + k);
    A(row, i) -= out;
  }
  {
    double stay = 0.0;
    for (int i = 1; i <= t_max; ++i) stay += P(omega, omega + i);
    A(row, tail_col) -= stay;
  }
  ++row;

  for (int i = 0; i < tau; ++i) A(row, i) += 1.0;
  add_mass(row, tau, et);
  b(row) = 1.0;
  ++row;

  if (row != n) throw std::logic_error(fmt::format("assembled {} rows for {} unknowns", row, n));

  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  const double rcond = lu.rcond();
  if (!(rcond > 0.0) || 1.0 / rcond > kConditionLimit) {
    throw std::runtime_error(fmt::format("stationary system is singular or ill-conditioned (condition estimate {:.3g}; {})",
                                         rcond > 0.0 ? 1.0 / rcond : INFINITY, describe(params, tau)));
  }
  const Eigen::VectorXd x = lu.solve(b);

  StationarySolution sol;
  sol.tau = tau;
  sol.omega = omega;
  sol.pi.assign(x.data(), x.data() + omega);
  sol.tail = x(tail_col);
  finalize(sol, params);
  sol.residual = stationary_residual(params, sol);
  return sol;
}

StationarySolution solve_stationary_smalltau(const ModelParams& params, int tau) {
  params.require_analytic();
  if (tau != 0 && tau != 1) {
    throw std::invalid_argument(fmt::format("closed forms cover tau in {{0, 1}} only (got {})", tau));
  }
  const int t_max = params.t_max();
  const int omega = t_max + tau + 1;
  const double p = params.p();
  const double et = expected_transmission_time(params);
  const KernelTable P = make_table(params, omega);

  StationarySolution sol;
  sol.tau = tau;
  sol.omega = omega;
  sol.pi.assign(static_cast<std::size_t>(omega), 0.0);
  auto& pi = sol.pi;

  if (tau == 0) {
    pi[0] = P(1, 0) / (et * (1.0 - P(0, 0) + P(1, 0)));
    double below = pi[0];
    for (int d = 1; d <= t_max; ++d) {
      double v = 0.0;
      for (int i = 0; i <= d - 1; ++i) v += P(i, d) * pi[static_cast<std::size_t>(i)];
      v += P(d, d) * (1.0 / et - below);
      pi[static_cast<std::size_t>(d)] = v;
      below += v;
    }
    double num = 0.0;
    for (int i = 1; i <= t_max; ++i) {
      double out = 0.0;
      for (int k = 1; k <= i; ++k) out += P(i, t_max + k);
      num += out * pi[static_cast<std::size_t>(i)];
    }
    double stay = 0.0;
    for (int i = 1; i <= t_max; ++i) stay += P(t_max + 1, t_max + 1 + i);
    sol.tail = num / (1.0 - stay);
  } else {
    const double denom = p * et + P(1, 0);
    pi[0] = P(1, 0) / denom;
    pi[1] = (p * P(1, 0) + p * P(1, 1)) / denom;
    double below = pi[1];
    for (int d = 2; d <= t_max + 1; ++d) {
      double v = 0.0;
      for (int i = 1; i <= d - 1; ++i) v += P(i, d) * pi[static_cast<std::size_t>(i)];
      v += P(d, d) * ((1.0 - pi[0]) / et - below);
      pi[static_cast<std::size_t>(d)] = v;
      below += v;
    }
    double num = 0.0;
    for (int i = 2; i <= t_max + 1; ++i) {
      double out = 0.0;
      for (int k = 2; k <= i; ++k) out += P(i, t_max + k);
      num += out * pi[static_cast<std::size_t>(i)];
    }
    double stay = 0.0;
    for (int i = 1; i <= t_max; ++i) stay += P(t_max + 2, t_max + 2 + i);
    sol.tail = num / (1.0 - stay);
  }
  finalize(sol, params);
  sol.residual = stationary_residual(params, sol);
  return sol;
}

double stationary_residual(const ModelParams& params, const StationarySolution& sol) {
  const int t_max = params.t_max();
  const int tau = sol.tau;
  const int omega = sol.omega;
  const double p = params.p();
  const KernelTable P = make_table(params, omega);
  auto pi = [&](int i) { return sol.pi[static_cast<std::size_t>(i)]; };
  auto mass_from = [&](int from) {
    double m = sol.tail;
    for (int i = from; i < omega; ++i) m += pi(i);
    return m;
  };

  double worst = 0.0;
  for (int d = 0; d < omega; ++d) {
    double inflow = 0.0;
    // Sources that stay idle.
    for (int i = 0; i < std::min(tau, omega); ++i) {
      if (d == 0) inflow += (i == 0 ? 1.0 - p : p) * pi(i);
      else if (d == 1 && i == 0) inflow += p * pi(i);
      else if (d >= 2 && i == d - 1) inflow += (1.0 - p) * pi(i);
    }
    // Sources that transmit.
    if (d <= t_max - 1) {
      const int lumped = std::max({tau, d, 1});
      for (int i = tau; i < lumped; ++i) inflow += P(i, d) * pi(i);
      inflow += P(lumped, d) * mass_from(lumped);
    } else {
      for (int i = std::max(tau, d - t_max); i <= d - 1; ++i) inflow += P(i, d) * pi(i);
    }
    worst = std::max(worst, std::abs(pi(d) - inflow));
  }

  double tail_in = 0.0;
  for (int i = tau; i < omega; ++i) {
    for (int d = omega; d <= i + t_max; ++d) tail_in += P(i, d) * pi(i);
  }
  double stay = 0.0;
  for (int j = 1; j <= t_max; ++j) stay += P(omega, omega + j);
  tail_in += stay * sol.tail;
  worst = std::max(worst, std::abs(sol.tail - tail_in));

  worst = std::max(worst, std::abs(sol.normalization(expected_transmission_time(params)) - 1.0));
  return worst;
}

NeverTransmitLaw::NeverTransmitLaw(double p) : p_(p) {
  if (!(p > 0.0 && p <= 0.5)) throw std::invalid_argument(fmt::format("p = {} outside (0, 1/2]", p));
}

double NeverTransmitLaw::operator()(int delta) const {
  if (delta < 0) return 0.0;
  if (delta == 0) return 0.5;
  return 0.5 * p_ * std::pow(1.0 - p_, delta - 1);
}

double NeverTransmitLaw::tail(int from) const {
  if (from <= 0) return 1.0;
  return 0.5 * std::pow(1.0 - p_, from - 1);
}

NeverTransmitLaw stationary_never_transmit(double p) { return NeverTransmitLaw(p); }

void write_stationary_csv(std::ostream& out, const StationarySolution& solution) {
  out << "delta,pi\n";
  for (std::size_t i = 0; i < solution.pi.size(); ++i) out << fmt::format("{},{}\n", i, solution.pi[i]);
  out << fmt::format("tail,{}\n", solution.tail);
}

}  // namespace aoii
