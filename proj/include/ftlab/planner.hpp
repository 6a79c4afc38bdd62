#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace ftlab {

// Order-of-magnitude error budget for a stroboscopic simulation: a linear
// discretization term (first-order product formula, constant fitted rather
// than asserted) against per-gate noise accumulating as 1/dt.
struct ErrorBudget {
  double h_norm = 0.0;       // operator-norm scale of the simulated Hamiltonian
  double t_total = 0.0;      // total simulated time
  double eps_gate = 0.0;     // error strength per enacted gate
  int gates_per_step = 1;
  double c_strobe = 1.0;     // fitted stroboscopic constant

  void validate() const {
    if (h_norm < 0 || t_total < 0 || eps_gate < 0 || c_strobe < 0)
      throw std::invalid_argument("budget entries must be nonnegative");
    if (gates_per_step < 1) throw std::invalid_argument("gates_per_step must be >= 1");
  }
};

// c * T * dt * |H|^2
inline double stroboscopic_error(const ErrorBudget& b, double dt) {
  if (dt < 0) throw std::invalid_argument("dt must be nonnegative");
  return b.c_strobe * b.t_total * dt * b.h_norm * b.h_norm;
}

// T * eps * gates / dt, the per-gate error summed over T/dt steps.
inline double noise_error(const ErrorBudget& b, double dt) {
  if (dt <= 0) throw std::invalid_argument("dt must be positive");
  return b.t_total * b.eps_gate * static_cast<double>(b.gates_per_step) / dt;
}

inline double total_error(const ErrorBudget& b, double dt) {
  return stroboscopic_error(b, dt) + noise_error(b, dt);
}

struct OptimalStep {
  double dt_star = 0.0;
  double error_at_minimum = 0.0;
};

// Minimizes a*dt + b/dt in closed form: dt* = sqrt(b/a), f(dt*) = 2*sqrt(ab).
// Degenerate budgets are an error, never a silent number.
inline OptimalStep optimal_dt(const ErrorBudget& budget) {
  budget.validate();
  const double a = budget.c_strobe * budget.t_total * budget.h_norm * budget.h_norm;
  const double bb = budget.t_total * budget.eps_gate *
                    static_cast<double>(budget.gates_per_step);
  if (a <= 0.0)
    throw std::invalid_argument("degenerate budget: no stroboscopic cost, "
                                "total error decreases without bound in dt");
  if (bb <= 0.0)
    throw std::invalid_argument("degenerate budget: no per-gate noise, "
                                "any dt -> 0 works");
  OptimalStep s;
  s.dt_star = std::sqrt(bb / a);
  s.error_at_minimum = 2.0 * std::sqrt(a * bb);
  return s;
}

// Least-squares fit of deviation(dt) ~ c * T * dt * |H|^2 through the origin.
inline double fit_strobe_constant(const std::vector<double>& dts,
                                  const std::vector<double>& deviations,
                                  double t_total, double h_norm) {
  if (dts.size() != deviations.size() || dts.empty())
    throw std::invalid_argument("fit needs matching nonempty samples");
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < dts.size(); ++i) {
    const double x = t_total * dts[i] * h_norm * h_norm;
    num += x * deviations[i];
    den += x * x;
  }
  if (den <= 0.0) throw std::invalid_argument("fit abscissae are all zero");
  return num / den;
}

// Log-log slope of deviation vs dt, the product-formula order check.
inline double loglog_slope(const std::vector<double>& dts,
                           const std::vector<double>& deviations) {
  if (dts.size() != deviations.size() || dts.size() < 2)
    throw std::invalid_argument("slope needs at least two samples");
  const size_t n = dts.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < n; ++i) {
    const double x = std::log(dts[i]);
    const double y = std::log(deviations[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = static_cast<double>(n) * sxx - sx * sx;
  return (static_cast<double>(n) * sxy - sx * sy) / denom;
}

}  // namespace ftlab
