#include "cpdc/oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include <boost/numeric/odeint.hpp>

namespace cpdc::oracle {

namespace {

namespace odei = boost::numeric::odeint;
using State = std::array<Complex, 2>;

bool finite_state(const State& y) {
  for (const Complex& c : y) {
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
  }
  return true;
}

void validate(const ScaledCoords& coords, const IntegrationSettings& s) {
  if (!(s.rel_tol > 0.0) || !(s.abs_tol > 0.0) || !(s.max_step > 0.0) ||
      !std::isfinite(s.rel_tol + s.abs_tol + s.max_step)) {
    throw DomainError("oracle: tolerances and max_step must be positive and finite");
  }
  if (s.method_order != 5 && s.method_order != 8) {
    throw DomainError("oracle: method_order must be 5 or 8");
  }
  if (!(coords.x0 <= coords.xL)) {
    throw DomainError("oracle: requires x0 <= xL");
  }
}

// Adaptive driver with a step ceiling tied to the local phase rate |x|/2:
// the integrand oscillates as e^{+-i x^2/4}, so the ceiling keeps at least
// ~4 steps per radian however the controller feels about local error.
template <typename Ctrl, typename System>
void advance(Ctrl& ctrl, System& sys, State& y, double x0, double xL,
             const IntegrationSettings& s) {
  double t = x0;
  const double min_dt = 1e-14 * std::max(xL - x0, 1.0);
  double dt = std::min(s.max_step, 0.1);
  int failures = 0;
  while (t < xL) {
    const double remaining = xL - t;
    const double cap = std::min(s.max_step, 0.5 / std::max(1.0, 0.5 * std::fabs(t)));
    double trial = std::min({dt, cap, remaining});
    if (trial < min_dt && remaining > min_dt) {
      throw StepUnderflowError("oracle: step size underflow at x = " + std::to_string(t));
    }
    if (ctrl.try_step(sys, y, t, trial) == odei::fail) {
      dt = trial;  // the controller shrank it; retry
      if (++failures >= 80) {
        throw ToleranceError("oracle: step control cannot meet tolerances at x = " +
                             std::to_string(t));
      }
      continue;
    }
    failures = 0;
    dt = trial;  // the controller's suggestion for the next step
    if (!finite_state(y)) {
      throw ToleranceError("oracle: non-finite state at x = " + std::to_string(t));
    }
  }
}

template <typename System>
void drive(System&& sys, State& y, double x0, double xL, const IntegrationSettings& s) {
  if (xL <= x0) return;
  if (s.method_order == 5) {
    auto ctrl = odei::make_controlled(s.abs_tol, s.rel_tol,
                                      odei::runge_kutta_cash_karp54<State>());
    advance(ctrl, sys, y, x0, xL, s);
  } else {
    auto ctrl = odei::make_controlled(s.abs_tol, s.rel_tol,
                                      odei::runge_kutta_fehlberg78<State>());
    advance(ctrl, sys, y, x0, xL, s);
  }
}

}  // namespace

GreenPair integrate_green(const ScaledCoords& coords, const IntegrationSettings& settings) {
  validate(coords, settings);
  const double sigma = coords.sigma;
  auto sys = [sigma](const State& y, State& dy, double x) {
    const Complex half_ix(0.0, 0.5 * x);
    dy[0] = -half_ix * y[0] + sigma * y[1];
    dy[1] = half_ix * y[1] + sigma * y[0];
  };
  State e1{Complex(1.0, 0.0), Complex(0.0, 0.0)};
  State e2{Complex(0.0, 0.0), Complex(1.0, 0.0)};
  drive(sys, e1, coords.x0, coords.xL, settings);
  drive(sys, e2, coords.x0, coords.xL, settings);
  GreenPair g;
  g.A_num = e1[0];
  g.B_num = e2[0];
  g.residual_unitarity = std::fabs(std::norm(g.A_num) - std::norm(g.B_num) - 1.0);
  return g;
}

SecondOrderTrajectory integrate_second_order(const ScaledCoords& coords,
                                             const IntegrationSettings& settings,
                                             Complex init_value, Complex init_slope,
                                             int samples,
                                             std::optional<Complex> sigma_sq_override) {
  validate(coords, settings);
  if (samples < 2) throw DomainError("oracle: samples must be >= 2");
  const Complex sigma_sq =
      sigma_sq_override.value_or(Complex(coords.nu, 0.0));
  auto sys = [sigma_sq](const State& y, State& dy, double x) {
    dy[0] = y[1];
    dy[1] = -(0.25 * x * x + Complex(0.0, 0.5) - sigma_sq) * y[0];
  };
  State y{init_value, init_slope};
  SecondOrderTrajectory out;
  out.x.reserve(samples);
  out.value.reserve(samples);
  out.x.push_back(coords.x0);
  out.value.push_back(y[0]);
  const double h = (coords.xL - coords.x0) / (samples - 1);
  double prev = coords.x0;
  for (int i = 1; i < samples; ++i) {
    const double target = i == samples - 1 ? coords.xL : coords.x0 + h * i;
    drive(sys, y, prev, target, settings);
    out.x.push_back(target);
    out.value.push_back(y[0]);
    prev = target;
  }
  return out;
}

}  // namespace cpdc::oracle
