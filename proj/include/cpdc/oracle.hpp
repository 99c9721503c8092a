#pragma once

#include <complex>
#include <optional>
#include <vector>

#include "cpdc/errors.hpp"
#include "cpdc/scaled_coords.hpp"

// Brute-force integrator for the coupled propagation equations
//   u' = -(i/2) x u + sigma v,   v' = +(i/2) x v + sigma u,
// used as the independent ground truth for the closed-form transfer
// coefficients. Nothing here knows about special functions.
namespace cpdc::oracle {

using Complex = std::complex<double>;

struct IntegrationSettings {
  double rel_tol = 1e-12;
  double abs_tol = 1e-14;
  double max_step = 0.25;  // ceiling in x units; further capped by the phase rate
  int method_order = 8;    // 5: Cash-Karp 5(4); 8: Fehlberg 7(8)
};

struct GreenPair {
  Complex A_num;
  Complex B_num;
  double residual_unitarity = 0.0;  // | |A|^2 - |B|^2 - 1 |
};

// Integrates the system from x0 to xL twice, with initial conditions (1,0)
// and (0,1), and reads the fundamental-matrix entries A (u-image of (1,0))
// and B (u-image of (0,1)).
GreenPair integrate_green(const ScaledCoords& coords,
                          const IntegrationSettings& settings);

struct SecondOrderTrajectory {
  std::vector<double> x;
  std::vector<Complex> value;
};

// Integrates f'' + (x^2/4 + i/2 - sigma_sq) f = 0 from (init_value,
// init_slope) at x0, sampling `samples` uniformly spaced points including
// both endpoints. sigma_sq defaults to coords.nu; the override makes the
// constant-coefficient checks (e.g. sigma_sq = i/2, which cancels the i/2
// term and leaves the pure x^2/4 oscillator) reachable.
SecondOrderTrajectory integrate_second_order(
    const ScaledCoords& coords, const IntegrationSettings& settings,
    Complex init_value, Complex init_slope, int samples = 65,
    std::optional<Complex> sigma_sq_override = std::nullopt);

}  // namespace cpdc::oracle
