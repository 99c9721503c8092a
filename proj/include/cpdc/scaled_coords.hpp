#pragma once

#include <cmath>

namespace cpdc {

// Dimensionless propagation frame for the chirped-grating amplifier:
// x = mismatch/sqrt(chirp) + z*sqrt(chirp), so x runs from x0 at the crystal
// entry to xL = x0 + L*sqrt(chirp) at the exit, and the perfect-matching
// point of a detuning sits at x = 0.
struct ScaledCoords {
  double x0 = 0.0;     // entry coordinate
  double xL = 0.0;     // exit coordinate; xL - x0 is the same for every detuning
  double sigma = 0.0;  // coupling / sqrt(chirp)
  double nu = 0.0;     // sigma^2 exactly
};

inline ScaledCoords make_scaled_coords(double delta, double zeta, double length,
                                       double kappa_mag) {
  const double root = std::sqrt(zeta);
  ScaledCoords c;
  c.x0 = delta / root;
  c.xL = c.x0 + length * root;
  c.sigma = kappa_mag / root;
  c.nu = c.sigma * c.sigma;
  return c;
}

}  // namespace cpdc
