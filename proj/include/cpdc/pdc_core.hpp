#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "cpdc/dispersion.hpp"
#include "cpdc/errors.hpp"
#include "cpdc/scaled_coords.hpp"

// Bogoliubov transfer coefficients of the chirped amplifier and the derived
// spectra: photon flux, squeezing/stretching, squeezing angle, compensation
// angle. Everything is a pure function of the crystal config and detuning.
namespace cpdc::pdc_core {

using Complex = std::complex<double>;
using dispersion::CrystalConfig;
using dispersion::DetuningGrid;

// Scaled entry/exit coordinates for one detuning.
ScaledCoords scaled_coords(const CrystalConfig& config, double Omega);

struct ABPair {
  Complex A;
  Complex B;
};

// Closed-form transfer pair from the parabolic cylinder basis. Dispatches to
// the analytic low-gain limit when nu < 1e-6 (the basis prefactors are
// singular as nu -> 0). Throws UnitarityError if the internal self-check
// | |A|^2 - |B|^2 - 1 | exceeds 1e-6 * max(1, |A|^2 + |B|^2).
ABPair transfer_AB(const ScaledCoords& coords);

// Same map assembled from the reciprocal-function route. Analytically equal
// to the conjugates of transfer_AB; computed independently so the pair of
// routes cross-checks the function evaluations.
ABPair transfer_AB_tilde(const ScaledCoords& coords);

// Low-gain closed forms (first order in sigma).
Complex low_gain_A(const ScaledCoords& coords);  // pure phase e^{-i(xL^2-x0^2)/4}
Complex low_gain_B(const ScaledCoords& coords);  // erfi difference form

struct UVPair {
  Complex U;
  Complex V;
};

// Attaches the dispersion phases:
//   U = A e^{i k(Omega) L} e^{i(Delta L + zeta L^2/2)/2}
//   V = i B e^{i k(Omega) L} e^{i(Delta L + zeta L^2/2)/2} e^{i phi}
UVPair transfer_UV(const CrystalConfig& config, double Omega, Complex A, Complex B);

struct TransferCoefficients {
  Complex A, B, U, V;
  double r = 0.0;    // squeeze parameter, ln(|U| + |V|)
  double psi = 0.0;  // rad; unwrapped at the grid level in SpectraResult
};

double optical_spectrum(Complex V);  // |V|^2 / (2 pi)

struct SqueezeTriple {
  double S2 = 1.0;  // e^{-2r}, squeezed quadrature
  double S1 = 1.0;  // e^{+2r}, stretched quadrature
  double r = 0.0;
};
// Throws UnitarityError when | |U|^2 - |V|^2 - 1 | > 1e-6 * max(1, |U|^2 + |V|^2).
SqueezeTriple squeezing_spectrum(Complex U, Complex V);

// psi = arg(U(+Omega) V(-Omega)) / 2, principal value in (-pi/2, pi/2].
// Throws UndefinedAngleError when |V| < 1e-12.
double squeezing_angle(Complex U_pos, Complex V_neg);

struct UnwrapResult {
  std::vector<double> values;
  double max_raw_step = 0.0;     // largest |adjacent difference| before unwrap
  bool aliasing_warning = false; // some raw step came within 10% of the pi/2 boundary
};
// Mod-pi unwrapping (the angle is an ellipse orientation, pi-periodic);
// adjacent output differences are < pi/2 in magnitude.
UnwrapResult unwrap_phase(const std::vector<double>& samples);

// theta0 = Delta^2/(4 zeta) - [k(Omega) + k(-Omega)] L / 2; even in Omega.
double compensation_angle(const CrystalConfig& config, double Omega);

// Asymptotic-regime guards: the matching point lies well inside the crystal
// (in_band), or deep enough for the constant-gain plateau (in_plateau).
bool in_band(const ScaledCoords& coords);     // x0 < -5 and xL > +5
bool in_plateau(const ScaledCoords& coords);  // x0 <= -50 sqrt(nu) and xL >= +10

struct SpectraResult {
  DetuningGrid grid;
  std::vector<TransferCoefficients> coeffs;
  std::vector<double> S_optical;
  std::vector<double> S_squeeze;
  std::vector<double> S_stretch;
  std::vector<double> psi_unwrapped;
  std::vector<double> theta0;
  bool psi_aliasing_warning = false;
  double max_unitarity_residual = 0.0;
};

// Full-grid evaluation. A and B are computed once per |Omega| pair (they are
// even), so the stored A, B, and psi sequences are bit-exactly symmetric;
// U and V carry the side-dependent k(Omega) phases. Deterministic for any
// thread count: workers write disjoint indices of preallocated arrays.
SpectraResult compute_spectra(const CrystalConfig& config, const DetuningGrid& grid,
                              int threads = 1);

}  // namespace cpdc::pdc_core
