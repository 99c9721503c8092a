#pragma once

#include <complex>

#include "cpdc/errors.hpp"

// Parabolic cylinder functions D_a(z) of complex order at complex argument,
// the reciprocal basis pair built from them, the complex gamma function, and
// the imaginary error function. Evaluation is a three-regime scheme:
// Maclaurin series (small |z|), the large-|z| expansion on |arg z| <= pi/2,
// and connection formulas mapping the remaining sectors onto those rays; a
// narrow near-real-axis band where neither expansion reaches the target
// tolerance is covered by integrating the defining ODE inward along the ray
// from an expansion-certified seed. Each result carries a running relative
// error estimate and a certification flag against the advertised tolerance
// (1e-10 for |z| <= 50, 1e-8 beyond).

namespace cpdc::specfun {

using Complex = std::complex<double>;

inline constexpr double kInvSqrt2 = 0.7071067811865476;

// Argument in polar form z = rho e^{i theta} with the trigonometric values
// carried explicitly. The factories for the four diagonal rays theta =
// k pi/4 (k odd) set cos(2 theta) to an exact zero, which keeps |e^{-z^2/4}|
// exactly 1 there; the ray maps below preserve that exactness, so connection
// formulas never leave the exact-diagonal representation.
struct ArgRep {
  double rho = 0.0;
  double theta = 0.0;  // principal value in (-pi, pi]
  double cos_t = 1.0, sin_t = 0.0;
  double cos_2t = 1.0, sin_2t = 0.0;

  static ArgRep ray(double rho, double theta);
  static ArgRep from_complex(Complex z);
  // theta = eighth * pi/4 with eighth in {-3, -1, 1, 3}.
  static ArgRep diag(double rho, int eighth);

  ArgRep negated() const;        // z -> -z
  ArgRep times_i() const;        // z -> i z
  ArgRep times_minus_i() const;  // z -> -i z
  Complex to_complex() const { return {rho * cos_t, rho * sin_t}; }
  Complex square() const { return {rho * rho * cos_2t, rho * rho * sin_2t}; }
};

// x e^{i pi/4} and -x e^{-i pi/4} for signed real x, as principal-ray reps.
ArgRep diag_pos(double x);
ArgRep diag_neg(double x);

struct PcfResult {
  Complex value{};
  bool certified = false;  // err_est within the advertised tolerance
  double err_est = 0.0;    // estimated relative error
};

Complex gamma_c(Complex z);
// Reciprocal gamma, entire: exactly zero at the poles of gamma.
Complex rgamma_c(Complex z);

PcfResult pcf_d(Complex order, const ArgRep& z);
PcfResult pcf_d(Complex order, Complex z);

// dD_a/dz via the downward relation D'_a(z) = (z/2) D_a(z) - D_{a+1}(z).
PcfResult pcf_d_derivative(Complex order, const ArgRep& z);

enum class PcfOrderTag {
  d_i_nu,
  d_minus1_minus_i_nu,
  d_i_nu_minus1,
  d_minus_i_nu,
  general,
};

struct PcfOrder {
  Complex value{};
  PcfOrderTag tag = PcfOrderTag::general;
};

// Tagged order for the module-level nu (general is not constructible here).
PcfOrder make_order(PcfOrderTag tag, double nu);

// Basis pair: phi_1(x) = D_{i nu}(x e^{i pi/4}),
//             phi_2(x) = D_{-1-i nu}(-x e^{-i pi/4}); which in {1, 2}.
PcfResult pcf_basis(int which, double x, double nu);
// d phi_i / dx.
PcfResult pcf_basis_derivative(int which, double x, double nu);

// Reciprocal partners: basis-1 tags (d_i_nu, d_i_nu_minus1) give
//   nu^{1/2} e^{i 3pi/4} D_{i nu - 1}(x e^{i pi/4}),
// basis-2 tags (d_minus1_minus_i_nu, d_minus_i_nu) give
//   nu^{-1/2} e^{-i pi/4} D_{-i nu}(-x e^{-i pi/4}).
// Rejects nu <= 0 (the nu^{+-1/2} prefactors degenerate) and general tags.
PcfResult pcf_d_reciprocal(PcfOrderTag tag, double x, double nu);
PcfResult pcf_d_reciprocal(const PcfOrder& order, double x, double nu);

// |phi_1 phi_2' - phi_1' phi_2 - e^{-i pi/4 + pi nu / 2}|, derivatives taken
// in x. The pair Wronskian is x-independent; contract: <= 1e-8 for |x| <= 50,
// nu <= 5.
double wronskian_check(double nu, double x);

Complex erfi_c(Complex z);

}  // namespace cpdc::specfun
