// Transfer-coefficient tests: frozen references, cross-route and integrator
// agreement, unitarity, low-gain limits, symmetry of the grid spectra, and
// the angle utilities.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <vector>

#include "cpdc/dispersion.hpp"
#include "cpdc/errors.hpp"
#include "cpdc/oracle.hpp"
#include "cpdc/pdc_core.hpp"

using namespace cpdc;
using namespace cpdc::pdc_core;
using dispersion::DetuningGrid;

namespace {

ScaledCoords coords_of(double nu, double x0, double xL) {
  ScaledCoords c;
  c.x0 = x0;
  c.xL = xL;
  c.nu = nu;
  c.sigma = std::sqrt(nu);
  return c;
}

CrystalConfig reference_crystal(double nu_target = 0.146) {
  CrystalConfig c;
  c.length_L = 0.02;
  c.pump_wavelength = 0.42;
  c.sellmeier = dispersion::default_lithium_niobate_e();
  auto d = dispersion::design_grating(c.sellmeier, 0.42, 0.46, 0.75, 0.02);
  c.grating_K0 = d.K0;
  c.chirp_zeta = d.zeta;
  c.coupling_kappa_mag = std::sqrt(nu_target * d.zeta);
  return c;
}

void check_c(Complex got, Complex want, double rel) {
  CAPTURE(got.real());
  CAPTURE(got.imag());
  CAPTURE(want.real());
  CAPTURE(want.imag());
  CHECK(std::abs(got - want) <= rel * std::abs(want));
}

}  // namespace

TEST_CASE("transfer pair matches frozen 20-digit references") {
  struct Row {
    double nu, x0, xL, rel;
    Complex A, B;
  };
  const Row rows[] = {
      {0.146, -60.0, 92.0, 1e-9,
       {-1.5777198343033489105, 0.22142133925526586289},
       {-0.57049424473852652831, 1.1012554661621437225}},
      {0.146, -6.0, 9.0, 1e-9,
       {0.37082423130276784063, 1.5297551738629800777},
       {-1.0581043548613944504, -0.59839508412519342533}},
      {1.0, -40.0, 112.0, 1e-9,
       {-4.1272606897924153248, -22.642223683216009711},
       {-1.9391156080901573012, -22.911665255514599289}},
      {0.0001, -20.0, 130.0, 1e-9,
       {-0.99637133414436392826, 0.088572401490935112811},
       {0.0047372576404950635021, -0.024051282721274790984}},
      {0.146, 30.0, 80.0, 1e-9,
       {0.3986246064779035429, 0.91726031923301435622},
       {-0.016059507492845889357, 0.0031878438170795703893}},
      {0.146, -0.5, 152.1, 1e-9,
       {-0.66190753598600045386, -1.0486569140850086038},
       {-0.1663075339951635442, -0.71424415558672870673}},
      {5.0, -10.0, 10.0, 2e-7,
       {4376254.6991448574718, 0.0},
       {2685917.7594965988881, 3455061.6464843601047}},
  };
  for (const Row& r : rows) {
    CAPTURE(r.nu);
    CAPTURE(r.x0);
    ABPair ab = transfer_AB(coords_of(r.nu, r.x0, r.xL));
    double scale = std::abs(r.A);
    CHECK(std::abs(ab.A - r.A) <= r.rel * scale);
    CHECK(std::abs(ab.B - r.B) <= r.rel * scale);
  }
  // Symmetric window at large gain: A comes out real.
  ABPair sym = transfer_AB(coords_of(5.0, -10.0, 10.0));
  CHECK(std::fabs(sym.A.imag()) <= 1e-7 * std::abs(sym.A));
}

TEST_CASE("reciprocal route conjugates the forward route") {
  for (double nu : {0.146, 1.0}) {
    for (auto [x0, xL] : {std::pair{-60.0, 92.0}, {-6.0, 9.0}, {2.0, 40.0}}) {
      CAPTURE(nu);
      CAPTURE(x0);
      ABPair fwd = transfer_AB(coords_of(nu, x0, xL));
      ABPair rec = transfer_AB_tilde(coords_of(nu, x0, xL));
      check_c(rec.A, std::conj(fwd.A), 1e-8);
      check_c(rec.B, std::conj(fwd.B), 1e-8);
    }
  }
}

TEST_CASE("closed form agrees with the adaptive integrator") {
  CrystalConfig c = reference_crystal();
  double cap = dispersion::max_detuning(c.sellmeier, c.pump_wavelength);
  for (double f : {0.07, 0.2, 0.45, 0.7, 0.97}) {
    double Om = f * cap;
    CAPTURE(Om);
    ScaledCoords sc = scaled_coords(c, Om);
    ABPair ab = transfer_AB(sc);
    oracle::GreenPair g = oracle::integrate_green(sc, oracle::IntegrationSettings{});
    double scale = std::max(1.0, std::abs(g.A_num));
    CHECK(std::abs(ab.A - g.A_num) <= 1e-6 * scale);
    CHECK(std::abs(ab.B - g.B_num) <= 1e-6 * scale);
  }
}

TEST_CASE("unitarity holds across the production sweep") {
  CrystalConfig c = reference_crystal();
  double cap = dispersion::max_detuning(c.sellmeier, c.pump_wavelength);
  for (int i = 0; i < 40; ++i) {
    double Om = cap * (i + 0.5) / 40.0;
    ABPair ab = transfer_AB(scaled_coords(c, Om));
    double res = std::fabs(std::norm(ab.A) - std::norm(ab.B) - 1.0);
    CAPTURE(Om);
    CHECK(res <= 1e-8 * std::max(1.0, std::norm(ab.A) + std::norm(ab.B)));
  }
}

TEST_CASE("gain plateau levels match the constant-coupling values") {
  const double nu = 0.146;
  ABPair ab = transfer_AB(coords_of(nu, -76.3, 76.3));
  CHECK(in_plateau(coords_of(nu, -76.3, 76.3)));
  const double wantA = std::exp(M_PI * nu);
  CHECK(std::fabs(std::abs(ab.A) - wantA) <= 0.01 * wantA);
  const double wantB = std::sqrt(std::exp(2.0 * M_PI * nu) - 1.0);
  CHECK(std::fabs(std::abs(ab.B) - wantB) <= 0.02 * wantB);
}

TEST_CASE("basis route approaches the first-order closed forms at small gain") {
  CrystalConfig c = reference_crystal(1e-4);
  const double w0 = c.omega0();
  const double Om_lo = dispersion::omega_from_lambda_um(0.75) - w0;
  const double Om_hi = dispersion::omega_from_lambda_um(0.46) - w0;
  double worstA = 0.0, worstB = 0.0;
  for (int i = 0; i < 50; ++i) {
    double Om = Om_lo + (Om_hi - Om_lo) * i / 49.0;
    ScaledCoords sc = scaled_coords(c, Om);
    ABPair ab = transfer_AB(sc);
    Complex Alg = low_gain_A(sc);
    Complex Blg = low_gain_B(sc);
    worstA = std::max(worstA, std::abs(ab.A - Alg) / std::abs(Alg));
    worstB = std::max(worstB, std::abs(ab.B - Blg) / std::abs(ab.B));
  }
  CAPTURE(worstA);
  CAPTURE(worstB);
  CHECK(worstA <= 1e-3);
  CHECK(worstB <= 1e-3);
}

TEST_CASE("tiny-coupling dispatch stays on the integrator's curve") {
  ScaledCoords sc = coords_of(1e-7, -6.0, 9.0);
  ABPair ab = transfer_AB(sc);
  // Dispatched to the closed forms: modulus relation is exact by construction.
  CHECK(std::fabs(std::norm(ab.A) - std::norm(ab.B) - 1.0) <= 1e-15);
  oracle::GreenPair g = oracle::integrate_green(sc, oracle::IntegrationSettings{});
  check_c(ab.A, g.A_num, 1e-6);
  CHECK(std::abs(ab.B - g.B_num) <= 1e-4 * std::abs(g.B_num));
  // Deep in-band the conversion modulus plateaus at sigma sqrt(2 pi).
  ABPair deep = transfer_AB(coords_of(1e-7, -60.0, 92.0));
  double want = std::sqrt(1e-7) * std::sqrt(2.0 * M_PI);
  CHECK(std::fabs(std::abs(deep.B) - want) <= 0.05 * want);
}

TEST_CASE("dispersion phases dress the pair without changing moduli") {
  CrystalConfig c = reference_crystal();
  c.pump_phase_phi = 0.7;
  ABPair ab = transfer_AB(scaled_coords(c, 3e14));
  UVPair uv = transfer_UV(c, 3e14, ab.A, ab.B);
  CHECK(std::fabs(std::abs(uv.U) - std::abs(ab.A)) <= 1e-14 * std::abs(ab.A));
  CHECK(std::fabs(std::abs(uv.V) - std::abs(ab.B)) <= 1e-14 * std::abs(ab.B));
  // Advancing the pump phase by pi flips V and leaves U alone.
  CrystalConfig flipped = c;
  flipped.pump_phase_phi = c.pump_phase_phi + M_PI;
  UVPair uv2 = transfer_UV(flipped, 3e14, ab.A, ab.B);
  CHECK(uv2.U == uv.U);
  check_c(uv2.V, -uv.V, 1e-14);
}

TEST_CASE("squeezing spectrum avoids the cancellation-prone difference") {
  // Hyperbolic pair with r = 7: |U|^2 - |V|^2 = 1 holds analytically.
  const double r = 7.0;
  Complex U = std::polar(std::cosh(r), 0.3);
  Complex V = std::polar(std::sinh(r), -1.1);
  SqueezeTriple t = squeezing_spectrum(U, V);
  CHECK(std::fabs(t.r - r) <= 1e-12);
  CHECK(std::fabs(t.S2 - std::exp(-2.0 * r)) <= 1e-12 * std::exp(-2.0 * r));
  CHECK(std::fabs(t.S1 * t.S2 - 1.0) <= 1e-15);
  CHECK_THROWS_AS(squeezing_spectrum(Complex{1.5, 0.0}, Complex{0.2, 0.0}),
                  UnitarityError);
}

TEST_CASE("squeezing angle pins the principal branch") {
  Complex U = std::polar(2.0, 1.0);
  Complex V = std::polar(1.7, 2.5);
  double psi = squeezing_angle(U, V);
  CHECK(psi == 0.5 * std::arg(U * V));
  CHECK(psi > -M_PI_2);
  CHECK(psi <= M_PI_2);
  CHECK_THROWS_AS(squeezing_angle(U, Complex{1e-13, 0.0}), UndefinedAngleError);
}

TEST_CASE("mod-pi unwrapping recovers smooth phases") {
  std::vector<double> truth, wrapped;
  for (int i = 0; i < 200; ++i) {
    double t = 0.07 * i * i / 200.0 + 1.1 * i / 200.0;
    truth.push_back(t);
    double w = std::fmod(t, M_PI);
    if (w > M_PI_2) w -= M_PI;  // principal representative in (-pi/2, pi/2]
    wrapped.push_back(w);
  }
  UnwrapResult un = unwrap_phase(wrapped);
  REQUIRE(un.values.size() == truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i) {
    double want = truth[i] - truth[0] + wrapped[0];
    CHECK(std::fabs(un.values[i] - want) <= 1e-9);
  }
  CHECK_FALSE(un.aliasing_warning);

  UnwrapResult flat = unwrap_phase(std::vector<double>{0.4, 0.4, 0.4});
  CHECK(flat.max_raw_step == 0.0);

  // Steps at 1.5 rad sit within 10% of the pi/2 ambiguity boundary.
  UnwrapResult steep = unwrap_phase(std::vector<double>{0.0, 1.5, 3.0});
  CHECK(steep.aliasing_warning);
}

TEST_CASE("compensation angle is even and matches the scaled coordinates") {
  CrystalConfig c = reference_crystal();
  for (double Om : {2.8e14, 9.1e14, 1.6e15}) {
    CHECK(compensation_angle(c, Om) == compensation_angle(c, -Om));
    ScaledCoords sc = scaled_coords(c, Om);
    double want = sc.x0 * sc.x0 / 4.0 -
                  dispersion::k_sum(c, Om) * c.length_L / 2.0;
    CHECK(std::fabs(compensation_angle(c, Om) - want) <=
          1e-12 * std::fabs(want));
  }
}

TEST_CASE("regime guards use strict window boundaries") {
  CHECK(in_band(coords_of(0.146, -5.1, 5.1)));
  CHECK_FALSE(in_band(coords_of(0.146, -4.9, 5.1)));
  CHECK_FALSE(in_band(coords_of(0.146, -5.1, 4.9)));
  CHECK(in_plateau(coords_of(0.146, -20.0, 10.0)));
  CHECK_FALSE(in_plateau(coords_of(0.146, -18.0, 10.0)));
  CHECK_FALSE(in_plateau(coords_of(0.146, -20.0, 9.9)));
}

TEST_CASE("grid spectra are symmetric, consistent, and thread-invariant") {
  CrystalConfig c = reference_crystal();
  c.pump_phase_phi = 0.3;
  double cap = dispersion::max_detuning(c.sellmeier, c.pump_wavelength);
  DetuningGrid grid = DetuningGrid::make_symmetric(c.omega0(), cap, 64);
  SpectraResult s1 = compute_spectra(c, grid, 1);
  SpectraResult s3 = compute_spectra(c, grid, 3);

  const std::size_t n = grid.size();
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t m = grid.paired_index(j);
    CHECK(s1.coeffs[j].A == s1.coeffs[m].A);
    CHECK(s1.coeffs[j].B == s1.coeffs[m].B);
    CHECK(s1.psi_unwrapped[j] == s1.psi_unwrapped[m]);
    CHECK(s1.theta0[j] == s1.theta0[m]);
    CHECK(std::fabs(s1.S_optical[j] - s1.S_optical[m]) <=
          5e-15 * s1.S_optical[j]);
    CHECK(std::fabs(s1.S_squeeze[j] - s1.S_squeeze[m]) <=
          5e-15 * s1.S_squeeze[j]);

    // Definitions hold pointwise.
    CHECK(s1.S_optical[j] == optical_spectrum(s1.coeffs[j].V));
    CHECK(std::fabs(s1.S_squeeze[j] * s1.S_stretch[j] - 1.0) <= 1e-15);
    CHECK(std::fabs(std::exp(2.0 * s1.coeffs[j].r) - s1.S_stretch[j]) <=
          1e-13 * s1.S_stretch[j]);

    // Bitwise determinism across thread counts.
    CHECK(s1.coeffs[j].U == s3.coeffs[j].U);
    CHECK(s1.coeffs[j].V == s3.coeffs[j].V);
    CHECK(s1.psi_unwrapped[j] == s3.psi_unwrapped[j]);
    CHECK(s1.S_squeeze[j] == s3.S_squeeze[j]);
  }
  CHECK(s1.max_unitarity_residual == s3.max_unitarity_residual);
  CHECK(s1.max_unitarity_residual <= 1e-8);

  // Unwrapped angle changes by less than pi/2 between neighbours.
  for (std::size_t j = 1; j < n; ++j) {
    CHECK(std::fabs(s1.psi_unwrapped[j] - s1.psi_unwrapped[j - 1]) <= M_PI_2);
  }
  CHECK_THROWS_AS(compute_spectra(c, DetuningGrid{}, 1), DomainError);
}
