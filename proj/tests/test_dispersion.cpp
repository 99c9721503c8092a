// Refractive index, grating design, and detuning-grid tests. Numeric
// references were generated with the same expression ordering as the
// implementation, so tight relative tolerances are appropriate.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>

#include "cpdc/dispersion.hpp"
#include "cpdc/errors.hpp"

using namespace cpdc;
using namespace cpdc::dispersion;

namespace {

constexpr double kPumpUm = 0.42;
constexpr double kLengthM = 0.02;

void check_rel(double got, double want, double rel) {
  CAPTURE(got);
  CAPTURE(want);
  CHECK(std::fabs(got - want) <= rel * std::fabs(want));
}

CrystalConfig reference_crystal() {
  CrystalConfig c;
  c.length_L = kLengthM;
  c.pump_wavelength = kPumpUm;
  c.sellmeier = default_lithium_niobate_e();
  GratingDesign d = design_grating(c.sellmeier, kPumpUm, 0.46, 0.75, kLengthM);
  c.grating_K0 = d.K0;
  c.chirp_zeta = d.zeta;
  c.coupling_kappa_mag = std::sqrt(0.146 * d.zeta);
  return c;
}

}  // namespace

TEST_CASE("extraordinary index matches frozen references") {
  SellmeierModel m = default_lithium_niobate_e();
  const struct {
    double lam, n;
  } rows[] = {
      {0.40, 2.3309748137672543},   {0.42, 2.3082095810913086},
      {0.4569, 2.276066437485543},  {0.46, 2.273812058575526},
      {0.572, 2.2194130547181015},  {0.599, 2.2112813507681817},
      {0.75, 2.1819194151437356},   {0.84, 2.1716271689371687},
      {0.9545, 2.1623334124504043}, {4.83, 2.013540575216837},
      {5.2, 1.9905459317671501},
  };
  for (auto r : rows) {
    CAPTURE(r.lam);
    check_rel(refractive_index(m, r.lam), r.n, 1e-14);
  }
}

TEST_CASE("index refuses to extrapolate") {
  SellmeierModel m = default_lithium_niobate_e();
  CHECK_THROWS_AS(refractive_index(m, 0.399), RangeError);
  CHECK_THROWS_AS(refractive_index(m, 5.201), RangeError);
  CHECK_THROWS_AS(refractive_index(m, -1.0), RangeError);
  CHECK_THROWS_AS(refractive_index(m, std::numeric_limits<double>::quiet_NaN()),
                  DomainError);
}

TEST_CASE("frequency and wavelength conversions round-trip") {
  double wp = omega_from_lambda_um(kPumpUm);
  check_rel(wp, 4484884684068698.5, 1e-15);
  check_rel(lambda_um_from_omega(wp), kPumpUm, 1e-14);
  CHECK_THROWS_AS(omega_from_lambda_um(0.0), DomainError);
  CHECK_THROWS_AS(lambda_um_from_omega(-2.0), DomainError);
}

TEST_CASE("grating design reproduces the reference scenario") {
  SellmeierModel m = default_lithium_niobate_e();
  GratingDesign d = design_grating(m, kPumpUm, 0.46, 0.75, kLengthM);
  check_rel(d.K0, 2018239.5009084418, 1e-12);
  check_rel(d.zeta, 58253765.387302265, 1e-12);
  check_rel(kLengthM * std::sqrt(d.zeta), 152.6483087194906, 1e-12);

  GratingDesign lo = design_grating(m, kPumpUm, 0.5441640378548896,
                                    0.5989583333333334, kLengthM);
  check_rel(lo.K0, 1758674.11963249, 1e-11);
  check_rel(lo.zeta, 11950909.45753511, 1e-11);
}

TEST_CASE("matching point sweeps the crystal between the band edges") {
  CrystalConfig c = reference_crystal();
  const double w0 = c.omega0();
  const double Om_red = omega_from_lambda_um(0.75) - w0;
  const double Om_blue = omega_from_lambda_um(0.46) - w0;
  // The red edge has the smaller k_sum here, so it is matched bitwise at z=0.
  CHECK(phase_mismatch(c, Om_red) == 0.0);
  double z_blue = -phase_mismatch(c, Om_blue) / c.chirp_zeta;
  check_rel(z_blue, kLengthM, 1e-9);
  // Interior detunings match strictly inside the crystal.
  for (double f : {0.25, 0.5, 0.75}) {
    double Om = Om_red + f * (Om_blue - Om_red);
    double z = -phase_mismatch(c, Om) / c.chirp_zeta;
    CHECK(z > 0.0);
    CHECK(z < kLengthM);
  }
}

TEST_CASE("infeasible design requests throw") {
  SellmeierModel m = default_lithium_niobate_e();
  CHECK_THROWS_AS(design_grating(m, kPumpUm, 0.46, 0.75, kLengthM,
                                 GratingOrientation::large_mismatch_at_entry),
                  InfeasibleDesignError);
  CHECK_THROWS_AS(design_grating(m, kPumpUm, 0.6, 0.6, kLengthM),
                  InfeasibleDesignError);
  CHECK_THROWS_AS(design_grating(m, kPumpUm, 0.75, 0.46, kLengthM), DomainError);
  CHECK_THROWS_AS(design_grating(m, kPumpUm, 0.46, 0.75, 0.0), DomainError);
  // Signal edge at 0.44 um puts its idler near 9.2 um, outside validity.
  CHECK_THROWS_AS(design_grating(m, kPumpUm, 0.44, 0.75, kLengthM), RangeError);
}

TEST_CASE("idler-side band folds onto the same detuning window") {
  SellmeierModel m = default_lithium_niobate_e();
  GratingDesign d = design_grating(m, kPumpUm, 0.9, 1.05, kLengthM);
  CHECK(d.zeta > 0.0);
  CrystalConfig c = reference_crystal();
  c.grating_K0 = d.K0;
  c.chirp_zeta = d.zeta;
  const double w0 = c.omega0();
  double d1 = phase_mismatch(c, omega_from_lambda_um(0.9) - w0);
  double d2 = phase_mismatch(c, omega_from_lambda_um(1.05) - w0);
  CHECK(std::fmin(std::fabs(d1), std::fabs(d2)) == 0.0);
}

TEST_CASE("wavevector helpers match frozen references and symmetry") {
  CrystalConfig c = reference_crystal();
  check_rel(wavevector(c, 3e14), 18514803.005756132, 1e-12);
  check_rel(k_sum(c, 3e14), 32518583.20800037, 1e-12);
  check_rel(phase_mismatch(c, 3e14), -6088.123661056161, 1e-10);
  check_rel(phase_mismatch(c, 0.0), 25028.606867834926, 1e-10);
  for (double Om : {1.1e14, 3e14, 9.4e14, 1.85e15}) {
    CHECK(k_sum(c, Om) == k_sum(c, -Om));
    CHECK(phase_mismatch(c, Om) == phase_mismatch(c, -Om));
  }
  // k is strictly increasing in frequency across the signal band.
  double prev = wavevector(c, 2e14);
  for (double Om = 3e14; Om < 1.9e15; Om += 1e14) {
    double k = wavevector(c, Om);
    CHECK(k > prev);
    prev = k;
  }
  check_rel(c.nu(), 0.146, 1e-13);
}

TEST_CASE("validity cap on the detuning matches the frozen reference") {
  SellmeierModel m = default_lithium_niobate_e();
  check_rel(max_detuning(m, kPumpUm), 1880201656013416.0, 1e-13);
  // Shrink validity until the half-pump wavelength (0.84 um) falls outside.
  SellmeierModel narrow = m;
  narrow.valid_min_um = 0.9;
  CHECK_THROWS_AS(max_detuning(narrow, kPumpUm), RangeError);
}

TEST_CASE("symmetric grid midpoints pair bitwise and exclude zero") {
  DetuningGrid g = DetuningGrid::make_symmetric(1.0e15, 2.0e15, 16);
  REQUIRE(g.size() == 16);
  check_rel(g.spacing(), 2.0 * 2.0e15 / 16.0, 0.0);
  for (std::size_t j = 0; j < g.size(); ++j) {
    CHECK(g.detunings[g.paired_index(j)] == -g.detunings[j]);
    CHECK(g.detunings[j] != 0.0);
    if (j) CHECK(g.detunings[j] > g.detunings[j - 1]);
  }
  CHECK(g.detunings[0] == (-8.0 + 0.5) * g.spacing());
  CHECK_THROWS_AS(DetuningGrid::make_symmetric(1e15, 2e15, 15), DomainError);
  CHECK_THROWS_AS(DetuningGrid::make_symmetric(1e15, 2e15, 0), DomainError);
  CHECK_THROWS_AS(DetuningGrid::make_symmetric(1e15, -1.0, 16), DomainError);
  CHECK_THROWS_AS(DetuningGrid{}.spacing(), DomainError);
}
