#include "cpdc/dispersion.hpp"

#include <cmath>
#include <limits>

namespace cpdc::dispersion {

namespace {

constexpr double kTwoPiC = 2.0 * M_PI * kSpeedOfLight;

// Index at the wavelength corresponding to an absolute angular frequency.
double index_at_omega(const SellmeierModel& model, double omega) {
  return refractive_index(model, lambda_um_from_omega(omega));
}

// k at absolute frequency. Kept local: public entry points fix omega0 or the
// pump wavelength so that equal inputs take bit-identical paths.
double k_abs(const SellmeierModel& model, double omega) {
  return index_at_omega(model, omega) * omega / kSpeedOfLight;
}

double k_sum_raw(const SellmeierModel& model, double omega0, double Omega) {
  return k_abs(model, omega0 + Omega) + k_abs(model, omega0 - Omega);
}

double pump_wavevector(const SellmeierModel& model, double pump_um) {
  return k_abs(model, omega_from_lambda_um(pump_um));
}

}  // namespace

double omega_from_lambda_um(double lambda_um) {
  if (!(lambda_um > 0.0)) throw DomainError("wavelength must be positive");
  return kTwoPiC / um_to_m(lambda_um);
}

double lambda_um_from_omega(double omega) {
  if (!(omega > 0.0)) throw DomainError("frequency must be positive");
  return kTwoPiC / omega * 1e6;
}

SellmeierModel default_lithium_niobate_e() {
  SellmeierModel m;
  m.label = "LiNbO3 congruent, extraordinary, 24.5 C (Jundt 1997)";
  m.coefficients = {5.35583, 0.100473, 0.20692 * 0.20692,
                    100.0,   11.34927 * 11.34927, 0.015334};
  m.valid_min_um = 0.40;
  m.valid_max_um = 5.20;
  return m;
}

double refractive_index(const SellmeierModel& model, double lambda_um) {
  if (!std::isfinite(lambda_um)) throw DomainError("wavelength must be finite");
  if (lambda_um < model.valid_min_um || lambda_um > model.valid_max_um) {
    throw RangeError("wavelength " + std::to_string(lambda_um) +
                     " um outside Sellmeier validity [" +
                     std::to_string(model.valid_min_um) + ", " +
                     std::to_string(model.valid_max_um) + "] um");
  }
  const auto& c = model.coefficients;
  const double L = lambda_um * lambda_um;
  const double n2 = c[0] + c[1] / (L - c[2]) + c[3] / (L - c[4]) - c[5] * L;
  if (!(n2 > 1.0)) {
    throw RangeError("Sellmeier form is non-physical at this wavelength");
  }
  return std::sqrt(n2);
}

double wavevector(const CrystalConfig& config, double Omega) {
  return k_abs(config.sellmeier, config.omega0() + Omega);
}

double k_sum(const CrystalConfig& config, double Omega) {
  // IEEE addition is commutative, so swapping Omega -> -Omega returns the
  // bitwise-identical sum.
  return k_sum_raw(config.sellmeier, config.omega0(), Omega);
}

double phase_mismatch(const CrystalConfig& config, double Omega) {
  const double k_p = pump_wavevector(config.sellmeier, config.pump_wavelength);
  return k_p - k_sum(config, Omega) - config.grating_K0;
}

GratingDesign design_grating(const SellmeierModel& sellmeier, double pump_um,
                             double band_lo_um, double band_hi_um,
                             double length_L, GratingOrientation orientation) {
  if (!(length_L > 0.0)) throw DomainError("crystal length must be positive");
  if (!(band_lo_um > 0.0) || !(band_hi_um > 0.0) || band_lo_um > band_hi_um) {
    throw DomainError("band edges must satisfy 0 < lo <= hi");
  }
  const double omega0 = omega_from_lambda_um(pump_um) / 2.0;

  // Convert the signal-side wavelength band to a |Omega| window. A band that
  // straddles degeneracy folds onto [0, max(|edges|)].
  const double Om_blue = omega_from_lambda_um(band_lo_um) - omega0;
  const double Om_red = omega_from_lambda_um(band_hi_um) - omega0;
  double Om_a = Om_red;
  double Om_b = Om_blue;
  if (Om_a < 0.0 && Om_b < 0.0) {
    const double t = Om_a;
    Om_a = -Om_b;
    Om_b = -t;
  } else if (Om_a < 0.0) {
    Om_b = std::fmax(Om_b, -Om_a);
    Om_a = 0.0;
  }

  // Validity of all four corner wavelengths (signal and idler at each edge)
  // is enforced by the index evaluations inside k_sum_raw.
  const double ks_a = k_sum_raw(sellmeier, omega0, Om_a);
  const double ks_b = k_sum_raw(sellmeier, omega0, Om_b);

  // The entry-matched edge is chosen by comparing k_sum at the two edges,
  // not by assuming monotonicity. With the default orientation the smaller
  // k_sum matches at z = 0; the other edge then needs Delta = -zeta*L, which
  // fixes a positive chirp.
  const double ks_entry = (orientation == GratingOrientation::small_mismatch_at_entry)
                              ? std::fmin(ks_a, ks_b)
                              : std::fmax(ks_a, ks_b);
  const double ks_exit = (ks_entry == ks_a) ? ks_b : ks_a;

  GratingDesign d;
  d.K0 = pump_wavevector(sellmeier, pump_um) - ks_entry;
  d.zeta = (ks_exit - ks_entry) / length_L;
  if (!(d.zeta > 0.0)) {
    throw InfeasibleDesignError(
        "band demands a non-positive chirp (degenerate band or flipped "
        "orientation for this dispersion)");
  }
  return d;
}

double max_detuning(const SellmeierModel& sellmeier, double pump_um) {
  const double omega0 = omega_from_lambda_um(pump_um) / 2.0;
  const double lo = omega0 - omega_from_lambda_um(sellmeier.valid_max_um);
  const double hi = omega_from_lambda_um(sellmeier.valid_min_um) - omega0;
  const double cap = std::fmin(lo, hi);
  if (!(cap > 0.0)) {
    throw RangeError("half-pump frequency lies outside the Sellmeier range");
  }
  return cap;
}

double DetuningGrid::spacing() const {
  if (detunings.size() < 2) throw DomainError("grid has no spacing");
  return detunings[1] - detunings[0];
}

DetuningGrid DetuningGrid::make_symmetric(double omega0, double omega_cap,
                                          std::size_t n) {
  if (!(omega_cap > 0.0)) throw DomainError("detuning cap must be positive");
  if (n < 2 || n % 2 != 0) throw DomainError("grid size must be even and >= 2");
  DetuningGrid g;
  g.omega0 = omega0;
  g.detunings.resize(n);
  const double delta = 2.0 * omega_cap / static_cast<double>(n);
  const double half = static_cast<double>(n) / 2.0;
  for (std::size_t j = 0; j < n; ++j) {
    // Half-integer multiples of delta: j - n/2 + 0.5 negates exactly under
    // j -> n-1-j, so the grid is bitwise symmetric and never contains 0.
    g.detunings[j] = (static_cast<double>(j) - half + 0.5) * delta;
  }
  return g;
}

}  // namespace cpdc::dispersion
