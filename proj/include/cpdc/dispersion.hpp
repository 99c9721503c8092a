#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "cpdc/errors.hpp"

// Refractive index, wavevectors, chirped grating design, and the detuning
// grid. All wavelengths are vacuum wavelengths in micrometres; wavevectors
// are in 1/m; detunings Omega are angular frequencies (rad/s) relative to
// the half-pump frequency omega0.
namespace cpdc::dispersion {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

// Unit conversions are funnelled through these helpers so every caller (and
// every frozen reference value) uses bit-identical expressions.
inline double um_to_m(double um) { return um * 1e-6; }
double omega_from_lambda_um(double lambda_um);  // 2 pi c / um_to_m(lambda)
double lambda_um_from_omega(double omega);

struct SellmeierModel {
  std::string label;  // provenance of the coefficient set
  // n^2 = c0 + c1/(L - c2) + c3/(L - c4) - c5*L with L = lambda_um^2.
  std::array<double, 6> coefficients{};
  double valid_min_um = 0.0;
  double valid_max_um = 0.0;
};

// Congruent lithium niobate, extraordinary ray (Jundt, Opt. Lett. 22, 1553
// (1997)), valid 0.40-5.20 um at room temperature.
SellmeierModel default_lithium_niobate_e();

// Throws RangeError outside [valid_min_um, valid_max_um]; never extrapolates.
double refractive_index(const SellmeierModel& model, double lambda_um);

struct CrystalConfig {
  double length_L = 0.0;            // m
  double chirp_zeta = 0.0;          // 1/m^2, > 0
  double grating_K0 = 0.0;          // 1/m
  double coupling_kappa_mag = 0.0;  // 1/m, >= 0
  double pump_phase_phi = 0.0;      // rad
  double pump_wavelength = 0.0;     // um
  SellmeierModel sellmeier;

  double pump_omega() const { return omega_from_lambda_um(pump_wavelength); }
  double omega0() const { return pump_omega() / 2.0; }
  double nu() const { return coupling_kappa_mag * coupling_kappa_mag / chirp_zeta; }
};

// k(Omega) = n(lambda(omega0 + Omega)) * (omega0 + Omega) / c.
double wavevector(const CrystalConfig& config, double Omega);

// k(Omega) + k(-Omega); even in Omega by construction.
double k_sum(const CrystalConfig& config, double Omega);

// Delta(Omega) = k_pump - k_sum(Omega) - K0, where k_pump is evaluated at the
// pump wavelength directly. Even in Omega exactly.
double phase_mismatch(const CrystalConfig& config, double Omega);

enum class GratingOrientation {
  // Perfect matching of the small-|mismatch| band edge at z = 0 (default);
  // the other edge then matches at z = L and the chirp comes out positive.
  small_mismatch_at_entry,
  // The flipped convention; with this material dispersion it demands a
  // negative chirp, which the config contract rejects.
  large_mismatch_at_entry,
};

struct GratingDesign {
  double K0 = 0.0;    // 1/m
  double zeta = 0.0;  // 1/m^2
};

// Chooses (K0, zeta) so the perfect-matching point sweeps exactly from z = 0
// to z = L as the detuning sweeps between the band edges. The band is given
// as signal-side wavelengths; both edges and their idler images must lie in
// the Sellmeier validity range. Throws InfeasibleDesignError when the
// demanded chirp is not positive (degenerate band, or flipped orientation).
GratingDesign design_grating(
    const SellmeierModel& sellmeier, double pump_um, double band_lo_um,
    double band_hi_um, double length_L,
    GratingOrientation orientation = GratingOrientation::small_mismatch_at_entry);

// Largest |Omega| for which both omega0 + Omega and omega0 - Omega stay
// inside the Sellmeier validity range.
double max_detuning(const SellmeierModel& sellmeier, double pump_um);

struct DetuningGrid {
  double omega0 = 0.0;
  // Strictly increasing, symmetric cell midpoints: detunings[n-1-j] =
  // -detunings[j] exactly, and 0 is never a member.
  std::vector<double> detunings;

  std::size_t size() const { return detunings.size(); }
  std::size_t paired_index(std::size_t j) const { return detunings.size() - 1 - j; }
  double spacing() const;

  // n cell midpoints of (-omega_cap, omega_cap): (j - n/2 + 0.5) * spacing.
  static DetuningGrid make_symmetric(double omega0, double omega_cap, std::size_t n);
};

}  // namespace cpdc::dispersion
