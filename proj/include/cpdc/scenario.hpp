#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cpdc/dispersion.hpp"
#include "cpdc/errors.hpp"
#include "cpdc/pdc_core.hpp"
#include "cpdc/shg.hpp"

// Scenario files, the pipeline runner behind the CLI, CSV/JSON emission, and
// the validation suites. Kept in the library so tests can drive everything
// in-process; the cpdc binary is a thin parser around these calls.
namespace cpdc::scenario {

inline constexpr const char* kVersion = "1.0.0";

enum class Quantity {
  optical_spectrum,
  squeezing_spectrum,
  squeezing_angle,
  compensation_angle,
  shg_flux,
  shg_quadrature,
  sh_incoherent,
  transfer_coeffs,
};

const char* quantity_name(Quantity q);
Quantity quantity_from_name(const std::string& name);  // ConfigError on unknown

struct OutputRequest {
  Quantity quantity = Quantity::optical_spectrum;
  std::string path;           // relative paths resolve against --out-dir
  std::string format = "csv"; // "csv" or "json"
};

struct CorrelatorRequest {
  double tau_min_s = -20e-15;
  double tau_max_s = 20e-15;
  int tau_points = 801;
};

struct Scenario {
  std::string id;
  double length_m = 0.0;
  double pump_um = 0.0;
  double pump_phase_rad = 0.0;
  std::optional<double> kappa_per_m;  // exclusive with nu_target
  std::optional<double> nu_target;    // kappa = sqrt(nu * zeta) after design
  dispersion::SellmeierModel sellmeier;
  double band_lo_um = 0.0;  // signal-side wavelength band, lo < hi
  double band_hi_um = 0.0;
  int grid_points = 1 << 14;  // power of two, >= 2^10
  CorrelatorRequest correlator;
  std::vector<OutputRequest> outputs;
};

// Parsing throws ConfigError with file/line/caret context on syntax errors
// and with a field path on semantic errors.
Scenario parse_scenario(const std::string& json_text,
                        const std::string& source_name = "<memory>");
Scenario load_scenario(const std::filesystem::path& path);
std::string serialize_scenario(const Scenario& s);  // parse round-trip identity

struct ResolvedScenario {
  Scenario scenario;
  dispersion::CrystalConfig crystal;  // grating designed from the band
  dispersion::DetuningGrid grid;
};
ResolvedScenario resolve(const Scenario& s, std::optional<int> grid_points_override = {});

struct RunSummary {
  double nu = 0.0;
  double zeta = 0.0;       // 1/m^2
  double K0 = 0.0;         // 1/m
  double band_lo_um = 0.0;
  double band_hi_um = 0.0;
  double plateau_U = 0.0;        // mean |U| over plateau-classified points
  double S2_plateau_dB = 0.0;    // 10 log10(mean in-plateau S2)
  double psi_span_rad = 0.0;     // max - min of unwrapped psi over the band
  double corr_time_s = 0.0;      // first zero of Phi(tau), auto tau scan
  double max_unitarity_residual = 0.0;
  bool aliasing_warning = false;
};

struct RunResult {
  RunSummary summary;
  bool ok = true;                       // self-checks passed
  std::vector<std::string> messages;    // warnings and failure descriptions
  std::vector<std::string> files_written;
};

RunResult run_scenario(const ResolvedScenario& rs, const std::filesystem::path& out_dir,
                       int threads, std::ostream& log);

struct CheckResult {
  std::string name;
  bool passed = false;
  double residual = 0.0;  // check-specific figure of merit
  std::string detail;
};

// fast: unitarity + evenness + Wronskian on a coarse grid (seconds).
// full: adds oracle equivalence (50 detunings x 3 gains), the low-gain limit,
// the constant-gain plateau, and finite-difference reciprocal checks.
std::vector<CheckResult> validate_fast();
std::vector<CheckResult> validate_full();
std::string check_report_json(const std::vector<CheckResult>& checks);

// Shortest round-trippable decimal form (17 significant digits via to_chars);
// locale-independent.
std::string format_double(double v);

}  // namespace cpdc::scenario
