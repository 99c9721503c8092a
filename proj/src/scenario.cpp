#include "cpdc/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "json.hpp"

#include "cpdc/oracle.hpp"
#include "cpdc/specfun.hpp"

namespace cpdc::scenario {

using nlohmann::json;
using nlohmann::ordered_json;
using pdc_core::Complex;

namespace {

std::string syntax_context(const std::string& text, const std::string& src,
                           const nlohmann::json::parse_error& e) {
  // e.byte is the 1-based offset of the offending character.
  std::size_t pos = e.byte > 0 ? e.byte - 1 : 0;
  pos = std::min(pos, text.size());
  std::size_t line_start = text.rfind('\n', pos == 0 ? 0 : pos - 1);
  line_start = line_start == std::string::npos ? 0 : line_start + 1;
  if (pos > 0 && pos <= line_start && line_start > 0) {
    // Error flagged at a newline: point at the end of the previous line.
    line_start = text.rfind('\n', line_start - 2);
    line_start = line_start == std::string::npos ? 0 : line_start + 1;
  }
  std::size_t line_end = text.find('\n', line_start);
  if (line_end == std::string::npos) line_end = text.size();
  const std::size_t line_no = 1 + std::count(text.begin(), text.begin() + line_start, '\n');
  const std::size_t col = pos >= line_start ? pos - line_start : 0;

  std::ostringstream out;
  out << src << ':' << line_no << ':' << (col + 1) << ": " << e.what() << '\n';
  out << "    " << text.substr(line_start, line_end - line_start) << '\n';
  out << "    " << std::string(col, ' ') << '^';
  return out.str();
}

[[noreturn]] void fail_field(const std::string& src, const std::string& path,
                             const std::string& message) {
  throw ConfigError(src + ": " + path + ": " + message);
}

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed,
                    const std::string& src, const std::string& path) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* a : allowed) {
      if (it.key() == a) {
        known = true;
        break;
      }
    }
    if (!known) fail_field(src, path.empty() ? it.key() : path + "." + it.key(),
                           "unknown key");
  }
}

const json* find(const json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

double need_number(const json& obj, const char* key, const std::string& src,
                   const std::string& path) {
  const json* v = find(obj, key);
  if (!v || !v->is_number()) fail_field(src, path, "expected a number");
  const double d = v->get<double>();
  if (!std::isfinite(d)) fail_field(src, path, "must be finite");
  return d;
}

double need_positive(const json& obj, const char* key, const std::string& src,
                     const std::string& path) {
  const double d = need_number(obj, key, src, path);
  if (!(d > 0.0)) fail_field(src, path, "must be positive");
  return d;
}

std::string need_string(const json& obj, const char* key, const std::string& src,
                        const std::string& path) {
  const json* v = find(obj, key);
  if (!v || !v->is_string()) fail_field(src, path, "expected a string");
  return v->get<std::string>();
}

}  // namespace

const char* quantity_name(Quantity q) {
  switch (q) {
    case Quantity::optical_spectrum: return "optical_spectrum";
    case Quantity::squeezing_spectrum: return "squeezing_spectrum";
    case Quantity::squeezing_angle: return "squeezing_angle";
    case Quantity::compensation_angle: return "compensation_angle";
    case Quantity::shg_flux: return "shg_flux";
    case Quantity::shg_quadrature: return "shg_quadrature";
    case Quantity::sh_incoherent: return "sh_incoherent";
    case Quantity::transfer_coeffs: return "transfer_coeffs";
  }
  return "unknown";
}

Quantity quantity_from_name(const std::string& name) {
  static const Quantity all[] = {
      Quantity::optical_spectrum, Quantity::squeezing_spectrum,
      Quantity::squeezing_angle,  Quantity::compensation_angle,
      Quantity::shg_flux,         Quantity::shg_quadrature,
      Quantity::sh_incoherent,    Quantity::transfer_coeffs,
  };
  for (Quantity q : all) {
    if (name == quantity_name(q)) return q;
  }
  throw ConfigError("unknown quantity \"" + name + "\"");
}

Scenario parse_scenario(const std::string& json_text, const std::string& source_name) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(syntax_context(json_text, source_name, e));
  }
  if (!j.is_object()) throw ConfigError(source_name + ": top level must be an object");
  reject_unknown(j, {"id", "crystal", "band_um", "nu_target", "grid_points",
                     "correlator", "outputs"},
                 source_name, "");

  Scenario s;
  s.id = need_string(j, "id", source_name, "id");
  if (s.id.empty()) fail_field(source_name, "id", "must not be empty");

  const json* crystal = find(j, "crystal");
  if (!crystal || !crystal->is_object()) {
    fail_field(source_name, "crystal", "expected an object");
  }
  reject_unknown(*crystal,
                 {"length_m", "pump_um", "pump_phase_rad", "kappa_per_m", "sellmeier"},
                 source_name, "crystal");
  s.length_m = need_positive(*crystal, "length_m", source_name, "crystal.length_m");
  s.pump_um = need_positive(*crystal, "pump_um", source_name, "crystal.pump_um");
  if (find(*crystal, "pump_phase_rad")) {
    s.pump_phase_rad =
        need_number(*crystal, "pump_phase_rad", source_name, "crystal.pump_phase_rad");
  }
  if (find(*crystal, "kappa_per_m")) {
    s.kappa_per_m =
        need_positive(*crystal, "kappa_per_m", source_name, "crystal.kappa_per_m");
  }

  if (const json* sell = find(*crystal, "sellmeier")) {
    if (!sell->is_object()) fail_field(source_name, "crystal.sellmeier", "expected an object");
    reject_unknown(*sell, {"label", "coefficients", "valid_range_um"}, source_name,
                   "crystal.sellmeier");
    s.sellmeier.label = need_string(*sell, "label", source_name, "crystal.sellmeier.label");
    const json* coef = find(*sell, "coefficients");
    if (!coef || !coef->is_array() || coef->size() != 6) {
      fail_field(source_name, "crystal.sellmeier.coefficients",
                 "expected an array of 6 numbers");
    }
    for (std::size_t i = 0; i < 6; ++i) {
      if (!(*coef)[i].is_number()) {
        fail_field(source_name, "crystal.sellmeier.coefficients",
                   "expected an array of 6 numbers");
      }
      s.sellmeier.coefficients[i] = (*coef)[i].get<double>();
    }
    const json* range = find(*sell, "valid_range_um");
    if (!range || !range->is_array() || range->size() != 2 ||
        !(*range)[0].is_number() || !(*range)[1].is_number()) {
      fail_field(source_name, "crystal.sellmeier.valid_range_um",
                 "expected an array of 2 numbers");
    }
    s.sellmeier.valid_min_um = (*range)[0].get<double>();
    s.sellmeier.valid_max_um = (*range)[1].get<double>();
    if (!(s.sellmeier.valid_min_um > 0.0) ||
        !(s.sellmeier.valid_max_um > s.sellmeier.valid_min_um)) {
      fail_field(source_name, "crystal.sellmeier.valid_range_um",
                 "expected 0 < min < max");
    }
  } else {
    s.sellmeier = dispersion::default_lithium_niobate_e();
  }

  const json* band = find(j, "band_um");
  if (!band || !band->is_array() || band->size() != 2 || !(*band)[0].is_number() ||
      !(*band)[1].is_number()) {
    fail_field(source_name, "band_um", "expected an array of 2 numbers");
  }
  s.band_lo_um = (*band)[0].get<double>();
  s.band_hi_um = (*band)[1].get<double>();
  if (!(s.band_lo_um > 0.0) || !(s.band_hi_um > s.band_lo_um)) {
    fail_field(source_name, "band_um", "expected 0 < lo < hi");
  }

  if (find(j, "nu_target")) {
    s.nu_target = need_positive(j, "nu_target", source_name, "nu_target");
  }
  if (s.nu_target.has_value() == s.kappa_per_m.has_value()) {
    fail_field(source_name, "nu_target",
               "exactly one of nu_target and crystal.kappa_per_m is required");
  }

  if (const json* gp = find(j, "grid_points")) {
    if (!gp->is_number_integer()) fail_field(source_name, "grid_points", "expected an integer");
    const long long n = gp->get<long long>();
    if (n < 1024 || (n & (n - 1)) != 0) {
      fail_field(source_name, "grid_points", "must be a power of two >= 1024");
    }
    s.grid_points = static_cast<int>(n);
  }

  if (const json* corr = find(j, "correlator")) {
    if (!corr->is_object()) fail_field(source_name, "correlator", "expected an object");
    reject_unknown(*corr, {"tau_min_s", "tau_max_s", "tau_points"}, source_name,
                   "correlator");
    s.correlator.tau_min_s = need_number(*corr, "tau_min_s", source_name,
                                         "correlator.tau_min_s");
    s.correlator.tau_max_s = need_number(*corr, "tau_max_s", source_name,
                                         "correlator.tau_max_s");
    if (!(s.correlator.tau_min_s < s.correlator.tau_max_s)) {
      fail_field(source_name, "correlator.tau_max_s", "must exceed tau_min_s");
    }
    const json* tp = find(*corr, "tau_points");
    if (!tp || !tp->is_number_integer() || tp->get<long long>() < 2) {
      fail_field(source_name, "correlator.tau_points", "expected an integer >= 2");
    }
    s.correlator.tau_points = static_cast<int>(tp->get<long long>());
  }

  if (const json* outs = find(j, "outputs")) {
    if (!outs->is_array()) fail_field(source_name, "outputs", "expected an array");
    for (std::size_t i = 0; i < outs->size(); ++i) {
      const json& o = (*outs)[i];
      const std::string path = "outputs[" + std::to_string(i) + "]";
      if (!o.is_object()) fail_field(source_name, path, "expected an object");
      reject_unknown(o, {"quantity", "path", "format"}, source_name, path);
      OutputRequest req;
      const std::string qname = need_string(o, "quantity", source_name, path + ".quantity");
      try {
        req.quantity = quantity_from_name(qname);
      } catch (const ConfigError&) {
        fail_field(source_name, path + ".quantity", "unknown quantity \"" + qname + "\"");
      }
      req.path = need_string(o, "path", source_name, path + ".path");
      if (req.path.empty()) fail_field(source_name, path + ".path", "must not be empty");
      if (find(o, "format")) {
        req.format = need_string(o, "format", source_name, path + ".format");
        if (req.format != "csv" && req.format != "json") {
          fail_field(source_name, path + ".format", "must be \"csv\" or \"json\"");
        }
      }
      s.outputs.push_back(std::move(req));
    }
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open scenario file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path.string());
}

std::string serialize_scenario(const Scenario& s) {
  ordered_json j;
  j["id"] = s.id;
  ordered_json crystal;
  crystal["length_m"] = s.length_m;
  crystal["pump_um"] = s.pump_um;
  crystal["pump_phase_rad"] = s.pump_phase_rad;
  if (s.kappa_per_m) crystal["kappa_per_m"] = *s.kappa_per_m;
  ordered_json sell;
  sell["label"] = s.sellmeier.label;
  sell["coefficients"] = s.sellmeier.coefficients;
  sell["valid_range_um"] = {s.sellmeier.valid_min_um, s.sellmeier.valid_max_um};
  crystal["sellmeier"] = std::move(sell);
  j["crystal"] = std::move(crystal);
  j["band_um"] = {s.band_lo_um, s.band_hi_um};
  if (s.nu_target) j["nu_target"] = *s.nu_target;
  j["grid_points"] = s.grid_points;
  ordered_json corr;
  corr["tau_min_s"] = s.correlator.tau_min_s;
  corr["tau_max_s"] = s.correlator.tau_max_s;
  corr["tau_points"] = s.correlator.tau_points;
  j["correlator"] = std::move(corr);
  ordered_json outs = ordered_json::array();
  for (const OutputRequest& o : s.outputs) {
    ordered_json e;
    e["quantity"] = quantity_name(o.quantity);
    e["path"] = o.path;
    e["format"] = o.format;
    outs.push_back(std::move(e));
  }
  j["outputs"] = std::move(outs);
  return j.dump(2) + "\n";
}

ResolvedScenario resolve(const Scenario& s, std::optional<int> grid_points_override) {
  ResolvedScenario rs;
  rs.scenario = s;
  if (grid_points_override) {
    const int n = *grid_points_override;
    if (n < 1024 || (n & (n - 1)) != 0) {
      throw ConfigError("grid_points override must be a power of two >= 1024");
    }
    rs.scenario.grid_points = n;
  }
  dispersion::GratingDesign d = dispersion::design_grating(
      s.sellmeier, s.pump_um, s.band_lo_um, s.band_hi_um, s.length_m);
  rs.crystal.length_L = s.length_m;
  rs.crystal.pump_wavelength = s.pump_um;
  rs.crystal.pump_phase_phi = s.pump_phase_rad;
  rs.crystal.sellmeier = s.sellmeier;
  rs.crystal.grating_K0 = d.K0;
  rs.crystal.chirp_zeta = d.zeta;
  rs.crystal.coupling_kappa_mag =
      s.kappa_per_m ? *s.kappa_per_m : std::sqrt(*s.nu_target * d.zeta);
  const double cap = dispersion::max_detuning(s.sellmeier, s.pump_um);
  rs.grid = dispersion::DetuningGrid::make_symmetric(
      rs.crystal.omega0(), cap, static_cast<std::size_t>(rs.scenario.grid_points));
  return rs;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

namespace {

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

Table spectra_table(const ResolvedScenario& rs, const pdc_core::SpectraResult& sp,
                    Quantity q) {
  Table t;
  const double w0 = rs.crystal.omega0();
  const std::size_t n = sp.grid.size();
  switch (q) {
    case Quantity::optical_spectrum:
    case Quantity::squeezing_spectrum: {
      t.columns = {"wavelength_um", "detuning_rad_s",
                   q == Quantity::optical_spectrum ? "flux" : "S2"};
      for (std::size_t j = 0; j < n; ++j) {
        const double Om = sp.grid.detunings[j];
        const double val =
            q == Quantity::optical_spectrum ? sp.S_optical[j] : sp.S_squeeze[j];
        t.rows.push_back({dispersion::lambda_um_from_omega(w0 + Om), Om, val});
      }
      return t;
    }
    case Quantity::squeezing_angle:
    case Quantity::compensation_angle: {
      t.columns = {"detuning_rad_s", "psi_rad", "theta0_rad"};
      for (std::size_t j = 0; j < n; ++j) {
        t.rows.push_back({sp.grid.detunings[j], sp.psi_unwrapped[j], sp.theta0[j]});
      }
      return t;
    }
    case Quantity::transfer_coeffs: {
      t.columns = {"detuning_rad_s", "re_A", "im_A", "re_B", "im_B",
                   "re_U",           "im_U", "re_V", "im_V", "r",
                   "psi_rad"};
      for (std::size_t j = 0; j < n; ++j) {
        const auto& c = sp.coeffs[j];
        t.rows.push_back({sp.grid.detunings[j], c.A.real(), c.A.imag(), c.B.real(),
                          c.B.imag(), c.U.real(), c.U.imag(), c.V.real(), c.V.imag(),
                          c.r, c.psi});
      }
      return t;
    }
    default:
      throw DomainError("not a grid-spectrum quantity");
  }
}

Table correlator_table(const shg::CorrelatorTrace& tr, Quantity q) {
  // Both normalized traces come from the same field sum, so the flux and
  // quadrature outputs share one layout.
  (void)q;
  Table t;
  t.columns = {"tau_s", "phi_norm", "x_norm"};
  for (std::size_t i = 0; i < tr.taus.size(); ++i) {
    t.rows.push_back({tr.taus[i], tr.Phi[i], tr.X[i]});
  }
  return t;
}

Table incoherent_table(const ResolvedScenario& rs, const pdc_core::SpectraResult& sp) {
  const double omega_p = 2.0 * sp.grid.omega0;
  const double cap = sp.grid.detunings.back();
  const std::size_t m = 2049;
  std::vector<double> omegas(m);
  for (std::size_t i = 0; i < m; ++i) {
    omegas[i] = omega_p - 2.1 * cap + 4.2 * cap * static_cast<double>(i) /
                                          static_cast<double>(m - 1);
  }
  std::vector<double> vals = shg::sh_incoherent_spectrum(sp, omegas);
  Table t;
  t.columns = {"wavelength_um", "omega_rad_s", "value"};
  for (std::size_t i = 0; i < m; ++i) {
    t.rows.push_back({dispersion::lambda_um_from_omega(omegas[i]), omegas[i], vals[i]});
  }
  (void)rs;
  return t;
}

std::vector<std::string> output_header(const ResolvedScenario& rs, Quantity q,
                                       const Table& t) {
  std::vector<std::string> h;
  h.push_back(std::string("cpdc ") + kVersion);
  h.push_back("scenario: " + rs.scenario.id);
  h.push_back(std::string("quantity: ") + quantity_name(q));
  h.push_back("pump_um: " + format_double(rs.scenario.pump_um) +
              "  length_m: " + format_double(rs.scenario.length_m) +
              "  pump_phase_rad: " + format_double(rs.scenario.pump_phase_rad));
  h.push_back("band_um: [" + format_double(rs.scenario.band_lo_um) + ", " +
              format_double(rs.scenario.band_hi_um) + "]");
  h.push_back("K0_per_m: " + format_double(rs.crystal.grating_K0) +
              "  zeta_per_m2: " + format_double(rs.crystal.chirp_zeta) +
              "  kappa_per_m: " + format_double(rs.crystal.coupling_kappa_mag) +
              "  nu: " + format_double(rs.crystal.nu()));
  h.push_back("grid_points: " + std::to_string(rs.scenario.grid_points));
  std::string cols = "columns: ";
  for (std::size_t i = 0; i < t.columns.size(); ++i) {
    if (i) cols += ',';
    cols += t.columns[i];
  }
  h.push_back(cols);
  return h;
}

void write_table(const std::filesystem::path& path, const std::string& format,
                 const ResolvedScenario& rs, Quantity q, const Table& t) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write output file " + path.string());
  if (format == "csv") {
    for (const std::string& line : output_header(rs, q, t)) out << "# " << line << '\n';
    for (const auto& row : t.rows) {
      for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) out << ',';
        out << format_double(row[i]);
      }
      out << '\n';
    }
  } else {
    ordered_json j;
    j["version"] = kVersion;
    j["scenario"] = rs.scenario.id;
    j["quantity"] = quantity_name(q);
    j["columns"] = t.columns;
    j["data"] = t.rows;
    out << j.dump(1) << '\n';
  }
  if (!out.good()) throw ConfigError("short write on " + path.string());
}

}  // namespace

RunResult run_scenario(const ResolvedScenario& rs, const std::filesystem::path& out_dir,
                       int threads, std::ostream& log) {
  RunResult res;
  const auto& cr = rs.crystal;
  log << "[cpdc] scenario " << rs.scenario.id << ": grid " << rs.grid.size()
      << " points, nu = " << format_double(cr.nu()) << "\n";
  pdc_core::SpectraResult sp = pdc_core::compute_spectra(cr, rs.grid, threads);

  RunSummary& sum = res.summary;
  sum.nu = cr.nu();
  sum.zeta = cr.chirp_zeta;
  sum.K0 = cr.grating_K0;
  sum.band_lo_um = rs.scenario.band_lo_um;
  sum.band_hi_um = rs.scenario.band_hi_um;
  sum.max_unitarity_residual = sp.max_unitarity_residual;
  sum.aliasing_warning = sp.psi_aliasing_warning;

  // Regime means over the classified grid points.
  double plateau_u = 0.0, plateau_s2 = 0.0, psi_lo = 0.0, psi_hi = 0.0;
  std::size_t n_plateau = 0, n_band = 0;
  for (std::size_t j = 0; j < rs.grid.size(); ++j) {
    const ScaledCoords sc = pdc_core::scaled_coords(cr, rs.grid.detunings[j]);
    if (pdc_core::in_plateau(sc)) {
      plateau_u += std::abs(sp.coeffs[j].U);
      plateau_s2 += sp.S_squeeze[j];
      ++n_plateau;
    }
    if (pdc_core::in_band(sc)) {
      const double p = sp.psi_unwrapped[j];
      if (n_band == 0) {
        psi_lo = psi_hi = p;
      } else {
        psi_lo = std::fmin(psi_lo, p);
        psi_hi = std::fmax(psi_hi, p);
      }
      ++n_band;
    }
  }
  if (n_plateau) {
    plateau_u /= static_cast<double>(n_plateau);
    plateau_s2 /= static_cast<double>(n_plateau);
    sum.plateau_U = plateau_u;
    sum.S2_plateau_dB = 10.0 * std::log10(plateau_s2);
  }
  if (n_band) sum.psi_span_rad = psi_hi - psi_lo;

  // Correlation time: first zero of Phi on an automatic tau scan sized by
  // the design band, clipped to the sampling limit of this grid.
  {
    const double w0 = cr.omega0();
    const double Om_a = dispersion::omega_from_lambda_um(rs.scenario.band_lo_um) - w0;
    const double Om_b = dispersion::omega_from_lambda_um(rs.scenario.band_hi_um) - w0;
    const double dOm = std::fabs(Om_a - Om_b);
    double T = dOm > 0.0 ? 10.0 * 2.0 * M_PI / dOm : 0.0;
    const double T_cap = (2.0 * M_PI / 8.0) / rs.grid.spacing() * 0.99;
    T = std::fmin(T, T_cap);
    if (T > 0.0) {
      std::vector<double> taus(2501);
      for (std::size_t i = 0; i < taus.size(); ++i) {
        taus[i] = T * static_cast<double>(i) / static_cast<double>(taus.size() - 1);
      }
      shg::CorrelatorTrace tr =
          shg::correlator_trace(sp, taus, cr.pump_phase_phi, threads);
      for (std::size_t i = 1; i + 1 < taus.size(); ++i) {
        if (tr.Phi[i] < 0.01 && tr.Phi[i] <= tr.Phi[i - 1] &&
            tr.Phi[i] <= tr.Phi[i + 1]) {
          sum.corr_time_s = taus[i];
          break;
        }
      }
    }
  }

  // Self-checks: residual bounded well below the hard UnitarityError level,
  // and the evenness the pipeline promises.
  double s1_max = 0.0;
  for (double v : sp.S_stretch) s1_max = std::fmax(s1_max, v);
  if (!(sp.max_unitarity_residual <= 1e-7 * std::fmax(1.0, s1_max))) {
    res.ok = false;
    res.messages.push_back("unitarity residual " +
                           format_double(sp.max_unitarity_residual) +
                           " above the 1e-7 self-check level");
  }
  for (std::size_t j = 0; j < rs.grid.size() / 2; j += 97) {
    const std::size_t m = rs.grid.paired_index(j);
    if (sp.coeffs[j].A != sp.coeffs[m].A ||
        sp.psi_unwrapped[j] != sp.psi_unwrapped[m]) {
      res.ok = false;
      res.messages.push_back("pair symmetry broken at grid index " + std::to_string(j));
      break;
    }
  }
  if (sp.psi_aliasing_warning) {
    res.messages.push_back(
        "warning: squeezing-angle steps approached the pi/2 unwrap limit; "
        "increase grid_points");
  }

  // Requested outputs. The correlator trace is shared across both traces.
  std::optional<shg::CorrelatorTrace> trace;
  auto ensure_trace = [&]() -> const shg::CorrelatorTrace& {
    if (!trace) {
      const CorrelatorRequest& c = rs.scenario.correlator;
      std::vector<double> taus(static_cast<std::size_t>(c.tau_points));
      for (std::size_t i = 0; i < taus.size(); ++i) {
        taus[i] = c.tau_min_s + (c.tau_max_s - c.tau_min_s) * static_cast<double>(i) /
                                    static_cast<double>(taus.size() - 1);
      }
      trace = shg::correlator_trace(sp, taus, cr.pump_phase_phi, threads);
    }
    return *trace;
  };

  for (const OutputRequest& req : rs.scenario.outputs) {
    Table t;
    switch (req.quantity) {
      case Quantity::shg_flux:
      case Quantity::shg_quadrature:
        t = correlator_table(ensure_trace(), req.quantity);
        break;
      case Quantity::sh_incoherent:
        t = incoherent_table(rs, sp);
        break;
      default:
        t = spectra_table(rs, sp, req.quantity);
        break;
    }
    std::filesystem::path p(req.path);
    if (p.is_relative()) p = out_dir / p;
    write_table(p, req.format, rs, req.quantity, t);
    res.files_written.push_back(p.string());
    log << "[cpdc]   wrote " << quantity_name(req.quantity) << " -> " << p.string()
        << "\n";
  }
  return res;
}

namespace {

dispersion::CrystalConfig validation_crystal(double nu) {
  dispersion::CrystalConfig c;
  c.length_L = 0.02;
  c.pump_wavelength = 0.42;
  c.sellmeier = dispersion::default_lithium_niobate_e();
  dispersion::GratingDesign d =
      dispersion::design_grating(c.sellmeier, 0.42, 0.46, 0.75, 0.02);
  c.grating_K0 = d.K0;
  c.chirp_zeta = d.zeta;
  c.coupling_kappa_mag = std::sqrt(nu * d.zeta);
  return c;
}

CheckResult check_unitarity() {
  CheckResult r{"unitarity", true, 0.0, ""};
  dispersion::CrystalConfig c = validation_crystal(0.146);
  const double cap = dispersion::max_detuning(c.sellmeier, c.pump_wavelength);
  for (int i = 0; i < 64; ++i) {
    const double Om = cap * (i + 0.5) / 64.0;
    pdc_core::ABPair ab = pdc_core::transfer_AB(pdc_core::scaled_coords(c, Om));
    const double res = std::fabs(std::norm(ab.A) - std::norm(ab.B) - 1.0) /
                       std::fmax(1.0, std::norm(ab.A) + std::norm(ab.B));
    r.residual = std::fmax(r.residual, res);
  }
  r.passed = r.residual <= 1e-8;
  r.detail = "max scaled residual over 64 detunings";
  return r;
}

CheckResult check_evenness() {
  CheckResult r{"evenness", true, 0.0, ""};
  dispersion::CrystalConfig c = validation_crystal(0.146);
  const double cap = dispersion::max_detuning(c.sellmeier, c.pump_wavelength);
  auto grid = dispersion::DetuningGrid::make_symmetric(c.omega0(), cap, 64);
  pdc_core::SpectraResult sp = pdc_core::compute_spectra(c, grid, 1);
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const std::size_t m = grid.paired_index(j);
    if (sp.coeffs[j].A != sp.coeffs[m].A || sp.theta0[j] != sp.theta0[m] ||
        sp.psi_unwrapped[j] != sp.psi_unwrapped[m]) {
      r.passed = false;
    }
    const double d = std::fabs(sp.S_optical[j] - sp.S_optical[m]) /
                     std::fmax(sp.S_optical[j], 1e-300);
    r.residual = std::fmax(r.residual, d);
  }
  r.passed = r.passed && r.residual <= 5e-15;
  r.detail = "pairwise A/theta0/psi bitwise, flux to 5e-15";
  return r;
}

CheckResult check_wronskian() {
  CheckResult r{"wronskian", true, 0.0, ""};
  for (double nu : {1e-4, 0.146, 1.0}) {
    for (double x : {-152.6, -61.0, 0.0, 61.0, 152.6}) {
      const double res = specfun::wronskian_check(nu, x) / std::exp(M_PI * nu / 2.0);
      r.residual = std::fmax(r.residual, res);
    }
  }
  r.passed = r.residual <= 1e-8;
  r.detail = "scaled Wronskian defect of the cylinder-function basis";
  return r;
}

CheckResult check_oracle_agreement() {
  CheckResult r{"oracle_agreement", true, 0.0, ""};
  for (double nu : {1e-4, 0.146, 1.0}) {
    dispersion::CrystalConfig c = validation_crystal(nu);
    const double w0 = c.omega0();
    const double Om_lo = dispersion::omega_from_lambda_um(0.75) - w0;
    const double Om_hi = dispersion::omega_from_lambda_um(0.46) - w0;
    for (int i = 0; i < 50; ++i) {
      const double Om = Om_lo + (Om_hi - Om_lo) * (i + 0.5) / 50.0;
      const ScaledCoords sc = pdc_core::scaled_coords(c, Om);
      pdc_core::ABPair ab = pdc_core::transfer_AB(sc);
      oracle::GreenPair g = oracle::integrate_green(sc, oracle::IntegrationSettings{});
      const double scale = std::fmax(1.0, std::abs(g.A_num));
      const double res = std::fmax(std::abs(ab.A - g.A_num), std::abs(ab.B - g.B_num)) / scale;
      r.residual = std::fmax(r.residual, res);
    }
  }
  r.passed = r.residual <= 1e-6;
  r.detail = "closed form vs adaptive integrator, 50 detunings x 3 gains";
  return r;
}

CheckResult check_low_gain() {
  CheckResult r{"low_gain_limit", true, 0.0, ""};
  dispersion::CrystalConfig c = validation_crystal(1e-4);
  const double w0 = c.omega0();
  const double Om_lo = dispersion::omega_from_lambda_um(0.75) - w0;
  const double Om_hi = dispersion::omega_from_lambda_um(0.46) - w0;
  for (int i = 0; i < 50; ++i) {
    const double Om = Om_lo + (Om_hi - Om_lo) * i / 49.0;
    const ScaledCoords sc = pdc_core::scaled_coords(c, Om);
    pdc_core::ABPair ab = pdc_core::transfer_AB(sc);
    const double ra = std::abs(ab.A - pdc_core::low_gain_A(sc)) /
                      std::abs(pdc_core::low_gain_A(sc));
    const double rb = std::abs(ab.B - pdc_core::low_gain_B(sc)) / std::abs(ab.B);
    r.residual = std::fmax(r.residual, std::fmax(ra, rb));
  }
  r.passed = r.residual <= 1e-3;
  r.detail = "first-order closed forms at nu = 1e-4 across the band";
  return r;
}

CheckResult check_plateau() {
  CheckResult r{"plateau", true, 0.0, ""};
  const double nu = 0.146;
  ScaledCoords sc;
  sc.x0 = -76.3;
  sc.xL = 76.3;
  sc.nu = nu;
  sc.sigma = std::sqrt(nu);
  pdc_core::ABPair ab = pdc_core::transfer_AB(sc);
  r.residual = std::fabs(std::abs(ab.A) - std::exp(M_PI * nu)) / std::exp(M_PI * nu);
  r.passed = r.residual <= 0.01;
  r.detail = "|A| against e^{pi nu} at the band centre";
  return r;
}

CheckResult check_reciprocal_fd() {
  CheckResult r{"reciprocal_derivative", true, 0.0, ""};
  // The reciprocal partners satisfy sigma * phi~ = phi' + i (x/2) phi.
  // Verify with a five-point finite-difference derivative.
  const double nu = 0.146;
  const double sigma = std::sqrt(nu);
  const double h = 1e-3;
  for (int which : {1, 2}) {
    for (double x : {-8.0, -1.3, 0.0, 2.4, 9.0}) {
      auto f = [&](double t) { return specfun::pcf_basis(which, t, nu).value; };
      const Complex der =
          (8.0 * (f(x + h) - f(x - h)) - (f(x + 2 * h) - f(x - 2 * h))) / (12.0 * h);
      const Complex lhs =
          sigma * (which == 1
                       ? specfun::pcf_d_reciprocal(specfun::PcfOrderTag::d_i_nu, x, nu).value
                       : specfun::pcf_d_reciprocal(
                             specfun::PcfOrderTag::d_minus1_minus_i_nu, x, nu).value);
      const Complex rhs = der + Complex{0.0, x / 2.0} * f(x);
      const double res = std::abs(lhs - rhs) / std::fmax(1.0, std::abs(lhs));
      r.residual = std::fmax(r.residual, res);
    }
  }
  r.passed = r.residual <= 1e-6;
  r.detail = "five-point FD check of the derivative relation";
  return r;
}

}  // namespace

std::vector<CheckResult> validate_fast() {
  return {check_unitarity(), check_evenness(), check_wronskian()};
}

std::vector<CheckResult> validate_full() {
  std::vector<CheckResult> out = validate_fast();
  out.push_back(check_oracle_agreement());
  out.push_back(check_low_gain());
  out.push_back(check_plateau());
  out.push_back(check_reciprocal_fd());
  return out;
}

std::string check_report_json(const std::vector<CheckResult>& checks) {
  ordered_json j;
  j["version"] = kVersion;
  bool all = true;
  ordered_json arr = ordered_json::array();
  for (const CheckResult& c : checks) {
    ordered_json e;
    e["name"] = c.name;
    e["passed"] = c.passed;
    e["residual"] = c.residual;
    e["detail"] = c.detail;
    arr.push_back(std::move(e));
    all = all && c.passed;
  }
  j["checks"] = std::move(arr);
  j["all_passed"] = all;
  return j.dump(1) + "\n";
}

}  // namespace cpdc::scenario
