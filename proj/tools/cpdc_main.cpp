// cpdc: exact spectra and correlators for down-conversion in a chirped
// quasi-phase-matched crystal. Thin argument layer over cpdc::scenario.
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"

#include "cpdc/scenario.hpp"

namespace fs = std::filesystem;
using namespace cpdc;

namespace {

fs::path scenario_dir() {
  if (const char* env = std::getenv("CPDC_SCENARIO_DIR")) return fs::path(env);
  return fs::path("scenarios");
}

fs::path resolve_config_arg(const std::string& arg) {
  fs::path direct(arg);
  if (fs::exists(direct) && fs::is_regular_file(direct)) return direct;
  fs::path named = scenario_dir() / (arg + ".json");
  if (fs::exists(named)) return named;
  throw ConfigError("no scenario file \"" + arg + "\" (also tried " + named.string() +
                    ")");
}

int effective_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

void print_row(const char* name, const std::string& value) {
  std::printf("  %-24s %s\n", name, value.c_str());
}

void print_summary(const scenario::RunResult& res) {
  const scenario::RunSummary& s = res.summary;
  std::printf("run summary\n");
  print_row("nu", scenario::format_double(s.nu));
  print_row("zeta_per_m2", scenario::format_double(s.zeta));
  print_row("K0_per_m", scenario::format_double(s.K0));
  print_row("band_um", "[" + scenario::format_double(s.band_lo_um) + ", " +
                           scenario::format_double(s.band_hi_um) + "]");
  print_row("plateau_mean_abs_U", scenario::format_double(s.plateau_U));
  print_row("plateau_S2_dB", scenario::format_double(s.S2_plateau_dB));
  print_row("psi_span_rad", scenario::format_double(s.psi_span_rad));
  print_row("corr_time_s", scenario::format_double(s.corr_time_s));
  print_row("max_unitarity_resid", scenario::format_double(s.max_unitarity_residual));
  print_row("aliasing_warning", s.aliasing_warning ? "yes" : "no");
  for (const std::string& m : res.messages) std::printf("  ! %s\n", m.c_str());
  for (const std::string& f : res.files_written) std::printf("  -> %s\n", f.c_str());
}

int run_command(const std::string& config_arg, const std::string& out_dir,
                std::optional<int> grid_points, int threads) {
  const fs::path path = resolve_config_arg(config_arg);
  scenario::Scenario sc = scenario::load_scenario(path);
  scenario::ResolvedScenario rs = scenario::resolve(sc, grid_points);
  scenario::RunResult res =
      scenario::run_scenario(rs, fs::path(out_dir), effective_threads(threads),
                             std::cerr);
  print_summary(res);
  if (!res.ok) {
    std::fprintf(stderr, "cpdc: self-checks FAILED\n");
    return 1;
  }
  return 0;
}

int validate_command(const std::string& level, const std::string& report_path) {
  std::vector<scenario::CheckResult> checks =
      level == "full" ? scenario::validate_full() : scenario::validate_fast();
  bool all = true;
  for (const auto& c : checks) {
    std::printf("  %-22s %-4s residual %-12s %s\n", c.name.c_str(),
                c.passed ? "ok" : "FAIL", scenario::format_double(c.residual).c_str(),
                c.detail.c_str());
    all = all && c.passed;
  }
  if (!report_path.empty()) {
    std::ofstream out(report_path, std::ios::binary);
    if (!out) throw ConfigError("cannot write report file " + report_path);
    out << scenario::check_report_json(checks);
  }
  std::printf("validate (%s): %s\n", level.c_str(), all ? "all passed" : "FAILURES");
  return all ? 0 : 1;
}

int scenarios_command(const std::string& action) {
  if (action != "list") throw ConfigError("unknown scenarios action \"" + action + "\"");
  const fs::path dir = scenario_dir();
  if (!fs::exists(dir)) {
    std::fprintf(stderr, "cpdc: scenario directory %s not found\n",
                 dir.string().c_str());
    return 1;
  }
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const fs::path& f : files) {
    try {
      scenario::Scenario sc = scenario::load_scenario(f);
      std::printf("  %-20s nu_target=%-12s band=[%s, %s] um  %s\n", sc.id.c_str(),
                  sc.nu_target ? scenario::format_double(*sc.nu_target).c_str() : "-",
                  scenario::format_double(sc.band_lo_um).c_str(),
                  scenario::format_double(sc.band_hi_um).c_str(),
                  f.filename().string().c_str());
    } catch (const ConfigError& e) {
      std::printf("  %-20s INVALID: %s\n", f.filename().string().c_str(), e.what());
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"exact down-conversion spectra for linearly chirped gratings"};
  app.require_subcommand(1);

  std::string config_arg;
  std::string out_dir = ".";
  int grid_points = 0;
  int threads = 0;
  CLI::App* run = app.add_subcommand("run", "run a scenario and write its outputs");
  run->add_option("config", config_arg,
                  "scenario file, or a name resolved in CPDC_SCENARIO_DIR")
      ->required();
  run->add_option("--out-dir", out_dir, "directory for relative output paths");
  run->add_option("--grid-points", grid_points,
                  "override the grid size (power of two >= 1024)");
  run->add_option("--threads", threads, "worker threads (0 = hardware)");

  std::string level = "fast";
  std::string report_path;
  CLI::App* validate = app.add_subcommand("validate", "run the numerical self-checks");
  validate->add_option("--level", level, "fast or full")
      ->check(CLI::IsMember({"fast", "full"}));
  validate->add_option("--report", report_path, "write a JSON report here");

  std::string action = "list";
  CLI::App* scen = app.add_subcommand("scenarios", "inspect the scenario directory");
  scen->add_option("action", action, "list");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      return run_command(config_arg, out_dir,
                         grid_points > 0 ? std::optional<int>(grid_points)
                                         : std::nullopt,
                         threads);
    }
    if (validate->parsed()) return validate_command(level, report_path);
    if (scen->parsed()) return scenarios_command(action);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "cpdc: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "cpdc: error: %s\n", e.what());
    return 3;
  }
  return 0;
}
