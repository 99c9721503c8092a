#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

#include "cpdc/scenario.hpp"

namespace fs = std::filesystem;
using namespace cpdc;
using scenario::Scenario;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(bool(in));
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int run_cmd(const std::string& cmd) {
  const int rc = std::system(cmd.c_str());
  if (rc == -1) return -1;
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -2;
}

const char* cpdc_bin() {
  const char* bin = std::getenv("CPDC_BIN");
  REQUIRE(bin != nullptr);
  return bin;
}

fs::path fresh_workdir(const char* leaf) {
  fs::path dir = fs::temp_directory_path() / leaf;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Scenario small_scenario() {
  Scenario s;
  s.id = "t1";
  s.length_m = 0.02;
  s.pump_um = 0.42;
  s.nu_target = 0.146;
  s.sellmeier = dispersion::default_lithium_niobate_e();
  s.band_lo_um = 0.46;
  s.band_hi_um = 0.75;
  s.grid_points = 1024;
  s.correlator = {-8e-15, 8e-15, 101};
  s.outputs = {{scenario::Quantity::optical_spectrum, "t1/opt.csv", "csv"},
               {scenario::Quantity::transfer_coeffs, "t1/tc.json", "json"},
               {scenario::Quantity::shg_flux, "t1/corr.csv", "csv"}};
  return s;
}

}  // namespace

TEST_CASE("serialize / parse round trip is the identity") {
  const char* dir = std::getenv("CPDC_SCENARIO_DIR");
  REQUIRE(dir != nullptr);
  for (const char* name : {"fig1_3_highgain", "fig4_highchirp", "fig4_lowchirp",
                           "lowgain_smallnu"}) {
    Scenario a = scenario::load_scenario(fs::path(dir) / (std::string(name) + ".json"));
    const std::string text = scenario::serialize_scenario(a);
    Scenario b = scenario::parse_scenario(text, "round-trip");
    CHECK(scenario::serialize_scenario(b) == text);
    CHECK(b.id == a.id);
    CHECK(b.length_m == a.length_m);
    CHECK(b.nu_target == a.nu_target);
    CHECK(b.kappa_per_m == a.kappa_per_m);
    CHECK(b.band_lo_um == a.band_lo_um);
    CHECK(b.band_hi_um == a.band_hi_um);
    CHECK(b.grid_points == a.grid_points);
    CHECK(b.outputs.size() == a.outputs.size());
    CHECK(b.sellmeier.coefficients == a.sellmeier.coefficients);
  }
}

TEST_CASE("syntax errors carry line, column, and caret context") {
  const std::string bad = "{\n  \"id\": \"x\",\n  \"crystal\": }\n}\n";
  try {
    scenario::parse_scenario(bad, "bad.json");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("bad.json:3:") != std::string::npos);
    CHECK(msg.find("\"crystal\": }") != std::string::npos);
    CHECK(msg.find('^') != std::string::npos);
  }
}

TEST_CASE("semantic errors name the offending field") {
  auto expect_error = [](const std::string& text, const std::string& needle) {
    try {
      scenario::parse_scenario(text, "cfg");
      FAIL("expected ConfigError for ", needle);
    } catch (const ConfigError& e) {
      const std::string msg = e.what();
      INFO(msg);
      CHECK(msg.find(needle) != std::string::npos);
    }
  };
  const std::string base =
      R"({"id":"x","crystal":{"length_m":0.02,"pump_um":0.42},)"
      R"("band_um":[0.46,0.75],"nu_target":0.146,"grid_points":2048})";
  expect_error(R"({"id":"x"})", "crystal");
  expect_error(R"({"id":"x","crystal":{"length_m":-1,"pump_um":0.42},)"
               R"("band_um":[0.46,0.75],"nu_target":0.1})",
               "crystal.length_m");
  expect_error(R"({"id":"x","crystal":{"length_m":0.02,"pump_um":0.42},)"
               R"("band_um":[0.75,0.46],"nu_target":0.1})",
               "band_um");
  expect_error(R"({"id":"x","crystal":{"length_m":0.02,"pump_um":0.42},)"
               R"("band_um":[0.46,0.75]})",
               "nu_target");
  expect_error(R"({"id":"x","crystal":{"length_m":0.02,"pump_um":0.42,)"
               R"("kappa_per_m":2900},"band_um":[0.46,0.75],"nu_target":0.1})",
               "nu_target");
  expect_error(R"({"id":"x","crystal":{"length_m":0.02,"pump_um":0.42},)"
               R"("band_um":[0.46,0.75],"nu_target":0.1,"grid_points":1000})",
               "grid_points");
  expect_error(R"({"id":"x","crystal":{"length_m":0.02,"pump_um":0.42},)"
               R"("band_um":[0.46,0.75],"nu_target":0.1,"grid_pts":2048})",
               "grid_pts");
  expect_error(R"({"id":"x","crystal":{"length_m":0.02,"pump_um":0.42},)"
               R"("band_um":[0.46,0.75],"nu_target":0.1,)"
               R"("outputs":[{"quantity":"flux_spectrum","path":"a.csv"}]})",
               "outputs[0].quantity");
  // The baseline itself parses.
  CHECK(scenario::parse_scenario(base, "cfg").grid_points == 2048);
}

TEST_CASE("resolve reproduces the designed grating constants") {
  Scenario s = small_scenario();
  s.grid_points = 16384;
  scenario::ResolvedScenario rs = scenario::resolve(s);
  CHECK(rs.crystal.grating_K0 ==
        doctest::Approx(2018239.5009084418).epsilon(1e-11));
  CHECK(rs.crystal.chirp_zeta ==
        doctest::Approx(58253765.387302265).epsilon(1e-11));
  CHECK(rs.crystal.coupling_kappa_mag ==
        doctest::Approx(std::sqrt(0.146 * 58253765.387302265)).epsilon(1e-11));
  CHECK(rs.grid.size() == 16384);
  CHECK(rs.crystal.nu() == doctest::Approx(0.146).epsilon(1e-12));

  // Grid override replaces the file's value and keeps the validation rules.
  scenario::ResolvedScenario rs2 = scenario::resolve(s, 4096);
  CHECK(rs2.grid.size() == 4096);
  CHECK_THROWS_AS(scenario::resolve(s, 1500), ConfigError);

  // kappa given directly bypasses the nu_target product.
  Scenario sk = small_scenario();
  sk.nu_target.reset();
  sk.kappa_per_m = 2916.0;
  CHECK(scenario::resolve(sk).crystal.coupling_kappa_mag == 2916.0);
}

TEST_CASE("run_scenario output is deterministic across thread counts") {
  const fs::path work = fresh_workdir("cpdc_cli_inproc");
  Scenario s = small_scenario();
  scenario::ResolvedScenario rs = scenario::resolve(s);
  std::ostringstream log1, log4;
  scenario::RunResult r1 = scenario::run_scenario(rs, work / "a", 1, log1);
  scenario::RunResult r4 = scenario::run_scenario(rs, work / "b", 4, log4);
  CHECK(r1.ok);
  CHECK(r4.ok);
  REQUIRE(r1.files_written.size() == 3);
  REQUIRE(r4.files_written.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    const std::string a = slurp(r1.files_written[i]);
    const std::string b = slurp(r4.files_written[i]);
    CHECK(a == b);
    CHECK(!a.empty());
  }
  CHECK(slurp(r1.files_written[0]).rfind("# cpdc 1.0.0", 0) == 0);
  CHECK(r1.summary.corr_time_s > 0.0);
  CHECK(r1.summary.max_unitarity_residual < 1e-10);
  CHECK(r1.summary.plateau_U == doctest::Approx(std::exp(M_PI * 0.146)).epsilon(2e-3));

  // JSON output parses and matches the declared column count.
  nlohmann::json tc = nlohmann::json::parse(slurp(r1.files_written[1]));
  CHECK(tc["version"] == "1.0.0");
  CHECK(tc["columns"].size() == 11);
  CHECK(tc["data"].size() == 1024);
}

TEST_CASE("material model errors move design constants, not internal checks") {
  Scenario good = small_scenario();
  Scenario off = good;
  off.sellmeier.coefficients[0] += 0.03;  // plausible but wrong material data
  off.sellmeier.label = "perturbed";
  // Hold kappa fixed so the gain responds to the design, as it would in the lab.
  good.nu_target.reset();
  good.kappa_per_m = 2916.0;
  off.nu_target.reset();
  off.kappa_per_m = 2916.0;

  scenario::ResolvedScenario rg = scenario::resolve(good);
  scenario::ResolvedScenario ro = scenario::resolve(off);

  // Internal consistency cannot see the difference...
  for (const auto& rs : {std::ref(rg), std::ref(ro)}) {
    auto sp = pdc_core::compute_spectra(rs.get().crystal, rs.get().grid, 1);
    CHECK(sp.max_unitarity_residual < 1e-10);
    const std::size_t n = rs.get().grid.size();
    for (std::size_t j = 0; j < n / 2; j += 37) {
      CHECK(sp.coeffs[j].A == sp.coeffs[n - 1 - j].A);
    }
  }
  // ...but the physical design drifts far beyond numerical noise.
  CHECK(std::fabs(ro.crystal.grating_K0 - rg.crystal.grating_K0) >
        1e-4 * rg.crystal.grating_K0);
  CHECK(std::fabs(ro.crystal.chirp_zeta - rg.crystal.chirp_zeta) >
        1e-4 * rg.crystal.chirp_zeta);
  CHECK(std::fabs(ro.crystal.nu() - rg.crystal.nu()) > 1e-3 * rg.crystal.nu());
}

TEST_CASE("cpdc binary: list, validate, run, and failure exit codes") {
  const std::string bin = cpdc_bin();
  const fs::path work = fresh_workdir("cpdc_cli_bin");
  const fs::path out = work / "stdout.txt";

  SUBCASE("scenarios list names every shipped file") {
    const int rc = run_cmd(bin + " scenarios list > " + out.string() + " 2>&1");
    CHECK(rc == 0);
    const std::string text = slurp(out);
    for (const char* id : {"fig1_3_highgain", "fig4_highchirp", "fig4_lowchirp",
                           "lowgain_smallnu"}) {
      CHECK(text.find(id) != std::string::npos);
    }
  }

  SUBCASE("fast validation passes and writes a report") {
    const fs::path report = work / "report.json";
    const int rc = run_cmd(bin + " validate --level fast --report " + report.string() +
                           " > " + out.string() + " 2>&1");
    CHECK(rc == 0);
    nlohmann::json j = nlohmann::json::parse(slurp(report));
    CHECK(j["all_passed"] == true);
    CHECK(j["checks"].size() == 3);
  }

  SUBCASE("run produces byte-identical files for any thread count") {
    const fs::path cfg = work / "t1.json";
    std::ofstream(cfg) << scenario::serialize_scenario(small_scenario());
    const std::string base = bin + " run " + cfg.string();
    CHECK(run_cmd(base + " --out-dir " + (work / "r1").string() + " --threads 1 > " +
                  out.string() + " 2>&1") == 0);
    CHECK(run_cmd(base + " --out-dir " + (work / "r3").string() + " --threads 3 > " +
                  out.string() + " 2>&1") == 0);
    for (const char* leaf : {"t1/opt.csv", "t1/tc.json", "t1/corr.csv"}) {
      CHECK(slurp(work / "r1" / leaf) == slurp(work / "r3" / leaf));
    }
    const std::string text = slurp(out);
    CHECK(text.find("run summary") != std::string::npos);
    CHECK(text.find("corr_time_s") != std::string::npos);
  }

  SUBCASE("a named scenario resolves through CPDC_SCENARIO_DIR") {
    const int rc = run_cmd(bin + " run lowgain_smallnu --grid-points 1024 --out-dir " +
                           (work / "named").string() + " > " + out.string() + " 2>&1");
    CHECK(rc == 0);
    CHECK(fs::exists(work / "named" / "lowgain_smallnu" / "optical_spectrum.csv"));
  }

  SUBCASE("missing and malformed configs exit with code 2") {
    CHECK(run_cmd(bin + " run no_such_scenario > " + out.string() + " 2>&1") == 2);
    const fs::path broken = work / "broken.json";
    std::ofstream(broken) << "{ \"id\": \"x\", }";
    CHECK(run_cmd(bin + " run " + broken.string() + " > " + out.string() + " 2>&1") ==
          2);
    const std::string text = slurp(out);
    CHECK(text.find("broken.json:1:") != std::string::npos);
  }
}
