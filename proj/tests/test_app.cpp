#include <doctest.h>

#include "fsilab/app.hpp"
#include "fsilab/verify.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>

using namespace fsilab;

namespace {

const char* kSmall = R"(
[geometry]
nx = 5
ny = 5
nz = 4

[physics]
nu = 1
mu = 0.3

[numerics]
dt = 0.01
t_end = 0.1
)";

std::string out_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "fsilab_test_app" / name;
  std::filesystem::remove_all(dir);
  return dir.string();
}

int line_count(const std::string& path) {
  std::ifstream f(path);
  int n = 0;
  for (std::string line; std::getline(f, line);) ++n;
  return n;
}

}  // namespace

TEST_CASE("rest state stays at rest") {
  const RunConfig cfg = parse_config(kSmall);
  const std::string dir = out_dir("zero");
  const CommandResult r = cmd_simulate(cfg, dir);
  CHECK(r.exit_code == kExitOk);
  CHECK(line_count(dir + "/diagnostics.csv") == 12);
  CHECK(std::filesystem::exists(dir + "/summary.json"));
  CHECK(std::filesystem::exists(dir + "/final_state.snap"));
  CHECK(r.report["steps_completed"] == 10);
  CHECK(r.report["E_final"].get<double>() == 0.0);
  CHECK(r.report["schema_version"] == 1);
  CHECK(r.report["kind"] == "simulate");

  const SimulationResult sim = simulate(cfg);
  REQUIRE(sim.rows.size() == 11);
  for (const CsvRow& row : sim.rows) {
    CHECK(row.E_total == 0.0);
    CHECK(row.dissipation_cum == 0.0);
    CHECK(row.mean_w == 0.0);
  }
}

TEST_CASE("free decay reports a positive rate") {
  const RunConfig cfg = parse_config(std::string(kSmall) + "[initial]\nw0 = bump 0.001\n");
  const SimulationResult sim = simulate(cfg);
  REQUIRE(sim.error.empty());
  CHECK(sim.audits_passed);
  CHECK(sim.summary["decay"]["rate"].get<double>() > 0.0);
  CHECK(sim.summary["E_final"].get<double>() < sim.summary["E0"].get<double>());
  CHECK(std::isfinite(sim.rows.back().Lambda));
}

TEST_CASE("stride thins the rows") {
  const RunConfig cfg = parse_config(std::string(kSmall) + "[diagnostics]\nsnapshot_stride = 5\n");
  CHECK(simulate(cfg).rows.size() == 3);
}

TEST_CASE("exit codes") {
  const RunConfig cfg = parse_config(kSmall);
  CHECK(cmd_verify(cfg, "nonsense", out_dir("bad_suite")).exit_code == kExitConfigError);
  CHECK(cmd_probe(cfg, "nonsense", out_dir("bad_probe")).exit_code == kExitConfigError);
  CHECK(cmd_probe(cfg, "dissipativity", out_dir("zero_probe")).exit_code == kExitConfigError);

  const RunConfig stiff = parse_config(std::string(kSmall) +
                                       "max_subiterations = 1\ntol_couple = 1e-15\n[initial]\nw0 = wave 0.5\n");
  const CommandResult r = cmd_simulate(stiff, out_dir("solver"));
  CHECK(r.exit_code == kExitSolverFailure);
  CHECK_FALSE(r.report["error"].get<std::string>().empty());
}

TEST_CASE("stationary probe without forcing is the rest state") {
  const RunConfig cfg = parse_config(kSmall);
  const std::string dir = out_dir("stationary");
  const CommandResult r = cmd_probe(cfg, "stationary", dir);
  CHECK(r.exit_code == kExitOk);
  CHECK(r.report["max_abs_w"].get<double>() == 0.0);
  CHECK(r.report["energy"].get<double>() == 0.0);
  CHECK(std::filesystem::exists(dir + "/probe_stationary.json"));
  CHECK(std::filesystem::exists(dir + "/stationary_state.snap"));
}

TEST_CASE("separation of identical states is zero") {
  const RunConfig cfg =
      parse_config(std::string(kSmall) + "[initial]\nw0 = bump 0.001\n[probe]\namplitudes = 1 1\n");
  const CommandResult r = cmd_probe(cfg, "separation", out_dir("separation"));
  CHECK(r.report["initial_distance"].get<double>() == 0.0);
  CHECK(r.report["final_distance"].get<double>() == 0.0);
}

TEST_CASE("output directory precedence") {
  RunConfig cfg = parse_config(kSmall);
  cfg.output_dir = "from_config";
  ::unsetenv("FSILAB_OUTPUT_DIR");
  CHECK(resolve_output_dir("", cfg) == "from_config");
  ::setenv("FSILAB_OUTPUT_DIR", "from_env", 1);
  CHECK(resolve_output_dir("", cfg) == "from_env");
  CHECK(resolve_output_dir("from_flag", cfg) == "from_flag");
  ::unsetenv("FSILAB_OUTPUT_DIR");
}

TEST_CASE("trend fit recovers a power law") {
  const std::vector<double> dt{0.04, 0.02, 0.01};
  const TrendFit f = trend_fit(dt, {3.0 * 0.04, 3.0 * 0.02, 3.0 * 0.01});
  CHECK(f.order == doctest::Approx(1.0));
  CHECK(f.max_excess == doctest::Approx(1.0));
  const TrendFit g = trend_fit(dt, {0.0016, 0.0004, 0.0001});
  CHECK(g.order == doctest::Approx(2.0));
}

TEST_CASE("suite registry") {
  const auto& names = suite_names();
  CHECK(names == std::vector<std::string>{"stokes", "plate", "energy", "ball"});
  CHECK_THROWS_AS(run_suite(parse_config(kSmall), "nonsense"), std::invalid_argument);
}

TEST_CASE("plate study on a small grid") {
  const PlateStudy s = plate_study(BoxGeometry{1.0, 1.0, 1.0, 6, 6, 4}, 0.3, 5, 10, 200);
  CHECK(s.directions == 10);
  CHECK(s.min_order >= thresholds::kGradientOrderLow);
  CHECK(s.max_order <= thresholds::kGradientOrderHigh);
  CHECK(s.nonpositive == 0);
  CHECK(s.K_symmetry <= thresholds::kSymmetry);
}
