#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "smmimo/config.hpp"
#include "smmimo/csv.hpp"

using namespace smmimo;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(SMMIMO_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("defaults match the reference operating point") {
  const ExperimentConfig c;
  CHECK(c.m == 512);
  CHECK(c.n == 2);
  CHECK(c.k == 10);
  CHECK(c.t == 1000);
  CHECK(c.omega == 3);
  CHECK(c.snr_db == 10.0);
  CHECK(c.d_m_mm == 100.0);
  CHECK(c.lambda_mm == 60.0);
  CHECK(c.r_c == 500.0);
  CHECK(c.r_min == doctest::Approx(0.1 * c.r_c));
  CHECK(c.alpha == 3.7);
  CHECK(c.snr_linear() == doctest::Approx(10.0));
  CHECK(c.system_params(Combiner::ZF).pilot_symbols() == 60);
}

TEST_CASE("set/get, sections, unknown keys") {
  ExperimentConfig c;
  c.set("system.m", "256");
  CHECK(c.m == 256);
  CHECK(c.get("system.m") == "256");
  CHECK_THROWS_AS(c.set("system.bogus", "1"), ConfigError);
  CHECK_THROWS_AS(c.set("system.m", "abc"), ConfigError);
  CHECK_THROWS_AS(c.set("system.combiner", "mmse"), ConfigError);
  CHECK_THROWS_AS(c.set("geometry.placement", "grid"), ConfigError);

  const ExperimentConfig parsed = ExperimentConfig::parse(
      "# comment\n[system]\nm = 128\nn=4\n\n[run]\nseed = 99\n");
  CHECK(parsed.m == 128);
  CHECK(parsed.n == 4);
  CHECK(parsed.seed == 99);
}

TEST_CASE("serialization round-trips to an identical config") {
  ExperimentConfig c;
  c.set("system.m", "384");
  c.set("sweep.jobs", "M:64,128;K:5,10");
  c.set("sweep.omegas", "1,3");
  c.set("run.out_dir", "/tmp/somewhere");
  const ExperimentConfig back = ExperimentConfig::parse(c.serialize());
  CHECK(back.entries() == c.entries());
}

TEST_CASE("value-list grammar") {
  CHECK(parse_value_list("1,2,5") == std::vector<double>{1, 2, 5});
  CHECK(parse_value_list("64..1024") == std::vector<double>{64, 128, 256, 512, 1024});
  CHECK(parse_value_list("10..50:20") == std::vector<double>{10, 30, 50});
  CHECK(parse_value_list("16..256:x4") == std::vector<double>{16, 64, 256});
  CHECK(parse_value_list("8, 32..64") == std::vector<double>{8, 32, 64});
  CHECK_THROWS_AS(parse_value_list(""), ConfigError);
  CHECK_THROWS_AS(parse_value_list("5..1"), ConfigError);
  CHECK_THROWS_AS(parse_value_list("1..8:x0.5"), ConfigError);
}

TEST_CASE("presets resolve to the documented grids") {
  const Preset fig4 = preset("fig4");
  CHECK(fig4.command == "tightness");
  CHECK(fig4.config.placement == "fixed-ring");
  CHECK(fig4.config.ring_radius == 275.0);
  CHECK(fig4.config.tightness_m_values() == std::vector<int>{128, 256, 512});

  const Preset fig8 = preset("fig8");
  CHECK(fig8.command == "sweep");
  CHECK(fig8.config.d_m_mm == 1000.0);
  CHECK(fig8.config.omega_list() == std::vector<int>{1, 3});
  REQUIRE(fig8.config.sweep_jobs().size() == 1);
  CHECK(fig8.config.sweep_jobs()[0].axis == "K");

  const Preset fig9 = preset("fig9");
  REQUIRE(fig9.config.sweep_jobs().size() == 2);
  CHECK(fig9.config.sweep_jobs()[0].axis == "T");
  CHECK(fig9.config.sweep_jobs()[1].axis == "D_m");
  CHECK(fig9.config.d_m_mm == 100.0);  // frame-length panel keeps the default device

  for (const std::string& id : preset_ids()) CHECK_NOTHROW(preset(id));
  CHECK_THROWS_AS(preset("fig99"), ConfigError);
}

TEST_CASE("CSV writer: digits and quoting") {
  std::ostringstream out;
  CsvWriter csv(out, {"a", "b,c", "d"});
  csv.field(1.0 / 3.0).field("plain").field("say \"hi\", ok");
  csv.end_row();
  csv.field(123456789012345.0).field(-0.000125).field(true);
  csv.end_row();
  const std::string text = out.str();
  CHECK(text == "a,\"b,c\",d\n"
                "0.333333333333,plain,\"say \"\"hi\"\", ok\"\n"
                "1.23456789012e+15,-0.000125,true\n");
}

TEST_CASE("binary: spacing search runs end to end") {
  const fs::path dir = fs::temp_directory_path() / "smmimo_cli_spacing";
  fs::remove_all(dir);
  const int rc = run_cli("optimize-spacing --out " + dir.string());
  CHECK(rc == 0);
  CHECK(fs::exists(dir / "optimize_spacing.csv"));
  CHECK(fs::exists(dir / "optimize-spacing_manifest.json"));
  const std::string csv = slurp(dir / "optimize_spacing.csv");
  CHECK(csv.find("ds_star_mm") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("binary: exit codes distinguish config, infeasibility, numerics") {
  const fs::path dir = fs::temp_directory_path() / "smmimo_cli_codes";
  fs::remove_all(dir);
  // Unknown key -> config error.
  CHECK(run_cli("bounds --set system.bogus=1 --out " + dir.string()) == 2);
  // Pilot overhead exceeding the frame -> infeasible.
  CHECK(run_cli("bounds --set system.t=40 --set montecarlo.moment_samples=500 --out " +
                dir.string()) == 3);
  // Degenerate correlation -> numerical failure.
  CHECK(run_cli("bounds --set correlation.d_m_mm=1e-7 --set system.n=4"
                " --set montecarlo.moment_samples=500 --out " +
                dir.string()) == 4);
  fs::remove_all(dir);
}

TEST_CASE("binary: seeded sweep output is byte-identical across runs") {
  const fs::path dir1 = fs::temp_directory_path() / "smmimo_cli_det1";
  const fs::path dir2 = fs::temp_directory_path() / "smmimo_cli_det2";
  fs::remove_all(dir1);
  fs::remove_all(dir2);
  const std::string args =
      "sweep --axis M --values 64..256 --seed 7"
      " --set montecarlo.moment_samples=2000 --set system.combiner=zf --out ";
  CHECK(run_cli(args + dir1.string()) == 0);
  CHECK(run_cli(args + dir2.string() + " --threads 1") == 0);
  const std::string csv1 = slurp(dir1 / "sweep.csv");
  CHECK(csv1 == slurp(dir2 / "sweep.csv"));
  CHECK(csv1.find("is_n_star") != std::string::npos);
  // 3 M values x 5 candidates x 1 combiner (+ header)
  CHECK(std::count(csv1.begin(), csv1.end(), '\n') == 16);
  fs::remove_all(dir1);
  fs::remove_all(dir2);
}

TEST_CASE("binary: bounds with defaults emits one row per combiner") {
  const fs::path dir = fs::temp_directory_path() / "smmimo_cli_bounds";
  fs::remove_all(dir);
  CHECK(run_cli("bounds --set montecarlo.moment_samples=2000 --out " + dir.string()) == 0);
  const std::string csv = slurp(dir / "bounds.csv");
  CHECK(csv.find("\nrandom,mr,") != std::string::npos);
  CHECK(csv.find("\nrandom,zf,") != std::string::npos);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  // Manifest embeds the resolved config, which parses back identically.
  const std::string manifest = slurp(dir / "bounds_manifest.json");
  CHECK(manifest.find("\"montecarlo.moment_samples\": \"2000\"") != std::string::npos);
  fs::remove_all(dir);
}
