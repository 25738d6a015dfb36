#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "dirbv/runner.hpp"

using namespace dirbv;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("dirbv_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("config parsing") {
  const ExperimentConfig c = parse_config(R"(# comment
seed = 9
out = "runs/a"   # trailing comment
suites = ["heat", "be"]

[space]
builder = "lattice"
dim = 2
side = 17

[grids]
t_min = 0.01
t_max = 0.1

[be]
powers = [1, 2]
)");
  CHECK(c.seed == 9);
  CHECK(c.out == "runs/a");
  CHECK(c.suites == std::vector<std::string>{"heat", "be"});
  CHECK(c.space.builder == "lattice");
  CHECK(c.space.side == 17);
  CHECK(c.tGrid.set());
  CHECK(c.bePowers == Vec{1.0, 2.0});
  CHECK(c.battery == "mixed");
}

TEST_CASE("config errors name the line and key") {
  auto message = [](const char* text) {
    try {
      parse_config(text);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message("seed = 1\n[space]\nsidee = 4\n").find("line 3, key 'space.sidee'") != std::string::npos);
  CHECK(message("seed = 1\n[nope]\nx = 1\n").find("unknown section") != std::string::npos);
  CHECK(message("out = \"x\"\n").find("'seed' is required") != std::string::npos);
  CHECK(message("seed = abc\n").find("expected an integer") != std::string::npos);
  CHECK(message("seed = 1\n[space\n").find("line 2") != std::string::npos);
  CHECK(message("seed = 1\nsuites = [\"heat\", \"plot\"]\n").find("unknown suite") != std::string::npos);
}

TEST_CASE("config hash follows the content") {
  const ExperimentConfig a = parse_config("seed = 1\n");
  const ExperimentConfig b = parse_config("seed = 1\nout = \"elsewhere\"\n");
  const ExperimentConfig c = parse_config("seed = 2\n");
  CHECK(a.hash() == b.hash());
  CHECK(a.hash() != c.hash());
}

TEST_CASE("grids outside the resolved window are config errors") {
  const auto s = build_torus(2, 16, 1.0 / 16);
  GridSpec g{1e-6, 1e-2, 8.0};
  CHECK_THROWS_AS(time_grid(g, s), ConfigError);
  CHECK(time_grid(GridSpec{}, s).size() > 2);
}

TEST_CASE("two-point heat report") {
  const ExperimentConfig c = parse_config("seed = 1\n[space]\nbuilder = \"lattice\"\ndim = 1\nside = 2\nh = 1\n");
  Session session(c);
  const ModuleReport r = run_heat(session);
  CHECK(r.numericOk);
  CHECK(r.json["worst_residual"].get<double>() < 1e-10);
  CHECK(r.json["config_hash"] == c.hash());
  CHECK(r.json["space"]["n"] == 2);
  CHECK(r.json["version"] == kVersion);
}

TEST_CASE("summarize") {
  const fs::path empty = scratch("empty");
  CHECK(summarize(empty, Thresholds{}) == "space,module,tag,p,constant,stability,status\n");

  const fs::path dir = scratch("reports");
  ModuleReport r;
  r.module = "be";
  r.json = Json{{"module", "be"}, {"space", {{"hash", "abc"}}}};
  r.checks = {{"hamilton", 0.0, 0.3, 1.5}, {"riesz", 4.0, 1.4, 5.0}, {"weak-be", 0.0, 0.2, 20.0}};
  write_report(r, dir, false);
  std::ofstream(dir / "broken.json") << "{ not json";
  std::vector<std::string> warnings;
  const std::string csv = summarize(dir, Thresholds{}, &warnings);
  CHECK(csv.find("abc,be,hamilton,0,0.29999999999999999,1.5,pass") != std::string::npos);
  CHECK(csv.find(",riesz,4,") != std::string::npos);
  CHECK(csv.find("5,flag") != std::string::npos);
  CHECK(csv.find("20,fail") != std::string::npos);
  CHECK(warnings.size() == 1);
  CHECK(check_status(3.0, Thresholds{}) == "pass");
  CHECK(check_status(10.0, Thresholds{}) == "flag");
  CHECK(check_status(NAN, Thresholds{}) == "fail");
}
