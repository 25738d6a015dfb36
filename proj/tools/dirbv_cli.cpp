// Command-line front end: one subcommand per module plus suite and summarize.

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "dirbv/battery.hpp"
#include "dirbv/blas_guard.hpp"
#include "dirbv/bv.hpp"
#include "dirbv/runner.hpp"

using namespace dirbv;
namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kInternal = 1, kConfig = 2, kCapacity = 3, kNumeric = 4, kInvariant = 5 };

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::size_t> cap;
};

struct SpaceFlags {
  std::string file;
  std::optional<std::string> builder;
  std::optional<int> dim, side, level;
  std::optional<double> h;
};

struct GridFlags {
  std::optional<double> tmin, tmax;
  std::optional<int> tsteps;
};

void add_space_flags(CLI::App* app, SpaceFlags& s) {
  app->add_option("--space", s.file, "space JSON file");
  app->add_option("--builder", s.builder, "torus | lattice | gasket | spider");
  app->add_option("--dim", s.dim);
  app->add_option("--side", s.side);
  app->add_option("--mesh", s.h, "mesh width h");
  app->add_option("--level", s.level);
}

void add_time_flags(CLI::App* app, GridFlags& g) {
  app->add_option("--tmin", g.tmin);
  app->add_option("--tmax", g.tmax);
  app->add_option("--tsteps", g.tsteps, "points on the time grid");
}

ExperimentConfig resolve(const Globals& g, const SpaceFlags& s, const GridFlags& t) {
  ExperimentConfig c = g.config.empty() ? ExperimentConfig{} : load_config(g.config);
  if (g.seed) c.seed = *g.seed;
  if (g.out) c.out = *g.out;
  if (g.cap) c.cap = *g.cap;
  if (!s.file.empty()) {
    c.space.builder = "file";
    c.space.path = s.file;
  }
  if (s.builder) c.space.builder = *s.builder;
  if (s.dim) c.space.dim = *s.dim;
  if (s.side) c.space.side = *s.side;
  if (s.h) c.space.h = *s.h;
  if (s.level) c.space.level = *s.level;
  if (t.tmin || t.tmax) {
    if (!t.tmin || !t.tmax || !(*t.tmin > 0.0 && *t.tmin < *t.tmax)) throw ConfigError("need 0 < --tmin < --tmax");
    c.tGrid.min = *t.tmin;
    c.tGrid.max = *t.tmax;
    if (t.tsteps) {
      if (*t.tsteps < 2) throw ConfigError("--tsteps must be >= 2");
      c.tGrid.perDecade = (*t.tsteps - 1) / std::log10(*t.tmax / *t.tmin);
    }
  }
  return c;
}

Vec read_function(const std::string& spec, const MetricMeasureSpace& space, const ExperimentConfig& c,
                  Session& session) {
  if (fs::exists(spec)) {
    std::ifstream in(spec);
    const Vec f = nlohmann::json::parse(in).get<Vec>();
    if (f.size() != space.size())
      throw ConfigError("function file has " + std::to_string(f.size()) + " values, space has " +
                        std::to_string(space.size()));
    return f;
  }
  // builtin: <battery>:<index>
  const auto colon = spec.find(':');
  const std::string name = spec.substr(0, colon);
  const std::size_t idx = colon == std::string::npos ? 0 : std::stoul(spec.substr(colon + 1));
  const Battery b = named_battery(space, &session.spectral(), name, c.batterySize, c.seed);
  if (idx >= b.size()) throw ConfigError("battery '" + name + "' has " + std::to_string(b.size()) + " members");
  return b.functions[idx];
}

int finish(const ModuleReport& r, const ExperimentConfig& c) {
  const fs::path path = write_report(r, c.out, true);
  std::cout << path.string() << '\n';
  return r.numericOk ? kOk : kNumeric;
}

}  // namespace

int main(int argc, char** argv) {
  reexec_with_safe_blas(argv);
  CLI::App app{"Heat-kernel Besov and BV toolkit on weighted graphs"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "INI experiment config")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "overrides the config seed");
  app.add_option("--out", g.out, "output directory");
  app.add_option("--cap", g.cap, "vertex capacity");

  SpaceFlags sf;
  GridFlags gf;

  auto* build = app.add_subcommand("build-space", "build a space and write it as JSON");
  add_space_flags(build, sf);
  bool withDist = false;
  build->add_flag("--with-dist", withDist, "write the dense metric table");

  auto* heat = app.add_subcommand("heat-verify", "heat kernel invariants and Gaussian fit");
  add_space_flags(heat, sf);
  add_time_flags(heat, gf);

  auto* besov = app.add_subcommand("besov", "heat and metric Besov seminorms");
  add_space_flags(besov, sf);
  add_time_flags(besov, gf);
  std::optional<double> bp, balpha;
  std::string kind = "both";
  std::optional<std::string> battery;
  besov->add_option("--p", bp);
  besov->add_option("--alpha", balpha);
  besov->add_option("--kind", kind)->check(CLI::IsMember({"heat", "metric", "both"}));
  besov->add_option("--battery", battery);

  auto* bv = app.add_subcommand("bv", "co-area, relaxation and Hausdorff-perimeter checks");
  add_space_flags(bv, sf);
  std::string function;
  Vec alphaList, epsList;
  bv->add_option("--function", function, "JSON array file or <battery>:<index>");
  bv->add_option("--alpha-list", alphaList)->delimiter(',');
  bv->add_option("--eps-list", epsList)->delimiter(',');

  auto* be = app.add_subcommand("be", "Bakry-Emery type gradient constants");
  add_space_flags(be, sf);
  add_time_flags(be, gf);
  std::string beCheck = "all";
  std::optional<double> beP;
  be->add_option("--check", beCheck)
      ->check(CLI::IsMember({"weak", "quasi", "hamilton", "kgrad", "pseudo", "cross", "riesz", "all"}));
  be->add_option("--p", beP);

  auto* ineq = app.add_subcommand("ineq", "Sobolev and isoperimetric embeddings, Koch study");
  add_space_flags(ineq, sf);
  std::string ineqCheck = "all";
  std::vector<int> koch;
  std::optional<double> ip, idelta;
  ineq->add_option("--check", ineqCheck)->check(CLI::IsMember({"weak", "fraciso", "sobolev", "iso", "koch", "all"}));
  ineq->add_option("--koch", koch, "raster resolutions for the Koch study")->delimiter(',');
  ineq->add_option("--p", ip);
  ineq->add_option("--delta", idelta);

  auto* suite = app.add_subcommand("suite", "run every configured module");
  add_space_flags(suite, sf);

  auto* summ = app.add_subcommand("summarize", "CSV summary of a report directory");
  std::string reportDir;
  std::string csvPath;
  summ->add_option("dir", reportDir, "report directory")->required();
  summ->add_option("--csv", csvPath, "also write the table here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    ExperimentConfig c = resolve(g, sf, gf);
    if (*build) {
      const MetricMeasureSpace s = build_space(c.space, c.cap);
      fs::create_directories(c.out);
      const fs::path path = fs::path(c.out) / "space.json";
      save_space(s, path, withDist);
      const SpaceFingerprint fp = s.fingerprint();
      std::cout << path.string() << " n=" << fp.n << " edges=" << fp.edgeCount << " hash=" << fp.hash << '\n';
      return kOk;
    }
    if (*summ) {
      std::vector<std::string> warnings;
      const std::string table = summarize(reportDir, c.thresholds, &warnings);
      for (const std::string& w : warnings) std::cerr << "warning: skipped " << w << '\n';
      std::cout << table;
      if (!csvPath.empty()) {
        std::ofstream out(csvPath, std::ios::binary);
        out << table;
      }
      return kOk;
    }
    if (*suite) {
      const SuiteResult res = run_suite(c, c.out);
      for (const fs::path& p : res.reports) std::cout << p.string() << '\n';
      return res.numericOk ? kOk : kNumeric;
    }
    if (*ineq && (ineqCheck == "koch" || !koch.empty())) {
      if (koch.empty()) koch = {257, 513};
      return finish(run_koch(c, koch), c);
    }

    if (bp) c.besovP = *bp;
    if (balpha) c.besovAlpha = *balpha;
    if (battery) c.battery = *battery;
    if (beP) c.bePowers = c.rieszPowers = Vec{*beP};
    if (ip) c.ineqP = *ip;
    if (idelta) c.ineqDelta = *idelta;
    if (!alphaList.empty()) c.hausdorffAlphas = alphaList;
    Session session(c);
    if (*heat) return finish(run_heat(session), c);
    if (*besov) return finish(run_besov(session, kind), c);
    if (*be) return finish(run_be(session, beCheck), c);
    if (*ineq) return finish(run_ineq(session, ineqCheck), c);
    if (*bv) {
      ModuleReport r = run_bv(session);
      if (!function.empty()) {
        const MetricMeasureSpace& s = session.space();
        const Vec f = read_function(function, s, c, session);
        const CoareaReport cr = coarea_bv(s, f);
        Json fj{{"bv_energy", cr.bvEnergy}, {"sobolev_energy", cr.sobolevEnergy}, {"ratio", cr.ratio},
                {"levels", cr.levels}, {"gaps", cr.gaps}, {"perimeters", cr.perimeters}};
        if (!epsList.empty()) {
          const RelaxedBV rb = relaxed_bv(s, f, epsList);
          fj["relaxed"] = {{"value", rb.value}, {"direct", rb.direct}, {"epsilons", rb.epsilons},
                           {"energies", rb.energies}, {"argmin_epsilon", rb.argminEpsilon}};
        }
        r.json["function"] = fj;
      }
      return finish(r, c);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const DomainError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kConfig;
  } catch (const CapacityError& e) {
    std::cerr << "capacity: " << e.what() << '\n';
    return kCapacity;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kNumeric;
  } catch (const InvariantViolation& e) {
    std::cerr << "invariant violation: " << e.what() << '\n';
    return kInvariant;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInternal;
  }
  return kOk;
}
