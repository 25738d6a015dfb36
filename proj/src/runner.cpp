#include "dirbv/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "dirbv/bakry_emery.hpp"
#include "dirbv/battery.hpp"
#include "dirbv/besov.hpp"
#include "dirbv/bv.hpp"
#include "dirbv/inequalities.hpp"

namespace dirbv {

namespace fs = std::filesystem;

namespace {

double max_of(std::span<const double> v) { return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end()); }

double ratio_spread(std::span<const double> v) {
  double lo = 0.0, hi = 0.0;
  bool any = false;
  for (double x : v) {
    if (!(x > 0.0)) continue;
    lo = any ? std::min(lo, x) : x;
    hi = any ? std::max(hi, x) : x;
    any = true;
  }
  return any ? hi / lo : 1.0;
}

VertexSet as_set(std::span<const double> f) {
  return VertexSet::from_predicate(f.size(), [&](std::size_t x) { return f[x] > 0.5; });
}

bool has_radius_window(const MetricMeasureSpace& s) {
  try {
    (void)resolved_radius_range(s);
    return true;
  } catch (const DomainError&) {
    return false;
  }
}

// Heat identities hold at every t, so spaces without a resolved window fall
// back to a fixed grid instead of failing.
Vec heat_grid(const ExperimentConfig& c, const MetricMeasureSpace& s, bool& resolved) {
  try {
    const ScaleRange r = resolved_time_range(s);
    resolved = !c.tGrid.set() || (r.contains(c.tGrid.min) && r.contains(c.tGrid.max));
  } catch (const DomainError&) {
    resolved = false;
  }
  if (c.tGrid.set()) return geometric_grid(c.tGrid.min, c.tGrid.max, c.tGrid.perDecade);
  if (resolved) return time_grid(c.tGrid, s);
  return geometric_grid(1e-3, 10.0, c.tGrid.perDecade);
}

// First eight set indicators of the geometric family plus seven smoothed
// random functions at a fixed continuum time.
Battery comparability_battery(const MetricMeasureSpace& s, const SpectralData& d, std::uint64_t seed) {
  const Battery g = named_battery(s, &d, "geometric", 0, seed);
  Battery b = g.slice(0, std::min<std::size_t>(8, g.size()));
  b.append(smoothed_random(d, 7, 0.01, seed + 2));
  return b;
}

Json be_json(const BEReport& r, double reevaluated) {
  return Json{{"kind", to_string(r.kind)},
              {"p", r.p},
              {"constant", r.constant},
              {"stability", r.stability},
              {"decade_spread", r.decadeSpread},
              {"witness", {{"t", r.witness.t}, {"function", r.witness.function}, {"x", r.witness.x}, {"y", r.witness.y}}},
              {"witness_reevaluated", reevaluated},
              {"rate", r.rate},
              {"min_ratio", r.minRatio},
              {"spread", r.spread},
              {"evaluated", r.evaluated},
              {"skipped", r.skipped},
              {"excluded", r.excluded},
              {"unresolved", r.unresolved},
              {"degraded", r.degraded},
              {"grid", r.grid},
              {"per_time", r.perTime}};
}

Json embedding_json(const EmbeddingRecord& e, const std::string& name) {
  return Json{{"function", name},  {"p", e.p},     {"delta", e.delta},
              {"Q", e.Q},          {"q", e.q},     {"lhs", e.lhs},
              {"rhs", e.rhs},      {"constant", e.constant}, {"witness_level", e.witnessLevel},
              {"witness_radius", e.witnessRadius}};
}

std::string csv_number(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

Session::Session(ExperimentConfig config)
    : config_(std::move(config)), space_(build_space(config_.space, config_.cap)) {}

const SpectralData& Session::spectral() {
  if (!spectral_) spectral_ = spectral_decompose(space_, config_.cap);
  return *spectral_;
}

Json Session::header(const std::string& module) const {
  const SpaceFingerprint fp = space_.fingerprint();
  return Json{{"module", module},
              {"version", kVersion},
              {"config_hash", config_.hash()},
              {"seed", config_.seed},
              {"space",
               {{"name", space_.name()}, {"n", fp.n}, {"mu_sum", fp.muSum}, {"edges", fp.edgeCount}, {"hash", fp.hash}}},
              {"config", Json::parse(config_.canonical())}};
}

// ------------------------------------------------------------------ heat

ModuleReport run_heat(Session& s) {
  const ExperimentConfig& c = s.config();
  const MetricMeasureSpace& sp = s.space();
  const SpectralData& d = s.spectral();
  bool resolved = false;
  const Vec tg = heat_grid(c, sp, resolved);
  const Matrix battery = sp.size() >= 4 ? named_battery(sp, &d, c.battery, c.batterySize, c.seed).matrix()
                                        : named_battery(sp, &d, "indicators", 0, c.seed).matrix();
  const SpectralResiduals sr = spectral_residuals(sp, d);
  const HeatResiduals hr = verify_heat(sp, d, tg, battery);

  ModuleReport r;
  r.module = "heat";
  r.json = s.header("heat");
  r.json["time_grid"] = tg;
  r.json["eigenvalues"] = {{"count", d.size()}, {"lambda1", d.size() > 1 ? d.eigenvalues[1] : 0.0},
                           {"lambda_max", d.eigenvalues.back()}, {"raw_lambda0", d.rawLambda0}};
  r.json["spectral_residuals"] = {
      {"lambda0", sr.lambda0}, {"orthonormality", sr.orthonormality}, {"eigen", sr.eigenResidual}};
  r.json["residuals"] = {{"symmetry", hr.symmetry},
                         {"conservativeness", hr.conservativeness},
                         {"positivity", hr.positivity},
                         {"chapman_kolmogorov", hr.chapmanKolmogorov},
                         {"parseval", hr.parseval},
                         {"energy_identity", hr.energyIdentity},
                         {"sqrt_generator", hr.sqrtGenerator},
                         {"contractivity", hr.contractivity},
                         {"times", hr.timesChecked},
                         {"functions", hr.functionsChecked}};
  const double worst = std::max({sr.lambda0, sr.orthonormality, sr.eigenResidual, hr.symmetry, hr.conservativeness,
                                 hr.positivity, hr.chapmanKolmogorov, hr.parseval, hr.energyIdentity,
                                 hr.sqrtGenerator, hr.contractivity});
  r.numericOk = worst < 1e-9;
  r.json["worst_residual"] = worst;
  r.json["residual_tolerance"] = 1e-9;

  if (resolved) {
    const GaussianFit fit = gaussian_bound_fit(sp, d, tg, c.seed);
    r.json["gaussian_fit"] = {{"c1", fit.c1},
                              {"c2", fit.c2},
                              {"Cg", fit.Cg},
                              {"Cg_lower_half", fit.CgLowerHalf},
                              {"stability", fit.stability()},
                              {"slope", fit.slope},
                              {"worst_lower_slack", fit.worstLowerSlack},
                              {"worst_upper_slack", fit.worstUpperSlack},
                              {"lower_witness", {fit.lowerWitness.t, fit.lowerWitness.x, fit.lowerWitness.y}},
                              {"upper_witness", {fit.upperWitness.t, fit.upperWitness.x, fit.upperWitness.y}},
                              {"samples", fit.samples},
                              {"excluded_nonpositive", fit.excludedNonpositive},
                              {"diagonal_exponent", fit.diagonalExponent}};
    r.checks.push_back({"gaussian-bounds", 0.0, fit.Cg, fit.stability()});
  } else {
    r.json["gaussian_fit"] = nullptr;
  }
  return r;
}

// ----------------------------------------------------------------- besov

ModuleReport run_besov(Session& s, const std::string& kind) {
  if (kind != "heat" && kind != "metric" && kind != "both") throw ConfigError("besov kind must be heat, metric or both");
  const ExperimentConfig& c = s.config();
  const MetricMeasureSpace& sp = s.space();
  const SpectralData& d = s.spectral();
  const Battery b = named_battery(sp, &d, c.battery, c.batterySize, c.seed);
  const Matrix batch = b.matrix();
  BesovOptions opts;
  opts.seed = c.seed;

  ModuleReport r;
  r.module = "besov";
  r.json = s.header("besov");
  r.json["p"] = c.besovP;
  r.json["alpha"] = c.besovAlpha;
  r.json["kind"] = kind;
  r.json["functions"] = b.names;

  std::ostringstream csv;
  csv << "function,kind,scale,energy,scaled_energy\n";
  auto emit = [&](const std::vector<SeminormProfile>& profiles) {
    Json arr = Json::array();
    for (std::size_t k = 0; k < profiles.size(); ++k) {
      const SeminormProfile& pr = profiles[k];
      const LineFit fit = smoothness_exponent(pr);
      arr.push_back({{"function", b.names[k]},
                     {"seminorm", pr.seminorm},
                     {"argmax_scale", pr.argmaxScale},
                     {"slope", fit.slope},
                     {"slope_residual", fit.residual},
                     {"sampled", pr.sampled},
                     {"rows_used", pr.rowsUsed}});
      const Vec scaled = pr.scaled_energies();
      for (std::size_t i = 0; i < pr.grid.size(); ++i)
        csv << b.names[k] << ',' << to_string(pr.kind) << ',' << csv_number(pr.grid[i]) << ','
            << csv_number(pr.energies[i]) << ',' << csv_number(scaled[i]) << '\n';
    }
    return arr;
  };

  if (kind == "both") {
    // Metric exponent alpha on r, heat exponent alpha/2 on t = r^2.
    const Vec rg = radius_grid(c.rGrid, sp);
    const SeminormComparison cmp = compare_seminorms(sp, d, batch, c.besovP, c.besovAlpha, rg, nullptr, opts);
    r.json["radius_grid"] = rg;
    r.json["heat"] = emit(cmp.heat);
    r.json["metric"] = emit(cmp.metric);
    r.json["ratios"] = cmp.ratios;
    r.json["spread"] = cmp.spread;
    r.checks.push_back({"seminorm-equivalence", c.besovP, max_of(cmp.ratios), cmp.spread});
  } else if (kind == "heat") {
    const Vec tg = time_grid(c.tGrid, sp);
    r.json["time_grid"] = tg;
    r.json["heat"] = emit(heat_besov_profiles(sp, d, batch, c.besovP, tg, c.besovAlpha, opts));
  } else {
    const Vec rg = radius_grid(c.rGrid, sp);
    r.json["radius_grid"] = rg;
    r.json["metric"] = emit(metric_besov_profiles(sp, batch, c.besovP, rg, c.besovAlpha, opts));
  }

  // Semigroup continuity needs p > 1; p = 2 when the configured p is 1.
  const double pc = c.besovP > 1.0 ? c.besovP : 2.0;
  const Vec tg = time_grid(c.tGrid, sp);
  const ContinuityFit cf = semigroup_besov_continuity_check(sp, d, pc, batch, tg, opts);
  r.json["continuity"] = {{"p", pc},
                          {"constant", cf.constant},
                          {"stability", cf.stability},
                          {"decade_spread", cf.decadeSpread},
                          {"witness_time", cf.witnessTime},
                          {"witness_function", cf.witnessFunction},
                          {"skipped_zero", cf.skippedZero},
                          {"per_time", cf.perTime}};
  r.checks.push_back({"semigroup-continuity", pc, cf.constant, cf.stability});
  r.csv.emplace_back("profiles.csv", csv.str());
  return r;
}

// -------------------------------------------------------------------- bv

ModuleReport run_bv(Session& s) {
  const ExperimentConfig& c = s.config();
  const MetricMeasureSpace& sp = s.space();
  const SpectralData& d = s.spectral();
  ModuleReport r;
  r.module = "bv";
  r.json = s.header("bv");

  // Co-area identity and BV / Sobolev comparability on the configured battery.
  const Battery b = named_battery(sp, &d, c.battery, c.batterySize, c.seed);
  Json coarea = Json::array();
  std::ostringstream csv;
  csv << "function,level,gap,perimeter\n";
  for (std::size_t k = 0; k < b.size(); ++k) {
    const CoareaReport cr = coarea_bv(sp, b.functions[k]);
    coarea.push_back({{"function", b.names[k]},
                      {"bv_energy", cr.bvEnergy},
                      {"sobolev_energy", cr.sobolevEnergy},
                      {"ratio", cr.ratio},
                      {"levels", cr.levels.size()}});
    for (std::size_t i = 0; i < cr.gaps.size(); ++i)
      csv << b.names[k] << ',' << csv_number(cr.levels[i]) << ',' << csv_number(cr.gaps[i]) << ','
          << csv_number(cr.perimeters[i]) << '\n';
  }
  r.json["coarea"] = coarea;
  const ComparabilityReport comp = comparability_check(sp, b.matrix());
  r.json["sobolev_comparability"] = {
      {"lower", comp.lower}, {"upper", comp.upper}, {"bound", comp.bound}, {"holds", comp.holds}};
  if (!comp.holds) throw InvariantViolation("co-area energy left [1, sqrt(max degree)] times the Sobolev energy");

  // Heat B^{1,1/2} seminorm against the co-area energy.
  const Battery cb = comparability_battery(sp, d, c.seed);
  const Vec tg = time_grid(c.tGrid, sp);
  BesovOptions opts;
  opts.seed = c.seed;
  const std::vector<SeminormProfile> prof = heat_besov_profiles(sp, d, cb.matrix(), 1.0, tg, 0.5, opts);
  Vec ratios;
  Json rows = Json::array();
  for (std::size_t k = 0; k < cb.size(); ++k) {
    const double bv = coarea_bv(sp, cb.functions[k]).bvEnergy;
    const double ratio = bv > 0.0 ? prof[k].seminorm / bv : 0.0;
    ratios.push_back(ratio);
    rows.push_back({{"function", cb.names[k]}, {"heat_seminorm", prof[k].seminorm}, {"bv", bv}, {"ratio", ratio}});
  }
  const double lo = ratios.empty() ? 0.0 : *std::min_element(ratios.begin(), ratios.end());
  const double hi = max_of(ratios);
  r.json["besov_bv"] = {{"functions", rows}, {"interval", {lo, hi}}};
  r.checks.push_back({"besov-bv-comparability", 1.0, hi, ratio_spread(ratios)});

  // Hausdorff content of the measure-theoretic boundary against perimeter.
  if (has_radius_window(sp)) {
    const Battery geo = named_battery(sp, &d, "geometric", 0, c.seed);
    const Vec rg = radius_grid(c.rGrid, sp);
    const Vec eps{2.0 * sp.mesh_scale()};
    Vec perAlpha(c.hausdorffAlphas.size(), 0.0);
    Json sets = Json::array();
    for (std::size_t k = 0; k < geo.size(); ++k) {
      const VertexSet e = as_set(geo.functions[k]);
      if (e.empty() || e.count() == sp.size()) continue;
      const HausdorffPerimeterCheck hc = check_hausdorff_perimeter(sp, e, c.hausdorffAlphas, rg, eps);
      for (std::size_t a = 0; a < perAlpha.size(); ++a) perAlpha[a] = std::max(perAlpha[a], hc.ratios[a]);
      sets.push_back({{"set", geo.names[k]}, {"perimeter", hc.perimeter}, {"contents", hc.contents},
                      {"ratios", hc.ratios}, {"C", hc.C}});
    }
    r.json["hausdorff_perimeter"] = {{"alphas", c.hausdorffAlphas}, {"C_per_alpha", perAlpha}, {"sets", sets}};
    r.checks.push_back({"hausdorff-perimeter", 0.0, max_of(perAlpha), ratio_spread(perAlpha)});
  }

  const LeibnizReport lr = leibniz_check(sp, 50, c.seed);
  r.json["leibniz"] = {{"kappa", lr.kappa}, {"trials", lr.trials}, {"exact_failures", lr.exactFailures}};
  r.csv.emplace_back("levels.csv", csv.str());
  return r;
}

// -------------------------------------------------------------------- be

ModuleReport run_be(Session& s, const std::string& check) {
  static const std::set<std::string> known{"weak", "quasi", "hamilton", "kgrad", "pseudo", "cross", "riesz", "all"};
  if (!known.contains(check)) throw ConfigError("unknown be check '" + check + "'");
  const ExperimentConfig& c = s.config();
  const MetricMeasureSpace& sp = s.space();
  const SpectralData& d = s.spectral();
  const Vec tg = time_grid(c.tGrid, sp);
  const Matrix beBattery = named_battery(sp, &d, "be", 0, c.seed).matrix();
  const Matrix battery = named_battery(sp, &d, c.battery, c.batterySize, c.seed).matrix();
  const bool all = check == "all";

  ModuleReport r;
  r.module = "be";
  r.json = s.header("be");
  r.json["time_grid"] = tg;
  Json reports = Json::array();
  double worstReeval = 0.0;
  auto add = [&](const BEReport& rep, const Matrix& b, const char* tag) {
    const double re = reevaluate_witness(sp, d, rep, b);
    const double rel = rep.constant > 0.0 ? std::abs(re - rep.constant) / rep.constant : std::abs(re);
    worstReeval = std::max(worstReeval, rel);
    reports.push_back(be_json(rep, re));
    r.checks.push_back({tag, rep.p, rep.constant, rep.kind == BEKind::riesz ? rep.spread : rep.stability});
  };
  if (all || check == "weak") add(weak_be_constant(sp, d, tg, beBattery), beBattery, "weak-be");
  if (all || check == "quasi") add(quasi_be_constant(sp, d, tg, beBattery), beBattery, "quasi-be");
  if (all || check == "hamilton") add(hamilton_check(sp, d, tg, 1024, c.seed), beBattery, "hamilton");
  if (all || check == "kgrad") add(kernel_gradient_bound(sp, d, tg, 256, c.seed), beBattery, "kernel-gradient");
  if (all || check == "pseudo")
    for (double p : c.bePowers) add(pseudo_poincare_check(sp, d, p, battery, tg), battery, "pseudo-poincare");
  if (all || check == "cross")
    for (double p : c.bePowers)
      if (p > 1.0) add(cross_term_check(sp, d, p, battery, tg, 1024, c.seed), battery, "cross-term");
  if (all || check == "riesz")
    for (double p : c.rieszPowers)
      if (p > 1.0) add(riesz_check(sp, d, p, battery), battery, "riesz");
  r.json["reports"] = reports;
  r.json["worst_witness_reevaluation"] = worstReeval;
  r.numericOk = worstReeval <= 1e-9;
  return r;
}

// ------------------------------------------------------------------ ineq

ModuleReport run_ineq(Session& s, const std::string& check) {
  static const std::set<std::string> known{"weak", "fraciso", "sobolev", "iso", "all"};
  if (!known.contains(check)) throw ConfigError("unknown ineq check '" + check + "'");
  const ExperimentConfig& c = s.config();
  const MetricMeasureSpace& sp = s.space();
  const SpectralData& d = s.spectral();
  const DoublingProfile dp = doubling_profile(sp, 64, c.seed);
  // Q is the model dimension on grids; the fitted slope elsewhere.
  const double Q = sp.grid() ? static_cast<double>(sp.grid()->dim) : dp.Q;
  const Vec rg = radius_grid(c.rGrid, sp);
  const Vec lowerHalf(rg.begin(), rg.begin() + static_cast<long>((rg.size() + 1) / 2));
  const Battery fb = named_battery(sp, &d, c.battery, c.batterySize, c.seed);
  const Battery geo = named_battery(sp, &d, "geometric", 0, c.seed);
  const bool all = check == "all";

  ModuleReport r;
  r.module = "ineq";
  r.json = s.header("ineq");
  r.json["Q"] = Q;
  r.json["fitted_Q"] = dp.Q;
  r.json["radius_grid"] = rg;

  std::ostringstream csv;
  csv << "check,function,radius,value\n";
  auto scan = [&](const char* name, const std::string& fn, const EmbeddingRecord& e) {
    for (std::size_t i = 0; i < e.radii.size(); ++i)
      csv << name << ',' << fn << ',' << csv_number(e.radii[i]) << ',' << csv_number(e.scaled[i]) << '\n';
  };

  if (all || check == "weak") {
    const double q = sobolev_exponent(c.ineqP, c.ineqDelta, Q);
    Json rows = Json::array();
    double full = 0.0, half = 0.0;
    for (std::size_t k = 0; k < fb.size(); ++k) {
      const EmbeddingRecord e = weak_embedding_check(sp, fb.functions[k], c.ineqP, c.ineqDelta, Q, rg);
      const EmbeddingRecord eh = weak_embedding_check(sp, fb.functions[k], c.ineqP, c.ineqDelta, Q, lowerHalf);
      full = std::max(full, e.constant);
      half = std::max(half, eh.constant);
      rows.push_back(embedding_json(e, fb.names[k]));
      scan("weak", fb.names[k], e);
    }
    r.json["weak_embedding"] = {{"q", q}, {"constant", full}, {"constant_lower_half", half}, {"records", rows}};
    r.checks.push_back({"weak-embedding", c.ineqP, full, full > 0.0 ? half / full : 1.0});
  }
  std::vector<std::pair<std::string, VertexSet>> sets;
  for (std::size_t k = 0; k < geo.size(); ++k) {
    VertexSet e = as_set(geo.functions[k]);
    if (!e.empty() && e.count() != sp.size()) sets.emplace_back(geo.names[k], std::move(e));
  }
  if (all || check == "fraciso") {
    Json rows = Json::array();
    double full = 0.0, half = 0.0;
    for (const auto& [name, e] : sets) {
      const EmbeddingRecord rec = fractional_isoperimetry(sp, e, c.ineqDelta, Q, rg);
      const EmbeddingRecord rh = fractional_isoperimetry(sp, e, c.ineqDelta, Q, lowerHalf);
      full = std::max(full, rec.constant);
      half = std::max(half, rh.constant);
      rows.push_back(embedding_json(rec, name));
      scan("fraciso", name, rec);
    }
    r.json["fractional_isoperimetry"] = {{"constant", full}, {"constant_lower_half", half}, {"records", rows}};
    r.checks.push_back({"fractional-isoperimetry", 1.0, full, full > 0.0 ? half / full : 1.0});
  }
  if (all || check == "sobolev") {
    Json rows = Json::array();
    Vec consts;
    for (std::size_t k = 0; k < geo.size(); ++k) {
      const EmbeddingRecord rec = bv_sobolev_check(sp, geo.functions[k], Q);
      consts.push_back(rec.constant);
      rows.push_back(embedding_json(rec, geo.names[k]));
    }
    r.json["bv_sobolev"] = {{"constant", max_of(consts)}, {"records", rows}};
    r.checks.push_back({"bv-sobolev", 1.0, max_of(consts), ratio_spread(consts)});
  }
  if (all || check == "iso") {
    Json rows = Json::array();
    Vec consts;
    for (const auto& [name, e] : sets) {
      const EmbeddingRecord rec = isoperimetric_check(sp, e, Q);
      consts.push_back(rec.constant);
      rows.push_back(embedding_json(rec, name));
    }
    // Disk family mu(E)^{1/2} / P(E) at radii 4h, 8h, 16h where they fit.
    Json disks = Json::array();
    const double h = sp.mesh_scale();
    if (sp.grid() && sp.grid()->dim == 2) {
      Vec radii;
      for (double m : {4.0, 8.0, 16.0})
        if (m * h < sp.diameter() / 4.0) radii.push_back(m * h);
      const Battery db = disk_indicators(sp, radii);
      Vec dr;
      for (std::size_t k = 0; k < db.size(); ++k) {
        const VertexSet e = as_set(db.functions[k]);
        const double ratio = std::sqrt(sp.measure(e)) / perimeter(sp, e);
        dr.push_back(ratio);
        disks.push_back({{"radius", radii[k]}, {"ratio", ratio}});
      }
      r.json["disk_ratio_spread"] = ratio_spread(dr);
    }
    r.json["isoperimetry"] = {{"constant", max_of(consts)}, {"records", rows}, {"disks", disks}};
    r.checks.push_back({"isoperimetry", 1.0, max_of(consts), ratio_spread(consts)});
  }
  r.csv.emplace_back("scales.csv", csv.str());
  return r;
}

ModuleReport run_koch(const ExperimentConfig& config, const std::vector<int>& resolutions) {
  const KochStudy st = koch_study(resolutions);
  ModuleReport r;
  r.module = "koch";
  r.json = Json{{"module", "koch"}, {"version", kVersion}, {"config_hash", config.hash()}, {"seed", config.seed}};
  r.json["m"] = st.m;
  r.json["target"] = st.target;
  Json levels = Json::array();
  double worst = 1.0;
  for (const KochLevel& l : st.levels) {
    levels.push_back({{"resolution", l.resolution},
                      {"iterations", l.iterations},
                      {"h", l.h},
                      {"exponent", l.exponent},
                      {"square_exponent", l.squareExponent},
                      {"fractional_isoperimetry", l.fracIsoConstant},
                      {"witness_radius", l.fracIsoWitness},
                      {"area", l.area}});
    worst = std::max(worst, l.exponent > 0.0 ? std::max(l.exponent / st.target, st.target / l.exponent) : 0.0);
  }
  r.json["levels"] = levels;
  r.json["fractional_isoperimetry_stability"] = st.fracIsoStability;
  r.checks.push_back({"koch-fractional-isoperimetry", 1.0,
                      st.levels.empty() ? 0.0 : st.levels.back().fracIsoConstant, st.fracIsoStability});
  return r;
}

// ----------------------------------------------------------------- output

std::string check_status(double stability, const Thresholds& t) {
  if (!std::isfinite(stability)) return "fail";
  if (stability <= t.pass) return "pass";
  if (stability <= t.flag) return "flag";
  return "fail";
}

namespace {

Json checks_json(const std::vector<CheckRow>& rows) {
  Json arr = Json::array();
  for (const CheckRow& c : rows)
    arr.push_back({{"tag", c.tag}, {"p", c.p}, {"constant", c.constant}, {"stability", c.stability}});
  return arr;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

}  // namespace

fs::path write_report(const ModuleReport& r, const fs::path& dir, bool withCsv) {
  fs::create_directories(dir);
  Json j = r.json;
  j["checks"] = checks_json(r.checks);
  j["numeric_ok"] = r.numericOk;
  const fs::path path = dir / (r.module + ".json");
  write_text(path, j.dump(2) + "\n");
  if (withCsv)
    for (const auto& [suffix, text] : r.csv) write_text(dir / (r.module + "_" + suffix), text);
  return path;
}

SuiteResult run_suite(const ExperimentConfig& config, const fs::path& outDir) {
  Session session(config);
  SuiteResult res;
  std::vector<ModuleReport> reports;
  for (const std::string& m : config.suites) {
    if (m == "heat") reports.push_back(run_heat(session));
    else if (m == "besov") reports.push_back(run_besov(session));
    else if (m == "bv") reports.push_back(run_bv(session));
    else if (m == "be") reports.push_back(run_be(session));
    else if (m == "ineq") reports.push_back(run_ineq(session));
  }
  Json manifest = Json::array();
  ModuleReport summary;
  summary.module = "summary";
  summary.json = session.header("summary");
  Json rows = Json::array();
  for (const ModuleReport& r : reports) {
    res.reports.push_back(write_report(r, outDir, false));
    manifest.push_back({{"file", r.module + ".json"}, {"written", utc_now()}});
    res.numericOk = res.numericOk && r.numericOk;
    for (const CheckRow& c : r.checks)
      rows.push_back({{"module", r.module}, {"tag", c.tag}, {"p", c.p}, {"constant", c.constant},
                      {"stability", c.stability}, {"status", check_status(c.stability, config.thresholds)}});
  }
  summary.json["thresholds"] = {{"pass", config.thresholds.pass}, {"flag", config.thresholds.flag}};
  summary.json["rows"] = rows;
  summary.numericOk = res.numericOk;
  res.reports.push_back(write_report(summary, outDir, false));
  manifest.push_back({{"file", "summary.json"}, {"written", utc_now()}});
  write_text(outDir / "manifest.json", Json{{"version", kVersion}, {"files", manifest}}.dump(2) + "\n");
  return res;
}

std::string summarize(const fs::path& dir, const Thresholds& thresholds, std::vector<std::string>* warnings) {
  std::ostringstream csv;
  csv << "space,module,tag,p,constant,stability,status\n";
  if (!fs::is_directory(dir)) throw ConfigError("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.path().extension() == ".json" && entry.path().filename() != "manifest.json") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  for (const fs::path& f : files) {
    try {
      std::ifstream in(f);
      const Json j = Json::parse(in);
      if (!j.contains("checks")) continue;
      const std::string space = j.contains("space") ? j["space"].value("hash", std::string("-")) : std::string("-");
      for (const Json& c : j["checks"]) {
        const double stab = c.at("stability").is_number() ? c.at("stability").get<double>() : INFINITY;
        csv << space << ',' << j.value("module", std::string("?")) << ',' << c.at("tag").get<std::string>() << ','
            << csv_number(c.at("p").get<double>()) << ','
            << csv_number(c.at("constant").is_number() ? c.at("constant").get<double>() : NAN) << ','
            << csv_number(stab) << ',' << check_status(stab, thresholds) << '\n';
      }
    } catch (const std::exception& e) {
      if (warnings) warnings->push_back(f.filename().string() + ": " + e.what());
    }
  }
  return csv.str();
}

}  // namespace dirbv
