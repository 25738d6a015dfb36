#include "dirbv/besov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "dirbv/kernels.hpp"
#include "row_plan.hpp"

namespace dirbv {

const char* to_string(SeminormKind kind) { return kind == SeminormKind::heat ? "heat" : "metric"; }

Vec SeminormProfile::scaled_energies() const {
  Vec out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) out[i] = std::pow(grid[i], -alpha) * energies[i];
  return out;
}

namespace {

void finish(SeminormProfile& prof) {
  prof.seminorm = 0.0;
  prof.argmaxScale = prof.grid.empty() ? 0.0 : prof.grid.front();
  const Vec scaled = prof.scaled_energies();
  for (std::size_t i = 0; i < scaled.size(); ++i) {
    if (scaled[i] > prof.seminorm) {
      prof.seminorm = scaled[i];
      prof.argmaxScale = prof.grid[i];
    }
  }
}

void check_inputs(const MetricMeasureSpace& space, const Matrix& batch, double p, std::span<const double> grid,
                  const char* what) {
  if (grid.empty()) throw DomainError(std::string(what) + ": empty grid");
  if (!(p >= 1.0)) throw DomainError(std::string(what) + ": p must be >= 1");
  if (batch.cols() != space.size()) throw DomainError(std::string(what) + ": function length does not match space");
  for (double s : grid)
    if (!(s > 0.0)) throw DomainError(std::string(what) + ": grid values must be positive");
}

Matrix one_row(std::span<const double> f) {
  Matrix m(1, f.size());
  std::copy(f.begin(), f.end(), m.data());
  return m;
}

}  // namespace

std::vector<SeminormProfile> heat_besov_profiles(const MetricMeasureSpace& space, const SpectralData& d,
                                                 const Matrix& batch, double p, std::span<const double> tGrid,
                                                 double alpha, const BesovOptions& options) {
  check_inputs(space, batch, p, tGrid, "heat_besov_profile");
  if (options.checkRange) require_within(resolved_time_range(space), tGrid, "heat_besov_profile");
  const std::size_t n = space.size();
  const std::size_t m = batch.rows();
  const detail::RowPlan plan = detail::plan_rows(n, options.exactLimit, options.sampleRows, options.seed);
  std::vector<SeminormProfile> out(m);
  for (auto& prof : out) {
    prof.kind = SeminormKind::heat;
    prof.p = p;
    prof.alpha = alpha;
    prof.grid.assign(tGrid.begin(), tGrid.end());
    prof.energies.assign(tGrid.size(), 0.0);
    prof.sampled = plan.sampled;
    prof.rowsUsed = plan.rows.size();
  }
  for (std::size_t ti = 0; ti < tGrid.size(); ++ti) {
    const Matrix k = plan.sampled ? kernels::parallel::heat_kernel_rows(d.phi, d.eigenvalues, tGrid[ti], plan.rows)
                                  : kernels::parallel::heat_kernel_matrix(d.phi, d.eigenvalues, tGrid[ti]);
    const Matrix sums = kernels::parallel::kernel_row_sums(k, plan.rows, space.mu(), batch, batch, p);
    for (std::size_t f = 0; f < m; ++f) {
      double acc = 0.0;
      for (std::size_t i = 0; i < plan.rows.size(); ++i) acc += plan.weight[i] * space.measure(plan.rows[i]) * sums(f, i);
      out[f].energies[ti] = std::pow(std::max(acc, 0.0), 1.0 / p);
    }
  }
  for (auto& prof : out) finish(prof);
  return out;
}

SeminormProfile heat_besov_profile(const MetricMeasureSpace& space, const SpectralData& d, std::span<const double> f,
                                   double p, std::span<const double> tGrid, double alpha,
                                   const BesovOptions& options) {
  return heat_besov_profiles(space, d, one_row(f), p, tGrid, alpha, options).front();
}

std::vector<SeminormProfile> metric_besov_profiles(const MetricMeasureSpace& space, const Matrix& batch, double p,
                                                   std::span<const double> rGrid, double alpha,
                                                   const BesovOptions& options) {
  check_inputs(space, batch, p, rGrid, "metric_besov_profile");
  if (options.checkRange) require_within(resolved_radius_range(space), rGrid, "metric_besov_profile");
  const kernels::PairProfiles pp = kernels::parallel::metric_pair_profiles(space, batch, p, rGrid);
  std::vector<SeminormProfile> out(batch.rows());
  for (std::size_t f = 0; f < batch.rows(); ++f) {
    SeminormProfile& prof = out[f];
    prof.kind = SeminormKind::metric;
    prof.p = p;
    prof.alpha = alpha;
    prof.grid.assign(rGrid.begin(), rGrid.end());
    prof.rowsUsed = space.size();
    prof.energies.resize(rGrid.size());
    for (std::size_t r = 0; r < rGrid.size(); ++r)
      prof.energies[r] = std::pow(std::max(pp.ballAveraged(f, r), 0.0), 1.0 / p);
    finish(prof);
  }
  return out;
}

SeminormProfile metric_besov_profile(const MetricMeasureSpace& space, std::span<const double> f, double p,
                                     std::span<const double> rGrid, double alpha, const BesovOptions& options) {
  return metric_besov_profiles(space, one_row(f), p, rGrid, alpha, options).front();
}

SeminormComparison compare_seminorms(const MetricMeasureSpace& space, const SpectralData& d, const Matrix& batch,
                                     double p, double alpha, std::span<const double> rGrid, const GaussianFit* fit,
                                     const BesovOptions& options) {
  if (!(alpha > 0.0)) throw DomainError("compare_seminorms: alpha must be positive");
  SeminormComparison cmp;
  cmp.p = p;
  cmp.alpha = alpha;
  cmp.rGrid.assign(rGrid.begin(), rGrid.end());
  Vec tGrid(rGrid.size());
  for (std::size_t i = 0; i < rGrid.size(); ++i) tGrid[i] = rGrid[i] * rGrid[i];
  if (options.checkRange) {
    require_within(resolved_radius_range(space), rGrid, "compare_seminorms");
    require_within(resolved_time_range(space), tGrid, "compare_seminorms");
  }
  BesovOptions unchecked = options;
  unchecked.checkRange = false;
  cmp.heat = heat_besov_profiles(space, d, batch, p, tGrid, alpha / 2.0, unchecked);
  cmp.metric = metric_besov_profiles(space, batch, p, rGrid, alpha, unchecked);

  Vec finite;
  for (std::size_t f = 0; f < batch.rows(); ++f) {
    const double h = cmp.heat[f].seminorm;
    const double m = cmp.metric[f].seminorm;
    if (m == 0.0 && h == 0.0) {
      cmp.ratios.push_back(1.0);
      cmp.bothZero.push_back(true);
      continue;
    }
    if (m == 0.0) {
      throw InvariantViolation("compare_seminorms: metric seminorm vanishes while the heat seminorm is " +
                               std::to_string(h) + " (function " + std::to_string(f) + ")");
    }
    cmp.ratios.push_back(h / m);
    cmp.bothZero.push_back(false);
    finite.push_back(h / m);
  }
  cmp.spread = spread(finite);

  if (fit != nullptr) {
    cmp.lowerBoundChecked = true;
    cmp.lowerBoundConstant = std::exp(-fit->c1) / fit->Cg;
    cmp.worstLowerRatio = std::numeric_limits<double>::infinity();
    for (std::size_t f = 0; f < batch.rows(); ++f) {
      for (std::size_t i = 0; i < rGrid.size(); ++i) {
        const double np = std::pow(cmp.metric[f].energies[i], p);
        if (np == 0.0) continue;
        const double hp = std::pow(cmp.heat[f].energies[i], p);
        cmp.worstLowerRatio = std::min(cmp.worstLowerRatio, hp / np);
      }
    }
    if (std::isinf(cmp.worstLowerRatio)) cmp.worstLowerRatio = 0.0;
    cmp.lowerBoundHolds = cmp.worstLowerRatio == 0.0 || cmp.worstLowerRatio >= cmp.lowerBoundConstant * (1.0 - 1e-9);
  }
  return cmp;
}

LineFit smoothness_exponent(const SeminormProfile& profile) { return fit_loglog(profile.grid, profile.energies); }

double decade_stability(std::span<const double> grid, std::span<const double> values) {
  if (grid.empty()) return 1.0;
  std::map<long, double> bins;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(values[i] > 0.0)) continue;
    const long b = static_cast<long>(std::floor(std::log10(grid[i] / grid.front()) + 1e-9));
    auto [it, fresh] = bins.try_emplace(b, values[i]);
    if (!fresh) it->second = std::max(it->second, values[i]);
  }
  Vec maxima;
  for (const auto& [b, v] : bins) maxima.push_back(v);
  return spread(maxima);
}

double decade_growth(std::span<const double> grid, std::span<const double> values) {
  double all = 0.0, first = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    all = std::max(all, values[i]);
    if (grid[i] < 10.0 * grid.front() * (1.0 - 1e-9)) first = std::max(first, values[i]);
  }
  return first > 0.0 ? all / first : 1.0;
}

namespace {

struct LevelSlopes {
  Vec slopes;              // NaN for constant functions
  std::vector<std::string> names;
};

LevelSlopes level_slopes(const MetricMeasureSpace& space, const SpectralData& d, const Battery& battery, double p,
                         const CriticalStudyOptions& options) {
  const ScaleRange range = resolved_time_range(space);
  const double top = range.lo * std::pow(range.hi / range.lo, options.fitWindow);
  const Vec grid = geometric_grid(range.lo, top, options.pointsPerDecade);
  const auto profiles = heat_besov_profiles(space, d, battery.matrix(), p, grid, 0.0, options.besov);
  LevelSlopes out;
  out.names = battery.names;
  for (const auto& prof : profiles) {
    const bool constant = std::all_of(prof.energies.begin(), prof.energies.end(), [](double e) { return e == 0.0; });
    out.slopes.push_back(constant ? std::numeric_limits<double>::quiet_NaN() : smoothness_exponent(prof).slope);
  }
  return out;
}

// Intercept at h = 0 of slope against mesh size.
double extrapolate(std::span<const double> h, std::span<const double> s) {
  if (h.size() == 1) return s.front();
  return fit_line(h, s).intercept;
}

}  // namespace

CriticalExponentReport critical_exponent_study(std::span<const StudyLevel> levels, double p,
                                               const std::string& battery, const CriticalStudyOptions& options) {
  if (levels.size() < 3) throw DomainError("critical_exponent_study: need at least 3 refinement levels");
  CriticalExponentReport rep;
  rep.p = p;
  rep.battery = battery;
  double previousLo = std::numeric_limits<double>::infinity();
  std::vector<LevelSlopes> main, smooth;
  for (const StudyLevel& lv : levels) {
    const ScaleRange range = resolved_time_range(*lv.space);
    if (!(range.lo < previousLo)) {
      throw DomainError("critical_exponent_study: resolved time ranges do not shrink with refinement (" +
                        lv.space->name() + ")");
    }
    previousLo = range.lo;
    rep.refinementLevels.push_back(lv.space->name());
    rep.meshSizes.push_back(lv.space->mesh_scale());

    const Battery b = named_battery(*lv.space, lv.spectral, battery, options.batterySize, options.besov.seed);
    main.push_back(level_slopes(*lv.space, *lv.spectral, b, p, options));
    const Battery sm =
        smoothed_random(*lv.spectral, options.smoothedCount, options.smoothingTime, options.besov.seed + 7);
    smooth.push_back(level_slopes(*lv.space, *lv.spectral, sm, p, options));
  }
  const std::size_t m = main.front().slopes.size();
  for (const auto& l : main)
    if (l.slopes.size() != m) throw DomainError("critical_exponent_study: battery size changes across levels");
  rep.functionNames = main.front().names;
  rep.levelSlopes = Matrix(levels.size(), m);
  rep.alphaSharp = -std::numeric_limits<double>::infinity();
  for (std::size_t f = 0; f < m; ++f) {
    Vec s, h;
    for (std::size_t l = 0; l < levels.size(); ++l) {
      rep.levelSlopes(l, f) = main[l].slopes[f];
      if (!std::isnan(main[l].slopes[f])) {
        s.push_back(main[l].slopes[f]);
        h.push_back(rep.meshSizes[l]);
      }
    }
    if (s.size() < levels.size()) {
      rep.batterySlopes.push_back(std::numeric_limits<double>::quiet_NaN());
      ++rep.excludedConstant;
      continue;
    }
    const double e = extrapolate(h, s);
    rep.batterySlopes.push_back(e);
    rep.alphaSharp = std::max(rep.alphaSharp, e);
  }
  rep.empty = rep.excludedConstant == m;
  if (rep.empty) rep.alphaSharp = std::numeric_limits<double>::quiet_NaN();

  rep.smoothedNames = smooth.front().names;
  rep.alphaStar = std::numeric_limits<double>::infinity();
  for (std::size_t f = 0; f < smooth.front().slopes.size(); ++f) {
    Vec s, h;
    for (std::size_t l = 0; l < levels.size(); ++l) {
      s.push_back(smooth[l].slopes[f]);
      h.push_back(rep.meshSizes[l]);
    }
    const double e = extrapolate(h, s);
    rep.smoothedSlopes.push_back(e);
    rep.alphaStar = std::min(rep.alphaStar, e);
  }
  if (rep.smoothedSlopes.empty()) rep.alphaStar = std::numeric_limits<double>::quiet_NaN();
  return rep;
}

CriticalExponentReport critical_exponent_study(const std::function<MetricMeasureSpace(int)>& builder,
                                               std::span<const int> levels, double p, const std::string& battery,
                                               const CriticalStudyOptions& options) {
  std::vector<MetricMeasureSpace> spaces;
  std::vector<SpectralData> spectra;
  spaces.reserve(levels.size());
  spectra.reserve(levels.size());
  for (int l : levels) {
    spaces.push_back(builder(l));
    spectra.push_back(spectral_decompose(spaces.back(), std::max(kDefaultCapacity, spaces.back().size())));
  }
  std::vector<StudyLevel> lv;
  for (std::size_t i = 0; i < spaces.size(); ++i) lv.push_back({&spaces[i], &spectra[i]});
  return critical_exponent_study(lv, p, battery, options);
}

ContinuityFit semigroup_besov_continuity_check(const MetricMeasureSpace& space, const SpectralData& d, double p,
                                               const Matrix& batch, std::span<const double> tGrid,
                                               const BesovOptions& options) {
  if (!(p > 1.0)) throw DomainError("semigroup_besov_continuity_check: p must be > 1");
  if (tGrid.empty()) throw DomainError("semigroup_besov_continuity_check: empty grid");
  if (options.checkRange) require_within(resolved_time_range(space), tGrid, "semigroup_besov_continuity_check");
  BesovOptions unchecked = options;
  unchecked.checkRange = false;
  ContinuityFit fit;
  fit.perTime.assign(tGrid.size(), 0.0);
  Vec norms(batch.rows());
  for (std::size_t f = 0; f < batch.rows(); ++f) norms[f] = lp_norm(batch.row(f), space.mu(), p);
  for (std::size_t ti = 0; ti < tGrid.size(); ++ti) {
    const Matrix smooth = apply_semigroup(d, tGrid[ti], batch);
    const auto profiles = heat_besov_profiles(space, d, smooth, p, tGrid, 0.5, unchecked);
    for (std::size_t f = 0; f < batch.rows(); ++f) {
      if (norms[f] == 0.0) {
        if (ti == 0) ++fit.skippedZero;
        continue;
      }
      const double q = std::sqrt(tGrid[ti]) * profiles[f].seminorm / norms[f];
      fit.perTime[ti] = std::max(fit.perTime[ti], q);
      if (q > fit.constant) {
        fit.constant = q;
        fit.witnessTime = tGrid[ti];
        fit.witnessFunction = f;
      }
    }
  }
  fit.stability = decade_growth(tGrid, fit.perTime);
  fit.decadeSpread = decade_stability(tGrid, fit.perTime);
  return fit;
}

}  // namespace dirbv
