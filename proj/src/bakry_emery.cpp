#include "dirbv/bakry_emery.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "dirbv/besov.hpp"
#include "dirbv/kernels.hpp"
#include "row_plan.hpp"

namespace dirbv {

const char* to_string(BEKind kind) {
  switch (kind) {
    case BEKind::weak: return "weak";
    case BEKind::quasi: return "quasi";
    case BEKind::hamilton: return "hamilton";
    case BEKind::kernelGradient: return "kernelGradient";
    case BEKind::pseudoPoincare: return "pseudoPoincare";
    case BEKind::crossTerm: return "crossTerm";
    case BEKind::riesz: return "riesz";
  }
  return "unknown";
}

namespace {

// Running sup with the documented tie order.
struct Best {
  double q = -1.0;
  std::size_t ti = 0;
  BEWitness w;

  void offer(double value, std::size_t f, std::size_t tIndex, double t, std::size_t x, std::size_t y) {
    const bool better = value > q || (value == q && std::tie(f, tIndex, x, y) < std::tie(w.function, ti, w.x, w.y));
    if (!better) return;
    q = value;
    ti = tIndex;
    w = {t, f, x, y};
  }
};

BEReport start(BEKind kind, std::span<const double> tGrid) {
  if (tGrid.empty()) throw DomainError(std::string(to_string(kind)) + ": empty time grid");
  for (double t : tGrid)
    if (!(t > 0.0)) throw DomainError(std::string(to_string(kind)) + ": times must be positive");
  BEReport r;
  r.kind = kind;
  r.grid.assign(tGrid.begin(), tGrid.end());
  r.perTime.assign(tGrid.size(), 0.0);
  return r;
}

void finish(BEReport& r, const Best& best) {
  r.constant = std::max(best.q, 0.0);
  r.witness = best.w;
  r.stability = decade_growth(r.grid, r.perTime);
  r.decadeSpread = decade_stability(r.grid, r.perTime);
}

Matrix gradients(const MetricMeasureSpace& space, const Matrix& batch) {
  Matrix g(batch.rows(), batch.cols());
  for (std::size_t f = 0; f < batch.rows(); ++f) {
    const Vec row = kernels::parallel::carre_du_champ(space, batch.row(f));
    std::copy(row.begin(), row.end(), g.row(f).begin());
  }
  return g;
}

Vec sobolev_norms(const MetricMeasureSpace& space, const Matrix& grads, double p) {
  Vec out(grads.rows());
  for (std::size_t f = 0; f < grads.rows(); ++f) out[f] = lp_norm(grads.row(f), space.mu(), p);
  return out;
}

double max_of(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, x);
  return m;
}

// |grad ln K(., y)|(x) from a kernel column, or a negative code when the
// neighborhood is unusable: -1 nonpositive, -2 below the precision floor.
double log_gradient(const MetricMeasureSpace& space, std::size_t x, const auto& column, double floor) {
  const double kx = column(x);
  bool nonpositive = kx <= 0.0;
  bool unresolved = kx < floor;
  double acc = 0.0;
  const double lx = std::log(std::max(kx, 1e-300));
  for (const Neighbor& nb : space.neighbors(x)) {
    const double kz = column(nb.index);
    nonpositive = nonpositive || kz <= 0.0;
    unresolved = unresolved || kz < floor;
    const double dl = std::log(std::max(kz, 1e-300)) - lx;
    acc += nb.c * dl * dl;
  }
  if (nonpositive) return -1.0;
  if (unresolved) return -2.0;
  return std::sqrt(acc / (2.0 * space.measure(x)));
}

double plain_gradient(const MetricMeasureSpace& space, std::size_t x, const auto& column) {
  double acc = 0.0;
  const double kx = column(x);
  for (const Neighbor& nb : space.neighbors(x)) {
    const double dk = column(nb.index) - kx;
    acc += nb.c * dk * dk;
  }
  return std::sqrt(acc / (2.0 * space.measure(x)));
}

// Relative precision floor of spectral kernel values.
constexpr double kKernelFloor = 1e-10;

std::vector<std::size_t> columns(std::size_t n, std::size_t exactLimit, std::uint64_t seed) {
  if (n <= exactLimit) {
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;
    return all;
  }
  Rng rng(seed);
  return rng.sample_without_replacement(n, exactLimit);
}

Vec ball_masses(const MetricMeasureSpace& space, double r) {
  Vec m(space.size());
#pragma omp parallel for schedule(static)
  for (std::size_t x = 0; x < space.size(); ++x) m[x] = ball_measure(space, x, r);
  return m;
}

double hamilton_quotient(double t, double g, double dist) { return t * g * g / (1.0 + dist * dist / t); }

}  // namespace

BEReport weak_be_constant(const MetricMeasureSpace& space, const SpectralData& d, std::span<const double> tGrid,
                          const Matrix& battery) {
  BEReport r = start(BEKind::weak, tGrid);
  Vec norms(battery.rows());
  for (std::size_t f = 0; f < battery.rows(); ++f) norms[f] = linf_norm(battery.row(f));
  const double scale = max_of(norms);
  Best best;
  for (std::size_t ti = 0; ti < tGrid.size(); ++ti) {
    const double t = tGrid[ti];
    const Matrix grads = gradients(space, apply_semigroup(d, t, battery));
    for (std::size_t f = 0; f < battery.rows(); ++f) {
      const double den = norms[f] * norms[f];
      if (!(den > kGuard * scale * scale)) {
        ++r.skipped;
        continue;
      }
      const auto g = grads.row(f);
      const auto x = static_cast<std::size_t>(std::max_element(g.begin(), g.end()) - g.begin());
      const double q = t * g[x] * g[x] / den;
      ++r.evaluated;
      r.perTime[ti] = std::max(r.perTime[ti], q);
      best.offer(q, f, ti, t, x, x);
    }
  }
  finish(r, best);
  return r;
}

BEReport quasi_be_constant(const MetricMeasureSpace& space, const SpectralData& d, std::span<const double> tGrid,
                           const Matrix& battery) {
  BEReport r = start(BEKind::quasi, tGrid);
  const Matrix grads = gradients(space, battery);
  Best best;
  for (std::size_t ti = 0; ti < tGrid.size(); ++ti) {
    const double t = tGrid[ti];
    const Matrix num = gradients(space, apply_semigroup(d, t, battery));
    const Matrix den = apply_semigroup(d, t, grads);
    for (std::size_t f = 0; f < battery.rows(); ++f) {
      const double scale = max_of(den.row(f));
      if (scale == 0.0) {
        ++r.skipped;
        continue;
      }
      for (std::size_t x = 0; x < space.size(); ++x) {
        if (den(f, x) < kGuard * scale) {
          ++r.skipped;
          continue;
        }
        const double q = num(f, x) / den(f, x);
        ++r.evaluated;
        r.perTime[ti] = std::max(r.perTime[ti], q);
        best.offer(q, f, ti, t, x, x);
      }
    }
  }
  finish(r, best);
  return r;
}

BEReport hamilton_check(const MetricMeasureSpace& space, const SpectralData& d, std::span<const double> tGrid,
                        std::size_t exactLimit, std::uint64_t seed) {
  BEReport r = start(BEKind::hamilton, tGrid);
  r.exactLimit = exactLimit;
  r.seed = seed;
  const std::size_t n = space.size();
  const std::vector<std::size_t> ys = columns(n, exactLimit, seed);
  Best best;
  for (std::size_t ti = 0; ti < tGrid.size(); ++ti) {
    const double t = tGrid[ti];
    const Matrix k = kernels::parallel::heat_kernel_matrix(d.phi, d.eigenvalues, t);
    // Per-column partial results, reduced in order below.
    std::vector<Best> colBest(ys.size());
    std::vector<std::size_t> excl(ys.size(), 0), unres(ys.size(), 0), eval(ys.size(), 0);
#pragma omp parallel for schedule(dynamic, 4)
    for (std::size_t j = 0; j < ys.size(); ++j) {
      const std::size_t y = ys[j];
      auto column = [&](std::size_t x) { return k(x, y); };
      double top = 0.0;
      for (std::size_t x = 0; x < n; ++x) top = std::max(top, k(x, y));
      const double floor = kKernelFloor * top;
      for (std::size_t x = 0; x < n; ++x) {
        const double g = log_gradient(space, x, column, floor);
        if (g == -1.0) {
          ++excl[j];
          continue;
        }
        if (g == -2.0) {
          ++unres[j];
          continue;
        }
        ++eval[j];
        colBest[j].offer(hamilton_quotient(t, g, space.distance(x, y)), 0, ti, t, x, y);
      }
    }
    for (std::size_t j = 0; j < ys.size(); ++j) {
      r.excluded += excl[j];
      r.unresolved += unres[j];
      r.evaluated += eval[j];
      if (colBest[j].q < 0.0) continue;
      r.perTime[ti] = std::max(r.perTime[ti], colBest[j].q);
      best.offer(colBest[j].q, 0, ti, t, colBest[j].w.x, colBest[j].w.y);
    }
  }
  const double total = static_cast<double>(r.evaluated + r.excluded);
  r.degraded = total > 0.0 && static_cast<double>(r.excluded) > 0.01 * total;
  finish(r, best);
  return r;
}

BEReport kernel_gradient_bound(const MetricMeasureSpace& space, const SpectralData& d, std::span<const double> tGrid,
                               std::size_t exactLimit, std::uint64_t seed) {
  BEReport r = start(BEKind::kernelGradient, tGrid);
  r.exactLimit = exactLimit;
  r.seed = seed;
  const std::size_t n = space.size();
  const std::vector<std::size_t> ys = columns(n, exactLimit, seed);
  struct Sample {
    double g;   // sqrt(t) |grad p| sqrt(mu(B_x) mu(B_y))
    double u;   // d^2 / t
    std::size_t ti, x, y;
  };
  std::vector<Sample> samples;
  for (std::size_t ti = 0; ti < tGrid.size(); ++ti) {
    const double t = tGrid[ti];
    const Matrix k = kernels::parallel::heat_kernel_matrix(d.phi, d.eigenvalues, t);
    const Vec mb = ball_masses(space, std::sqrt(t));
    for (std::size_t y : ys) {
      auto column = [&](std::size_t x) { return k(x, y); };
      double top = 0.0;
      for (std::size_t x = 0; x < n; ++x) top = std::max(top, k(x, y));
      const double floor = kKernelFloor * top;
      for (std::size_t x = 0; x < n; ++x) {
        bool low = k(x, y) < floor;
        for (const Neighbor& nb : space.neighbors(x)) low = low || k(nb.index, y) < floor;
        if (low) {
          ++r.unresolved;
          continue;
        }
        const double g = plain_gradient(space, x, column) * std::sqrt(t * mb[x] * mb[y]);
        const double dist = space.distance(x, y);
        ++r.evaluated;
        if (g > 0.0) samples.push_back({g, dist * dist / t, ti, x, y});
      }
    }
  }
  Vec us, logs;
  for (const Sample& s : samples) {
    us.push_back(-s.u);
    logs.push_back(std::log(s.g));
  }
  const LineFit fit = fit_line(us, logs);
  r.rate = std::max(0.0, fit.slope / 2.0);
  Best best;
  for (const Sample& s : samples) {
    const double q = s.g * std::exp(r.rate * s.u);
    r.perTime[s.ti] = std::max(r.perTime[s.ti], q);
    best.offer(q, 0, s.ti, tGrid[s.ti], s.x, s.y);
  }
  finish(r, best);
  return r;
}

BEReport pseudo_poincare_check(const MetricMeasureSpace& space, const SpectralData& d, double p,
                               const Matrix& battery, std::span<const double> tGrid) {
  if (!(p >= 1.0)) throw DomainError("pseudo_poincare_check: p must be >= 1");
  BEReport r = start(BEKind::pseudoPoincare, tGrid);
  r.p = p;
  const Vec sob = sobolev_norms(space, gradients(space, battery), p);
  const double scale = max_of(sob);
  Best best;
  Vec diff(space.size());
  for (std::size_t ti = 0; ti < tGrid.size(); ++ti) {
    const double t = tGrid[ti];
    const Matrix pt = apply_semigroup(d, t, battery);
    for (std::size_t f = 0; f < battery.rows(); ++f) {
      if (!(sob[f] > kGuard * scale)) {
        ++r.skipped;
        continue;
      }
      for (std::size_t x = 0; x < space.size(); ++x) diff[x] = pt(f, x) - battery(f, x);
      const double q = lp_norm(diff, space.mu(), p) / (std::sqrt(t) * sob[f]);
      ++r.evaluated;
      r.perTime[ti] = std::max(r.perTime[ti], q);
      best.offer(q, f, ti, t, 0, 0);
    }
  }
  finish(r, best);
  return r;
}

BEReport cross_term_check(const MetricMeasureSpace& space, const SpectralData& d, double p, const Matrix& battery,
                          std::span<const double> tGrid, std::size_t exactLimit, std::uint64_t seed) {
  if (!(p > 1.0)) throw DomainError("cross_term_check: p must be > 1");
  BEReport r = start(BEKind::crossTerm, tGrid);
  r.p = p;
  r.exactLimit = exactLimit;
  r.seed = seed;
  const Vec sob = sobolev_norms(space, gradients(space, battery), p);
  const double scale = max_of(sob);
  const detail::RowPlan plan = detail::plan_rows(space.size(), exactLimit, 512, seed);
  Best best;
  for (std::size_t ti = 0; ti < tGrid.size(); ++ti) {
    const double t = tGrid[ti];
    const Matrix k = plan.sampled ? kernels::parallel::heat_kernel_rows(d.phi, d.eigenvalues, t, plan.rows)
                                  : kernels::parallel::heat_kernel_matrix(d.phi, d.eigenvalues, t);
    const Matrix pt = apply_semigroup(d, t, battery);
    const Matrix sums = kernels::parallel::kernel_row_sums(k, plan.rows, space.mu(), pt, battery, p);
    for (std::size_t f = 0; f < battery.rows(); ++f) {
      if (!(sob[f] > kGuard * scale)) {
        ++r.skipped;
        continue;
      }
      double acc = 0.0;
      for (std::size_t i = 0; i < plan.rows.size(); ++i) acc += plan.weight[i] * space.measure(plan.rows[i]) * sums(f, i);
      const double q = std::pow(std::max(acc, 0.0), 1.0 / p) / (std::sqrt(t) * sob[f]);
      ++r.evaluated;
      r.perTime[ti] = std::max(r.perTime[ti], q);
      best.offer(q, f, ti, t, 0, 0);
    }
  }
  finish(r, best);
  return r;
}

BEReport riesz_check(const MetricMeasureSpace& space, const SpectralData& d, double p, const Matrix& battery) {
  if (!(p > 1.0)) throw DomainError("riesz_check: p must be > 1");
  BEReport r;
  r.kind = BEKind::riesz;
  r.p = p;
  const Vec sob = sobolev_norms(space, gradients(space, battery), p);
  const double scale = max_of(sob);
  Best best;
  r.minRatio = std::numeric_limits<double>::infinity();
  for (std::size_t f = 0; f < battery.rows(); ++f) {
    if (!(sob[f] > kGuard * scale)) {
      ++r.skipped;
      continue;
    }
    const Vec s = sqrt_generator_apply(d, battery.row(f));
    const double q = lp_norm(s, space.mu(), p) / sob[f];
    ++r.evaluated;
    r.minRatio = std::min(r.minRatio, q);
    best.offer(q, f, 0, 0.0, 0, 0);
  }
  r.constant = std::max(best.q, 0.0);
  r.witness = best.w;
  if (r.evaluated == 0) r.minRatio = 0.0;
  r.spread = r.minRatio > 0.0 ? r.constant / r.minRatio : 1.0;
  return r;
}

double reevaluate_witness(const MetricMeasureSpace& space, const SpectralData& d, const BEReport& report,
                          const Matrix& battery) {
  const BEWitness& w = report.witness;
  const double t = w.t;
  auto fn = [&] {
    const auto row = battery.row(w.function);
    return Vec(row.begin(), row.end());
  };
  switch (report.kind) {
    case BEKind::weak: {
      const Vec f = fn();
      const Vec g = carre_du_champ(space, apply_semigroup(d, t, f));
      const double nrm = linf_norm(f);
      return t * g[w.x] * g[w.x] / (nrm * nrm);
    }
    case BEKind::quasi: {
      const Vec f = fn();
      const Vec num = carre_du_champ(space, apply_semigroup(d, t, f));
      const Vec den = apply_semigroup(d, t, carre_du_champ(space, f));
      return num[w.x] / den[w.x];
    }
    case BEKind::hamilton: {
      auto column = [&](std::size_t x) { return heat_kernel(d, t, x, w.y); };
      const double g = log_gradient(space, w.x, column, 0.0);
      return hamilton_quotient(t, g, space.distance(w.x, w.y));
    }
    case BEKind::kernelGradient: {
      auto column = [&](std::size_t x) { return heat_kernel(d, t, x, w.y); };
      const double dist = space.distance(w.x, w.y);
      const double mb = ball_measure(space, w.x, std::sqrt(t)) * ball_measure(space, w.y, std::sqrt(t));
      return plain_gradient(space, w.x, column) * std::sqrt(t * mb) * std::exp(report.rate * dist * dist / t);
    }
    case BEKind::pseudoPoincare: {
      const Vec f = fn();
      Vec diff = apply_semigroup(d, t, f);
      for (std::size_t x = 0; x < diff.size(); ++x) diff[x] -= f[x];
      return lp_norm(diff, space.mu(), report.p) /
             (std::sqrt(t) * lp_norm(carre_du_champ(space, f), space.mu(), report.p));
    }
    case BEKind::crossTerm: {
      const Vec f = fn();
      const Vec pf = apply_semigroup(d, t, f);
      const detail::RowPlan plan = detail::plan_rows(space.size(), report.exactLimit, 512, report.seed);
      double acc = 0.0;
      for (std::size_t i = 0; i < plan.rows.size(); ++i) {
        const std::size_t x = plan.rows[i];
        double s = 0.0;
        for (std::size_t y = 0; y < space.size(); ++y)
          s += heat_kernel(d, t, x, y) * kernels::abs_pow(pf[x] - f[y], report.p) * space.measure(y);
        acc += plan.weight[i] * space.measure(x) * s;
      }
      return std::pow(acc, 1.0 / report.p) /
             (std::sqrt(t) * lp_norm(carre_du_champ(space, f), space.mu(), report.p));
    }
    case BEKind::riesz: {
      const Vec f = fn();
      return lp_norm(sqrt_generator_apply(d, f), space.mu(), report.p) /
             lp_norm(carre_du_champ(space, f), space.mu(), report.p);
    }
  }
  return 0.0;
}

}  // namespace dirbv
