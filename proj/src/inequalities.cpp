#include "dirbv/inequalities.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>

#include <fftw3.h>

#include "dirbv/bv.hpp"
#include "dirbv/kernels.hpp"
#include "row_plan.hpp"

namespace dirbv {

double sobolev_exponent(double p, double delta, double Q) {
  if (!(delta > 0.0 && delta < Q)) throw DomainError("sobolev_exponent: need 0 < delta < Q");
  if (!(p >= 1.0) || !(p * delta < Q)) throw DomainError("sobolev_exponent: need 1 <= p < Q/delta");
  return p * Q / (Q - p * delta);
}

double weak_lq_norm(const MetricMeasureSpace& space, std::span<const double> f, double q) {
  if (!(q > 0.0)) throw DomainError("weak_lq_norm: q must be positive");
  const std::size_t n = space.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return std::abs(f[a]) > std::abs(f[b]); });
  double best = 0.0, mass = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    mass += space.measure(order[k]);
    const double s = std::abs(f[order[k]]);
    // Evaluate once all vertices at this level are counted.
    if (k + 1 < n && std::abs(f[order[k + 1]]) == s) continue;
    best = std::max(best, s * std::pow(mass, 1.0 / q));
  }
  return best;
}

double weighted_median(const MetricMeasureSpace& space, std::span<const double> f) {
  const std::size_t n = space.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return f[a] < f[b] || (f[a] == f[b] && a < b); });
  const double half = 0.5 * space.total_measure();
  double mass = 0.0;
  for (std::size_t x : order) {
    mass += space.measure(x);
    if (mass >= half) return f[x];
  }
  return f[order.back()];
}

namespace {

Vec centered(const MetricMeasureSpace& space, std::span<const double> f) {
  const double m = weighted_median(space, f);
  Vec g(f.begin(), f.end());
  for (double& v : g) v -= m;
  return g;
}

void set_ratio(EmbeddingRecord& rec) {
  if (rec.rhs > 0.0) {
    rec.constant = rec.lhs / rec.rhs;
  } else if (rec.lhs > 0.0) {
    throw InvariantViolation("embedding check: right-hand side vanishes with lhs " + std::to_string(rec.lhs));
  } else {
    rec.constant = 0.0;
  }
}

double smaller_side(const MetricMeasureSpace& space, const VertexSet& e) {
  double in = 0.0;
  for (std::size_t x = 0; x < space.size(); ++x)
    if (e.contains(x)) in += space.measure(x);
  return std::min(in, space.total_measure() - in);
}

// Level s* attaining the weak norm.
double weak_witness(const MetricMeasureSpace& space, std::span<const double> f, double q) {
  double best = -1.0, level = 0.0;
  Vec vals;
  for (double v : f) vals.push_back(std::abs(v));
  std::sort(vals.begin(), vals.end());
  vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
  for (double s : vals) {
    double mass = 0.0;
    for (std::size_t x = 0; x < space.size(); ++x)
      if (std::abs(f[x]) >= s) mass += space.measure(x);
    const double v = s * std::pow(mass, 1.0 / q);
    if (v > best) {
      best = v;
      level = s;
    }
  }
  return level;
}

bool planar_lattice(const MetricMeasureSpace& space) {
  const auto& g = space.grid();
  return g && g->dim == 2 && !g->periodic;
}

// Pair mass through the correlation C(v) = sum_x 1_E(x) 1_{E^c}(x + v) on the
// zero-padded grid.
Vec lattice_pair_mass(const VertexSet& e, int side, double h, std::span<const double> rGrid) {
  const int m = 2 * side;
  const std::size_t total = static_cast<std::size_t>(m) * static_cast<std::size_t>(m);
  const int mh = m / 2 + 1;
  double* a = fftw_alloc_real(total);
  double* b = fftw_alloc_real(total);
  auto* fa = fftw_alloc_complex(static_cast<std::size_t>(m) * static_cast<std::size_t>(mh));
  auto* fb = fftw_alloc_complex(static_cast<std::size_t>(m) * static_cast<std::size_t>(mh));
  std::fill(a, a + total, 0.0);
  std::fill(b, b + total, 0.0);
  for (int j = 0; j < side; ++j)
    for (int i = 0; i < side; ++i) {
      const bool in = e.contains(static_cast<std::size_t>(i + side * j));
      (in ? a : b)[static_cast<std::size_t>(j) * m + i] = 1.0;
    }
  fftw_plan pa = fftw_plan_dft_r2c_2d(m, m, a, fa, FFTW_ESTIMATE);
  fftw_plan pb = fftw_plan_dft_r2c_2d(m, m, b, fb, FFTW_ESTIMATE);
  fftw_execute(pa);
  fftw_execute(pb);
  const std::size_t nc = static_cast<std::size_t>(m) * static_cast<std::size_t>(mh);
  for (std::size_t k = 0; k < nc; ++k) {
    const std::complex<double> x(fa[k][0], -fa[k][1]);
    const std::complex<double> y(fb[k][0], fb[k][1]);
    const std::complex<double> z = x * y;
    fa[k][0] = z.real();
    fa[k][1] = z.imag();
  }
  fftw_plan pc = fftw_plan_dft_c2r_2d(m, m, fa, a, FFTW_ESTIMATE);
  fftw_execute(pc);
  // Counts per squared offset length, rounded to integers.
  std::vector<std::pair<long, double>> byLen;
  for (int dj = -(side - 1); dj <= side - 1; ++dj)
    for (int di = -(side - 1); di <= side - 1; ++di) {
      const std::size_t idx = static_cast<std::size_t>((dj + m) % m) * m + static_cast<std::size_t>((di + m) % m);
      const double c = std::round(a[idx] / static_cast<double>(total));
      if (c > 0.0) byLen.emplace_back(static_cast<long>(di) * di + static_cast<long>(dj) * dj, c);
    }
  fftw_destroy_plan(pa);
  fftw_destroy_plan(pb);
  fftw_destroy_plan(pc);
  fftw_free(a);
  fftw_free(b);
  fftw_free(fa);
  fftw_free(fb);
  std::sort(byLen.begin(), byLen.end());
  const double cell = h * h;
  Vec out;
  for (double r : rGrid) {
    const double lim = (r / h) * (r / h) * (1.0 + 1e-12);
    double acc = 0.0;
    for (const auto& [len, c] : byLen) {
      if (static_cast<double>(len) > lim) break;
      acc += c;
    }
    out.push_back(acc * cell * cell);
  }
  return out;
}

}  // namespace

EmbeddingRecord weak_embedding_check(const MetricMeasureSpace& space, std::span<const double> f, double p,
                                     double delta, double Q, std::span<const double> rGrid) {
  if (rGrid.empty()) throw DomainError("weak_embedding_check: empty radius grid");
  EmbeddingRecord rec;
  rec.p = p;
  rec.delta = delta;
  rec.Q = Q;
  rec.q = sobolev_exponent(p, delta, Q);
  const Vec g = centered(space, f);
  rec.lhs = weak_lq_norm(space, g, rec.q);
  rec.witnessLevel = weak_witness(space, g, rec.q);
  Matrix batch(1, g.size());
  std::copy(g.begin(), g.end(), batch.data());
  const kernels::PairProfiles pp = kernels::parallel::metric_pair_profiles(space, batch, p, rGrid);
  rec.radii.assign(rGrid.begin(), rGrid.end());
  for (std::size_t i = 0; i < rGrid.size(); ++i) {
    const double v = std::pow(rGrid[i], -(delta + Q / p)) * std::pow(std::max(pp.plain(0, i), 0.0), 1.0 / p);
    rec.scaled.push_back(v);
    if (v > rec.rhs) {
      rec.rhs = v;
      rec.witnessRadius = rGrid[i];
    }
  }
  set_ratio(rec);
  return rec;
}

Vec boundary_pair_mass(const MetricMeasureSpace& space, const VertexSet& e, std::span<const double> rGrid,
                       std::size_t exactLimit, std::uint64_t seed) {
  const std::size_t n = space.size();
  if (e.empty() || e.count() == n) return Vec(rGrid.size(), 0.0);
  if (n > exactLimit && planar_lattice(space)) {
    return lattice_pair_mass(e, space.grid()->side, space.grid()->h, rGrid);
  }
  const std::vector<std::size_t> members = e.members();
  const detail::RowPlan plan = detail::plan_rows(members.size(), n <= exactLimit ? members.size() : 0, 512, seed);
  Vec radii(rGrid.begin(), rGrid.end());
  Matrix part(plan.rows.size(), radii.size(), 0.0);
  std::vector<std::size_t> idx(radii.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return radii[a] < radii[b]; });
#pragma omp parallel
  {
#pragma omp for schedule(dynamic, 8)
    for (std::size_t i = 0; i < plan.rows.size(); ++i) {
      const std::size_t x = members[plan.rows[i]];
      std::vector<std::pair<double, double>> out;
      for (std::size_t y = 0; y < n; ++y)
        if (!e.contains(y)) out.emplace_back(space.distance(x, y), space.measure(y));
      std::sort(out.begin(), out.end());
      std::size_t k = 0;
      double acc = 0.0;
      for (std::size_t r : idx) {
        const double lim = radii[r] * (1.0 + 1e-12);
        while (k < out.size() && out[k].first <= lim) acc += out[k++].second;
        part(i, r) = plan.weight[i] * space.measure(x) * acc;
      }
    }
  }
  Vec total(radii.size(), 0.0);
  for (std::size_t i = 0; i < plan.rows.size(); ++i)
    for (std::size_t r = 0; r < radii.size(); ++r) total[r] += part(i, r);
  return total;
}

EmbeddingRecord fractional_isoperimetry(const MetricMeasureSpace& space, const VertexSet& e, double delta, double Q,
                                        std::span<const double> rGrid) {
  if (!(delta > 0.0 && delta < Q)) throw DomainError("fractional_isoperimetry: need 0 < delta < Q");
  if (rGrid.empty()) throw DomainError("fractional_isoperimetry: empty radius grid");
  EmbeddingRecord rec;
  rec.p = 1.0;
  rec.delta = delta;
  rec.Q = Q;
  rec.q = Q / (Q - delta);
  rec.lhs = std::pow(smaller_side(space, e), (Q - delta) / Q);
  const Vec mass = boundary_pair_mass(space, e, rGrid);
  rec.radii.assign(rGrid.begin(), rGrid.end());
  for (std::size_t i = 0; i < rGrid.size(); ++i) {
    const double v = std::pow(rGrid[i], -(delta + Q)) * mass[i];
    rec.scaled.push_back(v);
    if (v > rec.rhs) {
      rec.rhs = v;
      rec.witnessRadius = rGrid[i];
    }
  }
  set_ratio(rec);
  return rec;
}

EmbeddingRecord bv_sobolev_check(const MetricMeasureSpace& space, std::span<const double> f, double Q) {
  if (!(Q > 1.0)) throw DomainError("bv_sobolev_check: Q must exceed 1");
  EmbeddingRecord rec;
  rec.p = 1.0;
  rec.delta = 1.0;
  rec.Q = Q;
  rec.q = Q / (Q - 1.0);
  rec.lhs = lp_norm(centered(space, f), space.mu(), rec.q);
  rec.rhs = coarea_bv(space, f).bvEnergy;
  set_ratio(rec);
  return rec;
}

EmbeddingRecord isoperimetric_check(const MetricMeasureSpace& space, const VertexSet& e, double Q) {
  if (!(Q > 1.0)) throw DomainError("isoperimetric_check: Q must exceed 1");
  EmbeddingRecord rec;
  rec.p = 1.0;
  rec.delta = 1.0;
  rec.Q = Q;
  rec.q = Q / (Q - 1.0);
  rec.lhs = std::pow(smaller_side(space, e), (Q - 1.0) / Q);
  rec.rhs = perimeter(space, e);
  set_ratio(rec);
  return rec;
}

// ----------------------------------------------------------------- rasters

std::vector<Point> koch_polygon(int iterations, double side) {
  if (iterations < 0) throw DomainError("koch_polygon: iterations must be >= 0");
  const double r = side / std::sqrt(3.0);
  std::vector<Point> poly;
  for (int k = 0; k < 3; ++k) {
    const double a = M_PI / 2.0 + 2.0 * M_PI * k / 3.0;
    poly.push_back({0.5 + r * std::cos(a), 0.5 + r * std::sin(a)});
  }
  const double c = std::cos(-M_PI / 3.0), s = std::sin(-M_PI / 3.0);
  for (int it = 0; it < iterations; ++it) {
    std::vector<Point> next;
    next.reserve(poly.size() * 4);
    for (std::size_t i = 0; i < poly.size(); ++i) {
      const Point p = poly[i];
      const Point q = poly[(i + 1) % poly.size()];
      const Point a{p[0] + (q[0] - p[0]) / 3.0, p[1] + (q[1] - p[1]) / 3.0};
      const Point b{p[0] + 2.0 * (q[0] - p[0]) / 3.0, p[1] + 2.0 * (q[1] - p[1]) / 3.0};
      const double dx = b[0] - a[0], dy = b[1] - a[1];
      // Counter-clockwise polygon: the outward side is to the right.
      const Point tip{a[0] + c * dx - s * dy, a[1] + s * dx + c * dy};
      next.push_back(p);
      next.push_back(a);
      next.push_back(tip);
      next.push_back(b);
    }
    poly = std::move(next);
  }
  return poly;
}

int koch_iterations(int resolution) {
  return static_cast<int>(std::ceil(std::log(static_cast<double>(resolution)) / std::log(3.0) - 1e-12));
}

VertexSet rasterize_polygon(std::span<const Point> polygon, int resolution) {
  if (resolution < 2) throw DomainError("rasterize_polygon: resolution must be >= 2");
  const auto side = static_cast<std::size_t>(resolution);
  const double h = 1.0 / (resolution - 1);
  VertexSet out(side * side);
  Vec xs;
  for (std::size_t j = 0; j < side; ++j) {
    const double y = static_cast<double>(j) * h;
    xs.clear();
    for (std::size_t k = 0; k < polygon.size(); ++k) {
      const Point& p = polygon[k];
      const Point& q = polygon[(k + 1) % polygon.size()];
      // Half-open rule so shared vertices are counted once.
      if ((p[1] <= y) != (q[1] <= y)) xs.push_back(p[0] + (y - p[1]) * (q[0] - p[0]) / (q[1] - p[1]));
    }
    std::sort(xs.begin(), xs.end());
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
      const auto lo = static_cast<long>(std::ceil(xs[k] / h));
      const auto hi = static_cast<long>(std::floor(xs[k + 1] / h));
      for (long i = std::max(0L, lo); i <= std::min(static_cast<long>(side) - 1, hi); ++i) {
        if (static_cast<double>(i) * h > xs[k] && static_cast<double>(i) * h < xs[k + 1])
          out.insert(static_cast<std::size_t>(i) + side * j);
      }
    }
  }
  return out;
}

VertexSet koch_snowflake_set(int resolution) {
  if (resolution < 129) throw DomainError("koch_snowflake_set: resolution below 129 does not resolve the fractal");
  const std::vector<Point> poly = koch_polygon(koch_iterations(resolution));
  return rasterize_polygon(poly, resolution);
}

VertexSet square_set(int resolution) {
  const std::vector<Point> sq{{0.25, 0.25}, {0.75, 0.25}, {0.75, 0.75}, {0.25, 0.75}};
  return rasterize_polygon(sq, resolution);
}

namespace {

// One-dimensional lower envelope of parabolas (Felzenszwalb and Huttenlocher).
void edt_1d(const double* f, double* d, std::size_t n, std::vector<std::size_t>& v, Vec& z) {
  const double inf = std::numeric_limits<double>::infinity();
  v.assign(n, 0);
  z.assign(n + 1, 0.0);
  std::size_t k = 0;
  std::size_t first = n;
  for (std::size_t q = 0; q < n; ++q) {
    if (f[q] < inf) {
      first = q;
      break;
    }
  }
  if (first == n) {
    for (std::size_t q = 0; q < n; ++q) d[q] = inf;
    return;
  }
  v[0] = first;
  z[0] = -inf;
  z[1] = inf;
  for (std::size_t q = first + 1; q < n; ++q) {
    if (!(f[q] < inf)) continue;
    const auto qd = static_cast<double>(q);
    double s;
    while (true) {
      const auto vk = static_cast<double>(v[k]);
      s = ((f[q] + qd * qd) - (f[v[k]] + vk * vk)) / (2.0 * qd - 2.0 * vk);
      if (s <= z[k] && k > 0) {
        --k;
        continue;
      }
      break;
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = inf;
  }
  k = 0;
  for (std::size_t q = 0; q < n; ++q) {
    while (z[k + 1] < static_cast<double>(q)) ++k;
    const double dq = static_cast<double>(q) - static_cast<double>(v[k]);
    d[q] = dq * dq + f[v[k]];
  }
}

}  // namespace

Vec distance_transform(const std::vector<std::uint8_t>& mask, int side) {
  const auto s = static_cast<std::size_t>(side);
  const double inf = std::numeric_limits<double>::infinity();
  Vec g(s * s);
  for (std::size_t k = 0; k < s * s; ++k) g[k] = mask[k] ? 0.0 : inf;
  Vec col(s), out(s);
  std::vector<std::size_t> v;
  Vec z;
  // Columns (fixed i, varying j), then rows.
  for (std::size_t i = 0; i < s; ++i) {
    for (std::size_t j = 0; j < s; ++j) col[j] = g[i + s * j];
    edt_1d(col.data(), out.data(), s, v, z);
    for (std::size_t j = 0; j < s; ++j) g[i + s * j] = out[j];
  }
  for (std::size_t j = 0; j < s; ++j) {
    edt_1d(g.data() + s * j, out.data(), s, v, z);
    std::copy(out.begin(), out.end(), g.begin() + static_cast<long>(s * j));
  }
  for (double& x : g) x = std::sqrt(x);
  return g;
}

NeighborhoodFit boundary_neighborhood_fit(const VertexSet& e, int resolution, std::span<const double> radii) {
  const auto s = static_cast<std::size_t>(resolution);
  if (e.size() != s * s) throw DomainError("boundary_neighborhood_fit: set does not match the raster");
  const double h = 1.0 / (resolution - 1);
  std::vector<std::uint8_t> mask(s * s, 0);
  for (std::size_t j = 0; j < s; ++j)
    for (std::size_t i = 0; i < s; ++i) {
      const std::size_t x = i + s * j;
      const bool in = e.contains(x);
      const bool cut = (i > 0 && e.contains(x - 1) != in) || (i + 1 < s && e.contains(x + 1) != in) ||
                       (j > 0 && e.contains(x - s) != in) || (j + 1 < s && e.contains(x + s) != in);
      mask[x] = cut ? 1 : 0;
    }
  const Vec dist = distance_transform(mask, resolution);
  Vec sorted;
  for (double d : dist)
    if (std::isfinite(d)) sorted.push_back((d + 0.5) * h);
  std::sort(sorted.begin(), sorted.end());
  NeighborhoodFit fit;
  fit.radii.assign(radii.begin(), radii.end());
  for (double r : radii) {
    const auto cnt = std::upper_bound(sorted.begin(), sorted.end(), r * (1.0 + 1e-12)) - sorted.begin();
    fit.masses.push_back(static_cast<double>(cnt) * h * h);
  }
  const LineFit lf = fit_loglog(fit.radii, fit.masses);
  fit.exponent = lf.slope;
  fit.residual = lf.residual;
  return fit;
}

KochStudy koch_study(std::span<const int> resolutions) {
  if (resolutions.size() < 2) throw DomainError("koch_study: need at least 2 resolutions");
  KochStudy study;
  study.m = std::log(4.0) / std::log(3.0);
  study.target = 2.0 - study.m;
  Vec constants;
  for (int res : resolutions) {
    KochLevel lv;
    lv.resolution = res;
    lv.iterations = koch_iterations(res);
    lv.h = 1.0 / (res - 1);
    const VertexSet snow = koch_snowflake_set(res);
    const VertexSet square = square_set(res);
    const Vec radii = geometric_grid(3.0 * lv.h, 1.0 / 9.0, 8.0);
    lv.exponent = boundary_neighborhood_fit(snow, res, radii).exponent;
    lv.squareExponent = boundary_neighborhood_fit(square, res, radii).exponent;

    const MetricMeasureSpace lattice = build_lattice(2, res, lv.h, static_cast<std::size_t>(res) * res);
    const EmbeddingRecord rec =
        fractional_isoperimetry(lattice, snow, study.target, 2.0, resolved_radius_grid(lattice, 8.0));
    lv.fracIsoConstant = rec.constant;
    lv.fracIsoWitness = rec.witnessRadius;
    lv.area = static_cast<double>(snow.count()) * lv.h * lv.h;
    constants.push_back(rec.constant);
    study.levels.push_back(lv);
  }
  study.fracIsoStability = spread(constants);
  return study;
}

}  // namespace dirbv
