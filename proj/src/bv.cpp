#include "dirbv/bv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dirbv/cover.hpp"

namespace dirbv {

namespace {

// Open-ball membership shared by the Hausdorff and Minkowski contents.
bool strictly_within(double d, double r) { return d < r * (1.0 - 1e-12); }

// P({f > s}) with the carre du champ of the indicator evaluated per vertex.
double level_perimeter(const MetricMeasureSpace& space, std::span<const double> f, double s) {
  double total = 0.0;
  for (std::size_t x = 0; x < space.size(); ++x) {
    const bool in = f[x] > s;
    double acc = 0.0;
    for (const Neighbor& nb : space.neighbors(x))
      if ((f[nb.index] > s) != in) acc += nb.c;
    if (acc > 0.0) total += space.measure(x) * std::sqrt(acc / (2.0 * space.measure(x)));
  }
  return total;
}

}  // namespace

double perimeter(const MetricMeasureSpace& space, const VertexSet& e) {
  if (e.size() != space.size()) throw DomainError("perimeter: set size does not match space");
  const Vec ind = e.indicator();
  return level_perimeter(space, ind, 0.5);
}

double sobolev_seminorm(const MetricMeasureSpace& space, std::span<const double> f, double p) {
  if (!(p >= 1.0)) throw DomainError("sobolev_seminorm: p must be >= 1");
  const Vec g = carre_du_champ(space, f);
  return lp_norm(g, space.mu(), p);
}

CoareaReport coarea_bv(const MetricMeasureSpace& space, std::span<const double> f) {
  if (f.size() != space.size()) throw DomainError("coarea_bv: function length does not match space");
  for (double v : f)
    if (!std::isfinite(v)) throw DomainError("coarea_bv: function values must be finite");
  CoareaReport rep;
  rep.levels.assign(f.begin(), f.end());
  std::sort(rep.levels.begin(), rep.levels.end());
  rep.levels.erase(std::unique(rep.levels.begin(), rep.levels.end()), rep.levels.end());
  const std::size_t gaps = rep.levels.empty() ? 0 : rep.levels.size() - 1;
  rep.gaps.resize(gaps);
  rep.perimeters.resize(gaps);
#pragma omp parallel for schedule(dynamic, 4)
  for (std::size_t k = 0; k < gaps; ++k) {
    rep.gaps[k] = rep.levels[k + 1] - rep.levels[k];
    const double mid = rep.levels[k] + 0.5 * rep.gaps[k];
    rep.perimeters[k] = level_perimeter(space, f, mid);
  }
  // Terms are summed in ascending order so that f and -f (reversed levels,
  // complementary sets) give bit-identical energies.
  Vec terms(gaps);
  for (std::size_t k = 0; k < gaps; ++k) terms[k] = rep.gaps[k] * rep.perimeters[k];
  std::sort(terms.begin(), terms.end());
  for (double t : terms) rep.bvEnergy += t;
  rep.sobolevEnergy = sobolev_seminorm(space, f, 1.0);
  rep.ratio = rep.sobolevEnergy > 0.0 ? rep.bvEnergy / rep.sobolevEnergy : 1.0;
  return rep;
}

RelaxedBV relaxed_bv(const MetricMeasureSpace& space, std::span<const double> f, std::span<const double> epsilons,
                     bool checkRange) {
  RelaxedBV rep;
  rep.direct = sobolev_seminorm(space, f, 1.0);
  rep.value = rep.direct;
  rep.epsilons.assign(epsilons.begin(), epsilons.end());
  if (epsilons.empty()) return rep;
  const RelaxationEnergy r = relaxation_energy(space, f, epsilons, 1.0, checkRange);
  rep.energies = r.energies;
  for (std::size_t i = 0; i < r.energies.size(); ++i) {
    if (r.energies[i] < rep.value) {
      rep.value = r.energies[i];
      rep.argminEpsilon = epsilons[i];
    }
  }
  return rep;
}

Vec boundary_density(const MetricMeasureSpace& space, const VertexSet& e, std::span<const double> rGrid) {
  if (rGrid.empty()) throw DomainError("boundary_density: empty radius grid");
  const std::size_t n = space.size();
  Vec out(n, 0.0);
  if (e.empty() || e.count() == n) return out;
  Vec radii(rGrid.begin(), rGrid.end());
  std::sort(radii.begin(), radii.end());
  // Radii ascend, so vertices away from the boundary stop after one scan.
#pragma omp parallel for schedule(dynamic, 16)
  for (std::size_t x = 0; x < n; ++x) {
    double worst = 0.5;
    for (double r : radii) {
      const double lim = r * (1.0 + 1e-12);
      double in = 0.0, ball = 0.0;
      for (std::size_t y = 0; y < n; ++y) {
        if (space.distance(x, y) <= lim) {
          ball += space.measure(y);
          if (e.contains(y)) in += space.measure(y);
        }
      }
      worst = std::min(worst, std::min(in, ball - in) / ball);
      if (worst == 0.0) break;
    }
    out[x] = worst;
  }
  return out;
}

VertexSet measure_theoretic_boundary(const MetricMeasureSpace& space, const VertexSet& e, double alpha,
                                     std::span<const double> rGrid) {
  if (!(alpha > 0.0 && alpha <= 0.5)) throw DomainError("measure_theoretic_boundary: alpha must lie in (0, 1/2]");
  const Vec m = boundary_density(space, e, rGrid);
  return VertexSet::from_predicate(space.size(), [&](std::size_t x) { return m[x] > alpha; });
}

VertexSet inner_vertex_boundary(const MetricMeasureSpace& space, const VertexSet& e) {
  VertexSet out(space.size());
  for (std::size_t x = 0; x < space.size(); ++x) {
    if (!e.contains(x)) continue;
    for (const Neighbor& nb : space.neighbors(x)) {
      if (!e.contains(nb.index)) {
        out.insert(x);
        break;
      }
    }
  }
  return out;
}

namespace {

double greedy_content(const MetricMeasureSpace& space, std::span<const std::size_t> scan, double rho,
                      std::size_t* centerCount) {
  std::vector<std::size_t> centers;
  for (std::size_t x : scan) {
    bool covered = false;
    for (std::size_t c : centers) {
      if (strictly_within(space.distance(x, c), rho)) {
        covered = true;
        break;
      }
    }
    if (!covered) centers.push_back(x);
  }
  double total = 0.0;
  for (std::size_t c : centers) {
    double mass = 0.0;
    for (std::size_t y = 0; y < space.size(); ++y)
      if (strictly_within(space.distance(c, y), rho)) mass += space.measure(y);
    total += mass / rho;
  }
  if (centerCount != nullptr) *centerCount = centers.size();
  return total;
}

}  // namespace

HausdorffContent hausdorff_content(const MetricMeasureSpace& space, const VertexSet& a,
                                   std::span<const double> epsScales, bool checkRange) {
  if (epsScales.empty()) throw DomainError("hausdorff_content: empty scale list");
  if (checkRange) require_within(resolved_radius_range(space), epsScales, "hausdorff_content");
  HausdorffContent rep;
  rep.scales.assign(epsScales.begin(), epsScales.end());
  const std::vector<std::size_t> forward = a.members();
  const std::vector<std::size_t> backward(forward.rbegin(), forward.rend());
  rep.values.assign(epsScales.size(), 0.0);
  rep.reverseValues.assign(epsScales.size(), 0.0);
  rep.centers.assign(epsScales.size(), 0);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t i = 0; i < epsScales.size(); ++i) {
    const double rho = epsScales[i] / 2.0;
    rep.values[i] = greedy_content(space, forward, rho, &rep.centers[i]);
    rep.reverseValues[i] = greedy_content(space, backward, rho, nullptr);
  }
  for (std::size_t i = 0; i < epsScales.size(); ++i) {
    const double top = std::max(rep.values[i], rep.reverseValues[i]);
    if (top > 0.0) rep.slack = std::max(rep.slack, std::abs(rep.values[i] - rep.reverseValues[i]) / top);
  }
  const auto smallest = static_cast<std::size_t>(std::min_element(epsScales.begin(), epsScales.end()) - epsScales.begin());
  rep.headline = rep.values[smallest];
  return rep;
}

MinkowskiContent minkowski_content(const MetricMeasureSpace& space, const VertexSet& a, std::span<const double> rGrid) {
  if (rGrid.empty()) throw DomainError("minkowski_content: empty radius grid");
  MinkowskiContent rep;
  rep.radii.assign(rGrid.begin(), rGrid.end());
  const std::size_t n = space.size();
  const std::vector<std::size_t> members = a.members();
  Vec dA(n, std::numeric_limits<double>::infinity());
#pragma omp parallel for schedule(static)
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y : members) dA[x] = std::min(dA[x], space.distance(x, y));
  rep.value = std::numeric_limits<double>::infinity();
  for (double r : rGrid) {
    double mass = 0.0;
    for (std::size_t x = 0; x < n; ++x)
      if (strictly_within(dA[x], r)) mass += space.measure(x);
    rep.values.push_back(mass / r);
    if (mass / r < rep.value) {
      rep.value = mass / r;
      rep.argminRadius = r;
    }
  }
  return rep;
}

HausdorffPerimeterCheck check_hausdorff_perimeter(const MetricMeasureSpace& space, const VertexSet& e,
                                                  std::span<const double> alphas, std::span<const double> rGrid,
                                                  std::span<const double> epsScales) {
  HausdorffPerimeterCheck rep;
  rep.perimeter = perimeter(space, e);
  rep.alphas.assign(alphas.begin(), alphas.end());
  for (double alpha : alphas)
    if (!(alpha > 0.0 && alpha <= 0.5)) throw DomainError("check_hausdorff_perimeter: alpha must lie in (0, 1/2]");
  const Vec m = boundary_density(space, e, rGrid);
  for (double alpha : alphas) {
    const VertexSet b = VertexSet::from_predicate(space.size(), [&](std::size_t x) { return m[x] > alpha; });
    rep.boundarySizes.push_back(b.count());
    if (b.empty()) {
      rep.contents.push_back(0.0);
      rep.ratios.push_back(0.0);
      continue;
    }
    if (rep.perimeter == 0.0) {
      throw InvariantViolation("check_hausdorff_perimeter: zero perimeter with a nonempty alpha-boundary");
    }
    const HausdorffContent h = hausdorff_content(space, b, epsScales, false);
    rep.contents.push_back(h.headline);
    rep.ratios.push_back(alpha * h.headline / rep.perimeter);
    rep.C = std::max(rep.C, rep.ratios.back());
    rep.worstSlack = std::max(rep.worstSlack, h.slack);
  }
  return rep;
}

LeibnizReport leibniz_check(const MetricMeasureSpace& space, std::size_t trials, std::uint64_t seed) {
  const std::size_t n = space.size();
  Rng rng(seed);
  LeibnizReport rep;
  Vec u(n), v(n), eta(n), w(n), diff(n);
  for (std::size_t t = 0; t < trials; ++t) {
    for (std::size_t x = 0; x < n; ++x) {
      u[x] = rng.uniform(-1.0, 1.0);
      v[x] = rng.uniform(-1.0, 1.0);
    }
    const std::size_t a = rng.index(n);
    const double radius = rng.uniform(0.2, 0.5) * space.diameter();
    for (std::size_t x = 0; x < n; ++x) {
      eta[x] = std::clamp(1.0 - space.distance(a, x) / radius, 0.0, 1.0);
      w[x] = eta[x] * u[x] + (1.0 - eta[x]) * v[x];
    }
    const Vec gradEta = carre_du_champ(space, eta);
    double cross = 0.0;
    for (std::size_t x = 0; x < n; ++x) cross += std::abs(u[x] - v[x]) * gradEta[x] * space.measure(x);
    const double lhs = coarea_bv(space, w).bvEnergy;
    const double rhs = coarea_bv(space, u).bvEnergy + coarea_bv(space, v).bvEnergy + cross;
    ++rep.trials;
    if (lhs > rhs) ++rep.exactFailures;
    if (rhs > 0.0) rep.kappa = std::max(rep.kappa, lhs / rhs);
  }
  return rep;
}

ComparabilityReport comparability_check(const MetricMeasureSpace& space, const Matrix& batch) {
  ComparabilityReport rep;
  std::size_t maxDeg = 0;
  for (std::size_t x = 0; x < space.size(); ++x) maxDeg = std::max(maxDeg, space.neighbors(x).size());
  rep.bound = std::sqrt(static_cast<double>(maxDeg));
  rep.lower = std::numeric_limits<double>::infinity();
  rep.upper = 0.0;
  for (std::size_t f = 0; f < batch.rows(); ++f) {
    const CoareaReport c = coarea_bv(space, batch.row(f));
    if (c.sobolevEnergy == 0.0) {
      if (c.bvEnergy != 0.0) rep.holds = false;
      continue;
    }
    rep.lower = std::min(rep.lower, c.ratio);
    rep.upper = std::max(rep.upper, c.ratio);
  }
  if (rep.upper == 0.0) rep.lower = rep.upper = 1.0;
  // Both sides are sums of square roots; allow rounding in the last digits.
  if (rep.lower < 1.0 - 1e-12 || rep.upper > rep.bound * (1.0 + 1e-12)) rep.holds = false;
  return rep;
}

}  // namespace dirbv
