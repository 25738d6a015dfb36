#include "dirbv/space.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <queue>
#include <sstream>

#include "dirbv/kernels.hpp"

namespace dirbv {

// ------------------------------------------------------------------ Metric

Metric Metric::dense(std::size_t n, std::vector<double> table) {
  if (table.size() != n * n) throw DomainError("dense metric: table size is not n*n");
  Metric m;
  m.kind_ = Kind::Dense;
  m.n_ = n;
  m.table_ = std::move(table);
  return m;
}

Metric Metric::euclidean(int dim, std::vector<double> coords) {
  if (dim <= 0 || coords.size() % static_cast<std::size_t>(dim) != 0) {
    throw DomainError("euclidean metric: coordinate array does not match dimension");
  }
  Metric m;
  m.kind_ = Kind::Euclidean;
  m.dim_ = dim;
  m.n_ = coords.size() / static_cast<std::size_t>(dim);
  m.table_ = std::move(coords);
  return m;
}

Metric Metric::torus(int dim, std::vector<double> coords, double period) {
  Metric m = euclidean(dim, std::move(coords));
  if (!(period > 0.0)) throw DomainError("torus metric: period must be positive");
  m.kind_ = Kind::Torus;
  m.period_ = period;
  return m;
}

double Metric::operator()(std::size_t x, std::size_t y) const {
  if (kind_ == Kind::Dense) return table_[x * n_ + y];
  const auto d = static_cast<std::size_t>(dim_);
  const double* a = table_.data() + x * d;
  const double* b = table_.data() + y * d;
  double s = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    double delta = std::abs(a[k] - b[k]);
    if (kind_ == Kind::Torus) delta = std::min(delta, period_ - delta);
    s += delta * delta;
  }
  return std::sqrt(s);
}

void Metric::row(std::size_t x, std::span<double> out) const {
  if (kind_ == Kind::Dense) {
    std::copy_n(table_.data() + x * n_, n_, out.begin());
    return;
  }
  for (std::size_t y = 0; y < n_; ++y) out[y] = (*this)(x, y);
}

// --------------------------------------------------------------- VertexSet

VertexSet VertexSet::from_indices(std::size_t n, std::span<const std::size_t> idx) {
  VertexSet s(n);
  for (std::size_t i : idx) {
    if (i >= n) throw DomainError("VertexSet: index out of range");
    s.bits_[i] = 1;
  }
  return s;
}

std::size_t VertexSet::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

VertexSet VertexSet::complement() const {
  VertexSet c(bits_.size());
  for (std::size_t i = 0; i < bits_.size(); ++i) c.bits_[i] = bits_[i] ? 0 : 1;
  return c;
}

Vec VertexSet::indicator() const {
  Vec v(bits_.size());
  for (std::size_t i = 0; i < bits_.size(); ++i) v[i] = bits_[i] ? 1.0 : 0.0;
  return v;
}

std::vector<std::size_t> VertexSet::members() const {
  std::vector<std::size_t> m;
  for (std::size_t i = 0; i < bits_.size(); ++i)
    if (bits_[i]) m.push_back(i);
  return m;
}

bool VertexSet::subset_of(const VertexSet& other) const {
  for (std::size_t i = 0; i < bits_.size(); ++i)
    if (bits_[i] && !other.bits_[i]) return false;
  return true;
}

// ------------------------------------------------------ MetricMeasureSpace

MetricMeasureSpace::MetricMeasureSpace(std::string name, Vec mu, std::span<const Edge> edges, Metric metric,
                                       std::vector<double> coords, int coordDim, std::optional<GridInfo> grid)
    : name_(std::move(name)),
      mu_(std::move(mu)),
      metric_(std::move(metric)),
      coords_(std::move(coords)),
      coordDim_(coordDim),
      grid_(grid) {
  const std::size_t n = mu_.size();
  if (n == 0) throw InvariantViolation("space has no vertices");
  for (std::size_t x = 0; x < n; ++x) {
    if (!(mu_[x] > 0.0) || !std::isfinite(mu_[x])) {
      throw InvariantViolation("mu(" + std::to_string(x) + ") is not a positive finite number");
    }
  }
  muTotal_ = std::accumulate(mu_.begin(), mu_.end(), 0.0);
  if (metric_.size() != n) throw InvariantViolation("metric size does not match vertex count");

  std::vector<std::size_t> deg(n, 0);
  for (const Edge& e : edges) {
    if (e.i >= n || e.j >= n) {
      throw InvariantViolation("edge (" + std::to_string(e.i) + "," + std::to_string(e.j) + ") out of range");
    }
    if (e.i == e.j) throw InvariantViolation("self-loop at vertex " + std::to_string(e.i));
    if (!(e.c >= 0.0) || !std::isfinite(e.c)) {
      throw InvariantViolation("conductance on (" + std::to_string(e.i) + "," + std::to_string(e.j) +
                               ") is not a nonnegative finite number");
    }
    if (e.c == 0.0) continue;
    edges_.push_back(e.i < e.j ? e : Edge{e.j, e.i, e.c});
  }
  std::sort(edges_.begin(), edges_.end(),
            [](const Edge& a, const Edge& b) { return a.i != b.i ? a.i < b.i : a.j < b.j; });
  for (std::size_t k = 1; k < edges_.size(); ++k) {
    if (edges_[k].i == edges_[k - 1].i && edges_[k].j == edges_[k - 1].j) {
      throw InvariantViolation("duplicate edge (" + std::to_string(edges_[k].i) + "," +
                               std::to_string(edges_[k].j) + ")");
    }
  }
  for (const Edge& e : edges_) {
    ++deg[e.i];
    ++deg[e.j];
  }
  offsets_.assign(n + 1, 0);
  for (std::size_t x = 0; x < n; ++x) offsets_[x + 1] = offsets_[x] + deg[x];
  adjacency_.resize(offsets_[n]);
  std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
  for (const Edge& e : edges_) {
    adjacency_[fill[e.i]++] = {e.j, e.c};
    adjacency_[fill[e.j]++] = {e.i, e.c};
  }
  maxDegree_ = n ? *std::max_element(deg.begin(), deg.end()) : 0;

  // Connectivity over positive conductances.
  std::vector<char> seen(n, 0);
  std::vector<std::size_t> stack{0};
  seen[0] = 1;
  while (!stack.empty()) {
    const std::size_t x = stack.back();
    stack.pop_back();
    for (const Neighbor& nb : neighbors(x)) {
      if (!seen[nb.index]) {
        seen[nb.index] = 1;
        stack.push_back(nb.index);
      }
    }
  }
  for (std::size_t x = 0; x < n; ++x) {
    if (!seen[x]) throw InvariantViolation("graph is disconnected: vertex " + std::to_string(x) +
                                           " is unreachable from vertex 0");
  }

  if (grid_) {
    const GridInfo& g = *grid_;
    meshScale_ = g.h;
    const double perAxis = g.periodic ? std::floor(g.side / 2.0) * g.h : (g.side - 1) * g.h;
    diameter_ = perAxis * std::sqrt(static_cast<double>(g.dim));
  } else if (n == 1) {
    meshScale_ = 0.0;
    diameter_ = 0.0;
  } else {
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    Vec row(n);
    for (std::size_t x = 0; x < n; ++x) {
      metric_.row(x, row);
      for (std::size_t y = x + 1; y < n; ++y) {
        if (row[y] > 0.0) lo = std::min(lo, row[y]);
        hi = std::max(hi, row[y]);
      }
    }
    meshScale_ = lo;
    diameter_ = hi;
  }
}

double MetricMeasureSpace::measure(const VertexSet& set) const {
  double s = 0.0;
  for (std::size_t x = 0; x < size(); ++x)
    if (set.contains(x)) s += mu_[x];
  return s;
}

SpaceFingerprint MetricMeasureSpace::fingerprint() const {
  SpaceFingerprint fp;
  fp.n = size();
  fp.muSum = muTotal_;
  fp.edgeCount = edges_.size();
  std::uint64_t h = fnv1a(name_);
  auto mix = [&h](double v) { h = fnv1a(std::string_view(reinterpret_cast<const char*>(&v), sizeof v), h); };
  for (double m : mu_) mix(m);
  for (const Edge& e : edges_) {
    mix(static_cast<double>(e.i));
    mix(static_cast<double>(e.j));
    mix(e.c);
  }
  mix(static_cast<double>(static_cast<int>(metric_.kind())));
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  fp.hash = buf;
  return fp;
}

// --------------------------------------------------------------- gradients

Vec carre_du_champ(const MetricMeasureSpace& space, std::span<const double> f) {
  if (f.size() != space.size()) throw DomainError("carre_du_champ: function length does not match space");
  return kernels::parallel::carre_du_champ(space, f);
}

double dirichlet_energy(const MetricMeasureSpace& space, std::span<const double> f) {
  if (f.size() != space.size()) throw DomainError("dirichlet_energy: function length does not match space");
  double s = 0.0;
  for (const Edge& e : space.edges()) {
    const double d = f[e.i] - f[e.j];
    s += e.c * d * d;
  }
  return s;
}

// ------------------------------------------------------------------ metric

Matrix intrinsic_metric(const MetricMeasureSpace& space, std::size_t cap) {
  const std::size_t n = space.size();
  if (n > cap) throw CapacityError("intrinsic_metric: n = " + std::to_string(n) + " exceeds capacity " +
                                   std::to_string(cap));
  Matrix d(n, n, std::numeric_limits<double>::infinity());
  using Item = std::pair<double, std::size_t>;
  for (std::size_t s = 0; s < n; ++s) {
    auto row = d.row(s);
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    row[s] = 0.0;
    heap.push({0.0, s});
    while (!heap.empty()) {
      const auto [dx, x] = heap.top();
      heap.pop();
      if (dx > row[x]) continue;
      for (const Neighbor& nb : space.neighbors(x)) {
        const double len = std::sqrt(std::min(space.measure(x), space.measure(nb.index)) / nb.c);
        const double cand = dx + len;
        if (cand < row[nb.index]) {
          row[nb.index] = cand;
          heap.push({cand, nb.index});
        }
      }
    }
    for (std::size_t y = 0; y < n; ++y) {
      if (!std::isfinite(row[y])) {
        throw InvariantViolation("intrinsic_metric: vertex " + std::to_string(y) + " unreachable from " +
                                 std::to_string(s));
      }
    }
  }
  return d;
}

double metric_gradient_audit(const MetricMeasureSpace& space, const Matrix& dist) {
  double worst = 0.0;
  for (std::size_t x = 0; x < space.size(); ++x) {
    const Vec g = carre_du_champ(space, dist.row(x));
    worst = std::max(worst, *std::max_element(g.begin(), g.end()));
  }
  return worst;
}

MetricAxiomReport check_metric_axioms(const MetricMeasureSpace& space, std::size_t exhaustiveLimit,
                                      std::size_t samples, std::uint64_t seed) {
  MetricAxiomReport rep;
  const std::size_t n = space.size();
  auto checkPair = [&](std::size_t x, std::size_t y) {
    const double a = space.distance(x, y);
    const double b = space.distance(y, x);
    rep.worstAsymmetry = std::max(rep.worstAsymmetry, std::abs(a - b));
    if ((a == 0.0) != (x == y) || a < 0.0) rep.identityOk = false;
    ++rep.pairsChecked;
  };
  auto checkTriple = [&](std::size_t x, std::size_t y, std::size_t z, double dxy, double dxz, double dzy) {
    const double excess = dxy - (dxz + dzy);
    if (excess > 0.0) rep.worstTriangleExcess = std::max(rep.worstTriangleExcess, excess / std::max(dxy, 1e-300));
    (void)x, (void)y, (void)z;
    ++rep.triplesChecked;
  };
  if (n <= exhaustiveLimit) {
    rep.exhaustive = true;
    Matrix d(n, n);
    for (std::size_t x = 0; x < n; ++x) space.distance_row(x, d.row(x));
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t y = 0; y < n; ++y) checkPair(x, y);
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t y = x + 1; y < n; ++y)
        for (std::size_t z = 0; z < n; ++z) checkTriple(x, y, z, d(x, y), d(x, z), d(z, y));
  } else {
    Rng rng(seed);
    for (std::size_t s = 0; s < samples; ++s) {
      const std::size_t x = rng.index(n), y = rng.index(n), z = rng.index(n);
      checkPair(x, y);
      checkTriple(x, y, z, space.distance(x, y), space.distance(x, z), space.distance(z, y));
    }
  }
  return rep;
}

// ------------------------------------------------------------------- balls

namespace {
constexpr double kBallSlack = 1e-12;
}

VertexSet ball(const MetricMeasureSpace& space, std::size_t x, double r) {
  if (r < 0.0) throw DomainError("ball: negative radius");
  if (x >= space.size()) throw DomainError("ball: center out of range");
  Vec row(space.size());
  space.distance_row(x, row);
  const double lim = r * (1.0 + kBallSlack);
  return VertexSet::from_predicate(space.size(), [&](std::size_t y) { return row[y] <= lim; });
}

double ball_measure(const MetricMeasureSpace& space, std::size_t x, double r) {
  return space.measure(ball(space, x, r));
}

ScaleRange resolved_time_range(const MetricMeasureSpace& space) {
  const double h = space.mesh_scale();
  const double half = space.diameter() / 2.0;
  if (!(h > 0.0) || half * half < h * h) throw DomainError("space too small for a resolved time range");
  return {h * h, half * half};
}

ScaleRange resolved_radius_range(const MetricMeasureSpace& space) {
  const double h = space.mesh_scale();
  const double quarter = space.diameter() / 4.0;
  if (!(h > 0.0) || quarter < 2.0 * h) throw DomainError("space too small for a resolved radius range");
  return {2.0 * h, quarter};
}

Vec resolved_time_grid(const MetricMeasureSpace& space, double pointsPerDecade) {
  const ScaleRange r = resolved_time_range(space);
  return geometric_grid(r.lo, r.hi, pointsPerDecade);
}

Vec resolved_radius_grid(const MetricMeasureSpace& space, double pointsPerDecade) {
  const ScaleRange r = resolved_radius_range(space);
  return geometric_grid(r.lo, r.hi, pointsPerDecade);
}

void require_within(const ScaleRange& range, std::span<const double> grid, const char* what) {
  if (grid.empty()) throw DomainError(std::string(what) + ": empty grid");
  for (double s : grid) {
    if (!range.contains(s)) {
      std::ostringstream msg;
      msg << what << ": scale " << s << " outside resolved range [" << range.lo << ", " << range.hi << "]";
      throw DomainError(msg.str());
    }
  }
}

DoublingProfile doubling_profile(const MetricMeasureSpace& space, std::size_t sampleCount, std::uint64_t seed,
                                 double pointsPerDecade) {
  if (sampleCount == 0) throw DomainError("doubling_profile: empty sample");
  const ScaleRange range = resolved_radius_range(space);
  const Vec radii = geometric_grid(range.lo, range.hi, pointsPerDecade);
  const std::size_t n = space.size();
  Rng rng(seed);
  const auto centers = rng.sample_without_replacement(n, sampleCount);

  DoublingProfile prof;
  prof.resolvedRange = range;
  prof.centers = centers.size();
  prof.seed = seed;
  Vec envelope(radii.size(), 0.0);
  Vec pooledX, pooledY;
  Vec row(n);
  std::vector<std::size_t> order(n);
  Vec cum(n);
  for (std::size_t x : centers) {
    space.distance_row(x, row);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return row[a] < row[b]; });
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      acc += space.measure(order[k]);
      cum[k] = acc;
    }
    auto massWithin = [&](double r) {
      const double lim = r * (1.0 + kBallSlack);
      const auto it = std::upper_bound(order.begin(), order.end(), lim,
                                       [&](double v, std::size_t idx) { return v < row[idx]; });
      const auto k = static_cast<std::size_t>(it - order.begin());
      return k == 0 ? 0.0 : cum[k - 1];
    };
    for (std::size_t i = 0; i < radii.size(); ++i) {
      const double m1 = massWithin(radii[i]);
      const double m2 = massWithin(2.0 * radii[i]);
      envelope[i] = std::max(envelope[i], m1);
      pooledX.push_back(std::log(radii[i]));
      pooledY.push_back(std::log(m1));
      prof.Cdoubling = std::max(prof.Cdoubling, m2 / m1);
    }
  }
  const LineFit env = fit_loglog(radii, envelope);
  prof.Q = env.slope;
  prof.residual = env.residual;
  prof.pooledQ = fit_line(pooledX, pooledY).slope;
  return prof;
}

// ---------------------------------------------------------------- Poincare

namespace {

struct InducedBall {
  std::vector<std::size_t> vertices;  // members of lambda*B
  std::vector<char> inInner;          // membership in B, per local index
};

InducedBall induced_ball(const MetricMeasureSpace& space, std::size_t center, double radius, double lambda) {
  Vec row(space.size());
  space.distance_row(center, row);
  InducedBall ib;
  const double outer = lambda * radius * (1.0 + kBallSlack);
  const double inner = radius * (1.0 + kBallSlack);
  for (std::size_t y = 0; y < space.size(); ++y) {
    if (row[y] <= outer) {
      ib.vertices.push_back(y);
      ib.inInner.push_back(row[y] <= inner ? 1 : 0);
    }
  }
  return ib;
}

double quotient_on(const MetricMeasureSpace& space, const InducedBall& ib, const std::vector<long>& local,
                   double radius, std::span<const double> f) {
  // f is indexed locally.
  double massB = 0.0, meanB = 0.0;
  for (std::size_t k = 0; k < ib.vertices.size(); ++k) {
    if (!ib.inInner[k]) continue;
    const double m = space.measure(ib.vertices[k]);
    massB += m;
    meanB += m * f[k];
  }
  meanB /= massB;
  double dev = 0.0;
  for (std::size_t k = 0; k < ib.vertices.size(); ++k)
    if (ib.inInner[k]) dev += space.measure(ib.vertices[k]) * std::abs(f[k] - meanB);
  dev /= massB;

  double massOuter = 0.0, energy = 0.0;
  for (std::size_t k = 0; k < ib.vertices.size(); ++k) {
    const std::size_t x = ib.vertices[k];
    massOuter += space.measure(x);
    double s = 0.0;
    for (const Neighbor& nb : space.neighbors(x)) {
      const long j = local[nb.index];
      if (j < 0) continue;
      const double d = f[k] - f[static_cast<std::size_t>(j)];
      s += nb.c * d * d;
    }
    energy += 0.5 * s;  // mu(x) * (1/(2 mu(x))) * sum
  }
  const double denom = radius * std::sqrt(energy / massOuter);
  if (denom <= 0.0) return 0.0;
  return dev / denom;
}

std::vector<long> local_index(const MetricMeasureSpace& space, const InducedBall& ib) {
  std::vector<long> local(space.size(), -1);
  for (std::size_t k = 0; k < ib.vertices.size(); ++k) local[ib.vertices[k]] = static_cast<long>(k);
  return local;
}

}  // namespace

double poincare_quotient(const MetricMeasureSpace& space, std::size_t center, double radius, double lambda,
                         std::span<const double> f) {
  if (radius < 0.0) throw DomainError("poincare_quotient: negative radius");
  if (lambda < 1.0) throw DomainError("poincare_quotient: dilation must be >= 1");
  const InducedBall ib = induced_ball(space, center, radius, lambda);
  const auto local = local_index(space, ib);
  Vec fl(ib.vertices.size());
  for (std::size_t k = 0; k < fl.size(); ++k) fl[k] = f[ib.vertices[k]];
  return quotient_on(space, ib, local, radius, fl);
}

PoincareReport poincare_constant(const MetricMeasureSpace& space, std::size_t sampleCount, std::uint64_t seed,
                                 double lambda, std::size_t cap) {
  if (sampleCount == 0) throw DomainError("poincare_constant: empty sample");
  if (lambda < 1.0) throw DomainError("poincare_constant: dilation must be >= 1");
  constexpr std::size_t kBattery = 24;
  const Vec radii = resolved_radius_grid(space, 8.0);
  Rng rng(seed);
  PoincareReport rep;
  rep.lambdaDilation = lambda;
  rep.seed = seed;
  for (std::size_t s = 0; s < sampleCount; ++s) {
    const std::size_t center = rng.index(space.size());
    const double radius = radii[rng.index(radii.size())];
    const InducedBall ib = induced_ball(space, center, radius, lambda);
    const std::size_t m = ib.vertices.size();
    if (m < 2) continue;
    if (m > cap) throw CapacityError("poincare_constant: dilated ball exceeds capacity");
    const auto local = local_index(space, ib);

    // Neumann generator of the induced subgraph, symmetrized by mu^{1/2}.
    Matrix a(m, m, 0.0);
    for (std::size_t k = 0; k < m; ++k) {
      const std::size_t x = ib.vertices[k];
      for (const Neighbor& nb : space.neighbors(x)) {
        const long j = local[nb.index];
        if (j < 0) continue;
        const auto jj = static_cast<std::size_t>(j);
        a(k, k) += nb.c / space.measure(x);
        a(k, jj) -= nb.c / std::sqrt(space.measure(x) * space.measure(nb.index));
      }
    }
    Vec w;
    kernels::symmetric_eigen(a, w);
    ++rep.ballsSampled;
    Vec f(m);
    for (std::size_t e = 1; e < std::min(m, kBattery + 1); ++e) {
      for (std::size_t k = 0; k < m; ++k) f[k] = a(k, e) / std::sqrt(space.measure(ib.vertices[k]));
      const double q = quotient_on(space, ib, local, radius, f);
      if (q > rep.C2) {
        rep.C2 = q;
        rep.witnessCenter = center;
        rep.witnessRadius = radius;
      }
    }
  }
  if (rep.ballsSampled == 0) throw DomainError("poincare_constant: no sampled ball had two vertices");
  return rep;
}

}  // namespace dirbv
