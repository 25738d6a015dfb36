#include "dirbv/battery.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace dirbv {

void Battery::add(std::string name, std::span<const double> f) {
  if (!functions.empty() && f.size() != functions.front().size()) throw DomainError("Battery::add: length mismatch");
  functions.emplace_back(f.begin(), f.end());
  names.push_back(std::move(name));
}

void Battery::append(const Battery& other) {
  for (std::size_t i = 0; i < other.size(); ++i) add(other.names[i], other.functions[i]);
}

Matrix Battery::matrix() const {
  Matrix m(size(), functions.empty() ? 0 : functions.front().size());
  for (std::size_t i = 0; i < size(); ++i) std::copy(functions[i].begin(), functions[i].end(), m.row(i).begin());
  return m;
}

Battery Battery::nonconstant() const {
  Battery out;
  for (std::size_t i = 0; i < size(); ++i) {
    const auto [lo, hi] = std::minmax_element(functions[i].begin(), functions[i].end());
    if (*lo != *hi) out.add(names[i], functions[i]);
  }
  return out;
}

Battery Battery::slice(std::size_t first, std::size_t count) const {
  Battery out;
  for (std::size_t i = first; i < std::min(size(), first + count); ++i) out.add(names[i], functions[i]);
  return out;
}

namespace {

// Bounding box of the coordinates; a torus uses its full period.
struct Domain {
  int dim = 0;
  Vec lo, hi;
  double period = 0.0;  // > 0 on a torus

  double extent(int k) const { return hi[static_cast<std::size_t>(k)] - lo[static_cast<std::size_t>(k)]; }
  double scale() const {
    double s = 0.0;
    for (int k = 0; k < dim; ++k) s = std::max(s, extent(k));
    return s;
  }
};

Domain domain_of(const MetricMeasureSpace& space) {
  Domain d;
  d.dim = space.coord_dim();
  const auto c = space.coords();
  const auto dim = static_cast<std::size_t>(d.dim);
  d.lo.assign(dim, 0.0);
  d.hi.assign(dim, 0.0);
  if (dim == 0) return d;
  const auto& g = space.grid();
  if (g && g->periodic) {
    d.period = g->side * g->h;
    std::fill(d.hi.begin(), d.hi.end(), d.period);
    return d;
  }
  for (std::size_t k = 0; k < dim; ++k) {
    d.lo[k] = d.hi[k] = c[k];
    for (std::size_t x = 0; x < space.size(); ++x) {
      d.lo[k] = std::min(d.lo[k], c[x * dim + k]);
      d.hi[k] = std::max(d.hi[k], c[x * dim + k]);
    }
  }
  return d;
}

double coord(const MetricMeasureSpace& space, std::size_t x, int k) {
  return space.coords()[x * static_cast<std::size_t>(space.coord_dim()) + static_cast<std::size_t>(k)];
}

// Distance from vertex x to a continuum point, periodic on a torus.
double point_distance(const MetricMeasureSpace& space, const Domain& dom, std::size_t x, std::span<const double> p) {
  double s = 0.0;
  for (int k = 0; k < dom.dim; ++k) {
    double a = std::abs(coord(space, x, k) - p[static_cast<std::size_t>(k)]);
    if (dom.period > 0.0) a = std::min(a, dom.period - a);
    s += a * a;
  }
  return std::sqrt(s);
}

std::size_t nearest_vertex(const MetricMeasureSpace& space, const Domain& dom, std::span<const double> p) {
  std::size_t best = 0;
  double bestD = point_distance(space, dom, 0, p);
  for (std::size_t x = 1; x < space.size(); ++x) {
    const double d = point_distance(space, dom, x, p);
    if (d < bestD) {
      best = x;
      bestD = d;
    }
  }
  return best;
}

Vec domain_center(const Domain& dom) {
  Vec c(static_cast<std::size_t>(dom.dim));
  for (std::size_t k = 0; k < c.size(); ++k) c[k] = 0.5 * (dom.lo[k] + dom.hi[k]);
  return c;
}

Vec random_point(const Domain& dom, Rng& rng, double margin) {
  Vec p(static_cast<std::size_t>(dom.dim));
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double e = dom.hi[k] - dom.lo[k];
    p[k] = rng.uniform(dom.lo[k] + margin * e, dom.hi[k] - margin * e);
  }
  return p;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace

Battery vertex_indicators(const MetricMeasureSpace& space, std::size_t cap, std::uint64_t seed) {
  const std::size_t n = space.size();
  std::vector<std::size_t> picks;
  if (n <= cap) {
    for (std::size_t x = 0; x < n; ++x) picks.push_back(x);
  } else {
    Rng rng(seed);
    picks = rng.sample_without_replacement(n, cap);
  }
  Battery b;
  Vec f(n, 0.0);
  for (std::size_t x : picks) {
    f[x] = 1.0;
    b.add("indicator:" + std::to_string(x), f);
    f[x] = 0.0;
  }
  return b;
}

Battery rademacher(const MetricMeasureSpace& space, std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  Battery b;
  Vec f(space.size());
  for (std::size_t i = 0; i < count; ++i) {
    for (double& v : f) v = rng.sign();
    b.add("rademacher:" + std::to_string(i), f);
  }
  return b;
}

Battery smoothed_random(const SpectralData& d, std::size_t count, double t0, std::uint64_t seed) {
  const std::size_t n = d.mu.size();
  Rng rng(seed);
  Matrix raw(count, n);
  for (std::size_t i = 0; i < count; ++i)
    for (std::size_t x = 0; x < n; ++x) raw(i, x) = rng.uniform(-1.0, 1.0);
  const Matrix smooth = apply_semigroup(d, t0, raw);
  Battery b;
  for (std::size_t i = 0; i < count; ++i) b.add("smoothed:" + std::to_string(i), smooth.row(i));
  return b;
}

Battery half_spaces(const MetricMeasureSpace& space, std::uint64_t seed) {
  const std::size_t n = space.size();
  Battery b;
  Vec f(n);
  const Domain dom = domain_of(space);
  if (dom.dim == 0) {
    Rng rng(seed);
    for (int i = 0; i < 8; ++i) {
      const std::size_t a = rng.index(n);
      std::size_t c = rng.index(n);
      if (c == a) c = (a + 1) % n;
      for (std::size_t x = 0; x < n; ++x) f[x] = space.distance(x, a) < space.distance(x, c) ? 1.0 : 0.0;
      b.add("voronoi:" + std::to_string(a) + "|" + std::to_string(c), f);
    }
    return b.nonconstant();
  }
  // Cut offsets are placed between grid lines of any dyadic refinement.
  const double offsets[] = {0.3, 0.5, 0.7};
  for (int k = 0; k < dom.dim; ++k) {
    for (double o : offsets) {
      const double cut = dom.lo[static_cast<std::size_t>(k)] + (o + 1e-3) * dom.extent(k);
      for (std::size_t x = 0; x < n; ++x) {
        const double u = coord(space, x, k);
        if (dom.period > 0.0) {
          // Band of width half the period, so both boundaries are straight cuts.
          const double start = cut - 0.25 * dom.period;
          double s = std::fmod(u - start, dom.period);
          if (s < 0.0) s += dom.period;
          f[x] = s < 0.5 * dom.period ? 1.0 : 0.0;
        } else {
          f[x] = u < cut ? 1.0 : 0.0;
        }
      }
      b.add("halfspace:axis" + std::to_string(k) + "@" + fmt(o), f);
    }
  }
  if (dom.dim >= 2 && dom.period == 0.0) {
    for (double o : {0.6, 1.0, 1.4}) {
      for (int sgn : {1, -1}) {
        for (std::size_t x = 0; x < n; ++x) {
          const double u = (coord(space, x, 0) - dom.lo[0]) / dom.extent(0);
          const double v = (coord(space, x, 1) - dom.lo[1]) / dom.extent(1);
          const double w = sgn > 0 ? u + v : u + (1.0 - v);
          f[x] = w < o + 1e-3 ? 1.0 : 0.0;
        }
        b.add(std::string("halfspace:") + (sgn > 0 ? "diag" : "anti") + "@" + fmt(o), f);
      }
    }
  }
  return b.nonconstant();
}

Battery lipschitz_functions(const MetricMeasureSpace& space) {
  const std::size_t n = space.size();
  Battery b;
  Vec f(n);
  const Domain dom = domain_of(space);
  if (dom.dim == 0) {
    const std::size_t o = metric_center(space);
    for (std::size_t x = 0; x < n; ++x) f[x] = space.distance(o, x);
    b.add("lipschitz:center-distance", f);
    return b;
  }
  const double pi2 = 2.0 * std::numbers::pi;
  for (int k = 0; k < dom.dim; ++k) {
    for (std::size_t x = 0; x < n; ++x) {
      const double u = (coord(space, x, k) - dom.lo[static_cast<std::size_t>(k)]) / dom.extent(k);
      f[x] = dom.period > 0.0 ? std::sin(pi2 * u) / pi2 : u;
    }
    b.add("lipschitz:coord" + std::to_string(k), f);
  }
  const Vec c = domain_center(dom);
  for (std::size_t x = 0; x < n; ++x) f[x] = point_distance(space, dom, x, c);
  b.add("lipschitz:center-distance", f);
  for (int freq : {1, 2}) {
    for (std::size_t x = 0; x < n; ++x) {
      double v = 1.0;
      for (int k = 0; k < dom.dim; ++k) {
        const double u = (coord(space, x, k) - dom.lo[static_cast<std::size_t>(k)]) / dom.extent(k);
        v *= dom.period > 0.0 ? std::cos(pi2 * freq * u + 0.3 * k) : std::cos(std::numbers::pi * freq * u);
      }
      f[x] = v;
    }
    b.add("lipschitz:wave" + std::to_string(freq), f);
  }
  return b.nonconstant();
}

Battery disk_indicators(const MetricMeasureSpace& space, std::span<const double> radii) {
  const std::size_t n = space.size();
  const Domain dom = domain_of(space);
  const std::size_t o = dom.dim > 0 ? nearest_vertex(space, dom, domain_center(dom)) : metric_center(space);
  Battery b;
  Vec f(n);
  for (double r : radii) {
    for (std::size_t x = 0; x < n; ++x) f[x] = space.distance(o, x) <= r * (1.0 + 1e-12) ? 1.0 : 0.0;
    b.add("disk:" + fmt(r), f);
  }
  return b;
}

Battery random_blobs(const MetricMeasureSpace& space, std::size_t count, std::uint64_t seed) {
  const std::size_t n = space.size();
  const Domain dom = domain_of(space);
  Rng rng(seed);
  Battery b;
  Vec f(n);
  const double scale = dom.dim > 0 ? dom.scale() : space.diameter();
  for (std::size_t i = 0; i < count; ++i) {
    std::fill(f.begin(), f.end(), 0.0);
    for (int j = 0; j < 3; ++j) {
      const double r = rng.uniform(0.08, 0.2) * scale;
      if (dom.dim > 0) {
        const Vec p = random_point(dom, rng, 0.2);
        for (std::size_t x = 0; x < n; ++x)
          if (point_distance(space, dom, x, p) <= r) f[x] = 1.0;
      } else {
        const std::size_t a = rng.index(n);
        for (std::size_t x = 0; x < n; ++x)
          if (space.distance(a, x) <= r) f[x] = 1.0;
      }
    }
    b.add("blob:" + std::to_string(i), f);
  }
  return b.nonconstant();
}

Battery smooth_bumps(const MetricMeasureSpace& space, std::size_t count, std::uint64_t seed) {
  const std::size_t n = space.size();
  const Domain dom = domain_of(space);
  Rng rng(seed);
  Battery b;
  Vec f(n);
  const double s = 0.15 * (dom.dim > 0 ? dom.scale() : space.diameter());
  for (std::size_t i = 0; i < count; ++i) {
    if (dom.dim > 0) {
      const Vec p = random_point(dom, rng, 0.15);
      for (std::size_t x = 0; x < n; ++x) {
        const double d = point_distance(space, dom, x, p);
        f[x] = std::exp(-d * d / (s * s));
      }
    } else {
      const std::size_t a = rng.index(n);
      for (std::size_t x = 0; x < n; ++x) {
        const double d = space.distance(a, x);
        f[x] = std::exp(-d * d / (s * s));
      }
    }
    b.add("bump:" + std::to_string(i), f);
  }
  return b;
}

Battery named_battery(const MetricMeasureSpace& space, const SpectralData* d, const std::string& name,
                      std::size_t size, std::uint64_t seed) {
  auto need = [&] {
    if (d == nullptr) throw DomainError("named_battery: '" + name + "' needs spectral data");
    return d;
  };
  const double h = space.mesh_scale();
  const double t0 = 4.0 * h * h;
  const std::size_t count = size == 0 ? 20 : size;
  Battery b;
  if (name == "indicators") {
    b = vertex_indicators(space, size == 0 ? 512 : size, seed);
  } else if (name == "rademacher") {
    b = rademacher(space, count, seed);
  } else if (name == "smoothed") {
    b = smoothed_random(*need(), count, t0, seed);
  } else if (name == "halfspace") {
    b = half_spaces(space, seed);
  } else if (name == "lipschitz") {
    b = lipschitz_functions(space);
  } else if (name == "disks") {
    const Vec radii{4 * h, 8 * h, 16 * h};
    b = disk_indicators(space, radii);
  } else if (name == "blobs") {
    b = random_blobs(space, count, seed);
  } else if (name == "bumps") {
    b = smooth_bumps(space, count, seed);
  } else if (name == "geometric") {
    b = half_spaces(space, seed);
    const Vec radii{0.1 * space.diameter(), 0.2 * space.diameter()};
    b.append(disk_indicators(space, radii));
    b.append(random_blobs(space, 5, seed));
  } else if (name == "mixed") {
    b = half_spaces(space, seed).slice(0, 4);
    b.append(random_blobs(space, 3, seed));
    b.append(lipschitz_functions(space).slice(0, 4));
    b.append(smooth_bumps(space, 3, seed));
    b.append(smoothed_random(*need(), 3, t0, seed));
    b.append(rademacher(space, 3, seed));
  } else if (name == "be") {
    b = vertex_indicators(space, 512, seed);
    b.append(rademacher(space, 20, seed));
    b.append(smoothed_random(*need(), 20, t0, seed + 1));
    b.append(half_spaces(space, seed));
  } else {
    throw ConfigError("unknown battery '" + name + "'");
  }
  if (size > 0 && name != "indicators") b = b.slice(0, size);
  return b;
}

}  // namespace dirbv
