#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <queue>
#include <string>

#include "dirbv/space.hpp"

namespace dirbv {

namespace {

std::size_t checked_grid_size(int dim, int side, std::size_t cap, const char* what) {
  if (dim < 1 || dim > 3) throw DomainError(std::string(what) + ": dim must be 1, 2 or 3");
  std::size_t n = 1;
  for (int k = 0; k < dim; ++k) {
    n *= static_cast<std::size_t>(side);
    if (n > cap) {
      throw CapacityError(std::string(what) + ": " + std::to_string(side) + "^" + std::to_string(dim) +
                          " vertices exceed capacity " + std::to_string(cap));
    }
  }
  return n;
}

struct Grid {
  Vec mu;
  std::vector<Edge> edges;
  std::vector<double> coords;
};

Grid grid_graph(int dim, int side, double h, bool periodic, std::size_t n) {
  Grid g;
  g.mu.assign(n, std::pow(h, dim));
  g.coords.resize(n * static_cast<std::size_t>(dim));
  const double c = std::pow(h, dim - 2);
  const auto s = static_cast<std::size_t>(side);
  for (std::size_t x = 0; x < n; ++x) {
    std::size_t rest = x;
    std::size_t stride = 1;
    for (int k = 0; k < dim; ++k) {
      const std::size_t ik = rest % s;
      rest /= s;
      g.coords[x * static_cast<std::size_t>(dim) + static_cast<std::size_t>(k)] = static_cast<double>(ik) * h;
      if (ik + 1 < s) {
        g.edges.push_back({x, x + stride, c});
      } else if (periodic) {
        g.edges.push_back({x, x - ik * stride, c});
      }
      stride *= s;
    }
  }
  return g;
}

}  // namespace

MetricMeasureSpace build_lattice(int dim, int side, double h, std::size_t cap) {
  if (side < 2) throw DomainError("build_lattice: side must be >= 2");
  if (!(h > 0.0)) throw DomainError("build_lattice: h must be positive");
  const std::size_t n = checked_grid_size(dim, side, cap, "build_lattice");
  Grid g = grid_graph(dim, side, h, false, n);
  std::vector<double> coords = g.coords;
  return MetricMeasureSpace("lattice(" + std::to_string(dim) + "," + std::to_string(side) + ")", std::move(g.mu),
                            g.edges, Metric::euclidean(dim, std::move(g.coords)), std::move(coords), dim,
                            GridInfo{dim, side, h, false});
}

MetricMeasureSpace build_torus(int dim, int side, double h, std::size_t cap) {
  if (side < 3) throw DomainError("build_torus: side must be >= 3");
  if (!(h > 0.0)) throw DomainError("build_torus: h must be positive");
  const std::size_t n = checked_grid_size(dim, side, cap, "build_torus");
  Grid g = grid_graph(dim, side, h, true, n);
  std::vector<double> coords = g.coords;
  return MetricMeasureSpace("torus(" + std::to_string(dim) + "," + std::to_string(side) + ")", std::move(g.mu),
                            g.edges, Metric::torus(dim, std::move(g.coords), side * h), std::move(coords), dim,
                            GridInfo{dim, side, h, true});
}

MetricMeasureSpace build_sierpinski_gasket(int level, std::size_t cap) {
  if (level < 1 || level > 8) throw DomainError("build_sierpinski_gasket: level must be in 1..8");
  const std::size_t cells = static_cast<std::size_t>(std::pow(3.0, level));
  const std::size_t n = (3 * cells + 3) / 2;
  if (n > cap) {
    throw CapacityError("build_sierpinski_gasket: " + std::to_string(n) + " vertices exceed capacity " +
                        std::to_string(cap));
  }
  // Points (i, j) of the triangular lattice with side 2^level; a cell is its
  // lower-left corner plus size.
  const long side = 1L << level;
  std::map<std::pair<long, long>, std::size_t> index;
  std::vector<std::pair<long, long>> points;
  auto vertex = [&](long i, long j) {
    auto [it, fresh] = index.try_emplace({i, j}, points.size());
    if (fresh) points.emplace_back(i, j);
    return it->second;
  };
  std::vector<std::array<std::size_t, 3>> unitCells;
  std::vector<std::array<long, 3>> stack{{0, 0, side}};
  while (!stack.empty()) {
    const auto [i, j, s] = stack.back();
    stack.pop_back();
    if (s == 1) {
      unitCells.push_back({vertex(i, j), vertex(i + 1, j), vertex(i, j + 1)});
      continue;
    }
    const long half = s / 2;
    // Pushed in reverse so cells are expanded in a fixed order.
    stack.push_back({i, j + half, half});
    stack.push_back({i + half, j, half});
    stack.push_back({i, j, half});
  }

  const double cellMass = std::pow(3.0, -level);
  const double c = std::pow(5.0 / 3.0, level);
  Vec mu(points.size(), 0.0);
  std::vector<Edge> edges;
  for (const auto& cell : unitCells) {
    for (std::size_t v : cell) mu[v] += cellMass / 3.0;
    edges.push_back({cell[0], cell[1], c});
    edges.push_back({cell[1], cell[2], c});
    edges.push_back({cell[0], cell[2], c});
  }

  std::vector<double> coords(points.size() * 2);
  const double scale = 1.0 / static_cast<double>(side);
  for (std::size_t v = 0; v < points.size(); ++v) {
    const auto [i, j] = points[v];
    coords[2 * v] = (static_cast<double>(i) + 0.5 * static_cast<double>(j)) * scale;
    coords[2 * v + 1] = static_cast<double>(j) * 0.5 * std::numbers::sqrt3 * scale;
  }

  // Hop metric by BFS from each vertex.
  const std::size_t m = points.size();
  std::vector<std::vector<std::size_t>> adj(m);
  for (const Edge& e : edges) {
    adj[e.i].push_back(e.j);
    adj[e.j].push_back(e.i);
  }
  std::vector<double> table(m * m);
  std::vector<long> hops(m);
  for (std::size_t s = 0; s < m; ++s) {
    std::fill(hops.begin(), hops.end(), -1L);
    std::queue<std::size_t> q;
    hops[s] = 0;
    q.push(s);
    while (!q.empty()) {
      const std::size_t x = q.front();
      q.pop();
      for (std::size_t y : adj[x]) {
        if (hops[y] < 0) {
          hops[y] = hops[x] + 1;
          q.push(y);
        }
      }
    }
    for (std::size_t y = 0; y < m; ++y) table[s * m + y] = static_cast<double>(hops[y]) * scale;
  }
  return MetricMeasureSpace("gasket(" + std::to_string(level) + ")", std::move(mu), edges,
                            Metric::dense(m, std::move(table)), std::move(coords), 2);
}

MetricMeasureSpace build_metric_graph(std::span<const double> legLengths, int subdivision, std::size_t cap) {
  if (legLengths.size() < 3) throw DomainError("build_metric_graph: need at least 3 legs");
  if (subdivision < 2) throw DomainError("build_metric_graph: subdivision must be >= 2");
  for (double len : legLengths) {
    if (!(len > 0.0)) throw DomainError("build_metric_graph: leg lengths must be positive");
  }
  const std::size_t legs = legLengths.size();
  const auto m = static_cast<std::size_t>(subdivision);
  const std::size_t n = 1 + legs * m;
  if (n > cap) {
    throw CapacityError("build_metric_graph: " + std::to_string(n) + " vertices exceed capacity " +
                        std::to_string(cap));
  }
  // Vertex 0 is the center; leg k, step j (1-based) is 1 + k*m + (j-1).
  Vec dx(legs);
  for (std::size_t k = 0; k < legs; ++k) dx[k] = legLengths[k] / static_cast<double>(m);
  Vec mu(n);
  double meanDx = 0.0;
  for (double d : dx) meanDx += d;
  mu[0] = meanDx / static_cast<double>(legs);

  std::vector<Edge> edges;
  std::vector<double> coords(n * 2, 0.0);
  Vec radial(n, 0.0);
  std::vector<std::size_t> legOf(n, legs);
  for (std::size_t k = 0; k < legs; ++k) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(legs);
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t v = 1 + k * m + (j - 1);
      mu[v] = dx[k];
      radial[v] = static_cast<double>(j) * dx[k];
      legOf[v] = k;
      coords[2 * v] = radial[v] * std::cos(angle);
      coords[2 * v + 1] = radial[v] * std::sin(angle);
      edges.push_back({j == 1 ? 0 : v - 1, v, 1.0 / dx[k]});
    }
  }
  std::vector<double> table(n * n);
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y = 0; y < n; ++y) {
      const bool sameLeg = legOf[x] == legOf[y] && legOf[x] != legs;
      table[x * n + y] = sameLeg ? std::abs(radial[x] - radial[y]) : radial[x] + radial[y];
    }
  }
  return MetricMeasureSpace("spider(" + std::to_string(legs) + "," + std::to_string(subdivision) + ")",
                            std::move(mu), edges, Metric::dense(n, std::move(table)), std::move(coords), 2);
}

}  // namespace dirbv
