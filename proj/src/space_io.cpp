#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "dirbv/space.hpp"

namespace dirbv {

using nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

std::string at(std::size_t i) { return std::to_string(i); }

std::string at(std::size_t i, std::size_t j) { return "(" + std::to_string(i) + "," + std::to_string(j) + ")"; }

// Symmetry, identity and (for small n) the triangle inequality. Reports the
// first violation found.
void validate_dense_metric(std::size_t n, const std::vector<double>& d) {
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y = 0; y < n; ++y) {
      const double v = d[x * n + y];
      if (!std::isfinite(v) || v < 0.0) throw InvariantViolation("dist" + at(x, y) + " is not a finite nonnegative value");
      if (v != d[y * n + x]) throw InvariantViolation("dist is not symmetric at " + at(x, y));
      if ((v == 0.0) != (x == y)) throw InvariantViolation("dist" + at(x, y) + " violates d(x,y)=0 <=> x=y");
    }
  }
  if (n > 512) return;
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = x + 1; y < n; ++y)
      for (std::size_t z = 0; z < n; ++z) {
        const double lhs = d[x * n + y];
        const double rhs = d[x * n + z] + d[z * n + y];
        if (lhs > rhs * (1.0 + 1e-12)) {
          throw InvariantViolation("dist violates the triangle inequality at " + at(x, y) + " via " + at(z));
        }
      }
}

}  // namespace

MetricMeasureSpace parse_space(const std::string& text, std::size_t cap) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("space file: ") + e.what());
  }
  try {
    const std::size_t n = doc.at("n").get<std::size_t>();
    if (n > cap) throw CapacityError("space file: n = " + at(n) + " exceeds capacity " + at(cap));
    Vec mu = doc.at("mu").get<Vec>();
    if (mu.size() != n) throw InvariantViolation("space file: mu has " + at(mu.size()) + " entries, n = " + at(n));
    for (std::size_t x = 0; x < n; ++x) {
      if (!(mu[x] > 0.0)) throw InvariantViolation("space file: mu(" + at(x) + ") is not positive");
    }
    std::vector<Edge> edges;
    std::map<std::pair<std::size_t, std::size_t>, double> seen;
    for (const auto& e : doc.at("edges")) {
      if (!e.is_array() || e.size() != 3) throw InvariantViolation("space file: edges must be [i, j, c] triples");
      const Edge edge{e[0].get<std::size_t>(), e[1].get<std::size_t>(), e[2].get<double>()};
      if (edge.i >= n || edge.j >= n) throw InvariantViolation("space file: edge " + at(edge.i, edge.j) + " out of range");
      const auto key = std::minmax(edge.i, edge.j);
      auto [it, fresh] = seen.emplace(key, edge.c);
      if (!fresh) {
        // Both orientations may be listed; they must agree.
        if (it->second != edge.c) throw InvariantViolation("space file: asymmetric conductance on " + at(edge.i, edge.j));
        continue;
      }
      edges.push_back(edge);
    }
    std::string name = doc.value("name", std::string("file"));

    std::vector<double> coords;
    int coordDim = 0;
    if (doc.contains("coords")) {
      const auto& cs = doc.at("coords");
      if (cs.size() != n) throw InvariantViolation("space file: coords has " + at(cs.size()) + " rows, n = " + at(n));
      for (std::size_t x = 0; x < n; ++x) {
        const auto row = cs[x].get<Vec>();
        if (x == 0) coordDim = static_cast<int>(row.size());
        if (static_cast<int>(row.size()) != coordDim) throw InvariantViolation("space file: ragged coords at " + at(x));
        coords.insert(coords.end(), row.begin(), row.end());
      }
    }

    if (doc.contains("dist") && !doc.contains("metric")) {
      std::vector<double> table;
      table.reserve(n * n);
      const auto& rows = doc.at("dist");
      if (rows.size() != n) throw InvariantViolation("space file: dist has " + at(rows.size()) + " rows, n = " + at(n));
      for (std::size_t x = 0; x < n; ++x) {
        const auto row = rows[x].get<Vec>();
        if (row.size() != n) throw InvariantViolation("space file: dist row " + at(x) + " has wrong length");
        table.insert(table.end(), row.begin(), row.end());
      }
      validate_dense_metric(n, table);
      return MetricMeasureSpace(name, std::move(mu), edges, Metric::dense(n, std::move(table)), std::move(coords),
                                coordDim);
    }

    if (doc.contains("metric")) {
      const auto& m = doc.at("metric");
      const std::string kind = m.at("kind").get<std::string>();
      const int dim = m.at("dim").get<int>();
      if (coordDim != dim) throw InvariantViolation("space file: metric dim does not match coords");
      std::optional<GridInfo> grid;
      if (m.contains("grid")) {
        const auto& g = m.at("grid");
        grid = GridInfo{g.at("dim").get<int>(), g.at("side").get<int>(), g.at("h").get<double>(),
                        g.at("periodic").get<bool>()};
      }
      std::vector<double> c2 = coords;
      Metric metric = kind == "euclidean" ? Metric::euclidean(dim, std::move(c2))
                      : kind == "torus"   ? Metric::torus(dim, std::move(c2), m.at("period").get<double>())
                                          : throw InvariantViolation("space file: unknown metric kind '" + kind + "'");
      return MetricMeasureSpace(name, std::move(mu), edges, std::move(metric), std::move(coords), coordDim, grid);
    }

    // No metric given: validate the graph with a placeholder, then recompute.
    MetricMeasureSpace probe(name, mu, edges, Metric::dense(n, std::vector<double>(n * n, 0.0)));
    Matrix d = intrinsic_metric(probe, cap);
    std::vector<double> table(d.data(), d.data() + n * n);
    return MetricMeasureSpace(name, std::move(mu), edges, Metric::dense(n, std::move(table)), std::move(coords),
                              coordDim);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("space file: ") + e.what());
  }
}

MetricMeasureSpace load_space(const std::filesystem::path& path, std::size_t cap) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open space file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_space(buf.str(), cap);
}

std::string serialize_space(const MetricMeasureSpace& space, bool includeDist) {
  const std::size_t n = space.size();
  ojson doc;
  doc["name"] = space.name();
  doc["n"] = n;
  doc["mu"] = Vec(space.mu().begin(), space.mu().end());
  ojson edges = ojson::array();
  for (const Edge& e : space.edges()) edges.push_back({e.i, e.j, e.c});
  doc["edges"] = std::move(edges);
  const int cd = space.coord_dim();
  if (cd > 0) {
    ojson coords = ojson::array();
    const auto c = space.coords();
    for (std::size_t x = 0; x < n; ++x) {
      coords.push_back(Vec(c.begin() + static_cast<long>(x) * cd, c.begin() + static_cast<long>(x + 1) * cd));
    }
    doc["coords"] = std::move(coords);
  }
  const Metric& metric = space.metric();
  if (metric.kind() != Metric::Kind::Dense) {
    ojson m;
    m["kind"] = metric.kind() == Metric::Kind::Euclidean ? "euclidean" : "torus";
    m["dim"] = metric.dim();
    if (metric.kind() == Metric::Kind::Torus) m["period"] = metric.period();
    if (const auto& g = space.grid()) {
      m["grid"] = {{"dim", g->dim}, {"side", g->side}, {"h", g->h}, {"periodic", g->periodic}};
    }
    doc["metric"] = std::move(m);
  }
  if (includeDist || metric.kind() == Metric::Kind::Dense) {
    ojson rows = ojson::array();
    Vec row(n);
    for (std::size_t x = 0; x < n; ++x) {
      space.distance_row(x, row);
      rows.push_back(row);
    }
    doc["dist"] = std::move(rows);
  }
  return doc.dump(1);
}

void save_space(const MetricMeasureSpace& space, const std::filesystem::path& path, bool includeDist) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write space file " + path.string());
  out << serialize_space(space, includeDist) << '\n';
}

}  // namespace dirbv
