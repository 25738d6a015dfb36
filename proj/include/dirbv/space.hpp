#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dirbv/common.hpp"

namespace dirbv {

struct Edge {
  std::size_t i = 0;
  std::size_t j = 0;
  double c = 0.0;
};

struct Neighbor {
  std::size_t index = 0;
  double c = 0.0;
};

/// Regular grid structure carried by lattice and torus spaces. Vertex
/// (i_0, ..., i_{d-1}) has index sum_k i_k * side^k.
struct GridInfo {
  int dim = 0;
  int side = 0;
  double h = 0.0;
  bool periodic = false;
};

/// Distance oracle: a dense table, or a lazy rule over embedding coordinates.
class Metric {
 public:
  enum class Kind { Dense, Euclidean, Torus };

  static Metric dense(std::size_t n, std::vector<double> table);
  static Metric euclidean(int dim, std::vector<double> coords);
  static Metric torus(int dim, std::vector<double> coords, double period);

  Kind kind() const { return kind_; }
  std::size_t size() const { return n_; }
  int dim() const { return dim_; }
  double period() const { return period_; }

  double operator()(std::size_t x, std::size_t y) const;
  void row(std::size_t x, std::span<double> out) const;

 private:
  Kind kind_ = Kind::Dense;
  std::size_t n_ = 0;
  int dim_ = 0;
  double period_ = 0.0;
  std::vector<double> table_;  // dense table or coordinates
};

/// Boolean vertex membership.
class VertexSet {
 public:
  VertexSet() = default;
  explicit VertexSet(std::size_t n, bool value = false) : bits_(n, value ? 1 : 0) {}
  static VertexSet from_indices(std::size_t n, std::span<const std::size_t> idx);
  static VertexSet from_predicate(std::size_t n, const auto& pred) {
    VertexSet s(n);
    for (std::size_t i = 0; i < n; ++i) s.bits_[i] = pred(i) ? 1 : 0;
    return s;
  }

  std::size_t size() const { return bits_.size(); }
  bool contains(std::size_t i) const { return bits_[i] != 0; }
  void insert(std::size_t i) { bits_[i] = 1; }
  void erase(std::size_t i) { bits_[i] = 0; }
  std::size_t count() const;
  bool empty() const { return count() == 0; }
  VertexSet complement() const;
  Vec indicator() const;
  std::vector<std::size_t> members() const;
  bool subset_of(const VertexSet& other) const;
  bool operator==(const VertexSet&) const = default;

 private:
  std::vector<std::uint8_t> bits_;
};

struct SpaceFingerprint {
  std::size_t n = 0;
  double muSum = 0.0;
  std::size_t edgeCount = 0;
  std::string hash;  // hex FNV-1a over mu, edges and metric kind
};

/// Finite weighted graph with vertex measure and metric. Immutable after
/// construction; the constructor validates every structural invariant.
class MetricMeasureSpace {
 public:
  MetricMeasureSpace(std::string name, Vec mu, std::span<const Edge> edges, Metric metric,
                     std::vector<double> coords = {}, int coordDim = 0,
                     std::optional<GridInfo> grid = std::nullopt);

  const std::string& name() const { return name_; }
  std::size_t size() const { return mu_.size(); }
  std::span<const double> mu() const { return mu_; }
  double measure(std::size_t x) const { return mu_[x]; }
  double total_measure() const { return muTotal_; }
  double measure(const VertexSet& set) const;

  std::span<const Neighbor> neighbors(std::size_t x) const {
    return {adjacency_.data() + offsets_[x], offsets_[x + 1] - offsets_[x]};
  }
  const std::vector<Edge>& edges() const { return edges_; }
  std::size_t edge_count() const { return edges_.size(); }
  std::size_t degree(std::size_t x) const { return offsets_[x + 1] - offsets_[x]; }
  std::size_t max_degree() const { return maxDegree_; }

  const Metric& metric() const { return metric_; }
  double distance(std::size_t x, std::size_t y) const { return metric_(x, y); }
  void distance_row(std::size_t x, std::span<double> out) const { metric_.row(x, out); }
  double mesh_scale() const { return meshScale_; }
  double diameter() const { return diameter_; }

  std::span<const double> coords() const { return coords_; }
  int coord_dim() const { return coordDim_; }
  const std::optional<GridInfo>& grid() const { return grid_; }

  SpaceFingerprint fingerprint() const;

 private:
  std::string name_;
  Vec mu_;
  double muTotal_ = 0.0;
  std::vector<Edge> edges_;
  std::vector<std::size_t> offsets_;
  std::vector<Neighbor> adjacency_;
  std::size_t maxDegree_ = 0;
  Metric metric_;
  double meshScale_ = 0.0;
  double diameter_ = 0.0;
  std::vector<double> coords_;
  int coordDim_ = 0;
  std::optional<GridInfo> grid_;
};

// ---------------------------------------------------------------- builders

/// Grid [0, (side-1)h]^dim with mu = h^dim and c = h^(dim-2) on axis edges.
MetricMeasureSpace build_lattice(int dim, int side, double h, std::size_t cap = kDefaultCapacity);

/// Periodic grid with geodesic torus metric; side >= 3.
MetricMeasureSpace build_torus(int dim, int side, double h, std::size_t cap = kDefaultCapacity);

/// Level-n gasket graph; conductance (5/3)^n, mass 3^-n per cell shared among
/// its corners, shortest-path metric with edge length 2^-n.
MetricMeasureSpace build_sierpinski_gasket(int level, std::size_t cap = kDefaultCapacity);

/// Star / Walsh-spider metric graph. Leg k is cut into `subdivision` intervals
/// of length dx = legLengths[k]/subdivision with c = 1/dx and mu = dx.
MetricMeasureSpace build_metric_graph(std::span<const double> legLengths, int subdivision,
                                      std::size_t cap = kDefaultCapacity);

// ------------------------------------------------------------- operations

/// |grad f|(x) = sqrt( (1/(2 mu(x))) sum_y c(x,y) (f(x)-f(y))^2 ).
Vec carre_du_champ(const MetricMeasureSpace& space, std::span<const double> f);

/// E(f,f) = (1/2) sum_{x,y} c(x,y) (f(x)-f(y))^2.
double dirichlet_energy(const MetricMeasureSpace& space, std::span<const double> f);

/// Shortest-path metric over edge lengths sqrt(min(mu(x),mu(y)) / c(x,y)).
Matrix intrinsic_metric(const MetricMeasureSpace& space, std::size_t cap = kDefaultCapacity);

/// max over x of sup |grad d(x, .)| for a candidate metric table. If K is the
/// result then d/K is admissible in the sup-definition of the intrinsic
/// metric, so the sup-metric is at least d/K.
double metric_gradient_audit(const MetricMeasureSpace& space, const Matrix& dist);

struct MetricAxiomReport {
  std::size_t pairsChecked = 0;
  std::size_t triplesChecked = 0;
  bool exhaustive = false;
  double worstTriangleExcess = 0.0;
  double worstAsymmetry = 0.0;
  bool identityOk = true;
  bool ok() const { return identityOk && worstTriangleExcess <= 1e-12 && worstAsymmetry <= 0.0; }
};

/// Exhaustive on n <= exhaustiveLimit, seeded sampling otherwise.
MetricAxiomReport check_metric_axioms(const MetricMeasureSpace& space, std::size_t exhaustiveLimit = 512,
                                      std::size_t samples = 200000, std::uint64_t seed = 1);

/// Closed ball {y : d(x,y) <= r}.
VertexSet ball(const MetricMeasureSpace& space, std::size_t x, double r);
double ball_measure(const MetricMeasureSpace& space, std::size_t x, double r);

/// Times [h^2, (diam/2)^2] and radii [2h, diam/4] where the graph resolves the
/// continuum picture.
ScaleRange resolved_time_range(const MetricMeasureSpace& space);
ScaleRange resolved_radius_range(const MetricMeasureSpace& space);
Vec resolved_time_grid(const MetricMeasureSpace& space, double pointsPerDecade);
Vec resolved_radius_grid(const MetricMeasureSpace& space, double pointsPerDecade);

/// Throws DomainError when a grid leaves the resolved window.
void require_within(const ScaleRange& range, std::span<const double> grid, const char* what);

struct DoublingProfile {
  double Cdoubling = 1.0;
  double Q = 0.0;           // slope of log sup_x mu(B(x,r)) against log r
  double pooledQ = 0.0;     // slope of the pooled regression over all centers
  ScaleRange resolvedRange;
  double residual = 0.0;
  std::size_t centers = 0;
  std::uint64_t seed = 0;
};

DoublingProfile doubling_profile(const MetricMeasureSpace& space, std::size_t sampleCount,
                                 std::uint64_t seed = 1, double pointsPerDecade = 16.0);

struct PoincareReport {
  double C2 = 0.0;
  double lambdaDilation = 2.0;
  std::size_t ballsSampled = 0;
  std::size_t witnessCenter = 0;
  double witnessRadius = 0.0;
  std::uint64_t seed = 0;
};

/// (avg_B |f - f_B|) / (r * (avg_{lambda B} |grad f|^2)^{1/2}), with the
/// gradient taken on the subgraph induced by lambda B (Neumann).
double poincare_quotient(const MetricMeasureSpace& space, std::size_t center, double radius, double lambda,
                         std::span<const double> f);

PoincareReport poincare_constant(const MetricMeasureSpace& space, std::size_t sampleCount, std::uint64_t seed = 1,
                                 double lambda = 2.0, std::size_t cap = kDefaultCapacity);

// --------------------------------------------------------------------- io

/// JSON: n, mu, edges [[i,j,c]], optional coords, optional dist, optional
/// metric {kind, dim, period, grid}. A missing dist without a metric block is
/// recomputed as the intrinsic metric.
MetricMeasureSpace load_space(const std::filesystem::path& path, std::size_t cap = kDefaultCapacity);
MetricMeasureSpace parse_space(const std::string& json, std::size_t cap = kDefaultCapacity);
std::string serialize_space(const MetricMeasureSpace& space, bool includeDist = false);
void save_space(const MetricMeasureSpace& space, const std::filesystem::path& path, bool includeDist = false);

}  // namespace dirbv
