#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "dirbv/common.hpp"
#include "dirbv/space.hpp"

namespace dirbv {

/// q = pQ / (Q - p delta). Throws unless 0 < delta < Q and 1 <= p < Q/delta.
double sobolev_exponent(double p, double delta, double Q);

/// sup_{s >= 0} s mu{|f| >= s}^{1/q}, exact over the value set of |f|.
double weak_lq_norm(const MetricMeasureSpace& space, std::span<const double> f, double q);

/// mu-weighted lower median. The embeddings are applied to f - median(f):
/// on a finite space constants have finite norm but zero energy.
double weighted_median(const MetricMeasureSpace& space, std::span<const double> f);

struct EmbeddingRecord {
  double p = 1.0;
  double delta = 0.0;
  double Q = 0.0;
  double q = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double constant = 0.0;      // lhs / rhs, 0 when both vanish
  double witnessLevel = 0.0;  // level s* of the weak norm
  double witnessRadius = 0.0; // maximizing r on the right-hand side
  Vec radii;
  Vec scaled;                 // per-radius right-hand-side values
};

/// Weak-type Besov embedding: lhs = weak L^q norm of f - median(f), rhs =
/// sup_r r^{-(delta + Q/p)} (sum_{d(x,y) <= r} |f(x)-f(y)|^p mu(x) mu(y))^{1/p}.
EmbeddingRecord weak_embedding_check(const MetricMeasureSpace& space, std::span<const double> f, double p,
                                     double delta, double Q, std::span<const double> rGrid);

/// (mu x mu){(x,y) in E x E^c : d(x,y) <= r} per radius; exact up to
/// `exactLimit` vertices and on planar lattices (FFT correlation),
/// stratified row sampling otherwise.
Vec boundary_pair_mass(const MetricMeasureSpace& space, const VertexSet& e, std::span<const double> rGrid,
                       std::size_t exactLimit = 1024, std::uint64_t seed = 1);

/// min(mu(E), mu(E^c))^{(Q-delta)/Q} <= C sup_r r^{-(delta+Q)} pair mass(r).
EmbeddingRecord fractional_isoperimetry(const MetricMeasureSpace& space, const VertexSet& e, double delta, double Q,
                                        std::span<const double> rGrid);

/// ||f - median(f)||_{L^q} <= C ||Df|| with q = Q/(Q-1).
EmbeddingRecord bv_sobolev_check(const MetricMeasureSpace& space, std::span<const double> f, double Q);

/// min(mu(E), mu(E^c))^{(Q-1)/Q} <= C P(E).
EmbeddingRecord isoperimetric_check(const MetricMeasureSpace& space, const VertexSet& e, double Q);

// ------------------------------------------------------------ raster sets

using Point = std::array<double, 2>;

/// Koch snowflake polygon (counter-clockwise) on an equilateral triangle of
/// the given side centered in the unit square.
std::vector<Point> koch_polygon(int iterations, double side = 0.75);

/// Iteration used for a given lattice resolution: ceil(log(resolution)/log 3).
int koch_iterations(int resolution);

/// Even-odd fill of a polygon on lattice(2, resolution, 1/(resolution-1));
/// vertex (i, j) has index i + resolution * j.
VertexSet rasterize_polygon(std::span<const Point> polygon, int resolution);

/// Koch snowflake on lattice(2, resolution, 1/(resolution-1)); resolution >= 129.
VertexSet koch_snowflake_set(int resolution);

/// Axis-parallel square [0.25, 0.75]^2, the non-fractal control.
VertexSet square_set(int resolution);

/// Exact Euclidean distance (in units of h) from every pixel to the nearest
/// pixel of `mask`; infinity when the mask is empty.
Vec distance_transform(const std::vector<std::uint8_t>& mask, int side);

struct NeighborhoodFit {
  Vec radii;
  Vec masses;       // mu((boundary E)_r)
  double exponent = 0.0;
  double residual = 0.0;
};

/// mu((boundary E)_r) on a planar raster. The boundary is the cut between
/// pixels of different membership, so a pixel's distance to it is its
/// distance to the nearest pixel touching the cut plus h/2.
NeighborhoodFit boundary_neighborhood_fit(const VertexSet& e, int resolution, std::span<const double> radii);

struct KochLevel {
  int resolution = 0;
  int iterations = 0;
  double h = 0.0;
  double exponent = 0.0;        // fitted slope of log mu((dE)_r) vs log r
  double squareExponent = 0.0;  // same for the control square
  double fracIsoConstant = 0.0; // headline constant with delta = 2 - m, Q = 2
  double fracIsoWitness = 0.0;
  double area = 0.0;
};

struct KochStudy {
  double m = 0.0;       // log 4 / log 3
  double target = 0.0;  // 2 - m
  std::vector<KochLevel> levels;
  double fracIsoStability = 1.0;  // max/min of the constants across levels
};

/// Radii: geometric from 3h to 1/9 in domain units, 8 per decade.
KochStudy koch_study(std::span<const int> resolutions);

}  // namespace dirbv
