#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "dirbv/common.hpp"
#include "dirbv/space.hpp"

namespace dirbv {

/// P(E) = sum_x mu(x) |grad 1_E|(x).
double perimeter(const MetricMeasureSpace& space, const VertexSet& e);

/// || |grad f| ||_{L^p(mu)}.
double sobolev_seminorm(const MetricMeasureSpace& space, std::span<const double> f, double p);

struct CoareaReport {
  Vec levels;       // sorted distinct values
  Vec gaps;         // levels[k+1] - levels[k]
  Vec perimeters;   // P({f > midpoint of gap k})
  double bvEnergy = 0.0;
  double sobolevEnergy = 0.0;  // || |grad f| ||_1
  double ratio = 1.0;          // bvEnergy / sobolevEnergy, 1 for constants
};

/// ||Df|| = sum over value gaps of gap * P({f > s}); exact, since the
/// perimeter is constant on each open gap.
CoareaReport coarea_bv(const MetricMeasureSpace& space, std::span<const double> f);

struct RelaxedBV {
  double value = 0.0;
  double direct = 0.0;  // || |grad f| ||_1, the eps -> 0 member
  Vec epsilons;
  Vec energies;         // || |grad u_eps| ||_1 per epsilon
  double argminEpsilon = 0.0;  // 0 when the direct member attains the min
};

/// min over the discrete convolutions u_eps and f itself of || |grad .| ||_1.
RelaxedBV relaxed_bv(const MetricMeasureSpace& space, std::span<const double> f, std::span<const double> epsilons,
                     bool checkRange = true);

/// min over r in the grid of min(mu(B n E), mu(B \ E)) / mu(B), B = B(x,r) closed.
Vec boundary_density(const MetricMeasureSpace& space, const VertexSet& e, std::span<const double> rGrid);

/// x is kept when min(mu(B n E), mu(B \ E)) / mu(B) > alpha for every r in
/// the grid (closed balls B = B(x,r)).
VertexSet measure_theoretic_boundary(const MetricMeasureSpace& space, const VertexSet& e, double alpha,
                                     std::span<const double> rGrid);

/// Vertices of E with a neighbor outside E.
VertexSet inner_vertex_boundary(const MetricMeasureSpace& space, const VertexSet& e);

struct HausdorffContent {
  Vec scales;
  Vec values;          // index scan order
  Vec reverseValues;   // reverse scan order
  std::vector<std::size_t> centers;  // per scale, index order
  double headline = 0.0;  // value at the smallest scale
  double slack = 0.0;     // max relative gap between the two scan orders
};

/// Greedy cover of A by open balls B(c, eps/2): scanning A, a point is made
/// a center when it lies at distance >= eps/2 from every earlier center. The
/// value is sum mu(B(c, eps/2)) / (eps/2).
HausdorffContent hausdorff_content(const MetricMeasureSpace& space, const VertexSet& a,
                                   std::span<const double> epsScales, bool checkRange = true);

struct MinkowskiContent {
  Vec radii;
  Vec values;  // mu(A_r) / r with A_r = {x : d(x, A) < r}
  double value = 0.0;
  double argminRadius = 0.0;
};

MinkowskiContent minkowski_content(const MetricMeasureSpace& space, const VertexSet& a, std::span<const double> rGrid);

struct HausdorffPerimeterCheck {
  Vec alphas;
  std::vector<std::size_t> boundarySizes;
  Vec contents;  // H(boundary_alpha E)
  Vec ratios;    // alpha H / P
  double perimeter = 0.0;
  double C = 0.0;
  double worstSlack = 0.0;
};

/// alpha H(boundary_alpha E) <= C P(E) for each alpha; C is the largest ratio.
HausdorffPerimeterCheck check_hausdorff_perimeter(const MetricMeasureSpace& space, const VertexSet& e,
                                                  std::span<const double> alphas, std::span<const double> rGrid,
                                                  std::span<const double> epsScales);

struct LeibnizReport {
  double kappa = 0.0;       // max lhs / rhs
  std::size_t trials = 0;
  std::size_t exactFailures = 0;  // trials with lhs > rhs
};

/// ||D(eta u + (1-eta) v)|| against ||Du|| + ||Dv|| + int |u - v| |grad eta| dmu
/// on seeded random triples with eta a clipped distance profile.
LeibnizReport leibniz_check(const MetricMeasureSpace& space, std::size_t trials, std::uint64_t seed = 1);

struct ComparabilityReport {
  double lower = 1.0;  // min coarea / sobolev
  double upper = 1.0;  // max coarea / sobolev
  double bound = 1.0;  // sqrt(max degree)
  bool holds = true;   // 1 <= ratio <= sqrt(max degree) for every f
};

/// Co-area energy against || |grad f| ||_1 over a batch (one function per row).
ComparabilityReport comparability_check(const MetricMeasureSpace& space, const Matrix& batch);

}  // namespace dirbv
