#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "dirbv/common.hpp"
#include "dirbv/space.hpp"

namespace dirbv {

/// Maximally separated epsilon-covering built by a greedy scan in vertex
/// order. memberOf[x] lists the center slots i with d(x, centers[i]) <= eps.
struct Covering {
  double epsilon = 0.0;
  std::vector<std::size_t> centers;
  std::vector<std::vector<std::size_t>> memberOf;
};

Covering max_separated_covering(const MetricMeasureSpace& space, double epsilon);

struct CoveringCheck {
  bool separated = true;  // pairwise center distance >= eps
  bool covers = true;     // every vertex within eps of a center
  bool maximal = true;    // no vertex is >= eps from all centers
  double minCenterDistance = 0.0;
  bool ok() const { return separated && covers && maximal; }
};

CoveringCheck check_covering(const MetricMeasureSpace& space, const Covering& cov);

/// Center slots within C*eps of x, for every x.
std::vector<std::vector<std::size_t>> members_at_dilation(const MetricMeasureSpace& space, const Covering& cov,
                                                          double dilation);

/// K(C) = max_x #{i : d(x, c_i) <= C eps}.
std::size_t overlap_multiplicity(const MetricMeasureSpace& space, const Covering& cov, double dilation);

/// phi_i = psi_i / sum_j psi_j with tent bumps psi_i = max(0, 1 - d(., c_i)/(2 eps)).
/// Weights are stored sparsely per vertex as (center slot, value).
struct PartitionOfUnity {
  Covering covering;
  std::vector<std::vector<std::pair<std::size_t, double>>> weights;
  double lipBound = 0.0;  // eps * max over edges and slots of |phi_i(x) - phi_i(y)| / d(x,y)
};

PartitionOfUnity partition_of_unity(const MetricMeasureSpace& space, const Covering& cov);

/// mu-averages of f over the closed balls B(c_i, eps).
Vec ball_averages(const MetricMeasureSpace& space, const Covering& cov, std::span<const double> f);

/// u_eps = sum_i f_{B_i} phi_i.
Vec discrete_convolution(const MetricMeasureSpace& space, const PartitionOfUnity& pou, std::span<const double> f);

struct RelaxationEnergy {
  Vec epsilons;
  Vec energies;  // integral of |grad u_eps|^p d mu
  double sup = 0.0;
  std::size_t argmax = 0;
};

/// With `checkRange` the epsilons must lie in the resolved radius window.
RelaxationEnergy relaxation_energy(const MetricMeasureSpace& space, std::span<const double> f,
                                   std::span<const double> epsilons, double p, bool checkRange = true);

}  // namespace dirbv
