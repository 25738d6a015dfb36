#pragma once

#include <vector>

#include "dirbv/space.hpp"

namespace testing {

inline dirbv::MetricMeasureSpace two_point() {
  return dirbv::build_lattice(1, 2, 1.0);
}

inline dirbv::MetricMeasureSpace four_cycle() { return dirbv::build_torus(1, 4, 1.0); }

inline dirbv::Vec random_function(std::size_t n, std::uint64_t seed) {
  dirbv::Rng rng(seed);
  dirbv::Vec f(n);
  for (double& v : f) v = rng.uniform(-1.0, 1.0);
  return f;
}

inline dirbv::Matrix random_batch(std::size_t m, std::size_t n, std::uint64_t seed) {
  dirbv::Rng rng(seed);
  dirbv::Matrix b(m, n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t x = 0; x < n; ++x) b(i, x) = rng.uniform(-1.0, 1.0);
  return b;
}

}  // namespace testing
