#pragma once

// Outer-sum plan shared by the pair-sum estimators: every row when the space
// is small, otherwise one seeded row per contiguous stratum, weighted by the
// stratum size.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "dirbv/common.hpp"

namespace dirbv::detail {

struct RowPlan {
  std::vector<std::size_t> rows;
  Vec weight;
  bool sampled = false;
};

inline RowPlan plan_rows(std::size_t n, std::size_t exactLimit, std::size_t strata, std::uint64_t seed) {
  RowPlan plan;
  if (n <= exactLimit || strata >= n) {
    plan.rows.resize(n);
    for (std::size_t x = 0; x < n; ++x) plan.rows[x] = x;
    plan.weight.assign(n, 1.0);
    return plan;
  }
  plan.sampled = true;
  Rng rng(seed);
  for (std::size_t s = 0; s < strata; ++s) {
    const std::size_t lo = s * n / strata;
    const std::size_t hi = (s + 1) * n / strata;
    plan.rows.push_back(lo + rng.index(hi - lo));
    plan.weight.push_back(static_cast<double>(hi - lo));
  }
  return plan;
}

}  // namespace dirbv::detail
