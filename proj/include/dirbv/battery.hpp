#pragma once

// Test-function families. Families built from coordinates are defined on the
// continuum domain and sampled at the vertices, so the same battery can be
// compared across refinement levels.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "dirbv/common.hpp"
#include "dirbv/heat.hpp"
#include "dirbv/space.hpp"

namespace dirbv {

struct Battery {
  std::vector<std::string> names;
  std::vector<Vec> functions;

  std::size_t size() const { return names.size(); }
  void add(std::string name, std::span<const double> f);
  void append(const Battery& other);
  /// One function per row.
  Matrix matrix() const;
  /// Rows whose values are not all equal.
  Battery nonconstant() const;
  Battery slice(std::size_t first, std::size_t count) const;
};

/// All single-vertex indicators, or `cap` seeded picks when n > cap.
Battery vertex_indicators(const MetricMeasureSpace& space, std::size_t cap = 512, std::uint64_t seed = 1);

/// Independent uniform +-1 vectors.
Battery rademacher(const MetricMeasureSpace& space, std::size_t count, std::uint64_t seed);

/// P_{t0} applied to uniform [-1,1] vectors.
Battery smoothed_random(const SpectralData& d, std::size_t count, double t0, std::uint64_t seed);

/// Half-space indicators: axis and diagonal cuts through the coordinate box
/// (periodic bands on a torus); on spaces without coordinates, Voronoi
/// splits {d(., a) < d(., b)} for seeded vertex pairs.
Battery half_spaces(const MetricMeasureSpace& space, std::uint64_t seed = 1);

/// Coordinates, distance to the center and smooth trigonometric products.
Battery lipschitz_functions(const MetricMeasureSpace& space);

/// Indicators of closed balls around the metric center.
Battery disk_indicators(const MetricMeasureSpace& space, std::span<const double> radii);

/// Unions of three balls with seeded centers and radii, in domain units.
Battery random_blobs(const MetricMeasureSpace& space, std::size_t count, std::uint64_t seed);

/// Smooth bumps exp(-|x-c|^2 / s^2) at seeded centers.
Battery smooth_bumps(const MetricMeasureSpace& space, std::size_t count, std::uint64_t seed);

/// Named families used by the CLI and the acceptance suite:
///   indicators, rademacher, smoothed, halfspace, lipschitz, disks, blobs,
///   bumps, mixed (default), be (weak/quasi BE battery), geometric (half-spaces,
///   disks of radius diam/10 and diam/5, blobs)
/// `d` is required for smoothed, mixed and be.
Battery named_battery(const MetricMeasureSpace& space, const SpectralData* d, const std::string& name,
                      std::size_t size, std::uint64_t seed);

}  // namespace dirbv
