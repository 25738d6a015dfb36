#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "dirbv/common.hpp"
#include "dirbv/space.hpp"

namespace dirbv {

/// Geometric grid request; an unset grid (max == 0) means the resolved window
/// of the built space.
struct GridSpec {
  double min = 0.0;
  double max = 0.0;
  double perDecade = 8.0;
  bool set() const { return max > 0.0; }
};

struct SpaceSpec {
  std::string builder = "torus";  // torus | lattice | gasket | spider | file
  int dim = 2;
  int side = 16;
  double h = 0.0;                 // 0: 1/side on a torus, 1/(side-1) on a lattice
  int level = 3;
  Vec legs{1.0, 1.0, 1.0};
  int subdivision = 8;
  std::string path;
};

struct Thresholds {
  double pass = 3.0;
  double flag = 10.0;
};

struct ExperimentConfig {
  std::uint64_t seed = 1;
  std::string out = "reports";
  std::size_t cap = kDefaultCapacity;
  SpaceSpec space;
  std::vector<std::string> suites{"heat", "besov", "bv", "be", "ineq"};
  GridSpec tGrid;
  GridSpec rGrid;
  std::string battery = "mixed";
  std::size_t batterySize = 20;
  Thresholds thresholds;

  double besovP = 1.0;
  double besovAlpha = 1.0;
  Vec bePowers{1.0, 2.0, 4.0};
  Vec rieszPowers{1.5, 2.0, 4.0};
  Vec hausdorffAlphas{0.05, 0.1, 0.2};
  double ineqP = 1.0;
  double ineqDelta = 0.5;

  /// Canonical JSON of every field, the input of the hash.
  std::string canonical() const;
  /// Hex FNV-1a of the canonical form (output directory excluded).
  std::string hash() const;
};

/// TOML-style text: `key = value` lines, `[section]` headers, `#` comments,
/// quoted or bare strings, `[a, b]` lists. Unknown sections and keys are
/// rejected with their line number.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

MetricMeasureSpace build_space(const SpaceSpec& spec, std::size_t cap);

/// Grid from a spec, validated against the resolved window when given.
Vec time_grid(const GridSpec& spec, const MetricMeasureSpace& space);
Vec radius_grid(const GridSpec& spec, const MetricMeasureSpace& space);

}  // namespace dirbv
