#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dirbv/battery.hpp"
#include "dirbv/common.hpp"
#include "dirbv/heat.hpp"
#include "dirbv/space.hpp"

namespace dirbv {

enum class SeminormKind { heat, metric };

const char* to_string(SeminormKind kind);

/// Energies on a scale grid and the resulting seminorm
/// max_s s^{-alpha} energy(s). Heat profiles use t as the scale, metric
/// profiles use r.
struct SeminormProfile {
  SeminormKind kind = SeminormKind::heat;
  double p = 1.0;
  Vec grid;
  Vec energies;
  double alpha = 0.0;
  double seminorm = 0.0;
  double argmaxScale = 0.0;
  bool sampled = false;       // heat only: pair sum estimated from sampled rows
  std::size_t rowsUsed = 0;

  Vec scaled_energies() const;
};

struct BesovOptions {
  std::size_t exactLimit = 1024;  // exact double sum up to this many vertices
  std::size_t sampleRows = 512;   // strata above the limit
  std::uint64_t seed = 1;
  bool checkRange = true;         // require the grid inside the resolved window
};

/// E_p(t) = (sum_x sum_y p_t(x,y) |f(x)-f(y)|^p mu(x) mu(y))^{1/p}. Above
/// exactLimit the outer sum is estimated by stratified row sampling: the
/// vertex range is cut into sampleRows contiguous strata and one seeded row is
/// drawn from each; the inner sum stays exact.
std::vector<SeminormProfile> heat_besov_profiles(const MetricMeasureSpace& space, const SpectralData& d,
                                                 const Matrix& batch, double p, std::span<const double> tGrid,
                                                 double alpha, const BesovOptions& options = {});
SeminormProfile heat_besov_profile(const MetricMeasureSpace& space, const SpectralData& d, std::span<const double> f,
                                   double p, std::span<const double> tGrid, double alpha,
                                   const BesovOptions& options = {});

/// N_p(r) = (sum_x mu(x)/mu(B(x,r)) sum_{y in B(x,r)} |f(x)-f(y)|^p mu(y))^{1/p},
/// closed balls, always exact.
std::vector<SeminormProfile> metric_besov_profiles(const MetricMeasureSpace& space, const Matrix& batch, double p,
                                                   std::span<const double> rGrid, double alpha,
                                                   const BesovOptions& options = {});
SeminormProfile metric_besov_profile(const MetricMeasureSpace& space, std::span<const double> f, double p,
                                     std::span<const double> rGrid, double alpha, const BesovOptions& options = {});

struct SeminormComparison {
  double p = 1.0;
  double alpha = 0.0;  // metric exponent; the heat side uses alpha/2 on t = r^2
  Vec rGrid;
  Vec ratios;          // heat seminorm / metric seminorm per function
  std::vector<bool> bothZero;
  double spread = 1.0;
  std::vector<SeminormProfile> heat;
  std::vector<SeminormProfile> metric;
  // Lower-bound replay E_p(r^2)^p >= e^{-c1}/Cg * N_p(r)^p, filled when a
  // Gaussian fit is supplied.
  bool lowerBoundChecked = false;
  double lowerBoundConstant = 0.0;  // e^{-c1}/Cg
  double worstLowerRatio = 0.0;     // min over functions and grid of E^p / N^p
  bool lowerBoundHolds = true;
};

SeminormComparison compare_seminorms(const MetricMeasureSpace& space, const SpectralData& d, const Matrix& batch,
                                     double p, double alpha, std::span<const double> rGrid,
                                     const GaussianFit* fit = nullptr, const BesovOptions& options = {});

/// Slope of log energy against log scale over the positive energies.
LineFit smoothness_exponent(const SeminormProfile& profile);

struct CriticalExponentReport {
  double p = 1.0;
  std::string battery;
  std::vector<std::string> functionNames;
  Matrix levelSlopes;   // level x function, raw per-level slopes
  Vec batterySlopes;    // refinement-stable slope per function
  std::vector<std::string> smoothedNames;
  Vec smoothedSlopes;
  double alphaStar = 0.0;
  double alphaSharp = 0.0;
  std::vector<std::string> refinementLevels;
  Vec meshSizes;
  std::size_t excludedConstant = 0;
  bool empty = false;
};

struct CriticalStudyOptions {
  double pointsPerDecade = 8.0;
  double smoothingTime = 0.01;   // t0 of the smoothed battery, in domain units
  std::size_t batterySize = 0;   // 0 keeps the whole named battery
  std::size_t smoothedCount = 8;
  double fitWindow = 0.5;       // fraction of the log-t range kept, from its lower end
  BesovOptions besov;
};

struct StudyLevel {
  const MetricMeasureSpace* space = nullptr;
  const SpectralData* spectral = nullptr;
};

/// Refinement study: per level and function, the slope of log E_p(t) against
/// log t over the lower half of the resolved range; per function the slopes are
/// extrapolated linearly in the mesh size to h = 0. alphaSharp is the largest
/// extrapolated slope over the nonconstant battery, alphaStar the smallest over
/// the smoothed random battery.
CriticalExponentReport critical_exponent_study(std::span<const StudyLevel> levels, double p,
                                               const std::string& battery, const CriticalStudyOptions& options = {});
CriticalExponentReport critical_exponent_study(const std::function<MetricMeasureSpace(int)>& builder,
                                               std::span<const int> levels, double p, const std::string& battery,
                                               const CriticalStudyOptions& options = {});

/// sup over battery and grid of sqrt(t) ||P_t f||_{p,1/2} / ||f||_p, the
/// inner seminorm taken over the same grid.
struct ContinuityFit {
  double constant = 0.0;
  double stability = 1.0;     // decade_growth of the per-time maxima
  double decadeSpread = 1.0;  // decade_stability of the same
  Vec perTime;              // max over the battery at each t
  double witnessTime = 0.0;
  std::size_t witnessFunction = 0;
  std::size_t skippedZero = 0;
};

ContinuityFit semigroup_besov_continuity_check(const MetricMeasureSpace& space, const SpectralData& d, double p,
                                               const Matrix& batch, std::span<const double> tGrid,
                                               const BesovOptions& options = {});

/// Maxima of `values` over consecutive decades of `grid`, as max/min; 1 when
/// fewer than two decades carry data.
double decade_stability(std::span<const double> grid, std::span<const double> values);

/// max of `values` over the whole grid divided by its max over the first
/// decade: how much a sup constant grows when the window is widened.
double decade_growth(std::span<const double> grid, std::span<const double> values);

}  // namespace dirbv
