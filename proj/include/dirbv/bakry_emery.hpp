#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>

#include "dirbv/common.hpp"
#include "dirbv/heat.hpp"
#include "dirbv/space.hpp"

namespace dirbv {

enum class BEKind { weak, quasi, hamilton, kernelGradient, pseudoPoincare, crossTerm, riesz };

const char* to_string(BEKind kind);

struct BEWitness {
  double t = 0.0;
  std::size_t function = 0;
  std::size_t x = 0;
  std::size_t y = 0;
};

/// Fitted constant of one gradient check. Ties in the sup go to the lowest
/// function id, then the lowest t, then the lowest vertex.
struct BEReport {
  BEKind kind = BEKind::weak;
  double p = 0.0;           // integrability exponent where it applies
  double constant = 0.0;
  BEWitness witness;
  Vec grid;
  Vec perTime;              // sup over the battery at each t
  double stability = 1.0;   // sup over the grid / sup over its first decade
  double decadeSpread = 1.0;  // max/min of the per-decade sups
  double rate = 0.0;        // kernelGradient: Gaussian rate c
  double minRatio = 0.0;    // riesz: smallest ratio
  double spread = 1.0;      // riesz: max/min ratio
  std::size_t evaluated = 0;
  std::size_t skipped = 0;  // guarded denominators, constant members
  std::size_t excluded = 0; // hamilton: nonpositive kernel values
  std::size_t unresolved = 0;  // kernel values below the spectral precision floor
  bool degraded = false;    // excluded share above 1%
  std::size_t exactLimit = 0;  // sampling parameters, kept for re-evaluation
  std::uint64_t seed = 0;
};

/// Tolerance used by the division guards: denominators below
/// kGuard * scale are skipped.
inline constexpr double kGuard = 1e-14;

/// sup t || |grad P_t f| ||_inf^2 / ||f||_inf^2.
BEReport weak_be_constant(const MetricMeasureSpace& space, const SpectralData& d, std::span<const double> tGrid,
                          const Matrix& battery);

/// sup |grad P_t f|(x) / P_t|grad f|(x).
BEReport quasi_be_constant(const MetricMeasureSpace& space, const SpectralData& d, std::span<const double> tGrid,
                           const Matrix& battery);

/// sup t |grad_x ln p_t(x,y)|^2 / (1 + d(x,y)^2/t). Columns y are all
/// vertices up to `exactLimit`, seeded picks above.
BEReport hamilton_check(const MetricMeasureSpace& space, const SpectralData& d, std::span<const double> tGrid,
                        std::size_t exactLimit = 1024, std::uint64_t seed = 1);

/// |grad_x p_t(x,y)| <= C t^{-1/2} e^{-c d^2/t} / sqrt(mu(B(x,sqrt t)) mu(B(y,sqrt t))).
/// c is half the least-squares rate of the log profile, C the resulting sup.
BEReport kernel_gradient_bound(const MetricMeasureSpace& space, const SpectralData& d, std::span<const double> tGrid,
                               std::size_t exactLimit = 256, std::uint64_t seed = 1);

/// sup ||P_t f - f||_p / (sqrt t || |grad f| ||_p).
BEReport pseudo_poincare_check(const MetricMeasureSpace& space, const SpectralData& d, double p,
                               const Matrix& battery, std::span<const double> tGrid);

/// sup (sum_x sum_y |P_t u(x) - u(y)|^p p_t(x,y) mu(x) mu(y))^{1/p} / (sqrt t || |grad u| ||_p).
/// Above exactLimit the outer sum uses the stratified row sample of the
/// Besov estimator.
BEReport cross_term_check(const MetricMeasureSpace& space, const SpectralData& d, double p, const Matrix& battery,
                          std::span<const double> tGrid, std::size_t exactLimit = 1024, std::uint64_t seed = 1);

/// ||sqrt(-L) f||_p / || |grad f| ||_p over the nonconstant battery; the
/// constant is the largest ratio.
BEReport riesz_check(const MetricMeasureSpace& space, const SpectralData& d, double p, const Matrix& battery);

/// Recompute the witness quotient of a report from single kernel and
/// semigroup evaluations. `battery` must be the one the report was built on
/// (ignored for hamilton and kernelGradient).
double reevaluate_witness(const MetricMeasureSpace& space, const SpectralData& d, const BEReport& report,
                          const Matrix& battery);

}  // namespace dirbv
