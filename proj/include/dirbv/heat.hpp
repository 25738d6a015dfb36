#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "dirbv/common.hpp"
#include "dirbv/space.hpp"

namespace dirbv {

/// Eigenpairs of the generator. Column k of `phi` is phi_k, orthonormal in
/// <f,g> = sum f g mu; eigenvalues ascend from exactly 0.
struct SpectralData {
  Vec eigenvalues;
  Matrix phi;
  Vec mu;
  double rawLambda0 = 0.0;  // solver value before the exact replacement

  std::size_t size() const { return eigenvalues.size(); }
  /// <f, phi_k>_mu for every k.
  Vec coefficients(std::span<const double> f) const;
};

/// Symmetrize by mu^{1/2}, solve with dsyevd, map back. phi_0 and lambda_0 are
/// replaced by their exact values (constant, 0) once the solver confirms them.
SpectralData spectral_decompose(const MetricMeasureSpace& space, std::size_t cap = kDefaultCapacity);

/// Lf(x) = (1/mu(x)) sum_y c(x,y) (f(y) - f(x)).
Vec generator_apply(const MetricMeasureSpace& space, std::span<const double> f);
Matrix generator_matrix(const MetricMeasureSpace& space);

/// p_t(x,y) = sum_k exp(-lambda_k t) phi_k(x) phi_k(y).
double heat_kernel(const SpectralData& d, double t, std::size_t x, std::size_t y);
Matrix heat_kernel_matrix(const SpectralData& d, double t);

/// P_t f(x) = sum_y p_t(x,y) f(y) mu(y).
Vec apply_semigroup(const SpectralData& d, double t, std::span<const double> f);
/// Batch form; one function per row.
Matrix apply_semigroup(const SpectralData& d, double t, const Matrix& batch);

/// sqrt(-L) f = sum_k sqrt(lambda_k) <f,phi_k> phi_k.
Vec sqrt_generator_apply(const SpectralData& d, std::span<const double> f);

struct SpectralResiduals {
  double lambda0 = 0.0;          // |raw lambda_0| / lambda_max
  double orthonormality = 0.0;   // max |Phi^T M Phi - I|
  double eigenResidual = 0.0;    // max_k ||L phi_k - (-lambda_k) phi_k||_inf / max(1, lambda_max)
};

SpectralResiduals spectral_residuals(const MetricMeasureSpace& space, const SpectralData& d);

struct HeatResiduals {
  double symmetry = 0.0;           // max |p_t(x,y) - p_t(y,x)|
  double conservativeness = 0.0;   // max |sum_y p_t(x,y) mu(y) - 1|
  double positivity = 0.0;         // max(0, -min p_t) / max p_t
  double chapmanKolmogorov = 0.0;  // max |p_t * p_s - p_{t+s}| / max p_{t+s}
  double parseval = 0.0;           // relative, over the battery
  double energyIdentity = 0.0;     // |sum lambda_k c_k^2 - E(f,f)| / E(f,f)
  double sqrtGenerator = 0.0;      // | ||sqrt(-L) f||^2 - E(f,f) | / E(f,f)
  double contractivity = 0.0;      // max over p in {1,2,inf} of ||P_t f||_p - ||f||_p, clipped at 0
  std::size_t timesChecked = 0;
  std::size_t functionsChecked = 0;
};

/// Every heat invariant over the time grid and a battery of functions.
HeatResiduals verify_heat(const MetricMeasureSpace& space, const SpectralData& d, std::span<const double> tGrid,
                          const Matrix& battery);

struct Witness {
  double t = 0.0;
  std::size_t x = 0;
  std::size_t y = 0;
};

struct GaussianFit {
  double c1 = 0.0;
  double c2 = 0.0;
  double Cg = 1.0;
  double CgLowerHalf = 1.0;  // same fit restricted to the lower half of the log-t grid
  double slope = 0.0;        // raw regression slope b
  Vec resolvedTimes;
  double worstLowerSlack = 1.0;
  double worstUpperSlack = 1.0;
  Witness lowerWitness;
  Witness upperWitness;
  std::size_t samples = 0;
  std::size_t excludedNonpositive = 0;
  double diagonalExponent = 0.0;  // slope of log p_t(o,o) vs log t at the metric center o
  std::uint64_t seed = 0;

  double stability() const { return CgLowerHalf > 0.0 ? Cg / CgLowerHalf : 1.0; }
};

/// Fit 1/(C mu(B(x,sqrt t))) e^{-c1 d^2/t} <= p_t(x,y) <= C/mu(B(x,sqrt t)) e^{-c2 d^2/t}
/// over at most `maxSamples` seeded (t,x,y) triples with y within 4 sqrt(t) of x.
GaussianFit gaussian_bound_fit(const MetricMeasureSpace& space, const SpectralData& d, std::span<const double> tGrid,
                               std::uint64_t seed = 1, std::size_t maxSamples = 20000);

/// Vertex minimizing the largest distance to any other vertex.
std::size_t metric_center(const MetricMeasureSpace& space);

}  // namespace dirbv
