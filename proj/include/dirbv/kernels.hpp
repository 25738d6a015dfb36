#pragma once

// Hot loops. Every kernel exists twice: `serial` is the plain reference used
// by the tests, `parallel` is the OpenMP/BLAS version the library calls.
// Parallel reductions accumulate fixed-size blocks and combine them in index
// order, so results do not depend on the thread count.
//
// Batches of functions are stored one function per row (m x n).

#include <cmath>
#include <cstddef>
#include <span>

#include "dirbv/common.hpp"
#include "dirbv/space.hpp"

namespace dirbv::kernels {

/// Symmetric eigensolver (LAPACK dsyevd). On return `a` holds eigenvectors
/// in its columns and `w` the ascending eigenvalues. Throws NumericError.
void symmetric_eigen(Matrix& a, Vec& w);

/// Number of leading modes with exp(-lambda_k t) above the truncation floor.
std::size_t active_modes(std::span<const double> eigenvalues, double t);

struct PairProfiles {
  Matrix ballAveraged;  // m x R: sum_x mu(x)/mu(B(x,r)) sum_{d(x,y)<=r} |df|^p mu(y)
  Matrix plain;         // m x R: sum_x sum_{d(x,y)<=r} |df|^p mu(x) mu(y)
};

/// Truncation floor for exp(-lambda t) in kernel and semigroup sums.
inline constexpr double kModeFloor = 1e-18;

namespace serial {

Vec carre_du_champ(const MetricMeasureSpace& space, std::span<const double> f);

/// Rows of the heat kernel, K(i,y) = sum_k exp(-lambda_k t) phi_k(rows[i]) phi_k(y).
/// `phi` holds the eigenvectors in its columns.
Matrix heat_kernel_rows(const Matrix& phi, std::span<const double> lambda, double t,
                        std::span<const std::size_t> rows);

/// Rows of `batch` mapped through P_t.
Matrix semigroup_apply(const Matrix& phi, std::span<const double> lambda, std::span<const double> mu, double t,
                       const Matrix& batch);

/// out(f,i) = sum_y K(i,y) |source(f, rows[i]) - target(f, y)|^p mu(y).
Matrix kernel_row_sums(const Matrix& kernelRows, std::span<const std::size_t> rows, std::span<const double> mu,
                       const Matrix& source, const Matrix& target, double p);

PairProfiles metric_pair_profiles(const MetricMeasureSpace& space, const Matrix& batch, double p,
                                  std::span<const double> radii);

}  // namespace serial

namespace parallel {

Vec carre_du_champ(const MetricMeasureSpace& space, std::span<const double> f);
Matrix heat_kernel_rows(const Matrix& phi, std::span<const double> lambda, double t,
                        std::span<const std::size_t> rows);
/// Full n x n kernel (SYRK on the truncated mode set).
Matrix heat_kernel_matrix(const Matrix& phi, std::span<const double> lambda, double t);
Matrix semigroup_apply(const Matrix& phi, std::span<const double> lambda, std::span<const double> mu, double t,
                       const Matrix& batch);
Matrix kernel_row_sums(const Matrix& kernelRows, std::span<const std::size_t> rows, std::span<const double> mu,
                       const Matrix& source, const Matrix& target, double p);
PairProfiles metric_pair_profiles(const MetricMeasureSpace& space, const Matrix& batch, double p,
                                  std::span<const double> radii);

}  // namespace parallel

/// |a|^p with the common exponents special-cased.
inline double abs_pow(double a, double p) {
  a = a < 0.0 ? -a : a;
  if (p == 1.0) return a;
  if (p == 2.0) return a * a;
  if (p == 4.0) {
    const double s = a * a;
    return s * s;
  }
  return std::pow(a, p);
}

}  // namespace dirbv::kernels
