#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <cblas.h>
#include <lapacke.h>

#include "dirbv/blas_guard.hpp"
#include "dirbv/kernels.hpp"

namespace dirbv::kernels {

void symmetric_eigen(Matrix& a, Vec& w) {
  const auto n = static_cast<lapack_int>(a.rows());
  if (a.rows() != a.cols()) throw DomainError("symmetric_eigen: matrix is not square");
  w.assign(a.rows(), 0.0);
  if (n == 0) return;
  require_sane_blas();
  const lapack_int info = LAPACKE_dsyevd(LAPACK_ROW_MAJOR, 'V', 'U', n, a.data(), n, w.data());
  if (info != 0) throw NumericError("dsyevd failed to converge (info = " + std::to_string(info) + ")");
}

std::size_t active_modes(std::span<const double> eigenvalues, double t) {
  const double cut = -std::log(kModeFloor);
  std::size_t k = 0;
  while (k < eigenvalues.size() && eigenvalues[k] * t <= cut) ++k;
  return std::max<std::size_t>(k, std::min<std::size_t>(1, eigenvalues.size()));
}

namespace parallel {

Vec carre_du_champ(const MetricMeasureSpace& space, std::span<const double> f) {
  const auto n = static_cast<long>(space.size());
  Vec g(space.size());
#pragma omp parallel for schedule(static)
  for (long xi = 0; xi < n; ++xi) {
    const auto x = static_cast<std::size_t>(xi);
    double s = 0.0;
    for (const Neighbor& nb : space.neighbors(x)) {
      const double d = f[x] - f[nb.index];
      s += nb.c * d * d;
    }
    g[x] = std::sqrt(s / (2.0 * space.measure(x)));
  }
  return g;
}

Matrix heat_kernel_rows(const Matrix& phi, std::span<const double> lambda, double t,
                        std::span<const std::size_t> rows) {
  const std::size_t n = phi.rows();
  const std::size_t modes = active_modes(lambda, t);
  const std::size_t s = rows.size();
  Matrix b(s, modes);
  for (std::size_t i = 0; i < s; ++i)
    for (std::size_t m = 0; m < modes; ++m) b(i, m) = std::exp(-lambda[m] * t) * phi(rows[i], m);
  Matrix k(s, n);
  if (s == 0) return k;
  cblas_dgemm(CblasRowMajor, CblasNoTrans, CblasTrans, static_cast<int>(s), static_cast<int>(n),
              static_cast<int>(modes), 1.0, b.data(), static_cast<int>(modes), phi.data(), static_cast<int>(n), 0.0,
              k.data(), static_cast<int>(n));
  return k;
}

Matrix heat_kernel_matrix(const Matrix& phi, std::span<const double> lambda, double t) {
  const std::size_t n = phi.rows();
  const std::size_t modes = active_modes(lambda, t);
  Matrix b(n, modes);
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t m = 0; m < modes; ++m) b(x, m) = std::exp(-0.5 * lambda[m] * t) * phi(x, m);
  Matrix k(n, n, 0.0);
  cblas_dsyrk(CblasRowMajor, CblasUpper, CblasNoTrans, static_cast<int>(n), static_cast<int>(modes), 1.0, b.data(),
              static_cast<int>(modes), 0.0, k.data(), static_cast<int>(n));
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < x; ++y) k(x, y) = k(y, x);
  return k;
}

Matrix semigroup_apply(const Matrix& phi, std::span<const double> lambda, std::span<const double> mu, double t,
                       const Matrix& batch) {
  const std::size_t n = phi.rows();
  const std::size_t m = batch.rows();
  const std::size_t modes = active_modes(lambda, t);
  Matrix out(m, n, 0.0);
  if (m == 0) return out;
  Matrix weighted(m, n);
  for (std::size_t f = 0; f < m; ++f)
    for (std::size_t x = 0; x < n; ++x) weighted(f, x) = batch(f, x) * mu[x];
  Matrix coef(m, modes);
  cblas_dgemm(CblasRowMajor, CblasNoTrans, CblasNoTrans, static_cast<int>(m), static_cast<int>(modes),
              static_cast<int>(n), 1.0, weighted.data(), static_cast<int>(n), phi.data(), static_cast<int>(n), 0.0,
              coef.data(), static_cast<int>(modes));
  for (std::size_t f = 0; f < m; ++f)
    for (std::size_t k = 0; k < modes; ++k) coef(f, k) *= std::exp(-lambda[k] * t);
  cblas_dgemm(CblasRowMajor, CblasNoTrans, CblasTrans, static_cast<int>(m), static_cast<int>(n),
              static_cast<int>(modes), 1.0, coef.data(), static_cast<int>(modes), phi.data(), static_cast<int>(n), 0.0,
              out.data(), static_cast<int>(n));
  return out;
}

Matrix kernel_row_sums(const Matrix& kernelRows, std::span<const std::size_t> rows, std::span<const double> mu,
                       const Matrix& source, const Matrix& target, double p) {
  const std::size_t n = mu.size();
  const std::size_t m = source.rows();
  Matrix out(m, rows.size(), 0.0);
  auto sweep = [&](auto power) {
    const auto s = static_cast<long>(rows.size());
#pragma omp parallel for schedule(dynamic, 8)
    for (long ii = 0; ii < s; ++ii) {
      const auto i = static_cast<std::size_t>(ii);
      const double* krow = kernelRows.row(i).data();
      const double* w = mu.data();
      for (std::size_t f = 0; f < m; ++f) {
        const double a = source(f, rows[i]);
        const double* trow = target.row(f).data();
        double acc = 0.0;
        for (std::size_t y = 0; y < n; ++y) acc += krow[y] * power(a - trow[y]) * w[y];
        out(f, i) = acc;
      }
    }
  };
  // The exponent is dispatched once so the common cases vectorize.
  if (p == 1.0) sweep([](double v) { return std::abs(v); });
  else if (p == 2.0) sweep([](double v) { return v * v; });
  else sweep([p](double v) { return abs_pow(v, p); });
  return out;
}

PairProfiles metric_pair_profiles(const MetricMeasureSpace& space, const Matrix& batch, double p,
                                  std::span<const double> radii) {
  const std::size_t n = space.size();
  const std::size_t m = batch.rows();
  const std::size_t nr = radii.size();
  PairProfiles out{Matrix(m, nr, 0.0), Matrix(m, nr, 0.0)};
  // Vertices are processed in blocks; per-vertex contributions are reduced in
  // vertex order so the sums do not depend on the schedule.
  constexpr std::size_t kBlock = 256;
  std::vector<double> avg(kBlock * m * nr), plain(kBlock * m * nr);
  for (std::size_t base = 0; base < n; base += kBlock) {
    const std::size_t len = std::min(kBlock, n - base);
    const auto blockLen = static_cast<long>(len);
#pragma omp parallel
    {
      Vec row(n), cum(n);
      std::vector<std::size_t> order(n), cut(nr);
      Vec ballMass(nr);
#pragma omp for schedule(dynamic, 4)
      for (long li = 0; li < blockLen; ++li) {
        const auto local = static_cast<std::size_t>(li);
        const std::size_t x = base + local;
        space.distance_row(x, row);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return row[a] != row[b] ? row[a] < row[b] : a < b; });
        for (std::size_t r = 0; r < nr; ++r) {
          const double lim = radii[r] * (1.0 + 1e-12);
          cut[r] = static_cast<std::size_t>(std::upper_bound(order.begin(), order.end(), lim,
                                                             [&](double v, std::size_t idx) { return v < row[idx]; }) -
                                            order.begin());
        }
        const std::size_t reach = nr ? *std::max_element(cut.begin(), cut.end()) : 0;
        double acc = 0.0;
        for (std::size_t j = 0; j < reach; ++j) {
          acc += space.measure(order[j]);
          cum[j] = acc;
        }
        for (std::size_t r = 0; r < nr; ++r) ballMass[r] = cut[r] ? cum[cut[r] - 1] : 0.0;
        const double mx = space.measure(x);
        for (std::size_t f = 0; f < m; ++f) {
          const double fx = batch(f, x);
          double run = 0.0;
          for (std::size_t j = 0; j < reach; ++j) {
            const std::size_t y = order[j];
            run += abs_pow(fx - batch(f, y), p) * space.measure(y);
            cum[j] = run;
          }
          for (std::size_t r = 0; r < nr; ++r) {
            const double sr = cut[r] ? cum[cut[r] - 1] : 0.0;
            const std::size_t slot = (local * m + f) * nr + r;
            avg[slot] = mx / ballMass[r] * sr;
            plain[slot] = mx * sr;
          }
        }
      }
    }
    for (std::size_t local = 0; local < len; ++local)
      for (std::size_t f = 0; f < m; ++f)
        for (std::size_t r = 0; r < nr; ++r) {
          out.ballAveraged(f, r) += avg[(local * m + f) * nr + r];
          out.plain(f, r) += plain[(local * m + f) * nr + r];
        }
  }
  return out;
}

}  // namespace parallel
}  // namespace dirbv::kernels
