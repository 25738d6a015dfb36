#include <cmath>

#include "dirbv/kernels.hpp"

namespace dirbv::kernels::serial {

Vec carre_du_champ(const MetricMeasureSpace& space, std::span<const double> f) {
  Vec g(space.size());
  for (std::size_t x = 0; x < space.size(); ++x) {
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
  Matrix k(rows.size(), n, 0.0);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t y = 0; y < n; ++y) {
      double s = 0.0;
      for (std::size_t m = 0; m < lambda.size(); ++m) s += std::exp(-lambda[m] * t) * phi(rows[i], m) * phi(y, m);
      k(i, y) = s;
    }
  return k;
}

Matrix semigroup_apply(const Matrix& phi, std::span<const double> lambda, std::span<const double> mu, double t,
                       const Matrix& batch) {
  const std::size_t n = phi.rows();
  Matrix out(batch.rows(), n, 0.0);
  for (std::size_t f = 0; f < batch.rows(); ++f) {
    for (std::size_t m = 0; m < lambda.size(); ++m) {
      double c = 0.0;
      for (std::size_t x = 0; x < n; ++x) c += batch(f, x) * mu[x] * phi(x, m);
      c *= std::exp(-lambda[m] * t);
      for (std::size_t x = 0; x < n; ++x) out(f, x) += c * phi(x, m);
    }
  }
  return out;
}

Matrix kernel_row_sums(const Matrix& kernelRows, std::span<const std::size_t> rows, std::span<const double> mu,
                       const Matrix& source, const Matrix& target, double p) {
  const std::size_t n = mu.size();
  Matrix out(source.rows(), rows.size(), 0.0);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t f = 0; f < source.rows(); ++f) {
      const double a = source(f, rows[i]);
      double s = 0.0;
      for (std::size_t y = 0; y < n; ++y) s += kernelRows(i, y) * abs_pow(a - target(f, y), p) * mu[y];
      out(f, i) = s;
    }
  return out;
}

PairProfiles metric_pair_profiles(const MetricMeasureSpace& space, const Matrix& batch, double p,
                                  std::span<const double> radii) {
  const std::size_t n = space.size();
  PairProfiles out{Matrix(batch.rows(), radii.size(), 0.0), Matrix(batch.rows(), radii.size(), 0.0)};
  for (std::size_t r = 0; r < radii.size(); ++r) {
    const double lim = radii[r] * (1.0 + 1e-12);
    for (std::size_t x = 0; x < n; ++x) {
      double ballMass = 0.0;
      for (std::size_t y = 0; y < n; ++y)
        if (space.distance(x, y) <= lim) ballMass += space.measure(y);
      for (std::size_t f = 0; f < batch.rows(); ++f) {
        double s = 0.0;
        for (std::size_t y = 0; y < n; ++y)
          if (space.distance(x, y) <= lim) s += abs_pow(batch(f, x) - batch(f, y), p) * space.measure(y);
        out.ballAveraged(f, r) += space.measure(x) / ballMass * s;
        out.plain(f, r) += space.measure(x) * s;
      }
    }
  }
  return out;
}

}  // namespace dirbv::kernels::serial
