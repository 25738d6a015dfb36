#include "dirbv/heat.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <cblas.h>

#include "dirbv/kernels.hpp"

namespace dirbv {

namespace {

void require_time(double t) {
  if (!(t >= 0.0)) throw DomainError("heat: time must be nonnegative");
}

Matrix single_row(std::span<const double> f) {
  Matrix m(1, f.size());
  std::copy(f.begin(), f.end(), m.data());
  return m;
}

}  // namespace

Vec SpectralData::coefficients(std::span<const double> f) const {
  const std::size_t n = size();
  Vec c(n, 0.0);
  Vec weighted(n);
  for (std::size_t x = 0; x < n; ++x) weighted[x] = f[x] * mu[x];
  cblas_dgemv(CblasRowMajor, CblasTrans, static_cast<int>(n), static_cast<int>(n), 1.0, phi.data(),
              static_cast<int>(n), weighted.data(), 1, 0.0, c.data(), 1);
  return c;
}

SpectralData spectral_decompose(const MetricMeasureSpace& space, std::size_t cap) {
  const std::size_t n = space.size();
  if (n > cap) {
    throw CapacityError("spectral_decompose: n = " + std::to_string(n) + " exceeds capacity " + std::to_string(cap));
  }
  Matrix a(n, n, 0.0);
  for (std::size_t x = 0; x < n; ++x) {
    for (const Neighbor& nb : space.neighbors(x)) {
      a(x, x) += nb.c / space.measure(x);
      a(x, nb.index) = -nb.c / std::sqrt(space.measure(x) * space.measure(nb.index));
    }
  }
  SpectralData d;
  kernels::symmetric_eigen(a, d.eigenvalues);
  d.mu.assign(space.mu().begin(), space.mu().end());
  d.phi = Matrix(n, n);
  for (std::size_t x = 0; x < n; ++x) {
    const double s = 1.0 / std::sqrt(space.measure(x));
    for (std::size_t k = 0; k < n; ++k) d.phi(x, k) = a(x, k) * s;
  }
  const double top = std::max(1.0, d.eigenvalues.back());
  d.rawLambda0 = d.eigenvalues.front();
  if (std::abs(d.rawLambda0) > 1e-10 * top) {
    throw NumericError("spectral_decompose: lowest eigenvalue " + std::to_string(d.rawLambda0) +
                       " is not zero (residual relative to lambda_max exceeds 1e-10)");
  }
  d.eigenvalues.front() = 0.0;
  const double c0 = 1.0 / std::sqrt(space.total_measure());
  for (std::size_t x = 0; x < n; ++x) d.phi(x, 0) = c0;
  for (std::size_t k = 1; k < n; ++k) d.eigenvalues[k] = std::max(d.eigenvalues[k], 0.0);
  return d;
}

Vec generator_apply(const MetricMeasureSpace& space, std::span<const double> f) {
  if (f.size() != space.size()) throw DomainError("generator_apply: function length does not match space");
  Vec out(space.size());
  for (std::size_t x = 0; x < space.size(); ++x) {
    double s = 0.0;
    for (const Neighbor& nb : space.neighbors(x)) s += nb.c * (f[nb.index] - f[x]);
    out[x] = s / space.measure(x);
  }
  return out;
}

Matrix generator_matrix(const MetricMeasureSpace& space) {
  const std::size_t n = space.size();
  Matrix l(n, n, 0.0);
  for (std::size_t x = 0; x < n; ++x) {
    for (const Neighbor& nb : space.neighbors(x)) {
      l(x, nb.index) += nb.c / space.measure(x);
      l(x, x) -= nb.c / space.measure(x);
    }
  }
  return l;
}

double heat_kernel(const SpectralData& d, double t, std::size_t x, std::size_t y) {
  require_time(t);
  const std::size_t modes = kernels::active_modes(d.eigenvalues, t);
  double s = 0.0;
  for (std::size_t k = 0; k < modes; ++k) s += std::exp(-d.eigenvalues[k] * t) * d.phi(x, k) * d.phi(y, k);
  return s;
}

Matrix heat_kernel_matrix(const SpectralData& d, double t) {
  require_time(t);
  return kernels::parallel::heat_kernel_matrix(d.phi, d.eigenvalues, t);
}

Vec apply_semigroup(const SpectralData& d, double t, std::span<const double> f) {
  if (f.size() != d.size()) throw DomainError("apply_semigroup: function length does not match space");
  const Matrix out = apply_semigroup(d, t, single_row(f));
  return Vec(out.data(), out.data() + d.size());
}

Matrix apply_semigroup(const SpectralData& d, double t, const Matrix& batch) {
  require_time(t);
  if (batch.cols() != d.size()) throw DomainError("apply_semigroup: batch width does not match space");
  if (t == 0.0) return batch;
  return kernels::parallel::semigroup_apply(d.phi, d.eigenvalues, d.mu, t, batch);
}

Vec sqrt_generator_apply(const SpectralData& d, std::span<const double> f) {
  if (f.size() != d.size()) throw DomainError("sqrt_generator_apply: function length does not match space");
  Vec c = d.coefficients(f);
  for (std::size_t k = 0; k < c.size(); ++k) c[k] *= std::sqrt(d.eigenvalues[k]);
  const std::size_t n = d.size();
  Vec out(n, 0.0);
  cblas_dgemv(CblasRowMajor, CblasNoTrans, static_cast<int>(n), static_cast<int>(n), 1.0, d.phi.data(),
              static_cast<int>(n), c.data(), 1, 0.0, out.data(), 1);
  return out;
}

SpectralResiduals spectral_residuals(const MetricMeasureSpace& space, const SpectralData& d) {
  const std::size_t n = d.size();
  SpectralResiduals r;
  const double top = std::max(1.0, d.eigenvalues.back());
  r.lambda0 = std::abs(d.rawLambda0) / top;
  Matrix weighted(n, n);
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t k = 0; k < n; ++k) weighted(x, k) = d.phi(x, k) * d.mu[x];
  Matrix gram(n, n);
  cblas_dgemm(CblasRowMajor, CblasTrans, CblasNoTrans, static_cast<int>(n), static_cast<int>(n), static_cast<int>(n),
              1.0, d.phi.data(), static_cast<int>(n), weighted.data(), static_cast<int>(n), 0.0, gram.data(),
              static_cast<int>(n));
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = 0; k < n; ++k) r.orthonormality = std::max(r.orthonormality, std::abs(gram(j, k) - (j == k)));
  Vec col(n);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t x = 0; x < n; ++x) col[x] = d.phi(x, k);
    const Vec lf = generator_apply(space, col);
    for (std::size_t x = 0; x < n; ++x) {
      r.eigenResidual = std::max(r.eigenResidual, std::abs(lf[x] + d.eigenvalues[k] * col[x]) / top);
    }
  }
  return r;
}

HeatResiduals verify_heat(const MetricMeasureSpace& space, const SpectralData& d, std::span<const double> tGrid,
                          const Matrix& battery) {
  const std::size_t n = d.size();
  HeatResiduals r;
  r.timesChecked = tGrid.size();
  r.functionsChecked = battery.rows();
  for (std::size_t ti = 0; ti < tGrid.size(); ++ti) {
    const double t = tGrid[ti];
    const Matrix k = heat_kernel_matrix(d, t);
    double kmax = 0.0, kmin = std::numeric_limits<double>::infinity();
    for (std::size_t x = 0; x < n; ++x) {
      double mass = 0.0;
      for (std::size_t y = 0; y < n; ++y) {
        const double v = k(x, y);
        mass += v * d.mu[y];
        kmax = std::max(kmax, v);
        kmin = std::min(kmin, v);
        r.symmetry = std::max(r.symmetry, std::abs(v - k(y, x)));
      }
      r.conservativeness = std::max(r.conservativeness, std::abs(mass - 1.0));
    }
    r.positivity = std::max(r.positivity, std::max(0.0, -kmin) / kmax);

    // Chapman-Kolmogorov against the next grid time, on a stride of rows.
    if (ti + 1 < tGrid.size() && ti < 4) {
      const double s = tGrid[ti + 1];
      const Matrix ks = heat_kernel_matrix(d, s);
      const Matrix kts = heat_kernel_matrix(d, t + s);
      double top = 0.0;
      for (std::size_t x = 0; x < n; ++x)
        for (std::size_t y = 0; y < n; ++y) top = std::max(top, kts(x, y));
      const std::size_t stride = std::max<std::size_t>(1, n / 64);
      for (std::size_t x = 0; x < n; x += stride) {
        for (std::size_t y = 0; y < n; ++y) {
          double acc = 0.0;
          for (std::size_t z = 0; z < n; ++z) acc += k(x, z) * ks(z, y) * d.mu[z];
          r.chapmanKolmogorov = std::max(r.chapmanKolmogorov, std::abs(acc - kts(x, y)) / top);
        }
      }
    }

    const Matrix pf = apply_semigroup(d, t, battery);
    for (std::size_t f = 0; f < battery.rows(); ++f) {
      const auto row = battery.row(f);
      const auto prow = pf.row(f);
      for (double p : {1.0, 2.0}) {
        r.contractivity = std::max(r.contractivity, lp_norm(prow, d.mu, p) - lp_norm(row, d.mu, p));
      }
      r.contractivity = std::max(r.contractivity, linf_norm(prow) - linf_norm(row));
    }
  }
  for (std::size_t f = 0; f < battery.rows(); ++f) {
    const auto row = battery.row(f);
    const Vec c = d.coefficients(row);
    double norm2 = 0.0, coef2 = 0.0, spec = 0.0;
    for (std::size_t x = 0; x < n; ++x) norm2 += row[x] * row[x] * d.mu[x];
    for (std::size_t k = 0; k < n; ++k) {
      coef2 += c[k] * c[k];
      spec += d.eigenvalues[k] * c[k] * c[k];
    }
    if (norm2 > 0.0) r.parseval = std::max(r.parseval, std::abs(norm2 - coef2) / norm2);
    const double energy = dirichlet_energy(space, row);
    if (energy > 0.0) {
      r.energyIdentity = std::max(r.energyIdentity, std::abs(spec - energy) / energy);
      const Vec s = sqrt_generator_apply(d, row);
      double sq = 0.0;
      for (std::size_t x = 0; x < n; ++x) sq += s[x] * s[x] * d.mu[x];
      r.sqrtGenerator = std::max(r.sqrtGenerator, std::abs(sq - energy) / energy);
    }
  }
  return r;
}

std::size_t metric_center(const MetricMeasureSpace& space) {
  const std::size_t n = space.size();
  Vec row(n);
  std::size_t best = 0;
  double bestEcc = std::numeric_limits<double>::infinity();
  for (std::size_t x = 0; x < n; ++x) {
    space.distance_row(x, row);
    const double ecc = *std::max_element(row.begin(), row.end());
    if (ecc < bestEcc) {
      bestEcc = ecc;
      best = x;
    }
  }
  return best;
}

namespace {

struct KernelSample {
  double t, w, logScaled;  // w = d^2/t, logScaled = log(p_t mu(B(x,sqrt t)))
  std::size_t ti, x, y;
};

struct Bounds {
  double c1, c2, C;
};

Bounds best_constants(const std::vector<KernelSample>& samples, double b, std::size_t tiLimit) {
  Bounds best{b, b, std::numeric_limits<double>::infinity()};
  for (double c2 : {b, b / 2.0, b / 4.0}) {
    for (double c1 : {b, 2.0 * b, 4.0 * b}) {
      double logC = 0.0;
      for (const KernelSample& s : samples) {
        if (s.ti >= tiLimit) continue;
        logC = std::max(logC, s.logScaled + c2 * s.w);
        logC = std::max(logC, -c1 * s.w - s.logScaled);
      }
      const double C = std::exp(logC);
      if (C < best.C) best = {c1, c2, C};
    }
  }
  return best;
}

}  // namespace

GaussianFit gaussian_bound_fit(const MetricMeasureSpace& space, const SpectralData& d, std::span<const double> tGrid,
                               std::uint64_t seed, std::size_t maxSamples) {
  if (tGrid.empty()) throw DomainError("gaussian_bound_fit: empty time grid");
  require_within(resolved_time_range(space), tGrid, "gaussian_bound_fit");
  const std::size_t n = space.size();
  GaussianFit fit;
  fit.resolvedTimes.assign(tGrid.begin(), tGrid.end());
  fit.seed = seed;

  std::vector<KernelSample> samples;
  Vec row(n);
  auto record = [&](std::size_t ti, std::size_t x, std::size_t y, std::span<const double> drow) {
    const double t = tGrid[ti];
    const double p = heat_kernel(d, t, x, y);
    if (!(p > 0.0)) {
      ++fit.excludedNonpositive;
      return;
    }
    const double rt = std::sqrt(t) * (1.0 + 1e-12);
    double mass = 0.0;
    for (std::size_t z = 0; z < n; ++z)
      if (drow[z] <= rt) mass += space.measure(z);
    samples.push_back({t, drow[y] * drow[y] / t, std::log(p * mass), ti, x, y});
  };

  const bool enumerate = tGrid.size() * n * n <= maxSamples;
  if (enumerate) {
    for (std::size_t ti = 0; ti < tGrid.size(); ++ti) {
      const double window = 4.0 * std::sqrt(tGrid[ti]) * (1.0 + 1e-12);
      for (std::size_t x = 0; x < n; ++x) {
        space.distance_row(x, row);
        for (std::size_t y = 0; y < n; ++y)
          if (row[y] <= window) record(ti, x, y, row);
      }
    }
  } else {
    Rng rng(seed);
    std::vector<std::size_t> members;
    for (std::size_t s = 0; s < maxSamples; ++s) {
      const std::size_t ti = rng.index(tGrid.size());
      const std::size_t x = rng.index(n);
      space.distance_row(x, row);
      const double window = 4.0 * std::sqrt(tGrid[ti]) * (1.0 + 1e-12);
      members.clear();
      for (std::size_t y = 0; y < n; ++y)
        if (row[y] <= window) members.push_back(y);
      record(ti, x, members[rng.index(members.size())], row);
    }
  }
  fit.samples = samples.size();
  if (samples.empty()) throw NumericError("gaussian_bound_fit: every kernel sample was nonpositive");

  // Regress logScaled on -w; the slope is the Gaussian rate.
  Vec xs, ys;
  for (const KernelSample& s : samples) {
    xs.push_back(-s.w);
    ys.push_back(s.logScaled);
  }
  const LineFit line = fit_line(xs, ys);
  fit.slope = line.slope;
  const double b = line.slope > 0.0 ? line.slope : 0.25;

  const Bounds all = best_constants(samples, b, tGrid.size());
  const Bounds lower = best_constants(samples, b, (tGrid.size() + 1) / 2);
  fit.c1 = all.c1;
  fit.c2 = all.c2;
  fit.Cg = all.C;
  fit.CgLowerHalf = lower.C;

  fit.worstLowerSlack = fit.worstUpperSlack = std::numeric_limits<double>::infinity();
  for (const KernelSample& s : samples) {
    const double lowerSlack = std::exp(std::log(fit.Cg) + s.logScaled + fit.c1 * s.w);
    const double upperSlack = std::exp(std::log(fit.Cg) - fit.c2 * s.w - s.logScaled);
    if (lowerSlack < fit.worstLowerSlack) {
      fit.worstLowerSlack = lowerSlack;
      fit.lowerWitness = {s.t, s.x, s.y};
    }
    if (upperSlack < fit.worstUpperSlack) {
      fit.worstUpperSlack = upperSlack;
      fit.upperWitness = {s.t, s.x, s.y};
    }
  }

  const std::size_t o = metric_center(space);
  Vec diag(tGrid.size());
  for (std::size_t ti = 0; ti < tGrid.size(); ++ti) diag[ti] = heat_kernel(d, tGrid[ti], o, o);
  fit.diagonalExponent = fit_loglog(tGrid, diag).slope;
  return fit;
}

}  // namespace dirbv
