#include <doctest.h>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>
#include <cmath>
#include <numbers>

#include "dirbv/heat.hpp"
#include "helpers.hpp"

using namespace dirbv;

namespace {

// Independent oracle: p_t(x,y) = exp(tL)(x,y) / mu(y) by Pade scaling and squaring.
Eigen::MatrixXd expm_kernel(const MetricMeasureSpace& s, double t) {
  const std::size_t n = s.size();
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(static_cast<long>(n), static_cast<long>(n));
  for (std::size_t x = 0; x < n; ++x)
    for (const Neighbor& nb : s.neighbors(x)) {
      l(static_cast<long>(x), static_cast<long>(nb.index)) += nb.c / s.measure(x);
      l(static_cast<long>(x), static_cast<long>(x)) -= nb.c / s.measure(x);
    }
  Eigen::MatrixXd p = (t * l).exp();
  for (std::size_t y = 0; y < n; ++y) p.col(static_cast<long>(y)) /= s.measure(y);
  return p;
}

}  // namespace

TEST_CASE("two-point spectrum and kernel closed forms") {
  const auto s = testing::two_point();
  const SpectralData d = spectral_decompose(s);
  CHECK(d.eigenvalues[0] == 0.0);
  CHECK(d.eigenvalues[1] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(std::abs(d.phi(0, 1)) == doctest::Approx(1.0 / std::numbers::sqrt2).epsilon(1e-14));
  CHECK(d.phi(0, 1) == doctest::Approx(-d.phi(1, 1)).epsilon(1e-14));
  for (double t : {0.0, 0.01, 0.25, 1.0, 3.0}) {
    const double pab = (1.0 - std::exp(-2.0 * t)) / 2.0;
    const double paa = (1.0 + std::exp(-2.0 * t)) / 2.0;
    CHECK(std::abs(heat_kernel(d, t, 0, 1) - pab) < 1e-12);
    CHECK(std::abs(heat_kernel(d, t, 0, 0) - paa) < 1e-12);
    const Eigen::MatrixXd oracle = expm_kernel(s, t);
    CHECK(std::abs(oracle(0, 1) - pab) < 1e-12);
    CHECK(std::abs(oracle(0, 0) - paa) < 1e-12);
  }
}

TEST_CASE("4-cycle spectrum matches the circulant formula") {
  const auto s = testing::four_cycle();
  const SpectralData d = spectral_decompose(s);
  // 2 - 2 cos(2 pi k / 4) for k = 0..3, sorted: 0, 2, 2, 4.
  Vec expected;
  for (int k = 0; k < 4; ++k) expected.push_back(2.0 - 2.0 * std::cos(2.0 * std::numbers::pi * k / 4.0));
  std::sort(expected.begin(), expected.end());
  for (std::size_t k = 0; k < 4; ++k) CHECK(d.eigenvalues[k] == doctest::Approx(expected[k]).epsilon(1e-13));
  // Characteristic polynomial of L = -(2I - A): det(L + lambda I) = lambda (lambda-2)^2 (lambda-4).
  for (double lam : d.eigenvalues) {
    const double poly = lam * (lam - 2.0) * (lam - 2.0) * (lam - 4.0);
    CHECK(std::abs(poly) < 1e-12);
  }
}

TEST_CASE("single vertex space") {
  const std::vector<Edge> none;
  const MetricMeasureSpace s("point", Vec{2.0}, none, Metric::dense(1, {0.0}));
  const SpectralData d = spectral_decompose(s);
  REQUIRE(d.size() == 1);
  CHECK(d.eigenvalues[0] == 0.0);
  CHECK(heat_kernel(d, 1.0, 0, 0) == doctest::Approx(0.5));
}

TEST_CASE("heat kernel matches the matrix exponential") {
  for (const auto& s : {build_torus(2, 6, 0.5), build_sierpinski_gasket(2), build_lattice(1, 9, 0.25)}) {
    const SpectralData d = spectral_decompose(s);
    for (double t : {0.05, 0.3, 2.0}) {
      const Matrix k = heat_kernel_matrix(d, t);
      const Eigen::MatrixXd oracle = expm_kernel(s, t);
      double err = 0.0, top = 0.0;
      for (std::size_t x = 0; x < s.size(); ++x)
        for (std::size_t y = 0; y < s.size(); ++y) {
          err = std::max(err, std::abs(k(x, y) - oracle(static_cast<long>(x), static_cast<long>(y))));
          top = std::max(top, std::abs(k(x, y)));
        }
      CHECK(err / top < 1e-10);
    }
  }
}

TEST_CASE("heat invariants on several spaces") {
  const Vec legs{1.0, 0.5, 0.75};
  for (const auto& s : {testing::two_point(), testing::four_cycle(), build_torus(2, 8, 1.0 / 8),
                        build_lattice(2, 9, 0.125), build_sierpinski_gasket(3), build_metric_graph(legs, 5)}) {
    CAPTURE(s.name());
    const SpectralData d = spectral_decompose(s);
    const SpectralResiduals sr = spectral_residuals(s, d);
    CHECK(sr.lambda0 < 1e-10);
    CHECK(sr.orthonormality < 1e-10);
    CHECK(sr.eigenResidual < 1e-10);

    const Vec grid{1e-3, 1e-2, 0.1, 1.0};
    const Matrix battery = testing::random_batch(6, s.size(), 9);
    const HeatResiduals r = verify_heat(s, d, grid, battery);
    CHECK(r.symmetry == 0.0);
    CHECK(r.conservativeness < 1e-10);
    CHECK(r.positivity < 1e-10);
    CHECK(r.chapmanKolmogorov < 1e-9);
    CHECK(r.parseval < 1e-9);
    CHECK(r.energyIdentity < 1e-9);
    CHECK(r.sqrtGenerator < 1e-9);
    CHECK(r.contractivity < 1e-10);
  }
}

TEST_CASE("generator identities") {
  const auto s = build_sierpinski_gasket(3);
  const Vec f = testing::random_function(s.size(), 5);
  const Vec lf = generator_apply(s, f);
  const double e = dirichlet_energy(s, f);
  CHECK(-mu_inner(f, lf, s.mu()) == doctest::Approx(e).epsilon(1e-12));
  const Vec c(s.size(), 4.0);
  for (double v : generator_apply(s, c)) CHECK(v == 0.0);
  const Matrix l = generator_matrix(s);
  for (std::size_t x = 0; x < s.size(); ++x) {
    double acc = 0.0;
    for (std::size_t y = 0; y < s.size(); ++y) acc += l(x, y) * f[y];
    CHECK(acc == doctest::Approx(lf[x]).epsilon(1e-12));
  }
}

TEST_CASE("semigroup basics") {
  const auto s = build_torus(2, 6, 0.5);
  const SpectralData d = spectral_decompose(s);
  const Vec f = testing::random_function(s.size(), 3);
  CHECK(apply_semigroup(d, 0.0, f) == f);
  CHECK_THROWS_AS(apply_semigroup(d, -1.0, f), DomainError);
  CHECK_THROWS_AS(heat_kernel(d, -0.1, 0, 0), DomainError);
  const Vec one(s.size(), 1.0);
  for (double t : {0.01, 1.0, 100.0})
    for (double v : apply_semigroup(d, t, one)) CHECK(std::abs(v - 1.0) < 1e-10);

  // sqrt(-L) on eigenvectors and constants.
  const Vec sc = sqrt_generator_apply(d, one);
  for (double v : sc) CHECK(std::abs(v) < 1e-12);
  const Vec phi3 = d.phi.column(3);
  const Vec s3 = sqrt_generator_apply(d, phi3);
  for (std::size_t x = 0; x < s.size(); ++x) CHECK(s3[x] == doctest::Approx(std::sqrt(d.eigenvalues[3]) * phi3[x]));

  // The two-point semigroup: P_t f = mean + e^{-2t} (f - mean).
  const auto two = testing::two_point();
  const SpectralData d2 = spectral_decompose(two);
  const Vec g{3.0, -1.0};
  const Vec pg = apply_semigroup(d2, 0.4, g);
  CHECK(pg[0] == doctest::Approx(1.0 + 2.0 * std::exp(-0.8)).epsilon(1e-13));
  CHECK(pg[1] == doctest::Approx(1.0 - 2.0 * std::exp(-0.8)).epsilon(1e-13));
}

TEST_CASE("Gaussian bound fit") {
  const auto s = build_torus(2, 16, 1.0 / 16);
  const SpectralData d = spectral_decompose(s);
  const Vec grid = resolved_time_grid(s, 8.0);
  const GaussianFit fit = gaussian_bound_fit(s, d, grid, 1);
  CHECK(fit.samples > 0);
  CHECK(fit.c1 >= fit.c2);
  CHECK(fit.c2 > 0.0);
  CHECK(fit.Cg >= 1.0);
  CHECK(fit.worstLowerSlack >= 1.0 - 1e-12);
  CHECK(fit.worstUpperSlack >= 1.0 - 1e-12);
  CHECK(fit.stability() <= 1.25);
  // Witnesses reproduce their slack.
  const Witness w = fit.upperWitness;
  double mass = 0.0;
  for (std::size_t z = 0; z < s.size(); ++z)
    if (s.distance(w.x, z) <= std::sqrt(w.t) * (1 + 1e-12)) mass += s.measure(z);
  const double pt = heat_kernel(d, w.t, w.x, w.y);
  const double dd = s.distance(w.x, w.y);
  CHECK(fit.Cg * std::exp(-fit.c2 * dd * dd / w.t) / (pt * mass) == doctest::Approx(fit.worstUpperSlack));

  const Vec outside{1e-9};
  CHECK_THROWS_AS(gaussian_bound_fit(s, d, outside), DomainError);
}

TEST_CASE("on-diagonal decay on the line has exponent -1/2") {
  const auto s = build_lattice(1, 65, 1.0 / 64);
  const SpectralData d = spectral_decompose(s);
  const GaussianFit fit = gaussian_bound_fit(s, d, resolved_time_grid(s, 8.0), 2);
  CHECK(std::abs(fit.diagonalExponent + 0.5) < 0.05);
  CHECK(fit.Cg >= 1.0);
}
