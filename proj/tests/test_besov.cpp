#include <doctest.h>

#include <cmath>

#include "dirbv/battery.hpp"
#include "dirbv/besov.hpp"
#include "helpers.hpp"

using namespace dirbv;

namespace {

BesovOptions unchecked() {
  BesovOptions o;
  o.checkRange = false;
  return o;
}

}  // namespace

TEST_CASE("two-point heat energy closed form") {
  const auto s = testing::two_point();
  const SpectralData d = spectral_decompose(s);
  const Vec f{1.0, 0.0};
  const Vec grid{0.01, 0.1, 0.5, 1.0, 3.0};
  for (double p : {1.0, 2.0}) {
    const SeminormProfile pr = heat_besov_profile(s, d, f, p, grid, 0.0, unchecked());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      // Two ordered pairs, each with weight p_t(a,b) = (1 - e^{-2t})/2.
      const double e = std::pow(1.0 - std::exp(-2.0 * grid[i]), 1.0 / p);
      CHECK(pr.energies[i] == doctest::Approx(e).epsilon(1e-12));
    }
  }
  // The seminorm with alpha = 1/2 is max_t t^{-1/2}(1 - e^{-2t}); on this grid t = 1/2 wins.
  const SeminormProfile pr = heat_besov_profile(s, d, f, 1.0, grid, 0.5, unchecked());
  CHECK(pr.seminorm == doctest::Approx((1.0 - std::exp(-1.0)) / std::sqrt(0.5)).epsilon(1e-12));
  CHECK(pr.argmaxScale == 0.5);
}

TEST_CASE("two-point metric profile") {
  const auto s = testing::two_point();
  const Matrix f(1, 2, 0.0);
  Matrix g(1, 2);
  g(0, 0) = 1.0;
  const Vec radii{0.5, 1.0, 2.0};
  const auto pr = metric_besov_profiles(s, g, 1.0, radii, 0.0, unchecked());
  CHECK(pr[0].energies[0] == 0.0);
  // Closed balls: at r = 1 both points are inside, mu(B) = 2.
  CHECK(pr[0].energies[1] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(pr[0].energies[2] == doctest::Approx(1.0).epsilon(1e-15));
  const auto zero = metric_besov_profiles(s, f, 1.0, radii, 0.5, unchecked());
  CHECK(zero[0].seminorm == 0.0);
}

TEST_CASE("exact and sampled heat energies agree with a brute-force sum") {
  const auto s = build_torus(2, 8, 0.125);
  const SpectralData d = spectral_decompose(s);
  const Vec f = testing::random_function(s.size(), 4);
  const Vec grid = resolved_time_grid(s, 4.0);
  const SeminormProfile pr = heat_besov_profile(s, d, f, 1.5, grid, 0.0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double acc = 0.0;
    for (std::size_t x = 0; x < s.size(); ++x)
      for (std::size_t y = 0; y < s.size(); ++y)
        acc += heat_kernel(d, grid[i], x, y) * std::pow(std::abs(f[x] - f[y]), 1.5) * s.measure(x) * s.measure(y);
    CHECK(pr.energies[i] == doctest::Approx(std::pow(acc, 1.0 / 1.5)).epsilon(1e-10));
  }
  // As many strata as vertices falls back to the exact sum.
  BesovOptions o;
  o.exactLimit = 1;
  o.sampleRows = s.size();
  const SeminormProfile full = heat_besov_profile(s, d, f, 1.5, grid, 0.0, o);
  CHECK(!full.sampled);
  for (std::size_t i = 0; i < grid.size(); ++i) CHECK(full.energies[i] == pr.energies[i]);
  // Sixteen strata of four rows: an estimate, close for a random function.
  o.sampleRows = 16;
  const SeminormProfile sp = heat_besov_profile(s, d, f, 1.5, grid, 0.0, o);
  CHECK(sp.sampled);
  for (std::size_t i = 0; i < grid.size(); ++i) CHECK(sp.energies[i] == doctest::Approx(pr.energies[i]).epsilon(0.15));
}

TEST_CASE("half-plane indicator has smoothness slope near 1/2 for p = 1") {
  const auto s = build_lattice(2, 33, 1.0 / 32);
  const SpectralData d = spectral_decompose(s);
  const Battery b = half_spaces(s);
  const SeminormProfile pr = heat_besov_profile(s, d, b.functions[1], 1.0, resolved_time_grid(s, 8.0), 0.0);
  CHECK(std::abs(smoothness_exponent(pr).slope - 0.5) < 0.1);
}

TEST_CASE("Lipschitz function has metric slope near 1") {
  const auto s = build_lattice(2, 33, 1.0 / 32);
  const Battery b = lipschitz_functions(s);
  const Matrix m = b.slice(0, 1).matrix();
  const auto pr = metric_besov_profiles(s, m, 1.0, resolved_radius_grid(s, 8.0), 0.0);
  CHECK(std::abs(smoothness_exponent(pr[0]).slope - 1.0) < 0.1);
}

TEST_CASE("seminorm comparison") {
  const auto s = build_torus(2, 16, 1.0 / 16);
  const SpectralData d = spectral_decompose(s);
  Matrix batch = named_battery(s, &d, "mixed", 20, 1).matrix();
  const Vec rg = resolved_radius_grid(s, 8.0);
  const GaussianFit fit = gaussian_bound_fit(s, d, resolved_time_grid(s, 8.0));
  const SeminormComparison c = compare_seminorms(s, d, batch, 1.0, 1.0, rg, &fit);
  CHECK(c.ratios.size() == 20);
  CHECK(c.spread >= 1.0);
  CHECK(c.spread < 50.0);
  CHECK(c.lowerBoundChecked);

  // Constants: both seminorms vanish.
  Matrix consts(2, s.size(), 2.0);
  const SeminormComparison z = compare_seminorms(s, d, consts, 1.0, 1.0, rg);
  CHECK(z.bothZero[0]);
  CHECK(z.spread == 1.0);
}

TEST_CASE("decade statistics") {
  const Vec grid{1e-3, 3e-3, 1e-2, 3e-2, 1e-1};
  const Vec flat(5, 2.0);
  CHECK(decade_stability(grid, flat) == 1.0);
  CHECK(decade_growth(grid, flat) == 1.0);
  const Vec rising{1, 2, 4, 8, 16};
  CHECK(decade_growth(grid, rising) == doctest::Approx(8.0));
  CHECK(decade_stability(grid, rising) > 1.0);
}

TEST_CASE("semigroup continuity for an eigenfunction") {
  const auto s = build_torus(2, 8, 0.125);
  const SpectralData d = spectral_decompose(s);
  Matrix b(1, s.size());
  for (std::size_t x = 0; x < s.size(); ++x) b(0, x) = d.phi(x, 1);
  const ContinuityFit cf = semigroup_besov_continuity_check(s, d, 2.0, b, resolved_time_grid(s, 4.0));
  CHECK(std::isfinite(cf.constant));
  CHECK(cf.constant > 0.0);
  CHECK(cf.stability >= 1.0);
  CHECK_THROWS_AS(semigroup_besov_continuity_check(s, d, 1.0, b, resolved_time_grid(s, 4.0)), DomainError);
}

TEST_CASE("critical exponent study rejects non-refining levels") {
  const auto a = build_lattice(2, 17, 1.0 / 16);
  const SpectralData da = spectral_decompose(a);
  std::vector<StudyLevel> same{{&a, &da}, {&a, &da}, {&a, &da}};
  CHECK_THROWS(critical_exponent_study(same, 1.0, "lipschitz"));
}
