#include <doctest.h>

#include <cmath>

#include "dirbv/battery.hpp"
#include "dirbv/bv.hpp"
#include "dirbv/inequalities.hpp"
#include "helpers.hpp"

using namespace dirbv;

namespace {

double shoelace(const std::vector<Point>& poly) {
  double a = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point& p = poly[i];
    const Point& q = poly[(i + 1) % poly.size()];
    a += p[0] * q[1] - q[0] * p[1];
  }
  return 0.5 * a;
}

}  // namespace

TEST_CASE("Sobolev exponent") {
  CHECK(sobolev_exponent(1.0, 1.0, 2.0) == 2.0);
  CHECK(sobolev_exponent(2.0, 0.5, 2.0) == 4.0);
  CHECK(sobolev_exponent(1.0, 0.5, 2.0) == 2.0 / 1.5);
  CHECK_THROWS_AS(sobolev_exponent(2.0, 1.0, 2.0), DomainError);
  CHECK_THROWS_AS(sobolev_exponent(1.0, 0.0, 2.0), DomainError);
  CHECK_THROWS_AS(sobolev_exponent(0.5, 1.0, 2.0), DomainError);
}

TEST_CASE("weak Lq norm and median") {
  const auto s = build_torus(1, 4, 1.0);
  const Vec f{2.0, 2.0, 1.0, 0.0};
  // s = 2 on mass 2 beats s = 1 on mass 3.
  CHECK(weak_lq_norm(s, f, 2.0) == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-15));
  CHECK(weak_lq_norm(s, f, 0.5) == doctest::Approx(9.0).epsilon(1e-15));
  CHECK(weak_lq_norm(s, Vec(4, 0.0), 2.0) == 0.0);
  CHECK(weighted_median(s, f) == 1.0);
  CHECK(weighted_median(s, Vec{5.0, 1.0, 3.0, 4.0}) == 3.0);
}

TEST_CASE("embedding checks treat constants as zero on both sides") {
  const auto s = build_lattice(2, 17, 1.0 / 16);
  const Vec c(s.size(), 4.0);
  const Vec rg = resolved_radius_grid(s, 8.0);
  const EmbeddingRecord w = weak_embedding_check(s, c, 1.0, 0.5, 2.0, rg);
  CHECK(w.lhs == 0.0);
  CHECK(w.rhs == 0.0);
  CHECK(w.constant == 0.0);
  CHECK(bv_sobolev_check(s, c, 2.0).constant == 0.0);
  CHECK(fractional_isoperimetry(s, VertexSet(s.size()), 0.5, 2.0, rg).constant == 0.0);
}

TEST_CASE("pair mass: FFT and sorted-distance paths agree with brute force") {
  const auto s = build_lattice(2, 20, 1.0 / 19);
  Rng rng(6);
  const VertexSet e = VertexSet::from_predicate(s.size(), [&](std::size_t) { return rng.uniform() < 0.3; });
  const Vec radii{0.05, 0.1, 0.2, 0.3};
  Vec brute(radii.size(), 0.0);
  for (std::size_t x = 0; x < s.size(); ++x)
    for (std::size_t y = 0; y < s.size(); ++y)
      if (e.contains(x) && !e.contains(y))
        for (std::size_t r = 0; r < radii.size(); ++r)
          if (s.distance(x, y) <= radii[r] * (1 + 1e-12)) brute[r] += s.measure(x) * s.measure(y);
  const Vec exact = boundary_pair_mass(s, e, radii, 1024);
  const Vec fft = boundary_pair_mass(s, e, radii, 10);
  for (std::size_t r = 0; r < radii.size(); ++r) {
    CHECK(exact[r] == doctest::Approx(brute[r]).epsilon(1e-12));
    CHECK(fft[r] == doctest::Approx(brute[r]).epsilon(1e-12));
  }
}

TEST_CASE("isoperimetric ratio of disks is nearly constant") {
  const auto s = build_lattice(2, 65, 1.0 / 64, 5000);
  const double h = s.mesh_scale();
  const Battery b = disk_indicators(s, Vec{4 * h, 8 * h, 16 * h});
  Vec ratios;
  for (const Vec& f : b.functions) {
    const VertexSet e = VertexSet::from_predicate(s.size(), [&](std::size_t x) { return f[x] > 0.5; });
    ratios.push_back(isoperimetric_check(s, e, 2.0).constant);
  }
  const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
  CHECK(*hi / *lo <= 1.15);
}

TEST_CASE("Koch polygon areas follow the geometric series") {
  const double side = 0.75;
  const double a0 = std::sqrt(3.0) / 4.0 * side * side;
  for (int n = 0; n <= 5; ++n) {
    const std::vector<Point> poly = koch_polygon(n, side);
    CHECK(poly.size() == 3 * static_cast<std::size_t>(std::pow(4, n)));
    // A_n = A_0 (1 + (3/5)(1 - (4/9)^n)); positive area means counter-clockwise.
    CHECK(shoelace(poly) == doctest::Approx(a0 * (1.0 + 0.6 * (1.0 - std::pow(4.0 / 9.0, n)))).epsilon(1e-12));
  }
  CHECK(koch_iterations(257) == 6);
  CHECK(koch_iterations(243) == 5);
  CHECK_THROWS_AS(koch_snowflake_set(65), DomainError);
}

TEST_CASE("rasterized areas") {
  const int res = 257;
  const double h = 1.0 / (res - 1);
  const VertexSet sq = square_set(res);
  CHECK(static_cast<double>(sq.count()) * h * h == doctest::Approx(0.25).epsilon(0.02));
  const VertexSet snow = koch_snowflake_set(res);
  const double area = shoelace(koch_polygon(koch_iterations(res)));
  CHECK(static_cast<double>(snow.count()) * h * h == doctest::Approx(area).epsilon(0.03));
}

TEST_CASE("distance transform matches brute force") {
  const int side = 23;
  Rng rng(8);
  std::vector<std::uint8_t> mask(side * side, 0);
  for (auto& m : mask) m = rng.uniform() < 0.05 ? 1 : 0;
  mask[0] = 1;
  const Vec d = distance_transform(mask, side);
  for (int j = 0; j < side; ++j)
    for (int i = 0; i < side; ++i) {
      double best = INFINITY;
      for (int b = 0; b < side; ++b)
        for (int a = 0; a < side; ++a)
          if (mask[a + side * b]) best = std::min(best, std::hypot(a - i, b - j));
      CHECK(d[i + side * j] == doctest::Approx(best).epsilon(1e-12));
    }
}

TEST_CASE("neighborhood exponent of a square is 1") {
  const int res = 513;
  const double h = 1.0 / (res - 1);
  const Vec radii = geometric_grid(3 * h, 1.0 / 9.0, 8.0);
  const NeighborhoodFit fit = boundary_neighborhood_fit(square_set(res), res, radii);
  CHECK(std::abs(fit.exponent - 1.0) < 0.05);
  CHECK(fit.masses.size() == radii.size());
}
