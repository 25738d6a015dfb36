#include <doctest.h>

#include <cmath>
#include <numbers>

#include "dirbv/battery.hpp"
#include "dirbv/bv.hpp"
#include "helpers.hpp"

using namespace dirbv;

TEST_CASE("two-point perimeter is sqrt 2") {
  const auto s = testing::two_point();
  const VertexSet a = VertexSet::from_predicate(2, [](std::size_t x) { return x == 0; });
  CHECK(perimeter(s, a) == doctest::Approx(std::numbers::sqrt2).epsilon(1e-15));
  CHECK(perimeter(s, VertexSet(2)) == 0.0);
  CHECK(perimeter(s, VertexSet(2, true)) == 0.0);
}

TEST_CASE("co-area on the path 0-1-2 by hand") {
  const auto s = build_lattice(1, 3, 1.0);
  const Vec f{0.0, 1.0, 3.0};
  const CoareaReport r = coarea_bv(s, f);
  REQUIRE(r.levels == Vec{0.0, 1.0, 3.0});
  CHECK(r.gaps == Vec{1.0, 2.0});
  // Each level set cuts one edge; the cut is seen from both endpoints with 1/sqrt 2.
  CHECK(r.perimeters[0] == doctest::Approx(std::numbers::sqrt2));
  CHECK(r.perimeters[1] == doctest::Approx(std::numbers::sqrt2));
  CHECK(r.bvEnergy == doctest::Approx(3.0 * std::numbers::sqrt2).epsilon(1e-15));
  const double sob = std::sqrt(0.5) + std::sqrt(2.5) + std::sqrt(2.0);
  CHECK(r.sobolevEnergy == doctest::Approx(sob).epsilon(1e-15));
  CHECK(r.ratio >= 1.0);
  CHECK(r.ratio <= std::numbers::sqrt2);
}

TEST_CASE("co-area of an indicator equals the perimeter") {
  const auto s = build_sierpinski_gasket(3);
  Rng rng(2);
  for (int k = 0; k < 20; ++k) {
    const VertexSet e = VertexSet::from_predicate(s.size(), [&](std::size_t) { return rng.uniform() < 0.4; });
    Vec f(s.size());
    for (std::size_t x = 0; x < s.size(); ++x) f[x] = e.contains(x) ? 1.0 : 0.0;
    CHECK(std::abs(coarea_bv(s, f).bvEnergy - perimeter(s, e)) <= 1e-12 * std::max(1.0, perimeter(s, e)));
  }
}

TEST_CASE("co-area energy is exactly invariant under shifts and negation") {
  const auto s = build_torus(2, 8, 0.125);
  Rng rng(5);
  Vec f(s.size());
  for (double& v : f) v = std::ldexp(static_cast<double>(rng.index(32)), -3);
  const double base = coarea_bv(s, f).bvEnergy;
  Vec g = f;
  for (double& v : g) v = -2.0 * v + 1.0;
  CHECK(coarea_bv(s, g).bvEnergy == 2.0 * base);
  CHECK(coarea_bv(s, Vec(s.size(), 0.7)).bvEnergy == 0.0);
}

TEST_CASE("comparability between co-area and Sobolev energies") {
  for (const auto& s : {build_torus(2, 8, 0.125), build_sierpinski_gasket(3), build_lattice(1, 9, 0.125)}) {
    const Matrix b = testing::random_batch(8, s.size(), 3);
    const ComparabilityReport r = comparability_check(s, b);
    CHECK(r.holds);
    CHECK(r.lower >= 1.0 - 1e-12);
    CHECK(r.upper <= r.bound * (1.0 + 1e-12));
  }
}

TEST_CASE("relaxed BV never exceeds the direct energy") {
  const auto s = build_lattice(2, 17, 1.0 / 16);
  const Battery b = half_spaces(s);
  const double h = s.mesh_scale();
  const Vec eps{2 * h, 3 * h};
  const RelaxedBV r = relaxed_bv(s, b.functions[0], eps);
  CHECK(r.value <= r.direct);
  CHECK(r.energies.size() == 2);
  const Vec outside{h};
  CHECK_THROWS_AS(relaxed_bv(s, b.functions[0], outside), DomainError);
}

TEST_CASE("measure-theoretic boundary of a half plane") {
  const auto s = build_lattice(2, 17, 1.0 / 16);
  const VertexSet e = VertexSet::from_predicate(s.size(), [](std::size_t x) { return x % 17 < 8; });
  const Vec rg = resolved_radius_grid(s, 8.0);
  const VertexSet b = measure_theoretic_boundary(s, e, 0.2, rg);
  // Every boundary vertex sits within the largest radius of the cut.
  for (std::size_t x : b.members()) CHECK(std::abs(static_cast<double>(x % 17) - 7.5) * s.mesh_scale() <= rg.back());
  CHECK(b.count() >= 17);
  const VertexSet inner = inner_vertex_boundary(s, e);
  CHECK(inner.count() == 17);
  CHECK_THROWS_AS(measure_theoretic_boundary(s, e, 0.7, rg), DomainError);
}

TEST_CASE("Hausdorff content of a straight cut") {
  const auto s = build_lattice(2, 33, 1.0 / 32);
  const VertexSet line = VertexSet::from_predicate(s.size(), [](std::size_t x) { return x % 33 == 16; });
  const Vec eps{2.0 / 32};
  const HausdorffContent hc = hausdorff_content(s, line, eps);
  // A unit segment: greedy eps-balls give content close to 1.
  CHECK(hc.headline > 0.8);
  CHECK(hc.headline < 1.3);
  CHECK(hc.slack < 0.25);
  const MinkowskiContent mc = minkowski_content(s, line, resolved_radius_grid(s, 8.0));
  CHECK(mc.value > 0.5);
  CHECK(mc.value < 2.0);
}

TEST_CASE("Hausdorff perimeter check and Leibniz rule") {
  const auto s = build_lattice(2, 33, 1.0 / 32);
  const Battery g = named_battery(s, nullptr, "geometric", 0, 1);
  const VertexSet e = VertexSet::from_predicate(s.size(), [&](std::size_t x) { return g.functions[0][x] > 0.5; });
  const Vec alphas{0.05, 0.1, 0.2};
  const Vec eps{2.0 / 32};
  const HausdorffPerimeterCheck hc = check_hausdorff_perimeter(s, e, alphas, resolved_radius_grid(s, 8.0), eps);
  CHECK(hc.ratios.size() == 3);
  CHECK(hc.C == doctest::Approx(*std::max_element(hc.ratios.begin(), hc.ratios.end())));
  CHECK(hc.perimeter > 0.0);

  const LeibnizReport lr = leibniz_check(build_torus(2, 8, 0.125), 20, 3);
  CHECK(lr.trials == 20);
  CHECK(std::isfinite(lr.kappa));
  CHECK(lr.kappa > 0.0);
}

TEST_CASE("relaxed BV on half of a 4-cycle") {
  const auto c4 = testing::four_cycle();
  const Vec half{1.0, 1.0, 0.0, 0.0};
  const Vec eps{1.0, 2.0};
  const RelaxedBV r = relaxed_bv(c4, half, eps, false);
  CHECK(r.direct == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-15));
  const double best = std::min({r.direct, r.energies[0], r.energies[1]});
  CHECK(r.value == best);
  CHECK(r.value <= r.direct);
}
