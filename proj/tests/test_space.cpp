#include <doctest.h>

#include <cmath>
#include <numbers>

#include "dirbv/space.hpp"
#include "helpers.hpp"

using namespace dirbv;

TEST_CASE("lattice builder shapes") {
  const auto two = testing::two_point();
  CHECK(two.size() == 2);
  CHECK(two.measure(0) == 1.0);
  CHECK(two.edge_count() == 1);
  CHECK(two.edges()[0].c == 1.0);
  CHECK(two.distance(0, 1) == 1.0);

  const auto l = build_lattice(2, 4, 0.5);
  CHECK(l.size() == 16);
  for (std::size_t x = 0; x < 16; ++x) CHECK(l.measure(x) == 0.25);
  CHECK(l.degree(5) == 4);  // (1,1) is interior
  CHECK(l.max_degree() == 4);
  CHECK(l.mesh_scale() == 0.5);
}

TEST_CASE("torus, gasket and spider shapes") {
  const auto c4 = testing::four_cycle();
  CHECK(c4.size() == 4);
  CHECK(c4.edge_count() == 4);
  for (std::size_t x = 0; x < 4; ++x) {
    CHECK(c4.measure(x) == 1.0);
    CHECK(c4.degree(x) == 2);
  }
  CHECK(c4.distance(0, 2) == 2.0);
  CHECK(c4.distance(0, 3) == 1.0);

  const auto g1 = build_sierpinski_gasket(1);
  CHECK(g1.size() == 6);
  CHECK(g1.edge_count() == 9);
  CHECK(build_sierpinski_gasket(2).size() == 15);
  CHECK(g1.total_measure() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(g1.edges()[0].c == doctest::Approx(5.0 / 3.0));
  CHECK(g1.mesh_scale() == 0.5);

  const Vec legs{1.0, 1.0, 1.0};
  const auto sp = build_metric_graph(legs, 4);
  CHECK(sp.size() == 13);
  CHECK(sp.degree(0) == 3);
  CHECK(sp.distance(4, 8) == doctest::Approx(2.0));
  CHECK(sp.edges()[0].c == 4.0);
}

TEST_CASE("builder argument and capacity errors") {
  CHECK_THROWS_AS(build_lattice(1, 1, 1.0), DomainError);
  CHECK_THROWS_AS(build_lattice(4, 3, 1.0), DomainError);
  CHECK_THROWS_AS(build_lattice(2, 0, 1.0), DomainError);
  CHECK_THROWS_AS(build_lattice(2, 65, 1.0), CapacityError);
  CHECK_NOTHROW(build_lattice(2, 65, 1.0, 5000));
  CHECK_THROWS_AS(build_torus(1, 2, 1.0), DomainError);
  CHECK_THROWS_AS(build_sierpinski_gasket(0), DomainError);
  CHECK_THROWS_AS(build_sierpinski_gasket(8), CapacityError);
  const Vec two{1.0, 1.0};
  CHECK_THROWS_AS(build_metric_graph(two, 4), DomainError);
  const Vec three{1.0, 1.0, 1.0};
  CHECK_THROWS_AS(build_metric_graph(three, 1), DomainError);
}

TEST_CASE("metric axioms hold for every builder") {
  const Vec legs{1.0, 0.5, 2.0, 1.0};
  for (const auto& s : {build_lattice(2, 9, 0.125), build_torus(2, 7, 1.0), build_sierpinski_gasket(3),
                        build_metric_graph(legs, 5), build_lattice(3, 4, 1.0)}) {
    const auto rep = check_metric_axioms(s);
    CHECK(rep.exhaustive);
    CHECK(rep.ok());
  }
  const auto big = build_lattice(2, 33, 1.0 / 32);
  const auto rep = check_metric_axioms(big, 512, 20000, 7);
  CHECK_FALSE(rep.exhaustive);
  CHECK(rep.ok());
}

TEST_CASE("carre du champ identities") {
  const auto two = testing::two_point();
  const Vec f{0.0, 1.0};
  const Vec g = carre_du_champ(two, f);
  CHECK(g[0] == doctest::Approx(1.0 / std::numbers::sqrt2));
  CHECK(g[1] == doctest::Approx(1.0 / std::numbers::sqrt2));
  CHECK(dirichlet_energy(two, f) == 1.0);

  for (const auto& s : {build_lattice(2, 9, 0.125), build_sierpinski_gasket(3), build_torus(2, 6, 0.5)}) {
    const Vec u = testing::random_function(s.size(), 11);
    const Vec gu = carre_du_champ(s, u);
    double integral = 0.0;
    for (std::size_t x = 0; x < s.size(); ++x) integral += s.measure(x) * gu[x] * gu[x];
    const double e = dirichlet_energy(s, u);
    CHECK(std::abs(integral - e) <= 1e-12 * e);

    Vec shifted = u, scaled = u;
    for (double& v : shifted) v += 3.25;
    for (double& v : scaled) v *= -2.0;
    const Vec gs = carre_du_champ(s, shifted);
    const Vec ga = carre_du_champ(s, scaled);
    for (std::size_t x = 0; x < s.size(); ++x) {
      CHECK(gs[x] == doctest::Approx(gu[x]).epsilon(1e-12));
      CHECK(ga[x] == 2.0 * gu[x]);
    }
  }
}

TEST_CASE("carre du champ is strongly local") {
  const auto s = build_lattice(2, 6, 1.0);
  Vec f(s.size(), 2.0);
  f[0] = 5.0;  // only vertex 0 and its neighbors 1 and 6 see the change
  const Vec g = carre_du_champ(s, f);
  CHECK(g[0] > 0.0);
  CHECK(g[1] > 0.0);
  CHECK(g[6] > 0.0);
  CHECK(g[7] == 0.0);
  CHECK(g[2] == 0.0);
  const Vec c(s.size(), -1.5);
  for (double v : carre_du_champ(s, c)) CHECK(v == 0.0);
}

TEST_CASE("intrinsic metric") {
  const double h = 0.125;
  const auto l1 = build_lattice(1, 3, h);
  CHECK(intrinsic_metric(l1)(0, 2) == 2 * h);

  const auto l2 = build_lattice(2, 5, h);
  const Matrix d = intrinsic_metric(l2);
  for (std::size_t x = 0; x < l2.size(); ++x) {
    for (std::size_t y = 0; y < l2.size(); ++y) {
      const long hops = std::labs(static_cast<long>(x % 5) - static_cast<long>(y % 5)) +
                        std::labs(static_cast<long>(x / 5) - static_cast<long>(y / 5));
      CHECK(d(x, y) == static_cast<double>(hops) * h);
    }
  }

  // Two-point space: the sup-definition over u with |grad u| <= 1 is found by
  // brute force over u = (0, delta); the audit constant K relates the two.
  const auto two = testing::two_point();
  const Matrix d2 = intrinsic_metric(two);
  CHECK(d2(0, 1) == 1.0);
  double supDelta = 0.0;
  for (int i = 0; i <= 200000; ++i) {
    const double delta = 2.0 * i / 200000.0;
    const Vec u{0.0, delta};
    const Vec g = carre_du_champ(two, u);
    if (g[0] <= 1.0 && g[1] <= 1.0) supDelta = delta;
  }
  const double K = metric_gradient_audit(two, d2);
  CHECK(K == doctest::Approx(1.0 / std::numbers::sqrt2));
  CHECK(supDelta >= d2(0, 1));
  CHECK(supDelta == doctest::Approx(d2(0, 1) / K).epsilon(1e-5));
}

TEST_CASE("disconnected or invalid spaces are rejected") {
  const std::vector<Edge> edges{{0, 1, 1.0}};
  const Vec mu{1.0, 1.0, 1.0};
  const Metric m = Metric::euclidean(1, {0.0, 1.0, 2.0});
  CHECK_THROWS_AS(MetricMeasureSpace("x", mu, edges, m), InvariantViolation);
  const Vec bad{1.0, 0.0};
  CHECK_THROWS_AS(MetricMeasureSpace("x", bad, edges, Metric::euclidean(1, {0.0, 1.0})), InvariantViolation);
  const std::vector<Edge> neg{{0, 1, -1.0}};
  CHECK_THROWS_AS(MetricMeasureSpace("x", Vec{1.0, 1.0}, neg, Metric::euclidean(1, {0.0, 1.0})), InvariantViolation);
}

TEST_CASE("balls and resolved ranges") {
  const auto s = build_lattice(2, 9, 0.125);
  for (std::size_t x = 0; x < s.size(); ++x) {
    const VertexSet b = ball(s, x, 0.0);
    CHECK(b.count() == 1);
    CHECK(b.contains(x));
  }
  CHECK(ball(s, 40, 0.125).count() == 5);
  CHECK(ball(s, 40, std::sqrt(2.0) * 0.125).count() == 9);
  CHECK_THROWS_AS(ball(s, 0, -1.0), DomainError);
  const ScaleRange r = resolved_radius_range(s);
  CHECK(r.lo == 0.25);
  CHECK(r.hi == doctest::Approx(std::sqrt(2.0) / 4.0));
  const ScaleRange t = resolved_time_range(s);
  CHECK(t.lo == 0.125 * 0.125);
  const Vec outside{1.0};
  CHECK_THROWS_AS(require_within(t, outside, "test"), DomainError);
}

TEST_CASE("doubling profile on the lattice recovers Q = 2") {
  const auto s = build_lattice(2, 33, 1.0 / 32, 5000);
  const DoublingProfile prof = doubling_profile(s, 64, 3);
  CHECK(prof.Q == doctest::Approx(2.0).epsilon(0.075));  // 2.0 +- 0.15
  CHECK(prof.Cdoubling >= 1.0);
  CHECK(prof.Cdoubling <= 5.0);
  CHECK(prof.resolvedRange.lo >= s.mesh_scale());
  CHECK(prof.resolvedRange.hi <= s.diameter());
  CHECK_THROWS_AS(doubling_profile(s, 0), DomainError);

  // Brute-force oracle for the worst doubling ratio at one center and radius.
  const std::size_t x = 17 * 33 + 5;
  const double r = 0.1;
  double m1 = 0.0, m2 = 0.0;
  for (std::size_t y = 0; y < s.size(); ++y) {
    if (s.distance(x, y) <= r) m1 += s.measure(y);
    if (s.distance(x, y) <= 2 * r) m2 += s.measure(y);
  }
  CHECK(ball_measure(s, x, r) == doctest::Approx(m1));
  CHECK(ball_measure(s, x, 2 * r) == doctest::Approx(m2));
}

TEST_CASE("doubling profile on the gasket recovers log3/log2") {
  const auto s = build_sierpinski_gasket(4);
  const DoublingProfile prof = doubling_profile(s, s.size(), 1);
  CHECK(std::abs(prof.Q - std::log(3.0) / std::log(2.0)) <= 0.2);
}

TEST_CASE("Poincare quotient on the 4-cycle") {
  const auto c4 = testing::four_cycle();
  const Vec f{1.0, 0.0, -1.0, 0.0};
  // B(0,1) = {3,0,1} with values (0,1,0): mean 1/3, mean deviation 4/9.
  // 2B is the whole cycle and |grad f| = 1 everywhere.
  CHECK(poincare_quotient(c4, 0, 1.0, 2.0, f) == doctest::Approx(4.0 / 9.0).epsilon(1e-14));
  const auto s = build_lattice(2, 17, 1.0 / 16);
  const PoincareReport rep = poincare_constant(s, 20, 5);
  CHECK(rep.C2 > 0.0);
  CHECK(rep.lambdaDilation == 2.0);
  CHECK(rep.ballsSampled == 20);
  CHECK_THROWS_AS(poincare_constant(s, 0), DomainError);
}

TEST_CASE("space files round-trip") {
  const Vec legs{1.0, 0.5, 0.75};
  for (const auto& s : {build_lattice(2, 5, 0.25), build_torus(2, 4, 1.0), build_metric_graph(legs, 3)}) {
    const auto back = parse_space(serialize_space(s));
    CHECK(back.size() == s.size());
    CHECK(back.fingerprint().muSum == s.fingerprint().muSum);
    CHECK(back.edge_count() == s.edge_count());
    CHECK(back.mesh_scale() == s.mesh_scale());
    CHECK(back.diameter() == doctest::Approx(s.diameter()).epsilon(1e-15));
    for (std::size_t x = 0; x < s.size(); ++x)
      for (std::size_t y = 0; y < s.size(); ++y) CHECK(back.distance(x, y) == s.distance(x, y));
  }
  // Without dist the loader recomputes the intrinsic metric.
  const auto p = parse_space(R"({"n": 3, "mu": [1, 1, 1], "edges": [[0, 1, 1], [1, 2, 4]]})");
  CHECK(p.distance(0, 2) == 1.5);
}

TEST_CASE("loader rejects violations with vertex indices") {
  auto message = [](const std::string& json) {
    try {
      parse_space(json);
    } catch (const Error& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message(R"({"n": 2, "mu": [1, -1], "edges": [[0, 1, 1]]})").find("mu(1)") != std::string::npos);
  CHECK(message(R"({"n": 3, "mu": [1, 1, 1], "edges": [[0, 1, 1]]})").find("vertex 2") != std::string::npos);
  CHECK(message(R"({"n": 2, "mu": [1, 1], "edges": [[0, 1, 1], [1, 0, 2]]})").find("(1,0)") != std::string::npos);
  CHECK(message(R"({"n": 2, "mu": [1, 1], "edges": [[0, 1, 1]], "dist": [[0, 1], [2, 0]]})")
            .find("symmetric") != std::string::npos);
  CHECK(message(R"({"n": 3, "mu": [1, 1, 1], "edges": [[0, 1, 1], [1, 2, 1]],
                    "dist": [[0, 1, 5], [1, 0, 1], [5, 1, 0]]})")
            .find("triangle") != std::string::npos);
  CHECK_THROWS_AS(parse_space("{"), ConfigError);
  CHECK_THROWS_AS(parse_space(R"({"n": 5000, "mu": [], "edges": []})"), CapacityError);
}

TEST_CASE("vertex sets") {
  const std::vector<std::size_t> idx{1, 3};
  const VertexSet a = VertexSet::from_indices(5, idx);
  CHECK(a.count() == 2);
  CHECK(a.complement().count() == 3);
  CHECK(a.subset_of(VertexSet(5, true)));
  CHECK(a.indicator() == Vec{0, 1, 0, 1, 0});
  CHECK(a.members() == idx);
  CHECK(a.complement().complement() == a);
}
