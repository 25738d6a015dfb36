#include <doctest.h>

#include <cmath>

#include "dirbv/cover.hpp"
#include "helpers.hpp"

using namespace dirbv;

TEST_CASE("greedy covering on a path") {
  const auto s = build_lattice(1, 9, 1.0);
  const Covering cov = max_separated_covering(s, 2.0);
  CHECK(cov.centers == std::vector<std::size_t>{0, 2, 4, 6, 8});
  CHECK(check_covering(s, cov).ok());
  CHECK(max_separated_covering(s, 100.0).centers == std::vector<std::size_t>{0});
  CHECK_THROWS_AS(max_separated_covering(s, 0.5), DomainError);

  // Vertex 1 sees centers 0 and 2 at distance 1 (psi = 3/4) and 4 at distance 3
  // (psi = 1/4), so phi = (3/7, 3/7, 1/7).
  const PartitionOfUnity pou = partition_of_unity(s, cov);
  REQUIRE(pou.weights[1].size() == 3);
  CHECK(pou.weights[1][0].second == doctest::Approx(3.0 / 7.0).epsilon(1e-15));
  CHECK(pou.weights[1][1].second == doctest::Approx(3.0 / 7.0).epsilon(1e-15));
  CHECK(pou.weights[1][2].second == doctest::Approx(1.0 / 7.0).epsilon(1e-15));
}

TEST_CASE("covering and partition invariants") {
  const Vec legs{1.0, 0.6, 0.8};
  for (const auto& s : {build_lattice(2, 17, 1.0 / 16), build_torus(2, 12, 1.0), build_sierpinski_gasket(4),
                        build_metric_graph(legs, 6)}) {
    CAPTURE(s.name());
    for (double k : {1.0, 2.0, 3.5}) {
      const double eps = k * s.mesh_scale();
      const Covering cov = max_separated_covering(s, eps);
      CHECK(check_covering(s, cov).ok());
      const PartitionOfUnity pou = partition_of_unity(s, cov);
      for (std::size_t x = 0; x < s.size(); ++x) {
        double total = 0.0;
        for (const auto& [i, w] : pou.weights[x]) {
          total += w;
          CHECK(w >= 0.0);
          CHECK(s.distance(x, cov.centers[i]) < 2.0 * eps);
        }
        CHECK(std::abs(total - 1.0) < 1e-12);
      }
      CHECK(pou.lipBound > 0.0);
      CHECK(std::isfinite(pou.lipBound));
      for (double c : {2.0, 5.0, 12.0}) CHECK(overlap_multiplicity(s, cov, c) >= 1);
    }
  }
}

TEST_CASE("bounded overlap on the square lattice") {
  const auto s = build_lattice(2, 33, 1.0 / 32);
  for (double k : {1.0, 2.0, 3.0, 2.5}) {
    const Covering cov = max_separated_covering(s, k / 32.0);
    CHECK(overlap_multiplicity(s, cov, 5.0) <= 81);
  }
}

TEST_CASE("discrete convolution") {
  const auto s = build_lattice(2, 17, 1.0 / 16);
  const PartitionOfUnity pou = partition_of_unity(s, max_separated_covering(s, 2.0 / 16));
  const Vec c(s.size(), 2.5);
  for (double v : discrete_convolution(s, pou, c)) CHECK(v == doctest::Approx(2.5).epsilon(1e-14));

  const Vec f = testing::random_function(s.size(), 8);
  const Vec u = discrete_convolution(s, pou, f);
  const double lo = *std::min_element(f.begin(), f.end());
  const double hi = *std::max_element(f.begin(), f.end());
  for (double v : u) {
    CHECK(v >= lo - 1e-14);
    CHECK(v <= hi + 1e-14);
  }
  Vec g = f;
  for (double& v : g) v += 0.3 * std::abs(v);
  const Vec ug = discrete_convolution(s, pou, g);
  for (std::size_t x = 0; x < s.size(); ++x) CHECK(ug[x] >= u[x] - 1e-14);

  const PartitionOfUnity one = partition_of_unity(s, max_separated_covering(s, 10.0));
  const double mean = mu_inner(f, Vec(s.size(), 1.0), s.mu()) / s.total_measure();
  for (double v : discrete_convolution(s, one, f)) CHECK(v == doctest::Approx(mean).epsilon(1e-12));
}

TEST_CASE("convolution error shrinks with epsilon for Lipschitz functions") {
  const auto s = build_lattice(2, 33, 1.0 / 32);
  Vec f(s.size());
  for (std::size_t x = 0; x < s.size(); ++x) {
    const double a = s.coords()[2 * x], b = s.coords()[2 * x + 1];
    f[x] = std::sin(3.0 * a) + a * b;
  }
  Vec eps, err;
  for (double k : {8.0, 4.0, 2.0}) {
    const double e = k / 32.0;
    const Vec u = discrete_convolution(s, partition_of_unity(s, max_separated_covering(s, e)), f);
    Vec diff(s.size());
    for (std::size_t x = 0; x < s.size(); ++x) diff[x] = u[x] - f[x];
    eps.push_back(e);
    err.push_back(lp_norm(diff, s.mu(), 1.0));
  }
  CHECK(err[0] > err[1]);
  CHECK(err[1] > err[2]);
  for (std::size_t k = 0; k < 3; ++k) CHECK(err[k] <= 2.0 * eps[k]);
}

TEST_CASE("relaxation energy") {
  const auto c4 = testing::four_cycle();
  const Vec half{1.0, 1.0, 0.0, 0.0};
  const Vec eps{1.0};
  const RelaxationEnergy r = relaxation_energy(c4, half, eps, 1.0, false);
  const Vec u = discrete_convolution(c4, partition_of_unity(c4, max_separated_covering(c4, 1.0)), half);
  const Vec g = carre_du_champ(c4, u);
  double direct = 0.0;
  for (std::size_t x = 0; x < 4; ++x) direct += g[x] * c4.measure(x);
  CHECK(r.energies[0] == doctest::Approx(direct).epsilon(1e-15));
  CHECK_THROWS_AS(relaxation_energy(c4, half, eps, 1.0), DomainError);

  const auto s = build_lattice(2, 33, 1.0 / 32);
  const Vec zero(s.size(), 0.7);
  const Vec grid{2.0 / 32, 4.0 / 32, 8.0 / 32};
  for (double e : relaxation_energy(s, zero, grid, 1.0).energies) CHECK(e == doctest::Approx(0.0));
  Vec plane(s.size());
  for (std::size_t x = 0; x < s.size(); ++x) plane[x] = s.coords()[2 * x] < 0.5 ? 1.0 : 0.0;
  const RelaxationEnergy rp = relaxation_energy(s, plane, grid, 1.0);
  CHECK(spread(rp.energies) <= 3.0);
}
