#include <doctest.h>

#include <cmath>
#include <numeric>

#include "dirbv/heat.hpp"
#include "dirbv/kernels.hpp"
#include "helpers.hpp"

using namespace dirbv;

namespace {

double max_rel_diff(const Matrix& a, const Matrix& b) {
  double scale = 0.0, diff = 0.0;
  for (std::size_t i = 0; i < a.rows() * a.cols(); ++i) {
    scale = std::max(scale, std::abs(a.data()[i]));
    diff = std::max(diff, std::abs(a.data()[i] - b.data()[i]));
  }
  return scale > 0.0 ? diff / scale : diff;
}

}  // namespace

TEST_CASE("serial and parallel kernels agree") {
  const Vec legs{1.0, 0.5, 0.75};
  for (const auto& s : {build_torus(2, 6, 0.5), build_lattice(2, 7, 1.0 / 6), build_sierpinski_gasket(3),
                        build_metric_graph(legs, 4)}) {
    CAPTURE(s.name());
    const SpectralData d = spectral_decompose(s);
    const std::size_t n = s.size();
    const Matrix batch = testing::random_batch(5, n, 42);

    const Vec f(batch.row(0).begin(), batch.row(0).end());
    CHECK(kernels::serial::carre_du_champ(s, f) == kernels::parallel::carre_du_champ(s, f));

    std::vector<std::size_t> rows(n);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    for (double t : {0.01, 0.1, 1.0}) {
      const Matrix ks = kernels::serial::heat_kernel_rows(d.phi, d.eigenvalues, t, rows);
      const Matrix kp = kernels::parallel::heat_kernel_rows(d.phi, d.eigenvalues, t, rows);
      const Matrix kf = kernels::parallel::heat_kernel_matrix(d.phi, d.eigenvalues, t);
      CHECK(max_rel_diff(ks, kp) < 1e-12);
      CHECK(max_rel_diff(ks, kf) < 1e-12);

      const Matrix ps = kernels::serial::semigroup_apply(d.phi, d.eigenvalues, d.mu, t, batch);
      const Matrix pp = kernels::parallel::semigroup_apply(d.phi, d.eigenvalues, d.mu, t, batch);
      CHECK(max_rel_diff(ps, pp) < 1e-12);

      for (double p : {1.0, 1.5, 2.0, 4.0}) {
        const Matrix ss = kernels::serial::kernel_row_sums(kf, rows, d.mu, pp, batch, p);
        const Matrix sp = kernels::parallel::kernel_row_sums(kf, rows, d.mu, pp, batch, p);
        CHECK(max_rel_diff(ss, sp) == 0.0);
      }
    }

    const Vec radii{s.mesh_scale(), 2.5 * s.mesh_scale(), s.diameter() / 2, s.diameter()};
    for (double p : {1.0, 2.0}) {
      const auto a = kernels::serial::metric_pair_profiles(s, batch, p, radii);
      const auto b = kernels::parallel::metric_pair_profiles(s, batch, p, radii);
      CHECK(max_rel_diff(a.ballAveraged, b.ballAveraged) < 1e-13);
      CHECK(max_rel_diff(a.plain, b.plain) < 1e-13);
    }
  }
}

TEST_CASE("active mode count") {
  const Vec lambda{0.0, 1.0, 10.0, 100.0};
  CHECK(kernels::active_modes(lambda, 0.0) == 4);
  CHECK(kernels::active_modes(lambda, 0.1) == 4);
  CHECK(kernels::active_modes(lambda, 1.0) == 3);
  CHECK(kernels::active_modes(lambda, 10.0) == 2);
  CHECK(kernels::active_modes(lambda, 1e6) == 1);
}

TEST_CASE("abs_pow special cases match pow") {
  for (double a : {-2.5, -1.0, 0.0, 0.3, 7.0})
    for (double p : {1.0, 1.5, 2.0, 3.0, 4.0}) CHECK(kernels::abs_pow(a, p) == doctest::Approx(std::pow(std::abs(a), p)));
}
