// Serial reference kernels against their OpenMP/BLAS counterparts on torus(2,32).

#include <numeric>

#include <benchmark/benchmark.h>

#include "dirbv/blas_guard.hpp"
#include "dirbv/heat.hpp"
#include "dirbv/kernels.hpp"

using namespace dirbv;

namespace {

struct Fixture {
  MetricMeasureSpace space = build_torus(2, 32, 1.0 / 32);
  SpectralData d = spectral_decompose(space);
  Matrix batch;
  std::vector<std::size_t> rows;
  Vec radii{2.0 / 32, 4.0 / 32, 8.0 / 32};
  double t = 4.0 / (32.0 * 32.0);

  Fixture() {
    Rng rng(3);
    batch = Matrix(8, space.size());
    for (std::size_t i = 0; i < batch.rows(); ++i)
      for (std::size_t x = 0; x < space.size(); ++x) batch(i, x) = rng.uniform(-1.0, 1.0);
    rows.resize(64);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
  }
};

Fixture& fx() {
  static Fixture f;
  return f;
}

template <bool Parallel>
void BM_carre_du_champ(benchmark::State& st) {
  auto& f = fx();
  for (auto _ : st) {
    auto g = Parallel ? kernels::parallel::carre_du_champ(f.space, f.batch.row(0))
                      : kernels::serial::carre_du_champ(f.space, f.batch.row(0));
    benchmark::DoNotOptimize(g);
  }
}

template <bool Parallel>
void BM_heat_kernel_rows(benchmark::State& st) {
  auto& f = fx();
  for (auto _ : st) {
    auto k = Parallel ? kernels::parallel::heat_kernel_rows(f.d.phi, f.d.eigenvalues, f.t, f.rows)
                      : kernels::serial::heat_kernel_rows(f.d.phi, f.d.eigenvalues, f.t, f.rows);
    benchmark::DoNotOptimize(k);
  }
}

template <bool Parallel>
void BM_semigroup_apply(benchmark::State& st) {
  auto& f = fx();
  for (auto _ : st) {
    auto k = Parallel ? kernels::parallel::semigroup_apply(f.d.phi, f.d.eigenvalues, f.d.mu, f.t, f.batch)
                      : kernels::serial::semigroup_apply(f.d.phi, f.d.eigenvalues, f.d.mu, f.t, f.batch);
    benchmark::DoNotOptimize(k);
  }
}

template <bool Parallel>
void BM_kernel_row_sums(benchmark::State& st) {
  auto& f = fx();
  const Matrix k = kernels::parallel::heat_kernel_rows(f.d.phi, f.d.eigenvalues, f.t, f.rows);
  for (auto _ : st) {
    auto s = Parallel ? kernels::parallel::kernel_row_sums(k, f.rows, f.d.mu, f.batch, f.batch, 1.0)
                      : kernels::serial::kernel_row_sums(k, f.rows, f.d.mu, f.batch, f.batch, 1.0);
    benchmark::DoNotOptimize(s);
  }
}

template <bool Parallel>
void BM_metric_pair_profiles(benchmark::State& st) {
  auto& f = fx();
  for (auto _ : st) {
    auto s = Parallel ? kernels::parallel::metric_pair_profiles(f.space, f.batch, 1.0, f.radii)
                      : kernels::serial::metric_pair_profiles(f.space, f.batch, 1.0, f.radii);
    benchmark::DoNotOptimize(s);
  }
}

}  // namespace

BENCHMARK(BM_carre_du_champ<false>)->Name("carre_du_champ/serial");
BENCHMARK(BM_carre_du_champ<true>)->Name("carre_du_champ/parallel");
BENCHMARK(BM_heat_kernel_rows<false>)->Name("heat_kernel_rows/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_heat_kernel_rows<true>)->Name("heat_kernel_rows/parallel")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_semigroup_apply<false>)->Name("semigroup_apply/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_semigroup_apply<true>)->Name("semigroup_apply/parallel")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_kernel_row_sums<false>)->Name("kernel_row_sums/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_kernel_row_sums<true>)->Name("kernel_row_sums/parallel")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_metric_pair_profiles<false>)->Name("metric_pair_profiles/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_metric_pair_profiles<true>)->Name("metric_pair_profiles/parallel")->Unit(benchmark::kMillisecond);

int main(int argc, char** argv) {
  reexec_with_safe_blas(argv);
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
