#include "dirbv/blas_guard.hpp"

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <string>
#include <vector>

#include <cblas.h>
#include <lapacke.h>

#include "dirbv/common.hpp"

namespace dirbv {

double blas_self_check_residual() {
  // Kernel families switch with problem size, so probe a product above the
  // small-matrix path and a symmetric eigensolve.
  constexpr int n = 256;
  std::vector<double> a(n * n), b(n * n), c(n * n);
  Rng rng(2024);
  for (double& v : a) v = rng.uniform(-1.0, 1.0);
  for (double& v : b) v = rng.uniform(-1.0, 1.0);
  cblas_dgemm(CblasRowMajor, CblasNoTrans, CblasTrans, n, n, n, 1.0, a.data(), n, b.data(), n, 0.0, c.data(), n);
  double err = 0.0, top = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += a[i * n + k] * b[j * n + k];
      err = std::max(err, std::abs(s - c[i * n + j]));
      top = std::max(top, std::abs(s));
    }
  double worst = err / top;

  constexpr int m = 120;
  std::vector<double> sym(m * m), w(m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j <= i; ++j) sym[i * m + j] = sym[j * m + i] = rng.uniform(-1.0, 1.0);
  std::vector<double> vec(sym);
  if (LAPACKE_dsyevd(LAPACK_ROW_MAJOR, 'V', 'U', m, vec.data(), m, w.data()) != 0) return 1.0;
  const double scale = std::max(std::abs(w.front()), std::abs(w.back()));
  for (int k = 0; k < m; ++k)
    for (int i = 0; i < m; ++i) {
      double s = 0.0;
      for (int j = 0; j < m; ++j) s += sym[i * m + j] * vec[j * m + k];
      worst = std::max(worst, std::abs(s - w[k] * vec[i * m + k]) / scale);
    }
  return worst;
}

void require_sane_blas() {
  static std::once_flag once;
  static double residual = 0.0;
  std::call_once(once, [] { residual = blas_self_check_residual(); });
  if (!(residual < 1e-11)) {
    throw NumericError("BLAS self-check failed (dgemm relative error " + std::to_string(residual) +
                       "); set OPENBLAS_CORETYPE=Haswell or link a different BLAS");
  }
}

void reexec_with_safe_blas(char** argv) {
  if (std::getenv("OPENBLAS_CORETYPE") != nullptr) return;
  if (blas_self_check_residual() < 1e-11) return;
  ::setenv("OPENBLAS_CORETYPE", "Haswell", 1);
  ::execv("/proc/self/exe", argv);
  // execv only returns on failure; the library check will report it later.
}

}  // namespace dirbv
