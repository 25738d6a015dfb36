#pragma once

namespace dirbv {

/// Worst relative error of a dgemm and a dsyevd probe against naive products.
double blas_self_check_residual();

/// Throws NumericError if the BLAS backend fails its self-check. The check
/// runs once per process.
void require_sane_blas();

/// For executables. Some OpenBLAS builds pick a kernel family that
/// miscomputes on virtualized CPUs; when the self-check fails and
/// OPENBLAS_CORETYPE is unset, re-exec the process with a conservative core
/// type. Returns normally otherwise.
void reexec_with_safe_blas(char** argv);

}  // namespace dirbv
