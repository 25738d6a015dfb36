#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include "dirbv/blas_guard.hpp"

int main(int argc, char** argv) {
  dirbv::reexec_with_safe_blas(argv);
  doctest::Context ctx(argc, argv);
  return ctx.run();
}
