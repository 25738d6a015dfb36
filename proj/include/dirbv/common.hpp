#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dirbv {

using Vec = std::vector<double>;

inline constexpr const char* kVersion = "0.4.0";

/// Default vertex budget for anything that builds a dense n x n object.
inline constexpr std::size_t kDefaultCapacity = 4096;

// Error hierarchy. The CLI maps each class onto a distinct exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad argument or violated precondition.
class DomainError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class CapacityError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

/// A structural invariant of an input or an intermediate object failed.
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

/// Dense row-major matrix. Just storage; the algebra lives in kernels.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  Vec column(std::size_t c) const;
  void set_column(std::size_t c, std::span<const double> v);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Seeded generator with platform-independent draws (the std distributions
/// are implementation-defined, which would break report determinism).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }
  double sign() { return (engine_() >> 63) ? 1.0 : -1.0; }
  /// k distinct indices from [0, n), sorted.
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

 private:
  std::mt19937_64 engine_;
};

/// Closed scale window [lo, hi].
struct ScaleRange {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double s, double relTol = 1e-9) const {
    return s >= lo * (1.0 - relTol) && s <= hi * (1.0 + relTol);
  }
};

/// Geometric grid from lo to hi (both included) at the given density.
Vec geometric_grid(double lo, double hi, double pointsPerDecade);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // root-mean-square residual
  std::size_t count = 0;
};

/// Ordinary least squares y ~ slope * x + intercept.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

/// Least squares in log-log coordinates; non-positive samples are dropped.
LineFit fit_loglog(std::span<const double> x, std::span<const double> y);

double lp_norm(std::span<const double> f, std::span<const double> mu, double p);
double linf_norm(std::span<const double> f);
double mu_inner(std::span<const double> f, std::span<const double> g, std::span<const double> mu);

/// 64-bit FNV-1a, used for config hashes and space fingerprints.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL);

/// max/min of a set of positive constants; 1 for an empty or singleton set.
double spread(std::span<const double> values);

}  // namespace dirbv
