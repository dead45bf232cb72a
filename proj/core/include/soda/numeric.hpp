#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

#include "soda/error.hpp"

namespace soda {

/// Dense row-major matrix of 64-bit floats.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;  // rows * cols, row-major

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
  Matrix(std::size_t r, std::size_t c, std::vector<double> values);
  Matrix(std::initializer_list<std::initializer_list<double>> rows_init);

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  std::span<const double> row(std::size_t r) const {
    return {data.data() + r * cols, cols};
  }
  std::span<double> row(std::size_t r) {
    return {data.data() + r * cols, cols};
  }

  bool operator==(const Matrix&) const = default;
};

/// Standard product a*b. Accumulation over the inner dimension runs in
/// ascending index order, so results are bit-reproducible across platforms.
Matrix matmul(const Matrix& a, const Matrix& b);

/// Deterministic pseudo-random generator: xoshiro256** seeded through
/// splitmix64. One algorithm everywhere; identical seeds give identical
/// streams on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  /// Uniform double in [0,1) with 53 bits of precision.
  double next_double();

  /// Uniform double in [lo,hi). Throws DomainError if lo >= hi.
  double uniform(double lo, double hi);

  /// n uniform doubles in [lo,hi).
  std::vector<double> uniform_sequence(double lo, double hi, std::size_t n);

  /// Standard normal deviate (Box-Muller; the spare value is cached).
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  /// Unbiased uniform integer in [0,n). Throws DomainError if n == 0.
  std::uint64_t below(std::uint64_t n);

  /// Independent child generator; advances this stream by one draw.
  Rng fork() { return Rng(next_u64()); }

  /// k distinct indices drawn uniformly from [0,n) without replacement.
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

 private:
  std::uint64_t state_[4];
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

/// Median of a non-empty sequence; even lengths average the two central
/// order statistics. Throws DomainError on empty input.
double median(std::span<const double> values);

/// Euclidean distance between equal-length vectors. Throws ShapeError.
double euclidean(std::span<const double> a, std::span<const double> b);

double mean(std::span<const double> values);

/// Throws DomainError if any entry is NaN or infinite.
void require_finite(std::span<const double> values, const char* context);

}  // namespace soda
