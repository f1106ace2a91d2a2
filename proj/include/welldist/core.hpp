#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace welldist {

using Scalar = double;
using Complex = std::complex<double>;
using Vector = Eigen::VectorXd;
/// Column-major point matrix: one column per point, one row per coordinate.
using PointMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic>;

inline constexpr double kPi = 3.141592653589793238462643383279502884;

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Precondition or argument-range violation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A computation would exceed its declared size budget; the message carries
/// the estimate that tripped the gate.
class BudgetError : public Error {
 public:
  using Error::Error;
};

/// Invalid experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Deterministic reduction

/// Pairwise (tree) sum in fixed index order. The result depends only on the
/// input sequence, never on how callers partition work.
template <typename T>
T pairwise_sum(std::span<const T> values) {
  constexpr std::size_t kBlock = 16;
  const std::size_t n = values.size();
  if (n <= kBlock) {
    T acc{};
    for (std::size_t i = 0; i < n; ++i) acc += values[i];
    return acc;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

template <typename T>
T pairwise_sum(const std::vector<T>& values) {
  return pairwise_sum(std::span<const T>(values.data(), values.size()));
}

// ---------------------------------------------------------------------------
// Threading

/// Upper bound on worker threads used by the parallel loops. Results never
/// depend on this value.
void set_max_threads(unsigned n);
unsigned max_threads();

/// Runs body(begin, end) over contiguous chunks of [0, n). Chunks are
/// disjoint; body must only write to its own index range.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

/// Library version string recorded in manifests.
const char* version();

}  // namespace welldist
