#pragma once

// Test-side reference implementations, kept independent of the library code
// they are used to check. The dense matrix exponential comes from Eigen's
// unsupported MatrixFunctions module.

#include <unsupported/Eigen/MatrixFunctions>

#include <functional>
#include <random>

#include "galins/common.hpp"

namespace galins::testing {

template <typename Mat>
Mat denseExpm(const Mat& m) {
  return m.exp();
}

inline std::mt19937_64 makeRng(uint64_t seed) { return std::mt19937_64(seed); }

template <int N>
Eigen::Matrix<double, N, 1> randomVec(std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> dist(-scale, scale);
  Eigen::Matrix<double, N, 1> v;
  for (int i = 0; i < N; ++i) v(i) = dist(rng);
  return v;
}

/// Central finite difference of a vector-valued function of a scalar.
template <typename F>
auto centralDiff(F f, double h = 1e-5) -> decltype(f(0.0)) {
  return (f(h) - f(-h)) / (2.0 * h);
}

}  // namespace galins::testing
