// tests/test_support.h

// Copyright 2026  The e2esv Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.


#ifndef E2ESV_TESTS_TEST_SUPPORT_H_
#define E2ESV_TESTS_TEST_SUPPORT_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>

#include "e2esv/types.h"

namespace e2esv::testing {

inline Matrix RandomMatrix(int64_t rows, int64_t cols, uint64_t seed,
                           double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, scale);
  Matrix m(rows, cols);
  for (int64_t i = 0; i < rows; i++)
    for (int64_t j = 0; j < cols; j++) m(i, j) = n(rng);
  return m;
}

inline Vector RandomVector(int64_t n, uint64_t seed, double scale = 1.0) {
  return RandomMatrix(n, 1, seed, scale).col(0);
}

/// Symmetric positive definite: A A' / n + floor * I.
inline Matrix RandomSpd(int64_t n, uint64_t seed, double floor = 0.1) {
  Matrix a = RandomMatrix(n, n, seed);
  return a * a.transpose() / static_cast<double>(n) +
         floor * Matrix::Identity(n, n);
}

/// max_i |a_i - b_i| / max(max_i |b_i|, tiny).
inline double RelError(const Matrix &a, const Matrix &b) {
  double scale = std::max(b.cwiseAbs().maxCoeff(), 1e-300);
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

/// Central differences of f at x, one coordinate at a time.
inline Vector NumericGradient(const std::function<double(const Vector &)> &f,
                              const Vector &x, double step = 1e-5) {
  Vector g(x.size());
  Vector xp = x;
  for (int64_t i = 0; i < x.size(); i++) {
    const double orig = xp[i];
    xp[i] = orig + step;
    double up = f(xp);
    xp[i] = orig - step;
    double down = f(xp);
    xp[i] = orig;
    g[i] = (up - down) / (2.0 * step);
  }
  return g;
}

/// Elementwise relative error with an absolute floor, so that coordinates
/// whose true gradient is ~0 do not dominate.
inline double GradError(const Vector &analytic, const Vector &numeric,
                        double floor = 1e-6) {
  double worst = 0.0;
  for (int64_t i = 0; i < analytic.size(); i++) {
    double denom = std::max({std::abs(analytic[i]), std::abs(numeric[i]), floor});
    worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / denom);
  }
  return worst;
}

}  // namespace e2esv::testing

#endif  // E2ESV_TESTS_TEST_SUPPORT_H_
