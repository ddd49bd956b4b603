// e2esv/types.h

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

#ifndef E2ESV_TYPES_H_
#define E2ESV_TYPES_H_

#include <cstdint>
#include <functional>

#include <Eigen/Dense>

namespace e2esv {

// All training math is double precision.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Throws kInput if any entry is NaN or infinite.
void CheckFinite(const Eigen::Ref<const Matrix> &m, const char *what);

bool AllFinite(const Eigen::Ref<const Matrix> &m);

/// Row-wise Euclidean normalization; zero rows stay zero.
void LengthNormalizeRows(Matrix *m);

/// Returns v / |v|, or the zero vector when |v| == 0.
Vector LengthNormalize(const Vector &v);

/// Runs fn(i) for i in [0, n) on up to num_threads threads.  Each index is
/// handled exactly once; callers write results into per-index slots so the
/// outcome does not depend on scheduling.
void ParallelFor(int64_t n, int num_threads,
                 const std::function<void(int64_t)> &fn);

}  // namespace e2esv

#endif  // E2ESV_TYPES_H_
