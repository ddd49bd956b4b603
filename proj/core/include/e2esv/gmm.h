// e2esv/gmm.h

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

#ifndef E2ESV_GMM_H_
#define E2ESV_GMM_H_

#include <cstdint>
#include <vector>

#include "e2esv/types.h"

namespace e2esv {

/// Diagonal-covariance Gaussian mixture (the UBM).
struct DiagGmm {
  Vector weights;  // C, on the simplex
  Matrix means;    // C x D
  Matrix vars;     // C x D

  int64_t NumComponents() const { return weights.size(); }
  int64_t Dim() const { return means.cols(); }
  void Validate() const;

  /// T x C matrix of log(w_c) + log N(x_t; mu_c, diag(var_c)).
  Matrix ComponentLogLikes(const Matrix &frames) const;
  /// Total log-likelihood of the frames.
  double LogLikelihood(const Matrix &frames) const;
};

/// Zeroth- and first-order statistics of one utterance.
struct SuffStats {
  Vector n;  // C
  Matrix f;  // C x D
  int64_t frames_total = 0;

  int64_t NumComponents() const { return n.size(); }
  int64_t Dim() const { return f.cols(); }
};

struct UbmOptions {
  int num_components = 64;
  int num_iters = 20;
  // Variance floor as a fraction of the global per-dimension variance.
  double var_floor = 1e-3;
};

/**
   EM training of a diagonal GMM.  Means start at num_components distinct
   frames chosen with the seed, variances at the global diagonal variance,
   weights uniform.  If llk_history is non-NULL it receives the average
   per-frame log-likelihood before each iteration and after the last one
   (num_iters + 1 values).
*/
DiagGmm TrainUbm(const Matrix &frames, const UbmOptions &opts, uint64_t seed,
                 std::vector<double> *llk_history = nullptr);

/// T x C posteriors, computed in the log domain.
Matrix Responsibilities(const DiagGmm &gmm, const Matrix &frames);

/// n_c = sum_t resp(t,c); f_c = sum_t resp(t,c) x_t.
SuffStats SufficientStats(const Matrix &resp, const Matrix &frames);

/// Log-sum-exp of each row.
Vector RowLogSumExp(const Matrix &m);

}  // namespace e2esv

#endif  // E2ESV_GMM_H_
