// e2esv/ivector.h

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

#ifndef E2ESV_IVECTOR_H_
#define E2ESV_IVECTOR_H_

#include <cstdint>
#include <vector>

#include "e2esv/gmm.h"
#include "e2esv/types.h"

namespace e2esv {

/// Total-variability model.  Row c*D + d of t belongs to component c,
/// feature dimension d.
struct TvModel {
  Matrix t;  // (C*D) x R

  int64_t IvectorDim() const { return t.cols(); }
};

/// Gaussian posterior of the latent factor for one utterance.
struct IvectorPosterior {
  Vector mean;       // the i-vector
  Matrix precision;  // I + sum_c n_c T_c' Sigma_c^-1 T_c
  /// log p(stats | T) up to a T-independent constant:
  /// 0.5 * b' P^-1 b - 0.5 * log|P|.
  double evidence = 0.0;
};

/**
   Holds T together with the per-component quantities that every extraction
   needs, so they are computed once per model rather than per utterance.
*/
class IvectorExtractor {
 public:
  IvectorExtractor(const TvModel &tv, const DiagGmm &ubm);

  IvectorPosterior Posterior(const SuffStats &stats) const;
  /// w = (I + T' S^-1 N T)^-1 T' S^-1 (f - N m)
  Vector Extract(const SuffStats &stats) const { return Posterior(stats).mean; }

  int64_t IvectorDim() const { return sigma_inv_t_.cols(); }

 private:
  Matrix means_;                   // C x D
  Matrix sigma_inv_t_;             // Sigma^-1 T, (C*D) x R
  std::vector<Matrix> quadratic_;  // T_c' Sigma_c^-1 T_c, R x R per c
};

Vector ExtractIvector(const TvModel &tv, const DiagGmm &ubm,
                      const SuffStats &stats);

struct TvOptions {
  int ivector_dim = 600;
  int num_iters = 10;
  double init_scale = 0.5;
  int num_threads = 1;
};

/**
   Plain EM for the total-variability matrix (no minimum-divergence step).
   If objective_history is non-NULL it receives the average per-utterance
   evidence before each iteration and after the last (num_iters + 1 values).
*/
TvModel TrainTv(const std::vector<SuffStats> &stats, const DiagGmm &ubm,
                const TvOptions &opts, uint64_t seed,
                std::vector<double> *objective_history = nullptr);

/// Mean removal + length norm + LDA + length norm.
struct IvecPrep {
  Vector global_mean;  // R
  Matrix lda;          // R x R'

  int64_t InputDim() const { return lda.rows(); }
  int64_t OutputDim() const { return lda.cols(); }
  /// lengthnorm(lda' * lengthnorm(w - global_mean)).  Returns zeros if
  /// w == global_mean.
  Vector Apply(const Vector &w) const;
  Matrix ApplyRows(const Matrix &w) const;
};

/// Fits mean and LDA on training i-vectors (rows) with integer class labels.
/// Needs at least out_dim + 1 distinct classes.
IvecPrep FitPrep(const Matrix &ivectors, const std::vector<int64_t> &labels,
                 int out_dim);

/// Between- and within-class scatter (both normalized by the number of rows).
void ClassScatter(const Matrix &x, const std::vector<int64_t> &labels,
                  Matrix *between, Matrix *within);

}  // namespace e2esv

#endif  // E2ESV_IVECTOR_H_
