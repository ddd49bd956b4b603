// e2esv/plda.h

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

#ifndef E2ESV_PLDA_H_
#define E2ESV_PLDA_H_

#include <cstdint>
#include <vector>

#include "e2esv/types.h"

namespace e2esv {

/**
   Two-covariance PLDA: a speaker variable y ~ N(mu, between) and each
   utterance x ~ N(y, within).
*/
struct TwoCovPlda {
  Vector mu;
  Matrix between;  // B, positive semi-definite
  Matrix within;   // W, positive definite

  int64_t Dim() const { return mu.size(); }
  /// Throws kModel unless B is PSD and W is PD (both symmetric).
  void Validate() const;
};

/**
   Parameters of the quadratic verification score

     s(a, b) = a'L b + b'L a + a'G a + b'G b + (a + b)'c + k

   with L = lambda, G = gamma.
*/
struct DpldaParams {
  Matrix lambda;
  Matrix gamma;
  Vector c;
  double k = 0.0;

  int64_t Dim() const { return c.size(); }
  int64_t NumParams() const { return 2 * Dim() * Dim() + Dim() + 1; }
  static DpldaParams Zeros(int64_t dim);
  /// Replaces lambda and gamma by their symmetric parts.
  void Symmetrize();
  /// lambda (row-major), gamma (row-major), c, k.
  Vector Flatten() const;
  void Unflatten(const Eigen::Ref<const Vector> &flat);
};

struct PldaOptions {
  int num_iters = 10;
};

/**
   EM training on rows of vectors with integer speaker labels.  Requires at
   least two speakers and at least one speaker with two or more utterances.
   llk_history (if non-NULL) gets the average per-utterance log-likelihood
   before each iteration and after the last.
*/
TwoCovPlda TrainPlda(const Matrix &vectors, const std::vector<int64_t> &labels,
                     const PldaOptions &opts,
                     std::vector<double> *llk_history = nullptr);

/// Exact log-likelihood of the data under the model (speakers integrated
/// out), summed over speakers.
double PldaLogLikelihood(const TwoCovPlda &plda, const Matrix &vectors,
                         const std::vector<int64_t> &labels);

/**
   Verification log-likelihood ratio evaluated from the two joint Gaussians
   of (e, t): same speaker with cross-covariance B, different speakers with
   none.  Construction factorizes both 2R x 2R covariances once.
*/
class PldaScorer {
 public:
  explicit PldaScorer(const TwoCovPlda &plda);
  double Llr(const Vector &e, const Vector &t) const;

 private:
  double OneSided(const Vector &e, const Vector &t) const;

  Vector mu_;
  Eigen::LLT<Matrix> same_;
  Eigen::LLT<Matrix> diff_;
  double half_logdet_ratio_ = 0.0;  // 0.5 * (log|diff| - log|same|)
};

double PldaLlr(const TwoCovPlda &plda, const Vector &e, const Vector &t);

/// Closed-form conversion to the quadratic score parameters, such that
/// DpldaScore(ToDplda(m), e, t) == PldaLlr(m, e, t) up to rounding.
DpldaParams ToDplda(const TwoCovPlda &plda);

}  // namespace e2esv

#endif  // E2ESV_PLDA_H_
