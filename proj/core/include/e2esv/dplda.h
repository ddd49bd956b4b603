// e2esv/dplda.h

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

#ifndef E2ESV_DPLDA_H_
#define E2ESV_DPLDA_H_

#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "e2esv/plda.h"
#include "e2esv/types.h"

namespace e2esv {

/// The quadratic score, evaluated term by term.  Exactly symmetric in (a, b).
double DpldaScore(const DpldaParams &p, const Vector &a, const Vector &b);

/// U x U matrix of scores between all rows of vectors.
Matrix DpldaScoreMatrix(const DpldaParams &p, const Matrix &vectors);

/// How to place the training prior between the two evaluation priors.
enum class PriorMidpoint { kArithmetic, kLogOdds };

/// Midpoint of the 0.01 / 0.005 operating points (0.0075 arithmetic).
double OperatingPointPrior(PriorMidpoint rule);

struct ObjectiveConfig {
  double p_target = 0.0075;
  /// Applied to lambda, gamma and c; never to k.
  double l2_weight = 0.0;
};

struct Trial {
  int64_t i = 0;
  int64_t j = 0;
  bool target = false;
};

/// Utterance vectors of one minibatch; its trials are all unordered pairs.
struct TrialBatch {
  Matrix vectors;                   // U x R'
  std::vector<int64_t> speaker_of;  // U

  int64_t NumUtterances() const { return vectors.rows(); }
  int64_t NumTrials() const {
    return NumUtterances() * (NumUtterances() - 1) / 2;
  }
  std::vector<Trial> Trials() const;
};

/**
   Prior-weighted binary cross-entropy over all unordered pairs of rows of
   vectors:

     sum_tgt  alpha * softplus(-(s + theta))
   + sum_non  beta  * softplus(s + theta)
   + l2 * (|lambda|^2 + |gamma|^2 + |c|^2)

   with theta = logit(p_target), alpha = p_target / #targets and
   beta = (1 - p_target) / #non-targets.  Gradients are written to *grad
   and, if non-NULL, *grad_vectors (dLoss/dvectors, U x R').  Throws
   kObjective when either trial class is missing.
*/
double WeightedBxe(const DpldaParams &p, const Matrix &vectors,
                   const std::vector<int64_t> &speaker_of,
                   const ObjectiveConfig &cfg, DpldaParams *grad,
                   Matrix *grad_vectors = nullptr);

inline double WeightedBxe(const DpldaParams &p, const TrialBatch &batch,
                          const ObjectiveConfig &cfg, DpldaParams *grad) {
  return WeightedBxe(p, batch.vectors, batch.speaker_of, cfg, grad);
}

struct LbfgsOptions {
  int history = 10;
  int max_iters = 200;
  double grad_tol = 1e-6;
  double armijo_c1 = 1e-4;
  double min_step = 1e-16;
};

struct LbfgsReport {
  double initial_loss = 0.0;
  double final_loss = 0.0;
  int iterations = 0;
  bool converged = false;
  std::string status;
  std::vector<double> loss_history;  // one per accepted iterate, incl. start
};

/// Objective: returns f(x) and writes the gradient.
using Objective = std::function<double(const Vector &x, Vector *grad)>;

/**
   Limited-memory BFGS (two-loop recursion) with backtracking line search
   under the Armijo condition.  Steps producing non-finite loss are halved
   like any other rejected step; a step below min_step ends the run with
   converged = true and a warning status.
*/
Vector MinimizeLbfgs(const Objective &objective, const Vector &x0,
                     const LbfgsOptions &opts, LbfgsReport *report);

/// Full-batch DPLDA training over all trials formed from the rows of vectors.
DpldaParams TrainDpldaFullBatch(const DpldaParams &init, const Matrix &vectors,
                                const std::vector<int64_t> &labels,
                                const ObjectiveConfig &cfg,
                                const LbfgsOptions &opts,
                                LbfgsReport *report = nullptr);

/// speaker id -> indices of that speaker's utterances.
using SpeakerUtterances = std::map<int64_t, std::vector<int64_t>>;

SpeakerUtterances GroupBySpeaker(const std::vector<int64_t> &speaker_of);

/**
   Per-speaker random grouping of utterances into pairs.  A speaker with one
   utterance yields a group of one; an odd count of three or more puts three
   utterances in one group.  Groups of all speakers are shuffled together,
   so drawing them front to back is sampling without replacement.
*/
struct PairPool {
  std::vector<std::vector<int64_t>> groups;
  size_t next = 0;

  size_t Remaining() const { return groups.size() - next; }
};

PairPool MakePairPool(const SpeakerUtterances &speakers, std::mt19937_64 *rng);

/**
   Draws n_pairs groups from *pool without replacement and returns the
   utterance indices of the minibatch.  When the pool runs dry a fresh pool
   (new random pairing) is built and drawing continues.  If groups_out is
   non-NULL it receives the drawn groups in order.
*/
std::vector<int64_t> NextMinibatch(PairPool *pool,
                                   const SpeakerUtterances &speakers,
                                   int n_pairs, std::mt19937_64 *rng,
                                   std::vector<std::vector<int64_t>> *groups_out =
                                       nullptr);

/// Gathers the rows and speaker ids of the given utterances.
TrialBatch MakeTrialBatch(const Matrix &vectors,
                          const std::vector<int64_t> &speaker_of,
                          const std::vector<int64_t> &utterances);

}  // namespace e2esv

#endif  // E2ESV_DPLDA_H_
