// e2esv/f2s.h

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

#ifndef E2ESV_F2S_H_
#define E2ESV_F2S_H_

#include <cstdint>
#include <vector>

#include "e2esv/gmm.h"
#include "e2esv/netcore.h"
#include "e2esv/types.h"

namespace e2esv {

/// Features-to-statistics network: sigmoid hidden layers and a softmax over
/// UBM components, evaluated on context-expanded frames.
struct F2sNet {
  Mlp net;

  int64_t NumComponents() const { return net.OutputDim(); }
  int64_t InputDim() const { return net.InputDim(); }
};

F2sNet CreateF2s(int64_t input_dim, int64_t num_components,
                 const std::vector<int64_t> &hidden, uint64_t seed);

struct F2sOptions {
  std::vector<int64_t> hidden = {1500, 1500, 1500, 1500};
  double lr = 0.1;
  int minibatch = 512;
  int num_epochs = 10;
  /// The learning rate is halved after an epoch whose training loss is not
  /// at least this much (relative) below the best so far.
  double plateau_tol = 1e-3;
};

struct F2sReport {
  std::vector<double> epoch_loss;  // mean minibatch cross-entropy per epoch
  double final_loss = 0.0;         // cross-entropy over all frames at the end
};

/**
   SGD on the frame-level cross-entropy -sum_c target_c log pred_c against
   soft targets (UBM posteriors).  expanded[u] and targets[u] must have the
   same number of rows.
*/
F2sNet TrainF2s(const F2sNet &init, const std::vector<Matrix> &expanded,
                const std::vector<Matrix> &targets, const F2sOptions &opts,
                uint64_t seed, F2sReport *report = nullptr);

/// Mean per-frame cross-entropy of the net's predictions against targets.
double FrameCrossEntropy(const Mlp &net, const Matrix &inputs,
                         const Matrix &targets);

/// Statistics from predicted responsibilities and the raw frames.
SuffStats F2sStats(const F2sNet &f2s, const Matrix &expanded, const Matrix &raw);

/// Same, pooling from a forward cache that the caller keeps for backward.
SuffStats PoolStats(const ForwardCache &cache, const Matrix &raw);

/// Gradient of a loss with respect to one utterance's statistics.
struct StatsGrad {
  Vector n;  // C
  Matrix f;  // C x D
};

/**
   Backpropagates dLoss/d(n, f) through the pooling layer and the network.
   Parameter gradients are added to *grads.
*/
void F2sStatsBackward(const F2sNet &f2s, const ForwardCache &cache,
                      const Matrix &raw, const StatsGrad &grad, Mlp *grads);

}  // namespace e2esv

#endif  // E2ESV_F2S_H_
