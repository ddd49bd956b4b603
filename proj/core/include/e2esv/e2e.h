// e2esv/e2e.h

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


#ifndef E2ESV_E2E_H_
#define E2ESV_E2E_H_

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "e2esv/dplda.h"
#include "e2esv/eval.h"
#include "e2esv/f2s.h"
#include "e2esv/frontend.h"
#include "e2esv/gmm.h"
#include "e2esv/netcore.h"
#include "e2esv/s2i.h"

namespace e2esv {

/**
   The assembled verifier: frames -> f2s statistics -> MAP supervector ->
   PCA -> s2i embedding -> quadratic score.  The UBM (used only for the MAP
   prior means) and the PCA are frozen.  The trainable parameters are laid
   out as [f2s | s2i | dplda] and the snapshot has one group per block.
*/
struct E2eSystem {
  FrontendOptions frontend;
  double relevance = 16.0;
  F2sNet f2s;
  DiagGmm ubm;
  PcaModel pca;
  S2iNet s2i;
  DpldaParams dplda;
  ParamSnapshot snapshot;

  int64_t NumF2sParams() const { return f2s.net.NumParams(); }
  int64_t NumS2iParams() const { return s2i.net.NumParams(); }
  int64_t NumTrainable() const {
    return NumF2sParams() + NumS2iParams() + dplda.NumParams();
  }
  Vector TrainableParams() const;
  void SetTrainableParams(const Eigen::Ref<const Vector> &params);
  /// Checks that the stages chain and the snapshot fits.
  void Validate() const;
};

/// Builds a system and snapshots its current parameters with every group
/// weighted by snapshot_weight.
E2eSystem AssembleE2e(const FrontendOptions &frontend, double relevance,
                      const F2sNet &f2s, const DiagGmm &ubm, const PcaModel &pca,
                      const S2iNet &s2i, const DpldaParams &dplda,
                      double snapshot_weight);

/// Normalized frames and their context expansion, the two inputs of f2s.
struct PreparedUtterance {
  Matrix raw;       // T x D after sliding mean/variance normalization
  Matrix expanded;  // T x (D * num_dct)
};

PreparedUtterance PrepareUtterance(const FrontendOptions &opts,
                                   const FeatureMatrix &features);

/// Stats, supervector, PCA projection (the s2i input) of one utterance.
Vector E2eS2iInput(const E2eSystem &sys, const PreparedUtterance &utt);
Vector E2eEmbed(const E2eSystem &sys, const PreparedUtterance &utt);
double E2eScore(const E2eSystem &sys, const FeatureMatrix &a,
                const FeatureMatrix &b);

/// Counts utterances whose f2s activations are held in memory.
struct ResidencyMeter {
  int current = 0;
  int peak = 0;
  int64_t peak_doubles = 0;  // largest single-utterance activation footprint

  void Enter(int64_t doubles);
  void Leave();
};

/// A loss of per-utterance statistics; fills dLoss/dstats when asked.
using StatsLoss = std::function<double(const std::vector<SuffStats> &stats,
                                       std::vector<StatsGrad> *grads)>;

enum class BackpropMode {
  /// Keep one utterance's activations at a time and recompute them during
  /// the backward pass.
  kCheckpointed,
  /// Keep every utterance's activations until the backward pass is done.
  kFullGraph,
};

/**
   Gradient of loss(stats(utterances)) with respect to the f2s parameters,
   returned in an Mlp-shaped container.  Both modes perform the same
   arithmetic in the same order.
*/
Mlp F2sBatchGradients(const F2sNet &f2s,
                      const std::vector<const PreparedUtterance *> &utts,
                      const StatsLoss &loss, BackpropMode mode,
                      double *loss_value, ResidencyMeter *meter = nullptr);

/**
   Weighted cross-entropy of the batch (every unordered pair of the given
   utterances) and its gradient with respect to all trainable parameters,
   flattened in TrainableParams() order.  The snapshot penalty is not
   included.
*/
double E2eBatchGradients(const E2eSystem &sys,
                         const std::vector<const PreparedUtterance *> &utts,
                         const std::vector<int64_t> &speaker_of,
                         const ObjectiveConfig &cfg, BackpropMode mode,
                         Vector *grad, ResidencyMeter *meter = nullptr);

/// Halve lr iff the latest value is not strictly below every earlier one.
double LrScheduleStep(const std::vector<double> &history, double lr);

struct TrainSchedule {
  int n_pairs = 5000;
  int epoch_batches = 250;
  double lr = 1e-3;
  bool halve_on_stagnation = true;
  int max_epochs = 10;
  /// Weight of the pull toward the snapshot; groups listed in
  /// group_weights use their own value instead.
  double snapshot_weight = 0.0;
  std::map<std::string, double> group_weights;
  ObjectiveConfig objective;
};

struct EpochLog {
  int epoch = 0;
  double train_loss = 0.0;
  double dev_eer = 0.0;
  double dev_c_primary = 0.0;
  double lr = 0.0;
};

/// Tab-separated: epoch, train loss, dev EER, dev C_primary, lr.
std::string FormatEpochLog(const EpochLog &e);

struct TrainReport {
  /// Entry 0 describes the system before training (train loss 0).
  std::vector<EpochLog> epochs;
  int best_epoch = 0;
  /// Largest |param - snapshot| seen after any optimizer step.
  double max_snapshot_drift = 0.0;
};

/// All unordered pairs of dev embeddings, labeled by speaker.
ScoredTrials AllPairTrials(const DpldaParams &p, const Matrix &embeddings,
                           const std::vector<int64_t> &speaker_of);

/**
   Adam on the s2i and dplda blocks with f2s frozen.  The inputs are the
   precomputed s2i inputs (E2eS2iInput rows).  Returns the system at the
   epoch with the lowest dev C_primary (the initial system counts as epoch
   0).  Throws kConfig if the dev set is empty.
*/
E2eSystem TrainJointS2iDplda(const E2eSystem &init, const Matrix &train_inputs,
                             const std::vector<int64_t> &train_speakers,
                             const Matrix &dev_inputs,
                             const std::vector<int64_t> &dev_speakers,
                             const TrainSchedule &schedule, uint64_t seed,
                             TrainReport *report = nullptr);

/// As TrainJointS2iDplda but all three blocks are trained, with
/// checkpointed backpropagation through f2s.
E2eSystem TrainE2eFull(const E2eSystem &init,
                       const std::vector<PreparedUtterance> &train,
                       const std::vector<int64_t> &train_speakers,
                       const std::vector<PreparedUtterance> &dev,
                       const std::vector<int64_t> &dev_speakers,
                       const TrainSchedule &schedule, uint64_t seed,
                       TrainReport *report = nullptr);

}  // namespace e2esv

#endif  // E2ESV_E2E_H_
