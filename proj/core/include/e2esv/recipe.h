// e2esv/recipe.h

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


#ifndef E2ESV_RECIPE_H_
#define E2ESV_RECIPE_H_

#include <cstdint>
#include <string>
#include <vector>

#include "e2esv/config.h"
#include "e2esv/corpus.h"
#include "e2esv/dplda.h"
#include "e2esv/e2e.h"
#include "e2esv/eval.h"
#include "e2esv/f2s.h"
#include "e2esv/frontend.h"
#include "e2esv/gmm.h"
#include "e2esv/ivector.h"
#include "e2esv/plda.h"
#include "e2esv/s2i.h"

namespace e2esv {

/// Every tunable of the pipeline with desk-scale defaults.  Config keys are
/// the section-prefixed field names, e.g. "ubm.components" or "f2s.hidden".
struct RecipeOptions {
  SynthConfig synth;
  FrontendOptions frontend;
  UbmOptions ubm;
  TvOptions tv;
  int lda_dim = 15;
  PldaOptions plda;
  ObjectiveConfig dplda_objective;
  LbfgsOptions lbfgs;
  F2sOptions f2s;
  double relevance = 16.0;
  int pca_dim = 100;
  S2iOptions s2i;
  TrainSchedule joint;
  TrainSchedule e2e;
  int num_threads = 1;

  RecipeOptions();
};

/// Reads every known key; unknown keys are reported by the caller.
RecipeOptions RecipeFromConfig(const Config &config);

std::vector<PreparedUtterance> PrepareAll(const FrontendOptions &opts,
                                          const std::vector<const Utterance *> &utts,
                                          int num_threads);

Matrix StackRaw(const std::vector<PreparedUtterance> &utts);

std::vector<SuffStats> UbmStatsAll(const DiagGmm &ubm,
                                   const std::vector<PreparedUtterance> &utts,
                                   int num_threads);

std::vector<SuffStats> F2sStatsAll(const F2sNet &f2s,
                                   const std::vector<PreparedUtterance> &utts,
                                   int num_threads);

Matrix ExtractIvectorsAll(const TvModel &tv, const DiagGmm &ubm,
                          const std::vector<SuffStats> &stats, int num_threads);

Matrix SupervectorsAll(const DiagGmm &ubm, const std::vector<SuffStats> &stats,
                       double relevance);

/// UBM responsibilities of every frame, the f2s training targets.
std::vector<Matrix> ResponsibilitiesAll(const DiagGmm &ubm,
                                        const std::vector<PreparedUtterance> &utts,
                                        int num_threads);

std::vector<Matrix> ExpandedAll(const std::vector<PreparedUtterance> &utts);

/// All unordered pairs of rows scored by the generative PLDA.
ScoredTrials PldaAllPairs(const TwoCovPlda &plda, const Matrix &vectors,
                          const std::vector<int64_t> &speaker_of);

}  // namespace e2esv

#endif  // E2ESV_RECIPE_H_
