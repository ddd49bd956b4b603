// e2esv/corpus.h

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


#ifndef E2ESV_CORPUS_H_
#define E2ESV_CORPUS_H_

#include <cstdint>
#include <string>
#include <vector>

#include "e2esv/frontend.h"
#include "e2esv/trials.h"

namespace e2esv {

enum class Split { kTrain, kDev, kEval };

const char *SplitName(Split s);
Split SplitFromName(const std::string &name);

struct Utterance {
  std::string id;
  std::string speaker;
  FeatureMatrix features;
  Split split = Split::kTrain;
};

struct Corpus {
  std::vector<Utterance> utterances;

  /// Unique ids, at least one frame each, one feature dimension, and no
  /// speaker shared between dev and eval.
  void Validate() const;
  std::vector<const Utterance *> Select(Split s) const;
};

/// Dense speaker indices in order of first appearance.
std::vector<int64_t> SpeakerIndices(const std::vector<const Utterance *> &utts);

/// Drops speakers of the given split with fewer than min_utts utterances.
Corpus FilterMinUtterances(const Corpus &corpus, Split split, int min_utts);

/// Every unordered pair of the utterances, labeled by speaker.
TrialList AllPairsTrialList(const std::vector<const Utterance *> &utts);

/**
   On disk a corpus is dir/corpus.list with lines "id speaker split path"
   (path relative to dir) plus one feature file per utterance under
   dir/feats/.
*/
void WriteCorpus(const std::string &dir, const Corpus &corpus);
Corpus ReadCorpus(const std::string &dir);

struct SynthConfig {
  int n_speakers = 50;
  int utts_per_speaker = 8;
  int min_frames = 200;
  int max_frames = 800;
  int dim = 20;
  int speaker_dim = 8;
  int channel_dim = 4;
  int num_phones = 24;
  double noise_scale = 1.0;
  double nonlinearity = 0.5;
  /// How strongly the speaker variable reshapes the phone trajectories.
  double speaker_warp = 0.4;
  /// Speaker latents come from this many Gaussian clusters (gender-like
  /// groups) whose centers are cluster_separation apart on average.
  int speaker_clusters = 2;
  double cluster_separation = 2.0;
  int n_train_speakers = 30;
  int n_dev_speakers = 10;  // the remaining speakers form the eval split
  uint64_t seed = 1;

  void Validate() const;
};

/**
   Synthetic corpus.  Each speaker draws a latent z (around one of a few
   cluster centers) and each utterance a channel c.  Frame t is built from

     h_t = S z + H c + noise * M(z) (p[phone_t] + e_t)
     x_t = A h_t + nonlinearity * tanh(B h_t)

   where S, H, A, B and the phone prototypes p are fixed random maps, M(z)
   is a speaker-dependent perturbation of the identity, phones last 5-20
   frames, and e_t is AR(1) noise.  Deterministic for a given seed.
*/
Corpus SynthCorpus(const SynthConfig &cfg);

}  // namespace e2esv

#endif  // E2ESV_CORPUS_H_
