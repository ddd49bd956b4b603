// core/src/recipe.cc

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


#include "e2esv/recipe.h"

#include "e2esv/error.h"

namespace e2esv {

RecipeOptions::RecipeOptions() {
  ubm.num_components = 32;
  ubm.num_iters = 10;
  tv.ivector_dim = 40;
  tv.num_iters = 5;
  f2s.hidden = {64, 64};
  f2s.num_epochs = 3;
  f2s.minibatch = 128;
  s2i.hidden = {64, 64};
  s2i.lr = 0.5;
  s2i.minibatch = 16;
  s2i.num_epochs = 60;
  joint.n_pairs = 40;
  joint.epoch_batches = 25;
  joint.lr = 1e-3;
  joint.max_epochs = 6;
  e2e.n_pairs = 10;
  e2e.epoch_batches = 10;
  e2e.lr = 1e-4;
  e2e.max_epochs = 2;
}

namespace {

void ReadSchedule(const Config &c, const std::string &p, TrainSchedule *s) {
  s->n_pairs = static_cast<int>(c.GetInt(p + "n_pairs", s->n_pairs));
  s->epoch_batches = static_cast<int>(c.GetInt(p + "epoch_batches", s->epoch_batches));
  s->lr = c.GetDouble(p + "lr", s->lr);
  s->halve_on_stagnation = c.GetBool(p + "halve_on_stagnation", s->halve_on_stagnation);
  s->max_epochs = static_cast<int>(c.GetInt(p + "max_epochs", s->max_epochs));
  s->snapshot_weight = c.GetDouble(p + "snapshot_weight", s->snapshot_weight);
  for (const char *group : {"f2s", "s2i", "dplda"}) {
    std::string key = p + "snapshot_weight." + group;
    if (c.Has(key)) s->group_weights[group] = c.GetDouble(key, 0.0);
  }
}

int AsInt(const Config &c, const std::string &key, int def) {
  return static_cast<int>(c.GetInt(key, def));
}

}  // namespace

RecipeOptions RecipeFromConfig(const Config &c) {
  RecipeOptions o;
  SynthConfig &s = o.synth;
  s.n_speakers = AsInt(c, "synth.speakers", s.n_speakers);
  s.utts_per_speaker = AsInt(c, "synth.utts_per_speaker", s.utts_per_speaker);
  s.min_frames = AsInt(c, "synth.min_frames", s.min_frames);
  s.max_frames = AsInt(c, "synth.max_frames", s.max_frames);
  s.dim = AsInt(c, "synth.dim", s.dim);
  s.speaker_dim = AsInt(c, "synth.speaker_dim", s.speaker_dim);
  s.channel_dim = AsInt(c, "synth.channel_dim", s.channel_dim);
  s.num_phones = AsInt(c, "synth.phones", s.num_phones);
  s.noise_scale = c.GetDouble("synth.noise_scale", s.noise_scale);
  s.nonlinearity = c.GetDouble("synth.nonlinearity", s.nonlinearity);
  s.speaker_warp = c.GetDouble("synth.speaker_warp", s.speaker_warp);
  s.speaker_clusters = AsInt(c, "synth.speaker_clusters", s.speaker_clusters);
  s.cluster_separation = c.GetDouble("synth.cluster_separation", s.cluster_separation);
  s.n_train_speakers = AsInt(c, "synth.train_speakers", s.n_train_speakers);
  s.n_dev_speakers = AsInt(c, "synth.dev_speakers", s.n_dev_speakers);

  o.frontend.stmvn_window_s = c.GetDouble("frontend.stmvn_window_s", o.frontend.stmvn_window_s);
  o.frontend.half_window = AsInt(c, "frontend.half_window", o.frontend.half_window);
  o.frontend.num_dct = AsInt(c, "frontend.num_dct", o.frontend.num_dct);

  o.ubm.num_components = AsInt(c, "ubm.components", o.ubm.num_components);
  o.ubm.num_iters = AsInt(c, "ubm.iters", o.ubm.num_iters);
  o.ubm.var_floor = c.GetDouble("ubm.var_floor", o.ubm.var_floor);

  o.tv.ivector_dim = AsInt(c, "tv.dim", o.tv.ivector_dim);
  o.tv.num_iters = AsInt(c, "tv.iters", o.tv.num_iters);
  o.tv.init_scale = c.GetDouble("tv.init_scale", o.tv.init_scale);
  o.lda_dim = AsInt(c, "ivector.lda_dim", o.lda_dim);

  o.plda.num_iters = AsInt(c, "plda.iters", o.plda.num_iters);

  std::string prior = c.GetString("dplda.prior", "");
  if (prior == "arithmetic") {
    o.dplda_objective.p_target = OperatingPointPrior(PriorMidpoint::kArithmetic);
  } else if (prior == "logodds") {
    o.dplda_objective.p_target = OperatingPointPrior(PriorMidpoint::kLogOdds);
  } else if (!prior.empty()) {
    Fail(ErrorKind::kConfig, "dplda.prior must be 'arithmetic' or 'logodds'");
  }
  o.dplda_objective.p_target = c.GetDouble("dplda.p_target", o.dplda_objective.p_target);
  o.dplda_objective.l2_weight = c.GetDouble("dplda.l2", o.dplda_objective.l2_weight);
  o.lbfgs.history = AsInt(c, "dplda.lbfgs_history", o.lbfgs.history);
  o.lbfgs.max_iters = AsInt(c, "dplda.max_iters", o.lbfgs.max_iters);
  o.lbfgs.grad_tol = c.GetDouble("dplda.grad_tol", o.lbfgs.grad_tol);

  o.f2s.hidden = c.GetIntList("f2s.hidden", o.f2s.hidden);
  o.f2s.lr = c.GetDouble("f2s.lr", o.f2s.lr);
  o.f2s.minibatch = AsInt(c, "f2s.minibatch", o.f2s.minibatch);
  o.f2s.num_epochs = AsInt(c, "f2s.epochs", o.f2s.num_epochs);

  o.relevance = c.GetDouble("s2i.relevance", o.relevance);
  o.pca_dim = AsInt(c, "pca.dim", o.pca_dim);
  o.s2i.hidden = c.GetIntList("s2i.hidden", o.s2i.hidden);
  o.s2i.lr = c.GetDouble("s2i.lr", o.s2i.lr);
  o.s2i.l1_weight = c.GetDouble("s2i.l1", o.s2i.l1_weight);
  o.s2i.minibatch = AsInt(c, "s2i.minibatch", o.s2i.minibatch);
  o.s2i.num_epochs = AsInt(c, "s2i.epochs", o.s2i.num_epochs);

  ReadSchedule(c, "joint.", &o.joint);
  ReadSchedule(c, "e2e.", &o.e2e);
  o.joint.objective = o.dplda_objective;
  o.e2e.objective = o.dplda_objective;
  o.joint.objective.l2_weight = 0.0;
  o.e2e.objective.l2_weight = 0.0;
  return o;
}

std::vector<PreparedUtterance> PrepareAll(const FrontendOptions &opts,
                                          const std::vector<const Utterance *> &utts,
                                          int num_threads) {
  std::vector<PreparedUtterance> out(utts.size());
  ParallelFor(static_cast<int64_t>(utts.size()), num_threads, [&](int64_t u) {
    out[u] = PrepareUtterance(opts, utts[u]->features);
  });
  return out;
}

Matrix StackRaw(const std::vector<PreparedUtterance> &utts) {
  int64_t total = 0;
  for (const auto &u : utts) total += u.raw.rows();
  if (utts.empty()) Fail(ErrorKind::kInput, "no utterances");
  Matrix out(total, utts[0].raw.cols());
  int64_t pos = 0;
  for (const auto &u : utts) {
    out.middleRows(pos, u.raw.rows()) = u.raw;
    pos += u.raw.rows();
  }
  return out;
}

std::vector<SuffStats> UbmStatsAll(const DiagGmm &ubm,
                                   const std::vector<PreparedUtterance> &utts,
                                   int num_threads) {
  std::vector<SuffStats> out(utts.size());
  ParallelFor(static_cast<int64_t>(utts.size()), num_threads, [&](int64_t u) {
    out[u] = SufficientStats(Responsibilities(ubm, utts[u].raw), utts[u].raw);
  });
  return out;
}

std::vector<SuffStats> F2sStatsAll(const F2sNet &f2s,
                                   const std::vector<PreparedUtterance> &utts,
                                   int num_threads) {
  std::vector<SuffStats> out(utts.size());
  ParallelFor(static_cast<int64_t>(utts.size()), num_threads, [&](int64_t u) {
    out[u] = F2sStats(f2s, utts[u].expanded, utts[u].raw);
  });
  return out;
}

Matrix ExtractIvectorsAll(const TvModel &tv, const DiagGmm &ubm,
                          const std::vector<SuffStats> &stats, int num_threads) {
  IvectorExtractor extractor(tv, ubm);
  Matrix out(static_cast<int64_t>(stats.size()), tv.IvectorDim());
  ParallelFor(static_cast<int64_t>(stats.size()), num_threads, [&](int64_t u) {
    out.row(u) = extractor.Extract(stats[u]).transpose();
  });
  return out;
}

Matrix SupervectorsAll(const DiagGmm &ubm, const std::vector<SuffStats> &stats,
                       double relevance) {
  Matrix out(static_cast<int64_t>(stats.size()), ubm.NumComponents() * ubm.Dim());
  for (size_t u = 0; u < stats.size(); u++)
    out.row(u) = MapSupervector(ubm, stats[u], relevance).transpose();
  return out;
}

std::vector<Matrix> ResponsibilitiesAll(const DiagGmm &ubm,
                                        const std::vector<PreparedUtterance> &utts,
                                        int num_threads) {
  std::vector<Matrix> out(utts.size());
  ParallelFor(static_cast<int64_t>(utts.size()), num_threads, [&](int64_t u) {
    out[u] = Responsibilities(ubm, utts[u].raw);
  });
  return out;
}

std::vector<Matrix> ExpandedAll(const std::vector<PreparedUtterance> &utts) {
  std::vector<Matrix> out;
  out.reserve(utts.size());
  for (const auto &u : utts) out.push_back(u.expanded);
  return out;
}

ScoredTrials PldaAllPairs(const TwoCovPlda &plda, const Matrix &vectors,
                          const std::vector<int64_t> &speaker_of) {
  PldaScorer scorer(plda);
  ScoredTrials trials;
  for (int64_t i = 0; i < vectors.rows(); i++)
    for (int64_t j = i + 1; j < vectors.rows(); j++)
      trials.Add(scorer.Llr(vectors.row(i).transpose(), vectors.row(j).transpose()),
                 speaker_of[i] == speaker_of[j]);
  return trials;
}

}  // namespace e2esv
