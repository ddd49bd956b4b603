// core/src/e2e.cc

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


#include "e2esv/e2e.h"

#include <algorithm>
#include <random>
#include <utility>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "e2esv/error.h"

namespace e2esv {

Vector E2eSystem::TrainableParams() const {
  Vector out(NumTrainable());
  out << f2s.net.Flatten(), s2i.net.Flatten(), dplda.Flatten();
  return out;
}

void E2eSystem::SetTrainableParams(const Eigen::Ref<const Vector> &params) {
  if (params.size() != NumTrainable())
    Fail(ErrorKind::kShape, "expected {} trainable parameters, got {}",
         NumTrainable(), params.size());
  const int64_t nf = NumF2sParams(), ns = NumS2iParams();
  f2s.net.Unflatten(params.segment(0, nf));
  s2i.net.Unflatten(params.segment(nf, ns));
  dplda.Unflatten(params.segment(nf + ns, dplda.NumParams()));
}

void E2eSystem::Validate() const {
  f2s.net.Validate();
  s2i.net.Validate();
  ubm.Validate();
  const int64_t num_comp = ubm.NumComponents(), dim = ubm.Dim();
  if (f2s.NumComponents() != num_comp)
    Fail(ErrorKind::kShape, "f2s has {} outputs, UBM has {} components",
         f2s.NumComponents(), num_comp);
  if (f2s.InputDim() != dim * frontend.num_dct)
    Fail(ErrorKind::kShape, "f2s input {} != feature dim {} x {} DCT bases",
         f2s.InputDim(), dim, frontend.num_dct);
  if (pca.InputDim() != num_comp * dim)
    Fail(ErrorKind::kShape, "PCA input {} != supervector size {}",
         pca.InputDim(), num_comp * dim);
  if (pca.OutputDim() != s2i.InputDim())
    Fail(ErrorKind::kShape, "PCA output {} != s2i input {}", pca.OutputDim(),
         s2i.InputDim());
  if (s2i.OutputDim() != dplda.Dim())
    Fail(ErrorKind::kShape, "s2i output {} != scorer dim {}", s2i.OutputDim(),
         dplda.Dim());
  if (!(relevance > 0.0)) Fail(ErrorKind::kConfig, "relevance must be > 0");
  snapshot.Validate();
  if (snapshot.values.size() != NumTrainable())
    Fail(ErrorKind::kShape, "snapshot holds {} values, system has {}",
         snapshot.values.size(), NumTrainable());
}

E2eSystem AssembleE2e(const FrontendOptions &frontend, double relevance,
                      const F2sNet &f2s, const DiagGmm &ubm, const PcaModel &pca,
                      const S2iNet &s2i, const DpldaParams &dplda,
                      double snapshot_weight) {
  E2eSystem sys;
  sys.frontend = frontend;
  sys.relevance = relevance;
  sys.f2s = f2s;
  sys.ubm = ubm;
  sys.pca = pca;
  sys.s2i = s2i;
  sys.dplda = dplda;
  const int64_t nf = sys.NumF2sParams(), ns = sys.NumS2iParams();
  sys.snapshot.values = sys.TrainableParams();
  sys.snapshot.groups = {{"f2s", 0, nf, snapshot_weight},
                         {"s2i", nf, ns, snapshot_weight},
                         {"dplda", nf + ns, dplda.NumParams(), snapshot_weight}};
  sys.Validate();
  return sys;
}

PreparedUtterance PrepareUtterance(const FrontendOptions &opts,
                                   const FeatureMatrix &features) {
  FeatureMatrix norm = SlidingMeanVarNorm(features, opts.stmvn_window_s);
  PreparedUtterance utt;
  utt.expanded = ContextExpand(norm, opts.half_window, opts.num_dct);
  utt.raw = std::move(norm.frames);
  return utt;
}

Vector E2eS2iInput(const E2eSystem &sys, const PreparedUtterance &utt) {
  SuffStats stats = F2sStats(sys.f2s, utt.expanded, utt.raw);
  return sys.pca.Project(MapSupervector(sys.ubm, stats, sys.relevance));
}

Vector E2eEmbed(const E2eSystem &sys, const PreparedUtterance &utt) {
  Matrix in = E2eS2iInput(sys, utt).transpose();
  return Predict(sys.s2i.net, in).row(0).transpose();
}

double E2eScore(const E2eSystem &sys, const FeatureMatrix &a,
                const FeatureMatrix &b) {
  Vector ea = E2eEmbed(sys, PrepareUtterance(sys.frontend, a));
  Vector eb = E2eEmbed(sys, PrepareUtterance(sys.frontend, b));
  return DpldaScore(sys.dplda, ea, eb);
}

void ResidencyMeter::Enter(int64_t doubles) {
  current++;
  peak = std::max(peak, current);
  peak_doubles = std::max(peak_doubles, doubles);
}

void ResidencyMeter::Leave() {
  if (current <= 0) Fail(ErrorKind::kState, "residency meter underflow");
  current--;
}

Mlp F2sBatchGradients(const F2sNet &f2s,
                      const std::vector<const PreparedUtterance *> &utts,
                      const StatsLoss &loss, BackpropMode mode,
                      double *loss_value, ResidencyMeter *meter) {
  ResidencyMeter local;
  if (meter == nullptr) meter = &local;
  const bool keep = mode == BackpropMode::kFullGraph;
  std::vector<SuffStats> stats(utts.size());
  std::vector<ForwardCache> kept;
  for (size_t u = 0; u < utts.size(); u++) {
    ForwardCache cache = Forward(f2s.net, utts[u]->expanded);
    meter->Enter(cache.Footprint());
    stats[u] = PoolStats(cache, utts[u]->raw);
    if (keep) {
      kept.push_back(std::move(cache));
    } else {
      meter->Leave();
    }
  }

  std::vector<StatsGrad> stats_grads;
  double value = loss(stats, &stats_grads);
  if (loss_value != nullptr) *loss_value = value;
  if (stats_grads.size() != utts.size())
    Fail(ErrorKind::kShape, "loss returned {} statistics gradients for {} "
         "utterances", stats_grads.size(), utts.size());

  Mlp grads = ZeroGradient(f2s.net);
  for (size_t u = 0; u < utts.size(); u++) {
    if (keep) {
      F2sStatsBackward(f2s, kept[u], utts[u]->raw, stats_grads[u], &grads);
    } else {
      // Recompute this utterance's activations, use them, drop them.
      ForwardCache cache = Forward(f2s.net, utts[u]->expanded);
      meter->Enter(cache.Footprint());
      F2sStatsBackward(f2s, cache, utts[u]->raw, stats_grads[u], &grads);
      meter->Leave();
    }
  }
  for (size_t u = 0; u < kept.size(); u++) meter->Leave();
  return grads;
}

double E2eBatchGradients(const E2eSystem &sys,
                         const std::vector<const PreparedUtterance *> &utts,
                         const std::vector<int64_t> &speaker_of,
                         const ObjectiveConfig &cfg, BackpropMode mode,
                         Vector *grad, ResidencyMeter *meter) {
  if (utts.size() != speaker_of.size())
    Fail(ErrorKind::kInput, "{} utterances but {} speaker labels", utts.size(),
         speaker_of.size());
  Mlp s2i_grads = ZeroGradient(sys.s2i.net);
  DpldaParams dplda_grad = DpldaParams::Zeros(sys.dplda.Dim());

  StatsLoss loss = [&](const std::vector<SuffStats> &stats,
                       std::vector<StatsGrad> *stats_grads) {
    const int64_t num = static_cast<int64_t>(stats.size());
    Matrix sv(num, sys.pca.InputDim());
    for (int64_t u = 0; u < num; u++)
      sv.row(u) = MapSupervector(sys.ubm, stats[u], sys.relevance).transpose();
    ForwardCache cache = Forward(sys.s2i.net, sys.pca.ProjectRows(sv));
    Matrix d_emb;
    double value = WeightedBxe(sys.dplda, cache.Output(), speaker_of, cfg,
                               &dplda_grad, &d_emb);
    Matrix d_in;
    Backward(sys.s2i.net, cache, d_emb, &s2i_grads, &d_in);
    // The projection is linear: d(sv) = d(in) * basis'.
    Matrix d_sv = d_in * sys.pca.basis.transpose();
    stats_grads->resize(num);
    for (int64_t u = 0; u < num; u++)
      (*stats_grads)[u] = MapSupervectorBackward(
          sys.ubm, stats[u], sys.relevance, d_sv.row(u).transpose());
    return value;
  };

  double value = 0.0;
  Mlp f2s_grads = F2sBatchGradients(sys.f2s, utts, loss, mode, &value, meter);
  grad->resize(sys.NumTrainable());
  *grad << f2s_grads.Flatten(), s2i_grads.Flatten(), dplda_grad.Flatten();
  return value;
}

double LrScheduleStep(const std::vector<double> &history, double lr) {
  if (history.size() < 2) return lr;
  double best_before = *std::min_element(history.begin(), history.end() - 1);
  return history.back() >= best_before ? 0.5 * lr : lr;
}

std::string FormatEpochLog(const EpochLog &e) {
  return fmt::format("{}\t{:.6f}\t{:.6f}\t{:.6f}\t{:.6g}", e.epoch,
                     e.train_loss, e.dev_eer, e.dev_c_primary, e.lr);
}

ScoredTrials AllPairTrials(const DpldaParams &p, const Matrix &embeddings,
                           const std::vector<int64_t> &speaker_of) {
  if (static_cast<int64_t>(speaker_of.size()) != embeddings.rows())
    Fail(ErrorKind::kInput, "{} embeddings but {} speaker labels",
         embeddings.rows(), speaker_of.size());
  ScoredTrials trials;
  for (int64_t i = 0; i < embeddings.rows(); i++)
    for (int64_t j = i + 1; j < embeddings.rows(); j++)
      trials.Add(DpldaScore(p, embeddings.row(i).transpose(),
                            embeddings.row(j).transpose()),
                 speaker_of[i] == speaker_of[j]);
  return trials;
}

namespace {

// Loss and gradient for the trainable segment, given minibatch utterances.
using SegmentLoss = std::function<double(const E2eSystem &sys,
                                         const std::vector<int64_t> &utts,
                                         const std::vector<int64_t> &speakers,
                                         Vector *grad)>;
using DevEmbedder = std::function<Matrix(const E2eSystem &sys)>;

E2eSystem RunSchedule(const E2eSystem &init, int64_t offset, int64_t size,
                      const std::vector<int64_t> &train_speakers,
                      const std::vector<int64_t> &dev_speakers,
                      const SegmentLoss &segment_loss,
                      const DevEmbedder &dev_embed,
                      const TrainSchedule &schedule, uint64_t seed,
                      TrainReport *report) {
  if (dev_speakers.empty()) Fail(ErrorKind::kConfig, "the dev set is empty");
  if (train_speakers.empty()) Fail(ErrorKind::kInput, "the training set is empty");
  if (schedule.epoch_batches < 1 || schedule.n_pairs < 1 ||
      schedule.max_epochs < 0 || !(schedule.lr >= 0.0))
    Fail(ErrorKind::kConfig, "invalid training schedule");

  E2eSystem sys = init;
  sys.Validate();
  ParamSnapshot snapshot = sys.snapshot;
  snapshot.SetWeight(schedule.snapshot_weight);
  for (const auto &[name, weight] : schedule.group_weights) {
    auto it = std::find_if(snapshot.groups.begin(), snapshot.groups.end(),
                           [&](const ParamGroup &g) { return g.name == name; });
    if (it == snapshot.groups.end())
      Fail(ErrorKind::kConfig, "unknown parameter group '{}'", name);
    it->weight = weight;
  }

  auto evaluate = [&](const E2eSystem &s, EpochLog *log) {
    ScoredTrials trials = AllPairTrials(s.dplda, dev_embed(s), dev_speakers);
    log->dev_eer = ComputeEer(trials);
    log->dev_c_primary = CPrimary(trials);
  };

  TrainReport local;
  if (report == nullptr) report = &local;
  report->epochs.clear();
  double lr = schedule.lr;
  std::mt19937_64 rng(seed);
  SpeakerUtterances by_speaker = GroupBySpeaker(train_speakers);
  Vector grad, penalty_grad;

  // Epoch 0: the starting system's loss over one epoch of minibatches,
  // drawn from a separate stream so training itself is unaffected.
  EpochLog first;
  first.lr = lr;
  {
    std::mt19937_64 probe_rng(seed ^ 0x9e3779b97f4a7c15ULL);
    PairPool probe = MakePairPool(by_speaker, &probe_rng);
    double sum = 0.0;
    for (int b = 0; b < schedule.epoch_batches; b++) {
      std::vector<int64_t> utts =
          NextMinibatch(&probe, by_speaker, schedule.n_pairs, &probe_rng);
      std::vector<int64_t> speakers(utts.size());
      for (size_t i = 0; i < utts.size(); i++) speakers[i] = train_speakers[utts[i]];
      sum += segment_loss(sys, utts, speakers, &grad);
    }
    first.train_loss = sum / schedule.epoch_batches;
  }
  evaluate(sys, &first);
  report->epochs.push_back(first);
  report->best_epoch = 0;
  report->max_snapshot_drift = 0.0;
  spdlog::debug("{}", FormatEpochLog(first));

  std::vector<double> history = {first.dev_c_primary};
  Vector params = sys.TrainableParams();
  Vector best_params = params;
  double best = first.dev_c_primary;
  AdamOptions adam_opts;
  adam_opts.lr = lr;
  AdamState adam(size, adam_opts);
  PairPool pool = MakePairPool(by_speaker, &rng);

  for (int epoch = 1; epoch <= schedule.max_epochs; epoch++) {
    double loss_sum = 0.0;
    for (int b = 0; b < schedule.epoch_batches; b++) {
      std::vector<int64_t> utts =
          NextMinibatch(&pool, by_speaker, schedule.n_pairs, &rng);
      std::vector<int64_t> speakers(utts.size());
      for (size_t i = 0; i < utts.size(); i++) speakers[i] = train_speakers[utts[i]];
      double loss = segment_loss(sys, utts, speakers, &grad);
      double penalty = PenaltyToSnapshot(snapshot, params, &penalty_grad);
      grad += penalty_grad.segment(offset, size);
      adam.Step(grad, params.segment(offset, size));
      sys.SetTrainableParams(params);
      loss_sum += loss + penalty;
      report->max_snapshot_drift =
          std::max(report->max_snapshot_drift,
                   (params - snapshot.values).cwiseAbs().maxCoeff());
    }
    EpochLog log;
    log.epoch = epoch;
    log.train_loss = loss_sum / schedule.epoch_batches;
    log.lr = lr;
    evaluate(sys, &log);
    report->epochs.push_back(log);
    spdlog::debug("{}", FormatEpochLog(log));
    history.push_back(log.dev_c_primary);
    if (log.dev_c_primary < best) {
      best = log.dev_c_primary;
      best_params = params;
      report->best_epoch = epoch;
    }
    if (schedule.halve_on_stagnation) {
      lr = LrScheduleStep(history, lr);
      adam.set_lr(lr);
    }
  }
  sys.SetTrainableParams(best_params);
  return sys;
}

}  // namespace

E2eSystem TrainJointS2iDplda(const E2eSystem &init, const Matrix &train_inputs,
                             const std::vector<int64_t> &train_speakers,
                             const Matrix &dev_inputs,
                             const std::vector<int64_t> &dev_speakers,
                             const TrainSchedule &schedule, uint64_t seed,
                             TrainReport *report) {
  if (train_inputs.rows() != static_cast<int64_t>(train_speakers.size()) ||
      dev_inputs.rows() != static_cast<int64_t>(dev_speakers.size()))
    Fail(ErrorKind::kInput, "input rows and speaker labels differ in number");
  if (train_inputs.cols() != init.s2i.InputDim() ||
      (dev_inputs.rows() > 0 && dev_inputs.cols() != init.s2i.InputDim()))
    Fail(ErrorKind::kShape, "precomputed inputs do not match the s2i network");

  SegmentLoss loss = [&](const E2eSystem &sys, const std::vector<int64_t> &utts,
                         const std::vector<int64_t> &speakers, Vector *grad) {
    Matrix in(static_cast<int64_t>(utts.size()), train_inputs.cols());
    for (size_t i = 0; i < utts.size(); i++) in.row(i) = train_inputs.row(utts[i]);
    ForwardCache cache = Forward(sys.s2i.net, in);
    DpldaParams dplda_grad;
    Matrix d_emb;
    double value = WeightedBxe(sys.dplda, cache.Output(), speakers,
                               schedule.objective, &dplda_grad, &d_emb);
    Mlp s2i_grads = ZeroGradient(sys.s2i.net);
    Backward(sys.s2i.net, cache, d_emb, &s2i_grads);
    grad->resize(sys.NumS2iParams() + sys.dplda.NumParams());
    *grad << s2i_grads.Flatten(), dplda_grad.Flatten();
    return value;
  };
  DevEmbedder embed = [&](const E2eSystem &sys) {
    return Predict(sys.s2i.net, dev_inputs);
  };
  return RunSchedule(init, init.NumF2sParams(),
                     init.NumS2iParams() + init.dplda.NumParams(),
                     train_speakers, dev_speakers, loss, embed, schedule, seed,
                     report);
}

E2eSystem TrainE2eFull(const E2eSystem &init,
                       const std::vector<PreparedUtterance> &train,
                       const std::vector<int64_t> &train_speakers,
                       const std::vector<PreparedUtterance> &dev,
                       const std::vector<int64_t> &dev_speakers,
                       const TrainSchedule &schedule, uint64_t seed,
                       TrainReport *report) {
  if (train.size() != train_speakers.size() || dev.size() != dev_speakers.size())
    Fail(ErrorKind::kInput, "utterances and speaker labels differ in number");
  SegmentLoss loss = [&](const E2eSystem &sys, const std::vector<int64_t> &utts,
                         const std::vector<int64_t> &speakers, Vector *grad) {
    std::vector<const PreparedUtterance *> batch;
    for (int64_t u : utts) batch.push_back(&train[u]);
    return E2eBatchGradients(sys, batch, speakers, schedule.objective,
                             BackpropMode::kCheckpointed, grad);
  };
  DevEmbedder embed = [&](const E2eSystem &sys) {
    Matrix out(static_cast<int64_t>(dev.size()), sys.dplda.Dim());
    for (size_t u = 0; u < dev.size(); u++)
      out.row(u) = E2eEmbed(sys, dev[u]).transpose();
    return out;
  };
  return RunSchedule(init, 0, init.NumTrainable(), train_speakers, dev_speakers,
                     loss, embed, schedule, seed, report);
}

}  // namespace e2esv
