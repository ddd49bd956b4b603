// core/src/f2s.cc

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

#include "e2esv/f2s.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <spdlog/spdlog.h>

#include "e2esv/error.h"

namespace e2esv {

F2sNet CreateF2s(int64_t input_dim, int64_t num_components,
                 const std::vector<int64_t> &hidden, uint64_t seed) {
  std::vector<int64_t> widths = {input_dim};
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(num_components);
  std::vector<Activation> acts(hidden.size(), Activation::kSigmoid);
  acts.push_back(Activation::kSoftmax);
  return F2sNet{Mlp::Create(widths, acts, seed)};
}

double FrameCrossEntropy(const Mlp &net, const Matrix &inputs,
                         const Matrix &targets) {
  if (inputs.rows() != targets.rows() || targets.cols() != net.OutputDim())
    Fail(ErrorKind::kShape, "targets do not match inputs / network output");
  Matrix pred = Predict(net, inputs);
  double total = -(targets.array() * pred.array().max(1e-300).log()).sum();
  return total / static_cast<double>(inputs.rows());
}

F2sNet TrainF2s(const F2sNet &init, const std::vector<Matrix> &expanded,
                const std::vector<Matrix> &targets, const F2sOptions &opts,
                uint64_t seed, F2sReport *report) {
  if (expanded.size() != targets.size())
    Fail(ErrorKind::kInput, "{} feature matrices for {} target matrices",
         expanded.size(), targets.size());
  if (opts.minibatch < 1 || !(opts.lr > 0.0))
    Fail(ErrorKind::kConfig, "f2s needs minibatch >= 1 and lr > 0");
  int64_t total_frames = 0;
  for (size_t u = 0; u < expanded.size(); u++) {
    if (expanded[u].rows() != targets[u].rows())
      Fail(ErrorKind::kInput, "utterance {}: {} frames but {} target rows", u,
           expanded[u].rows(), targets[u].rows());
    if (expanded[u].cols() != init.InputDim() ||
        targets[u].cols() != init.NumComponents())
      Fail(ErrorKind::kShape, "utterance {} does not match the f2s net", u);
    total_frames += expanded[u].rows();
  }
  if (total_frames == 0) Fail(ErrorKind::kInput, "no frames to train f2s on");

  Matrix inputs(total_frames, init.InputDim());
  Matrix labels(total_frames, init.NumComponents());
  int64_t pos = 0;
  for (size_t u = 0; u < expanded.size(); u++) {
    inputs.middleRows(pos, expanded[u].rows()) = expanded[u];
    labels.middleRows(pos, targets[u].rows()) = targets[u];
    pos += expanded[u].rows();
  }

  F2sNet f2s = init;
  Vector params = f2s.net.Flatten();
  std::vector<int64_t> order(total_frames);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  double lr = opts.lr;
  double best = std::numeric_limits<double>::infinity();
  if (report != nullptr) report->epoch_loss.clear();

  for (int epoch = 0; epoch < opts.num_epochs; epoch++) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    int64_t num_batches = 0;
    for (int64_t start = 0; start < total_frames; start += opts.minibatch) {
      int64_t len = std::min<int64_t>(opts.minibatch, total_frames - start);
      Matrix x(len, inputs.cols()), t(len, labels.cols());
      for (int64_t i = 0; i < len; i++) {
        x.row(i) = inputs.row(order[start + i]);
        t.row(i) = labels.row(order[start + i]);
      }
      ForwardCache cache = Forward(f2s.net, x);
      const Matrix &pred = cache.Output();
      loss_sum += -(t.array() * pred.array().max(1e-300).log()).sum() / len;
      num_batches++;
      // Softmax + cross-entropy: gradient w.r.t. logits is pred - target.
      Matrix d_logits = (pred - t) / static_cast<double>(len);
      Mlp grads = ZeroGradient(f2s.net);
      Backward(f2s.net, cache, d_logits, &grads, nullptr, true);
      SgdStep(lr, 0.0, grads.Flatten(), params);
      f2s.net.Unflatten(params);
    }
    double epoch_loss = loss_sum / num_batches;
    if (report != nullptr) report->epoch_loss.push_back(epoch_loss);
    spdlog::debug("f2s epoch {} loss {:.6f} lr {}", epoch, epoch_loss, lr);
    if (epoch_loss > best - opts.plateau_tol * std::abs(best)) lr *= 0.5;
    best = std::min(best, epoch_loss);
  }
  if (report != nullptr)
    report->final_loss = FrameCrossEntropy(f2s.net, inputs, labels);
  return f2s;
}

SuffStats PoolStats(const ForwardCache &cache, const Matrix &raw) {
  return SufficientStats(cache.Output(), raw);
}

SuffStats F2sStats(const F2sNet &f2s, const Matrix &expanded, const Matrix &raw) {
  if (expanded.rows() != raw.rows())
    Fail(ErrorKind::kInput, "expanded features have {} frames, raw have {}",
         expanded.rows(), raw.rows());
  return SufficientStats(Predict(f2s.net, expanded), raw);
}

void F2sStatsBackward(const F2sNet &f2s, const ForwardCache &cache,
                      const Matrix &raw, const StatsGrad &grad, Mlp *grads) {
  const int64_t num_comp = f2s.NumComponents();
  if (grad.n.size() != num_comp || grad.f.rows() != num_comp ||
      grad.f.cols() != raw.cols())
    Fail(ErrorKind::kShape, "statistics gradient has the wrong shape");
  if (cache.outputs.empty() || cache.Output().rows() != raw.rows())
    Fail(ErrorKind::kState, "forward cache does not match the raw frames");
  // n_c = sum_t r_tc and f_c = sum_t r_tc x_t, so
  // dL/dr_tc = dL/dn_c + x_t . dL/df_c.
  Matrix d_resp = raw * grad.f.transpose();
  d_resp.rowwise() += grad.n.transpose();
  Backward(f2s.net, cache, d_resp, grads);
}

}  // namespace e2esv
