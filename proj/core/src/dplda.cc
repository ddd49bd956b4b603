// core/src/dplda.cc

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

#include "e2esv/dplda.h"

#include <algorithm>
#include <cmath>
#include <deque>

#include <spdlog/spdlog.h>

#include "e2esv/error.h"

namespace e2esv {

namespace {

double Softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double Sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

double Logit(double p) { return std::log(p) - std::log1p(-p); }

void CheckParamsDim(const DpldaParams &p, int64_t dim) {
  const int64_t d = p.Dim();
  if (p.lambda.rows() != d || p.lambda.cols() != d || p.gamma.rows() != d ||
      p.gamma.cols() != d)
    Fail(ErrorKind::kShape, "DPLDA parameter shapes disagree");
  if (dim != d)
    Fail(ErrorKind::kShape, "vector dim {} != DPLDA dim {}", dim, d);
}

}  // namespace

double DpldaScore(const DpldaParams &p, const Vector &a, const Vector &b) {
  CheckParamsDim(p, a.size());
  if (b.size() != a.size()) Fail(ErrorKind::kShape, "trial vector dims differ");
  const double cross_ab = a.dot(p.lambda * b);
  const double cross_ba = b.dot(p.lambda * a);
  const double self_a = a.dot(p.gamma * a);
  const double self_b = b.dot(p.gamma * b);
  const Vector sum = a + b;
  // Each pair is added before mixing with the others so that swapping a and
  // b reproduces the same floating-point sum.
  return (cross_ab + cross_ba) + (self_a + self_b) + sum.dot(p.c) + p.k;
}

Matrix DpldaScoreMatrix(const DpldaParams &p, const Matrix &vectors) {
  CheckParamsDim(p, vectors.cols());
  const Matrix cross = vectors * p.lambda * vectors.transpose();
  const Vector self = (vectors * p.gamma).cwiseProduct(vectors).rowwise().sum();
  const Vector lin = vectors * p.c;
  const Vector per_row = self + lin;
  Matrix s = cross + cross.transpose();
  s.colwise() += per_row;
  s.rowwise() += per_row.transpose();
  s.array() += p.k;
  return s;
}

double OperatingPointPrior(PriorMidpoint rule) {
  constexpr double kHigh = 0.01, kLow = 0.005;
  if (rule == PriorMidpoint::kArithmetic) return 0.5 * (kHigh + kLow);
  double mid = 0.5 * (Logit(kHigh) + Logit(kLow));
  return Sigmoid(mid);
}

std::vector<Trial> TrialBatch::Trials() const {
  std::vector<Trial> trials;
  trials.reserve(NumTrials());
  for (int64_t i = 0; i < NumUtterances(); i++)
    for (int64_t j = i + 1; j < NumUtterances(); j++)
      trials.push_back({i, j, speaker_of[i] == speaker_of[j]});
  return trials;
}

double WeightedBxe(const DpldaParams &p, const Matrix &vectors,
                   const std::vector<int64_t> &speaker_of,
                   const ObjectiveConfig &cfg, DpldaParams *grad,
                   Matrix *grad_vectors) {
  const int64_t num = vectors.rows();
  CheckParamsDim(p, vectors.cols());
  if (static_cast<int64_t>(speaker_of.size()) != num)
    Fail(ErrorKind::kShape, "{} speaker ids for {} vectors", speaker_of.size(),
         num);
  if (!(cfg.p_target > 0.0 && cfg.p_target < 1.0) || cfg.l2_weight < 0.0)
    Fail(ErrorKind::kConfig, "need 0 < p_target < 1 and l2_weight >= 0");

  int64_t num_tgt = 0, num_non = 0;
  for (int64_t i = 0; i < num; i++)
    for (int64_t j = i + 1; j < num; j++)
      (speaker_of[i] == speaker_of[j] ? num_tgt : num_non)++;
  if (num_tgt == 0 || num_non == 0)
    Fail(ErrorKind::kObjective,
         "batch has {} target and {} non-target trials; both are needed",
         num_tgt, num_non);

  const double theta = Logit(cfg.p_target);
  const double alpha = cfg.p_target / num_tgt;
  const double beta = (1.0 - cfg.p_target) / num_non;
  const Matrix scores = DpldaScoreMatrix(p, vectors);

  // g(i, j) = g(j, i) = dLoss/ds_ij for i < j; zero diagonal.
  Matrix g = Matrix::Zero(num, num);
  double loss = 0.0;
  for (int64_t i = 0; i < num; i++) {
    for (int64_t j = i + 1; j < num; j++) {
      double x = scores(i, j) + theta;
      double d;
      if (speaker_of[i] == speaker_of[j]) {
        loss += alpha * Softplus(-x);
        d = alpha * (Sigmoid(x) - 1.0);
      } else {
        loss += beta * Softplus(x);
        d = beta * Sigmoid(x);
      }
      g(i, j) = d;
      g(j, i) = d;
    }
  }
  loss += cfg.l2_weight *
          (p.lambda.squaredNorm() + p.gamma.squaredNorm() + p.c.squaredNorm());

  const Vector r = g.rowwise().sum();
  if (grad != nullptr) {
    grad->lambda = vectors.transpose() * g * vectors +
                   2.0 * cfg.l2_weight * p.lambda;
    grad->gamma = vectors.transpose() * r.asDiagonal() * vectors +
                  2.0 * cfg.l2_weight * p.gamma;
    grad->c = vectors.transpose() * r + 2.0 * cfg.l2_weight * p.c;
    grad->k = 0.5 * r.sum();
  }
  if (grad_vectors != nullptr) {
    *grad_vectors = g * vectors * (p.lambda + p.lambda.transpose()) +
                    r.asDiagonal() * vectors * (p.gamma + p.gamma.transpose());
    grad_vectors->noalias() += r * p.c.transpose();
  }
  return loss;
}

Vector MinimizeLbfgs(const Objective &objective, const Vector &x0,
                     const LbfgsOptions &opts, LbfgsReport *report) {
  LbfgsReport local;
  LbfgsReport &rep = report != nullptr ? *report : local;
  rep = LbfgsReport();

  Vector x = x0, g;
  double f = objective(x, &g);
  if (!std::isfinite(f))
    Fail(ErrorKind::kNumerical, "objective is not finite at the start point");
  rep.initial_loss = f;
  rep.loss_history.push_back(f);

  std::deque<Vector> s_hist, y_hist;
  std::deque<double> rho_hist;
  int iter = 0;
  for (; iter < opts.max_iters; iter++) {
    if (g.norm() < opts.grad_tol) {
      rep.converged = true;
      rep.status = "gradient norm below tolerance";
      break;
    }
    // Two-loop recursion.
    Vector q = g;
    const size_t m = s_hist.size();
    std::vector<double> a(m);
    for (size_t i = m; i-- > 0;) {
      a[i] = rho_hist[i] * s_hist[i].dot(q);
      q -= a[i] * y_hist[i];
    }
    if (m > 0) q *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    for (size_t i = 0; i < m; i++) {
      double b = rho_hist[i] * y_hist[i].dot(q);
      q += (a[i] - b) * s_hist[i];
    }
    Vector dir = -q;
    double slope = dir.dot(g);
    if (!(slope < 0.0)) {
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      dir = -g;
      slope = -g.squaredNorm();
    }

    double step = s_hist.empty() ? std::min(1.0, 1.0 / g.norm()) : 1.0;
    Vector x_new, g_new;
    double f_new = 0.0;
    bool accepted = false;
    while (step >= opts.min_step) {
      x_new = x + step * dir;
      f_new = objective(x_new, &g_new);
      if (std::isfinite(f_new) && f_new <= f + opts.armijo_c1 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      rep.converged = true;
      rep.status = "line search step underflow";
      spdlog::warn("L-BFGS: line search step fell below {}; stopping",
                   opts.min_step);
      break;
    }
    Vector s = x_new - x, y = g_new - g;
    double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      s_hist.push_back(s);
      y_hist.push_back(y);
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > opts.history) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    x = std::move(x_new);
    g = std::move(g_new);
    f = f_new;
    rep.loss_history.push_back(f);
  }
  if (iter == opts.max_iters && rep.status.empty())
    rep.status = "iteration limit reached";
  rep.iterations = iter;
  rep.final_loss = f;
  return x;
}

DpldaParams TrainDpldaFullBatch(const DpldaParams &init, const Matrix &vectors,
                                const std::vector<int64_t> &labels,
                                const ObjectiveConfig &cfg,
                                const LbfgsOptions &opts, LbfgsReport *report) {
  DpldaParams work = init;
  work.Symmetrize();
  DpldaParams grad = DpldaParams::Zeros(init.Dim());
  Objective objective = [&](const Vector &x, Vector *g) {
    work.Unflatten(x);
    double loss = WeightedBxe(work, vectors, labels, cfg, &grad);
    *g = grad.Flatten();
    return loss;
  };
  Vector x = MinimizeLbfgs(objective, work.Flatten(), opts, report);
  DpldaParams out = init;
  out.Unflatten(x);
  out.Symmetrize();
  return out;
}

SpeakerUtterances GroupBySpeaker(const std::vector<int64_t> &speaker_of) {
  SpeakerUtterances out;
  for (size_t i = 0; i < speaker_of.size(); i++)
    out[speaker_of[i]].push_back(static_cast<int64_t>(i));
  return out;
}

PairPool MakePairPool(const SpeakerUtterances &speakers, std::mt19937_64 *rng) {
  PairPool pool;
  for (const auto &[speaker, utts] : speakers) {
    if (utts.empty()) continue;
    std::vector<int64_t> order = utts;
    std::shuffle(order.begin(), order.end(), *rng);
    if (order.size() == 1) {
      pool.groups.push_back(order);
      continue;
    }
    for (size_t i = 0; i + 1 < order.size(); i += 2)
      pool.groups.push_back({order[i], order[i + 1]});
    if (order.size() % 2 == 1) pool.groups.back().push_back(order.back());
  }
  std::shuffle(pool.groups.begin(), pool.groups.end(), *rng);
  return pool;
}

std::vector<int64_t> NextMinibatch(PairPool *pool,
                                   const SpeakerUtterances &speakers,
                                   int n_pairs, std::mt19937_64 *rng,
                                   std::vector<std::vector<int64_t>> *groups_out) {
  if (n_pairs < 1) Fail(ErrorKind::kConfig, "n_pairs must be >= 1");
  bool any = false;
  for (const auto &[speaker, utts] : speakers) any |= !utts.empty();
  if (!any) Fail(ErrorKind::kInput, "cannot sample minibatches from an empty corpus");
  std::vector<int64_t> utterances;
  if (groups_out != nullptr) groups_out->clear();
  for (int i = 0; i < n_pairs; i++) {
    if (pool->Remaining() == 0) *pool = MakePairPool(speakers, rng);
    const auto &group = pool->groups[pool->next++];
    utterances.insert(utterances.end(), group.begin(), group.end());
    if (groups_out != nullptr) groups_out->push_back(group);
  }
  return utterances;
}

TrialBatch MakeTrialBatch(const Matrix &vectors,
                          const std::vector<int64_t> &speaker_of,
                          const std::vector<int64_t> &utterances) {
  TrialBatch batch;
  batch.vectors.resize(static_cast<int64_t>(utterances.size()), vectors.cols());
  batch.speaker_of.reserve(utterances.size());
  for (size_t i = 0; i < utterances.size(); i++) {
    int64_t u = utterances[i];
    if (u < 0 || u >= vectors.rows())
      Fail(ErrorKind::kInput, "utterance index {} out of range", u);
    batch.vectors.row(i) = vectors.row(u);
    batch.speaker_of.push_back(speaker_of[u]);
  }
  return batch;
}

}  // namespace e2esv
