// tests/dplda_test.cc

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


#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "e2esv/dplda.h"
#include "e2esv/error.h"
#include "e2esv/eval.h"
#include "e2esv/plda.h"
#include "test_support.h"

namespace e2esv {
namespace {

using testing::GradError;
using testing::NumericGradient;
using testing::RandomMatrix;
using testing::RandomVector;

DpldaParams RandomParams(int d, uint64_t seed) {
  DpldaParams p;
  p.lambda = RandomMatrix(d, d, seed, 0.3);
  p.gamma = RandomMatrix(d, d, seed + 1, 0.3);
  p.c = RandomVector(d, seed + 2, 0.3);
  p.k = 0.4;
  return p;
}

std::vector<int64_t> Labels(std::initializer_list<int64_t> l) { return l; }

TEST(DpldaScore, ZeroQuadraticIsConstant) {
  DpldaParams p = DpldaParams::Zeros(3);
  p.k = -2.5;
  EXPECT_EQ(DpldaScore(p, RandomVector(3, 1), RandomVector(3, 2)), -2.5);
}

TEST(DpldaScore, ExactlySymmetric) {
  DpldaParams p = RandomParams(4, 3);
  for (int k = 0; k < 50; k++) {
    Vector a = RandomVector(4, 10 + k), b = RandomVector(4, 100 + k);
    EXPECT_EQ(DpldaScore(p, a, b), DpldaScore(p, b, a));
  }
}

TEST(DpldaScore, HandExpansion) {
  DpldaParams p = DpldaParams::Zeros(2);
  p.lambda = Matrix::Identity(2, 2);
  p.c << 1, 0;
  p.k = -1;
  Vector a(2), b(2);
  a << 1, 0;
  b << 0, 1;
  EXPECT_EQ(DpldaScore(p, a, b), 0.0);
}

TEST(DpldaScore, MatrixFormMatchesPairwise) {
  DpldaParams p = RandomParams(3, 4);
  Matrix v = RandomMatrix(6, 3, 5);
  Matrix s = DpldaScoreMatrix(p, v);
  for (int i = 0; i < 6; i++)
    for (int j = 0; j < 6; j++)
      EXPECT_NEAR(s(i, j), DpldaScore(p, v.row(i).transpose(), v.row(j).transpose()), 1e-13);
}

TEST(DpldaParams, FlattenRoundTripAndCount) {
  DpldaParams p = RandomParams(3, 6);
  EXPECT_EQ(p.Flatten().size(), p.NumParams());
  EXPECT_EQ(p.NumParams(), 2 * 9 + 3 + 1);
  DpldaParams q = DpldaParams::Zeros(3);
  q.Unflatten(p.Flatten());
  EXPECT_EQ(q.Flatten(), p.Flatten());
  p.Symmetrize();
  EXPECT_EQ(p.lambda, p.lambda.transpose());
  EXPECT_EQ(p.gamma, p.gamma.transpose());
}

TEST(Prior, ArithmeticMidpointIsDefault) {
  EXPECT_DOUBLE_EQ(OperatingPointPrior(PriorMidpoint::kArithmetic), 0.0075);
  EXPECT_DOUBLE_EQ(ObjectiveConfig{}.p_target, 0.0075);
  double lo = OperatingPointPrior(PriorMidpoint::kLogOdds);
  EXPECT_GT(lo, 0.005);
  EXPECT_LT(lo, 0.0075);
}

TEST(WeightedBxe, ZeroParamsEvenPriorIsLog2) {
  ObjectiveConfig cfg{0.5, 0.0};
  DpldaParams g;
  double loss = WeightedBxe(DpldaParams::Zeros(2), RandomMatrix(5, 2, 1),
                            Labels({0, 0, 1, 1, 2}), cfg, &g);
  EXPECT_NEAR(loss, std::log(2.0), 1e-15);
}

TEST(WeightedBxe, BiasGradientClosedForm) {
  DpldaParams p = RandomParams(3, 7);
  Matrix v = RandomMatrix(7, 3, 8);
  auto spk = Labels({0, 0, 0, 1, 1, 2, 3});
  ObjectiveConfig cfg;
  DpldaParams g;
  WeightedBxe(p, v, spk, cfg, &g);
  const double theta = std::log(cfg.p_target / (1 - cfg.p_target));
  int nt = 0, nn = 0;
  for (int i = 0; i < 7; i++)
    for (int j = i + 1; j < 7; j++) (spk[i] == spk[j] ? nt : nn)++;
  double expect = 0.0;
  for (int i = 0; i < 7; i++)
    for (int j = i + 1; j < 7; j++) {
      double s = DpldaScore(p, v.row(i).transpose(), v.row(j).transpose()) + theta;
      double sig = 1.0 / (1.0 + std::exp(-s));
      expect += spk[i] == spk[j] ? cfg.p_target / nt * (sig - 1.0)
                                 : (1 - cfg.p_target) / nn * sig;
    }
  EXPECT_NEAR(g.k, expect, 1e-15);
  auto f = [&](const Vector &x) {
    DpldaParams q = p;
    q.k = x[0];
    return WeightedBxe(q, v, spk, cfg, nullptr);
  };
  Vector num = NumericGradient(f, Vector::Constant(1, p.k), 1e-4);
  EXPECT_LT(std::abs(num[0] - g.k) / std::abs(g.k), 1e-6);
}

TEST(WeightedBxe, FiniteDifferencesAllParametersAndVectors) {
  DpldaParams p = RandomParams(3, 9);
  Matrix v = RandomMatrix(6, 3, 10);
  auto spk = Labels({0, 0, 1, 1, 1, 2});
  ObjectiveConfig cfg{0.2, 0.01};
  DpldaParams g;
  Matrix gv;
  WeightedBxe(p, v, spk, cfg, &g, &gv);
  auto fp = [&](const Vector &x) {
    DpldaParams q = p;
    q.Unflatten(x);
    return WeightedBxe(q, v, spk, cfg, nullptr);
  };
  EXPECT_LT(GradError(g.Flatten(), NumericGradient(fp, p.Flatten())), 1e-4);
  auto fv = [&](const Vector &x) {
    return WeightedBxe(p, Eigen::Map<const Matrix>(x.data(), 6, 3), spk, cfg, nullptr);
  };
  Vector flat_v = Eigen::Map<const Vector>(v.data(), v.size());
  Vector flat_g = Eigen::Map<const Vector>(gv.data(), gv.size());
  EXPECT_LT(GradError(flat_g, NumericGradient(fv, flat_v)), 1e-4);
}

TEST(WeightedBxe, MissingClassIsObjectiveError) {
  ObjectiveConfig cfg;
  DpldaParams g;
  for (auto spk : {Labels({0, 1, 2}), Labels({4, 4, 4})}) {
    try {
      WeightedBxe(DpldaParams::Zeros(2), RandomMatrix(3, 2, 1), spk, cfg, &g);
      FAIL();
    } catch (const Error &e) {
      EXPECT_EQ(e.kind(), ErrorKind::kObjective);
    }
  }
}

TEST(Lbfgs, MinimizesQuadratic) {
  Matrix a = testing::RandomSpd(5, 3, 0.5);
  Vector b = RandomVector(5, 4);
  Objective f = [&](const Vector &x, Vector *g) {
    *g = a * x - b;
    return 0.5 * x.dot(a * x) - b.dot(x);
  };
  LbfgsOptions opts;
  opts.grad_tol = 1e-10;
  LbfgsReport rep;
  Vector x = MinimizeLbfgs(f, Vector::Zero(5), opts, &rep);
  EXPECT_LT((x - a.ldlt().solve(b)).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_TRUE(rep.converged);
  for (size_t i = 1; i < rep.loss_history.size(); i++)
    EXPECT_LE(rep.loss_history[i], rep.loss_history[i - 1]);
}

TEST(TrainDplda, StationaryStartStaysPut) {
  Matrix v = RandomMatrix(12, 2, 11);
  std::vector<int64_t> spk = {0, 0, 0, 1, 1, 1, 2, 2, 2, 3, 3, 3};
  ObjectiveConfig cfg{0.3, 0.1};
  LbfgsOptions opts;
  opts.grad_tol = 1e-12;
  opts.max_iters = 500;
  DpldaParams opt = TrainDpldaFullBatch(DpldaParams::Zeros(2), v, spk, cfg, opts);
  LbfgsReport rep;
  TrainDpldaFullBatch(opt, v, spk, cfg, opts, &rep);
  EXPECT_LT(rep.initial_loss - rep.final_loss, 1e-10);
}

TEST(TrainDplda, SeparableToyReachesZeroEer) {
  // Four speakers at the corners of a square, tight clusters.
  Matrix centers(4, 2);
  centers << 1, 1, -1, 1, -1, -1, 1, -1;
  Matrix noise = RandomMatrix(20, 2, 12, 0.05);
  Matrix v(20, 2);
  std::vector<int64_t> spk;
  for (int i = 0; i < 20; i++) {
    v.row(i) = centers.row(i % 4) + noise.row(i);
    spk.push_back(i % 4);
  }
  ObjectiveConfig cfg{0.5, 0.0};
  DpldaParams p =
      TrainDpldaFullBatch(DpldaParams::Zeros(2), v, spk, cfg, LbfgsOptions{});
  ScoredTrials trials;
  for (int i = 0; i < 20; i++)
    for (int j = i + 1; j < 20; j++)
      trials.Add(DpldaScore(p, v.row(i).transpose(), v.row(j).transpose()), spk[i] == spk[j]);
  EXPECT_EQ(ComputeEer(trials), 0.0);
}

TEST(TrainDplda, OutputIsSymmetric) {
  Matrix v = RandomMatrix(9, 3, 13);
  DpldaParams init = RandomParams(3, 14);
  LbfgsOptions opts;
  opts.max_iters = 5;
  DpldaParams p = TrainDpldaFullBatch(init, v, {0, 0, 0, 1, 1, 1, 2, 2, 2}, ObjectiveConfig{},
                                      opts);
  EXPECT_EQ(p.lambda, p.lambda.transpose());
  EXPECT_EQ(p.gamma, p.gamma.transpose());
}

std::vector<size_t> GroupSizes(const PairPool &pool) {
  std::vector<size_t> out;
  for (const auto &g : pool.groups) out.push_back(g.size());
  std::sort(out.begin(), out.end());
  return out;
}

TEST(PairPool, FootnoteGroupSizes) {
  std::mt19937_64 rng(1);
  EXPECT_EQ(GroupSizes(MakePairPool({{0, {7}}}, &rng)), std::vector<size_t>{1});
  EXPECT_EQ(GroupSizes(MakePairPool({{0, {0, 1, 2, 3, 4}}}, &rng)),
            (std::vector<size_t>{2, 3}));
  PairPool four = MakePairPool({{0, {0, 1, 2, 3}}}, &rng);
  EXPECT_EQ(GroupSizes(four), (std::vector<size_t>{2, 2}));
  std::set<int64_t> seen;
  for (const auto &g : four.groups) seen.insert(g.begin(), g.end());
  EXPECT_EQ(seen, (std::set<int64_t>{0, 1, 2, 3}));
}

TEST(PairPool, FullPassCoversEveryUtteranceOnce) {
  std::vector<int64_t> spk;
  for (int s = 0; s < 9; s++)
    for (int u = 0; u < 1 + s % 6; u++) spk.push_back(s);
  SpeakerUtterances by = GroupBySpeaker(spk);
  std::mt19937_64 rng(2);
  PairPool pool = MakePairPool(by, &rng);
  std::vector<int> count(spk.size(), 0);
  for (const auto &g : pool.groups) {
    EXPECT_FALSE(g.empty());
    for (int64_t u : g) {
      count[u]++;
      EXPECT_EQ(spk[u], spk[g[0]]);
    }
  }
  for (int c : count) EXPECT_EQ(c, 1);
}

TEST(NextMinibatch, WithoutReplacementAcrossCalls) {
  SpeakerUtterances by = {{0, {0, 1}}, {1, {2, 3}}, {2, {4, 5}}};
  std::mt19937_64 rng(3);
  PairPool pool = MakePairPool(by, &rng);
  ASSERT_EQ(pool.groups.size(), 3u);
  const auto third = pool.groups[2];
  std::vector<std::vector<int64_t>> g1, g2;
  std::vector<int64_t> a = NextMinibatch(&pool, by, 2, &rng, &g1);
  std::vector<int64_t> b = NextMinibatch(&pool, by, 2, &rng, &g2);
  std::set<int64_t> sa(a.begin(), a.end());
  EXPECT_EQ(sa.size(), 4u);
  EXPECT_EQ(g2[0], third);
  EXPECT_FALSE(sa.count(third[0]));
}

TEST(NextMinibatch, TrialCountIsAllPairs) {
  std::vector<int64_t> spk;
  for (int s = 0; s < 6; s++)
    for (int u = 0; u < 5; u++) spk.push_back(s);
  SpeakerUtterances by = GroupBySpeaker(spk);
  std::mt19937_64 rng(4);
  PairPool pool = MakePairPool(by, &rng);
  Matrix v = RandomMatrix(30, 2, 5);
  for (int b = 0; b < 5; b++) {
    std::vector<int64_t> utts = NextMinibatch(&pool, by, 4, &rng);
    TrialBatch batch = MakeTrialBatch(v, spk, utts);
    const int64_t u = static_cast<int64_t>(utts.size());
    EXPECT_EQ(batch.NumTrials(), u * (u - 1) / 2);
    EXPECT_EQ(static_cast<int64_t>(batch.Trials().size()), u * (u - 1) / 2);
  }
}

TEST(NextMinibatch, RejectsEmptyCorpus) {
  std::mt19937_64 rng(1);
  PairPool pool;
  EXPECT_THROW(NextMinibatch(&pool, {}, 2, &rng), Error);
}

}  // namespace
}  // namespace e2esv
