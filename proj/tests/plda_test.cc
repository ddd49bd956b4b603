// tests/plda_test.cc

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


#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "e2esv/dplda.h"
#include "e2esv/error.h"
#include "e2esv/plda.h"
#include "test_support.h"

namespace e2esv {
namespace {

using testing::RandomMatrix;
using testing::RandomSpd;
using testing::RandomVector;

TwoCovPlda RandomPlda(int d, uint64_t seed) {
  return TwoCovPlda{RandomVector(d, seed), RandomSpd(d, seed + 1, 0.05),
                    RandomSpd(d, seed + 2, 0.2)};
}

// log N(z; m, S) through a general-purpose LU, independent of the scorer.
double LogGauss(const Vector &z, const Vector &m, const Matrix &s) {
  Eigen::FullPivLU<Matrix> lu(s);
  Vector dz = z - m;
  return -0.5 * z.size() * std::log(2 * std::numbers::pi) -
         0.5 * std::log(lu.determinant()) - 0.5 * dz.dot(lu.solve(dz));
}

double DirectLlr(const TwoCovPlda &p, const Vector &e, const Vector &t) {
  const int64_t d = p.Dim();
  Matrix tot = p.between + p.within;
  Matrix same(2 * d, 2 * d), diff = Matrix::Zero(2 * d, 2 * d);
  same << tot, p.between, p.between, tot;
  diff.topLeftCorner(d, d) = tot;
  diff.bottomRightCorner(d, d) = tot;
  Vector z(2 * d), m(2 * d);
  z << e, t;
  m << p.mu, p.mu;
  return LogGauss(z, m, same) - LogGauss(z, m, diff);
}

// Speakers drawn from the model: y ~ N(mu, B), x ~ N(y, W).
void SampleSpeakers(const TwoCovPlda &p, int speakers, int per, uint64_t seed,
                    Matrix *x, std::vector<int64_t> *labels) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01(0.0, 1.0);
  const int64_t d = p.Dim();
  Matrix lb = p.between.llt().matrixL(), lw = p.within.llt().matrixL();
  x->resize(speakers * per, d);
  labels->clear();
  for (int s = 0; s < speakers; s++) {
    Vector g(d);
    for (auto &v : g) v = n01(rng);
    Vector y = p.mu + lb * g;
    for (int u = 0; u < per; u++) {
      for (auto &v : g) v = n01(rng);
      x->row(s * per + u) = (y + lw * g).transpose();
      labels->push_back(s);
    }
  }
}

TEST(PldaLlr, ZeroBetweenGivesZero) {
  TwoCovPlda p = RandomPlda(3, 1);
  p.between.setZero();
  PldaScorer scorer(p);
  for (int k = 0; k < 20; k++)
    EXPECT_EQ(scorer.Llr(RandomVector(3, 10 + k), RandomVector(3, 50 + k)), 0.0);
}

TEST(PldaLlr, AtMeanIsNormalizerRatio) {
  TwoCovPlda p = RandomPlda(4, 2);
  EXPECT_NEAR(PldaLlr(p, p.mu, p.mu), DirectLlr(p, p.mu, p.mu), 1e-10);
}

TEST(PldaLlr, MatchesDirectDensities) {
  TwoCovPlda p = RandomPlda(4, 3);
  PldaScorer scorer(p);
  for (int k = 0; k < 50; k++) {
    Vector e = RandomVector(4, 100 + k, 2.0), t = RandomVector(4, 200 + k, 2.0);
    EXPECT_NEAR(scorer.Llr(e, t), DirectLlr(p, e, t), 1e-9);
  }
}

TEST(PldaLlr, ExactlySymmetric) {
  PldaScorer scorer(RandomPlda(5, 4));
  for (int k = 0; k < 50; k++) {
    Vector e = RandomVector(5, 300 + k), t = RandomVector(5, 400 + k);
    EXPECT_EQ(scorer.Llr(e, t), scorer.Llr(t, e));
  }
}

TEST(ToDplda, ZeroInputsGiveConstant) {
  TwoCovPlda p = RandomPlda(3, 5);
  p.mu.setZero();
  DpldaParams d = ToDplda(p);
  Vector z = Vector::Zero(3);
  EXPECT_EQ(DpldaScore(d, z, z), d.k);
  EXPECT_NEAR(d.k, PldaLlr(p, z, z), 1e-12);
}

TEST(ToDplda, ZeroBetweenIsAllZero) {
  TwoCovPlda p = RandomPlda(3, 6);
  p.between.setZero();
  DpldaParams d = ToDplda(p);
  EXPECT_LT(d.lambda.cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LT(d.gamma.cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LT(d.c.cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LT(std::abs(d.k), 1e-14);
}

TEST(ToDplda, MatchesPldaLlrOnRandomModels) {
  double worst = 0.0;
  for (int m = 0; m < 20; m++) {
    TwoCovPlda p = RandomPlda(2 + m % 6, 1000 + 7 * m);
    DpldaParams d = ToDplda(p);
    PldaScorer scorer(p);
    for (int k = 0; k < 500; k++) {
      Vector e = RandomVector(p.Dim(), 5000 + 1000 * m + k, 1.5);
      Vector t = RandomVector(p.Dim(), 90000 + 1000 * m + k, 1.5);
      worst = std::max(worst, std::abs(DpldaScore(d, e, t) - scorer.Llr(e, t)));
    }
  }
  EXPECT_LT(worst, 1e-8);
}

TEST(PldaLogLikelihood, MatchesJointGaussianOfOneSpeaker) {
  TwoCovPlda p = RandomPlda(2, 7);
  Matrix x = RandomMatrix(3, 2, 8);
  // Stacked utterances of one speaker: cov = I (x) W + 11' (x) B.
  Matrix cov(6, 6);
  for (int i = 0; i < 3; i++)
    for (int j = 0; j < 3; j++)
      cov.block(2 * i, 2 * j, 2, 2) = p.between + (i == j ? p.within : Matrix::Zero(2, 2));
  Vector z(6), m(6);
  for (int i = 0; i < 3; i++) {
    z.segment(2 * i, 2) = x.row(i).transpose();
    m.segment(2 * i, 2) = p.mu;
  }
  EXPECT_NEAR(PldaLogLikelihood(p, x, {4, 4, 4}), LogGauss(z, m, cov), 1e-10);
}

TEST(TrainPlda, RecoversKnownCovariances) {
  TwoCovPlda truth = RandomPlda(3, 9);
  Matrix x;
  std::vector<int64_t> labels;
  SampleSpeakers(truth, 200, 10, 10, &x, &labels);
  PldaOptions opts;
  opts.num_iters = 30;
  TwoCovPlda p = TrainPlda(x, labels, opts);
  EXPECT_LT((p.between - truth.between).norm() / truth.between.norm(), 0.15);
  EXPECT_LT((p.within - truth.within).norm() / truth.within.norm(), 0.15);
}

TEST(TrainPlda, PureNoiseSpeakersCollapseBetween) {
  TwoCovPlda truth = RandomPlda(3, 11);
  truth.between.setZero();
  Matrix x;
  std::vector<int64_t> labels;
  // Sampling needs an LLT of B; draw with a tiny B instead of exact zero.
  truth.between = 1e-12 * Matrix::Identity(3, 3);
  SampleSpeakers(truth, 100, 10, 12, &x, &labels);
  PldaOptions opts;
  opts.num_iters = 50;
  TwoCovPlda p = TrainPlda(x, labels, opts);
  EXPECT_LT(p.between.trace(), 1e-2 * p.within.trace());
}

TEST(TrainPlda, LikelihoodNonDecreasing) {
  TwoCovPlda truth = RandomPlda(4, 13);
  Matrix x;
  std::vector<int64_t> labels;
  SampleSpeakers(truth, 30, 4, 14, &x, &labels);
  PldaOptions opts;
  opts.num_iters = 15;
  std::vector<double> h;
  TrainPlda(x, labels, opts, &h);
  ASSERT_EQ(h.size(), 16u);
  for (size_t i = 1; i < h.size(); i++) EXPECT_GE(h[i], h[i - 1] - 1e-6) << i;
}

TEST(TrainPlda, RejectsSingleUtteranceSpeakers) {
  try {
    TrainPlda(RandomMatrix(5, 2, 1), {0, 1, 2, 3, 4}, PldaOptions{});
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInput);
  }
}

TEST(TwoCovPlda, ValidateRejectsIndefiniteWithin) {
  TwoCovPlda p = RandomPlda(2, 1);
  p.within = -Matrix::Identity(2, 2);
  EXPECT_THROW(p.Validate(), Error);
}

}  // namespace
}  // namespace e2esv
