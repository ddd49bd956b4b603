// tests/ivector_test.cc

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

#include "e2esv/error.h"
#include "e2esv/ivector.h"
#include "test_support.h"

namespace e2esv {
namespace {

using testing::RandomMatrix;
using testing::RandomVector;

DiagGmm SimpleUbm(int c, int d, uint64_t seed) {
  DiagGmm g;
  g.weights = Vector::Constant(c, 1.0 / c);
  g.means = RandomMatrix(c, d, seed);
  g.vars = (RandomMatrix(c, d, seed + 1).array().abs() + 0.5).matrix();
  return g;
}

SuffStats RandomStats(int c, int d, uint64_t seed) {
  SuffStats s;
  s.n = (RandomVector(c, seed).array().abs() * 10.0).matrix();
  s.f = RandomMatrix(c, d, seed + 1, 3.0);
  s.frames_total = 10;
  return s;
}

// Stats drawn from the total-variability model itself: for every component,
// n_c frames with mean m_c + T_c w and the UBM's diagonal variance.
std::vector<SuffStats> SampleFromModel(const DiagGmm &ubm, const Matrix &t, int num,
                                       uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01(0.0, 1.0);
  const int64_t c = ubm.NumComponents(), d = ubm.Dim();
  std::vector<SuffStats> out(num);
  for (int u = 0; u < num; u++) {
    Vector w(t.cols());
    for (int64_t r = 0; r < w.size(); r++) w[r] = n01(rng);
    Vector sv = t * w;
    SuffStats &s = out[u];
    s.n = Vector::Constant(c, 40.0);
    s.f.resize(c, d);
    for (int64_t k = 0; k < c; k++)
      for (int64_t j = 0; j < d; j++) {
        double mean = ubm.means(k, j) + sv[k * d + j];
        s.f(k, j) = 40.0 * mean + std::sqrt(40.0 * ubm.vars(k, j)) * n01(rng);
      }
    s.frames_total = 40 * c;
  }
  return out;
}

TEST(Extract, ZeroStatsGivePriorMean) {
  DiagGmm ubm = SimpleUbm(3, 2, 1);
  TvModel tv{RandomMatrix(6, 2, 2)};
  SuffStats s{Vector::Zero(3), Matrix::Zero(3, 2), 0};
  EXPECT_EQ(ExtractIvector(tv, ubm, s), Vector::Zero(2));
}

TEST(Extract, ScalarCase) {
  DiagGmm ubm = SimpleUbm(1, 1, 3);
  TvModel tv{Matrix::Constant(1, 1, 0.7)};
  SuffStats s{Vector::Constant(1, 5.0), Matrix::Constant(1, 1, 4.0), 5};
  double v = ubm.vars(0, 0), m = ubm.means(0, 0);
  double expect = 0.7 / v * (4.0 - 5.0 * m) / (1.0 + 5.0 * 0.49 / v);
  EXPECT_NEAR(ExtractIvector(tv, ubm, s)[0], expect, 1e-14);
}

TEST(Extract, MatchesDirectSolve) {
  DiagGmm ubm = SimpleUbm(3, 2, 4);
  TvModel tv{RandomMatrix(6, 2, 5)};
  SuffStats s = RandomStats(3, 2, 6);
  Matrix prec = Matrix::Identity(2, 2);
  Vector lin = Vector::Zero(2);
  for (int c = 0; c < 3; c++) {
    Matrix tc = tv.t.middleRows(c * 2, 2);
    Matrix inv_var = ubm.vars.row(c).cwiseInverse().asDiagonal();
    prec += s.n[c] * tc.transpose() * inv_var * tc;
    lin += tc.transpose() * inv_var * (s.f.row(c) - s.n[c] * ubm.means.row(c)).transpose();
  }
  Vector expect = prec.fullPivLu().solve(lin);
  EXPECT_LT((ExtractIvector(tv, ubm, s) - expect).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Extract, RejectsShapeMismatch) {
  DiagGmm ubm = SimpleUbm(3, 2, 4);
  TvModel tv{RandomMatrix(5, 2, 5)};
  EXPECT_THROW(IvectorExtractor(tv, ubm), Error);
}

TEST(TrainTv, RecoversKnownSubspace) {
  DiagGmm ubm = SimpleUbm(4, 3, 7);
  const Matrix t_true = RandomMatrix(12, 2, 8, 0.8);
  std::vector<SuffStats> stats = SampleFromModel(ubm, t_true, 400, 9);
  TvOptions opts;
  opts.ivector_dim = 2;
  opts.num_iters = 25;
  TvModel tv = TrainTv(stats, ubm, opts, 10);
  // Principal angles between the column spaces.
  Matrix q1 = t_true.householderQr().householderQ() * Matrix::Identity(12, 2);
  Matrix q2 = tv.t.householderQr().householderQ() * Matrix::Identity(12, 2);
  Eigen::JacobiSVD<Matrix> svd(q1.transpose() * q2);
  double min_cos = svd.singularValues().minCoeff();
  EXPECT_GT(min_cos, std::cos(10.0 * std::numbers::pi / 180.0));
}

TEST(TrainTv, EvidenceNonDecreasing) {
  DiagGmm ubm = SimpleUbm(4, 3, 11);
  std::vector<SuffStats> stats = SampleFromModel(ubm, RandomMatrix(12, 3, 12), 100, 13);
  TvOptions opts;
  opts.ivector_dim = 3;
  opts.num_iters = 10;
  std::vector<double> h;
  TrainTv(stats, ubm, opts, 14, &h);
  ASSERT_EQ(h.size(), 11u);
  for (size_t i = 1; i < h.size(); i++) EXPECT_GE(h[i], h[i - 1] - 1e-6) << i;
}

TEST(TrainTv, ZeroStatsUtterancesDoNotChangeTheModel) {
  DiagGmm ubm = SimpleUbm(4, 3, 11);
  std::vector<SuffStats> stats = SampleFromModel(ubm, RandomMatrix(12, 2, 12), 60, 13);
  TvOptions opts;
  opts.ivector_dim = 2;
  opts.num_iters = 3;
  TvModel a = TrainTv(stats, ubm, opts, 14);
  stats.push_back(SuffStats{Vector::Zero(4), Matrix::Zero(4, 3), 0});
  TvModel b = TrainTv(stats, ubm, opts, 14);
  EXPECT_LT((a.t - b.t).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Prep, GlobalMeanMapsToZero) {
  IvecPrep p{RandomVector(4, 1), RandomMatrix(4, 2, 2)};
  EXPECT_EQ(p.Apply(p.global_mean), Vector::Zero(2));
}

TEST(Prep, OutputIsUnitAndMatchesStepwise) {
  IvecPrep p{RandomVector(4, 1), RandomMatrix(4, 2, 2)};
  for (int k = 0; k < 10; k++) {
    Vector w = RandomVector(4, 100 + k);
    Vector out = p.Apply(w);
    EXPECT_NEAR(out.norm(), 1.0, 1e-12);
    Vector c = w - p.global_mean;
    c /= std::sqrt(c.dot(c));
    Vector z(2);
    for (int j = 0; j < 2; j++) {
      z[j] = 0.0;
      for (int i = 0; i < 4; i++) z[j] += p.lda(i, j) * c[i];
    }
    z /= std::sqrt(z.dot(z));
    EXPECT_LT((out - z).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(FitPrep, TwoClassDirectionIsWhitenedMeanDifference) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix x(200, 3);
  std::vector<int64_t> labels(200);
  for (int i = 0; i < 200; i++) {
    labels[i] = i % 2;
    x(i, 0) = (i % 2 ? 3.0 : -3.0) + 0.5 * n(rng);
    x(i, 1) = (i % 2 ? 1.0 : -1.0) + 2.0 * n(rng);
    x(i, 2) = 1.0 * n(rng);
  }
  IvecPrep p = FitPrep(x, labels, 1);
  // The same scatter the fit sees: centered and length-normalized.
  Matrix xc = x.rowwise() - x.colwise().mean();
  LengthNormalizeRows(&xc);
  Vector m0 = Vector::Zero(3), m1 = Vector::Zero(3);
  for (int i = 0; i < 200; i++) (labels[i] ? m1 : m0) += xc.row(i).transpose() / 100.0;
  Matrix b, w;
  ClassScatter(xc, labels, &b, &w);
  Vector dir = w.ldlt().solve(m1 - m0);
  Vector got = p.lda.col(0);
  EXPECT_GT(std::abs(got.dot(dir)) / (got.norm() * dir.norm()), 0.999);
}

TEST(FitPrep, BeatsRandomProjectionsOnFisherRatio) {
  const int dim = 6, classes = 8, per = 15, out = 3;
  Matrix centers = RandomMatrix(classes, dim, 21, 2.0);
  Matrix x(classes * per, dim);
  std::vector<int64_t> labels;
  Matrix noise = RandomMatrix(classes * per, dim, 22);
  noise.col(0) *= 3.0;
  for (int c = 0; c < classes; c++)
    for (int i = 0; i < per; i++) {
      x.row(c * per + i) = centers.row(c) + noise.row(c * per + i);
      labels.push_back(c);
    }
  IvecPrep p = FitPrep(x, labels, out);
  Matrix xc = x.rowwise() - x.colwise().mean();
  LengthNormalizeRows(&xc);
  Matrix b, w;
  ClassScatter(xc, labels, &b, &w);
  auto fisher = [&](const Matrix &proj) {
    Matrix pw = proj.transpose() * w * proj, pb = proj.transpose() * b * proj;
    return pw.ldlt().solve(pb).trace();
  };
  const double lda_score = fisher(p.lda);
  for (int k = 0; k < 100; k++)
    EXPECT_GE(lda_score, fisher(RandomMatrix(dim, out, 1000 + k)) - 1e-9) << k;
}

TEST(FitPrep, RejectsTooFewClasses) {
  EXPECT_THROW(FitPrep(RandomMatrix(10, 4, 1), std::vector<int64_t>(10, 0), 2), Error);
}

}  // namespace
}  // namespace e2esv
