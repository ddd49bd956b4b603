// tests/frontend_test.cc

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

#include <gtest/gtest.h>

#include "e2esv/error.h"
#include "e2esv/frontend.h"
#include "test_support.h"

namespace e2esv {
namespace {

using testing::RandomMatrix;

FeatureMatrix Wrap(const Matrix &m) {
  FeatureMatrix f;
  f.frames = m;
  return f;
}

TEST(Stmvn, ThreeSecondsIs300Frames) { EXPECT_EQ(WindowFrames(3.0, 100.0), 300); }

TEST(Stmvn, ConstantInputMapsToZero) {
  FeatureMatrix out = SlidingMeanVarNorm(Wrap(Matrix::Constant(50, 3, 7.25)), 0.2);
  EXPECT_EQ(out.frames.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Stmvn, MatchesBruteForceWindowStatistics) {
  const Matrix x = RandomMatrix(500, 4, 11, 3.0);
  FeatureMatrix out = SlidingMeanVarNorm(Wrap(x), 3.0);
  const int64_t w = 300;
  for (int64_t t = 0; t < 500; t++) {
    int64_t b = std::max<int64_t>(0, t - w / 2), e = std::min<int64_t>(500, t - w / 2 + w);
    for (int d = 0; d < 4; d++) {
      double mean = 0.0, sq = 0.0;
      for (int64_t i = b; i < e; i++) mean += x(i, d);
      mean /= (e - b);
      for (int64_t i = b; i < e; i++) sq += (x(i, d) - mean) * (x(i, d) - mean);
      double sd = std::sqrt(sq / (e - b));
      EXPECT_NEAR(out.frames(t, d), (x(t, d) - mean) / sd, 1e-10);
    }
  }
}

TEST(Stmvn, RejectsEmpty) { EXPECT_THROW(SlidingMeanVarNorm(Wrap(Matrix(0, 3)), 3.0), Error); }

TEST(ContextExpand, DefaultWidthIs360For60Coefficients) {
  Matrix out = ContextExpand(Wrap(RandomMatrix(4, 60, 1)), 15, 6);
  EXPECT_EQ(out.cols(), 360);
  EXPECT_EQ(out.rows(), 4);
}

TEST(ContextExpand, ConstantTrajectoryIsScaledHammingDct) {
  const double c[2] = {2.5, -1.0};
  Matrix x(40, 2);
  x.col(0).setConstant(c[0]);
  x.col(1).setConstant(c[1]);
  Matrix out = ContextExpand(Wrap(x), 15, 6);
  // Independent 31-point computation of DCT(hamming).
  for (int j = 0; j < 6; j++) {
    double acc = 0.0;
    for (int i = 0; i < 31; i++) {
      double ham = 0.54 - 0.46 * std::cos(2 * std::numbers::pi * i / 30.0);
      double basis = std::sqrt((j == 0 ? 1.0 : 2.0) / 31) *
                     std::cos(std::numbers::pi * j * (i + 0.5) / 31);
      acc += ham * basis;
    }
    for (int64_t t = 0; t < 40; t++)
      for (int d = 0; d < 2; d++) EXPECT_NEAR(out(t, d * 6 + j), c[d] * acc, 1e-12);
  }
}

TEST(ContextExpand, SingleFrameReplicatesEdges) {
  Matrix one = RandomMatrix(1, 3, 5);
  Matrix out = ContextExpand(Wrap(one), 15, 6);
  Matrix kernel = DctBasis(6, 31) * HammingWindow(31).asDiagonal();
  for (int d = 0; d < 3; d++)
    for (int j = 0; j < 6; j++)
      EXPECT_NEAR(out(0, d * 6 + j), kernel.row(j).sum() * one(0, d), 1e-13);
}

TEST(ContextExpand, InteriorFrameMatchesDirectProjection) {
  Matrix x = RandomMatrix(50, 2, 6);
  Matrix out = ContextExpand(Wrap(x), 3, 4);
  Vector ham = HammingWindow(7);
  Matrix dct = DctBasis(4, 7);
  const int t = 20;
  for (int d = 0; d < 2; d++)
    for (int j = 0; j < 4; j++) {
      double acc = 0.0;
      for (int i = 0; i < 7; i++) acc += dct(j, i) * ham[i] * x(t - 3 + i, d);
      EXPECT_NEAR(out(t, d * 4 + j), acc, 1e-13);
    }
}

TEST(Dct, BasisIsOrthonormal) {
  Matrix b = DctBasis(31, 31);
  EXPECT_LT((b * b.transpose() - Matrix::Identity(31, 31)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ContextExpand, RejectsTooManyCoefficients) {
  EXPECT_THROW(ContextExpand(Wrap(RandomMatrix(5, 2, 1)), 1, 4), Error);
}

}  // namespace
}  // namespace e2esv
