// tests/e2e_test.cc

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
#include <sstream>

#include <gtest/gtest.h>

#include "e2esv/e2e.h"
#include "e2esv/error.h"
#include "system_fixture.h"
#include "test_support.h"

namespace e2esv {
namespace {

using testing::GradError;
using testing::NumericGradient;
using testing::RandomFeatures;
using testing::RandomUtterances;
using testing::SmallSystem;

std::vector<const PreparedUtterance *> Ptrs(const std::vector<PreparedUtterance> &u) {
  std::vector<const PreparedUtterance *> out;
  for (const auto &x : u) out.push_back(&x);
  return out;
}

TEST(E2eSystem, TrainableLayoutRoundTrips) {
  E2eSystem sys = SmallSystem(1);
  Vector p = sys.TrainableParams();
  EXPECT_EQ(p.size(), sys.NumTrainable());
  EXPECT_EQ(p.head(sys.NumF2sParams()), sys.f2s.net.Flatten());
  EXPECT_EQ(p.segment(sys.NumF2sParams(), sys.NumS2iParams()), sys.s2i.net.Flatten());
  EXPECT_EQ(p.tail(sys.dplda.NumParams()), sys.dplda.Flatten());
  Vector q = p + Vector::Constant(p.size(), 0.01);
  sys.SetTrainableParams(q);
  EXPECT_EQ(sys.TrainableParams(), q);
  ASSERT_EQ(sys.snapshot.groups.size(), 3u);
  EXPECT_EQ(sys.snapshot.groups[0].name, "f2s");
  EXPECT_EQ(sys.snapshot.groups[2].name, "dplda");
}

TEST(E2eScore, ExactlySymmetric) {
  E2eSystem sys = SmallSystem(2);
  for (int k = 0; k < 5; k++) {
    FeatureMatrix a = RandomFeatures(30 + k, 10 + k), b = RandomFeatures(25 + k, 20 + k);
    EXPECT_EQ(E2eScore(sys, a, b), E2eScore(sys, b, a));
  }
}

TEST(E2eScore, SameUtteranceIsQuadraticAtOnePoint) {
  E2eSystem sys = SmallSystem(3);
  FeatureMatrix a = RandomFeatures(33, 4);
  Vector phi = E2eEmbed(sys, PrepareUtterance(sys.frontend, a));
  EXPECT_EQ(E2eScore(sys, a, a), DpldaScore(sys.dplda, phi, phi));
}

TEST(E2eScore, MatchesStageByStageComposition) {
  E2eSystem sys = SmallSystem(4);
  FeatureMatrix fa = RandomFeatures(40, 5), fb = RandomFeatures(28, 6);
  auto embed = [&](const FeatureMatrix &f) {
    FeatureMatrix norm = SlidingMeanVarNorm(f, sys.frontend.stmvn_window_s);
    Matrix expanded = ContextExpand(norm, sys.frontend.half_window, sys.frontend.num_dct);
    SuffStats stats = F2sStats(sys.f2s, expanded, norm.frames);
    Vector sv = MapSupervector(sys.ubm, stats, sys.relevance);
    Matrix in = sys.pca.Project(sv).transpose();
    return Vector(Predict(sys.s2i.net, in).row(0).transpose());
  };
  double expect = DpldaScore(sys.dplda, embed(fa), embed(fb));
  EXPECT_NEAR(E2eScore(sys, fa, fb), expect, 1e-12 * std::max(1.0, std::abs(expect)));
}

TEST(Checkpointing, E2eGradientsMatchFullGraph) {
  E2eSystem sys = SmallSystem(5);
  for (int batch : {4, 8, 16}) {
    auto utts = RandomUtterances(sys, batch, 100 * batch);
    std::vector<int64_t> spk;
    for (int i = 0; i < batch; i++) spk.push_back(i / 2);
    Vector g_ck, g_full;
    ResidencyMeter m_ck, m_full;
    double l_ck = E2eBatchGradients(sys, Ptrs(utts), spk, ObjectiveConfig{},
                                    BackpropMode::kCheckpointed, &g_ck, &m_ck);
    double l_full = E2eBatchGradients(sys, Ptrs(utts), spk, ObjectiveConfig{},
                                      BackpropMode::kFullGraph, &g_full, &m_full);
    EXPECT_EQ(l_ck, l_full);
    EXPECT_LE(testing::RelError(g_ck, g_full), 1e-12);
    EXPECT_EQ(m_ck.peak, 1);
    EXPECT_EQ(m_full.peak, batch);
    EXPECT_GT(m_ck.peak_doubles, 0);
  }
}

TEST(Checkpointing, ZeroLossGivesZeroGradients) {
  E2eSystem sys = SmallSystem(6);
  auto utts = RandomUtterances(sys, 4, 7);
  StatsLoss zero = [](const std::vector<SuffStats> &stats, std::vector<StatsGrad> *grads) {
    grads->clear();
    for (const SuffStats &s : stats)
      grads->push_back({Vector::Zero(s.n.size()), Matrix::Zero(s.f.rows(), s.f.cols())});
    return 0.0;
  };
  double loss;
  for (BackpropMode mode : {BackpropMode::kCheckpointed, BackpropMode::kFullGraph}) {
    Mlp g = F2sBatchGradients(sys.f2s, Ptrs(utts), zero, mode, &loss);
    EXPECT_EQ(loss, 0.0);
    EXPECT_EQ(g.Flatten().cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(Checkpointing, OneUtteranceResidentDuringStatsPhase) {
  E2eSystem sys = SmallSystem(7);
  auto utts = RandomUtterances(sys, 6, 8);
  const Matrix w = testing::RandomMatrix(4, 3, 9);
  StatsLoss loss = [&](const std::vector<SuffStats> &stats, std::vector<StatsGrad> *grads) {
    double total = 0.0;
    grads->clear();
    for (const SuffStats &s : stats) {
      total += (w.array() * s.f.array()).sum() + s.n.sum();
      grads->push_back({Vector::Ones(s.n.size()), w});
    }
    return total;
  };
  ResidencyMeter ck, full;
  double l1, l2;
  Mlp a = F2sBatchGradients(sys.f2s, Ptrs(utts), loss, BackpropMode::kCheckpointed, &l1, &ck);
  Mlp b = F2sBatchGradients(sys.f2s, Ptrs(utts), loss, BackpropMode::kFullGraph, &l2, &full);
  EXPECT_EQ(ck.peak, 1);
  EXPECT_EQ(ck.current, 0);
  EXPECT_EQ(full.peak, 6);
  EXPECT_EQ(a.Flatten(), b.Flatten());
  EXPECT_EQ(l1, l2);
}

TEST(E2eGradients, MatchFiniteDifferences) {
  E2eSystem sys = SmallSystem(8);
  auto utts = RandomUtterances(sys, 6, 9);
  std::vector<int64_t> spk = {0, 0, 1, 1, 2, 2};
  ObjectiveConfig cfg{0.3, 0.0};
  Vector g;
  E2eBatchGradients(sys, Ptrs(utts), spk, cfg, BackpropMode::kCheckpointed, &g);
  auto f = [&](const Vector &p) {
    E2eSystem s = sys;
    s.SetTrainableParams(p);
    Vector unused;
    return E2eBatchGradients(s, Ptrs(utts), spk, cfg, BackpropMode::kFullGraph, &unused);
  };
  EXPECT_LT(GradError(g, NumericGradient(f, sys.TrainableParams()), 1e-7), 1e-4);
}

TEST(E2eGradients, FixedBatchLossDecreasesUnderAdam) {
  E2eSystem sys = SmallSystem(9);
  auto utts = RandomUtterances(sys, 8, 10);
  std::vector<int64_t> spk = {0, 0, 1, 1, 2, 2, 3, 3};
  ObjectiveConfig cfg{0.5, 0.0};
  Vector params = sys.TrainableParams(), g;
  AdamOptions opts;
  opts.lr = 1e-2;
  AdamState adam(params.size(), opts);
  double first = 0.0, last = 0.0;
  for (int step = 0; step <= 50; step++) {
    sys.SetTrainableParams(params);
    last = E2eBatchGradients(sys, Ptrs(utts), spk, cfg, BackpropMode::kCheckpointed, &g);
    if (step == 0) first = last;
    if (step < 50) adam.Step(g, params);
  }
  EXPECT_LT(last, first);
}

TEST(LrSchedule, Rule) {
  EXPECT_EQ(LrScheduleStep({0.5, 0.4}, 1.0), 1.0);
  EXPECT_EQ(LrScheduleStep({0.4, 0.4}, 1.0), 0.5);
  EXPECT_EQ(LrScheduleStep({0.5}, 1.0), 1.0);
  // Replay: halvings after epochs 3 and 4 only.
  std::vector<double> h = {0.5, 0.4, 0.45, 0.45};
  double lr = 1.0;
  int halvings = 0;
  for (size_t n = 2; n <= h.size(); n++) {
    double next = LrScheduleStep({h.begin(), h.begin() + n}, lr);
    if (next < lr) {
      halvings++;
      EXPECT_GE(n, 3u);
    }
    lr = next;
  }
  EXPECT_EQ(halvings, 2);
  EXPECT_EQ(lr, 0.25);
}

TEST(EpochLog, FiveTabSeparatedFields) {
  std::string line = FormatEpochLog(EpochLog{3, 0.25, 0.1, 0.5, 1e-3});
  EXPECT_EQ(std::count(line.begin(), line.end(), '\t'), 4);
  EXPECT_EQ(line.substr(0, 2), "3\t");
}

struct JointData {
  Matrix train, dev;
  std::vector<int64_t> train_spk, dev_spk;
};

JointData MakeJointData(const E2eSystem &sys) {
  JointData d;
  auto tr = RandomUtterances(sys, 16, 40), dv = RandomUtterances(sys, 8, 80);
  d.train.resize(16, sys.pca.OutputDim());
  d.dev.resize(8, sys.pca.OutputDim());
  for (int i = 0; i < 16; i++) {
    d.train.row(i) = E2eS2iInput(sys, tr[i]).transpose();
    d.train_spk.push_back(i / 4);
  }
  for (int i = 0; i < 8; i++) {
    d.dev.row(i) = E2eS2iInput(sys, dv[i]).transpose();
    d.dev_spk.push_back(i / 2);
  }
  return d;
}

TrainSchedule SmallSchedule() {
  TrainSchedule s;
  s.n_pairs = 4;
  s.epoch_batches = 5;
  s.lr = 1e-2;
  s.max_epochs = 3;
  return s;
}

TEST(TrainJoint, BestEpochNeverWorseThanInit) {
  E2eSystem sys = SmallSystem(10);
  JointData d = MakeJointData(sys);
  TrainReport report;
  E2eSystem out = TrainJointS2iDplda(sys, d.train, d.train_spk, d.dev, d.dev_spk,
                                     SmallSchedule(), 1, &report);
  ASSERT_EQ(report.epochs.size(), 4u);
  EXPECT_LE(report.epochs[report.best_epoch].dev_c_primary, report.epochs[0].dev_c_primary);
  // f2s is frozen in this stage.
  EXPECT_EQ(out.f2s.net.Flatten(), sys.f2s.net.Flatten());
}

TEST(TrainJoint, HugeSnapshotWeightPinsParameters) {
  E2eSystem sys = SmallSystem(11);
  JointData d = MakeJointData(sys);
  TrainSchedule s = SmallSchedule();
  s.lr = 1e-3;
  s.snapshot_weight = 1e6;
  TrainReport report;
  E2eSystem out =
      TrainJointS2iDplda(sys, d.train, d.train_spk, d.dev, d.dev_spk, s, 2, &report);
  EXPECT_LT(report.max_snapshot_drift, 1e-3);
  EXPECT_LT((out.TrainableParams() - sys.snapshot.values).cwiseAbs().maxCoeff(), 1e-3);
}

TEST(TrainJoint, EmptyDevIsConfigError) {
  E2eSystem sys = SmallSystem(12);
  JointData d = MakeJointData(sys);
  try {
    TrainJointS2iDplda(sys, d.train, d.train_spk, Matrix(0, d.dev.cols()), {},
                       SmallSchedule(), 1);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::kConfig);
  }
}

TEST(TrainJoint, UnknownGroupIsConfigError) {
  E2eSystem sys = SmallSystem(13);
  JointData d = MakeJointData(sys);
  TrainSchedule s = SmallSchedule();
  s.group_weights["nope"] = 1.0;
  EXPECT_THROW(TrainJointS2iDplda(sys, d.train, d.train_spk, d.dev, d.dev_spk, s, 1), Error);
}

TEST(TrainE2e, ZeroLearningRateLeavesSystemUnchanged) {
  E2eSystem sys = SmallSystem(14);
  auto tr = RandomUtterances(sys, 8, 50), dv = RandomUtterances(sys, 6, 60);
  TrainSchedule s = SmallSchedule();
  s.lr = 0.0;
  s.max_epochs = 1;
  s.epoch_batches = 1;
  TrainReport report;
  E2eSystem out = TrainE2eFull(sys, tr, {0, 0, 1, 1, 2, 2, 3, 3}, dv, {0, 0, 1, 1, 2, 2}, s,
                               3, &report);
  EXPECT_EQ(out.TrainableParams(), sys.TrainableParams());
  EXPECT_EQ(report.max_snapshot_drift, 0.0);
}

}  // namespace
}  // namespace e2esv
