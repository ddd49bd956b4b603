// tests/eval_test.cc

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
#include <limits>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "e2esv/error.h"
#include "e2esv/eval.h"

namespace e2esv {
namespace {

ScoredTrials Make(std::vector<double> tgt, std::vector<double> non) {
  ScoredTrials t;
  for (double s : tgt) t.Add(s, true);
  for (double s : non) t.Add(s, false);
  return t;
}

ScoredTrials RandomTrials(int n, uint64_t seed, double separation) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::bernoulli_distribution tgt(0.3);
  ScoredTrials t;
  for (int i = 0; i < n; i++) {
    bool is = tgt(rng);
    t.Add(g(rng) + (is ? separation : 0.0), is);
  }
  return t;
}

// Every threshold "accept s > v" for v in the scores, plus accept-all.
std::vector<std::pair<double, double>> Sweep(const ScoredTrials &t) {
  std::set<double> cuts(t.scores.begin(), t.scores.end());
  std::vector<double> thresholds = {-std::numeric_limits<double>::infinity()};
  thresholds.insert(thresholds.end(), cuts.begin(), cuts.end());
  const double nt = t.NumTargets(), nn = t.Size() - nt;
  std::vector<std::pair<double, double>> out;
  for (double th : thresholds) {
    double miss = 0, fa = 0;
    for (int64_t i = 0; i < t.Size(); i++) {
      bool accept = th == thresholds[0] ? true : t.scores[i] > th;
      if (t.is_target[i] && !accept) miss++;
      if (!t.is_target[i] && accept) fa++;
    }
    out.push_back({miss / nt, fa / nn});
  }
  return out;
}

double SweepEer(const ScoredTrials &t) {
  auto pts = Sweep(t);
  for (size_t k = 1; k < pts.size(); k++) {
    double d1 = pts[k].first - pts[k].second;
    if (d1 < 0) continue;
    double d0 = pts[k - 1].first - pts[k - 1].second;
    return pts[k - 1].first + (-d0 / (d1 - d0)) * (pts[k].first - pts[k - 1].first);
  }
  return std::nan("");
}

double SweepDcf(const ScoredTrials &t, double p) {
  double best = std::numeric_limits<double>::infinity();
  for (auto [m, f] : Sweep(t)) best = std::min(best, p * m + (1 - p) * f);
  return best / std::min(p, 1 - p);
}

TEST(Eer, PerfectSeparationIsZero) { EXPECT_EQ(ComputeEer(Make({3, 4}, {1, 2})), 0.0); }

TEST(Eer, FourTrialExample) { EXPECT_EQ(ComputeEer(Make({0.9, 0.4}, {0.6, 0.1})), 0.5); }

TEST(Eer, InvertedLabelsIsOne) { EXPECT_EQ(ComputeEer(Make({1, 2}, {3, 4})), 1.0); }

TEST(Eer, MatchesSweepOnRandomTrials) {
  for (uint64_t seed = 1; seed <= 5; seed++) {
    ScoredTrials t = RandomTrials(1000, seed, 1.5);
    EXPECT_NEAR(ComputeEer(t), SweepEer(t), 1e-12);
  }
}

TEST(Eer, AllTiedScores) {
  ScoredTrials t = Make({1, 1}, {1, 1, 1});
  EXPECT_NEAR(ComputeEer(t), 0.5, 1e-15);
}

TEST(MinDcf, PerfectSeparationIsZero) {
  EXPECT_EQ(MinDcf(Make({3, 4}, {1, 2}), 0.01), 0.0);
  EXPECT_EQ(CPrimary(Make({3, 4}, {1, 2})), 0.0);
}

TEST(MinDcf, MatchesSweepOnRandomTrials) {
  for (uint64_t seed = 1; seed <= 5; seed++) {
    ScoredTrials t = RandomTrials(1000, seed, 1.0);
    for (double p : {0.01, 0.005, 0.3}) {
      double v = MinDcf(t, p);
      EXPECT_NEAR(v, SweepDcf(t, p), 1e-12);
      EXPECT_LE(v, 1.0);
    }
  }
}

TEST(Metrics, MonotoneTransformInvariance) {
  ScoredTrials t = RandomTrials(1000, 9, 1.0);
  ScoredTrials u = t, v = t;
  for (double &s : u.scores) s = 3.0 * s - 7.0;
  for (double &s : v.scores) s = std::exp(s);
  for (const ScoredTrials *x : {&u, &v}) {
    EXPECT_EQ(ComputeEer(*x), ComputeEer(t));
    EXPECT_EQ(MinDcf(*x, 0.01), MinDcf(t, 0.01));
    EXPECT_EQ(CPrimary(*x), CPrimary(t));
  }
}

TEST(CPrimary, IsMeanOfTwoOperatingPoints) {
  for (uint64_t seed = 1; seed <= 3; seed++) {
    ScoredTrials t = RandomTrials(500, seed, 2.0);
    EXPECT_EQ(CPrimary(t), 0.5 * (MinDcf(t, 0.01) + MinDcf(t, 0.005)));
  }
}

TEST(Metrics, ReportAgreesWithIndividualCalls) {
  ScoredTrials t = RandomTrials(300, 4, 1.0);
  MetricsReport r = ComputeMetrics(t);
  EXPECT_EQ(r.num_targets + r.num_nontargets, 300);
  EXPECT_EQ(r.eer, ComputeEer(t));
  EXPECT_EQ(r.c_primary, CPrimary(t));
  std::string kv = FormatMetricsKv(r);
  EXPECT_NE(kv.find("c_primary="), std::string::npos);
  EXPECT_NE(FormatMetricsText(r).find("EER"), std::string::npos);
}

TEST(Metrics, SingleClassIsMetricError) {
  for (const ScoredTrials &t : {Make({1, 2}, {}), Make({}, {1, 2})}) {
    try {
      ComputeEer(t);
      FAIL();
    } catch (const Error &e) {
      EXPECT_EQ(e.kind(), ErrorKind::kMetric);
    }
  }
}

TEST(Metrics, NonFiniteScoreIsMetricError) {
  EXPECT_THROW(ComputeEer(Make({1, std::nan("")}, {0})), Error);
}

}  // namespace
}  // namespace e2esv
