// core/src/eval.cc

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


#include "e2esv/eval.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "e2esv/error.h"

namespace e2esv {

int64_t ScoredTrials::NumTargets() const {
  return std::count(is_target.begin(), is_target.end(), true);
}

std::vector<RocPoint> RocPoints(const ScoredTrials &t) {
  if (t.scores.size() != t.is_target.size())
    Fail(ErrorKind::kMetric, "{} scores but {} labels", t.scores.size(),
         t.is_target.size());
  const int64_t n = t.Size();
  const int64_t num_tgt = t.NumTargets(), num_non = n - num_tgt;
  if (num_tgt == 0 || num_non == 0)
    Fail(ErrorKind::kMetric, "need target and non-target trials (got {} and {})",
         num_tgt, num_non);
  for (double s : t.scores)
    if (!std::isfinite(s)) Fail(ErrorKind::kMetric, "non-finite score");

  std::vector<int64_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int64_t a, int64_t b) { return t.scores[a] < t.scores[b]; });

  // Counts are kept as integers so the points do not depend on trial order.
  std::vector<RocPoint> points;
  int64_t misses = 0, false_alarms = num_non;
  points.push_back({0.0, 1.0});
  for (int64_t i = 0; i < n;) {
    int64_t j = i;
    while (j < n && t.scores[order[j]] == t.scores[order[i]]) {
      if (t.is_target[order[j]]) misses++;
      else false_alarms--;
      j++;
    }
    points.push_back({static_cast<double>(misses) / num_tgt,
                      static_cast<double>(false_alarms) / num_non});
    i = j;
  }
  return points;
}

double ComputeEer(const ScoredTrials &t) {
  std::vector<RocPoint> points = RocPoints(t);
  for (size_t k = 1; k < points.size(); k++) {
    double d1 = points[k].p_miss - points[k].p_fa;
    if (d1 < 0.0) continue;
    double d0 = points[k - 1].p_miss - points[k - 1].p_fa;
    double w = -d0 / (d1 - d0);
    return points[k - 1].p_miss + w * (points[k].p_miss - points[k - 1].p_miss);
  }
  // The last point is (1, 0), so the loop always returns.
  Fail(ErrorKind::kMetric, "ROC has no crossing");
}

double MinDcf(const ScoredTrials &t, double p_target, double c_miss,
              double c_fa) {
  if (!(p_target > 0.0 && p_target < 1.0))
    Fail(ErrorKind::kMetric, "p_target must be in (0, 1), got {}", p_target);
  if (!(c_miss > 0.0 && c_fa > 0.0))
    Fail(ErrorKind::kMetric, "detection costs must be positive");
  const double w_miss = p_target * c_miss, w_fa = (1.0 - p_target) * c_fa;
  double best = std::numeric_limits<double>::infinity();
  for (const RocPoint &p : RocPoints(t))
    best = std::min(best, w_miss * p.p_miss + w_fa * p.p_fa);
  return best / std::min(w_miss, w_fa);
}

double CPrimary(const ScoredTrials &t) {
  return 0.5 * (MinDcf(t, 0.01) + MinDcf(t, 0.005));
}

MetricsReport ComputeMetrics(const ScoredTrials &t) {
  MetricsReport r;
  r.num_targets = t.NumTargets();
  r.num_nontargets = t.Size() - r.num_targets;
  r.eer = ComputeEer(t);
  r.min_dcf_0p01 = MinDcf(t, 0.01);
  r.min_dcf_0p005 = MinDcf(t, 0.005);
  r.c_primary = 0.5 * (r.min_dcf_0p01 + r.min_dcf_0p005);
  return r;
}

std::string FormatMetricsText(const MetricsReport &r) {
  return fmt::format(
      "targets          {}\n"
      "nontargets       {}\n"
      "EER              {:.4f} %\n"
      "minDCF(p=0.01)   {:.6f}\n"
      "minDCF(p=0.005)  {:.6f}\n"
      "C_primary        {:.6f}\n",
      r.num_targets, r.num_nontargets, 100.0 * r.eer, r.min_dcf_0p01,
      r.min_dcf_0p005, r.c_primary);
}

std::string FormatMetricsKv(const MetricsReport &r) {
  return fmt::format(
      "num_targets={}\nnum_nontargets={}\neer={:.17g}\nmin_dcf_0.01={:.17g}\n"
      "min_dcf_0.005={:.17g}\nc_primary={:.17g}\n",
      r.num_targets, r.num_nontargets, r.eer, r.min_dcf_0p01, r.min_dcf_0p005,
      r.c_primary);
}

}  // namespace e2esv
