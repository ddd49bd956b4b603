// e2esv/eval.h

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


#ifndef E2ESV_EVAL_H_
#define E2ESV_EVAL_H_

#include <cstdint>
#include <string>
#include <vector>

namespace e2esv {

struct ScoredTrials {
  std::vector<double> scores;
  std::vector<bool> is_target;

  int64_t Size() const { return static_cast<int64_t>(scores.size()); }
  int64_t NumTargets() const;
  void Add(double score, bool target) {
    scores.push_back(score);
    is_target.push_back(target);
  }
};

/// One operating point: P_miss and P_fa when accepting scores at or above
/// a threshold placed between two adjacent distinct scores.
struct RocPoint {
  double p_miss = 0.0;
  double p_fa = 0.0;
};

/**
   All distinct operating points, from "accept everything" (0, 1) to
   "reject everything" (1, 0).  Tied scores move together.  Throws kMetric
   unless both classes are present and every score is finite.
*/
std::vector<RocPoint> RocPoints(const ScoredTrials &t);

/// Crossing of P_miss and P_fa, linearly interpolated between ROC points.
double ComputeEer(const ScoredTrials &t);

/// min over thresholds of p*cmiss*P_miss + (1-p)*cfa*P_fa, normalized by
/// min(p*cmiss, (1-p)*cfa).
double MinDcf(const ScoredTrials &t, double p_target, double c_miss = 1.0,
              double c_fa = 1.0);

/// Mean of MinDcf at target priors 0.01 and 0.005.
double CPrimary(const ScoredTrials &t);

struct MetricsReport {
  int64_t num_targets = 0;
  int64_t num_nontargets = 0;
  double eer = 0.0;
  double min_dcf_0p01 = 0.0;
  double min_dcf_0p005 = 0.0;
  double c_primary = 0.0;
};

MetricsReport ComputeMetrics(const ScoredTrials &t);

/// "name value" lines for people.
std::string FormatMetricsText(const MetricsReport &r);
/// "name=value" lines for scripts.
std::string FormatMetricsKv(const MetricsReport &r);

}  // namespace e2esv

#endif  // E2ESV_EVAL_H_
