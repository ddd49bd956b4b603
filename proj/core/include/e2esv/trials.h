// e2esv/trials.h

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


#ifndef E2ESV_TRIALS_H_
#define E2ESV_TRIALS_H_

#include <istream>
#include <string>
#include <vector>

#include "e2esv/eval.h"

namespace e2esv {

enum class TrialLabel { kTarget, kNontarget, kUnlabeled };

struct TrialRow {
  std::string enroll;
  std::string test;
  TrialLabel label = TrialLabel::kUnlabeled;
};

struct TrialList {
  std::vector<TrialRow> rows;
};

/// Lines "enroll test [target|nontarget]"; blank lines and lines starting
/// with '#' are skipped.  Errors name the source and line number.
TrialList ParseTrialList(std::istream &in, const std::string &source);
TrialList ReadTrialList(const std::string &path);
void WriteTrialList(const std::string &path, const TrialList &list);

struct ScoreRow {
  std::string enroll;
  std::string test;
  double score = 0.0;
};

/// Lines "enroll test score"; scores are written with 17 significant
/// digits so that they read back exactly.
std::vector<ScoreRow> ParseScores(std::istream &in, const std::string &source);
std::vector<ScoreRow> ReadScores(const std::string &path);
void WriteScores(const std::string &path, const std::vector<ScoreRow> &scores);
std::string FormatScores(const std::vector<ScoreRow> &scores);

/// Labeled trials matched to their scores.  Throws kInput if a labeled
/// trial has no score; unlabeled trials are ignored.
ScoredTrials JoinScores(const TrialList &trials,
                        const std::vector<ScoreRow> &scores);

}  // namespace e2esv

#endif  // E2ESV_TRIALS_H_
