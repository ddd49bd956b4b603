// core/src/trials.cc

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


#include "e2esv/trials.h"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <utility>

#include <fmt/format.h>

#include "e2esv/error.h"
#include "e2esv/io.h"

namespace e2esv {

namespace {

std::vector<std::string> SplitWhitespace(const std::string &line) {
  std::istringstream is(line);
  std::vector<std::string> out;
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

bool SkipLine(const std::vector<std::string> &toks) {
  return toks.empty() || toks[0][0] == '#';
}

}  // namespace

TrialList ParseTrialList(std::istream &in, const std::string &source) {
  TrialList list;
  std::string line;
  for (int64_t lineno = 1; std::getline(in, line); lineno++) {
    std::vector<std::string> toks = SplitWhitespace(line);
    if (SkipLine(toks)) continue;
    if (toks.size() < 2 || toks.size() > 3)
      Fail(ErrorKind::kFormat, "{}:{}: expected 'enroll test [label]', got {} fields",
           source, lineno, toks.size());
    TrialRow row{toks[0], toks[1], TrialLabel::kUnlabeled};
    if (toks.size() == 3) {
      if (toks[2] == "target") {
        row.label = TrialLabel::kTarget;
      } else if (toks[2] == "nontarget") {
        row.label = TrialLabel::kNontarget;
      } else {
        Fail(ErrorKind::kFormat, "{}:{}: unknown trial label '{}'", source,
             lineno, toks[2]);
      }
    }
    list.rows.push_back(std::move(row));
  }
  return list;
}

TrialList ReadTrialList(const std::string &path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorKind::kInput, "cannot open trial list '{}'", path);
  return ParseTrialList(in, path);
}

void WriteTrialList(const std::string &path, const TrialList &list) {
  std::string out;
  for (const TrialRow &r : list.rows) {
    out += r.enroll + " " + r.test;
    if (r.label == TrialLabel::kTarget) out += " target";
    if (r.label == TrialLabel::kNontarget) out += " nontarget";
    out += "\n";
  }
  WriteFileBytes(path, out);
}

std::vector<ScoreRow> ParseScores(std::istream &in, const std::string &source) {
  std::vector<ScoreRow> rows;
  std::string line;
  for (int64_t lineno = 1; std::getline(in, line); lineno++) {
    std::vector<std::string> toks = SplitWhitespace(line);
    if (SkipLine(toks)) continue;
    if (toks.size() != 3)
      Fail(ErrorKind::kFormat, "{}:{}: expected 'enroll test score', got {} fields",
           source, lineno, toks.size());
    char *end = nullptr;
    errno = 0;
    double score = std::strtod(toks[2].c_str(), &end);
    if (end == toks[2].c_str() || *end != '\0' || errno == ERANGE)
      Fail(ErrorKind::kFormat, "{}:{}: bad score '{}'", source, lineno, toks[2]);
    rows.push_back({toks[0], toks[1], score});
  }
  return rows;
}

std::vector<ScoreRow> ReadScores(const std::string &path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorKind::kInput, "cannot open score file '{}'", path);
  return ParseScores(in, path);
}

std::string FormatScores(const std::vector<ScoreRow> &scores) {
  std::string out;
  for (const ScoreRow &r : scores)
    out += fmt::format("{} {} {:.17g}\n", r.enroll, r.test, r.score);
  return out;
}

void WriteScores(const std::string &path, const std::vector<ScoreRow> &scores) {
  WriteFileBytes(path, FormatScores(scores));
}

ScoredTrials JoinScores(const TrialList &trials,
                        const std::vector<ScoreRow> &scores) {
  std::map<std::pair<std::string, std::string>, double> by_pair;
  for (const ScoreRow &s : scores) by_pair[{s.enroll, s.test}] = s.score;
  ScoredTrials out;
  for (const TrialRow &t : trials.rows) {
    if (t.label == TrialLabel::kUnlabeled) continue;
    auto it = by_pair.find({t.enroll, t.test});
    if (it == by_pair.end())
      Fail(ErrorKind::kInput, "no score for trial '{} {}'", t.enroll, t.test);
    out.Add(it->second, t.label == TrialLabel::kTarget);
  }
  return out;
}

}  // namespace e2esv
