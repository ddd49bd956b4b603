// core/src/corpus.cc

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


#include "e2esv/corpus.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "e2esv/error.h"
#include "e2esv/io.h"

namespace e2esv {

const char *SplitName(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kDev: return "dev";
    case Split::kEval: return "eval";
  }
  return "?";
}

Split SplitFromName(const std::string &name) {
  if (name == "train") return Split::kTrain;
  if (name == "dev") return Split::kDev;
  if (name == "eval") return Split::kEval;
  Fail(ErrorKind::kFormat, "unknown split '{}'", name);
}

void Corpus::Validate() const {
  std::set<std::string> ids;
  std::set<std::string> dev_speakers, eval_speakers;
  int64_t dim = -1;
  for (const Utterance &u : utterances) {
    if (!ids.insert(u.id).second)
      Fail(ErrorKind::kInput, "duplicate utterance id '{}'", u.id);
    if (u.features.NumFrames() < 1)
      Fail(ErrorKind::kInput, "utterance '{}' has no frames", u.id);
    if (dim >= 0 && u.features.Dim() != dim)
      Fail(ErrorKind::kInput, "utterance '{}' has dim {}, expected {}", u.id,
           u.features.Dim(), dim);
    dim = u.features.Dim();
    if (u.split == Split::kDev) dev_speakers.insert(u.speaker);
    if (u.split == Split::kEval) eval_speakers.insert(u.speaker);
  }
  for (const std::string &s : dev_speakers)
    if (eval_speakers.count(s))
      Fail(ErrorKind::kInput, "speaker '{}' appears in both dev and eval", s);
}

std::vector<const Utterance *> Corpus::Select(Split s) const {
  std::vector<const Utterance *> out;
  for (const Utterance &u : utterances)
    if (u.split == s) out.push_back(&u);
  return out;
}

std::vector<int64_t> SpeakerIndices(const std::vector<const Utterance *> &utts) {
  std::map<std::string, int64_t> index;
  std::vector<int64_t> out;
  for (const Utterance *u : utts) {
    auto it = index.emplace(u->speaker, static_cast<int64_t>(index.size())).first;
    out.push_back(it->second);
  }
  return out;
}

Corpus FilterMinUtterances(const Corpus &corpus, Split split, int min_utts) {
  std::map<std::string, int> count;
  for (const Utterance &u : corpus.utterances)
    if (u.split == split) count[u.speaker]++;
  Corpus out;
  for (const Utterance &u : corpus.utterances)
    if (u.split != split || count[u.speaker] >= min_utts)
      out.utterances.push_back(u);
  return out;
}

TrialList AllPairsTrialList(const std::vector<const Utterance *> &utts) {
  TrialList list;
  for (size_t i = 0; i < utts.size(); i++)
    for (size_t j = i + 1; j < utts.size(); j++)
      list.rows.push_back({utts[i]->id, utts[j]->id,
                           utts[i]->speaker == utts[j]->speaker
                               ? TrialLabel::kTarget
                               : TrialLabel::kNontarget});
  return list;
}

void WriteCorpus(const std::string &dir, const Corpus &corpus) {
  corpus.Validate();
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(fs::path(dir) / "feats", ec);
  if (ec) Fail(ErrorKind::kInput, "cannot create '{}': {}", dir, ec.message());
  std::string list;
  for (const Utterance &u : corpus.utterances) {
    std::string rel = "feats/" + u.id + ".svf";
    WriteFeatures((fs::path(dir) / rel).string(), u.features);
    list += fmt::format("{} {} {} {}\n", u.id, u.speaker, SplitName(u.split), rel);
  }
  WriteFileBytes((fs::path(dir) / "corpus.list").string(), list);
}

Corpus ReadCorpus(const std::string &dir) {
  namespace fs = std::filesystem;
  const std::string list_path = (fs::path(dir) / "corpus.list").string();
  std::ifstream in(list_path);
  if (!in) Fail(ErrorKind::kInput, "cannot open '{}'", list_path);
  Corpus corpus;
  std::string line;
  for (int lineno = 1; std::getline(in, line); lineno++) {
    std::istringstream is(line);
    std::string id, speaker, split, rel, extra;
    if (!(is >> id)) continue;
    if (!(is >> speaker >> split >> rel) || (is >> extra))
      Fail(ErrorKind::kFormat, "{}:{}: expected 'id speaker split path'",
           list_path, lineno);
    Utterance u;
    u.id = id;
    u.speaker = speaker;
    u.split = SplitFromName(split);
    u.features = ReadFeatures((fs::path(dir) / rel).string());
    corpus.utterances.push_back(std::move(u));
  }
  corpus.Validate();
  return corpus;
}

void SynthConfig::Validate() const {
  if (n_speakers < 1 || utts_per_speaker < 1 || dim < 1 || num_phones < 1 ||
      speaker_dim < 0 || channel_dim < 0 || speaker_clusters < 1)
    Fail(ErrorKind::kConfig, "synthetic corpus counts must be positive");
  if (min_frames < 1 || min_frames > max_frames)
    Fail(ErrorKind::kConfig, "need 1 <= min_frames <= max_frames");
  if (n_train_speakers < 0 || n_dev_speakers < 0 ||
      n_train_speakers + n_dev_speakers > n_speakers)
    Fail(ErrorKind::kConfig, "train + dev speakers exceed n_speakers");
  if (!(noise_scale >= 0.0) || !(nonlinearity >= 0.0) || !(speaker_warp >= 0.0) ||
      !(cluster_separation >= 0.0))
    Fail(ErrorKind::kConfig, "synthetic corpus scales must be >= 0");
}

namespace {

Matrix RandomMatrix(int64_t rows, int64_t cols, double scale,
                    std::mt19937_64 *rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix m(rows, cols);
  for (int64_t i = 0; i < rows; i++)
    for (int64_t j = 0; j < cols; j++) m(i, j) = scale * gauss(*rng);
  return m;
}

}  // namespace

Corpus SynthCorpus(const SynthConfig &cfg) {
  cfg.Validate();
  std::mt19937_64 rng(cfg.seed);
  const int latent = cfg.dim;
  const Matrix spk_map =
      RandomMatrix(latent, cfg.speaker_dim, 1.0 / std::sqrt(std::max(cfg.speaker_dim, 1)), &rng);
  const Matrix chan_map =
      RandomMatrix(latent, cfg.channel_dim, 1.0 / std::sqrt(std::max(cfg.channel_dim, 1)), &rng);
  std::vector<Matrix> warps;
  for (int k = 0; k < cfg.speaker_dim; k++)
    warps.push_back(RandomMatrix(latent, latent, 1.0 / std::sqrt(latent), &rng));
  const Matrix phones = RandomMatrix(cfg.num_phones, latent, 1.0, &rng);
  const Matrix mix = RandomMatrix(cfg.dim, latent, 1.0 / std::sqrt(latent), &rng);
  const Matrix squash = RandomMatrix(cfg.dim, latent, 1.0 / std::sqrt(latent), &rng);
  const Matrix centers =
      cfg.speaker_clusters > 1
          ? RandomMatrix(cfg.speaker_clusters, cfg.speaker_dim,
                         cfg.cluster_separation / std::sqrt(2.0), &rng)
          : Matrix::Zero(1, cfg.speaker_dim);

  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_int_distribution<int> duration(cfg.min_frames, cfg.max_frames);
  std::uniform_int_distribution<int> phone_len(5, 20);
  std::uniform_int_distribution<int> phone_pick(0, cfg.num_phones - 1);

  Corpus corpus;
  for (int s = 0; s < cfg.n_speakers; s++) {
    Vector z = centers.row(s % centers.rows()).transpose();
    for (int k = 0; k < cfg.speaker_dim; k++) z[k] += gauss(rng);
    Matrix warp = Matrix::Identity(latent, latent);
    for (int k = 0; k < cfg.speaker_dim; k++)
      warp += cfg.speaker_warp * z[k] / std::sqrt(cfg.speaker_dim) * warps[k];
    const Vector speaker_offset = spk_map * z;
    const Split split = s < cfg.n_train_speakers ? Split::kTrain
                        : s < cfg.n_train_speakers + cfg.n_dev_speakers
                            ? Split::kDev
                            : Split::kEval;
    for (int u = 0; u < cfg.utts_per_speaker; u++) {
      Vector c(cfg.channel_dim);
      for (int k = 0; k < cfg.channel_dim; k++) c[k] = gauss(rng);
      const Vector offset = speaker_offset + chan_map * c;
      const int num_frames = duration(rng);
      Matrix hidden(num_frames, latent);
      Vector ar = Vector::Zero(latent);
      int phone = phone_pick(rng), left = phone_len(rng);
      for (int t = 0; t < num_frames; t++) {
        if (left-- == 0) {
          phone = phone_pick(rng);
          left = phone_len(rng) - 1;
        }
        for (int k = 0; k < latent; k++) ar[k] = 0.8 * ar[k] + 0.6 * gauss(rng);
        Vector content = phones.row(phone).transpose() + ar;
        hidden.row(t) = (offset + cfg.noise_scale * (warp * content)).transpose();
      }
      Matrix frames = hidden * mix.transpose();
      frames += cfg.nonlinearity * (hidden * squash.transpose()).array().tanh().matrix();
      Utterance utt;
      utt.id = fmt::format("spk{:03d}-utt{:02d}", s, u);
      utt.speaker = fmt::format("spk{:03d}", s);
      utt.split = split;
      utt.features.frames = std::move(frames);
      corpus.utterances.push_back(std::move(utt));
    }
  }
  return corpus;
}

}  // namespace e2esv
