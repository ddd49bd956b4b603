// tools/e2esv_main.cc

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


// Command-line driver: one subcommand per pipeline stage.  Every stage reads
// and writes files under a work directory named in the config, so a single
// config file is enough to chain them.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "e2esv/config.h"
#include "e2esv/corpus.h"
#include "e2esv/e2e.h"
#include "e2esv/error.h"
#include "e2esv/eval.h"
#include "e2esv/io.h"
#include "e2esv/models_io.h"
#include "e2esv/recipe.h"
#include "e2esv/trials.h"

namespace fs = std::filesystem;
using namespace e2esv;

namespace {

struct Context {
  Config config;
  RecipeOptions opts;
  uint64_t seed = 1;
  int threads = 1;
  std::string work_dir = "work";

  std::string Path(const std::string &key, const std::string &def) const {
    return config.GetString("paths." + key, (fs::path(work_dir) / def).string());
  }
  std::string CorpusDir() const { return Path("corpus", "corpus"); }
};

// Named vectors (embeddings) keyed by utterance id.
TensorSet VectorStore(const std::vector<const Utterance *> &utts, const Matrix &rows) {
  TensorSet set;
  for (size_t u = 0; u < utts.size(); u++) set.AddVector(utts[u]->id, rows.row(u).transpose());
  return set;
}

Matrix GatherVectors(const TensorSet &set, const std::vector<const Utterance *> &utts) {
  if (utts.empty()) Fail(ErrorKind::kInput, "no utterances selected");
  Vector first = set.GetVector(utts[0]->id);
  Matrix out(static_cast<int64_t>(utts.size()), first.size());
  for (size_t u = 0; u < utts.size(); u++)
    out.row(u) = set.GetVector(utts[u]->id, first.size()).transpose();
  return out;
}

TensorSet StatsStore(const std::vector<const Utterance *> &utts,
                     const std::vector<SuffStats> &stats) {
  TensorSet set;
  for (size_t u = 0; u < utts.size(); u++) {
    set.AddVector(utts[u]->id + ".n", stats[u].n);
    set.AddMatrix(utts[u]->id + ".f", stats[u].f);
    set.AddScalar(utts[u]->id + ".frames", static_cast<double>(stats[u].frames_total));
  }
  return set;
}

std::vector<SuffStats> GatherStats(const TensorSet &set,
                                   const std::vector<const Utterance *> &utts) {
  std::vector<SuffStats> out(utts.size());
  for (size_t u = 0; u < utts.size(); u++) {
    out[u].n = set.GetVector(utts[u]->id + ".n");
    out[u].f = set.GetMatrix(utts[u]->id + ".f", out[u].n.size());
    out[u].frames_total = set.GetInt(utts[u]->id + ".frames");
  }
  return out;
}

std::vector<const Utterance *> AllUtterances(const Corpus &c) {
  std::vector<const Utterance *> out;
  for (const Utterance &u : c.utterances) out.push_back(&u);
  return out;
}

void WriteLog(const std::string &path, const TrainReport &report) {
  std::string text;
  for (const EpochLog &e : report.epochs) text += FormatEpochLog(e) + "\n";
  WriteFileBytes(path, text);
}

void SynthData(const Context &ctx) {
  SynthConfig cfg = ctx.opts.synth;
  cfg.seed = ctx.seed;
  Corpus corpus = SynthCorpus(cfg);
  const std::string dir = ctx.CorpusDir();
  WriteCorpus(dir, corpus);
  WriteTrialList((fs::path(dir) / "trials_dev.txt").string(),
                 AllPairsTrialList(corpus.Select(Split::kDev)));
  WriteTrialList((fs::path(dir) / "trials_eval.txt").string(),
                 AllPairsTrialList(corpus.Select(Split::kEval)));
  spdlog::info("wrote {} utterances to {}", corpus.utterances.size(), dir);
}

void TrainUbmCmd(const Context &ctx) {
  Corpus corpus = ReadCorpus(ctx.CorpusDir());
  auto prepared = PrepareAll(ctx.opts.frontend, corpus.Select(Split::kTrain), ctx.threads);
  std::vector<double> history;
  DiagGmm ubm = TrainUbm(StackRaw(prepared), ctx.opts.ubm, ctx.seed, &history);
  for (size_t i = 0; i < history.size(); i++)
    spdlog::info("ubm iter {} avg frame log-likelihood {:.6f}", i, history[i]);
  SaveModel(ctx.Path("ubm", "ubm.svm"), ubm);
}

void ExtractStatsCmd(const Context &ctx) {
  Corpus corpus = ReadCorpus(ctx.CorpusDir());
  auto ubm = LoadModel<DiagGmm>(ctx.Path("ubm", "ubm.svm"));
  auto utts = AllUtterances(corpus);
  auto stats = UbmStatsAll(ubm, PrepareAll(ctx.opts.frontend, utts, ctx.threads), ctx.threads);
  WriteTensorSet(ctx.Path("stats", "stats.svm"), StatsStore(utts, stats));
}

void TrainTvCmd(const Context &ctx) {
  Corpus corpus = ReadCorpus(ctx.CorpusDir());
  auto ubm = LoadModel<DiagGmm>(ctx.Path("ubm", "ubm.svm"));
  auto stats = GatherStats(ReadTensorSet(ctx.Path("stats", "stats.svm")),
                           corpus.Select(Split::kTrain));
  TvOptions opts = ctx.opts.tv;
  opts.num_threads = ctx.threads;
  std::vector<double> history;
  TvModel tv = TrainTv(stats, ubm, opts, ctx.seed, &history);
  for (size_t i = 0; i < history.size(); i++)
    spdlog::info("tv iter {} avg evidence {:.6f}", i, history[i]);
  SaveModel(ctx.Path("tv", "tv.svm"), tv);
}

void ExtractIvecCmd(const Context &ctx) {
  Corpus corpus = ReadCorpus(ctx.CorpusDir());
  auto ubm = LoadModel<DiagGmm>(ctx.Path("ubm", "ubm.svm"));
  auto tv = LoadModel<TvModel>(ctx.Path("tv", "tv.svm"));
  auto utts = AllUtterances(corpus);
  Matrix ivecs = ExtractIvectorsAll(
      tv, ubm, GatherStats(ReadTensorSet(ctx.Path("stats", "stats.svm")), utts),
      ctx.threads);
  TensorSet raw = VectorStore(utts, ivecs);
  WriteTensorSet(ctx.Path("ivectors", "ivectors.svm"), raw);
  auto train = corpus.Select(Split::kTrain);
  IvecPrep prep = FitPrep(GatherVectors(raw, train), SpeakerIndices(train), ctx.opts.lda_dim);
  SaveModel(ctx.Path("prep", "prep.svm"), prep);
  WriteTensorSet(ctx.Path("embeddings", "embeddings.svm"),
                 VectorStore(utts, prep.ApplyRows(ivecs)));
}

void TrainPldaCmd(const Context &ctx) {
  Corpus corpus = ReadCorpus(ctx.CorpusDir());
  auto train = corpus.Select(Split::kTrain);
  Matrix x = GatherVectors(ReadTensorSet(ctx.Path("embeddings", "embeddings.svm")), train);
  std::vector<double> history;
  TwoCovPlda plda = TrainPlda(x, SpeakerIndices(train), ctx.opts.plda, &history);
  for (size_t i = 0; i < history.size(); i++)
    spdlog::info("plda iter {} avg log-likelihood {:.6f}", i, history[i]);
  SaveModel(ctx.Path("plda", "plda.svm"), plda);
}

void TrainDpldaCmd(const Context &ctx) {
  Corpus corpus = ReadCorpus(ctx.CorpusDir());
  auto train = corpus.Select(Split::kTrain);
  Matrix x = GatherVectors(ReadTensorSet(ctx.Path("embeddings", "embeddings.svm")), train);
  auto plda = LoadModel<TwoCovPlda>(ctx.Path("plda", "plda.svm"));
  LbfgsReport report;
  DpldaParams p = TrainDpldaFullBatch(ToDplda(plda), x, SpeakerIndices(train),
                                      ctx.opts.dplda_objective, ctx.opts.lbfgs, &report);
  spdlog::info("dplda loss {:.6g} -> {:.6g} after {} iterations ({})",
               report.initial_loss, report.final_loss, report.iterations, report.status);
  SaveModel(ctx.Path("dplda", "dplda.svm"), p);
}

void TrainF2sCmd(const Context &ctx) {
  Corpus corpus = ReadCorpus(ctx.CorpusDir());
  auto ubm = LoadModel<DiagGmm>(ctx.Path("ubm", "ubm.svm"));
  auto prepared = PrepareAll(ctx.opts.frontend, corpus.Select(Split::kTrain), ctx.threads);
  F2sNet init = CreateF2s(prepared.at(0).expanded.cols(), ubm.NumComponents(),
                          ctx.opts.f2s.hidden, ctx.seed);
  F2sReport report;
  F2sNet f2s = TrainF2s(init, ExpandedAll(prepared),
                        ResponsibilitiesAll(ubm, prepared, ctx.threads), ctx.opts.f2s,
                        ctx.seed, &report);
  for (size_t i = 0; i < report.epoch_loss.size(); i++)
    spdlog::info("f2s epoch {} cross-entropy {:.6f}", i + 1, report.epoch_loss[i]);
  SaveModel(ctx.Path("f2s", "f2s.svm"), f2s);
}

void FitPcaCmd(const Context &ctx) {
  Corpus corpus = ReadCorpus(ctx.CorpusDir());
  auto ubm = LoadModel<DiagGmm>(ctx.Path("ubm", "ubm.svm"));
  auto stats = GatherStats(ReadTensorSet(ctx.Path("stats", "stats.svm")),
                           corpus.Select(Split::kTrain));
  PcaModel pca = FitPca(SupervectorsAll(ubm, stats, ctx.opts.relevance), ctx.opts.pca_dim);
  SaveModel(ctx.Path("pca", "pca.svm"), pca);
}

void TrainS2iCmd(const Context &ctx) {
  Corpus corpus = ReadCorpus(ctx.CorpusDir());
  auto train = corpus.Select(Split::kTrain);
  auto ubm = LoadModel<DiagGmm>(ctx.Path("ubm", "ubm.svm"));
  auto pca = LoadModel<PcaModel>(ctx.Path("pca", "pca.svm"));
  auto stats = GatherStats(ReadTensorSet(ctx.Path("stats", "stats.svm")), train);
  Matrix inputs = pca.ProjectRows(SupervectorsAll(ubm, stats, ctx.opts.relevance));
  Matrix refs = GatherVectors(ReadTensorSet(ctx.Path("embeddings", "embeddings.svm")), train);
  S2iNet init = CreateS2i(inputs.cols(), refs.cols(), ctx.opts.s2i.hidden, ctx.seed);
  S2iReport report;
  S2iNet s2i = TrainS2i(init, inputs, refs, ctx.opts.s2i, ctx.seed, &report);
  spdlog::info("s2i cosine loss {:.6f} -> {:.6f}", report.initial_loss, report.final_loss);
  SaveModel(ctx.Path("s2i", "s2i.svm"), s2i);
}

// The cascade of separately trained modules with a scorer fitted on the
// s2i outputs: generative PLDA, then full-batch discriminative training.
E2eSystem BuildCascade(const Context &ctx, const Corpus &corpus) {
  auto ubm = LoadModel<DiagGmm>(ctx.Path("ubm", "ubm.svm"));
  auto f2s = LoadModel<F2sNet>(ctx.Path("f2s", "f2s.svm"));
  auto pca = LoadModel<PcaModel>(ctx.Path("pca", "pca.svm"));
  auto s2i = LoadModel<S2iNet>(ctx.Path("s2i", "s2i.svm"));
  E2eSystem sys = AssembleE2e(ctx.opts.frontend, ctx.opts.relevance, f2s, ubm, pca, s2i,
                              DpldaParams::Zeros(s2i.OutputDim()), 0.0);
  auto train = corpus.Select(Split::kTrain);
  auto prepared = PrepareAll(ctx.opts.frontend, train, ctx.threads);
  Matrix emb(static_cast<int64_t>(train.size()), s2i.OutputDim());
  for (size_t u = 0; u < train.size(); u++) emb.row(u) = E2eEmbed(sys, prepared[u]).transpose();
  auto labels = SpeakerIndices(train);
  TwoCovPlda plda = TrainPlda(emb, labels, ctx.opts.plda);
  DpldaParams dplda = TrainDpldaFullBatch(ToDplda(plda), emb, labels,
                                          ctx.opts.dplda_objective, ctx.opts.lbfgs);
  return AssembleE2e(ctx.opts.frontend, ctx.opts.relevance, f2s, ubm, pca, s2i, dplda, 0.0);
}

Matrix S2iInputs(const E2eSystem &sys, const std::vector<PreparedUtterance> &utts) {
  Matrix out(static_cast<int64_t>(utts.size()), sys.pca.OutputDim());
  for (size_t u = 0; u < utts.size(); u++) out.row(u) = E2eS2iInput(sys, utts[u]).transpose();
  return out;
}

void TrainJointCmd(const Context &ctx) {
  Corpus corpus = ReadCorpus(ctx.CorpusDir());
  E2eSystem init = BuildCascade(ctx, corpus);
  SaveModel(ctx.Path("cascade", "cascade.svm"), init);
  auto train = corpus.Select(Split::kTrain), dev = corpus.Select(Split::kDev);
  Matrix train_in = S2iInputs(init, PrepareAll(ctx.opts.frontend, train, ctx.threads));
  Matrix dev_in = S2iInputs(init, PrepareAll(ctx.opts.frontend, dev, ctx.threads));
  TrainReport report;
  E2eSystem sys = TrainJointS2iDplda(init, train_in, SpeakerIndices(train), dev_in,
                                     SpeakerIndices(dev), ctx.opts.joint, ctx.seed, &report);
  WriteLog(ctx.Path("joint_log", "joint.log"), report);
  spdlog::info("joint training: best epoch {} dev C_primary {:.6f} (initial {:.6f})",
               report.best_epoch, report.epochs[report.best_epoch].dev_c_primary,
               report.epochs[0].dev_c_primary);
  SaveModel(ctx.Path("joint", "joint.svm"), sys);
}

void TrainE2eCmd(const Context &ctx) {
  Corpus corpus = ReadCorpus(ctx.CorpusDir());
  auto init = LoadModel<E2eSystem>(ctx.Path("joint", "joint.svm"));
  // Re-anchor the snapshot at the starting point of this stage.
  init = AssembleE2e(init.frontend, init.relevance, init.f2s, init.ubm, init.pca, init.s2i,
                     init.dplda, 0.0);
  auto train = corpus.Select(Split::kTrain), dev = corpus.Select(Split::kDev);
  TrainReport report;
  E2eSystem sys = TrainE2eFull(init, PrepareAll(ctx.opts.frontend, train, ctx.threads),
                               SpeakerIndices(train),
                               PrepareAll(ctx.opts.frontend, dev, ctx.threads),
                               SpeakerIndices(dev), ctx.opts.e2e, ctx.seed, &report);
  WriteLog(ctx.Path("e2e_log", "e2e.log"), report);
  spdlog::info("e2e training: best epoch {} dev C_primary {:.6f} (initial {:.6f})",
               report.best_epoch, report.epochs[report.best_epoch].dev_c_primary,
               report.epochs[0].dev_c_primary);
  SaveModel(ctx.Path("e2e", "e2e.svm"), sys);
}

void ScoreCmd(const Context &ctx, std::string backend, std::string trials_path,
              std::string out_path) {
  if (backend.empty()) backend = ctx.config.GetString("score.backend", "plda");
  if (trials_path.empty())
    trials_path = ctx.config.GetString(
        "score.trials", (fs::path(ctx.CorpusDir()) / "trials_dev.txt").string());
  if (out_path.empty()) out_path = ctx.Path("scores", "scores.txt");
  TrialList trials = ReadTrialList(trials_path);

  // Embed every utterance named in the trial list once.
  std::map<std::string, Vector> emb;
  std::function<double(const Vector &, const Vector &)> scorer;
  if (backend == "plda" || backend == "dplda") {
    TensorSet store = ReadTensorSet(ctx.Path("embeddings", "embeddings.svm"));
    for (const TrialRow &t : trials.rows)
      for (const std::string &id : {t.enroll, t.test})
        if (!emb.count(id)) emb[id] = store.GetVector(id);
    if (backend == "plda") {
      auto plda = std::make_shared<PldaScorer>(LoadModel<TwoCovPlda>(ctx.Path("plda", "plda.svm")));
      scorer = [plda](const Vector &a, const Vector &b) { return plda->Llr(a, b); };
    } else {
      auto p = LoadModel<DpldaParams>(ctx.Path("dplda", "dplda.svm"));
      scorer = [p](const Vector &a, const Vector &b) { return DpldaScore(p, a, b); };
    }
  } else if (backend == "cascade" || backend == "joint" || backend == "e2e") {
    auto sys = LoadModel<E2eSystem>(ctx.Path(backend, backend + ".svm"));
    Corpus corpus = ReadCorpus(ctx.CorpusDir());
    std::map<std::string, const Utterance *> by_id;
    for (const Utterance &u : corpus.utterances) by_id[u.id] = &u;
    for (const TrialRow &t : trials.rows)
      for (const std::string &id : {t.enroll, t.test}) {
        if (emb.count(id)) continue;
        auto it = by_id.find(id);
        if (it == by_id.end()) Fail(ErrorKind::kInput, "unknown utterance '{}'", id);
        emb[id] = E2eEmbed(sys, PrepareUtterance(sys.frontend, it->second->features));
      }
    scorer = [p = sys.dplda](const Vector &a, const Vector &b) { return DpldaScore(p, a, b); };
  } else {
    Fail(ErrorKind::kUsage, "unknown backend '{}' (plda, dplda, cascade, joint, e2e)", backend);
  }
  std::vector<ScoreRow> scores;
  for (const TrialRow &t : trials.rows)
    scores.push_back({t.enroll, t.test, scorer(emb.at(t.enroll), emb.at(t.test))});
  WriteScores(out_path, scores);
  spdlog::info("wrote {} scores to {}", scores.size(), out_path);
}

void EvalCmd(const Context &ctx, std::string scores_path, std::string trials_path,
             const std::string &format) {
  if (scores_path.empty()) scores_path = ctx.Path("scores", "scores.txt");
  if (trials_path.empty())
    trials_path = ctx.config.GetString(
        "score.trials", (fs::path(ctx.CorpusDir()) / "trials_dev.txt").string());
  MetricsReport r = ComputeMetrics(JoinScores(ReadTrialList(trials_path), ReadScores(scores_path)));
  WriteFileBytes(ctx.Path("metrics", "metrics.txt"), FormatMetricsKv(r));
  std::cout << (format == "kv" ? FormatMetricsKv(r) : FormatMetricsText(r));
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Speaker verification pipeline: statistics, embeddings, scoring"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  uint64_t seed = 0;
  int threads = 1;
  std::string log_level = "info";
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "key=value config file");
  auto *seed_opt = app.add_option("--seed", seed, "random seed (default: config 'seed' or 1)");
  app.add_option("--threads", threads, "worker threads for per-utterance stages")
      ->check(CLI::PositiveNumber);
  app.add_option("--set", overrides, "override a config value, key=value (repeatable)");
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error");

  std::map<std::string, CLI::App *> sub;
  for (const auto &[name, help] : std::vector<std::pair<std::string, std::string>>{
           {"synth-data", "generate the synthetic corpus and trial lists"},
           {"train-ubm", "train the diagonal GMM-UBM"},
           {"extract-stats", "UBM sufficient statistics for every utterance"},
           {"train-tv", "train the total-variability matrix"},
           {"extract-ivec", "extract i-vectors, fit LDA + length norm"},
           {"train-plda", "train the two-covariance PLDA"},
           {"train-dplda", "discriminative PLDA, full batch from the PLDA"},
           {"train-f2s", "train the features-to-statistics network"},
           {"fit-pca", "fit the supervector PCA"},
           {"train-s2i", "train the statistics-to-i-vector network"},
           {"train-joint", "build the cascade and train s2i + scorer jointly"},
           {"train-e2e", "train all modules jointly"},
           {"score", "score a trial list"},
           {"eval", "EER / minDCF / C_primary of a score file"}})
    sub[name] = app.add_subcommand(name, help);

  std::string backend, trials_path, out_path, scores_path, format = "text";
  sub["score"]->add_option("--backend", backend, "plda, dplda, cascade, joint or e2e");
  sub["score"]->add_option("--trials", trials_path, "trial list");
  sub["score"]->add_option("--out", out_path, "score file to write");
  sub["eval"]->add_option("--scores", scores_path, "score file");
  sub["eval"]->add_option("--trials", trials_path, "labeled trial list");
  sub["eval"]->add_option("--format", format, "text or kv")
      ->check(CLI::IsMember({"text", "kv"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    spdlog::set_default_logger(spdlog::stderr_color_mt("e2esv"));
    spdlog::set_level(spdlog::level::from_str(log_level));
    Context ctx;
    if (!config_path.empty()) ctx.config.Load(config_path);
    for (const std::string &kv : overrides) {
      size_t eq = kv.find('=');
      if (eq == std::string::npos || eq == 0)
        Fail(ErrorKind::kUsage, "--set expects key=value, got '{}'", kv);
      ctx.config.Set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    ctx.opts = RecipeFromConfig(ctx.config);
    ctx.seed = *seed_opt ? seed : static_cast<uint64_t>(ctx.config.GetInt("seed", 1));
    ctx.threads = threads;
    ctx.opts.num_threads = threads;
    ctx.work_dir = ctx.config.GetString("work_dir", "work");
    fs::create_directories(ctx.work_dir);

    const std::string name = app.get_subcommands().front()->get_name();
    if (name == "synth-data") SynthData(ctx);
    else if (name == "train-ubm") TrainUbmCmd(ctx);
    else if (name == "extract-stats") ExtractStatsCmd(ctx);
    else if (name == "train-tv") TrainTvCmd(ctx);
    else if (name == "extract-ivec") ExtractIvecCmd(ctx);
    else if (name == "train-plda") TrainPldaCmd(ctx);
    else if (name == "train-dplda") TrainDpldaCmd(ctx);
    else if (name == "train-f2s") TrainF2sCmd(ctx);
    else if (name == "fit-pca") FitPcaCmd(ctx);
    else if (name == "train-s2i") TrainS2iCmd(ctx);
    else if (name == "train-joint") TrainJointCmd(ctx);
    else if (name == "train-e2e") TrainE2eCmd(ctx);
    else if (name == "score") ScoreCmd(ctx, backend, trials_path, out_path);
    else if (name == "eval") EvalCmd(ctx, scores_path, trials_path, format);

    for (const std::string &key : ctx.config.UnusedKeys())
      if (key.rfind("paths.", 0) != 0)
        spdlog::warn("config key '{}' was not used by {}", key, name);
  } catch (const Error &e) {
    spdlog::error("{}: {}", ErrorKindName(e.kind()), e.what());
    return ExitCodeFor(e.kind());
  } catch (const std::exception &e) {
    spdlog::error("{}", e.what());
    return 4;
  }
  return 0;
}
