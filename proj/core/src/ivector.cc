// core/src/ivector.cc

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

#include "e2esv/ivector.h"

#include <cmath>
#include <map>
#include <random>
#include <set>

#include "e2esv/error.h"

namespace e2esv {

IvectorExtractor::IvectorExtractor(const TvModel &tv, const DiagGmm &ubm)
    : means_(ubm.means) {
  const int64_t num_comp = ubm.NumComponents(), dim = ubm.Dim();
  const int64_t ivec_dim = tv.IvectorDim();
  if (tv.t.rows() != num_comp * dim)
    Fail(ErrorKind::kShape, "T has {} rows, UBM needs {}", tv.t.rows(),
         num_comp * dim);
  if (ivec_dim < 1 || ivec_dim > num_comp * dim)
    Fail(ErrorKind::kShape, "i-vector dim {} out of range", ivec_dim);
  sigma_inv_t_.resize(num_comp * dim, ivec_dim);
  quadratic_.resize(num_comp);
  for (int64_t c = 0; c < num_comp; c++) {
    auto t_c = tv.t.middleRows(c * dim, dim);
    Vector inv_var = ubm.vars.row(c).cwiseInverse().transpose();
    sigma_inv_t_.middleRows(c * dim, dim) = inv_var.asDiagonal() * t_c;
    quadratic_[c] = t_c.transpose() * sigma_inv_t_.middleRows(c * dim, dim);
  }
}

IvectorPosterior IvectorExtractor::Posterior(const SuffStats &stats) const {
  const int64_t num_comp = means_.rows(), dim = means_.cols();
  const int64_t ivec_dim = IvectorDim();
  if (stats.n.size() != num_comp || stats.f.rows() != num_comp ||
      stats.f.cols() != dim)
    Fail(ErrorKind::kShape, "stats are {}x{}, extractor expects {}x{}",
         stats.f.rows(), stats.f.cols(), num_comp, dim);
  if (!stats.n.allFinite() || !stats.f.allFinite())
    Fail(ErrorKind::kInput, "non-finite sufficient statistics");

  Vector centered(num_comp * dim);
  for (int64_t c = 0; c < num_comp; c++)
    centered.segment(c * dim, dim) =
        (stats.f.row(c) - stats.n[c] * means_.row(c)).transpose();

  IvectorPosterior post;
  Vector linear = sigma_inv_t_.transpose() * centered;
  post.precision = Matrix::Identity(ivec_dim, ivec_dim);
  for (int64_t c = 0; c < num_comp; c++)
    if (stats.n[c] != 0.0) post.precision += stats.n[c] * quadratic_[c];
  Eigen::LLT<Matrix> llt(post.precision);
  if (llt.info() != Eigen::Success)
    Fail(ErrorKind::kNumerical, "i-vector precision not positive definite");
  post.mean = llt.solve(linear);
  double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  post.evidence = 0.5 * linear.dot(post.mean) - 0.5 * logdet;
  return post;
}

Vector ExtractIvector(const TvModel &tv, const DiagGmm &ubm,
                      const SuffStats &stats) {
  return IvectorExtractor(tv, ubm).Extract(stats);
}

TvModel TrainTv(const std::vector<SuffStats> &stats, const DiagGmm &ubm,
                const TvOptions &opts, uint64_t seed,
                std::vector<double> *objective_history) {
  if (stats.empty()) Fail(ErrorKind::kInput, "no statistics to train T on");
  ubm.Validate();
  const int64_t num_comp = ubm.NumComponents(), dim = ubm.Dim();
  const int64_t ivec_dim = opts.ivector_dim;
  if (ivec_dim < 1 || ivec_dim > num_comp * dim)
    Fail(ErrorKind::kConfig, "i-vector dim must be in [1, {}]", num_comp * dim);

  TvModel tv;
  tv.t.resize(num_comp * dim, ivec_dim);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int64_t c = 0; c < num_comp; c++)
    for (int64_t d = 0; d < dim; d++) {
      double scale = opts.init_scale * std::sqrt(ubm.vars(c, d));
      for (int64_t r = 0; r < ivec_dim; r++)
        tv.t(c * dim + d, r) = scale * normal(rng);
    }

  const int64_t num_utts = static_cast<int64_t>(stats.size());
  auto run_e_step = [&](std::vector<IvectorPosterior> *posts) {
    IvectorExtractor extractor(tv, ubm);
    posts->resize(num_utts);
    ParallelFor(num_utts, opts.num_threads,
                [&](int64_t u) { (*posts)[u] = extractor.Posterior(stats[u]); });
    double total = 0.0;
    for (const auto &p : *posts) total += p.evidence;
    return total / num_utts;
  };

  if (objective_history != nullptr) objective_history->clear();
  std::vector<IvectorPosterior> posts;
  for (int iter = 0; iter < opts.num_iters; iter++) {
    double objective = run_e_step(&posts);
    if (objective_history != nullptr) objective_history->push_back(objective);

    std::vector<Matrix> a(num_comp, Matrix::Zero(ivec_dim, ivec_dim));
    Matrix c_acc = Matrix::Zero(num_comp * dim, ivec_dim);
    Vector total_n = Vector::Zero(num_comp);
    for (int64_t u = 0; u < num_utts; u++) {
      const IvectorPosterior &p = posts[u];
      Matrix second = p.precision.llt().solve(
          Matrix::Identity(ivec_dim, ivec_dim));
      second.noalias() += p.mean * p.mean.transpose();
      for (int64_t c = 0; c < num_comp; c++) {
        double n = stats[u].n[c];
        if (n == 0.0) continue;
        a[c] += n * second;
        total_n[c] += n;
        Vector centered = (stats[u].f.row(c) - n * ubm.means.row(c)).transpose();
        c_acc.middleRows(c * dim, dim).noalias() += centered * p.mean.transpose();
      }
    }
    for (int64_t c = 0; c < num_comp; c++) {
      if (total_n[c] <= 0.0) continue;
      Eigen::LLT<Matrix> llt(a[c]);
      if (llt.info() != Eigen::Success) continue;
      tv.t.middleRows(c * dim, dim) =
          llt.solve(c_acc.middleRows(c * dim, dim).transpose()).transpose();
    }
  }
  if (objective_history != nullptr)
    objective_history->push_back(run_e_step(&posts));
  return tv;
}

Vector IvecPrep::Apply(const Vector &w) const {
  if (w.size() != InputDim())
    Fail(ErrorKind::kShape, "i-vector dim {} != prep input dim {}", w.size(),
         InputDim());
  Vector x = LengthNormalize(w - global_mean);
  return LengthNormalize(lda.transpose() * x);
}

Matrix IvecPrep::ApplyRows(const Matrix &w) const {
  Matrix out(w.rows(), OutputDim());
  for (int64_t r = 0; r < w.rows(); r++)
    out.row(r) = Apply(w.row(r).transpose()).transpose();
  return out;
}

void ClassScatter(const Matrix &x, const std::vector<int64_t> &labels,
                  Matrix *between, Matrix *within) {
  const int64_t dim = x.cols();
  std::map<int64_t, std::vector<int64_t>> members;
  for (size_t i = 0; i < labels.size(); i++) members[labels[i]].push_back(i);
  const Vector mean = x.colwise().mean().transpose();
  *between = Matrix::Zero(dim, dim);
  *within = Matrix::Zero(dim, dim);
  for (const auto &[label, rows] : members) {
    Vector class_mean = Vector::Zero(dim);
    for (int64_t r : rows) class_mean += x.row(r).transpose();
    class_mean /= static_cast<double>(rows.size());
    Vector diff = class_mean - mean;
    *between += static_cast<double>(rows.size()) * diff * diff.transpose();
    for (int64_t r : rows) {
      Vector dev = x.row(r).transpose() - class_mean;
      *within += dev * dev.transpose();
    }
  }
  *between /= static_cast<double>(x.rows());
  *within /= static_cast<double>(x.rows());
}

IvecPrep FitPrep(const Matrix &ivectors, const std::vector<int64_t> &labels,
                 int out_dim) {
  const int64_t num = ivectors.rows(), dim = ivectors.cols();
  if (static_cast<int64_t>(labels.size()) != num)
    Fail(ErrorKind::kShape, "{} labels for {} i-vectors", labels.size(), num);
  if (out_dim < 1 || out_dim > dim)
    Fail(ErrorKind::kConfig, "LDA dim {} out of range [1, {}]", out_dim, dim);
  std::set<int64_t> classes(labels.begin(), labels.end());
  if (static_cast<int64_t>(classes.size()) < out_dim + 1)
    Fail(ErrorKind::kInput, "LDA to {} dims needs {} classes, got {}", out_dim,
         out_dim + 1, classes.size());
  CheckFinite(ivectors, "i-vectors");

  IvecPrep prep;
  prep.global_mean = ivectors.colwise().mean().transpose();
  Matrix x = ivectors.rowwise() - prep.global_mean.transpose();
  LengthNormalizeRows(&x);

  Matrix between, within;
  ClassScatter(x, labels, &between, &within);
  double reg = 1e-6 * within.trace() / dim;
  if (reg <= 0.0) reg = 1e-12;
  within += reg * Matrix::Identity(dim, dim);

  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> ges(between, within);
  if (ges.info() != Eigen::Success)
    Fail(ErrorKind::kNumerical, "LDA eigendecomposition failed");
  prep.lda.resize(dim, out_dim);
  for (int j = 0; j < out_dim; j++)
    prep.lda.col(j) = ges.eigenvectors().col(dim - 1 - j);
  return prep;
}

}  // namespace e2esv
