// core/src/plda.cc

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

#include "e2esv/plda.h"

#include <cmath>
#include <map>
#include <numbers>

#include "e2esv/error.h"
#include "e2esv/ivector.h"

namespace e2esv {

namespace {

double LogDet(const Eigen::LLT<Matrix> &llt) {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

Eigen::LLT<Matrix> FactorOrFail(const Matrix &m, const char *what) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success)
    Fail(ErrorKind::kModel, "{} is not positive definite", what);
  return llt;
}

Matrix Sym(const Matrix &m) { return 0.5 * (m + m.transpose()); }

std::map<int64_t, std::vector<int64_t>> GroupByLabel(
    const std::vector<int64_t> &labels) {
  std::map<int64_t, std::vector<int64_t>> groups;
  for (size_t i = 0; i < labels.size(); i++) groups[labels[i]].push_back(i);
  return groups;
}

}  // namespace

void TwoCovPlda::Validate() const {
  const int64_t d = Dim();
  if (d < 1 || between.rows() != d || between.cols() != d ||
      within.rows() != d || within.cols() != d)
    Fail(ErrorKind::kShape, "PLDA parameter shapes disagree");
  if (!mu.allFinite() || !between.allFinite() || !within.allFinite())
    Fail(ErrorKind::kModel, "non-finite PLDA parameters");
  FactorOrFail(Sym(within), "PLDA within-class covariance");
  Eigen::SelfAdjointEigenSolver<Matrix> es(Sym(between), Eigen::EigenvaluesOnly);
  double tol = 1e-10 * std::max(1.0, std::abs(between.trace()));
  if (es.eigenvalues().minCoeff() < -tol)
    Fail(ErrorKind::kModel, "PLDA between-class covariance is not PSD");
}

DpldaParams DpldaParams::Zeros(int64_t dim) {
  DpldaParams p;
  p.lambda = Matrix::Zero(dim, dim);
  p.gamma = Matrix::Zero(dim, dim);
  p.c = Vector::Zero(dim);
  p.k = 0.0;
  return p;
}

void DpldaParams::Symmetrize() {
  lambda = Sym(lambda);
  gamma = Sym(gamma);
}

Vector DpldaParams::Flatten() const {
  const int64_t d = Dim();
  Vector flat(NumParams());
  int64_t pos = 0;
  for (const Matrix *m : {&lambda, &gamma})
    for (int64_t r = 0; r < d; r++)
      for (int64_t col = 0; col < d; col++) flat[pos++] = (*m)(r, col);
  flat.segment(pos, d) = c;
  flat[pos + d] = k;
  return flat;
}

void DpldaParams::Unflatten(const Eigen::Ref<const Vector> &flat) {
  const int64_t d = Dim();
  if (flat.size() != NumParams())
    Fail(ErrorKind::kShape, "flat size {} != {} DPLDA parameters", flat.size(),
         NumParams());
  int64_t pos = 0;
  for (Matrix *m : {&lambda, &gamma}) {
    m->resize(d, d);
    for (int64_t r = 0; r < d; r++)
      for (int64_t col = 0; col < d; col++) (*m)(r, col) = flat[pos++];
  }
  c = flat.segment(pos, d);
  k = flat[pos + d];
}

double PldaLogLikelihood(const TwoCovPlda &plda, const Matrix &vectors,
                         const std::vector<int64_t> &labels) {
  const int64_t d = plda.Dim();
  Eigen::LLT<Matrix> w_llt = FactorOrFail(plda.within, "within covariance");
  const double logdet_w = LogDet(w_llt);
  const double log2pi = std::log(2.0 * std::numbers::pi);
  double total = 0.0;
  for (const auto &[label, rows] : GroupByLabel(labels)) {
    const double n = static_cast<double>(rows.size());
    Vector mean = Vector::Zero(d);
    for (int64_t r : rows) mean += vectors.row(r).transpose();
    mean /= n;
    double scatter = 0.0;
    for (int64_t r : rows) {
      Vector dev = vectors.row(r).transpose() - mean;
      scatter += dev.dot(w_llt.solve(dev));
    }
    Eigen::LLT<Matrix> m_llt =
        FactorOrFail(plda.between + plda.within / n, "B + W/n");
    Vector dm = mean - plda.mu;
    total += -0.5 * n * d * log2pi - 0.5 * (n - 1.0) * logdet_w -
             0.5 * d * std::log(n) - 0.5 * scatter - 0.5 * LogDet(m_llt) -
             0.5 * dm.dot(m_llt.solve(dm));
  }
  return total;
}

TwoCovPlda TrainPlda(const Matrix &vectors, const std::vector<int64_t> &labels,
                     const PldaOptions &opts, std::vector<double> *llk_history) {
  const int64_t num = vectors.rows(), d = vectors.cols();
  if (static_cast<int64_t>(labels.size()) != num)
    Fail(ErrorKind::kShape, "{} labels for {} vectors", labels.size(), num);
  CheckFinite(vectors, "PLDA training vectors");
  auto groups = GroupByLabel(labels);
  if (groups.size() < 2)
    Fail(ErrorKind::kInput, "PLDA needs at least two speakers");
  bool any_repeat = false;
  for (const auto &[label, rows] : groups) any_repeat |= rows.size() >= 2;
  if (!any_repeat)
    Fail(ErrorKind::kInput,
         "PLDA needs at least one speaker with two or more utterances");

  TwoCovPlda plda;
  plda.mu = vectors.colwise().mean().transpose();
  ClassScatter(vectors, labels, &plda.between, &plda.within);
  plda.within += 1e-6 * std::max(plda.within.trace() / d, 1e-12) *
                 Matrix::Identity(d, d);

  const double num_d = static_cast<double>(num);
  const double num_spk = static_cast<double>(groups.size());
  if (llk_history != nullptr) llk_history->clear();
  for (int iter = 0; iter < opts.num_iters; iter++) {
    if (llk_history != nullptr)
      llk_history->push_back(PldaLogLikelihood(plda, vectors, labels) / num_d);
    // E-step: posterior of each speaker variable, written in a form that
    // stays well defined when B is singular.
    std::vector<Vector> post_mean;
    std::vector<Matrix> post_cov;
    for (const auto &[label, rows] : groups) {
      const double n = static_cast<double>(rows.size());
      Vector mean = Vector::Zero(d);
      for (int64_t r : rows) mean += vectors.row(r).transpose();
      mean /= n;
      Eigen::LLT<Matrix> m_llt =
          FactorOrFail(plda.between + plda.within / n, "B + W/n");
      Matrix gain = m_llt.solve(plda.between).transpose();  // B (B+W/n)^-1
      post_mean.push_back(plda.mu + gain * (mean - plda.mu));
      post_cov.push_back(Sym(plda.between - gain * plda.between));
    }
    // M-step.
    Vector mu = Vector::Zero(d);
    for (const auto &m : post_mean) mu += m;
    mu /= num_spk;
    Matrix between = Matrix::Zero(d, d), within = Matrix::Zero(d, d);
    size_t s = 0;
    for (const auto &[label, rows] : groups) {
      Vector dm = post_mean[s] - mu;
      between += post_cov[s] + dm * dm.transpose();
      for (int64_t r : rows) {
        Vector dev = vectors.row(r).transpose() - post_mean[s];
        within += post_cov[s] + dev * dev.transpose();
      }
      s++;
    }
    plda.mu = mu;
    plda.between = Sym(between / num_spk);
    plda.within = Sym(within / num_d);
  }
  if (llk_history != nullptr)
    llk_history->push_back(PldaLogLikelihood(plda, vectors, labels) / num_d);
  return plda;
}

PldaScorer::PldaScorer(const TwoCovPlda &plda) : mu_(plda.mu) {
  plda.Validate();
  const int64_t d = plda.Dim();
  Matrix total = plda.between + plda.within;
  Matrix same(2 * d, 2 * d), diff = Matrix::Zero(2 * d, 2 * d);
  same << total, plda.between, plda.between, total;
  diff.topLeftCorner(d, d) = total;
  diff.bottomRightCorner(d, d) = total;
  same_ = FactorOrFail(same, "same-speaker covariance");
  diff_ = FactorOrFail(diff, "different-speaker covariance");
  half_logdet_ratio_ = 0.5 * (LogDet(diff_) - LogDet(same_));
}

double PldaScorer::OneSided(const Vector &e, const Vector &t) const {
  const int64_t d = mu_.size();
  Vector z(2 * d);
  z << e - mu_, t - mu_;
  double quad_same = same_.matrixL().solve(z).squaredNorm();
  double quad_diff = diff_.matrixL().solve(z).squaredNorm();
  return -0.5 * quad_same + 0.5 * quad_diff + half_logdet_ratio_;
}

double PldaScorer::Llr(const Vector &e, const Vector &t) const {
  if (e.size() != mu_.size() || t.size() != mu_.size())
    Fail(ErrorKind::kShape, "PLDA scoring dim mismatch");
  // Averaging both orders makes the result exactly symmetric in floating
  // point, not just mathematically.
  return 0.5 * (OneSided(e, t) + OneSided(t, e));
}

double PldaLlr(const TwoCovPlda &plda, const Vector &e, const Vector &t) {
  return PldaScorer(plda).Llr(e, t);
}

DpldaParams ToDplda(const TwoCovPlda &plda) {
  plda.Validate();
  const int64_t d = plda.Dim();
  const Matrix total = plda.between + plda.within;
  Eigen::LLT<Matrix> t_llt = FactorOrFail(total, "B + W");
  const Matrix total_inv = t_llt.solve(Matrix::Identity(d, d));
  // Inverse of [[T, B], [B, T]] has diagonal blocks P = (T - B T^-1 B)^-1
  // and off-diagonal blocks Q = -T^-1 B P.
  const Matrix schur = Sym(total - plda.between * total_inv * plda.between);
  Eigen::LLT<Matrix> s_llt = FactorOrFail(schur, "T - B T^-1 B");
  const Matrix p = Sym(s_llt.solve(Matrix::Identity(d, d)));
  const Matrix q = Sym(-total_inv * plda.between * p);

  DpldaParams out;
  out.gamma = Sym(0.5 * (total_inv - p));
  out.lambda = -0.5 * q;
  const Matrix both = out.gamma + out.lambda;
  out.c = -2.0 * both * plda.mu;
  out.k = 2.0 * plda.mu.dot(both * plda.mu) +
          0.5 * (LogDet(t_llt) - LogDet(s_llt));
  return out;
}

}  // namespace e2esv
