// core/src/gmm.cc

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

#include "e2esv/gmm.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

#include "e2esv/error.h"

namespace e2esv {

namespace {

// Frames are processed in blocks so the T x C posterior matrix never has to
// exist for the whole corpus at once.
constexpr int64_t kBlockFrames = 8192;

}  // namespace

void DiagGmm::Validate() const {
  const int64_t c = weights.size();
  if (c < 1) Fail(ErrorKind::kModel, "GMM has no components");
  if (means.rows() != c || vars.rows() != c || vars.cols() != means.cols())
    Fail(ErrorKind::kShape, "GMM parameter shapes disagree");
  if ((weights.array() < 0.0).any() || std::abs(weights.sum() - 1.0) > 1e-12)
    Fail(ErrorKind::kModel, "GMM weights are not on the simplex");
  if (!(vars.array() > 0.0).all() || !means.allFinite() || !vars.allFinite())
    Fail(ErrorKind::kModel, "GMM variances must be positive and finite");
}

Matrix DiagGmm::ComponentLogLikes(const Matrix &frames) const {
  if (frames.cols() != Dim())
    Fail(ErrorKind::kShape, "frame dim {} != GMM dim {}", frames.cols(), Dim());
  const Matrix inv_var = vars.cwiseInverse();
  Vector consts(NumComponents());
  for (int64_t c = 0; c < NumComponents(); c++) {
    double logdet = (vars.row(c).array() * 2.0 * std::numbers::pi).log().sum();
    double mahal = (means.row(c).array().square() * inv_var.row(c).array()).sum();
    consts[c] = std::log(weights[c]) - 0.5 * (logdet + mahal);
  }
  Matrix ll = frames * (means.cwiseProduct(inv_var)).transpose();
  ll.noalias() -= 0.5 * frames.array().square().matrix() * inv_var.transpose();
  ll.rowwise() += consts.transpose();
  return ll;
}

Vector RowLogSumExp(const Matrix &m) {
  Vector out(m.rows());
  for (int64_t r = 0; r < m.rows(); r++) {
    double mx = m.row(r).maxCoeff();
    if (!std::isfinite(mx)) {
      out[r] = mx;
      continue;
    }
    out[r] = mx + std::log((m.row(r).array() - mx).exp().sum());
  }
  return out;
}

double DiagGmm::LogLikelihood(const Matrix &frames) const {
  double total = 0.0;
  for (int64_t start = 0; start < frames.rows(); start += kBlockFrames) {
    int64_t len = std::min(kBlockFrames, frames.rows() - start);
    total += RowLogSumExp(ComponentLogLikes(frames.middleRows(start, len))).sum();
  }
  return total;
}

Matrix Responsibilities(const DiagGmm &gmm, const Matrix &frames) {
  Matrix ll = gmm.ComponentLogLikes(frames);
  Vector lse = RowLogSumExp(ll);
  ll.colwise() -= lse;
  return ll.array().exp().matrix();
}

SuffStats SufficientStats(const Matrix &resp, const Matrix &frames) {
  if (resp.rows() != frames.rows())
    Fail(ErrorKind::kShape, "{} responsibility rows for {} frames", resp.rows(),
         frames.rows());
  if ((resp.array() < 0.0).any())
    Fail(ErrorKind::kInput, "negative responsibilities");
  SuffStats s;
  s.n = resp.colwise().sum().transpose();
  s.f = resp.transpose() * frames;
  s.frames_total = frames.rows();
  return s;
}

DiagGmm TrainUbm(const Matrix &frames, const UbmOptions &opts, uint64_t seed,
                 std::vector<double> *llk_history) {
  const int64_t num_frames = frames.rows(), dim = frames.cols();
  const int64_t num_comp = opts.num_components;
  if (num_comp < 1) Fail(ErrorKind::kConfig, "need at least one component");
  if (num_frames < num_comp)
    Fail(ErrorKind::kInput, "{} frames cannot train {} components", num_frames,
         num_comp);
  if (dim < 1) Fail(ErrorKind::kInput, "zero-dimensional frames");
  CheckFinite(frames, "UBM training frames");

  const Vector global_mean = frames.colwise().mean().transpose();
  Vector global_var =
      (frames.array().square().colwise().mean().transpose() -
       global_mean.array().square())
          .max(0.0)
          .matrix();
  Vector floor = (opts.var_floor * global_var.array()).max(1e-10).matrix();
  global_var = global_var.cwiseMax(floor);

  std::mt19937_64 rng(seed);
  std::vector<int64_t> order(num_frames);
  std::iota(order.begin(), order.end(), 0);
  for (int64_t i = 0; i < num_comp; i++) {
    std::uniform_int_distribution<int64_t> pick(i, num_frames - 1);
    std::swap(order[i], order[pick(rng)]);
  }

  DiagGmm gmm;
  gmm.weights = Vector::Constant(num_comp, 1.0 / num_comp);
  gmm.means.resize(num_comp, dim);
  for (int64_t c = 0; c < num_comp; c++) gmm.means.row(c) = frames.row(order[c]);
  gmm.vars = global_var.transpose().replicate(num_comp, 1);

  if (llk_history != nullptr) llk_history->clear();
  for (int iter = 0; iter < opts.num_iters; iter++) {
    Vector n = Vector::Zero(num_comp);
    Matrix f = Matrix::Zero(num_comp, dim);
    Matrix s = Matrix::Zero(num_comp, dim);
    double llk = 0.0;
    for (int64_t start = 0; start < num_frames; start += kBlockFrames) {
      int64_t len = std::min(kBlockFrames, num_frames - start);
      const auto block = frames.middleRows(start, len);
      Matrix ll = gmm.ComponentLogLikes(block);
      Vector lse = RowLogSumExp(ll);
      llk += lse.sum();
      ll.colwise() -= lse;
      Matrix resp = ll.array().exp().matrix();
      n += resp.colwise().sum().transpose();
      f.noalias() += resp.transpose() * block;
      s.noalias() += resp.transpose() * block.array().square().matrix();
    }
    if (llk_history != nullptr) llk_history->push_back(llk / num_frames);

    gmm.weights = n / n.sum();
    for (int64_t c = 0; c < num_comp; c++) {
      // A starved component keeps its previous mean and variance.
      if (n[c] < 1e-10) continue;
      gmm.means.row(c) = f.row(c) / n[c];
      Eigen::RowVectorXd var =
          s.row(c) / n[c] - gmm.means.row(c).array().square().matrix();
      gmm.vars.row(c) = var.cwiseMax(floor.transpose());
    }
  }
  if (llk_history != nullptr)
    llk_history->push_back(gmm.LogLikelihood(frames) / num_frames);
  return gmm;
}

}  // namespace e2esv
