// core/src/s2i.cc

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

#include "e2esv/s2i.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "e2esv/error.h"

namespace e2esv {

namespace {

void CheckStats(const DiagGmm &ubm, const SuffStats &stats) {
  if (stats.n.size() != ubm.NumComponents() ||
      stats.f.rows() != ubm.NumComponents() || stats.f.cols() != ubm.Dim())
    Fail(ErrorKind::kShape, "stats are {}x{}, UBM is {}x{}", stats.f.rows(),
         stats.f.cols(), ubm.NumComponents(), ubm.Dim());
}

}  // namespace

Vector MapSupervector(const DiagGmm &ubm, const SuffStats &stats,
                      double relevance) {
  if (!(relevance > 0.0)) Fail(ErrorKind::kConfig, "relevance factor must be > 0");
  CheckStats(ubm, stats);
  const int64_t num_comp = ubm.NumComponents(), dim = ubm.Dim();
  Vector sv(num_comp * dim);
  for (int64_t c = 0; c < num_comp; c++)
    sv.segment(c * dim, dim) =
        ((stats.f.row(c) + relevance * ubm.means.row(c)) /
         (stats.n[c] + relevance))
            .transpose();
  return sv;
}

StatsGrad MapSupervectorBackward(const DiagGmm &ubm, const SuffStats &stats,
                                 double relevance, const Vector &grad_sv) {
  CheckStats(ubm, stats);
  const int64_t num_comp = ubm.NumComponents(), dim = ubm.Dim();
  if (grad_sv.size() != num_comp * dim)
    Fail(ErrorKind::kShape, "supervector gradient has size {}, expected {}",
         grad_sv.size(), num_comp * dim);
  StatsGrad g;
  g.n.resize(num_comp);
  g.f.resize(num_comp, dim);
  for (int64_t c = 0; c < num_comp; c++) {
    const double denom = stats.n[c] + relevance;
    auto dsv = grad_sv.segment(c * dim, dim);
    Vector adapted =
        ((stats.f.row(c) + relevance * ubm.means.row(c)) / denom).transpose();
    g.f.row(c) = dsv.transpose() / denom;
    g.n[c] = -dsv.dot(adapted) / denom;
  }
  return g;
}

Vector PcaModel::Project(const Vector &x) const {
  if (x.size() != InputDim())
    Fail(ErrorKind::kShape, "PCA input dim {} != {}", x.size(), InputDim());
  return basis.transpose() * (x - mean);
}

Matrix PcaModel::ProjectRows(const Matrix &x) const {
  if (x.cols() != InputDim())
    Fail(ErrorKind::kShape, "PCA input dim {} != {}", x.cols(), InputDim());
  return (x.rowwise() - mean.transpose()) * basis;
}

Vector PcaModel::Reconstruct(const Vector &p) const {
  if (p.size() != OutputDim())
    Fail(ErrorKind::kShape, "PCA output dim {} != {}", p.size(), OutputDim());
  return mean + basis * p;
}

PcaModel FitPca(const Matrix &data, int dim) {
  const int64_t rows = data.rows(), cols = data.cols();
  if (dim < 1 || dim > std::min(rows, cols))
    Fail(ErrorKind::kInput, "PCA dim {} exceeds min(rows={}, cols={})", dim,
         rows, cols);
  CheckFinite(data, "PCA data");
  PcaModel pca;
  pca.mean = data.colwise().mean().transpose();
  const Matrix centered = data.rowwise() - pca.mean.transpose();

  Vector eigval;
  Matrix directions(cols, dim);
  if (rows < cols) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(centered * centered.transpose() /
                                             static_cast<double>(rows));
    eigval = es.eigenvalues();
    for (int j = 0; j < dim; j++) {
      Vector v = centered.transpose() * es.eigenvectors().col(rows - 1 - j);
      double norm = v.norm();
      directions.col(j) = norm > 0.0 ? Vector(v / norm) : Vector::Zero(cols);
    }
  } else {
    Eigen::SelfAdjointEigenSolver<Matrix> es(centered.transpose() * centered /
                                             static_cast<double>(rows));
    eigval = es.eigenvalues();
    for (int j = 0; j < dim; j++)
      directions.col(j) = es.eigenvectors().col(cols - 1 - j);
  }
  const int64_t n_eig = eigval.size();
  const double top = std::max(eigval[n_eig - 1], 0.0);
  const double tol = 1e-12 * std::max(top, 1e-300);

  pca.variances.resize(dim);
  pca.basis.resize(cols, dim);
  int64_t next_unit = 0;
  for (int j = 0; j < dim; j++) {
    double lam = eigval[n_eig - 1 - j];
    Vector v;
    if (lam > tol) {
      v = directions.col(j);
      pca.variances[j] = lam;
    } else {
      // Complete the basis with unit vectors orthogonalized against it.
      pca.variances[j] = 0.0;
      for (;; next_unit++) {
        if (next_unit >= cols)
          Fail(ErrorKind::kNumerical, "could not complete the PCA basis");
        v = Vector::Unit(cols, next_unit);
        for (int i = 0; i < j; i++) v -= pca.basis.col(i).dot(v) * pca.basis.col(i);
        if (v.norm() > 1e-6) {
          next_unit++;
          break;
        }
      }
    }
    // Modified Gram-Schmidt against the columns already accepted.
    for (int i = 0; i < j; i++) v -= pca.basis.col(i).dot(v) * pca.basis.col(i);
    pca.basis.col(j) = v / v.norm();
  }
  return pca;
}

S2iNet CreateS2i(int64_t input_dim, int64_t output_dim,
                 const std::vector<int64_t> &hidden, uint64_t seed) {
  std::vector<int64_t> widths = {input_dim};
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(output_dim);
  std::vector<Activation> acts(hidden.size(), Activation::kTanh);
  acts.push_back(Activation::kLinearLengthNorm);
  return S2iNet{Mlp::Create(widths, acts, seed)};
}

double CosineDistanceLoss(const Matrix &outputs, const Matrix &refs,
                          Matrix *grad_outputs) {
  if (outputs.rows() != refs.rows() || outputs.cols() != refs.cols())
    Fail(ErrorKind::kShape, "outputs {}x{} vs refs {}x{}", outputs.rows(),
         outputs.cols(), refs.rows(), refs.cols());
  if (outputs.rows() == 0) Fail(ErrorKind::kInput, "empty batch");
  const double m = static_cast<double>(outputs.rows());
  double loss = 0.0;
  for (int64_t r = 0; r < outputs.rows(); r++)
    loss += 1.0 - outputs.row(r).dot(refs.row(r));
  if (grad_outputs != nullptr) *grad_outputs = -refs / m;
  return loss / m;
}

S2iNet TrainS2i(const S2iNet &init, const Matrix &inputs, const Matrix &refs,
                const S2iOptions &opts, uint64_t seed, S2iReport *report) {
  if (inputs.rows() != refs.rows())
    Fail(ErrorKind::kInput, "{} inputs for {} references", inputs.rows(),
         refs.rows());
  if (inputs.rows() == 0) Fail(ErrorKind::kInput, "no s2i training data");
  if (inputs.cols() != init.InputDim() || refs.cols() != init.OutputDim())
    Fail(ErrorKind::kShape, "s2i data does not match the network");
  for (int64_t r = 0; r < refs.rows(); r++)
    if (refs.row(r).norm() == 0.0)
      Fail(ErrorKind::kInput, "reference vector {} has zero norm", r);
  if (opts.minibatch < 1) Fail(ErrorKind::kConfig, "minibatch must be >= 1");

  S2iNet s2i = init;
  Vector params = s2i.net.Flatten();
  const int64_t num = inputs.rows();
  std::vector<int64_t> order(num);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  if (report != nullptr) {
    report->epoch_loss.clear();
    report->initial_loss =
        CosineDistanceLoss(Predict(s2i.net, inputs), refs, nullptr);
  }
  for (int epoch = 0; epoch < opts.num_epochs; epoch++) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    int64_t batches = 0;
    for (int64_t start = 0; start < num; start += opts.minibatch) {
      int64_t len = std::min<int64_t>(opts.minibatch, num - start);
      Matrix x(len, inputs.cols()), t(len, refs.cols());
      for (int64_t i = 0; i < len; i++) {
        x.row(i) = inputs.row(order[start + i]);
        t.row(i) = refs.row(order[start + i]);
      }
      ForwardCache cache = Forward(s2i.net, x);
      Matrix d_out;
      loss_sum += CosineDistanceLoss(cache.Output(), t, &d_out);
      batches++;
      Mlp grads = ZeroGradient(s2i.net);
      Backward(s2i.net, cache, d_out, &grads);
      SgdStep(opts.lr, opts.l1_weight, grads.Flatten(), params);
      s2i.net.Unflatten(params);
    }
    if (report != nullptr) report->epoch_loss.push_back(loss_sum / batches);
  }
  if (report != nullptr)
    report->final_loss = CosineDistanceLoss(Predict(s2i.net, inputs), refs, nullptr);
  return s2i;
}

Vector S2iExtract(const PcaModel &pca, const S2iNet &s2i, const Vector &supervector) {
  Matrix in = pca.Project(supervector).transpose();
  return Predict(s2i.net, in).row(0).transpose();
}

}  // namespace e2esv
