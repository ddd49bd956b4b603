// e2esv/s2i.h

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

#ifndef E2ESV_S2I_H_
#define E2ESV_S2I_H_

#include <cstdint>
#include <vector>

#include "e2esv/f2s.h"
#include "e2esv/gmm.h"
#include "e2esv/netcore.h"
#include "e2esv/types.h"

namespace e2esv {

/**
   Mean-only MAP adaptation: component c of the result is
   (f_c + r * m_c) / (n_c + r), laid out component-major (index c*D + d).
*/
Vector MapSupervector(const DiagGmm &ubm, const SuffStats &stats,
                      double relevance);

/// Backward of MapSupervector: dLoss/d(n, f) from dLoss/dsupervector.
StatsGrad MapSupervectorBackward(const DiagGmm &ubm, const SuffStats &stats,
                                 double relevance, const Vector &grad_sv);

struct PcaModel {
  Vector mean;       // K
  Matrix basis;      // K x P, orthonormal columns
  Vector variances;  // P, variance captured by each column

  int64_t InputDim() const { return basis.rows(); }
  int64_t OutputDim() const { return basis.cols(); }
  Vector Project(const Vector &x) const;
  Matrix ProjectRows(const Matrix &x) const;
  Vector Reconstruct(const Vector &p) const;
};

/**
   Principal directions of the rows of data.  Uses the M x M Gram matrix when
   there are fewer rows than columns.  If the data has rank below dim the
   remaining columns are completed with an orthonormal complement (zero
   captured variance).
*/
PcaModel FitPca(const Matrix &data, int dim);

/// tanh hidden layers and a length-normalized linear output.
struct S2iNet {
  Mlp net;

  int64_t InputDim() const { return net.InputDim(); }
  int64_t OutputDim() const { return net.OutputDim(); }
};

S2iNet CreateS2i(int64_t input_dim, int64_t output_dim,
                 const std::vector<int64_t> &hidden, uint64_t seed);

/// mean_u (1 - out_u . ref_u); optional gradient w.r.t. outputs.
double CosineDistanceLoss(const Matrix &outputs, const Matrix &refs,
                          Matrix *grad_outputs);

struct S2iOptions {
  std::vector<int64_t> hidden = {600, 600};
  double lr = 0.05;
  double l1_weight = 1e-6;
  int minibatch = 64;
  int num_epochs = 50;
};

struct S2iReport {
  double initial_loss = 0.0;  // cosine term on all data before training
  double final_loss = 0.0;
  std::vector<double> epoch_loss;
};

/// SGD with L1 on the cosine distance to unit-norm reference vectors.
S2iNet TrainS2i(const S2iNet &init, const Matrix &inputs, const Matrix &refs,
                const S2iOptions &opts, uint64_t seed,
                S2iReport *report = nullptr);

/// PCA projection followed by the network; unit norm.
Vector S2iExtract(const PcaModel &pca, const S2iNet &s2i, const Vector &supervector);

}  // namespace e2esv

#endif  // E2ESV_S2I_H_
