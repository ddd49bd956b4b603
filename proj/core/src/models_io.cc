// core/src/models_io.cc

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


#include "e2esv/models_io.h"

#include "e2esv/error.h"

namespace e2esv {

void ToTensors(const DiagGmm &m, TensorSet *set, const std::string &prefix) {
  set->AddVector(prefix + "weights", m.weights);
  set->AddMatrix(prefix + "means", m.means);
  set->AddMatrix(prefix + "vars", m.vars);
}

void FromTensors(const TensorSet &set, DiagGmm *m, const std::string &prefix) {
  m->weights = set.GetVector(prefix + "weights");
  m->means = set.GetMatrix(prefix + "means", m->weights.size());
  m->vars = set.GetMatrix(prefix + "vars", m->means.rows(), m->means.cols());
  m->Validate();
}

void ToTensors(const TvModel &m, TensorSet *set, const std::string &prefix) {
  set->AddMatrix(prefix + "t", m.t);
}

void FromTensors(const TensorSet &set, TvModel *m, const std::string &prefix) {
  m->t = set.GetMatrix(prefix + "t");
  CheckFinite(m->t, "total variability matrix");
}

void ToTensors(const IvecPrep &m, TensorSet *set, const std::string &prefix) {
  set->AddVector(prefix + "global_mean", m.global_mean);
  set->AddMatrix(prefix + "lda", m.lda);
}

void FromTensors(const TensorSet &set, IvecPrep *m, const std::string &prefix) {
  m->global_mean = set.GetVector(prefix + "global_mean");
  m->lda = set.GetMatrix(prefix + "lda", m->global_mean.size());
}

void ToTensors(const TwoCovPlda &m, TensorSet *set, const std::string &prefix) {
  set->AddVector(prefix + "mu", m.mu);
  set->AddMatrix(prefix + "between", m.between);
  set->AddMatrix(prefix + "within", m.within);
}

void FromTensors(const TensorSet &set, TwoCovPlda *m, const std::string &prefix) {
  m->mu = set.GetVector(prefix + "mu");
  const int64_t dim = m->mu.size();
  m->between = set.GetMatrix(prefix + "between", dim, dim);
  m->within = set.GetMatrix(prefix + "within", dim, dim);
  m->Validate();
}

void ToTensors(const DpldaParams &m, TensorSet *set, const std::string &prefix) {
  set->AddMatrix(prefix + "lambda", m.lambda);
  set->AddMatrix(prefix + "gamma", m.gamma);
  set->AddVector(prefix + "c", m.c);
  set->AddScalar(prefix + "k", m.k);
}

void FromTensors(const TensorSet &set, DpldaParams *m, const std::string &prefix) {
  m->c = set.GetVector(prefix + "c");
  const int64_t dim = m->c.size();
  m->lambda = set.GetMatrix(prefix + "lambda", dim, dim);
  m->gamma = set.GetMatrix(prefix + "gamma", dim, dim);
  m->k = set.GetScalar(prefix + "k");
}

void ToTensors(const Mlp &m, TensorSet *set, const std::string &prefix) {
  set->AddScalar(prefix + "num_layers", static_cast<double>(m.NumLayers()));
  for (size_t i = 0; i < m.NumLayers(); i++) {
    const std::string p = prefix + std::to_string(i) + ".";
    set->AddScalar(p + "activation", static_cast<double>(m.layer(i).activation));
    set->AddMatrix(p + "weight", m.layer(i).weight);
    set->AddVector(p + "bias", m.layer(i).bias);
  }
}

void FromTensors(const TensorSet &set, Mlp *m, const std::string &prefix) {
  const int64_t num_layers = set.GetInt(prefix + "num_layers");
  if (num_layers < 1 || num_layers > 1000)
    Fail(ErrorKind::kFormat, "'{}num_layers' = {} is out of range", prefix,
         num_layers);
  std::vector<AffineLayer> layers(num_layers);
  for (int64_t i = 0; i < num_layers; i++) {
    const std::string p = prefix + std::to_string(i) + ".";
    int64_t act = set.GetInt(p + "activation");
    if (act < 0 || act > static_cast<int64_t>(Activation::kLinearLengthNorm))
      Fail(ErrorKind::kFormat, "'{}activation' = {} is not an activation", p, act);
    layers[i].activation = static_cast<Activation>(act);
    layers[i].weight = set.GetMatrix(p + "weight");
    layers[i].bias = set.GetVector(p + "bias", layers[i].weight.rows());
  }
  *m = Mlp(std::move(layers));
  m->Validate();
}

void ToTensors(const F2sNet &m, TensorSet *set, const std::string &prefix) {
  ToTensors(m.net, set, prefix);
}

void FromTensors(const TensorSet &set, F2sNet *m, const std::string &prefix) {
  FromTensors(set, &m->net, prefix);
  if (m->net.layers().back().activation != Activation::kSoftmax)
    Fail(ErrorKind::kFormat, "f2s network must end in a softmax");
}

void ToTensors(const PcaModel &m, TensorSet *set, const std::string &prefix) {
  set->AddVector(prefix + "mean", m.mean);
  set->AddMatrix(prefix + "basis", m.basis);
  set->AddVector(prefix + "variances", m.variances);
}

void FromTensors(const TensorSet &set, PcaModel *m, const std::string &prefix) {
  m->mean = set.GetVector(prefix + "mean");
  m->basis = set.GetMatrix(prefix + "basis", m->mean.size());
  m->variances = set.GetVector(prefix + "variances", m->basis.cols());
}

void ToTensors(const S2iNet &m, TensorSet *set, const std::string &prefix) {
  ToTensors(m.net, set, prefix);
}

void FromTensors(const TensorSet &set, S2iNet *m, const std::string &prefix) {
  FromTensors(set, &m->net, prefix);
  if (m->net.layers().back().activation != Activation::kLinearLengthNorm)
    Fail(ErrorKind::kFormat, "s2i network must end in a length-normalized layer");
}

void ToTensors(const E2eSystem &m, TensorSet *set, const std::string &prefix) {
  set->AddScalar(prefix + "stmvn_window_s", m.frontend.stmvn_window_s);
  set->AddScalar(prefix + "half_window", m.frontend.half_window);
  set->AddScalar(prefix + "num_dct", m.frontend.num_dct);
  set->AddScalar(prefix + "relevance", m.relevance);
  ToTensors(m.f2s, set, prefix + "f2s.");
  ToTensors(m.ubm, set, prefix + "ubm.");
  ToTensors(m.pca, set, prefix + "pca.");
  ToTensors(m.s2i, set, prefix + "s2i.");
  ToTensors(m.dplda, set, prefix + "dplda.");
  set->AddVector(prefix + "snapshot.values", m.snapshot.values);
  for (const ParamGroup &g : m.snapshot.groups)
    set->AddScalar(prefix + "snapshot.weight." + g.name, g.weight);
}

void FromTensors(const TensorSet &set, E2eSystem *m, const std::string &prefix) {
  m->frontend.stmvn_window_s = set.GetScalar(prefix + "stmvn_window_s");
  m->frontend.half_window = static_cast<int>(set.GetInt(prefix + "half_window"));
  m->frontend.num_dct = static_cast<int>(set.GetInt(prefix + "num_dct"));
  m->relevance = set.GetScalar(prefix + "relevance");
  FromTensors(set, &m->f2s, prefix + "f2s.");
  FromTensors(set, &m->ubm, prefix + "ubm.");
  FromTensors(set, &m->pca, prefix + "pca.");
  FromTensors(set, &m->s2i, prefix + "s2i.");
  FromTensors(set, &m->dplda, prefix + "dplda.");
  const int64_t nf = m->NumF2sParams(), ns = m->NumS2iParams();
  m->snapshot.values = set.GetVector(prefix + "snapshot.values", m->NumTrainable());
  m->snapshot.groups = {
      {"f2s", 0, nf, set.GetScalar(prefix + "snapshot.weight.f2s")},
      {"s2i", nf, ns, set.GetScalar(prefix + "snapshot.weight.s2i")},
      {"dplda", nf + ns, m->dplda.NumParams(),
       set.GetScalar(prefix + "snapshot.weight.dplda")}};
  m->Validate();
}

}  // namespace e2esv
