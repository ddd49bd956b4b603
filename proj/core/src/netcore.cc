// core/src/netcore.cc

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

#include "e2esv/netcore.h"

#include <cmath>
#include <random>

#include "e2esv/error.h"

namespace e2esv {

const char *ActivationName(Activation a) {
  switch (a) {
    case Activation::kSigmoid: return "sigmoid";
    case Activation::kTanh: return "tanh";
    case Activation::kSoftmax: return "softmax";
    case Activation::kLinear: return "linear";
    case Activation::kLinearLengthNorm: return "linear_then_lengthnorm";
  }
  return "?";
}

Activation ActivationFromName(const std::string &name) {
  for (Activation a : {Activation::kSigmoid, Activation::kTanh,
                       Activation::kSoftmax, Activation::kLinear,
                       Activation::kLinearLengthNorm})
    if (name == ActivationName(a)) return a;
  Fail(ErrorKind::kFormat, "unknown activation '{}'", name);
}

Mlp::Mlp(std::vector<AffineLayer> layers) : layers_(std::move(layers)) {
  Validate();
}

Mlp Mlp::Create(const std::vector<int64_t> &widths,
                const std::vector<Activation> &activations, uint64_t seed) {
  if (widths.size() < 2 || activations.size() + 1 != widths.size())
    Fail(ErrorKind::kShape, "need widths.size() == activations.size() + 1 >= 2");
  std::mt19937_64 rng(seed);
  std::vector<AffineLayer> layers;
  for (size_t l = 0; l + 1 < widths.size(); l++) {
    int64_t in = widths[l], out = widths[l + 1];
    if (in < 1 || out < 1) Fail(ErrorKind::kShape, "layer widths must be >= 1");
    double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    AffineLayer layer;
    layer.weight.resize(out, in);
    for (int64_t r = 0; r < out; r++)
      for (int64_t c = 0; c < in; c++) layer.weight(r, c) = dist(rng);
    layer.bias = Vector::Zero(out);
    layer.activation = activations[l];
    layers.push_back(std::move(layer));
  }
  return Mlp(std::move(layers));
}

int64_t Mlp::InputDim() const {
  return layers_.empty() ? 0 : layers_.front().InDim();
}

int64_t Mlp::OutputDim() const {
  return layers_.empty() ? 0 : layers_.back().OutDim();
}

int64_t Mlp::NumParams() const {
  int64_t n = 0;
  for (const auto &l : layers_) n += l.weight.size() + l.bias.size();
  return n;
}

Vector Mlp::Flatten() const {
  Vector flat(NumParams());
  int64_t pos = 0;
  for (const auto &l : layers_) {
    for (int64_t r = 0; r < l.weight.rows(); r++)
      for (int64_t c = 0; c < l.weight.cols(); c++) flat[pos++] = l.weight(r, c);
    flat.segment(pos, l.bias.size()) = l.bias;
    pos += l.bias.size();
  }
  return flat;
}

void Mlp::Unflatten(const Eigen::Ref<const Vector> &flat) {
  if (flat.size() != NumParams())
    Fail(ErrorKind::kShape, "flat size {} != {} parameters", flat.size(),
         NumParams());
  int64_t pos = 0;
  for (auto &l : layers_) {
    for (int64_t r = 0; r < l.weight.rows(); r++)
      for (int64_t c = 0; c < l.weight.cols(); c++) l.weight(r, c) = flat[pos++];
    l.bias = flat.segment(pos, l.bias.size());
    pos += l.bias.size();
  }
}

void Mlp::Validate() const {
  if (layers_.empty()) Fail(ErrorKind::kShape, "network has no layers");
  for (size_t l = 0; l < layers_.size(); l++) {
    const AffineLayer &layer = layers_[l];
    if (layer.bias.size() != layer.OutDim())
      Fail(ErrorKind::kShape, "layer {}: bias size {} != out dim {}", l,
           layer.bias.size(), layer.OutDim());
    if (l > 0 && layer.InDim() != layers_[l - 1].OutDim())
      Fail(ErrorKind::kShape, "layer {}: in dim {} != previous out dim {}", l,
           layer.InDim(), layers_[l - 1].OutDim());
    if (layer.activation == Activation::kSoftmax && l + 1 != layers_.size())
      Fail(ErrorKind::kShape, "softmax only allowed on the final layer");
    if (!layer.weight.allFinite() || !layer.bias.allFinite())
      Fail(ErrorKind::kModel, "layer {} has non-finite parameters", l);
  }
}

Mlp ZeroGradient(const Mlp &net) {
  std::vector<AffineLayer> layers = net.layers();
  for (auto &l : layers) {
    l.weight.setZero();
    l.bias.setZero();
  }
  return Mlp(std::move(layers));
}

int64_t ForwardCache::Footprint() const {
  int64_t n = 0;
  for (const auto &m : outputs) n += m.size();
  for (const auto &v : norms) n += v.size();
  return n;
}

namespace {

// Applies the activation in place.  For length norm, *norms receives the
// pre-normalization row norms.
void Activate(Activation act, Matrix *z, Vector *norms) {
  switch (act) {
    case Activation::kSigmoid:
      *z = z->unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
      break;
    case Activation::kTanh:
      *z = z->array().tanh().matrix();
      break;
    case Activation::kSoftmax:
      for (int64_t r = 0; r < z->rows(); r++) {
        double mx = z->row(r).maxCoeff();
        z->row(r) = (z->row(r).array() - mx).exp().matrix();
        z->row(r) /= z->row(r).sum();
      }
      break;
    case Activation::kLinear:
      break;
    case Activation::kLinearLengthNorm:
      norms->resize(z->rows());
      for (int64_t r = 0; r < z->rows(); r++) {
        double n = z->row(r).norm();
        (*norms)[r] = n;
        if (n > 0.0) z->row(r) /= n;
        else z->row(r).setZero();
      }
      break;
  }
}

Matrix Affine(const AffineLayer &layer, const Matrix &x) {
  Matrix z = x * layer.weight.transpose();
  z.rowwise() += layer.bias.transpose();
  return z;
}

void CheckInput(const Mlp &net, const Matrix &input) {
  if (net.NumLayers() == 0) Fail(ErrorKind::kShape, "empty network");
  if (input.rows() < 1) Fail(ErrorKind::kShape, "empty input batch");
  if (input.cols() != net.InputDim())
    Fail(ErrorKind::kShape, "input width {} != network input dim {}",
         input.cols(), net.InputDim());
  CheckFinite(input, "network input");
}

}  // namespace

ForwardCache Forward(const Mlp &net, const Matrix &input) {
  CheckInput(net, input);
  ForwardCache cache;
  cache.outputs.reserve(net.NumLayers() + 1);
  cache.norms.resize(net.NumLayers());
  cache.outputs.push_back(input);
  for (size_t l = 0; l < net.NumLayers(); l++) {
    Matrix z = Affine(net.layer(l), cache.outputs.back());
    Activate(net.layer(l).activation, &z, &cache.norms[l]);
    cache.outputs.push_back(std::move(z));
  }
  return cache;
}

Matrix Predict(const Mlp &net, const Matrix &input) {
  CheckInput(net, input);
  Matrix x = input;
  Vector norms;
  for (size_t l = 0; l < net.NumLayers(); l++) {
    Matrix z = Affine(net.layer(l), x);
    Activate(net.layer(l).activation, &z, &norms);
    x = std::move(z);
  }
  return x;
}

void Backward(const Mlp &net, const ForwardCache &cache,
              const Matrix &grad_output, Mlp *grads, Matrix *grad_input,
              bool grad_is_preactivation) {
  const size_t num_layers = net.NumLayers();
  if (cache.outputs.size() != num_layers + 1 || cache.norms.size() != num_layers)
    Fail(ErrorKind::kState, "forward cache has {} outputs for a {}-layer net",
         cache.outputs.size(), num_layers);
  const int64_t batch = cache.outputs[0].rows();
  for (size_t l = 0; l < num_layers; l++) {
    if (cache.outputs[l].cols() != net.layer(l).InDim() ||
        cache.outputs[l + 1].cols() != net.layer(l).OutDim() ||
        cache.outputs[l + 1].rows() != batch)
      Fail(ErrorKind::kState, "forward cache inconsistent with layer {}", l);
  }
  if (grads == nullptr || grads->NumLayers() != num_layers)
    Fail(ErrorKind::kShape, "gradient container does not match network");
  if (grad_output.rows() != batch || grad_output.cols() != net.OutputDim())
    Fail(ErrorKind::kShape, "grad_output is {}x{}, expected {}x{}",
         grad_output.rows(), grad_output.cols(), batch, net.OutputDim());

  Matrix d_out = grad_output;
  for (size_t li = num_layers; li-- > 0;) {
    const AffineLayer &layer = net.layer(li);
    const Matrix &y = cache.outputs[li + 1];
    Matrix dz;
    if (li + 1 == num_layers && grad_is_preactivation) {
      dz = std::move(d_out);
    } else {
      switch (layer.activation) {
        case Activation::kSigmoid:
          dz = (d_out.array() * y.array() * (1.0 - y.array())).matrix();
          break;
        case Activation::kTanh:
          dz = (d_out.array() * (1.0 - y.array().square())).matrix();
          break;
        case Activation::kSoftmax: {
          Vector dots = (d_out.array() * y.array()).rowwise().sum().matrix();
          dz = (y.array() * (d_out.colwise() - dots).array()).matrix();
          break;
        }
        case Activation::kLinear:
          dz = std::move(d_out);
          break;
        case Activation::kLinearLengthNorm: {
          const Vector &norms = cache.norms[li];
          dz.resize(batch, layer.OutDim());
          for (int64_t r = 0; r < batch; r++) {
            if (norms[r] > 0.0) {
              double proj = y.row(r).dot(d_out.row(r));
              dz.row(r) = (d_out.row(r) - proj * y.row(r)) / norms[r];
            } else {
              dz.row(r).setZero();
            }
          }
          break;
        }
      }
    }
    AffineLayer &g = grads->mutable_layers()[li];
    g.weight.noalias() += dz.transpose() * cache.outputs[li];
    g.bias += dz.colwise().sum().transpose();
    if (li > 0 || grad_input != nullptr) {
      d_out = dz * layer.weight;
    }
  }
  if (grad_input != nullptr) *grad_input = std::move(d_out);
}

void SgdStep(double lr, double l1_weight, const Eigen::Ref<const Vector> &grads,
             Eigen::Ref<Vector> params) {
  if (!(lr > 0.0) || !(l1_weight >= 0.0))
    Fail(ErrorKind::kConfig, "SGD needs lr > 0 and l1_weight >= 0");
  if (grads.size() != params.size())
    Fail(ErrorKind::kShape, "gradient size {} != parameter size {}",
         grads.size(), params.size());
  if (!grads.allFinite())
    Fail(ErrorKind::kOptimizer, "non-finite gradient in SGD step");
  for (int64_t i = 0; i < params.size(); i++) {
    double p = params[i];
    double sign = (p > 0.0) - (p < 0.0);
    params[i] = p - lr * (grads[i] + l1_weight * sign);
  }
}

AdamState::AdamState(int64_t num_params, const AdamOptions &opts)
    : opts_(opts), m_(Vector::Zero(num_params)), v_(Vector::Zero(num_params)) {}

void AdamState::Step(const Eigen::Ref<const Vector> &grads,
                     Eigen::Ref<Vector> params) {
  if (grads.size() != m_.size() || params.size() != m_.size())
    Fail(ErrorKind::kShape, "Adam state has {} entries; got {} grads, {} params",
         m_.size(), grads.size(), params.size());
  if (!grads.allFinite())
    Fail(ErrorKind::kOptimizer, "non-finite gradient in Adam step");
  step_++;
  const double b1 = opts_.beta1, b2 = opts_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  for (int64_t i = 0; i < m_.size(); i++) {
    m_[i] = b1 * m_[i] + (1.0 - b1) * grads[i];
    v_[i] = b2 * v_[i] + (1.0 - b2) * grads[i] * grads[i];
    double m_hat = m_[i] / c1;
    double v_hat = v_[i] / c2;
    params[i] -= opts_.lr * m_hat / (std::sqrt(v_hat) + opts_.epsilon);
  }
}

void ParamSnapshot::SetWeight(double w) {
  for (auto &g : groups) g.weight = w;
}

void ParamSnapshot::Validate() const {
  int64_t pos = 0;
  for (const auto &g : groups) {
    if (g.offset != pos || g.size < 0)
      Fail(ErrorKind::kShape, "snapshot group '{}' does not tile parameters",
           g.name);
    pos += g.size;
  }
  if (pos != values.size())
    Fail(ErrorKind::kShape, "snapshot groups cover {} of {} parameters", pos,
         values.size());
}

double PenaltyToSnapshot(const ParamSnapshot &snapshot,
                         const Eigen::Ref<const Vector> &params, Vector *grad) {
  snapshot.Validate();
  if (params.size() != snapshot.values.size())
    Fail(ErrorKind::kShape, "parameters ({}) do not match snapshot ({})",
         params.size(), snapshot.values.size());
  if (grad != nullptr) grad->setZero(params.size());
  double penalty = 0.0;
  for (const auto &g : snapshot.groups) {
    if (g.weight == 0.0) continue;
    auto diff = (params.segment(g.offset, g.size) -
                 snapshot.values.segment(g.offset, g.size));
    penalty += g.weight * diff.squaredNorm();
    if (grad != nullptr) grad->segment(g.offset, g.size) = 2.0 * g.weight * diff;
  }
  return penalty;
}

}  // namespace e2esv
