// e2esv/netcore.h

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

#ifndef E2ESV_NETCORE_H_
#define E2ESV_NETCORE_H_

#include <cstdint>
#include <string>
#include <vector>

#include "e2esv/types.h"

namespace e2esv {

enum class Activation {
  kSigmoid,
  kTanh,
  kSoftmax,
  kLinear,
  // Affine output followed by row-wise Euclidean normalization.
  kLinearLengthNorm,
};

const char *ActivationName(Activation a);
Activation ActivationFromName(const std::string &name);

struct AffineLayer {
  Matrix weight;  // out x in
  Vector bias;    // out
  Activation activation = Activation::kLinear;

  int64_t InDim() const { return weight.cols(); }
  int64_t OutDim() const { return weight.rows(); }
};

/**
   A feed-forward stack of affine layers.  Rows of every input matrix are
   independent examples.  The same class doubles as the container for
   parameter gradients (see ZeroGradient()), so that optimizers can treat
   both through Flatten() / Unflatten().
*/
class Mlp {
 public:
  Mlp() = default;
  explicit Mlp(std::vector<AffineLayer> layers);

  /// widths = {in, hidden..., out}; activations has widths.size()-1 entries.
  /// Weights are uniform in +-sqrt(6/(in+out)), biases zero.
  static Mlp Create(const std::vector<int64_t> &widths,
                    const std::vector<Activation> &activations,
                    uint64_t seed);

  const std::vector<AffineLayer> &layers() const { return layers_; }
  std::vector<AffineLayer> &mutable_layers() { return layers_; }
  const AffineLayer &layer(size_t i) const { return layers_[i]; }
  size_t NumLayers() const { return layers_.size(); }
  int64_t InputDim() const;
  int64_t OutputDim() const;
  int64_t NumParams() const;

  /// Layer by layer: weight (row-major), then bias.
  Vector Flatten() const;
  void Unflatten(const Eigen::Ref<const Vector> &flat);

  /// Throws if dimensions do not chain, softmax is not last, or parameters
  /// are non-finite.
  void Validate() const;

 private:
  std::vector<AffineLayer> layers_;
};

/// Same shape as net, all zeros.
Mlp ZeroGradient(const Mlp &net);

/// Everything backward needs.  outputs[0] is the input, outputs[l+1] the
/// output of layer l.  norms[l] holds the pre-normalization row norms of a
/// length-norm layer (empty for other activations).
struct ForwardCache {
  std::vector<Matrix> outputs;
  std::vector<Vector> norms;

  const Matrix &Output() const { return outputs.back(); }
  /// Number of doubles held.
  int64_t Footprint() const;
};

ForwardCache Forward(const Mlp &net, const Matrix &input);

/// Output only; does not retain intermediate activations.
Matrix Predict(const Mlp &net, const Matrix &input);

/**
   Backpropagates grad_output through the cached forward pass.  Parameter
   gradients are ADDED to *grads (which must have the shape of net).  If
   grad_input is non-NULL it receives dLoss/dInput.

   If grad_is_preactivation is true, grad_output is taken to be the gradient
   w.r.t. the affine output of the final layer, skipping its activation
   Jacobian.  This is how softmax + cross-entropy is fused.
*/
void Backward(const Mlp &net, const ForwardCache &cache,
              const Matrix &grad_output, Mlp *grads,
              Matrix *grad_input = nullptr,
              bool grad_is_preactivation = false);

/// params <- params - lr * (grads + l1_weight * sign(params)), sign(0) = 0.
void SgdStep(double lr, double l1_weight, const Eigen::Ref<const Vector> &grads,
             Eigen::Ref<Vector> params);

struct AdamOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class AdamState {
 public:
  AdamState() = default;
  AdamState(int64_t num_params, const AdamOptions &opts);

  /// One bias-corrected Adam update; increments the step counter.
  void Step(const Eigen::Ref<const Vector> &grads, Eigen::Ref<Vector> params);

  int64_t step() const { return step_; }
  const AdamOptions &options() const { return opts_; }
  void set_lr(double lr) { opts_.lr = lr; }
  const Vector &first_moment() const { return m_; }
  const Vector &second_moment() const { return v_; }

 private:
  AdamOptions opts_;
  Vector m_;
  Vector v_;
  int64_t step_ = 0;
};

/// A contiguous slice of a flat parameter vector with its own penalty weight.
struct ParamGroup {
  std::string name;
  int64_t offset = 0;
  int64_t size = 0;
  double weight = 0.0;
};

/// Reference copy of trainable parameters, used to regularize training
/// toward the initial models.
struct ParamSnapshot {
  Vector values;
  std::vector<ParamGroup> groups;

  /// Sets every group's weight to w.
  void SetWeight(double w);
  /// Throws kShape unless groups tile values exactly.
  void Validate() const;
};

/// Returns sum_g weight_g * |theta_g - theta0_g|^2; sets *grad (if non-NULL)
/// to 2 * weight_g * (theta_g - theta0_g).
double PenaltyToSnapshot(const ParamSnapshot &snapshot,
                         const Eigen::Ref<const Vector> &params,
                         Vector *grad);

}  // namespace e2esv

#endif  // E2ESV_NETCORE_H_
