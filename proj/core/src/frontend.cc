// core/src/frontend.cc

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

#include "e2esv/frontend.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "e2esv/error.h"

namespace e2esv {

int64_t WindowFrames(double window_s, double frame_rate_hz) {
  if (!(window_s > 0.0) || !(frame_rate_hz > 0.0))
    Fail(ErrorKind::kConfig, "window and frame rate must be positive");
  return std::max<int64_t>(1, std::llround(window_s * frame_rate_hz));
}

FeatureMatrix SlidingMeanVarNorm(const FeatureMatrix &f, double window_s) {
  const int64_t num_frames = f.NumFrames(), dim = f.Dim();
  if (num_frames < 1 || dim < 1)
    Fail(ErrorKind::kInput, "empty feature matrix");
  CheckFinite(f.frames, "features");
  const int64_t window = WindowFrames(window_s, f.frame_rate_hz);

  // Statistics are taken on x - x_t so that a constant window gives an
  // exact zero instead of rounding residue.
  FeatureMatrix out;
  out.frame_rate_hz = f.frame_rate_hz;
  out.frames.resize(num_frames, dim);
  for (int64_t t = 0; t < num_frames; t++) {
    int64_t begin = std::max<int64_t>(0, t - window / 2);
    int64_t end = std::min<int64_t>(num_frames, t - window / 2 + window);
    double count = static_cast<double>(end - begin);
    for (int64_t d = 0; d < dim; d++) {
      const double center = f.frames(t, d);
      double shifted_mean = 0.0;
      for (int64_t i = begin; i < end; i++) shifted_mean += f.frames(i, d) - center;
      shifted_mean /= count;
      double var = 0.0;
      for (int64_t i = begin; i < end; i++) {
        double dev = f.frames(i, d) - center - shifted_mean;
        var += dev * dev;
      }
      var /= count;
      double sd = std::max(std::sqrt(var), 1e-10);
      out.frames(t, d) = -shifted_mean / sd;
    }
  }
  return out;
}

Vector HammingWindow(int length) {
  if (length < 1) Fail(ErrorKind::kConfig, "window length must be >= 1");
  Vector w(length);
  if (length == 1) {
    w[0] = 1.0;
    return w;
  }
  for (int i = 0; i < length; i++)
    w[i] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * i / (length - 1));
  return w;
}

Matrix DctBasis(int n_dct, int length) {
  if (n_dct < 1 || n_dct > length)
    Fail(ErrorKind::kConfig, "need 1 <= n_dct <= window length");
  Matrix basis(n_dct, length);
  for (int j = 0; j < n_dct; j++) {
    double scale = std::sqrt((j == 0 ? 1.0 : 2.0) / length);
    for (int i = 0; i < length; i++)
      basis(j, i) = scale * std::cos(std::numbers::pi * j * (i + 0.5) / length);
  }
  return basis;
}

Matrix ContextExpand(const FeatureMatrix &f, int half_window, int num_dct) {
  if (half_window < 0) Fail(ErrorKind::kConfig, "half_window must be >= 0");
  const int length = 2 * half_window + 1;
  if (num_dct < 1 || num_dct > length)
    Fail(ErrorKind::kConfig, "need 1 <= num_dct <= {}", length);
  const int64_t num_frames = f.NumFrames(), dim = f.Dim();
  if (num_frames < 1 || dim < 1)
    Fail(ErrorKind::kInput, "empty feature matrix");

  // kernel(j, i) = hamming[i] * basis_j[i]
  Matrix kernel = DctBasis(num_dct, length) * HammingWindow(length).asDiagonal();

  Matrix out = Matrix::Zero(num_frames, dim * num_dct);
  Matrix context(length, dim);
  for (int64_t t = 0; t < num_frames; t++) {
    for (int i = 0; i < length; i++) {
      int64_t src = std::clamp<int64_t>(t + i - half_window, 0, num_frames - 1);
      context.row(i) = f.frames.row(src);
    }
    Matrix proj = kernel * context;  // num_dct x dim
    for (int64_t d = 0; d < dim; d++)
      out.row(t).segment(d * num_dct, num_dct) = proj.col(d).transpose();
  }
  return out;
}

}  // namespace e2esv
