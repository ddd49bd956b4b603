// e2esv/frontend.h

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

#ifndef E2ESV_FRONTEND_H_
#define E2ESV_FRONTEND_H_

#include <cstdint>

#include "e2esv/types.h"

namespace e2esv {

/// T x D frames; rows are frames.
struct FeatureMatrix {
  Matrix frames;
  double frame_rate_hz = 100.0;

  int64_t NumFrames() const { return frames.rows(); }
  int64_t Dim() const { return frames.cols(); }
};

struct FrontendOptions {
  double stmvn_window_s = 3.0;
  int half_window = 15;  // context of 2*half_window+1 frames
  int num_dct = 6;
};

/// Number of frames in a window of window_s seconds (at least 1).
int64_t WindowFrames(double window_s, double frame_rate_hz);

/**
   Short-term mean and variance normalization.  Frame t is normalized with
   the mean and standard deviation of the frames in [t - W/2, t - W/2 + W),
   clipped to the utterance, where W = WindowFrames(window_s).  The standard
   deviation is floored at 1e-10, so constant input maps to zeros.
*/
FeatureMatrix SlidingMeanVarNorm(const FeatureMatrix &f, double window_s);

/// Hamming window of the given length (0.54/0.46); length 1 gives {1}.
Vector HammingWindow(int length);

/// n_dct x length matrix whose rows are the first n_dct orthonormal DCT-II
/// basis vectors.
Matrix DctBasis(int n_dct, int length);

/**
   Context expansion.  For each frame and each coefficient d, the trajectory
   of d over frames [t - half_window, t + half_window] (edge frames
   replicated) is Hamming-weighted and projected onto the first num_dct
   DCT-II bases.  Output column d * num_dct + j holds basis j of
   coefficient d.
*/
Matrix ContextExpand(const FeatureMatrix &f, int half_window, int num_dct);

}  // namespace e2esv

#endif  // E2ESV_FRONTEND_H_
