// e2esv/models_io.h

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


#ifndef E2ESV_MODELS_IO_H_
#define E2ESV_MODELS_IO_H_

#include <string>

#include "e2esv/e2e.h"
#include "e2esv/f2s.h"
#include "e2esv/gmm.h"
#include "e2esv/io.h"
#include "e2esv/ivector.h"
#include "e2esv/netcore.h"
#include "e2esv/plda.h"
#include "e2esv/s2i.h"

namespace e2esv {

// Each model is stored as tensors named "<prefix><field>"; the default
// prefixes below are used when a model is saved to a file of its own.

void ToTensors(const DiagGmm &m, TensorSet *set, const std::string &prefix = "ubm.");
void FromTensors(const TensorSet &set, DiagGmm *m, const std::string &prefix = "ubm.");
void ToTensors(const TvModel &m, TensorSet *set, const std::string &prefix = "tv.");
void FromTensors(const TensorSet &set, TvModel *m, const std::string &prefix = "tv.");
void ToTensors(const IvecPrep &m, TensorSet *set, const std::string &prefix = "prep.");
void FromTensors(const TensorSet &set, IvecPrep *m, const std::string &prefix = "prep.");
void ToTensors(const TwoCovPlda &m, TensorSet *set, const std::string &prefix = "plda.");
void FromTensors(const TensorSet &set, TwoCovPlda *m, const std::string &prefix = "plda.");
void ToTensors(const DpldaParams &m, TensorSet *set, const std::string &prefix = "dplda.");
void FromTensors(const TensorSet &set, DpldaParams *m, const std::string &prefix = "dplda.");
void ToTensors(const Mlp &m, TensorSet *set, const std::string &prefix = "mlp.");
void FromTensors(const TensorSet &set, Mlp *m, const std::string &prefix = "mlp.");
void ToTensors(const F2sNet &m, TensorSet *set, const std::string &prefix = "f2s.");
void FromTensors(const TensorSet &set, F2sNet *m, const std::string &prefix = "f2s.");
void ToTensors(const PcaModel &m, TensorSet *set, const std::string &prefix = "pca.");
void FromTensors(const TensorSet &set, PcaModel *m, const std::string &prefix = "pca.");
void ToTensors(const S2iNet &m, TensorSet *set, const std::string &prefix = "s2i.");
void FromTensors(const TensorSet &set, S2iNet *m, const std::string &prefix = "s2i.");
void ToTensors(const E2eSystem &m, TensorSet *set, const std::string &prefix = "e2e.");
void FromTensors(const TensorSet &set, E2eSystem *m, const std::string &prefix = "e2e.");

template <typename Model>
void SaveModel(const std::string &path, const Model &m) {
  TensorSet set;
  ToTensors(m, &set);
  WriteTensorSet(path, set);
}

template <typename Model>
Model LoadModel(const std::string &path) {
  Model m;
  FromTensors(ReadTensorSet(path), &m);
  return m;
}

}  // namespace e2esv

#endif  // E2ESV_MODELS_IO_H_
