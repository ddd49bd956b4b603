// e2esv/io.h

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


#ifndef E2ESV_IO_H_
#define E2ESV_IO_H_

#include <cstdint>
#include <string>
#include <vector>

#include "e2esv/frontend.h"
#include "e2esv/types.h"

namespace e2esv {

std::string ReadFileBytes(const std::string &path);
void WriteFileBytes(const std::string &path, const std::string &bytes);

/**
   Feature files: "SVF1", u32 T, u32 D, then T*D float32 values, row-major,
   all little-endian.  Values are stored in single precision, so a matrix
   read back from a file re-encodes to identical bytes.
*/
std::string EncodeFeatures(const FeatureMatrix &f);
FeatureMatrix DecodeFeatures(const std::string &bytes);
void WriteFeatures(const std::string &path, const FeatureMatrix &f);
FeatureMatrix ReadFeatures(const std::string &path);

struct Tensor {
  std::vector<uint64_t> dims;  // empty for a scalar
  std::vector<double> data;    // row-major

  uint64_t NumElements() const;
};

/**
   An ordered set of named float64 tensors, the unit stored in model files:
   "SVM1", u32 version, u32 count, then per tensor u32 name length, name
   bytes, u8 rank, u64 dims, float64 payload.  Little-endian throughout.
*/
class TensorSet {
 public:
  static constexpr uint32_t kVersion = 1;

  void Add(const std::string &name, Tensor t);
  void AddScalar(const std::string &name, double v);
  void AddVector(const std::string &name, const Vector &v);
  void AddMatrix(const std::string &name, const Matrix &m);

  bool Has(const std::string &name) const;
  const Tensor &Get(const std::string &name) const;
  double GetScalar(const std::string &name) const;
  int64_t GetInt(const std::string &name) const;
  /// Sizes of -1 are not checked.
  Vector GetVector(const std::string &name, int64_t size = -1) const;
  Matrix GetMatrix(const std::string &name, int64_t rows = -1,
                   int64_t cols = -1) const;

  const std::vector<std::string> &names() const { return names_; }
  size_t size() const { return names_.size(); }

 private:
  std::vector<std::string> names_;
  std::vector<Tensor> tensors_;
};

std::string EncodeTensorSet(const TensorSet &set);
TensorSet DecodeTensorSet(const std::string &bytes);
void WriteTensorSet(const std::string &path, const TensorSet &set);
TensorSet ReadTensorSet(const std::string &path);

}  // namespace e2esv

#endif  // E2ESV_IO_H_
