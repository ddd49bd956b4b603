// core/src/io.cc

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


#include "e2esv/io.h"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

#include "e2esv/error.h"

namespace e2esv {

namespace {

template <typename T>
void PutLe(std::string *out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big)
    std::reverse(buf, buf + sizeof(T));
  out->append(buf, sizeof(T));
}

// Sequential little-endian reader that reports byte offsets on failure.
class Reader {
 public:
  Reader(const std::string &bytes, const char *what)
      : bytes_(bytes), what_(what) {}

  void Need(uint64_t n, const char *field) const {
    if (n > bytes_.size() - pos_)
      Fail(ErrorKind::kFormat,
           "{}: truncated at byte {} reading {}: need {} bytes, have {}", what_,
           pos_, field, n, bytes_.size() - pos_);
  }

  template <typename T>
  T Get(const char *field) {
    Need(sizeof(T), field);
    char buf[sizeof(T)];
    std::memcpy(buf, bytes_.data() + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big)
      std::reverse(buf, buf + sizeof(T));
    T v;
    std::memcpy(&v, buf, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

  std::string GetBytes(uint64_t n, const char *field) {
    Need(n, field);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  void ExpectMagic(const char *magic) {
    if (bytes_.empty())
      Fail(ErrorKind::kFormat, "{}: empty input, expected magic '{}'", what_, magic);
    std::string m = GetBytes(4, "magic");
    if (m != magic)
      Fail(ErrorKind::kFormat, "{}: bad magic at byte 0, expected '{}'", what_,
           magic);
  }

  void ExpectEnd() const {
    if (pos_ != bytes_.size())
      Fail(ErrorKind::kFormat, "{}: {} unexpected trailing bytes at byte {}",
           what_, bytes_.size() - pos_, pos_);
  }

  size_t pos() const { return pos_; }
  size_t Remaining() const { return bytes_.size() - pos_; }

 private:
  const std::string &bytes_;
  const char *what_;
  size_t pos_ = 0;
};

}  // namespace

std::string ReadFileBytes(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorKind::kInput, "cannot open '{}' for reading", path);
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

void WriteFileBytes(const std::string &path, const std::string &bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) Fail(ErrorKind::kInput, "cannot open '{}' for writing", path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) Fail(ErrorKind::kInput, "failed writing '{}'", path);
}

std::string EncodeFeatures(const FeatureMatrix &f) {
  const uint64_t limit = std::numeric_limits<uint32_t>::max();
  if (static_cast<uint64_t>(f.NumFrames()) > limit ||
      static_cast<uint64_t>(f.Dim()) > limit)
    Fail(ErrorKind::kFormat, "feature matrix {}x{} too large for the format",
         f.NumFrames(), f.Dim());
  std::string out = "SVF1";
  out.reserve(12 + 4 * f.frames.size());
  PutLe<uint32_t>(&out, static_cast<uint32_t>(f.NumFrames()));
  PutLe<uint32_t>(&out, static_cast<uint32_t>(f.Dim()));
  for (int64_t t = 0; t < f.NumFrames(); t++)
    for (int64_t d = 0; d < f.Dim(); d++)
      PutLe<float>(&out, static_cast<float>(f.frames(t, d)));
  return out;
}

FeatureMatrix DecodeFeatures(const std::string &bytes) {
  Reader r(bytes, "feature file");
  r.ExpectMagic("SVF1");
  const uint64_t rows = r.Get<uint32_t>("frame count");
  const uint64_t cols = r.Get<uint32_t>("dimension");
  const uint64_t payload = rows * cols * 4;
  if (rows * cols > static_cast<uint64_t>(std::numeric_limits<int32_t>::max()))
    Fail(ErrorKind::kFormat, "feature file: {}x{} at byte 4 overflows", rows, cols);
  if (payload != r.Remaining())
    Fail(ErrorKind::kFormat,
         "feature file: header at byte 4 declares {}x{} ({} payload bytes) but "
         "{} bytes follow at byte {}",
         rows, cols, payload, r.Remaining(), r.pos());
  FeatureMatrix f;
  f.frames.resize(static_cast<int64_t>(rows), static_cast<int64_t>(cols));
  for (uint64_t t = 0; t < rows; t++)
    for (uint64_t d = 0; d < cols; d++)
      f.frames(t, d) = r.Get<float>("sample");
  return f;
}

void WriteFeatures(const std::string &path, const FeatureMatrix &f) {
  WriteFileBytes(path, EncodeFeatures(f));
}

FeatureMatrix ReadFeatures(const std::string &path) {
  try {
    return DecodeFeatures(ReadFileBytes(path));
  } catch (const Error &e) {
    if (e.kind() != ErrorKind::kFormat) throw;
    throw Error(e.kind(), path + ": " + e.what());
  }
}

uint64_t Tensor::NumElements() const {
  uint64_t n = 1;
  for (uint64_t d : dims) n *= d;
  return n;
}

void TensorSet::Add(const std::string &name, Tensor t) {
  if (name.empty()) Fail(ErrorKind::kFormat, "tensor names must be non-empty");
  if (Has(name)) Fail(ErrorKind::kFormat, "duplicate tensor name '{}'", name);
  if (t.dims.size() > 255)
    Fail(ErrorKind::kFormat, "tensor '{}' has rank {} > 255", name, t.dims.size());
  if (t.NumElements() != t.data.size())
    Fail(ErrorKind::kFormat, "tensor '{}': shape holds {} values, data has {}",
         name, t.NumElements(), t.data.size());
  names_.push_back(name);
  tensors_.push_back(std::move(t));
}

void TensorSet::AddScalar(const std::string &name, double v) {
  Add(name, Tensor{{}, {v}});
}

void TensorSet::AddVector(const std::string &name, const Vector &v) {
  Add(name, Tensor{{static_cast<uint64_t>(v.size())},
                   std::vector<double>(v.data(), v.data() + v.size())});
}

void TensorSet::AddMatrix(const std::string &name, const Matrix &m) {
  Tensor t{{static_cast<uint64_t>(m.rows()), static_cast<uint64_t>(m.cols())}, {}};
  t.data.reserve(m.size());
  for (int64_t i = 0; i < m.rows(); i++)
    for (int64_t j = 0; j < m.cols(); j++) t.data.push_back(m(i, j));
  Add(name, std::move(t));
}

bool TensorSet::Has(const std::string &name) const {
  return std::find(names_.begin(), names_.end(), name) != names_.end();
}

const Tensor &TensorSet::Get(const std::string &name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) Fail(ErrorKind::kFormat, "missing tensor '{}'", name);
  return tensors_[it - names_.begin()];
}

double TensorSet::GetScalar(const std::string &name) const {
  const Tensor &t = Get(name);
  if (!t.dims.empty())
    Fail(ErrorKind::kFormat, "tensor '{}' has rank {}, expected a scalar", name,
         t.dims.size());
  return t.data[0];
}

int64_t TensorSet::GetInt(const std::string &name) const {
  double v = GetScalar(name);
  if (v != static_cast<double>(static_cast<int64_t>(v)))
    Fail(ErrorKind::kFormat, "tensor '{}' should hold an integer, got {}", name, v);
  return static_cast<int64_t>(v);
}

Vector TensorSet::GetVector(const std::string &name, int64_t size) const {
  const Tensor &t = Get(name);
  if (t.dims.size() != 1)
    Fail(ErrorKind::kFormat, "tensor '{}' has rank {}, expected 1", name,
         t.dims.size());
  if (size >= 0 && t.dims[0] != static_cast<uint64_t>(size))
    Fail(ErrorKind::kFormat, "tensor '{}' has size {}, expected {}", name,
         t.dims[0], size);
  return Eigen::Map<const Vector>(t.data.data(), static_cast<int64_t>(t.dims[0]));
}

Matrix TensorSet::GetMatrix(const std::string &name, int64_t rows,
                            int64_t cols) const {
  const Tensor &t = Get(name);
  if (t.dims.size() != 2)
    Fail(ErrorKind::kFormat, "tensor '{}' has rank {}, expected 2", name,
         t.dims.size());
  if ((rows >= 0 && t.dims[0] != static_cast<uint64_t>(rows)) ||
      (cols >= 0 && t.dims[1] != static_cast<uint64_t>(cols)))
    Fail(ErrorKind::kFormat, "tensor '{}' is {}x{}, expected {}x{}", name,
         t.dims[0], t.dims[1], rows, cols);
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  return Eigen::Map<const RowMajor>(t.data.data(), static_cast<int64_t>(t.dims[0]),
                                    static_cast<int64_t>(t.dims[1]));
}

std::string EncodeTensorSet(const TensorSet &set) {
  std::string out = "SVM1";
  PutLe<uint32_t>(&out, TensorSet::kVersion);
  PutLe<uint32_t>(&out, static_cast<uint32_t>(set.size()));
  for (const std::string &name : set.names()) {
    const Tensor &t = set.Get(name);
    PutLe<uint32_t>(&out, static_cast<uint32_t>(name.size()));
    out += name;
    PutLe<uint8_t>(&out, static_cast<uint8_t>(t.dims.size()));
    for (uint64_t d : t.dims) PutLe<uint64_t>(&out, d);
    for (double v : t.data) PutLe<double>(&out, v);
  }
  return out;
}

TensorSet DecodeTensorSet(const std::string &bytes) {
  Reader r(bytes, "model container");
  r.ExpectMagic("SVM1");
  size_t at = r.pos();
  uint32_t version = r.Get<uint32_t>("version");
  if (version != TensorSet::kVersion)
    Fail(ErrorKind::kFormat, "model container: unsupported version {} at byte {}",
         version, at);
  uint32_t count = r.Get<uint32_t>("tensor count");
  TensorSet set;
  for (uint32_t i = 0; i < count; i++) {
    uint32_t name_len = r.Get<uint32_t>("name length");
    at = r.pos();
    std::string name = r.GetBytes(name_len, "tensor name");
    if (set.Has(name))
      Fail(ErrorKind::kFormat, "model container: duplicate tensor '{}' at byte {}",
           name, at);
    Tensor t;
    uint8_t rank = r.Get<uint8_t>("rank");
    at = r.pos();
    uint64_t count_elems = 1;
    for (uint8_t k = 0; k < rank; k++) {
      t.dims.push_back(r.Get<uint64_t>("dimension"));
      if (t.dims.back() != 0 &&
          count_elems > std::numeric_limits<uint64_t>::max() / 8 / t.dims.back())
        Fail(ErrorKind::kFormat,
             "model container: tensor '{}' shape at byte {} overflows", name, at);
      count_elems *= t.dims.back();
    }
    if (count_elems > r.Remaining() / 8)
      Fail(ErrorKind::kFormat,
           "model container: tensor '{}' at byte {} needs {} payload bytes, {} "
           "remain",
           name, r.pos(), count_elems * 8, r.Remaining());
    t.data.resize(count_elems);
    for (uint64_t k = 0; k < count_elems; k++) t.data[k] = r.Get<double>("payload");
    set.Add(name, std::move(t));
  }
  r.ExpectEnd();
  return set;
}

void WriteTensorSet(const std::string &path, const TensorSet &set) {
  WriteFileBytes(path, EncodeTensorSet(set));
}

TensorSet ReadTensorSet(const std::string &path) {
  try {
    return DecodeTensorSet(ReadFileBytes(path));
  } catch (const Error &e) {
    if (e.kind() != ErrorKind::kFormat) throw;
    throw Error(e.kind(), path + ": " + e.what());
  }
}

}  // namespace e2esv
