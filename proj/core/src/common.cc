// core/src/common.cc

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

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

#include "e2esv/error.h"
#include "e2esv/types.h"

namespace e2esv {

const char *ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kShape: return "shape error";
    case ErrorKind::kInput: return "input error";
    case ErrorKind::kState: return "state error";
    case ErrorKind::kOptimizer: return "optimizer error";
    case ErrorKind::kModel: return "model error";
    case ErrorKind::kObjective: return "objective error";
    case ErrorKind::kMetric: return "metric error";
    case ErrorKind::kFormat: return "format error";
    case ErrorKind::kConfig: return "config error";
    case ErrorKind::kUsage: return "usage error";
    case ErrorKind::kNumerical: return "numerical error";
  }
  return "error";
}

int ExitCodeFor(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kUsage:
    case ErrorKind::kConfig:
      return 2;
    case ErrorKind::kShape:
    case ErrorKind::kInput:
    case ErrorKind::kFormat:
    case ErrorKind::kMetric:
    case ErrorKind::kObjective:
      return 3;
    default:
      return 4;
  }
}

bool AllFinite(const Eigen::Ref<const Matrix> &m) {
  return m.allFinite();
}

void CheckFinite(const Eigen::Ref<const Matrix> &m, const char *what) {
  if (!m.allFinite()) Fail(ErrorKind::kInput, "non-finite values in {}", what);
}

void LengthNormalizeRows(Matrix *m) {
  for (Eigen::Index r = 0; r < m->rows(); r++) {
    double norm = m->row(r).norm();
    if (norm > 0.0) m->row(r) /= norm;
  }
}

Vector LengthNormalize(const Vector &v) {
  double norm = v.norm();
  if (norm == 0.0) return Vector::Zero(v.size());
  return v / norm;
}

void ParallelFor(int64_t n, int num_threads,
                 const std::function<void(int64_t)> &fn) {
  if (n <= 0) return;
  int threads = static_cast<int>(std::min<int64_t>(std::max(num_threads, 1), n));
  if (threads == 1) {
    for (int64_t i = 0; i < n; i++) fn(i);
    return;
  }
  std::atomic<int64_t> next{0};
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; t++) {
    pool.emplace_back([&, t] {
      try {
        for (int64_t i = next++; i < n; i = next++) fn(i);
      } catch (...) {
        errors[t] = std::current_exception();
        next = n;
      }
    });
  }
  for (auto &th : pool) th.join();
  for (auto &e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace e2esv
