// e2esv/error.h

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

#ifndef E2ESV_ERROR_H_
#define E2ESV_ERROR_H_

#include <stdexcept>
#include <string>
#include <utility>

#include <fmt/format.h>

namespace e2esv {

enum class ErrorKind {
  kShape,      // dimension mismatch between operands
  kInput,      // invalid or non-finite data
  kState,      // cached state inconsistent with the model it came from
  kOptimizer,  // non-finite gradients handed to an optimizer
  kModel,      // model parameters violate their invariants (e.g. not PD)
  kObjective,  // objective undefined for the given batch
  kMetric,     // metric undefined for the given trials
  kFormat,     // malformed file
  kConfig,     // bad configuration value
  kUsage,      // bad command line
  kNumerical,  // numerical failure during training
};

const char *ErrorKindName(ErrorKind kind);

/// Process exit code for the CLI: 2 usage, 3 data/format, 4 numerical.
int ExitCodeFor(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string &what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

template <typename... Args>
[[noreturn]] void Fail(ErrorKind kind, fmt::format_string<Args...> f,
                       Args &&...args) {
  throw Error(kind, fmt::format(f, std::forward<Args>(args)...));
}

}  // namespace e2esv

#endif  // E2ESV_ERROR_H_
