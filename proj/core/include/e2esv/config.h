// e2esv/config.h

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


#ifndef E2ESV_CONFIG_H_
#define E2ESV_CONFIG_H_

#include <cstdint>
#include <istream>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace e2esv {

/**
   Flat "key=value" settings, one per line, with dotted section prefixes
   ("ubm.components=64").  '#' starts a comment.  Later lines override
   earlier ones.  Typed getters return the default when a key is absent and
   throw kConfig when a value does not parse.
*/
class Config {
 public:
  void Parse(std::istream &in, const std::string &source);
  void Load(const std::string &path);
  void Set(const std::string &key, const std::string &value);

  bool Has(const std::string &key) const;
  std::string GetString(const std::string &key, const std::string &def) const;
  int64_t GetInt(const std::string &key, int64_t def) const;
  double GetDouble(const std::string &key, double def) const;
  bool GetBool(const std::string &key, bool def) const;
  /// Comma-separated integers, e.g. "64,64".  An empty value is an empty list.
  std::vector<int64_t> GetIntList(const std::string &key,
                                  const std::vector<int64_t> &def) const;

  /// Keys that were set but never read.
  std::vector<std::string> UnusedKeys() const;
  const std::map<std::string, std::string> &values() const { return values_; }

 private:
  const std::string *Find(const std::string &key) const;

  std::map<std::string, std::string> values_;
  mutable std::set<std::string> used_;
};

}  // namespace e2esv

#endif  // E2ESV_CONFIG_H_
