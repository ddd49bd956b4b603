// core/src/config.cc

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


#include "e2esv/config.h"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "e2esv/error.h"

namespace e2esv {

namespace {

std::string Trim(const std::string &s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

int64_t ParseInt(const std::string &key, const std::string &v) {
  char *end = nullptr;
  errno = 0;
  long long x = std::strtoll(v.c_str(), &end, 10);
  if (v.empty() || *end != '\0' || errno == ERANGE)
    Fail(ErrorKind::kConfig, "{}: '{}' is not an integer", key, v);
  return x;
}

}  // namespace

void Config::Parse(std::istream &in, const std::string &source) {
  std::string line;
  for (int lineno = 1; std::getline(in, line); lineno++) {
    size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = Trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      Fail(ErrorKind::kConfig, "{}:{}: expected key=value", source, lineno);
    std::string key = Trim(line.substr(0, eq));
    if (key.empty())
      Fail(ErrorKind::kConfig, "{}:{}: empty key", source, lineno);
    Set(key, Trim(line.substr(eq + 1)));
  }
}

void Config::Load(const std::string &path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorKind::kConfig, "cannot open config file '{}'", path);
  Parse(in, path);
}

void Config::Set(const std::string &key, const std::string &value) {
  values_[key] = value;
}

const std::string *Config::Find(const std::string &key) const {
  used_.insert(key);
  auto it = values_.find(key);
  return it == values_.end() ? nullptr : &it->second;
}

bool Config::Has(const std::string &key) const {
  return values_.count(key) != 0;
}

std::string Config::GetString(const std::string &key,
                              const std::string &def) const {
  const std::string *v = Find(key);
  return v == nullptr ? def : *v;
}

int64_t Config::GetInt(const std::string &key, int64_t def) const {
  const std::string *v = Find(key);
  return v == nullptr ? def : ParseInt(key, *v);
}

double Config::GetDouble(const std::string &key, double def) const {
  const std::string *v = Find(key);
  if (v == nullptr) return def;
  char *end = nullptr;
  errno = 0;
  double x = std::strtod(v->c_str(), &end);
  if (v->empty() || *end != '\0' || errno == ERANGE)
    Fail(ErrorKind::kConfig, "{}: '{}' is not a number", key, *v);
  return x;
}

bool Config::GetBool(const std::string &key, bool def) const {
  const std::string *v = Find(key);
  if (v == nullptr) return def;
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  Fail(ErrorKind::kConfig, "{}: '{}' is not a boolean", key, *v);
}

std::vector<int64_t> Config::GetIntList(const std::string &key,
                                        const std::vector<int64_t> &def) const {
  const std::string *v = Find(key);
  if (v == nullptr) return def;
  std::vector<int64_t> out;
  std::stringstream ss(*v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(ParseInt(key, Trim(item)));
  return out;
}

std::vector<std::string> Config::UnusedKeys() const {
  std::vector<std::string> out;
  for (const auto &[key, value] : values_)
    if (used_.count(key) == 0) out.push_back(key);
  return out;
}

}  // namespace e2esv
