// Copyright 2026 The treegate Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Plain-text "key = value" scenario files. '#' starts a comment; list values
// are comma-separated.

#ifndef TREEGATE_CONFIG_HPP_
#define TREEGATE_CONFIG_HPP_

#include <istream>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace treegate {

class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::istream& in, const std::string& source = "config");
  static KeyValueConfig load(const std::string& path);

  bool has(std::string_view key) const;
  std::string get_string(std::string_view key, const std::string& fallback) const;
  double get_double(std::string_view key, double fallback) const;
  long long get_int(std::string_view key, long long fallback) const;
  bool get_bool(std::string_view key, bool fallback) const;
  std::vector<double> get_doubles(std::string_view key, std::vector<double> fallback) const;
  std::vector<long long> get_ints(std::string_view key, std::vector<long long> fallback) const;
  std::vector<std::string> get_strings(std::string_view key, std::vector<std::string> fallback) const;

  // Throws Error listing every key not in `allowed`.
  void check_keys(std::span<const std::string_view> allowed) const;

 private:
  struct Entry {
    std::string value;
    int line = 0;
  };
  const Entry* find(std::string_view key) const;
  [[noreturn]] void fail(std::string_view key, const std::string& what) const;

  std::string source_;
  std::map<std::string, Entry, std::less<>> entries_;
};

}  // namespace treegate

#endif  // TREEGATE_CONFIG_HPP_
