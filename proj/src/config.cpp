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


#include "treegate/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>

#include "treegate/error.hpp"

namespace treegate {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = value.find(',', start);
    out.push_back(trim(std::string_view(value).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

template <typename T>
bool parse_number(const std::string& text, T& out) {
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc() && ptr == end;
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(std::istream& in, const std::string& source) {
  KeyValueConfig config;
  config.source_ = source;
  std::string line;
  for (int number = 1; std::getline(in, line); ++number) {
    const std::string body = trim(std::string_view(line).substr(0, line.find('#')));
    if (body.empty()) continue;
    const std::size_t eq = body.find('=');
    if (eq == std::string::npos)
      throw Error(source + ":" + std::to_string(number) + ": expected key = value");
    std::string key = trim(std::string_view(body).substr(0, eq));
    if (key.empty()) throw Error(source + ":" + std::to_string(number) + ": empty key");
    if (config.entries_.count(key))
      throw Error(source + ":" + std::to_string(number) + ": duplicate key '" + key + "'");
    config.entries_.emplace(std::move(key), Entry{trim(std::string_view(body).substr(eq + 1)), number});
  }
  return config;
}

KeyValueConfig KeyValueConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file '" + path + "'");
  return parse(in, path);
}

const KeyValueConfig::Entry* KeyValueConfig::find(std::string_view key) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

void KeyValueConfig::fail(std::string_view key, const std::string& what) const {
  const Entry* e = find(key);
  throw Error(source_ + ":" + std::to_string(e ? e->line : 0) + ": key '" + std::string(key) +
              "' " + what);
}

bool KeyValueConfig::has(std::string_view key) const { return find(key) != nullptr; }

std::string KeyValueConfig::get_string(std::string_view key, const std::string& fallback) const {
  const Entry* e = find(key);
  return e ? e->value : fallback;
}

double KeyValueConfig::get_double(std::string_view key, double fallback) const {
  const Entry* e = find(key);
  if (!e) return fallback;
  double v = 0;
  if (!parse_number(e->value, v)) fail(key, "needs a number, got '" + e->value + "'");
  return v;
}

long long KeyValueConfig::get_int(std::string_view key, long long fallback) const {
  const Entry* e = find(key);
  if (!e) return fallback;
  long long v = 0;
  if (!parse_number(e->value, v)) fail(key, "needs an integer, got '" + e->value + "'");
  return v;
}

bool KeyValueConfig::get_bool(std::string_view key, bool fallback) const {
  const Entry* e = find(key);
  if (!e) return fallback;
  if (e->value == "true" || e->value == "1" || e->value == "yes") return true;
  if (e->value == "false" || e->value == "0" || e->value == "no") return false;
  fail(key, "needs true or false, got '" + e->value + "'");
}

std::vector<double> KeyValueConfig::get_doubles(std::string_view key,
                                                std::vector<double> fallback) const {
  const Entry* e = find(key);
  if (!e) return fallback;
  std::vector<double> out;
  for (const std::string& item : split_list(e->value)) {
    double v = 0;
    if (!parse_number(item, v)) fail(key, "needs a list of numbers, got '" + e->value + "'");
    out.push_back(v);
  }
  return out;
}

std::vector<long long> KeyValueConfig::get_ints(std::string_view key,
                                                std::vector<long long> fallback) const {
  const Entry* e = find(key);
  if (!e) return fallback;
  std::vector<long long> out;
  for (const std::string& item : split_list(e->value)) {
    long long v = 0;
    if (!parse_number(item, v)) fail(key, "needs a list of integers, got '" + e->value + "'");
    out.push_back(v);
  }
  return out;
}

std::vector<std::string> KeyValueConfig::get_strings(std::string_view key,
                                                     std::vector<std::string> fallback) const {
  const Entry* e = find(key);
  return e ? split_list(e->value) : fallback;
}

void KeyValueConfig::check_keys(std::span<const std::string_view> allowed) const {
  std::string unknown;
  for (const auto& [key, entry] : entries_) {
    if (std::find(allowed.begin(), allowed.end(), key) != allowed.end()) continue;
    unknown += (unknown.empty() ? "" : ", ") + key + " (line " + std::to_string(entry.line) + ")";
  }
  if (unknown.empty()) return;
  std::string expected;
  for (std::string_view k : allowed) expected += (expected.empty() ? "" : ", ") + std::string(k);
  throw Error(source_ + ": unknown keys: " + unknown + "; expected one of: " + expected);
}

}  // namespace treegate
