// Copyright 2026 The avac Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Locale-independent number formatting and tokenizing shared by the model,
// bundle, report and manifest formats.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "avac/error.hpp"

namespace avac::text {

// Shortest text that parses back to exactly `value`.
inline std::string format_real(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

inline std::string format_significant(double value, int digits) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, digits);
  return std::string(buf, res.ptr);
}

inline std::string format_fixed(double value, int decimals) {
  if (std::isnan(value)) return "nan";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value,
                           std::chars_format::fixed, decimals);
  return std::string(buf, res.ptr);
}

inline bool try_parse_real(std::string_view s, double& out) {
  if (s == "nan") { out = std::nan(""); return true; }
  if (s == "inf") { out = INFINITY; return true; }
  if (s == "-inf") { out = -INFINITY; return true; }
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size() && !s.empty();
}

inline double parse_real(std::string_view s, ErrorCode code = ErrorCode::kInvalidModel) {
  double v = 0.0;
  if (!try_parse_real(s, v)) throw Error(code, "not a number: '" + std::string(s) + "'");
  return v;
}

inline bool try_parse_int(std::string_view s, std::int64_t& out) {
  auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size() && !s.empty();
}

inline std::int64_t parse_int(std::string_view s, ErrorCode code = ErrorCode::kInvalidModel) {
  std::int64_t v = 0;
  if (!try_parse_int(s, v)) throw Error(code, "not an integer: '" + std::string(s) + "'");
  return v;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      break;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

// Whitespace tokenizer (runs of spaces collapse).
inline std::vector<std::string_view> tokens(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

inline std::string join_reals(std::span<const double> values, char sep = ' ') {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out.push_back(sep);
    out += format_real(values[i]);
  }
  return out;
}

}  // namespace avac::text
