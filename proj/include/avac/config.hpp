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

// Flat key=value run configuration shared by every command. Unknown keys
// are rejected; render_config prints every key so artifacts record the
// effective settings.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "avac/cascade.hpp"
#include "avac/error.hpp"
#include "avac/text.hpp"

namespace avac {

inline constexpr std::string_view kToolVersion = "0.1.0";

struct RunConfig {
  BundleConfig bundle;
  std::uint64_t seed = 0;
  int layout_version = kLayoutVersion;
};

namespace config_detail {

inline double real(std::string_view key, std::string_view v) {
  double out = 0.0;
  if (!text::try_parse_real(v, out) || !std::isfinite(out))
    throw Error(ErrorCode::kInvalidConfig, std::string(key) + ": expected a number, got '" + std::string(v) + "'");
  return out;
}

inline std::int64_t integer(std::string_view key, std::string_view v) {
  std::int64_t out = 0;
  if (!text::try_parse_int(v, out))
    throw Error(ErrorCode::kInvalidConfig, std::string(key) + ": expected an integer, got '" + std::string(v) + "'");
  return out;
}

inline bool boolean(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw Error(ErrorCode::kInvalidConfig, std::string(key) + ": expected true or false, got '" + std::string(v) + "'");
}

inline std::string_view yes_no(bool b) { return b ? "true" : "false"; }

}  // namespace config_detail

// Applies one setting. Throws InvalidConfig for unknown keys or bad values.
inline void set_config_value(RunConfig& c, std::string_view key, std::string_view value) {
  using namespace config_detail;
  auto& b = c.bundle;
  auto& t = b.train;
  auto& f = b.features;
  if (key == "theta") {
    b.theta = real(key, value);
    if (!(b.theta > 0.0 && b.theta < 1.0)) throw Error(ErrorCode::kInvalidConfig, "theta must lie in (0, 1)");
  } else if (key == "decision_mode") {
    b.mode = parse_decision_mode(value);
  } else if (key == "C") {
    t.C = real(key, value);
  } else if (key == "gamma") {
    if (value == "auto") t.gamma.reset();
    else t.gamma = real(key, value);
  } else if (key == "kernel") {
    try {
      t.kernel = parse_kernel(value);
    } catch (const Error& e) {
      throw Error(ErrorCode::kInvalidConfig, e.detail());
    }
  } else if (key == "smo_tolerance") {
    t.smo_tolerance = real(key, value);
  } else if (key == "max_passes") {
    t.max_passes = static_cast<int>(integer(key, value));
  } else if (key == "max_iterations") {
    t.max_iterations = static_cast<long>(integer(key, value));
  } else if (key == "select_features") {
    b.select_features = boolean(key, value);
  } else if (key == "selection_delta") {
    b.selection_delta = real(key, value);
  } else if (key == "grid_search") {
    b.grid_search = boolean(key, value);
  } else if (key == "train_baseline") {
    b.train_baseline = boolean(key, value);
  } else if (key == "min_clips_per_class") {
    const auto n = integer(key, value);
    if (n < 5) throw Error(ErrorCode::kInvalidConfig, "min_clips_per_class must be at least 5");
    b.min_per_class = static_cast<std::size_t>(n);
  } else if (key == "silence_threshold") {
    f.silence_threshold = real(key, value);
  } else if (key == "nfr_threshold") {
    f.nfr_threshold = real(key, value);
  } else if (key == "nfr_min_pitch_hz") {
    f.nfr_min_pitch_hz = real(key, value);
  } else if (key == "nfr_max_pitch_hz") {
    f.nfr_max_pitch_hz = real(key, value);
  } else if (key == "hzcrr_factor") {
    f.hzcrr_factor = real(key, value);
  } else if (key == "lster_factor") {
    f.lster_factor = real(key, value);
  } else if (key == "rolloff_fraction") {
    f.rolloff_fraction = real(key, value);
  } else if (key == "mel_filters") {
    f.mel_filters = static_cast<int>(integer(key, value));
  } else if (key == "seed") {
    const auto s = integer(key, value);
    if (s < 0) throw Error(ErrorCode::kInvalidConfig, "seed must be non-negative");
    c.seed = static_cast<std::uint64_t>(s);
  } else if (key == "layout_version") {
    c.layout_version = static_cast<int>(integer(key, value));
    if (c.layout_version != kLayoutVersion)
      throw Error(ErrorCode::kInvalidConfig, "only feature layout version " + std::to_string(kLayoutVersion) +
                                                 " is supported");
  } else {
    throw Error(ErrorCode::kInvalidConfig, "unknown key '" + std::string(key) + "'");
  }
}

inline void validate_config(const RunConfig& c) {
  validate_train_config(c.bundle.train);
  const auto& f = c.bundle.features;
  if (!(f.silence_threshold >= 0.0)) throw Error(ErrorCode::kInvalidConfig, "silence_threshold must be >= 0");
  if (!(f.nfr_threshold >= 0.0 && f.nfr_threshold <= 1.0))
    throw Error(ErrorCode::kInvalidConfig, "nfr_threshold must lie in [0, 1]");
  if (!(f.nfr_min_pitch_hz > 0.0 && f.nfr_min_pitch_hz < f.nfr_max_pitch_hz))
    throw Error(ErrorCode::kInvalidConfig, "pitch range must satisfy 0 < nfr_min_pitch_hz < nfr_max_pitch_hz");
  if (!(f.rolloff_fraction > 0.0 && f.rolloff_fraction < 1.0))
    throw Error(ErrorCode::kInvalidConfig, "rolloff_fraction must lie in (0, 1)");
  if (f.mel_filters < static_cast<int>(kNumMfcc))
    throw Error(ErrorCode::kInvalidConfig, "mel_filters must be at least " + std::to_string(kNumMfcc));
  if (!(c.bundle.selection_delta >= 0.0)) throw Error(ErrorCode::kInvalidConfig, "selection_delta must be >= 0");
}

// Lines of key=value; blank lines and '#' comments are ignored.
inline RunConfig parse_config(std::string_view doc, RunConfig base = {}) {
  std::size_t line_no = 0;
  for (auto raw : text::split(doc, '\n')) {
    ++line_no;
    auto line = text::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw Error(ErrorCode::kInvalidConfig, "line " + std::to_string(line_no) + ": expected key=value");
    try {
      set_config_value(base, text::trim(line.substr(0, eq)), text::trim(line.substr(eq + 1)));
    } catch (const Error& e) {
      throw Error(ErrorCode::kInvalidConfig, "line " + std::to_string(line_no) + ": " + e.detail());
    }
  }
  validate_config(base);
  return base;
}

inline std::vector<std::string> config_lines(const RunConfig& c) {
  using config_detail::yes_no;
  using text::format_real;
  const auto& b = c.bundle;
  const auto& t = b.train;
  const auto& f = b.features;
  return {
      "C=" + format_real(t.C),
      "decision_mode=" + std::string(decision_mode_name(b.mode)),
      "gamma=" + (t.gamma ? format_real(*t.gamma) : std::string("auto")),
      "grid_search=" + std::string(yes_no(b.grid_search)),
      "hzcrr_factor=" + format_real(f.hzcrr_factor),
      "kernel=" + std::string(kernel_name(t.kernel)),
      "layout_version=" + std::to_string(c.layout_version),
      "lster_factor=" + format_real(f.lster_factor),
      "max_iterations=" + std::to_string(t.max_iterations),
      "max_passes=" + std::to_string(t.max_passes),
      "mel_filters=" + std::to_string(f.mel_filters),
      "min_clips_per_class=" + std::to_string(b.min_per_class),
      "nfr_max_pitch_hz=" + format_real(f.nfr_max_pitch_hz),
      "nfr_min_pitch_hz=" + format_real(f.nfr_min_pitch_hz),
      "nfr_threshold=" + format_real(f.nfr_threshold),
      "rolloff_fraction=" + format_real(f.rolloff_fraction),
      "seed=" + std::to_string(c.seed),
      "select_features=" + std::string(yes_no(b.select_features)),
      "selection_delta=" + format_real(b.selection_delta),
      "silence_threshold=" + format_real(f.silence_threshold),
      "smo_tolerance=" + format_real(t.smo_tolerance),
      "theta=" + format_real(b.theta),
      "train_baseline=" + std::string(yes_no(b.train_baseline)),
  };
}

inline std::string render_config(const RunConfig& c) {
  std::string out;
  for (const auto& l : config_lines(c)) out += l + '\n';
  return out;
}

// Reads `path`, or the file named by AVAC_CONFIG when `path` is empty, or
// returns defaults when neither is set.
inline RunConfig load_config(const std::optional<std::filesystem::path>& path) {
  std::optional<std::filesystem::path> p = path;
  if (!p) {
    if (const char* env = std::getenv("AVAC_CONFIG"); env && *env) p = env;
  }
  if (!p) return {};
  std::ifstream in(*p, std::ios::binary);
  if (!in) throw Error(ErrorCode::kNotFound, "cannot open config " + p->string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const Error& e) {
    throw Error(e.code(), p->string() + ": " + e.detail());
  }
}

// Bundle settings with the run seed applied to training.
inline BundleConfig effective_bundle_config(const RunConfig& c) {
  BundleConfig b = c.bundle;
  b.train.seed = c.seed;
  b.metadata = {"tool=avac " + std::string(kToolVersion)};
  for (const auto& l : config_lines(c)) b.metadata.push_back("config " + l);
  return b;
}

}  // namespace avac
