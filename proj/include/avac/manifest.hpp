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

// CSV manifests: a header naming path, label and environment (and
// optionally genre), then one row per audio file. Quoting is not supported.

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "avac/cascade.hpp"
#include "avac/error.hpp"
#include "avac/text.hpp"

namespace avac {

struct ManifestRow {
  std::string path;  // as written; resolve with Manifest::resolve
  AudioClass label = AudioClass::kNoise;
  Environment environment = Environment::kIdle;
  std::optional<std::string> genre;
  std::size_t line = 0;  // 1-based line in the source text

  friend bool operator==(const ManifestRow&, const ManifestRow&) = default;
};

struct Manifest {
  std::vector<ManifestRow> rows;
  bool has_genre_column = false;
  std::filesystem::path base_dir;  // relative paths resolve against this

  std::filesystem::path resolve(const ManifestRow& row) const {
    std::filesystem::path p(row.path);
    return p.is_absolute() ? p : base_dir / p;
  }

  std::vector<ManifestRow> for_environment(Environment e) const {
    std::vector<ManifestRow> out;
    for (const auto& r : rows)
      if (r.environment == e) out.push_back(r);
    return out;
  }
};

inline Manifest parse_manifest(std::string_view text, const std::filesystem::path& base_dir = {}) {
  auto fail = [](std::size_t line, const std::string& msg) -> Error {
    return Error(ErrorCode::kInvalidManifest, "line " + std::to_string(line) + ": " + msg);
  };
  Manifest m;
  m.base_dir = base_dir;
  std::map<std::string, std::size_t> col;
  std::size_t ncols = 0, line_no = 0;
  bool header = false;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    auto raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    auto line = text::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    auto cells = text::split(line, ',');
    for (auto& c : cells) c = text::trim(c);
    if (!header) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        std::string name(cells[i]);
        if (name != "path" && name != "label" && name != "environment" && name != "genre")
          throw fail(line_no, "unknown column '" + name + "'");
        if (!col.emplace(name, i).second) throw fail(line_no, "duplicate column '" + name + "'");
      }
      for (const char* need : {"path", "label", "environment"})
        if (!col.count(need)) throw fail(line_no, std::string("missing column '") + need + "'");
      m.has_genre_column = col.count("genre") != 0;
      ncols = cells.size();
      header = true;
      continue;
    }
    if (cells.size() != ncols)
      throw fail(line_no, "expected " + std::to_string(ncols) + " fields, found " + std::to_string(cells.size()));
    ManifestRow row;
    row.line = line_no;
    row.path = std::string(cells[col["path"]]);
    if (row.path.empty()) throw fail(line_no, "empty path");
    auto label = try_parse_audio_class(cells[col["label"]]);
    if (!label) throw fail(line_no, "unknown label '" + std::string(cells[col["label"]]) + "'");
    row.label = *label;
    auto env = try_parse_environment(cells[col["environment"]]);
    if (!env) throw fail(line_no, "unknown environment '" + std::string(cells[col["environment"]]) + "'");
    row.environment = *env;
    if (m.has_genre_column && !cells[col["genre"]].empty()) row.genre = std::string(cells[col["genre"]]);
    m.rows.push_back(std::move(row));
  }
  if (!header) throw Error(ErrorCode::kInvalidManifest, "manifest has no header row");
  return m;
}

inline Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kNotFound, "cannot open manifest " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_manifest(ss.str(), path.parent_path());
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.detail());
  }
}

inline std::string render_manifest(const Manifest& m) {
  std::string out = m.has_genre_column ? "path,label,environment,genre\n" : "path,label,environment\n";
  for (const auto& r : m.rows) {
    out += r.path + ',' + std::string(audio_class_name(r.label)) + ',' + std::string(environment_name(r.environment));
    if (m.has_genre_column) out += ',' + r.genre.value_or("");
    out += '\n';
  }
  return out;
}

}  // namespace avac
