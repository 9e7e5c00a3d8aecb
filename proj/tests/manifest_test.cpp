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

#include <gtest/gtest.h>

#include "avac/manifest.hpp"
#include "test_util.hpp"

namespace avac {
namespace {

ErrorCode code_of(std::string_view doc, std::string* message = nullptr) {
  try {
    parse_manifest(doc);
  } catch (const Error& e) {
    if (message) *message = e.what();
    return e.code();
  }
  ADD_FAILURE() << "parsed: " << doc;
  return ErrorCode::kIo;
}

TEST(Manifest, ParsesRowsAndLineNumbers) {
  auto m = parse_manifest("# corpus\npath,label,environment\n\na.wav,SPEECH,IDLE\nb.wav,speech+music,highway\n", "/data");
  ASSERT_EQ(m.rows.size(), 2u);
  EXPECT_FALSE(m.has_genre_column);
  EXPECT_EQ(m.rows[0].line, 4u);
  EXPECT_EQ(m.rows[1].line, 5u);
  EXPECT_EQ(m.rows[1].label, AudioClass::kSpeechMusic);
  EXPECT_EQ(m.rows[1].environment, Environment::kHighway);
  EXPECT_EQ(m.resolve(m.rows[0]), std::filesystem::path("/data/a.wav"));
  EXPECT_EQ(m.for_environment(Environment::kIdle).size(), 1u);
}

TEST(Manifest, ColumnsInAnyOrderWithGenre) {
  auto m = parse_manifest("genre,environment,path,label\njazz,CITY,/x/m.wav,MUSIC\n,CITY,s.wav,SPEECH\n");
  ASSERT_TRUE(m.has_genre_column);
  EXPECT_EQ(m.rows[0].genre, "jazz");
  EXPECT_FALSE(m.rows[1].genre.has_value());
  EXPECT_EQ(m.resolve(m.rows[0]), std::filesystem::path("/x/m.wav"));
}

TEST(Manifest, UnknownLabelNamesTheRow) {
  std::string msg;
  EXPECT_EQ(code_of("path,label,environment\na.wav,SPEECH,IDLE\nb.wav,humming,IDLE\n", &msg), ErrorCode::kInvalidManifest);
  EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
  EXPECT_NE(msg.find("humming"), std::string::npos) << msg;
}

TEST(Manifest, RejectsBadHeadersAndRows) {
  EXPECT_EQ(code_of(""), ErrorCode::kInvalidManifest);
  EXPECT_EQ(code_of("path,label\n"), ErrorCode::kInvalidManifest);
  EXPECT_EQ(code_of("path,label,environment,label\n"), ErrorCode::kInvalidManifest);
  EXPECT_EQ(code_of("path,label,environment,speaker\n"), ErrorCode::kInvalidManifest);
  EXPECT_EQ(code_of("path,label,environment\na.wav,SPEECH\n"), ErrorCode::kInvalidManifest);
  EXPECT_EQ(code_of("path,label,environment\na.wav,SPEECH,MOON\n"), ErrorCode::kInvalidManifest);
  EXPECT_EQ(code_of("path,label,environment\n,SPEECH,IDLE\n"), ErrorCode::kInvalidManifest);
}

TEST(Manifest, RenderRoundTrip) {
  auto m = parse_manifest("path,label,environment,genre\na.wav,MUSIC,LOCAL,pop\nb.wav,NOISE,IDLE,\n");
  auto again = parse_manifest(render_manifest(m));
  ASSERT_EQ(again.rows.size(), m.rows.size());
  for (std::size_t i = 0; i < m.rows.size(); ++i) {
    EXPECT_EQ(again.rows[i].path, m.rows[i].path);
    EXPECT_EQ(again.rows[i].label, m.rows[i].label);
    EXPECT_EQ(again.rows[i].environment, m.rows[i].environment);
    EXPECT_EQ(again.rows[i].genre, m.rows[i].genre);
  }
}

TEST(Manifest, LoadResolvesAgainstItsDirectory) {
  auto dir = testing::scratch_dir("manifest");
  write_file_atomic(dir / "m.csv", "path,label,environment\nclip.wav,NOISE,IDLE\n");
  auto m = load_manifest(dir / "m.csv");
  EXPECT_EQ(m.resolve(m.rows[0]), dir / "clip.wav");
  try {
    load_manifest(dir / "absent.csv");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotFound);
  }
}

}  // namespace
}  // namespace avac
