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

#include "avac/synth.hpp"

namespace avac {
namespace {

std::vector<float> samples_of(const AudioClip& c) { return {c.samples().begin(), c.samples().end()}; }

double clip_rms(const AudioClip& c) {
  double s = 0.0;
  for (double v : c.samples()) s += v * v;
  return std::sqrt(s / static_cast<double>(c.samples().size()));
}

TEST(Synth, ClipsAreDeterministicPerSeed) {
  for (auto env : kAllEnvironments) {
    for (auto c : kAllAudioClasses) {
      auto a = synth_item_clip(c, env, Genre::kJazz, 42);
      auto b = synth_item_clip(c, env, Genre::kJazz, 42);
      auto other = synth_item_clip(c, env, Genre::kJazz, 43);
      EXPECT_EQ(samples_of(a), samples_of(b));
      EXPECT_NE(samples_of(a), samples_of(other));
      EXPECT_EQ(samples_of(a).size(), kClipLength);
    }
  }
}

TEST(Synth, LevelsStayWithinJitter) {
  const SynthConfig cfg;
  for (auto env : kAllEnvironments) {
    for (auto c : kAllAudioClasses) {
      for (std::uint64_t s = 0; s < 4; ++s) {
        const double r = clip_rms(synth_item_clip(c, env, kAllGenres[s], s, cfg));
        EXPECT_GE(r, 0.1 * db_to_amplitude(-cfg.level_jitter_db) * 0.99);
        EXPECT_LE(r, 0.1 * db_to_amplitude(cfg.level_jitter_db) * 1.01);
      }
    }
  }
}

TEST(Synth, CorpusShapeAndIndependentCells) {
  const std::array<Environment, 2> envs{Environment::kCity, Environment::kIdle};
  const std::array<Genre, 2> genres{Genre::kRap, Genre::kClassic};
  auto corpus = synth_corpus(3, 8, envs, genres);
  ASSERT_EQ(corpus.size(), 2u * 4u * 3u);
  for (const auto& item : corpus) {
    EXPECT_EQ(samples_of(synth_item_clip(item.label, item.environment, item.genre, item.seed)), samples_of(item.clip));
  }
  EXPECT_EQ(corpus[1].genre, Genre::kClassic);
  const std::array<Environment, 1> idle{Environment::kIdle};
  auto alone = synth_corpus(3, 8, idle, genres);
  for (std::size_t i = 0; i < alone.size(); ++i) EXPECT_EQ(samples_of(alone[i].clip), samples_of(corpus[12 + i].clip));
}

TEST(Synth, GenreNames) {
  for (auto g : kAllGenres) EXPECT_EQ(try_parse_genre(genre_name(g)), g);
  EXPECT_FALSE(try_parse_genre("polka").has_value());
}

}  // namespace
}  // namespace avac
