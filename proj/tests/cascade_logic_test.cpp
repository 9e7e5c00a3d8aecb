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

#include <random>

#include "avac/cascade.hpp"

namespace avac {
namespace {

// Stub scorer: fixed stage values. p_noise and p_music are the detector
// outputs; the scorer reports P(first class) = 1 - those.
struct StubScorer {
  std::array<double, 3> p_noise{};
  std::array<double, 2> p_music{};
  double d_final = 0.0;
  double d_speech = 0.0;
  double d_music_noise = 0.0;
  mutable int calls = 0;

  double probability(ModelPair p) const {
    ++calls;
    switch (p) {
      case ModelPair::kSpeechNoise: return 1.0 - p_noise[0];
      case ModelPair::kMusicNoise: return 1.0 - p_noise[1];
      case ModelPair::kSpeechMusicNoise: return 1.0 - p_noise[2];
      case ModelPair::kSpeechMusic: return 1.0 - p_music[0];
      case ModelPair::kSpeechMusicMusic: return 1.0 - p_music[1];
      default: ADD_FAILURE() << "probability of final pair requested"; return 0.5;
    }
  }
  double decision(ModelPair p) const {
    ++calls;
    if (p == ModelPair::kSpeechSpeechMusic) return d_final;
    if (p == ModelPair::kMusicNoise) return d_music_noise;
    ADD_FAILURE() << "unexpected decision request";
    return 0.0;
  }
  double baseline_decision() const { return d_speech; }
};

AudioClass classify_stub(const StubScorer& s, double theta) { return route_trace(run_stages(s, theta), theta); }

TEST(Names, RoundTrip) {
  for (auto c : kAllAudioClasses) EXPECT_EQ(parse_audio_class(audio_class_name(c)), c);
  for (auto e : kAllEnvironments) EXPECT_EQ(parse_environment(environment_name(e)), e);
  for (auto p : kAllModelPairs) EXPECT_EQ(parse_model_pair(model_pair_name(p)), p);
  EXPECT_EQ(parse_audio_class("speech+music"), AudioClass::kSpeechMusic);
  EXPECT_EQ(parse_environment("highway"), Environment::kHighway);
  EXPECT_FALSE(try_parse_audio_class("humming"));
  EXPECT_THROW(parse_environment("MARS"), Error);
  EXPECT_EQ(bundle_file_name(Environment::kCity), "city.bundle");
}

TEST(Stages, AllThreeNoiseDetectorsAgree) {
  StubScorer s;
  s.p_noise = {0.9, 0.8, 0.7};
  EXPECT_EQ(classify_stub(s, 0.5), AudioClass::kNoise);
  auto t = run_stages(s, 0.5);
  EXPECT_FALSE(t.p_music.has_value());
  EXPECT_FALSE(t.d_final.has_value());
}

TEST(Stages, MusicDetectorAfterFallThrough) {
  StubScorer s;
  s.p_noise = {0.9, 0.4, 0.9};
  s.p_music = {0.6, 0.7};
  EXPECT_EQ(classify_stub(s, 0.5), AudioClass::kMusic);
}

TEST(Stages, FinalBinaryDecision) {
  StubScorer s;
  s.p_noise = {0.1, 0.1, 0.1};
  s.p_music = {0.6, 0.3};
  s.d_final = 1.0;
  EXPECT_EQ(classify_stub(s, 0.5), AudioClass::kSpeech);
  s.d_final = -1.0;
  EXPECT_EQ(classify_stub(s, 0.5), AudioClass::kSpeechMusic);
}

TEST(Stages, TieAtThetaIsNotExceeded) {
  StubScorer s;
  s.p_noise = {0.5, 0.9, 0.9};
  s.p_music = {0.9, 0.5};
  s.d_final = 2.0;
  EXPECT_EQ(classify_stub(s, 0.5), AudioClass::kSpeech);
}

// Exhaustive truth table: each detector value below, at, or above theta,
// and both signs of the final decision, checked against direct routing.
TEST(Stages, ExhaustiveTruthTable) {
  const double theta = 0.5;
  const std::array<double, 3> levels{0.2, theta, 0.8};
  int cases = 0;
  for (int code = 0; code < 243; ++code) {
    int c = code;
    std::array<double, 5> v{};
    for (auto& x : v) {
      x = levels[c % 3];
      c /= 3;
    }
    for (double d : {-1.0, 1.0}) {
      StubScorer s;
      s.p_noise = {v[0], v[1], v[2]};
      s.p_music = {v[3], v[4]};
      s.d_final = d;
      const bool all_noise = v[0] > theta && v[1] > theta && v[2] > theta;
      const bool both_music = v[3] > theta && v[4] > theta;
      AudioClass expect = all_noise    ? AudioClass::kNoise
                          : both_music ? AudioClass::kMusic
                          : d > 0      ? AudioClass::kSpeech
                                       : AudioClass::kSpeechMusic;
      auto t = run_stages(s, theta);
      EXPECT_EQ(route_trace(t, theta), expect) << code << " " << d;
      EXPECT_EQ(t.p_music.has_value(), !all_noise);
      EXPECT_EQ(t.d_final.has_value(), !all_noise && !both_music);
      ++cases;
    }
  }
  EXPECT_EQ(cases, 486);
}

// Property: raising theta never turns a non-NOISE verdict into NOISE.
TEST(Stages, ThetaMonotonicity) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    StubScorer s;
    for (auto& p : s.p_noise) p = u(rng);
    for (auto& p : s.p_music) p = u(rng);
    s.d_final = u(rng) - 0.5;
    double lo = 0.01 + 0.98 * u(rng), hi = 0.01 + 0.98 * u(rng);
    if (lo > hi) std::swap(lo, hi);
    if (classify_stub(s, lo) != AudioClass::kNoise) {
      EXPECT_NE(classify_stub(s, hi), AudioClass::kNoise);
    }
    if (classify_stub(s, hi) == AudioClass::kNoise) {
      EXPECT_EQ(classify_stub(s, lo), AudioClass::kNoise);
    }
  }
}

TEST(Stages, TraceMissingValuesIsRejected) {
  StageTrace t;
  t.p_noise = {0.1, 0.1, 0.1};
  EXPECT_THROW(route_trace(t, 0.5), Error);
}

TEST(Baseline, NoiseDetectedFirst) {
  StubScorer s;
  s.p_noise = {0.9, 0.9, 0.9};
  auto r = run_baseline(s, 0.5);
  EXPECT_EQ(r.label, AudioClass::kNoise);
  EXPECT_FALSE(r.d_speech.has_value());
}

TEST(Baseline, SpeechBranchThenBinary) {
  StubScorer s;
  s.p_noise = {0.1, 0.9, 0.9};
  s.d_speech = 1.0;
  s.d_final = -0.5;
  EXPECT_EQ(run_baseline(s, 0.5).label, AudioClass::kSpeechMusic);
  s.d_final = 0.5;
  EXPECT_EQ(run_baseline(s, 0.5).label, AudioClass::kSpeech);
}

TEST(Baseline, NonSpeechBranch) {
  StubScorer s;
  s.p_noise = {0.1, 0.1, 0.1};
  s.d_speech = -1.0;
  s.d_music_noise = 0.3;
  EXPECT_EQ(run_baseline(s, 0.5).label, AudioClass::kMusic);
  s.d_music_noise = -0.3;
  EXPECT_EQ(run_baseline(s, 0.5).label, AudioClass::kNoise);
}

TEST(ClipLog, StageColumns) {
  StageTrace t;
  t.p_noise = {0.25, 0.5, 0.75};
  EXPECT_EQ(stage_columns(t), "0.25,0.5,0.75,,,");
  t.p_music = std::array<double, 2>{0.125, 1.0};
  t.d_final = -2.0;
  EXPECT_EQ(stage_columns(t), "0.25,0.5,0.75,0.125,1,-2");
}

}  // namespace
}  // namespace avac
