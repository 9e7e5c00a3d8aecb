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

#include "avac/eval.hpp"
#include "avac/synth.hpp"
#include "test_util.hpp"

namespace avac {
namespace {

std::vector<EvalItem> labelled_items(const std::vector<std::pair<Environment, AudioClass>>& cells, std::size_t per) {
  std::vector<EvalItem> out;
  for (auto [env, c] : cells)
    for (std::size_t i = 0; i < per; ++i) out.push_back({c, env, std::nullopt, {}});
  return out;
}

std::vector<EvalItem> grid_items(std::size_t per) {
  std::vector<std::pair<Environment, AudioClass>> cells;
  for (auto e : kAllEnvironments)
    for (auto c : kAllAudioClasses) cells.push_back({e, c});
  return labelled_items(cells, per);
}

TEST(Evaluate, EchoClassifierIsPerfect) {
  auto items = grid_items(3);
  auto r = evaluate_with(std::span<const EvalItem>(items), [](const EvalItem& i) { return i.label; });
  for (auto e : kAllEnvironments) {
    for (auto t : kAllAudioClasses) {
      EXPECT_EQ(r.accuracy(e, t), 1.0);
      for (auto p : kAllAudioClasses) EXPECT_EQ(r.confusion.at(e)[class_index(t)][class_index(p)], t == p ? 3u : 0u);
    }
    EXPECT_EQ(r.average(e), 1.0);
  }
}

TEST(Evaluate, AlwaysNoise) {
  auto items = grid_items(2);
  auto r = evaluate_with(std::span<const EvalItem>(items), [](const EvalItem&) { return AudioClass::kNoise; });
  for (auto e : kAllEnvironments) {
    for (auto c : kAllAudioClasses) EXPECT_EQ(r.accuracy(e, c), c == AudioClass::kNoise ? 1.0 : 0.0);
    EXPECT_DOUBLE_EQ(*r.average(e), 0.25);
  }
  EXPECT_EQ(r.pooled_accuracy(AudioClass::kMusic), 0.0);
}

TEST(Evaluate, EmptyInput) {
  std::vector<EvalItem> none;
  try {
    evaluate_with(std::span<const EvalItem>(none), [](const EvalItem& i) { return i.label; });
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyManifest);
  }
}

TEST(Evaluate, MarginalsMatchClassCountsAndReportRoundTrips) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<EvalItem> items;
    std::map<std::pair<Environment, AudioClass>, std::size_t> counts;
    const auto n = 1 + rng() % 60;
    for (std::size_t i = 0; i < n; ++i) {
      auto env = kAllEnvironments[rng() % 4];
      auto c = kAllAudioClasses[rng() % 4];
      items.push_back({c, env, std::nullopt, {}});
      ++counts[{env, c}];
    }
    std::vector<AudioClass> preds;
    for (std::size_t i = 0; i < n; ++i) preds.push_back(kAllAudioClasses[rng() % 4]);
    std::size_t k = 0;
    auto r = evaluate_with(std::span<const EvalItem>(items), [&](const EvalItem&) { return preds[k++]; });
    for (auto e : kAllEnvironments)
      for (auto c : kAllAudioClasses) EXPECT_EQ(r.count(e, c), (counts[{e, c}]));
    r.metadata = {"mode=adaptive", "trial=" + std::to_string(trial)};
    EXPECT_EQ(parse_report(render_report(r)), r);
  }
}

TEST(Evaluate, ReportLayout) {
  auto items = labelled_items({{Environment::kCity, AudioClass::kSpeech}, {Environment::kCity, AudioClass::kMusic}}, 3);
  std::size_t k = 0;
  auto r = evaluate_with(std::span<const EvalItem>(items), [&](const EvalItem& i) {
    return k++ == 0 ? AudioClass::kNoise : i.label;
  });
  auto doc = render_report(r);
  EXPECT_NE(doc.find("class,CITY\nSPEECH,0.667\nMUSIC,1.000\nSPEECH_MUSIC,\nNOISE,\naverage,0.833\n"), std::string::npos)
      << doc;
  EXPECT_NE(doc.find("confusion,CITY,SPEECH,2,0,0,1\n"), std::string::npos) << doc;
}

TEST(Evaluate, ParseReportRejectsGarbage) {
  EXPECT_THROW(parse_report("hello\n"), Error);
  EXPECT_THROW(parse_report("# avac accuracy report\nconfusion,CITY,SPEECH,1,2\n"), Error);
  EXPECT_THROW(parse_report("# avac accuracy report\nconfusion,MOON,SPEECH,1,2,3,4\n"), Error);
}

TEST(Cdf, Examples) {
  auto one = accuracy_cdf(std::vector<double>{1.0, 1.0, 1.0});
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0], (CdfPoint{1.0, 1.0}));
  auto three = accuracy_cdf(std::vector<double>{1.0, 0.2, 0.6});
  ASSERT_EQ(three.size(), 3u);
  EXPECT_DOUBLE_EQ(three[0].value, 0.2);
  EXPECT_NEAR(three[0].cumulative, 1.0 / 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(three[1].value, 0.6);
  EXPECT_NEAR(three[1].cumulative, 2.0 / 3.0, 1e-12);
  EXPECT_EQ(three[2], (CdfPoint{1.0, 1.0}));
  EXPECT_EQ(render_cdf(one), "value,cum_fraction\n1,1\n");
  try {
    accuracy_cdf(std::vector<double>{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyInput);
  }
}

TEST(Cdf, RandomInputsGiveValidCdf) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> v(1 + rng() % 40);
    for (auto& x : v) x = static_cast<double>(rng() % 11) / 10.0;
    auto cdf = accuracy_cdf(v);
    for (std::size_t i = 1; i < cdf.size(); ++i) {
      EXPECT_LT(cdf[i - 1].value, cdf[i].value);
      EXPECT_LT(cdf[i - 1].cumulative, cdf[i].cumulative);
    }
    EXPECT_EQ(cdf.back().cumulative, 1.0);
    // Each step equals the fraction of inputs at or below it.
    for (const auto& p : cdf) {
      const auto below = std::count_if(v.begin(), v.end(), [&](double x) { return x <= p.value; });
      EXPECT_NEAR(p.cumulative, static_cast<double>(below) / static_cast<double>(v.size()), 1e-12);
    }
  }
}

TEST(Cdf, TenClipWindows) {
  std::vector<bool> hits(25, true);
  hits[0] = hits[1] = hits[12] = false;
  EXPECT_EQ(window_accuracies(hits), (std::vector<double>{0.8, 0.9}));
  auto items = labelled_items({{Environment::kIdle, AudioClass::kMusic}, {Environment::kIdle, AudioClass::kSpeech}}, 20);
  std::size_t k = 0;
  auto w = class_window_accuracies(std::span<const EvalItem>(items), AudioClass::kMusic,
                                   [&](const EvalItem& i) { return k++ % 5 == 0 ? AudioClass::kNoise : i.label; });
  EXPECT_EQ(w, (std::vector<double>{0.8, 0.8}));
}

TEST(Median, OddAndEven) {
  EXPECT_EQ(median({3.0, 1.0, 2.0}), 2.0);
  EXPECT_EQ(median({4.0, 1.0, 3.0, 2.0}), 2.5);
  EXPECT_THROW(median({}), Error);
}

struct Trained {
  std::vector<SynthItem> corpus;
  std::vector<LabeledFeatures> train;
  EnvironmentRegistry registry;
};

const Trained& idle_only() {
  static const Trained t = [] {
    Trained out;
    const std::array<Environment, 1> envs{Environment::kIdle};
    out.corpus = synth_corpus(6, 21, envs);
    FeatureExtractor fx;
    for (const auto& item : out.corpus) out.train.push_back({item.environment, {item.label, fx.extract(item.clip)}});
    BundleConfig cfg;
    cfg.select_features = false;
    out.registry = train_registry(out.train, cfg);
    return out;
  }();
  return t;
}

TEST(Timing, OneEntryPerClipAndStableMedian) {
  std::vector<AudioClip> clips;
  for (std::size_t i = 0; i < 12; ++i) clips.push_back(idle_only().corpus[i].clip);
  const auto& b = idle_only().registry.at(Environment::kIdle);
  auto t1 = timing_benchmark(b, clips);
  auto t2 = timing_benchmark(b, clips);
  EXPECT_EQ(t1.elapsed_ms.size(), clips.size());
  EXPECT_EQ(t1.median_ms, median(t1.elapsed_ms));
  EXPECT_LT(t1.median_ms, 1000.0);
  EXPECT_EQ(t1.cdf.back().cumulative, 1.0);
  EXPECT_LE(std::abs(t1.median_ms - t2.median_ms), 0.5 * std::max(t1.median_ms, t2.median_ms));
  auto doc = render_timing(t1);
  EXPECT_EQ(std::count(doc.begin(), doc.end(), '\n'), 3 + 12);
  clips.erase(clips.begin() + 9, clips.end());
  EXPECT_THROW(timing_benchmark(b, clips), Error);
}

TEST(Genre, RequiresTags) {
  const auto& t = idle_only();
  std::vector<EvalItem> items;
  for (const auto& s : t.train) items.push_back({s.sample.label, s.environment, std::nullopt, s.sample.features});
  try {
    genre_report(t.registry, t.registry, std::span<const EvalItem>(items));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingGenreColumn);
  }
  Manifest m;
  m.rows.push_back({"a.wav", AudioClass::kMusic, Environment::kIdle, std::nullopt, 2});
  EXPECT_THROW(genre_report(t.registry, t.registry, m), Error);
  for (auto& i : items) i.genre = "pop";
  auto rows = genre_report(t.registry, t.registry, std::span<const EvalItem>(items));
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].single, rows[0].multi);
  EXPECT_EQ(rows[0].clips, 6u);
}

TEST(Motivation, SingleEnvironmentReportsAreIdentical) {
  const auto& t = idle_only();
  std::vector<EvalItem> test;
  for (const auto& s : t.train) test.push_back({s.sample.label, s.environment, std::nullopt, s.sample.features});
  BundleConfig cfg;
  cfg.select_features = false;
  auto m = motivation_experiment(t.train, test, cfg);
  EXPECT_EQ(m.reference, Environment::kIdle);
  EXPECT_EQ(m.adaptive.confusion, m.non_adaptive.confusion);
  for (auto c : kAllAudioClasses) {
    const auto& rel = m.relative_improvement.at(Environment::kIdle)[class_index(c)];
    if (rel) {
      EXPECT_EQ(*rel, 0.0);
    }
  }
  EXPECT_NE(render_motivation(m).find("(adaptive - non_adaptive) / non_adaptive"), std::string::npos);
}

// Small end-to-end run on the synthetic corpus at 0 dB.
TEST(Motivation, HighwaySpeechDegradesWithoutAdaptation) {
  const std::array<Environment, 2> envs{Environment::kIdle, Environment::kHighway};
  FeatureExtractor fx;
  std::vector<LabeledFeatures> train;
  for (const auto& item : synth_corpus(10, 31, envs)) train.push_back({item.environment, {item.label, fx.extract(item.clip)}});
  std::vector<EvalItem> test;
  for (const auto& item : synth_corpus(10, 32, envs))
    test.push_back({item.label, item.environment, std::string(genre_name(item.genre)), fx.extract(item.clip)});
  BundleConfig cfg;
  cfg.train.seed = 1;
  auto m = motivation_experiment(train, test, cfg);
  const auto adaptive = *m.adaptive.accuracy(Environment::kHighway, AudioClass::kSpeech);
  const auto fixed = *m.non_adaptive.accuracy(Environment::kHighway, AudioClass::kSpeech);
  EXPECT_GT(adaptive, fixed);
  EXPECT_GE(*m.adaptive.accuracy(Environment::kHighway, AudioClass::kMusic), 0.9);
  EXPECT_GE(*m.non_adaptive.accuracy(Environment::kHighway, AudioClass::kMusic), 0.9);
}

TEST(Genre, TrainingGenreIsRecognised) {
  const std::array<Environment, 1> envs{Environment::kIdle};
  const std::array<Genre, 1> pop{Genre::kPop};
  FeatureExtractor fx;
  std::vector<LabeledFeatures> train;
  for (const auto& item : synth_corpus(10, 41, envs, pop)) train.push_back({item.environment, {item.label, fx.extract(item.clip)}});
  const auto registry = train_registry(train, BundleConfig{});
  std::vector<EvalItem> test;
  const std::array<AudioClass, 1> music{AudioClass::kMusic};
  for (const auto& item : synth_corpus(20, 42, envs, pop, {}, music))
    test.push_back({item.label, item.environment, std::string(genre_name(item.genre)), fx.extract(item.clip)});
  auto rows = genre_report(registry, registry, std::span<const EvalItem>(test));
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_GE(rows[0].single, 0.95);
}

TEST(Manifest, EvaluatesWavFilesDeterministically) {
  const auto& t = idle_only();
  auto dir = testing::scratch_dir("eval_manifest");
  std::string doc = "path,label,environment\n";
  for (std::size_t i = 0; i < t.corpus.size(); i += 3) {
    const auto name = "c" + std::to_string(i) + ".wav";
    write_wav(dir / name, t.corpus[i].clip);
    doc += name + "," + std::string(audio_class_name(t.corpus[i].label)) + ",IDLE\n";
  }
  write_file_atomic(dir / "m.csv", doc);
  auto m = load_manifest(dir / "m.csv");
  auto a = evaluate_manifest(t.registry, m, {}, Algorithm::kProposed);
  auto b = evaluate_manifest(t.registry, m, {}, Algorithm::kProposed);
  EXPECT_EQ(render_report(a), render_report(b));
  std::size_t n = 0;
  for (auto c : kAllAudioClasses) n += a.count(Environment::kIdle, c);
  EXPECT_EQ(n, m.rows.size());
  EXPECT_NO_THROW(evaluate_manifest(t.registry, m, {}, Algorithm::kBaseline));

  write_file_atomic(dir / "city.csv", "path,label,environment\nc0.wav,NOISE,CITY\n");
  try {
    evaluate_manifest(t.registry, load_manifest(dir / "city.csv"), {}, Algorithm::kProposed);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnknownEnvironment);
  }
  EXPECT_NO_THROW(evaluate_manifest(t.registry, load_manifest(dir / "city.csv"), {Environment::kIdle},
                                    Algorithm::kProposed));

  write_file_atomic(dir / "short.csv", "path,label,environment\nc0.wav,NOISE,IDLE\nshort.wav,NOISE,IDLE\n");
  write_wav(dir / "short.wav", testing::sine_clip(440.0, kClipLength / 2));
  try {
    evaluate_manifest(t.registry, load_manifest(dir / "short.csv"), {}, Algorithm::kProposed);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTooShort);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

}  // namespace
}  // namespace avac
