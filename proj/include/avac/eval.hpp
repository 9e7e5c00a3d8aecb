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

// Accuracy reports per environment and class, accuracy CDFs, timing,
// genre comparisons and the adaptive versus non-adaptive experiment.

#include <algorithm>
#include <array>
#include <chrono>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "avac/cascade.hpp"
#include "avac/error.hpp"
#include "avac/manifest.hpp"
#include "avac/text.hpp"

namespace avac {

inline std::size_t class_index(AudioClass c) { return static_cast<std::size_t>(c); }

// confusion[true][predicted], indexed by class_index.
using Confusion = std::array<std::array<std::size_t, 4>, 4>;

struct AccuracyReport {
  std::map<Environment, Confusion> confusion;
  std::vector<std::string> metadata;  // "key=value" lines

  void record(Environment env, AudioClass truth, AudioClass predicted) {
    ++confusion[env][class_index(truth)][class_index(predicted)];
  }

  std::size_t count(Environment env, AudioClass c) const {
    auto it = confusion.find(env);
    if (it == confusion.end()) return 0;
    std::size_t n = 0;
    for (auto v : it->second[class_index(c)]) n += v;
    return n;
  }

  // Absent when the environment has no clips of that class.
  std::optional<double> accuracy(Environment env, AudioClass c) const {
    const auto n = count(env, c);
    if (n == 0) return std::nullopt;
    return static_cast<double>(confusion.at(env)[class_index(c)][class_index(c)]) / static_cast<double>(n);
  }

  // Mean of the per-class accuracies that exist.
  std::optional<double> average(Environment env) const {
    double sum = 0.0;
    int k = 0;
    for (auto c : kAllAudioClasses) {
      if (auto a = accuracy(env, c)) {
        sum += *a;
        ++k;
      }
    }
    if (k == 0) return std::nullopt;
    return sum / k;
  }

  // Accuracy over all clips of one class, pooled across environments.
  std::optional<double> pooled_accuracy(AudioClass c) const {
    std::size_t hit = 0, n = 0;
    for (const auto& [env, m] : confusion) {
      hit += m[class_index(c)][class_index(c)];
      n += count(env, c);
    }
    if (n == 0) return std::nullopt;
    return static_cast<double>(hit) / static_cast<double>(n);
  }

  friend bool operator==(const AccuracyReport&, const AccuracyReport&) = default;
};

// ---------------------------------------------------------------------------
// Evaluation.

enum class Algorithm { kProposed, kBaseline };

inline std::string_view algorithm_name(Algorithm a) { return a == Algorithm::kProposed ? "proposed" : "baseline"; }

inline Algorithm parse_algorithm(std::string_view s) {
  if (s == "proposed") return Algorithm::kProposed;
  if (s == "baseline") return Algorithm::kBaseline;
  throw Error(ErrorCode::kInvalidArgument, "unknown algorithm '" + std::string(s) + "'");
}

// Adaptive routing when `forced` is empty, otherwise every clip uses the
// forced environment's bundle.
struct EvalMode {
  std::optional<Environment> forced;

  std::string describe() const {
    return forced ? "non_adaptive(" + std::string(environment_name(*forced)) + ")" : "adaptive";
  }
};

struct EvalItem {
  AudioClass label = AudioClass::kNoise;
  Environment environment = Environment::kIdle;
  std::optional<std::string> genre;
  ClipFeatureVector features;
};

// Scores items with any callable `classify(const EvalItem&) -> AudioClass`.
template <typename Classifier>
AccuracyReport evaluate_with(std::span<const EvalItem> items, Classifier&& classify) {
  if (items.empty()) throw Error(ErrorCode::kEmptyManifest, "nothing to evaluate");
  AccuracyReport r;
  for (const auto& item : items) r.record(item.environment, item.label, classify(item));
  return r;
}

inline const ModelBundle& bundle_for(const EnvironmentRegistry& registry, const EvalMode& mode, Environment env) {
  return registry.at(mode.forced.value_or(env));
}

// Items must hold features extracted with each used bundle's feature config.
inline AccuracyReport evaluate_items(const EnvironmentRegistry& registry, std::span<const EvalItem> items,
                                     const EvalMode& mode, Algorithm algorithm) {
  for (const auto& item : items) bundle_for(registry, mode, item.environment);
  auto r = evaluate_with(items, [&](const EvalItem& item) {
    const auto& b = bundle_for(registry, mode, item.environment);
    return algorithm == Algorithm::kProposed ? classify_features(b, item.features).label
                                             : baseline_classify_features(b, item.features).label;
  });
  r.metadata.push_back("mode=" + mode.describe());
  r.metadata.push_back("algorithm=" + std::string(algorithm_name(algorithm)));
  return r;
}

// Every 1-s clip of every row's file becomes one item.
inline std::vector<EvalItem> load_eval_items(const Manifest& manifest, const FeatureConfig& cfg = {}) {
  if (manifest.rows.empty()) throw Error(ErrorCode::kEmptyManifest, "manifest has no rows");
  FeatureExtractor fx(cfg);
  std::vector<EvalItem> out;
  for (const auto& row : manifest.rows) {
    try {
      auto audio = load_wav(manifest.resolve(row));
      auto clips = split_clips(audio);
      if (clips.empty()) throw Error(ErrorCode::kTooShort, "shorter than one clip");
      for (const auto& clip : clips) out.push_back({row.label, row.environment, row.genre, fx.extract(clip)});
    } catch (const Error& e) {
      throw Error(e.code(), "line " + std::to_string(row.line) + " (" + row.path + "): " + e.detail());
    }
  }
  return out;
}

// Checks that every bundle the mode can reach extracts features like `cfg`.
inline void require_feature_config(const EnvironmentRegistry& registry, const FeatureConfig& cfg) {
  for (const auto& [env, b] : registry.bundles())
    if (!(b.features == cfg))
      throw Error(ErrorCode::kInvalidConfig, "bundles disagree on feature settings; evaluate them separately");
}

inline AccuracyReport evaluate_manifest(const EnvironmentRegistry& registry, const Manifest& manifest,
                                        const EvalMode& mode, Algorithm algorithm) {
  if (registry.empty()) throw Error(ErrorCode::kUnknownEnvironment, "registry is empty");
  const auto& cfg = registry.bundles().begin()->second.features;
  require_feature_config(registry, cfg);
  for (const auto& row : manifest.rows) bundle_for(registry, mode, row.environment);
  auto items = load_eval_items(manifest, cfg);
  return evaluate_items(registry, items, mode, algorithm);
}

// ---------------------------------------------------------------------------
// Report CSV: an accuracy grid (classes by environments, 3 decimals), then a
// confusion section that carries the exact counts.

inline std::string render_report(const AccuracyReport& r) {
  std::ostringstream os;
  os << "# avac accuracy report\n";
  for (const auto& m : r.metadata) os << "# " << m << '\n';
  os << "class";
  for (const auto& [env, m] : r.confusion) os << ',' << environment_name(env);
  os << '\n';
  auto cell = [](std::optional<double> v) { return v ? text::format_fixed(*v, 3) : std::string(); };
  for (auto c : kAllAudioClasses) {
    os << audio_class_name(c);
    for (const auto& [env, m] : r.confusion) os << ',' << cell(r.accuracy(env, c));
    os << '\n';
  }
  os << "average";
  for (const auto& [env, m] : r.confusion) os << ',' << cell(r.average(env));
  os << "\n\nconfusion,environment,true";
  for (auto c : kAllAudioClasses) os << ',' << audio_class_name(c);
  os << '\n';
  for (const auto& [env, m] : r.confusion) {
    for (auto t : kAllAudioClasses) {
      os << "confusion," << environment_name(env) << ',' << audio_class_name(t);
      for (auto p : kAllAudioClasses) os << ',' << m[class_index(t)][class_index(p)];
      os << '\n';
    }
  }
  return os.str();
}

inline AccuracyReport parse_report(std::string_view doc) {
  AccuracyReport r;
  bool title = false;
  for (auto raw : text::split(doc, '\n')) {
    if (raw.empty()) continue;
    std::string_view line = raw;
    if (line.starts_with("# ")) {
      if (!title) {
        title = true;
        continue;
      }
      r.metadata.emplace_back(line.substr(2));
      continue;
    }
    auto cells = text::split(line, ',');
    if (cells[0] != "confusion" || cells.size() < 3 || cells[1] == "environment") continue;
    if (cells.size() != 7) throw Error(ErrorCode::kInvalidArgument, "malformed confusion row '" + std::string(line) + "'");
    const auto env = parse_environment(cells[1]);
    const auto truth = parse_audio_class(cells[2]);
    auto& row = r.confusion[env][class_index(truth)];
    for (std::size_t k = 0; k < 4; ++k) {
      const auto v = text::parse_int(cells[3 + k], ErrorCode::kInvalidArgument);
      if (v < 0) throw Error(ErrorCode::kInvalidArgument, "negative count in report");
      row[k] = static_cast<std::size_t>(v);
    }
  }
  if (!title) throw Error(ErrorCode::kInvalidArgument, "not an accuracy report");
  return r;
}

// ---------------------------------------------------------------------------
// Accuracy CDFs.

struct CdfPoint {
  double value = 0.0;
  double cumulative = 0.0;

  friend bool operator==(const CdfPoint&, const CdfPoint&) = default;
};

// Empirical CDF as a step function: one point per distinct value.
inline std::vector<CdfPoint> accuracy_cdf(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::kEmptyInput, "CDF needs at least one value");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  std::vector<CdfPoint> out;
  const double n = static_cast<double>(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i + 1 < v.size() && v[i + 1] == v[i]) continue;
    out.push_back({v[i], i + 1 == v.size() ? 1.0 : static_cast<double>(i + 1) / n});
  }
  return out;
}

// Fraction correct in consecutive windows of `window` predictions; a
// trailing partial window is dropped.
inline std::vector<double> window_accuracies(const std::vector<bool>& correct, std::size_t window = 10) {
  std::vector<double> out;
  for (std::size_t s = 0; s + window <= correct.size(); s += window) {
    std::size_t hits = 0;
    for (std::size_t i = s; i < s + window; ++i) hits += correct[i];
    out.push_back(static_cast<double>(hits) / static_cast<double>(window));
  }
  return out;
}

// Window accuracies for one class: items of that class in order.
template <typename Classifier>
std::vector<double> class_window_accuracies(std::span<const EvalItem> items, AudioClass c, Classifier&& classify,
                                            std::size_t window = 10) {
  std::vector<bool> hits;
  for (const auto& item : items)
    if (item.label == c) hits.push_back(classify(item) == c);
  return window_accuracies(hits, window);
}

inline std::string render_cdf(std::span<const CdfPoint> cdf) {
  std::string out = "value,cum_fraction\n";
  for (const auto& p : cdf) out += text::format_real(p.value) + ',' + text::format_real(p.cumulative) + '\n';
  return out;
}

// ---------------------------------------------------------------------------
// Timing.

struct TimingResult {
  std::vector<double> elapsed_ms;  // one per clip, in input order
  double median_ms = 0.0;
  std::vector<CdfPoint> cdf;
};

inline double median(std::vector<double> v) {
  if (v.empty()) throw Error(ErrorCode::kEmptyInput, "median of nothing");
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Wall-clock feature extraction plus classification per clip, after three
// untimed warm-up runs. Decoding is not included.
inline TimingResult timing_benchmark(const ModelBundle& bundle, std::span<const AudioClip> clips) {
  if (clips.size() < 10) throw Error(ErrorCode::kTooFewSamples, "timing needs at least 10 clips");
  for (int w = 0; w < 3; ++w) (void)classify_clip(bundle, clips[static_cast<std::size_t>(w) % clips.size()]);
  TimingResult t;
  for (const auto& clip : clips) {
    const auto start = std::chrono::steady_clock::now();
    auto r = classify_clip(bundle, clip);
    const auto stop = std::chrono::steady_clock::now();
    (void)r;
    t.elapsed_ms.push_back(std::chrono::duration<double, std::milli>(stop - start).count());
  }
  t.median_ms = median(t.elapsed_ms);
  t.cdf = accuracy_cdf(t.elapsed_ms);
  return t;
}

inline std::string render_timing(const TimingResult& t) {
  std::string out = "# classification path only: feature extraction + cascade, decode excluded\n";
  out += "# median_ms=" + text::format_fixed(t.median_ms, 3) + "\nclip,elapsed_ms\n";
  for (std::size_t i = 0; i < t.elapsed_ms.size(); ++i)
    out += std::to_string(i) + ',' + text::format_fixed(t.elapsed_ms[i], 3) + '\n';
  return out;
}

// ---------------------------------------------------------------------------
// Genre comparison.

struct GenreAccuracy {
  std::string genre;
  std::size_t clips = 0;
  double single = 0.0;  // registry trained on one genre
  double multi = 0.0;   // registry trained on all genres
};

// MUSIC accuracy per genre under two registries (adaptive routing).
inline std::vector<GenreAccuracy> genre_report(const EnvironmentRegistry& single, const EnvironmentRegistry& multi,
                                               std::span<const EvalItem> items) {
  std::map<std::string, std::vector<const EvalItem*>> by_genre;
  for (const auto& item : items) {
    if (item.label != AudioClass::kMusic) continue;
    if (!item.genre) throw Error(ErrorCode::kMissingGenreColumn, "music item without a genre tag");
    by_genre[*item.genre].push_back(&item);
  }
  if (by_genre.empty()) throw Error(ErrorCode::kMissingGenreColumn, "no genre-tagged music items");
  std::vector<GenreAccuracy> out;
  for (const auto& [genre, list] : by_genre) {
    GenreAccuracy g{genre, list.size(), 0.0, 0.0};
    for (const auto* item : list) {
      g.single += classify_features(single.at(item->environment), item->features).label == AudioClass::kMusic;
      g.multi += classify_features(multi.at(item->environment), item->features).label == AudioClass::kMusic;
    }
    g.single /= static_cast<double>(list.size());
    g.multi /= static_cast<double>(list.size());
    out.push_back(g);
  }
  return out;
}

inline std::vector<GenreAccuracy> genre_report(const EnvironmentRegistry& single, const EnvironmentRegistry& multi,
                                               const Manifest& manifest) {
  if (!manifest.has_genre_column) throw Error(ErrorCode::kMissingGenreColumn, "manifest has no genre column");
  const auto& cfg = multi.bundles().begin()->second.features;
  return genre_report(single, multi, load_eval_items(manifest, cfg));
}

inline std::string render_genre_report(std::span<const GenreAccuracy> rows) {
  std::string out = "genre,clips,single_genre_accuracy,multi_genre_accuracy\n";
  for (const auto& g : rows)
    out += g.genre + ',' + std::to_string(g.clips) + ',' + text::format_fixed(g.single, 3) + ',' +
           text::format_fixed(g.multi, 3) + '\n';
  return out;
}

// ---------------------------------------------------------------------------
// Adaptive versus non-adaptive.

struct LabeledFeatures {
  Environment environment;
  TrainingSample sample;
};

struct MotivationResult {
  Environment reference;  // the single environment used for non-adaptive training
  AccuracyReport adaptive;
  AccuracyReport non_adaptive;
  // (adaptive - non_adaptive) / non_adaptive per environment and class;
  // absent where the non-adaptive accuracy is zero or undefined.
  std::map<Environment, std::array<std::optional<double>, 4>> relative_improvement;
};

inline std::map<Environment, std::vector<TrainingSample>> split_by_environment(std::span<const LabeledFeatures> train) {
  std::map<Environment, std::vector<TrainingSample>> out;
  for (const auto& t : train) out[t.environment].push_back(t.sample);
  return out;
}

inline EnvironmentRegistry train_registry(std::span<const LabeledFeatures> train, const BundleConfig& cfg) {
  EnvironmentRegistry reg;
  for (const auto& [env, samples] : split_by_environment(train)) reg.add(train_bundle(env, samples, cfg));
  return reg;
}

// Trains one bundle on the reference environment (IDLE when present) and
// evaluates it everywhere, against per-environment bundles routed
// adaptively. Pass `adaptive` to reuse already trained bundles.
inline MotivationResult motivation_experiment(std::span<const LabeledFeatures> train, std::span<const EvalItem> test,
                                              const BundleConfig& cfg,
                                              const EnvironmentRegistry* adaptive = nullptr) {
  auto by_env = split_by_environment(train);
  if (by_env.empty()) throw Error(ErrorCode::kEmptyInput, "no training data");
  MotivationResult m;
  m.reference = by_env.count(Environment::kIdle) ? Environment::kIdle : by_env.begin()->first;
  EnvironmentRegistry trained;
  if (!adaptive) {
    trained = train_registry(train, cfg);
    adaptive = &trained;
  }
  EnvironmentRegistry reference_only;
  reference_only.add(adaptive->at(m.reference));
  m.adaptive = evaluate_items(*adaptive, test, EvalMode{}, Algorithm::kProposed);
  m.non_adaptive = evaluate_items(reference_only, test, EvalMode{m.reference}, Algorithm::kProposed);
  for (const auto& [env, conf] : m.adaptive.confusion) {
    auto& row = m.relative_improvement[env];
    for (auto c : kAllAudioClasses) {
      auto a = m.adaptive.accuracy(env, c), n = m.non_adaptive.accuracy(env, c);
      if (a && n && *n > 0.0) row[class_index(c)] = (*a - *n) / *n;
    }
  }
  return m;
}

inline std::string render_motivation(const MotivationResult& m) {
  std::ostringstream os;
  os << "# relative improvement = (adaptive - non_adaptive) / non_adaptive\n";
  os << "# non_adaptive bundle = " << environment_name(m.reference) << '\n';
  os << "environment,class,adaptive,non_adaptive,relative_improvement\n";
  for (const auto& [env, conf] : m.adaptive.confusion) {
    for (auto c : kAllAudioClasses) {
      auto a = m.adaptive.accuracy(env, c), n = m.non_adaptive.accuracy(env, c);
      if (!a) continue;
      const auto& rel = m.relative_improvement.at(env)[class_index(c)];
      os << environment_name(env) << ',' << audio_class_name(c) << ',' << text::format_fixed(*a, 3) << ','
         << (n ? text::format_fixed(*n, 3) : "") << ',' << (rel ? text::format_fixed(*rel, 3) : "") << '\n';
    }
  }
  return os.str();
}

}  // namespace avac
