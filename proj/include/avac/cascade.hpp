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

// Per-environment model bundles and the staged classifier: a noise
// detector of three binary models, a music detector of two, and a final
// speech versus speech+music decision. Also environment detection and a
// speech/non-speech-first hierarchy for comparison.

#include <array>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "avac/audio_io.hpp"
#include "avac/error.hpp"
#include "avac/features.hpp"
#include "avac/selection.hpp"
#include "avac/svm.hpp"
#include "avac/text.hpp"

namespace avac {

enum class AudioClass { kSpeech, kMusic, kSpeechMusic, kNoise };

inline constexpr std::array<AudioClass, 4> kAllAudioClasses{AudioClass::kSpeech, AudioClass::kMusic,
                                                           AudioClass::kSpeechMusic, AudioClass::kNoise};

inline std::string_view audio_class_name(AudioClass c) {
  switch (c) {
    case AudioClass::kSpeech: return "SPEECH";
    case AudioClass::kMusic: return "MUSIC";
    case AudioClass::kSpeechMusic: return "SPEECH_MUSIC";
    case AudioClass::kNoise: return "NOISE";
  }
  return "?";
}

namespace cascade_detail {

inline std::string upper(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace cascade_detail

// Case-insensitive; "speech+music" is accepted for SPEECH_MUSIC.
inline std::optional<AudioClass> try_parse_audio_class(std::string_view s) {
  auto u = cascade_detail::upper(text::trim(s));
  if (u == "SPEECH+MUSIC") u = "SPEECH_MUSIC";
  for (auto c : kAllAudioClasses)
    if (audio_class_name(c) == u) return c;
  return std::nullopt;
}

inline AudioClass parse_audio_class(std::string_view s) {
  if (auto c = try_parse_audio_class(s)) return *c;
  throw Error(ErrorCode::kInvalidArgument, "unknown audio class '" + std::string(s) + "'");
}

enum class Environment { kHighway, kLocal, kCity, kIdle };

inline constexpr std::array<Environment, 4> kAllEnvironments{Environment::kHighway, Environment::kLocal,
                                                            Environment::kCity, Environment::kIdle};

inline std::string_view environment_name(Environment e) {
  switch (e) {
    case Environment::kHighway: return "HIGHWAY";
    case Environment::kLocal: return "LOCAL";
    case Environment::kCity: return "CITY";
    case Environment::kIdle: return "IDLE";
  }
  return "?";
}

inline std::optional<Environment> try_parse_environment(std::string_view s) {
  auto u = cascade_detail::upper(text::trim(s));
  for (auto e : kAllEnvironments)
    if (environment_name(e) == u) return e;
  return std::nullopt;
}

inline Environment parse_environment(std::string_view s) {
  if (auto e = try_parse_environment(s)) return *e;
  throw Error(ErrorCode::kUnknownEnvironment, "unknown environment '" + std::string(s) + "'");
}

inline std::string bundle_file_name(Environment e) {
  std::string n(environment_name(e));
  for (auto& c : n) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return n + ".bundle";
}

// The six one-versus-one models. The first class of each pair is the
// positive label.
enum class ModelPair { kSpeechNoise, kMusicNoise, kSpeechMusicNoise, kSpeechMusic, kSpeechMusicMusic, kSpeechSpeechMusic };

inline constexpr std::array<ModelPair, 6> kAllModelPairs{ModelPair::kSpeechNoise,       ModelPair::kMusicNoise,
                                                        ModelPair::kSpeechMusicNoise, ModelPair::kSpeechMusic,
                                                        ModelPair::kSpeechMusicMusic, ModelPair::kSpeechSpeechMusic};

inline std::pair<AudioClass, AudioClass> pair_classes(ModelPair p) {
  switch (p) {
    case ModelPair::kSpeechNoise: return {AudioClass::kSpeech, AudioClass::kNoise};
    case ModelPair::kMusicNoise: return {AudioClass::kMusic, AudioClass::kNoise};
    case ModelPair::kSpeechMusicNoise: return {AudioClass::kSpeechMusic, AudioClass::kNoise};
    case ModelPair::kSpeechMusic: return {AudioClass::kSpeech, AudioClass::kMusic};
    case ModelPair::kSpeechMusicMusic: return {AudioClass::kSpeechMusic, AudioClass::kMusic};
    case ModelPair::kSpeechSpeechMusic: return {AudioClass::kSpeech, AudioClass::kSpeechMusic};
  }
  return {AudioClass::kSpeech, AudioClass::kNoise};
}

inline std::string_view model_pair_name(ModelPair p) {
  switch (p) {
    case ModelPair::kSpeechNoise: return "speech:noise";
    case ModelPair::kMusicNoise: return "music:noise";
    case ModelPair::kSpeechMusicNoise: return "speech_music:noise";
    case ModelPair::kSpeechMusic: return "speech:music";
    case ModelPair::kSpeechMusicMusic: return "speech_music:music";
    case ModelPair::kSpeechSpeechMusic: return "speech:speech_music";
  }
  return "?";
}

inline ModelPair parse_model_pair(std::string_view s) {
  for (auto p : kAllModelPairs)
    if (model_pair_name(p) == s) return p;
  throw Error(ErrorCode::kInvalidArgument, "unknown model pair '" + std::string(s) + "'");
}

inline std::size_t pair_index(ModelPair p) { return static_cast<std::size_t>(p); }

// How stage values are obtained from a model: its calibrated posterior, or
// the logistic of the raw margin (a = -1, b = 0).
enum class DecisionMode { kProbability, kMargin };

inline std::string_view decision_mode_name(DecisionMode m) {
  return m == DecisionMode::kProbability ? "probability" : "margin";
}

inline DecisionMode parse_decision_mode(std::string_view s) {
  if (s == "probability") return DecisionMode::kProbability;
  if (s == "margin") return DecisionMode::kMargin;
  throw Error(ErrorCode::kInvalidConfig, "unknown decision mode '" + std::string(s) + "'");
}

struct PairModel {
  FeatureMask mask;
  TrainedSVM svm;  // trained on standardized vectors restricted to mask

  friend bool operator==(const PairModel&, const PairModel&) = default;
};

struct ModelBundle {
  Environment environment = Environment::kIdle;
  std::array<PairModel, 6> pairs;
  StandardScaler scaler;
  double theta = 0.5;
  DecisionMode mode = DecisionMode::kProbability;
  FeatureConfig features;
  int layout_version = kLayoutVersion;
  // Raw-feature mean and per-dimension std of the NOISE training clips.
  Vector noise_centroid;
  Vector noise_spread;
  // Speech-or-speech+music versus music-or-noise, for the hierarchical baseline.
  std::optional<PairModel> baseline;
  std::vector<std::string> metadata;  // free-form provenance lines

  const PairModel& pair(ModelPair p) const { return pairs[pair_index(p)]; }

  friend bool operator==(const ModelBundle&, const ModelBundle&) = default;
};

// ---------------------------------------------------------------------------
// Staged routing.

// Stage values of one classification. Stage-2 and stage-3 values are absent
// when an earlier stage decided.
struct StageTrace {
  std::array<double, 3> p_noise{};  // P(noise) from speech:noise, music:noise, speech_music:noise
  std::optional<std::array<double, 2>> p_music;  // P(music) from speech:music, speech_music:music
  std::optional<double> d_final;  // speech:speech_music decision, positive toward SPEECH

  friend bool operator==(const StageTrace&, const StageTrace&) = default;
};

inline bool noise_detected(const StageTrace& t, double theta) {
  return t.p_noise[0] > theta && t.p_noise[1] > theta && t.p_noise[2] > theta;
}

inline bool music_detected(const std::array<double, 2>& p_music, double theta) {
  return p_music[0] > theta && p_music[1] > theta;
}

// The label implied by a trace. Throws InvalidArgument if the trace stops
// before a decision is reached.
inline AudioClass route_trace(const StageTrace& t, double theta) {
  if (noise_detected(t, theta)) return AudioClass::kNoise;
  if (!t.p_music) throw Error(ErrorCode::kInvalidArgument, "trace lacks music-detector values");
  if (music_detected(*t.p_music, theta)) return AudioClass::kMusic;
  if (!t.d_final) throw Error(ErrorCode::kInvalidArgument, "trace lacks the final decision");
  return *t.d_final > 0.0 ? AudioClass::kSpeech : AudioClass::kSpeechMusic;
}

struct ClassificationResult {
  AudioClass label = AudioClass::kNoise;
  StageTrace trace;
  Environment environment_used = Environment::kIdle;
  std::chrono::nanoseconds elapsed{0};
  // Hierarchical baseline only: the speech/non-speech decision.
  std::optional<double> d_speech;
};

// Runs the stages against a scorer providing, per pair, the probability of
// the pair's first class and the raw decision value.
template <typename Scorer>
StageTrace run_stages(const Scorer& scorer, double theta) {
  StageTrace t;
  t.p_noise = {1.0 - scorer.probability(ModelPair::kSpeechNoise), 1.0 - scorer.probability(ModelPair::kMusicNoise),
               1.0 - scorer.probability(ModelPair::kSpeechMusicNoise)};
  if (noise_detected(t, theta)) return t;
  t.p_music = std::array<double, 2>{1.0 - scorer.probability(ModelPair::kSpeechMusic),
                                    1.0 - scorer.probability(ModelPair::kSpeechMusicMusic)};
  if (music_detected(*t.p_music, theta)) return t;
  t.d_final = scorer.decision(ModelPair::kSpeechSpeechMusic);
  return t;
}

// Scores the bundle's models on one clip's features.
class BundleScorer {
 public:
  BundleScorer(const ModelBundle& bundle, const ClipFeatureVector& features)
      : bundle_(bundle), scaled_(bundle.scaler.apply(features.values)) {
    if (features.layout_version != bundle.layout_version)
      throw Error(ErrorCode::kLayoutMismatch, "clip features use layout " + std::to_string(features.layout_version) +
                                                  ", bundle expects " + std::to_string(bundle.layout_version));
  }

  double decision(ModelPair p) const { return decision_value(bundle_.pair(p).svm, scaled_); }
  double probability(ModelPair p) const { return probability_of(bundle_.pair(p).svm); }
  double baseline_decision() const { return decision_value(bundle_.baseline->svm, scaled_); }

 private:
  double probability_of(const TrainedSVM& m) const {
    const double d = decision_value(m, scaled_);
    return bundle_.mode == DecisionMode::kProbability ? platt_probability(m.platt_a, m.platt_b, d)
                                                      : platt_probability(-1.0, 0.0, d);
  }

  const ModelBundle& bundle_;
  Vector scaled_;
};

inline ClassificationResult classify_features(const ModelBundle& bundle, const ClipFeatureVector& features) {
  ClassificationResult r;
  BundleScorer scorer(bundle, features);
  r.trace = run_stages(scorer, bundle.theta);
  r.label = route_trace(r.trace, bundle.theta);
  r.environment_used = bundle.environment;
  return r;
}

inline ClassificationResult classify_clip(const ModelBundle& bundle, const AudioClip& clip) {
  const auto start = std::chrono::steady_clock::now();
  auto r = classify_features(bundle, FeatureExtractor(bundle.features).extract(clip));
  r.elapsed = std::chrono::steady_clock::now() - start;
  return r;
}

// Hierarchical baseline: the same noise detector, then a combined speech
// versus non-speech model, then speech:speech_music or music:noise.
template <typename Scorer>
ClassificationResult run_baseline(const Scorer& scorer, double theta) {
  ClassificationResult r;
  r.trace.p_noise = {1.0 - scorer.probability(ModelPair::kSpeechNoise),
                     1.0 - scorer.probability(ModelPair::kMusicNoise),
                     1.0 - scorer.probability(ModelPair::kSpeechMusicNoise)};
  if (noise_detected(r.trace, theta)) {
    r.label = AudioClass::kNoise;
    return r;
  }
  r.d_speech = scorer.baseline_decision();
  if (*r.d_speech > 0.0) {
    r.trace.d_final = scorer.decision(ModelPair::kSpeechSpeechMusic);
    r.label = *r.trace.d_final > 0.0 ? AudioClass::kSpeech : AudioClass::kSpeechMusic;
  } else {
    r.trace.d_final = scorer.decision(ModelPair::kMusicNoise);
    r.label = *r.trace.d_final > 0.0 ? AudioClass::kMusic : AudioClass::kNoise;
  }
  return r;
}

inline ClassificationResult baseline_classify_features(const ModelBundle& bundle,
                                                       const ClipFeatureVector& features) {
  if (!bundle.baseline)
    throw Error(ErrorCode::kInvalidModel,
                "bundle for " + std::string(environment_name(bundle.environment)) + " has no baseline model");
  auto r = run_baseline(BundleScorer(bundle, features), bundle.theta);
  r.environment_used = bundle.environment;
  return r;
}

inline ClassificationResult baseline_hierarchical_classify(const ModelBundle& bundle, const AudioClip& clip) {
  const auto start = std::chrono::steady_clock::now();
  auto r = baseline_classify_features(bundle, FeatureExtractor(bundle.features).extract(clip));
  r.elapsed = std::chrono::steady_clock::now() - start;
  return r;
}

// ---------------------------------------------------------------------------
// Training.

struct TrainingSample {
  AudioClass label = AudioClass::kNoise;
  ClipFeatureVector features;
};

struct BundleConfig {
  TrainConfig train;
  double theta = 0.5;
  DecisionMode mode = DecisionMode::kProbability;
  bool select_features = true;
  bool grid_search = false;
  bool train_baseline = true;
  double selection_delta = 0.005;
  std::size_t min_per_class = 5;
  FeatureConfig features;
  std::vector<std::string> metadata;
};

namespace cascade_detail {

inline PairModel train_pair(std::span<const Vector> raw_pos, std::span<const Vector> raw_neg,
                            const StandardScaler& scaler, const BundleConfig& cfg, std::uint64_t seed,
                            std::string positive, std::string negative) {
  TrainConfig tc = cfg.train;
  tc.seed = seed;
  PairModel pm;
  if (cfg.select_features) {
    SelectionConfig sc;
    sc.train = tc;
    sc.min_improvement = cfg.selection_delta;
    pm.mask = wrapper_select(raw_pos, raw_neg, sc).mask;
  } else {
    pm.mask = full_feature_mask();
  }
  if (cfg.grid_search) tc = grid_search(raw_pos, raw_neg, tc, 5, pm.mask.resolved_indices);
  auto pos = apply_scaler(scaler, raw_pos);
  auto neg = apply_scaler(scaler, raw_neg);
  pm.svm = train_calibrated(pos, neg, tc, pm.mask.resolved_indices);
  pm.svm.label_positive = std::move(positive);
  pm.svm.label_negative = std::move(negative);
  return pm;
}

inline std::string lower_name(AudioClass c) {
  std::string s(audio_class_name(c));
  for (auto& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return s;
}

}  // namespace cascade_detail

// Fits the shared scaler, selects a feature mask per pair and trains the
// six calibrated models (plus the baseline model when requested).
inline ModelBundle train_bundle(Environment env, std::span<const TrainingSample> samples, const BundleConfig& cfg = {}) {
  std::map<AudioClass, std::vector<Vector>> by_class;
  std::vector<Vector> all;
  for (const auto& s : samples) {
    if (s.features.layout_version != kLayoutVersion)
      throw Error(ErrorCode::kLayoutMismatch, "training sample uses layout " + std::to_string(s.features.layout_version));
    by_class[s.label].push_back(s.features.to_vector());
    all.push_back(s.features.to_vector());
  }
  for (auto c : kAllAudioClasses) {
    const auto n = by_class[c].size();
    if (n == 0)
      throw Error(ErrorCode::kMissingClass, "no " + std::string(audio_class_name(c)) + " clips for environment " +
                                                std::string(environment_name(env)));
    if (n < cfg.min_per_class)
      throw Error(ErrorCode::kTooFewSamples, std::string(audio_class_name(c)) + " has " + std::to_string(n) +
                                                 " clips for environment " + std::string(environment_name(env)) +
                                                 ", need " + std::to_string(cfg.min_per_class));
  }

  ModelBundle b;
  b.environment = env;
  b.theta = cfg.theta;
  b.mode = cfg.mode;
  b.features = cfg.features;
  b.metadata = cfg.metadata;
  b.scaler = fit_scaler(all);
  for (auto p : kAllModelPairs) {
    auto [first, second] = pair_classes(p);
    b.pairs[pair_index(p)] =
        cascade_detail::train_pair(by_class[first], by_class[second], b.scaler, cfg, derive_seed(cfg.train.seed, pair_index(p)),
                                   cascade_detail::lower_name(first), cascade_detail::lower_name(second));
  }
  if (cfg.train_baseline) {
    std::vector<Vector> speechy = by_class[AudioClass::kSpeech], other = by_class[AudioClass::kMusic];
    for (const auto& v : by_class[AudioClass::kSpeechMusic]) speechy.push_back(v);
    for (const auto& v : by_class[AudioClass::kNoise]) other.push_back(v);
    b.baseline = cascade_detail::train_pair(speechy, other, b.scaler, cfg, derive_seed(cfg.train.seed, 6), "speech_any",
                                            "nonspeech");
  }

  const auto& noise = by_class[AudioClass::kNoise];
  b.noise_centroid.assign(kFeatureDim, 0.0);
  b.noise_spread.assign(kFeatureDim, 0.0);
  for (const auto& v : noise)
    for (std::size_t d = 0; d < kFeatureDim; ++d) b.noise_centroid[d] += v[d] / static_cast<double>(noise.size());
  for (const auto& v : noise)
    for (std::size_t d = 0; d < kFeatureDim; ++d) {
      const double e = v[d] - b.noise_centroid[d];
      b.noise_spread[d] += e * e / static_cast<double>(noise.size());
    }
  for (auto& s : b.noise_spread) s = std::sqrt(s);
  return b;
}

inline std::vector<TrainingSample> extract_samples(std::span<const std::pair<AudioClass, AudioClip>> clips,
                                                   const FeatureConfig& cfg = {}) {
  FeatureExtractor fx(cfg);
  std::vector<TrainingSample> out;
  out.reserve(clips.size());
  for (const auto& [label, clip] : clips) out.push_back({label, fx.extract(clip)});
  return out;
}

// ---------------------------------------------------------------------------
// Registry, streams and environment detection.

class EnvironmentRegistry {
 public:
  EnvironmentRegistry() = default;
  explicit EnvironmentRegistry(std::vector<ModelBundle> bundles) {
    for (auto& b : bundles) add(std::move(b));
  }

  void add(ModelBundle b) {
    const auto env = b.environment;
    bundles_.insert_or_assign(env, std::move(b));
  }

  bool contains(Environment e) const { return bundles_.count(e) != 0; }
  std::size_t size() const { return bundles_.size(); }
  bool empty() const { return bundles_.empty(); }

  const ModelBundle& at(Environment e) const {
    auto it = bundles_.find(e);
    if (it == bundles_.end())
      throw Error(ErrorCode::kUnknownEnvironment,
                  "no model bundle for environment " + std::string(environment_name(e)));
    return it->second;
  }

  std::vector<Environment> environments() const {
    std::vector<Environment> out;
    for (const auto& [e, b] : bundles_) out.push_back(e);
    return out;
  }

  const std::map<Environment, ModelBundle>& bundles() const { return bundles_; }

 private:
  std::map<Environment, ModelBundle> bundles_;
};

inline std::vector<ClassificationResult> classify_stream(const EnvironmentRegistry& registry,
                                                         std::span<const AudioClip> clips,
                                                         std::span<const Environment> environments) {
  if (clips.size() != environments.size())
    throw Error(ErrorCode::kLengthMismatch, "one environment is needed per clip");
  for (auto e : environments) registry.at(e);
  std::vector<ClassificationResult> out;
  out.reserve(clips.size());
  for (std::size_t i = 0; i < clips.size(); ++i) out.push_back(classify_clip(registry.at(environments[i]), clips[i]));
  return out;
}

// Nearest noise centroid. Each dimension is scaled by the pooled standard
// deviation sqrt(mean over bundles of spread^2).
inline Environment detect_environment_from_features(const EnvironmentRegistry& registry,
                                                    const ClipFeatureVector& features) {
  std::vector<const ModelBundle*> with_centroid;
  for (const auto& [e, b] : registry.bundles())
    if (b.noise_centroid.size() == kFeatureDim && b.noise_spread.size() == kFeatureDim) with_centroid.push_back(&b);
  if (with_centroid.size() < 2)
    throw Error(ErrorCode::kInsufficientCentroids, "environment detection needs at least two bundles with noise "
                                                   "centroids (have " + std::to_string(with_centroid.size()) + ")");
  Vector scale(kFeatureDim, 0.0);
  for (const auto* b : with_centroid)
    for (std::size_t d = 0; d < kFeatureDim; ++d) scale[d] += b->noise_spread[d] * b->noise_spread[d];
  for (auto& s : scale) s = std::max(std::sqrt(s / static_cast<double>(with_centroid.size())), StandardScaler::kStdFloor);
  double best = std::numeric_limits<double>::infinity();
  Environment best_env = with_centroid.front()->environment;
  for (const auto* b : with_centroid) {
    double dist = 0.0;
    for (std::size_t d = 0; d < kFeatureDim; ++d) {
      const double z = (features.values[d] - b->noise_centroid[d]) / scale[d];
      dist += z * z;
    }
    if (dist < best) {
      best = dist;
      best_env = b->environment;
    }
  }
  return best_env;
}

inline Environment detect_environment(const EnvironmentRegistry& registry, const AudioClip& noise_clip) {
  if (registry.empty()) throw Error(ErrorCode::kInsufficientCentroids, "registry is empty");
  const auto& cfg = registry.bundles().begin()->second.features;
  return detect_environment_from_features(registry, FeatureExtractor(cfg).extract(noise_clip));
}

// ---------------------------------------------------------------------------
// Bundle text format.

inline constexpr int kBundleFormatVersion = 1;

namespace cascade_detail {

inline std::string mask_line(const FeatureMask& m) { return "mask " + mask_to_string(m) + "\n"; }

inline void put_reals(std::ostringstream& os, std::string_view key, std::span<const double> v) {
  os << key << ' ' << v.size();
  if (!v.empty()) os << ' ' << text::join_reals(v);
  os << '\n';
}

inline Vector get_reals(std::span<const std::string_view> toks, const std::string& line) {
  if (toks.size() < 2) throw Error(ErrorCode::kInvalidModel, "malformed line: '" + line + "'");
  const auto n = text::parse_int(toks[1]);
  if (n < 0 || static_cast<std::size_t>(n) != toks.size() - 2)
    throw Error(ErrorCode::kInvalidModel, "value count mismatch in '" + std::string(toks[0]) + "'");
  Vector out;
  for (std::size_t i = 2; i < toks.size(); ++i) out.push_back(text::parse_real(toks[i]));
  return out;
}

}  // namespace cascade_detail

inline std::string serialize_bundle(const ModelBundle& b) {
  using cascade_detail::put_reals;
  using text::format_real;
  std::ostringstream os;
  os << "avac-bundle " << kBundleFormatVersion << '\n';
  for (const auto& m : b.metadata) os << "meta " << m << '\n';
  os << "environment " << environment_name(b.environment) << '\n';
  os << "layout_version " << b.layout_version << '\n';
  os << "theta " << format_real(b.theta) << '\n';
  os << "decision_mode " << decision_mode_name(b.mode) << '\n';
  const auto& f = b.features;
  os << "feature_config " << format_real(f.silence_threshold) << ' ' << format_real(f.nfr_threshold) << ' '
     << format_real(f.nfr_min_pitch_hz) << ' ' << format_real(f.nfr_max_pitch_hz) << ' ' << format_real(f.hzcrr_factor)
     << ' ' << format_real(f.lster_factor) << ' ' << format_real(f.rolloff_fraction) << ' ' << f.mel_filters << '\n';
  put_reals(os, "scaler_means", b.scaler.means);
  put_reals(os, "scaler_stds", b.scaler.stds);
  put_reals(os, "noise_centroid", b.noise_centroid);
  put_reals(os, "noise_spread", b.noise_spread);
  for (auto p : kAllModelPairs) {
    os << "pair " << model_pair_name(p) << '\n' << cascade_detail::mask_line(b.pair(p).mask);
    os << serialize_svm(b.pair(p).svm);
  }
  if (b.baseline) os << "baseline\n" << cascade_detail::mask_line(b.baseline->mask) << serialize_svm(b.baseline->svm);
  os << "end_bundle\n";
  return os.str();
}

inline ModelBundle parse_bundle(std::istream& is) {
  ModelBundle b;
  std::string line;
  bool header = false, ended = false, have_env = false;
  std::array<bool, 6> have_pair{};
  auto read_mask = [&]() {
    if (!std::getline(is, line)) throw Error(ErrorCode::kInvalidModel, "bundle truncated before mask");
    auto toks = text::tokens(line);
    if (toks.size() != 2 || toks[0] != "mask") throw Error(ErrorCode::kInvalidModel, "expected mask line, got '" + line + "'");
    try {
      return parse_mask(toks[1]);
    } catch (const Error& e) {
      throw Error(ErrorCode::kInvalidModel, "bad mask: " + e.detail());
    }
  };
  while (std::getline(is, line)) {
    auto toks = text::tokens(line);
    if (toks.empty()) continue;
    const auto key = toks[0];
    if (!header) {
      if (key != "avac-bundle" || toks.size() != 2)
        throw Error(ErrorCode::kInvalidModel, "expected 'avac-bundle' header, got '" + line + "'");
      if (text::parse_int(toks[1]) != kBundleFormatVersion)
        throw Error(ErrorCode::kInvalidModel, "unsupported bundle format version " + std::string(toks[1]));
      header = true;
      continue;
    }
    if (key == "end_bundle") {
      ended = true;
      break;
    }
    if (key == "meta") {
      auto rest = std::string_view(line).substr(line.find("meta") + 4);
      b.metadata.emplace_back(rest.empty() ? rest : rest.substr(1));
    } else if (key == "environment" && toks.size() == 2) {
      auto e = try_parse_environment(toks[1]);
      if (!e) throw Error(ErrorCode::kInvalidModel, "unknown environment '" + std::string(toks[1]) + "'");
      b.environment = *e;
      have_env = true;
    } else if (key == "layout_version" && toks.size() == 2) {
      b.layout_version = static_cast<int>(text::parse_int(toks[1]));
    } else if (key == "theta" && toks.size() == 2) {
      b.theta = text::parse_real(toks[1]);
    } else if (key == "decision_mode" && toks.size() == 2) {
      try {
        b.mode = parse_decision_mode(toks[1]);
      } catch (const Error& e) {
        throw Error(ErrorCode::kInvalidModel, e.detail());
      }
    } else if (key == "feature_config" && toks.size() == 9) {
      auto& f = b.features;
      f.silence_threshold = text::parse_real(toks[1]);
      f.nfr_threshold = text::parse_real(toks[2]);
      f.nfr_min_pitch_hz = text::parse_real(toks[3]);
      f.nfr_max_pitch_hz = text::parse_real(toks[4]);
      f.hzcrr_factor = text::parse_real(toks[5]);
      f.lster_factor = text::parse_real(toks[6]);
      f.rolloff_fraction = text::parse_real(toks[7]);
      f.mel_filters = static_cast<int>(text::parse_int(toks[8]));
    } else if (key == "scaler_means") {
      b.scaler.means = cascade_detail::get_reals(toks, line);
    } else if (key == "scaler_stds") {
      b.scaler.stds = cascade_detail::get_reals(toks, line);
    } else if (key == "noise_centroid") {
      b.noise_centroid = cascade_detail::get_reals(toks, line);
    } else if (key == "noise_spread") {
      b.noise_spread = cascade_detail::get_reals(toks, line);
    } else if (key == "pair" && toks.size() == 2) {
      ModelPair p;
      try {
        p = parse_model_pair(toks[1]);
      } catch (const Error& e) {
        throw Error(ErrorCode::kInvalidModel, e.detail());
      }
      auto& pm = b.pairs[pair_index(p)];
      pm.mask = read_mask();
      pm.svm = parse_svm(is);
      have_pair[pair_index(p)] = true;
    } else if (key == "baseline") {
      PairModel pm;
      pm.mask = read_mask();
      pm.svm = parse_svm(is);
      b.baseline = std::move(pm);
    } else {
      throw Error(ErrorCode::kInvalidModel, "unexpected bundle line '" + line + "'");
    }
  }
  if (!header) throw Error(ErrorCode::kInvalidModel, "empty bundle document");
  if (!ended) throw Error(ErrorCode::kInvalidModel, "bundle truncated (no end_bundle)");
  if (!have_env) throw Error(ErrorCode::kInvalidModel, "bundle lacks an environment");
  for (auto p : kAllModelPairs)
    if (!have_pair[pair_index(p)])
      throw Error(ErrorCode::kInvalidModel, "bundle lacks model " + std::string(model_pair_name(p)));
  if (b.layout_version != kLayoutVersion)
    throw Error(ErrorCode::kLayoutMismatch, "bundle uses feature layout " + std::to_string(b.layout_version));
  if (b.scaler.means.size() != kFeatureDim || b.scaler.stds.size() != kFeatureDim)
    throw Error(ErrorCode::kInvalidModel, "bundle scaler must have " + std::to_string(kFeatureDim) + " dimensions");
  if (!(b.theta > 0.0 && b.theta < 1.0)) throw Error(ErrorCode::kInvalidModel, "theta must lie in (0, 1)");
  auto check = [&](const PairModel& pm) {
    if (pm.svm.layout_version != b.layout_version || pm.svm.dimension != kFeatureDim)
      throw Error(ErrorCode::kLayoutMismatch, "model layout disagrees with bundle");
    if (pm.svm.feature_indices != pm.mask.resolved_indices)
      throw Error(ErrorCode::kInvalidModel, "model feature indices disagree with its mask");
  };
  for (const auto& pm : b.pairs) check(pm);
  if (b.baseline) check(*b.baseline);
  return b;
}

inline ModelBundle parse_bundle(const std::string& doc) {
  std::istringstream is(doc);
  return parse_bundle(is);
}

inline ModelBundle load_bundle(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kNotFound, "cannot open bundle " + path.string());
  return parse_bundle(in);
}

inline void save_bundle(const std::filesystem::path& path, const ModelBundle& b) {
  write_file_atomic(path, serialize_bundle(b));
}

// Loads every `<env>.bundle` in a directory.
inline EnvironmentRegistry load_registry(const std::filesystem::path& dir) {
  EnvironmentRegistry reg;
  for (auto e : kAllEnvironments) {
    auto p = dir / bundle_file_name(e);
    if (!std::filesystem::exists(p)) continue;
    auto b = load_bundle(p);
    if (b.environment != e)
      throw Error(ErrorCode::kInvalidModel, p.string() + " holds the " + std::string(environment_name(b.environment)) +
                                                " bundle");
    reg.add(std::move(b));
  }
  if (reg.empty()) throw Error(ErrorCode::kNotFound, "no model bundles in " + dir.string());
  return reg;
}

// ---------------------------------------------------------------------------
// Classified-clip log.

inline constexpr std::string_view kClipLogHeader = "timestamp,path,environment,label,p_n1,p_n2,p_n3,p_m1,p_m2,d_final";

// The stage columns shared by the log and the classify output.
inline std::string stage_columns(const StageTrace& t) {
  using text::format_real;
  std::string s = format_real(t.p_noise[0]) + ',' + format_real(t.p_noise[1]) + ',' + format_real(t.p_noise[2]) + ',';
  if (t.p_music) s += format_real((*t.p_music)[0]) + ',' + format_real((*t.p_music)[1]);
  else s += ',';
  s += ',';
  if (t.d_final) s += format_real(*t.d_final);
  return s;
}

inline std::string clip_log_row(std::string_view timestamp, std::string_view path, const ClassificationResult& r) {
  return std::string(timestamp) + ',' + std::string(path) + ',' + std::string(environment_name(r.environment_used)) +
         ',' + std::string(audio_class_name(r.label)) + ',' + stage_columns(r.trace);
}

// Appends rows, writing the header first when the file is new or empty.
inline void append_clip_log(const std::filesystem::path& path, std::span<const std::string> rows) {
  const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
  std::ofstream out(path, std::ios::app | std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot append to " + path.string());
  if (fresh) out << kClipLogHeader << '\n';
  for (const auto& r : rows) out << r << '\n';
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

}  // namespace avac
