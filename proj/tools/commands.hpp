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

#include <CLI11.hpp>
#include <json.hpp>

#include <cctype>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "avac/config.hpp"
#include "avac/eval.hpp"
#include "avac/synth.hpp"

namespace avac::cli {

enum ExitCode : int { kExitOk = 0, kExitUsage = 2, kExitData = 3, kExitInternal = 4 };

namespace detail {

namespace fs = std::filesystem;

struct Common {
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;

  RunConfig resolve() const {
    auto c = load_config(config ? std::optional<fs::path>(*config) : std::nullopt);
    if (seed) c.seed = *seed;
    return c;
  }
};

inline void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "key=value settings file (falls back to AVAC_CONFIG)");
  sub->add_option("--seed", c.seed, "overrides the configured seed");
}

// "# tool=..." and "# config k=v" lines for text artifacts.
inline std::string artifact_header(const RunConfig& c) {
  std::string out;
  for (const auto& m : effective_bundle_config(c).metadata) out += "# " + m + '\n';
  return out;
}

inline void emit(const std::optional<std::string>& path, const std::string& doc, std::ostream& out) {
  if (path) write_file_atomic(*path, doc);
  else out << doc;
}

inline Environment environment_arg(const std::string& s) {
  auto e = try_parse_environment(s);
  if (!e) throw Error(ErrorCode::kUnknownEnvironment, "unknown environment '" + s + "'");
  return *e;
}

inline Manifest only(const Manifest& m, Environment e) {
  Manifest out = m;
  out.rows = m.for_environment(e);
  if (out.rows.empty())
    throw Error(ErrorCode::kEmptyManifest, "manifest has no rows for " + std::string(environment_name(e)));
  return out;
}

inline std::vector<TrainingSample> samples_of(const Manifest& m, const FeatureConfig& cfg) {
  std::vector<TrainingSample> out;
  for (auto& item : load_eval_items(m, cfg)) out.push_back({item.label, item.features});
  return out;
}

inline std::vector<AudioClip> clips_of(const std::string& path) {
  auto clips = split_clips(load_wav(path));
  if (clips.empty()) throw Error(ErrorCode::kTooShort, path + " is shorter than one 1-s clip");
  return clips;
}

inline std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& ch : out) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return out;
}

inline std::vector<std::string> list_arg(const std::string& s) {
  std::vector<std::string> out;
  for (auto t : text::split(s, ',')) {
    auto v = text::trim(t);
    if (!v.empty()) out.emplace_back(v);
  }
  return out;
}

}  // namespace detail

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  using namespace detail;
  CLI::App app{"avac: driving-environment-aware audio classifier"};
  app.name("avac");
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  // train
  Common train_c;
  std::string train_manifest, train_env, train_out;
  auto* train = app.add_subcommand("train", "train one bundle per environment from a manifest");
  train->add_option("--manifest", train_manifest, "CSV with path,label,environment")->required();
  train->add_option("--env", train_env, "environment name, or 'all'")->required();
  train->add_option("--out", train_out, "directory for <env>.bundle")->required();
  add_common(train, train_c);

  // classify
  Common cls_c;
  std::string cls_dir, cls_input;
  std::optional<std::string> cls_env, cls_log;
  bool cls_auto = false, cls_no_log = false;
  auto* cls = app.add_subcommand("classify", "classify every 1-s clip of a WAV file");
  cls->add_option("--model-dir", cls_dir, "directory of bundles")->required();
  cls->add_option("--input", cls_input, "16 kHz mono PCM16 WAV")->required();
  auto* env_opt = cls->add_option("--env", cls_env, "driving environment");
  auto* auto_opt = cls->add_flag("--auto-env", cls_auto, "pick the environment from the leading clip");
  env_opt->excludes(auto_opt);
  cls->add_flag("--no-log", cls_no_log, "do not append to the clip log");
  cls->add_option("--log", cls_log, "clip log path (default <model-dir>/classified_clips.csv)");
  add_common(cls, cls_c);

  // evaluate
  Common ev_c;
  std::string ev_dir, ev_manifest, ev_mode = "adaptive", ev_alg = "proposed", ev_cdf_class = "MUSIC";
  std::optional<std::string> ev_out, ev_cdf;
  auto* ev = app.add_subcommand("evaluate", "accuracy report for a labelled manifest");
  ev->add_option("--model-dir", ev_dir, "directory of bundles")->required();
  ev->add_option("--manifest", ev_manifest, "test manifest")->required();
  ev->add_option("--mode", ev_mode, "'adaptive' or an environment name to force one bundle");
  ev->add_option("--algorithm", ev_alg, "proposed or baseline");
  ev->add_option("--out", ev_out, "report CSV (default stdout)");
  ev->add_option("--cdf", ev_cdf, "also write the 10-clip window accuracy CDF here");
  ev->add_option("--cdf-class", ev_cdf_class, "class for --cdf");
  add_common(ev, ev_c);

  // motivation
  Common mot_c;
  std::string mot_train, mot_test;
  std::optional<std::string> mot_out;
  auto* mot = app.add_subcommand("motivation", "adaptive versus single-bundle comparison");
  mot->add_option("--train", mot_train, "training manifest")->required();
  mot->add_option("--test", mot_test, "test manifest")->required();
  mot->add_option("--out", mot_out, "CSV (default stdout)");
  add_common(mot, mot_c);

  // genre
  Common gen_c;
  std::string gen_single, gen_multi, gen_manifest;
  std::optional<std::string> gen_out;
  auto* gen = app.add_subcommand("genre", "per-genre MUSIC accuracy of two registries");
  gen->add_option("--single-dir", gen_single, "bundles trained on one genre")->required();
  gen->add_option("--multi-dir", gen_multi, "bundles trained on all genres")->required();
  gen->add_option("--manifest", gen_manifest, "test manifest with a genre column")->required();
  gen->add_option("--out", gen_out, "CSV (default stdout)");
  add_common(gen, gen_c);

  // bench
  Common bench_c;
  std::string bench_dir, bench_env, bench_input;
  std::optional<std::string> bench_out;
  auto* bench = app.add_subcommand("bench", "per-clip classification timing");
  bench->add_option("--model-dir", bench_dir, "directory of bundles")->required();
  bench->add_option("--env", bench_env, "bundle to time")->required();
  bench->add_option("--input", bench_input, "WAV of at least 10 s")->required();
  bench->add_option("--out", bench_out, "timing CSV (default stdout)");
  add_common(bench, bench_c);

  // mix
  Common mix_c;
  std::optional<std::string> mix_speech, mix_music, mix_noise;
  std::string mix_out;
  double mix_gain = 0.0, mix_snr = 0.0;
  auto* mix = app.add_subcommand("mix", "speech + music at a gain, then noise at an SNR");
  mix->add_option("--speech", mix_speech, "speech WAV");
  mix->add_option("--music", mix_music, "music WAV");
  mix->add_option("--gain", mix_gain, "music gain in dB relative to speech");
  mix->add_option("--noise", mix_noise, "noise WAV");
  mix->add_option("--snr", mix_snr, "signal-to-noise ratio in dB");
  mix->add_option("--out", mix_out, "output WAV")->required();
  add_common(mix, mix_c);

  // spectrogram
  Common spec_c;
  std::string spec_input;
  std::optional<std::string> spec_out;
  double spec_win = 25.0, spec_hop = 10.0;
  auto* spec = app.add_subcommand("spectrogram", "STFT magnitude CSV");
  spec->add_option("--input", spec_input, "WAV")->required();
  spec->add_option("--out", spec_out, "CSV (default stdout)");
  spec->add_option("--win-ms", spec_win, "window length");
  spec->add_option("--hop-ms", spec_hop, "hop length");
  add_common(spec, spec_c);

  // select
  Common sel_c;
  std::string sel_manifest, sel_env, sel_pair;
  std::optional<std::string> sel_out;
  auto* sel = app.add_subcommand("select", "wrapper feature selection for one model pair");
  sel->add_option("--manifest", sel_manifest, "training manifest")->required();
  sel->add_option("--env", sel_env, "environment")->required();
  sel->add_option("--pair", sel_pair, "e.g. speech:noise")->required();
  sel->add_option("--out", sel_out, "JSON (default stdout)");
  add_common(sel, sel_c);

  // features
  Common feat_c;
  std::string feat_input;
  std::optional<std::string> feat_out;
  auto* feat = app.add_subcommand("features", "feature vector of every 1-s clip");
  feat->add_option("--input", feat_input, "WAV")->required();
  feat->add_option("--out", feat_out, "CSV (default stdout)");
  add_common(feat, feat_c);

  // synth
  Common syn_c;
  std::string syn_out, syn_envs = "HIGHWAY,LOCAL,CITY,IDLE", syn_genres = "pop,jazz,classic,rap";
  std::size_t syn_per_cell = 40;
  double syn_snr = 0.0;
  auto* syn = app.add_subcommand("synth", "write a synthetic labelled corpus and its manifest");
  syn->add_option("--out", syn_out, "output directory")->required();
  syn->add_option("--per-cell", syn_per_cell, "clips per (class, environment)");
  syn->add_option("--envs", syn_envs, "comma-separated environments");
  syn->add_option("--genres", syn_genres, "comma-separated music genres");
  syn->add_option("--snr", syn_snr, "source to environment noise ratio in dB");
  add_common(syn, syn_c);

  std::vector<std::string> argv_store{"avac"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*train) {
      const auto c = train_c.resolve();
      const auto m = load_manifest(train_manifest);
      std::vector<Environment> envs;
      if (lower(train_env) == "all") {
        for (auto e : kAllEnvironments)
          if (!m.for_environment(e).empty()) envs.push_back(e);
        if (envs.empty()) throw Error(ErrorCode::kEmptyManifest, "manifest has no rows");
      } else {
        envs.push_back(environment_arg(train_env));
      }
      const auto cfg = effective_bundle_config(c);
      fs::create_directories(train_out);
      for (auto e : envs) {
        auto bundle = train_bundle(e, samples_of(only(m, e), cfg.features), cfg);
        const auto path = fs::path(train_out) / bundle_file_name(e);
        save_bundle(path, bundle);
        out << "wrote " << path.string() << '\n';
      }
    } else if (*cls) {
      if (!cls_env && !cls_auto) throw Error(ErrorCode::kInvalidArgument, "give --env or --auto-env");
      (void)cls_c.resolve();
      const auto registry = load_registry(cls_dir);
      const auto clips = clips_of(cls_input);
      const Environment env = cls_auto ? detect_environment(registry, clips.front()) : environment_arg(*cls_env);
      const auto& bundle = registry.at(env);
      std::vector<std::string> log_rows;
      const auto stamp = utc_now();
      for (std::size_t i = 0; i < clips.size(); ++i) {
        const auto r = classify_clip(bundle, clips[i]);
        out << i << ',' << audio_class_name(r.label) << ',' << environment_name(r.environment_used) << ','
            << stage_columns(r.trace) << '\n';
        log_rows.push_back(clip_log_row(stamp, cls_input + "#" + std::to_string(i), r));
      }
      if (!cls_no_log) append_clip_log(cls_log ? fs::path(*cls_log) : fs::path(cls_dir) / "classified_clips.csv", log_rows);
    } else if (*ev) {
      const auto c = ev_c.resolve();
      const auto registry = load_registry(ev_dir);
      EvalMode mode;
      if (lower(ev_mode) != "adaptive") mode.forced = environment_arg(ev_mode);
      const auto algorithm = parse_algorithm(ev_alg);
      const auto cdf_class = parse_audio_class(ev_cdf_class);
      const auto manifest = load_manifest(ev_manifest);
      if (registry.empty()) throw Error(ErrorCode::kUnknownEnvironment, "registry is empty");
      const auto& fcfg = registry.bundles().begin()->second.features;
      require_feature_config(registry, fcfg);
      for (const auto& row : manifest.rows) bundle_for(registry, mode, row.environment);
      const auto items = load_eval_items(manifest, fcfg);
      auto report = evaluate_items(registry, items, mode, algorithm);
      auto meta = effective_bundle_config(c).metadata;
      report.metadata.insert(report.metadata.end(), meta.begin(), meta.end());
      emit(ev_out, render_report(report), out);
      if (ev_cdf) {
        auto windows = class_window_accuracies(std::span<const EvalItem>(items), cdf_class, [&](const EvalItem& item) {
          const auto& b = bundle_for(registry, mode, item.environment);
          return algorithm == Algorithm::kProposed ? classify_features(b, item.features).label
                                                   : baseline_classify_features(b, item.features).label;
        });
        const auto cdf = accuracy_cdf(windows);
        write_file_atomic(*ev_cdf, artifact_header(c) + "# class=" + std::string(audio_class_name(cdf_class)) +
                                       " window=10\n" + render_cdf(cdf));
      }
    } else if (*mot) {
      const auto c = mot_c.resolve();
      const auto cfg = effective_bundle_config(c);
      std::vector<LabeledFeatures> train_set;
      for (auto& item : load_eval_items(load_manifest(mot_train), cfg.features))
        train_set.push_back({item.environment, {item.label, item.features}});
      const auto test_items = load_eval_items(load_manifest(mot_test), cfg.features);
      const auto m = motivation_experiment(train_set, test_items, cfg);
      emit(mot_out, artifact_header(c) + render_motivation(m), out);
    } else if (*gen) {
      const auto c = gen_c.resolve();
      const auto single = load_registry(gen_single);
      const auto multi = load_registry(gen_multi);
      const auto rows = genre_report(single, multi, load_manifest(gen_manifest));
      emit(gen_out, artifact_header(c) + render_genre_report(rows), out);
    } else if (*bench) {
      const auto c = bench_c.resolve();
      const auto registry = load_registry(bench_dir);
      const auto& bundle = registry.at(environment_arg(bench_env));
      const auto t = timing_benchmark(bundle, clips_of(bench_input));
      emit(bench_out, artifact_header(c) + render_timing(t), out);
    } else if (*mix) {
      const auto c = mix_c.resolve();
      if (!mix_speech && !mix_music) throw Error(ErrorCode::kInvalidArgument, "give --speech, --music or both");
      std::size_t clipped = 0, clipped_noise = 0;
      std::optional<AudioClip> signal;
      if (mix_speech && mix_music) signal = mix_signals(load_wav(*mix_speech), load_wav(*mix_music), mix_gain, &clipped);
      else if (mix_speech) signal = load_wav(*mix_speech);
      else signal = load_wav(*mix_music);
      if (mix_noise) signal = add_noise_at_snr(*signal, load_wav(*mix_noise), mix_snr, &clipped_noise);
      std::string comment = "tool=avac " + std::string(kToolVersion) + "; gain_db=" + text::format_real(mix_gain);
      if (mix_noise) comment += "; snr_db=" + text::format_real(mix_snr);
      for (const auto& l : config_lines(c)) comment += "; " + l;
      write_wav(mix_out, *signal, comment);
      if (clipped + clipped_noise > 0) err << "warning: " << clipped + clipped_noise << " samples clipped\n";
    } else if (*spec) {
      const auto c = spec_c.resolve();
      const auto s = stft_spectrogram(load_wav(spec_input), spec_win, spec_hop);
      std::ostringstream os;
      os << artifact_header(c) << "# win_ms=" << text::format_real(spec_win)
         << " hop_ms=" << text::format_real(spec_hop) << '\n';
      write_spectrogram_csv(os, s);
      emit(spec_out, os.str(), out);
    } else if (*sel) {
      const auto c = sel_c.resolve();
      const auto cfg = effective_bundle_config(c);
      const auto env = environment_arg(sel_env);
      const auto pair = parse_model_pair(sel_pair);
      const auto [first, second] = pair_classes(pair);
      std::vector<Vector> pos, neg;
      for (const auto& s : samples_of(only(load_manifest(sel_manifest), env), cfg.features)) {
        if (s.label == first) pos.push_back(s.features.to_vector());
        if (s.label == second) neg.push_back(s.features.to_vector());
      }
      SelectionConfig sc;
      sc.train = cfg.train;
      sc.train.seed = derive_seed(c.seed, pair_index(pair));
      sc.min_improvement = cfg.selection_delta;
      const auto result = wrapper_select(pos, neg, sc);
      nlohmann::ordered_json j;
      j["tool"] = "avac " + std::string(kToolVersion);
      j["environment"] = environment_name(env);
      j["pair"] = model_pair_name(pair);
      j["layout_version"] = result.mask.layout_version;
      j["groups"] = nlohmann::json::array();
      for (auto g : result.mask.included_groups) j["groups"].push_back(feature_group_name(g));
      j["indices"] = result.mask.resolved_indices;
      j["trace"] = nlohmann::json::array();
      for (const auto& step : result.trace)
        j["trace"].push_back({{"added", feature_group_name(step.added)}, {"cv_accuracy", step.cv_accuracy}});
      j["config"] = nlohmann::ordered_json::object();
      for (const auto& l : config_lines(c)) {
        const auto eq = l.find('=');
        j["config"][l.substr(0, eq)] = l.substr(eq + 1);
      }
      emit(sel_out, j.dump(2) + '\n', out);
    } else if (*feat) {
      const auto c = feat_c.resolve();
      FeatureExtractor fx(c.bundle.features);
      std::ostringstream os;
      os << artifact_header(c) << "clip_index";
      for (const auto& d : feature_layout()) os << ',' << d.name;
      os << '\n';
      const auto clips = clips_of(feat_input);
      for (std::size_t i = 0; i < clips.size(); ++i) {
        const auto v = fx.extract(clips[i]);
        os << i;
        for (double x : v.values) os << ',' << text::format_real(x);
        os << '\n';
      }
      emit(feat_out, os.str(), out);
    } else if (*syn) {
      const auto c = syn_c.resolve();
      std::vector<Environment> envs;
      for (const auto& s : list_arg(syn_envs)) envs.push_back(environment_arg(s));
      std::vector<Genre> genres;
      for (const auto& s : list_arg(syn_genres)) {
        auto g = try_parse_genre(s);
        if (!g) throw Error(ErrorCode::kInvalidArgument, "unknown genre '" + s + "'");
        genres.push_back(*g);
      }
      if (envs.empty() || genres.empty()) throw Error(ErrorCode::kInvalidArgument, "need environments and genres");
      SynthConfig sc;
      sc.snr_db = syn_snr;
      fs::create_directories(syn_out);
      std::string manifest = artifact_header(c) + "# snr_db=" + text::format_real(syn_snr) +
                             "\npath,label,environment,genre\n";
      std::map<std::pair<Environment, AudioClass>, std::size_t> next;
      for (const auto& item : synth_corpus(syn_per_cell, c.seed, envs, genres, sc)) {
        const auto k = next[{item.environment, item.label}]++;
        const auto name = lower(environment_name(item.environment)) + "_" + lower(audio_class_name(item.label)) +
                          "_" + std::to_string(k) + ".wav";
        write_wav(fs::path(syn_out) / name, item.clip);
        const bool tuneful = item.label == AudioClass::kMusic || item.label == AudioClass::kSpeechMusic;
        manifest += name + ',' + std::string(audio_class_name(item.label)) + ',' +
                    std::string(environment_name(item.environment)) + ',' +
                    (tuneful ? std::string(genre_name(item.genre)) : std::string()) + '\n';
      }
      write_file_atomic(fs::path(syn_out) / "manifest.csv", manifest);
      out << "wrote " << (fs::path(syn_out) / "manifest.csv").string() << '\n';
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.code() == ErrorCode::kInvalidArgument || e.code() == ErrorCode::kInvalidConfig ? kExitUsage : kExitData;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitOk;
}

}  // namespace avac::cli
