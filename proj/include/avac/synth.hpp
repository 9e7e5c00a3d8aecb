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

// Procedural corpus: speech and music surrogates, four vehicle-noise
// profiles, and labelled 1-s clips mixed at a chosen SNR.

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "avac/audio_io.hpp"
#include "avac/cascade.hpp"
#include "avac/iir.hpp"
#include "avac/random.hpp"

namespace avac {

enum class Genre { kPop, kJazz, kClassic, kRap };

inline constexpr std::array<Genre, 4> kAllGenres{Genre::kPop, Genre::kJazz, Genre::kClassic, Genre::kRap};

inline std::string_view genre_name(Genre g) {
  switch (g) {
    case Genre::kPop: return "pop";
    case Genre::kJazz: return "jazz";
    case Genre::kClassic: return "classic";
    case Genre::kRap: return "rap";
  }
  return "?";
}

inline std::optional<Genre> try_parse_genre(std::string_view s) {
  for (auto g : kAllGenres)
    if (genre_name(g) == text::trim(s)) return g;
  return std::nullopt;
}

namespace synth_detail {

constexpr double kPi = std::numbers::pi;
constexpr double kFs = kSampleRateHz;
constexpr std::size_t kN = kClipLength;

inline double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

// Box-Muller on the engine's raw output.
inline double gaussian(Rng& rng) {
  double u1 = uniform01(rng);
  while (u1 <= 0.0) u1 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * uniform01(rng));
}

inline std::vector<double> white(Rng& rng, std::size_t n = kN) {
  std::vector<double> x(n);
  for (auto& v : x) v = gaussian(rng);
  return x;
}

inline void one_pole_lowpass(std::vector<double>& x, double cutoff_hz) {
  const double a = std::exp(-2.0 * kPi * cutoff_hz / kFs);
  double y = 0.0;
  for (auto& v : x) {
    y = (1.0 - a) * v + a * y;
    v = y;
  }
}

inline void highpass_diff(std::vector<double>& x) {
  double prev = 0.0;
  for (auto& v : x) {
    const double cur = v;
    v = cur - prev;
    prev = cur;
  }
}

// Two-pole resonator at `f` Hz with bandwidth `bw` Hz, unit peak gain.
inline void resonate(std::vector<double>& x, double f, double bw) {
  const double r = std::exp(-kPi * bw / kFs);
  const double a1 = -2.0 * r * std::cos(2.0 * kPi * f / kFs), a2 = r * r;
  const double g = (1.0 - r) * std::sqrt(1.0 - 2.0 * r * std::cos(4.0 * kPi * f / kFs) + r * r);
  double y1 = 0.0, y2 = 0.0;
  for (auto& v : x) {
    const double y = g * v - a1 * y1 - a2 * y2;
    y2 = y1;
    y1 = y;
    v = y;
  }
}

inline void scale_to_rms(std::vector<double>& x, double target) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  const double r = std::sqrt(acc / static_cast<double>(x.size()));
  if (r > 0.0)
    for (auto& v : x) v *= target / r;
}

inline void add(std::vector<double>& dst, const std::vector<double>& src, double gain = 1.0) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += gain * src[i];
}

// Sum of harmonics with amplitude k^-tilt, starting at `start` for `len`
// samples, shaped by an attack/exponential-decay envelope.
inline void add_tone(std::vector<double>& out, Rng& rng, double f0, std::size_t start, std::size_t len, double amp,
                     int harmonics, double tilt, double attack_s, double decay_per_s, double vibrato_hz = 0.0,
                     double vibrato_depth = 0.0) {
  const std::size_t end = std::min(out.size(), start + len);
  const int kmax = std::max(1, std::min(harmonics, static_cast<int>(7000.0 / (f0 * (1.0 + vibrato_depth)))));
  std::vector<double> phase(static_cast<std::size_t>(harmonics)), gain(static_cast<std::size_t>(kmax));
  for (auto& p : phase) p = uniform(rng, 0.0, 2.0 * kPi);
  for (int k = 1; k <= kmax; ++k) gain[static_cast<std::size_t>(k - 1)] = std::pow(static_cast<double>(k), -tilt);
  const double attack = std::max(1.0, attack_s * kFs);
  const double decay = std::exp(-decay_per_s / kFs);
  double ph = 0.0, env_decay = 1.0;
  for (std::size_t i = start; i < end; ++i) {
    const double t = static_cast<double>(i - start) / kFs;
    const double f = vibrato_depth > 0.0 ? f0 * (1.0 + vibrato_depth * std::sin(2.0 * kPi * vibrato_hz * t)) : f0;
    ph += 2.0 * kPi * f / kFs;
    double env = std::min(1.0, static_cast<double>(i - start) / attack) * env_decay;
    env_decay *= decay;
    const double rel = static_cast<double>(end - i) / (0.01 * kFs);  // 10 ms release
    if (rel < 1.0) env *= rel;
    double s = 0.0;
    for (int k = 0; k < kmax; ++k) s += gain[static_cast<std::size_t>(k)] * std::sin((k + 1) * ph + phase[static_cast<std::size_t>(k)]);
    out[i] += amp * env * s;
  }
}

// Decaying noise burst; `bright` > 0 emphasizes highs by differencing.
inline void add_burst(std::vector<double>& out, Rng& rng, std::size_t start, double dur_s, double amp, double decay_per_s,
                      int bright, double lowpass_hz = 0.0) {
  const std::size_t len = static_cast<std::size_t>(dur_s * kFs);
  auto n = white(rng, len);
  for (int b = 0; b < bright; ++b) highpass_diff(n);
  if (lowpass_hz > 0.0) one_pole_lowpass(n, lowpass_hz);
  scale_to_rms(n, 1.0);
  for (std::size_t i = 0; i < len && start + i < out.size(); ++i)
    out[start + i] += amp * n[i] * std::exp(-decay_per_s * static_cast<double>(i) / kFs);
}

// Decaying sine with a downward pitch sweep, for kick and 808 drums.
inline void add_kick(std::vector<double>& out, std::size_t start, double f_hi, double f_lo, double dur_s, double amp) {
  const std::size_t len = static_cast<std::size_t>(dur_s * kFs);
  double ph = 0.0;
  for (std::size_t i = 0; i < len && start + i < out.size(); ++i) {
    const double t = static_cast<double>(i) / kFs;
    const double f = f_lo + (f_hi - f_lo) * std::exp(-t * 30.0);
    ph += 2.0 * kPi * f / kFs;
    out[start + i] += amp * std::sin(ph) * std::exp(-t * 4.0 / dur_s);
  }
}

// Blends in a first difference (positive amount) or a 1 kHz one-pole
// lowpass (negative amount): a crude microphone and room coloration.
inline void tilt(std::vector<double>& x, double amount) {
  auto shaped = x;
  if (amount > 0) {
    highpass_diff(shaped);
  } else {
    one_pole_lowpass(shaped, 1000.0);
  }
  scale_to_rms(shaped, 1.0);
  std::vector<double> orig = x;
  scale_to_rms(orig, 1.0);
  const double w = std::abs(amount);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = (1.0 - w) * orig[i] + w * shaped[i];
}

inline double midi_hz(double note) { return 440.0 * std::pow(2.0, (note - 69.0) / 12.0); }

inline std::size_t at(double seconds) { return static_cast<std::size_t>(std::max(0.0, seconds) * kFs); }

}  // namespace synth_detail

// Voiced syllables (glottal pulses through three formants) separated by
// short pauses, with occasional fricatives.
inline std::vector<double> synth_speech_source(Rng& rng) {
  using namespace synth_detail;
  std::vector<double> out(kN, 0.0);
  const double f0_base = uniform(rng, 95.0, 230.0);
  // Vowel formant sets (F1, F2, F3).
  static constexpr std::array<std::array<double, 3>, 6> kVowels{
      {{730, 1090, 2440}, {270, 2290, 3010}, {530, 1840, 2480}, {570, 840, 2410}, {300, 870, 2240}, {660, 1720, 2410}}};
  double t = uniform(rng, 0.0, 0.12);
  while (t < 1.0) {
    if (uniform01(rng) < 0.35) {
      const double fd = uniform(rng, 0.04, 0.09);
      auto fr = white(rng, at(fd));
      highpass_diff(fr);
      resonate(fr, uniform(rng, 3500.0, 5500.0), 1500.0);
      scale_to_rms(fr, uniform(rng, 0.2, 0.5));
      for (std::size_t i = 0; i < fr.size() && at(t) + i < kN; ++i) {
        const double w = std::sin(kPi * static_cast<double>(i) / static_cast<double>(fr.size()));
        out[at(t) + i] += w * fr[i];
      }
      t += fd;
    }
    const double dur = uniform(rng, 0.10, 0.24);
    const std::size_t s0 = at(t), len = at(dur);
    if (s0 >= kN) break;
    const auto& vowel = kVowels[uniform_index(rng, kVowels.size())];
    const double f0_start = f0_base * uniform(rng, 0.9, 1.2), f0_end = f0_start * uniform(rng, 0.8, 1.05);
    std::vector<double> src(len, 0.0);
    double ph = uniform01(rng);
    for (std::size_t i = 0; i < len; ++i) {
      const double f0 = f0_start + (f0_end - f0_start) * static_cast<double>(i) / static_cast<double>(len);
      ph += f0 * (1.0 + 0.01 * gaussian(rng)) / kFs;
      if (ph >= 1.0) {
        ph -= 1.0;
        src[i] = 1.0;
      }
    }
    one_pole_lowpass(src, 800.0);
    std::vector<double> voiced(len, 0.0);
    for (int k = 0; k < 3; ++k) {
      auto band = src;
      resonate(band, vowel[static_cast<std::size_t>(k)] * uniform(rng, 0.9, 1.1), 80.0 + 40.0 * k);
      add(voiced, band, k == 0 ? 1.0 : 0.7 / k);
    }
    scale_to_rms(voiced, 1.0);
    for (std::size_t i = 0; i < len && s0 + i < kN; ++i) {
      const double x = static_cast<double>(i) / static_cast<double>(len);
      out[s0 + i] += voiced[i] * std::pow(std::sin(kPi * x), 0.6);
    }
    t += dur + uniform(rng, 0.03, 0.16);
  }
  scale_to_rms(out, 0.1);
  return out;
}

// Genre surrogates differ in register, timbre, rhythm and percussion.
inline std::vector<double> synth_music_source(Genre genre, Rng& rng) {
  using namespace synth_detail;
  std::vector<double> out(kN, 0.0);
  const double root = uniform(rng, 48.0, 60.0);  // MIDI
  static constexpr std::array<int, 7> kMajor{0, 2, 4, 5, 7, 9, 11};
  auto scale_note = [&](int degree) {
    const int oct = degree >= 0 ? degree / 7 : (degree - 6) / 7;
    const int idx = degree - oct * 7;
    return root + 12.0 * oct + kMajor[static_cast<std::size_t>(idx)];
  };
  switch (genre) {
    case Genre::kPop: {
      const double beat = 60.0 / uniform(rng, 100.0, 130.0);
      const double offset = uniform(rng, 0.0, beat);
      for (double t = offset - beat; t < 1.0; t += 2.0 * beat) {
        const int deg = static_cast<int>(uniform_index(rng, 7));
        for (int k : {0, 2, 4})
          add_tone(out, rng, midi_hz(scale_note(deg + k) + 12.0), at(t), at(2.0 * beat), 0.3, 8, 1.0, 0.02, 0.6);
        add_tone(out, rng, midi_hz(scale_note(deg) - 12.0), at(t), at(2.0 * beat), 0.35, 4, 1.2, 0.01, 1.0);
      }
      for (double t = offset - beat; t < 1.0; t += beat) {
        if (t >= 0) add_kick(out, at(t), 120.0, 55.0, 0.18, 0.6);
        if (t + beat / 2 >= 0) add_burst(out, rng, at(t + beat / 2), 0.05, 0.12, 60.0, 2);
      }
      break;
    }
    case Genre::kJazz: {
      const double beat = 60.0 / uniform(rng, 130.0, 180.0);
      const double offset = uniform(rng, 0.0, beat);
      int deg = static_cast<int>(uniform_index(rng, 7));
      for (double t = offset - beat; t < 1.0; t += beat) {
        deg += uniform01(rng) < 0.5 ? 1 : -1;
        add_tone(out, rng, midi_hz(scale_note(deg) - 12.0), at(t), at(beat), 0.5, 5, 1.5, 0.005, 5.0);
        if (t + beat * 2.0 / 3.0 >= 0) add_burst(out, rng, at(t + beat * 2.0 / 3.0), 0.12, 0.05, 25.0, 3);
      }
      for (double t = offset - 2.0 * beat; t < 1.0; t += 2.0 * beat) {
        const int cd = static_cast<int>(uniform_index(rng, 7));
        for (int k : {0, 2, 4, 6})
          add_tone(out, rng, midi_hz(scale_note(cd + k) + 12.0), at(t + 0.05), at(1.5 * beat), 0.18, 10, 1.3, 0.004,
                   3.0);
      }
      break;
    }
    case Genre::kClassic: {
      const double note_len = uniform(rng, 0.25, 0.5);
      double t = -uniform(rng, 0.0, note_len);
      int deg = static_cast<int>(uniform_index(rng, 7)) + 7;
      const double vib = uniform(rng, 5.0, 6.5);
      while (t < 1.0) {
        deg += static_cast<int>(uniform_index(rng, 5)) - 2;
        add_tone(out, rng, midi_hz(scale_note(deg) + 12.0), at(t), at(note_len * 1.05), 0.5, 16, 0.8, 0.08, 0.2, vib,
                 0.006);
        add_tone(out, rng, midi_hz(scale_note(deg - 2) + 12.0), at(t), at(note_len * 1.05), 0.3, 16, 0.8, 0.08, 0.2,
                 vib, 0.006);
        add_tone(out, rng, midi_hz(scale_note(deg - 7)), at(t), at(note_len * 1.05), 0.35, 12, 0.9, 0.1, 0.2, vib, 0.004);
        t += note_len;
      }
      break;
    }
    case Genre::kRap: {
      const double beat = 60.0 / uniform(rng, 85.0, 100.0);
      const double offset = uniform(rng, 0.0, beat);
      for (double t = offset - 2.0 * beat; t < 1.0; t += 2.0 * beat) {
        if (t >= 0) add_kick(out, at(t), 90.0, 45.0, 0.6, 0.9);
        if (t + beat >= 0) add_burst(out, rng, at(t + beat), 0.15, 0.4, 20.0, 1, 4000.0);
      }
      for (double t = offset - beat; t < 1.0; t += beat / 4.0)
        if (t >= 0) add_burst(out, rng, at(t), 0.03, 0.08, 100.0, 3);
      const int deg = static_cast<int>(uniform_index(rng, 7));
      for (double t = offset - beat; t < 1.0; t += beat / 2.0)
        add_tone(out, rng, midi_hz(scale_note(deg + (uniform01(rng) < 0.3 ? 2 : 0)) + 12.0), at(t), at(beat * 0.45),
                 0.15, 7, 0.0, 0.005, 4.0);
      break;
    }
  }
  scale_to_rms(out, 0.1);
  return out;
}

// Environment noise: IDLE is engine hum below a few hundred hertz; HIGHWAY
// broadband roar to 4 kHz; CITY modulated mid-band traffic with horns;
// LOCAL low-passed road noise with a varying engine tone.
inline std::vector<double> synth_environment_noise(Environment env, Rng& rng) {
  using namespace synth_detail;
  std::vector<double> out(kN, 0.0);
  switch (env) {
    case Environment::kIdle: {
      const double fe = uniform(rng, 22.0, 32.0);
      add_tone(out, rng, fe, 0, kN, 1.0, 14, 0.7, 0.0, 0.0, uniform(rng, 0.5, 2.0), 0.02);
      auto rumble = white(rng);
      one_pole_lowpass(rumble, 150.0);
      one_pole_lowpass(rumble, 150.0);
      scale_to_rms(rumble, 0.4);
      add(out, rumble);
      break;
    }
    case Environment::kHighway: {
      auto roar = white(rng);
      roar = butterworth_lowpass(6, uniform(rng, 3500.0, 4200.0), kFs).apply(roar);
      auto low = white(rng);
      one_pole_lowpass(low, uniform(rng, 300.0, 600.0));
      scale_to_rms(roar, 1.0);
      scale_to_rms(low, uniform(rng, 0.6, 1.0));
      add(out, roar);
      add(out, low);
      add_tone(out, rng, uniform(rng, 80.0, 110.0), 0, kN, 4.0, 40, 0.5, 0.0, 0.0);
      break;
    }
    case Environment::kCity: {
      auto traffic = butterworth_bandpass(2, 200.0, uniform(rng, 1500.0, 2500.0), kFs).apply(white(rng));
      const double mod_hz = uniform(rng, 0.5, 1.5), mod_phase = uniform(rng, 0.0, 2.0 * kPi);
      for (std::size_t i = 0; i < kN; ++i)
        traffic[i] *= 1.0 + 0.6 * std::sin(2.0 * kPi * mod_hz * static_cast<double>(i) / kFs + mod_phase);
      scale_to_rms(traffic, 1.0);
      add(out, traffic);
      add_tone(out, rng, uniform(rng, 50.0, 70.0), 0, kN, 1.0, 40, 0.5, 0.0, 0.0);
      if (uniform01(rng) < 0.5) {
        const double t = uniform(rng, 0.0, 0.7);
        add_tone(out, rng, uniform(rng, 380.0, 520.0), at(t), at(uniform(rng, 0.15, 0.3)), 0.5, 6, 0.5, 0.01, 0.0);
      }
      break;
    }
    case Environment::kLocal: {
      auto road = white(rng);
      one_pole_lowpass(road, uniform(rng, 600.0, 1000.0));
      one_pole_lowpass(road, 1500.0);
      scale_to_rms(road, 1.0);
      add(out, road);
      auto hiss = butterworth_bandpass(2, 1000.0, 3000.0, kFs).apply(white(rng));
      scale_to_rms(hiss, 0.25);
      add(out, hiss);
      add_tone(out, rng, uniform(rng, 60.0, 90.0), 0, kN, 4.0, 40, 0.5, 0.0, 0.0, uniform(rng, 0.3, 1.0), 0.05);
      break;
    }
  }
  scale_to_rms(out, 0.1);
  return out;
}

struct SynthConfig {
  double snr_db = 0.0;               // source versus environment noise
  double music_under_speech_db_lo = -9.0;  // music gain range in SPEECH_MUSIC clips
  double music_under_speech_db_hi = -3.0;
  double level_jitter_db = 6.0;      // final clip RMS is 0.1 within +/- this
};

// One labelled 1-s clip. `genre` selects the music surrogate for MUSIC and
// SPEECH_MUSIC clips.
inline AudioClip synth_clip(AudioClass label, Environment env, Genre genre, Rng& rng, const SynthConfig& cfg = {}) {
  using namespace synth_detail;
  std::vector<double> source;
  switch (label) {
    case AudioClass::kSpeech: source = synth_speech_source(rng); break;
    case AudioClass::kMusic: source = synth_music_source(genre, rng); break;
    case AudioClass::kSpeechMusic: {
      source = synth_speech_source(rng);
      auto music = synth_music_source(genre, rng);
      add(source, music, db_to_amplitude(uniform(rng, cfg.music_under_speech_db_lo, cfg.music_under_speech_db_hi)));
      scale_to_rms(source, 0.1);
      break;
    }
    case AudioClass::kNoise: break;
  }
  if (!source.empty()) tilt(source, uniform(rng, -0.5, 0.5));
  auto noise = synth_environment_noise(env, rng);
  std::vector<double> mix = noise;
  if (!source.empty()) {
    mix = source;
    add(mix, noise, 1.0 / db_to_amplitude(cfg.snr_db));
  }
  scale_to_rms(mix, 0.1 * db_to_amplitude(uniform(rng, -cfg.level_jitter_db, cfg.level_jitter_db)));
  return AudioClip::from_unclipped(mix);
}

struct SynthItem {
  AudioClass label;
  Environment environment;
  Genre genre;
  std::uint64_t seed;  // regenerates the clip on its own
  AudioClip clip;
};

inline AudioClip synth_item_clip(AudioClass label, Environment env, Genre genre, std::uint64_t seed,
                                 const SynthConfig& cfg = {}) {
  Rng rng(seed);
  return synth_clip(label, env, genre, rng, cfg);
}

// `per_cell` clips for every (class, environment) pair. Music-bearing clips
// cycle through `genres`. Each clip has its own derived seed, so cells are
// independent of each other and of the other arguments.
inline std::vector<SynthItem> synth_corpus(std::size_t per_cell, std::uint64_t seed,
                                           std::span<const Environment> environments = kAllEnvironments,
                                           std::span<const Genre> genres = kAllGenres, const SynthConfig& cfg = {},
                                           std::span<const AudioClass> classes = kAllAudioClasses) {
  std::vector<SynthItem> out;
  for (auto env : environments) {
    for (auto label : classes) {
      for (std::size_t i = 0; i < per_cell; ++i) {
        const Genre genre = genres.empty() ? Genre::kPop : genres[i % genres.size()];
        const std::uint64_t s = derive_seed(
            derive_seed(derive_seed(seed, static_cast<std::uint64_t>(env)), static_cast<std::uint64_t>(label)), i);
        out.push_back({label, env, genre, s, synth_item_clip(label, env, genre, s, cfg)});
      }
    }
  }
  return out;
}

}  // namespace avac
