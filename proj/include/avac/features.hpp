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

// Per-frame and per-clip audio descriptors and the fixed 100-value clip
// feature layout.
//
// Layout, in order:
//   mean and std over frames of RMS, ZCR, centroid, spread, flux, kurtosis,
//   roll-off (1 value each), subband energy (4), MFCC (13), LPCC (12),
//   LSP (10); then band periodicity means (4); then HZCRR, LSTER, NFR, SFR.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "avac/audio_io.hpp"
#include "avac/error.hpp"
#include "avac/fft.hpp"
#include "avac/iir.hpp"
#include "avac/lpc.hpp"

namespace avac {

inline constexpr int kLayoutVersion = 1;
inline constexpr std::size_t kFeatureDim = 100;
inline constexpr std::size_t kSpectrumFft = 2048;
inline constexpr std::size_t kNumSubbands = 4;
inline constexpr std::size_t kNumMfcc = 13;
inline constexpr std::size_t kLpcOrder = 12;
inline constexpr std::size_t kLspOrder = 10;
inline constexpr std::array<double, kNumSubbands + 1> kSubbandEdgesHz{0.0, 500.0, 1000.0, 2000.0, 4000.0};

enum class FeatureGroup {
  kRms,
  kZcr,
  kHzcrr,
  kLster,
  kNfr,
  kSfr,
  kCentroid,
  kSpread,
  kFlux,
  kKurtosis,
  kRolloff,
  kBandPeriod,
  kSubbandEnergy,
  kMfcc,
  kLpcc,
  kLsp,
};

inline constexpr std::size_t kNumFeatureGroups = 16;

inline constexpr std::array<FeatureGroup, kNumFeatureGroups> kAllFeatureGroups{
    FeatureGroup::kRms,      FeatureGroup::kZcr,        FeatureGroup::kHzcrr,         FeatureGroup::kLster,
    FeatureGroup::kNfr,      FeatureGroup::kSfr,        FeatureGroup::kCentroid,      FeatureGroup::kSpread,
    FeatureGroup::kFlux,     FeatureGroup::kKurtosis,   FeatureGroup::kRolloff,       FeatureGroup::kBandPeriod,
    FeatureGroup::kSubbandEnergy, FeatureGroup::kMfcc,  FeatureGroup::kLpcc,          FeatureGroup::kLsp,
};

inline std::string_view feature_group_name(FeatureGroup g) {
  switch (g) {
    case FeatureGroup::kRms: return "RMS";
    case FeatureGroup::kZcr: return "ZCR";
    case FeatureGroup::kHzcrr: return "HZCRR";
    case FeatureGroup::kLster: return "LSTER";
    case FeatureGroup::kNfr: return "NFR";
    case FeatureGroup::kSfr: return "SFR";
    case FeatureGroup::kCentroid: return "CENTROID";
    case FeatureGroup::kSpread: return "SPREAD";
    case FeatureGroup::kFlux: return "FLUX";
    case FeatureGroup::kKurtosis: return "KURTOSIS";
    case FeatureGroup::kRolloff: return "ROLLOFF";
    case FeatureGroup::kBandPeriod: return "BAND_PERIOD";
    case FeatureGroup::kSubbandEnergy: return "SUBBAND_ENERGY";
    case FeatureGroup::kMfcc: return "MFCC";
    case FeatureGroup::kLpcc: return "LPCC";
    case FeatureGroup::kLsp: return "LSP";
  }
  return "?";
}

inline FeatureGroup parse_feature_group(std::string_view name) {
  for (auto g : kAllFeatureGroups)
    if (feature_group_name(g) == name) return g;
  throw Error(ErrorCode::kInvalidArgument, "unknown feature group '" + std::string(name) + "'");
}

struct FeatureDescriptor {
  FeatureGroup group;
  std::string statistic;  // "mean", "std" or "value"
  std::size_t index;      // position within the group's per-frame vector
  std::string name;
};

namespace features_detail {

inline void push_framewise(std::vector<FeatureDescriptor>& out, FeatureGroup g, std::string_view stem,
                           std::size_t width) {
  for (std::string stat : {"mean", "std"}) {
    for (std::size_t i = 0; i < width; ++i) {
      std::string name = std::string(stem) + "_" + stat;
      if (width > 1) name += "_" + std::to_string(i);
      out.push_back({g, stat, i, name});
    }
  }
}

inline std::vector<FeatureDescriptor> build_layout() {
  std::vector<FeatureDescriptor> out;
  push_framewise(out, FeatureGroup::kRms, "rms", 1);
  push_framewise(out, FeatureGroup::kZcr, "zcr", 1);
  push_framewise(out, FeatureGroup::kCentroid, "centroid", 1);
  push_framewise(out, FeatureGroup::kSpread, "spread", 1);
  push_framewise(out, FeatureGroup::kFlux, "flux", 1);
  push_framewise(out, FeatureGroup::kKurtosis, "kurtosis", 1);
  push_framewise(out, FeatureGroup::kRolloff, "rolloff", 1);
  push_framewise(out, FeatureGroup::kSubbandEnergy, "subband_energy", kNumSubbands);
  push_framewise(out, FeatureGroup::kMfcc, "mfcc", kNumMfcc);
  push_framewise(out, FeatureGroup::kLpcc, "lpcc", kLpcOrder);
  push_framewise(out, FeatureGroup::kLsp, "lsp", kLspOrder);
  for (std::size_t i = 0; i < kNumSubbands; ++i)
    out.push_back({FeatureGroup::kBandPeriod, "mean", i, "band_period_mean_" + std::to_string(i)});
  out.push_back({FeatureGroup::kHzcrr, "value", 0, "hzcrr"});
  out.push_back({FeatureGroup::kLster, "value", 0, "lster"});
  out.push_back({FeatureGroup::kNfr, "value", 0, "nfr"});
  out.push_back({FeatureGroup::kSfr, "value", 0, "sfr"});
  return out;
}

}  // namespace features_detail

inline const std::vector<FeatureDescriptor>& feature_layout() {
  static const std::vector<FeatureDescriptor> layout = features_detail::build_layout();
  return layout;
}

// Positions of a group's entries in the clip vector, ascending.
inline std::vector<std::size_t> feature_group_indices(FeatureGroup g) {
  std::vector<std::size_t> out;
  const auto& layout = feature_layout();
  for (std::size_t i = 0; i < layout.size(); ++i)
    if (layout[i].group == g) out.push_back(i);
  return out;
}

struct ClipFeatureVector {
  std::array<double, kFeatureDim> values{};
  int layout_version = kLayoutVersion;

  std::vector<double> to_vector() const { return {values.begin(), values.end()}; }
  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }

  friend bool operator==(const ClipFeatureVector&, const ClipFeatureVector&) = default;
};

struct FeatureConfig {
  double silence_threshold = 0.005;  // frame RMS, full scale
  double nfr_threshold = 0.3;
  double nfr_min_pitch_hz = 30.0;
  double nfr_max_pitch_hz = 500.0;
  double hzcrr_factor = 1.5;
  double lster_factor = 0.5;
  double rolloff_fraction = 0.85;
  int mel_filters = 26;

  friend bool operator==(const FeatureConfig&, const FeatureConfig&) = default;
};

// ---------------------------------------------------------------------------
// Time-domain frame features.

inline double frame_rms(std::span<const double> frame) { return rms(frame); }

// Zero counts as non-negative.
inline double frame_zcr(std::span<const double> frame) {
  if (frame.size() < 2) return 0.0;
  std::size_t changes = 0;
  for (std::size_t i = 1; i < frame.size(); ++i)
    if ((frame[i] >= 0.0) != (frame[i - 1] >= 0.0)) ++changes;
  return static_cast<double>(changes) / static_cast<double>(frame.size() - 1);
}

inline double frame_energy(std::span<const double> frame) {
  double acc = 0.0;
  for (double v : frame) acc += v * v;
  return frame.empty() ? 0.0 : acc / static_cast<double>(frame.size());
}

namespace features_detail {

inline std::vector<std::complex<double>> padded_fft(std::span<const double> x, std::size_t n) {
  std::vector<std::complex<double>> buf(n);
  for (std::size_t i = 0; i < x.size() && i < n; ++i) buf[i] = x[i];
  fft_plan(n).forward(buf);
  return buf;
}

// max over lag in [min_lag, max_lag] (negative lags allowed) of
// sum a[n] b[n+lag] / sqrt(E_a E_b), energies taken over the overlap.
inline double max_normalized_xcorr(std::span<const double> a, const std::vector<std::complex<double>>& fa,
                                   std::span<const double> b, const std::vector<std::complex<double>>& fb,
                                   long min_lag, long max_lag) {
  const std::size_t n = a.size();
  const std::size_t nfft = fa.size();
  std::vector<std::complex<double>> prod(nfft);
  for (std::size_t k = 0; k < nfft; ++k) prod[k] = std::conj(fa[k]) * fb[k];
  fft_plan(nfft).inverse(prod);
  std::vector<double> ca(n + 1, 0.0), cb(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    ca[i + 1] = ca[i] + a[i] * a[i];
    cb[i + 1] = cb[i] + b[i] * b[i];
  }
  const double inv = 1.0 / static_cast<double>(nfft);
  double best = 0.0;
  const double floor = 1e-20;
  for (long lag = min_lag; lag <= max_lag; ++lag) {
    if (static_cast<std::size_t>(std::labs(lag)) >= n) continue;
    double num = prod[lag >= 0 ? static_cast<std::size_t>(lag) : nfft - static_cast<std::size_t>(-lag)].real() * inv;
    double ea, eb;
    if (lag >= 0) {
      auto l = static_cast<std::size_t>(lag);
      ea = ca[n - l];
      eb = cb[n] - cb[l];
    } else {
      auto l = static_cast<std::size_t>(-lag);
      ea = ca[n] - ca[l];
      eb = cb[n - l];
    }
    if (ea <= floor || eb <= floor) continue;
    best = std::max(best, num / std::sqrt(ea * eb));
  }
  return std::clamp(best, 0.0, 1.0);
}

inline double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
inline double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

}  // namespace features_detail

// Max normalized autocorrelation over the pitch lag range; 0 for silence.
inline double pitch_autocorrelation_peak(std::span<const double> frame, const FeatureConfig& cfg = {}) {
  const long min_lag = static_cast<long>(std::ceil(kSampleRateHz / cfg.nfr_max_pitch_hz));
  const long max_lag = static_cast<long>(std::floor(kSampleRateHz / cfg.nfr_min_pitch_hz));
  const std::size_t nfft = next_power_of_two(2 * frame.size());
  auto f = features_detail::padded_fft(frame, nfft);
  return features_detail::max_normalized_xcorr(frame, f, frame, f, min_lag, max_lag);
}

struct ClipRatios {
  double hzcrr = 0.0;
  double lster = 0.0;
  double nfr = 0.0;
  double sfr = 0.0;
};

inline ClipRatios clip_ratio_features(const FrameSequence& frames, const FeatureConfig& cfg = {}) {
  ClipRatios out;
  const std::size_t n = frames.size();
  if (n == 0) return out;
  std::vector<double> zcr(n), energy(n);
  double zcr_mean = 0.0, energy_mean = 0.0;
  std::size_t noise = 0, silent = 0;
  for (std::size_t i = 0; i < n; ++i) {
    zcr[i] = frame_zcr(frames[i]);
    energy[i] = frame_energy(frames[i]);
    zcr_mean += zcr[i];
    energy_mean += energy[i];
    if (pitch_autocorrelation_peak(frames[i], cfg) < cfg.nfr_threshold) ++noise;
    if (frame_rms(frames[i]) < cfg.silence_threshold) ++silent;
  }
  zcr_mean /= static_cast<double>(n);
  energy_mean /= static_cast<double>(n);
  std::size_t high_zcr = 0, low_energy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (zcr[i] > cfg.hzcrr_factor * zcr_mean) ++high_zcr;
    if (energy[i] < cfg.lster_factor * energy_mean) ++low_energy;
  }
  const double dn = static_cast<double>(n);
  out.hzcrr = static_cast<double>(high_zcr) / dn;
  out.lster = static_cast<double>(low_energy) / dn;
  out.nfr = static_cast<double>(noise) / dn;
  out.sfr = static_cast<double>(silent) / dn;
  return out;
}

// ---------------------------------------------------------------------------
// Spectral frame features.

// Hann-windowed magnitude spectrum of one frame on kSpectrumFft points.
struct FrameSpectrum {
  std::vector<double> magnitude;   // bins 0..kSpectrumFft/2
  std::vector<double> normalized;  // magnitude / ||magnitude||_2, zeros if silent
  bool silent = true;

  static double bin_hz() { return static_cast<double>(kSampleRateHz) / static_cast<double>(kSpectrumFft); }
};

inline FrameSpectrum frame_spectrum(std::span<const double> frame) {
  thread_local std::vector<double> window;
  if (window.size() != frame.size()) window = hann_window(frame.size());
  FrameSpectrum out;
  out.magnitude = magnitude_spectrum(frame, kSpectrumFft, window);
  double norm = 0.0;
  for (double m : out.magnitude) norm += m * m;
  norm = std::sqrt(norm);
  out.normalized.assign(out.magnitude.size(), 0.0);
  if (norm > 0.0) {
    out.silent = false;
    for (std::size_t k = 0; k < out.magnitude.size(); ++k) out.normalized[k] = out.magnitude[k] / norm;
  }
  return out;
}

struct SpectralShape {
  double centroid_hz = 0.0;
  double spread_hz = 0.0;
  double flux = 0.0;
  double kurtosis = 0.0;
  double rolloff_hz = 0.0;
};

// `previous` may be null (treated as an all-zero spectrum).
inline SpectralShape spectral_shape(const FrameSpectrum& current, const FrameSpectrum* previous,
                                    const FeatureConfig& cfg = {}) {
  SpectralShape out;
  if (current.silent) return out;
  const auto& p = current.magnitude;
  const double df = FrameSpectrum::bin_hz();
  double sum = 0.0, first = 0.0, total_energy = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    sum += p[k];
    first += df * static_cast<double>(k) * p[k];
    total_energy += p[k] * p[k];
  }
  out.centroid_hz = first / sum;
  double m2 = 0.0, m4 = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    double d = df * static_cast<double>(k) - out.centroid_hz;
    double d2 = d * d;
    m2 += d2 * p[k];
    m4 += d2 * d2 * p[k];
  }
  m2 /= sum;
  m4 /= sum;
  out.spread_hz = std::sqrt(m2);
  out.kurtosis = m2 > 0.0 ? m4 / (m2 * m2) : 0.0;

  for (std::size_t k = 0; k < p.size(); ++k) {
    double prev = previous ? previous->normalized[k] : 0.0;
    double d = current.normalized[k] - prev;
    out.flux += d * d;
  }

  const double target = cfg.rolloff_fraction * total_energy;
  double cum = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double e = p[k] * p[k];
    if (cum + e >= target) {
      // Linear within the bin, energy spread over [k - 1/2, k + 1/2].
      const double frac = e > 0.0 ? (target - cum) / e : 0.5;
      out.rolloff_hz = std::max(0.0, df * (static_cast<double>(k) - 0.5 + frac));
      break;
    }
    cum += e;
  }
  return out;
}

inline SpectralShape spectral_shape(std::span<const double> frame, std::span<const double> previous_frame = {},
                                    const FeatureConfig& cfg = {}) {
  auto cur = frame_spectrum(frame);
  if (previous_frame.empty()) return spectral_shape(cur, nullptr, cfg);
  auto prev = frame_spectrum(previous_frame);
  return spectral_shape(cur, &prev, cfg);
}

// Energy fractions of the four subbands within 0-4 kHz.
inline std::array<double, kNumSubbands> subband_energy(const FrameSpectrum& spec) {
  std::array<double, kNumSubbands> out{};
  const double df = FrameSpectrum::bin_hz();
  double total = 0.0;
  for (std::size_t k = 0; k < spec.magnitude.size(); ++k) {
    const double f = df * static_cast<double>(k);
    for (std::size_t b = 0; b < kNumSubbands; ++b) {
      if (f >= kSubbandEdgesHz[b] && f < kSubbandEdgesHz[b + 1]) {
        double e = spec.magnitude[k] * spec.magnitude[k];
        out[b] += e;
        total += e;
        break;
      }
    }
  }
  if (!(total > 0.0)) return {};
  for (double& v : out) v /= total;
  return out;
}

inline std::array<double, kNumSubbands> subband_energy(std::span<const double> frame) {
  return subband_energy(frame_spectrum(frame));
}

// Triangular mel filters on the kSpectrumFft power spectrum, 0-8000 Hz.
class MelFilterbank {
 public:
  explicit MelFilterbank(int num_filters = 26) : num_filters_(num_filters) {
    using features_detail::hz_to_mel;
    using features_detail::mel_to_hz;
    if (num_filters < static_cast<int>(kNumMfcc))
      throw Error(ErrorCode::kInvalidConfig, "need at least 13 mel filters");
    const std::size_t bins = kSpectrumFft / 2 + 1;
    const double df = FrameSpectrum::bin_hz();
    const double mel_hi = hz_to_mel(kSampleRateHz / 2.0);
    std::vector<double> edges(num_filters + 2);
    for (int i = 0; i < num_filters + 2; ++i)
      edges[i] = mel_to_hz(mel_hi * static_cast<double>(i) / static_cast<double>(num_filters + 1));
    weights_.assign(num_filters, std::vector<double>(bins, 0.0));
    for (int m = 0; m < num_filters; ++m) {
      const double lo = edges[m], mid = edges[m + 1], hi = edges[m + 2];
      for (std::size_t k = 0; k < bins; ++k) {
        const double f = df * static_cast<double>(k);
        if (f > lo && f < mid)
          weights_[m][k] = (f - lo) / (mid - lo);
        else if (f >= mid && f < hi)
          weights_[m][k] = (hi - f) / (hi - mid);
      }
    }
    // Orthonormal DCT-II rows 0..12.
    dct_.assign(kNumMfcc, std::vector<double>(num_filters));
    const double n = static_cast<double>(num_filters);
    for (std::size_t k = 0; k < kNumMfcc; ++k) {
      const double scale = k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
      for (int i = 0; i < num_filters; ++i)
        dct_[k][i] = scale * std::cos(std::numbers::pi * static_cast<double>(k) * (i + 0.5) / n);
    }
  }

  int num_filters() const { return num_filters_; }
  const std::vector<std::vector<double>>& dct_rows() const { return dct_; }

  std::array<double, kNumMfcc> mfcc(const FrameSpectrum& spec) const {
    std::vector<double> log_energy(num_filters_);
    for (int m = 0; m < num_filters_; ++m) {
      double e = 0.0;
      const auto& w = weights_[m];
      for (std::size_t k = 0; k < w.size(); ++k)
        if (w[k] != 0.0) e += w[k] * spec.magnitude[k] * spec.magnitude[k];
      log_energy[m] = std::log(std::max(e, 1e-10));
    }
    std::array<double, kNumMfcc> out{};
    for (std::size_t k = 0; k < kNumMfcc; ++k) {
      double acc = 0.0;
      for (int i = 0; i < num_filters_; ++i) acc += dct_[k][i] * log_energy[i];
      out[k] = acc;
    }
    return out;
  }

 private:
  int num_filters_;
  std::vector<std::vector<double>> weights_;
  std::vector<std::vector<double>> dct_;
};

inline std::array<double, kNumMfcc> mfcc(std::span<const double> frame, int num_filters = 26) {
  thread_local MelFilterbank bank(num_filters);
  if (bank.num_filters() != num_filters) bank = MelFilterbank(num_filters);
  return bank.mfcc(frame_spectrum(frame));
}

// Subband filters: 6th-order Butterworth low-pass for the first band,
// 6th-order band-pass (3rd-order prototype) for the others.
inline const std::array<SosFilter, kNumSubbands>& subband_filters() {
  static const std::array<SosFilter, kNumSubbands> filters{
      butterworth_lowpass(6, kSubbandEdgesHz[1], kSampleRateHz),
      butterworth_bandpass(3, kSubbandEdgesHz[1], kSubbandEdgesHz[2], kSampleRateHz),
      butterworth_bandpass(3, kSubbandEdgesHz[2], kSubbandEdgesHz[3], kSampleRateHz),
      butterworth_bandpass(3, kSubbandEdgesHz[3], kSubbandEdgesHz[4], kSampleRateHz),
  };
  return filters;
}

// Per subband: mean over consecutive frame pairs of the peak normalized
// cross-correlation of the band-limited frames. Fewer than two frames -> 0.
inline std::array<double, kNumSubbands> band_periodicity(const FrameSequence& frames, const FeatureConfig& cfg = {}) {
  std::array<double, kNumSubbands> out{};
  const std::size_t n = frames.size();
  if (n < 2) return out;
  const std::size_t len = frames.frame_len();
  const long max_lag = static_cast<long>(std::floor(kSampleRateHz / cfg.nfr_min_pitch_hz));
  const std::size_t nfft = next_power_of_two(2 * len);
  const auto& filters = subband_filters();
  for (std::size_t b = 0; b < kNumSubbands; ++b) {
    const auto filtered = filters[b].apply(frames.samples());
    std::span<const double> all(filtered);
    std::vector<std::vector<std::complex<double>>> spectra(n);
    for (std::size_t i = 0; i < n; ++i) spectra[i] = features_detail::padded_fft(all.subspan(i * len, len), nfft);
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i)
      acc += features_detail::max_normalized_xcorr(all.subspan(i * len, len), spectra[i],
                                                   all.subspan((i + 1) * len, len), spectra[i + 1], -max_lag, max_lag);
    out[b] = acc / static_cast<double>(n - 1);
  }
  return out;
}

// LSFs for feature use. If the scan fails on a near-singular predictor, the
// polynomial is bandwidth-expanded until it succeeds.
inline std::vector<double> robust_lsp(std::span<const double> coeffs) {
  std::vector<double> a(coeffs.begin(), coeffs.end());
  for (int attempt = 0; attempt < 12; ++attempt) {
    try {
      return lsp(a);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kRootFindingFailed) throw;
    }
    double g = 1.0;
    for (double& v : a) {
      g *= 0.97;
      v *= g;
    }
  }
  return lsp(std::vector<double>(coeffs.size(), 0.0));
}

// Computes every descriptor group for a clip. Immutable after construction;
// one instance may be shared across threads.
class FeatureExtractor {
 public:
  explicit FeatureExtractor(FeatureConfig cfg = {}) : cfg_(cfg), mel_(cfg.mel_filters) {}

  const FeatureConfig& config() const { return cfg_; }

  ClipFeatureVector extract(const AudioClip& clip) const { return extract(frame_clip(clip)); }

  ClipFeatureVector extract(const FrameSequence& frames) const {
    const std::size_t n = frames.size();
    constexpr std::size_t kPerFrame = 7 + kNumSubbands + kNumMfcc + kLpcOrder + kLspOrder;
    std::vector<std::array<double, kPerFrame>> rows(n);
    FrameSpectrum prev;
    for (std::size_t i = 0; i < n; ++i) {
      const auto frame = frames[i];
      auto spec = frame_spectrum(frame);
      auto shape = spectral_shape(spec, i == 0 ? nullptr : &prev, cfg_);
      auto sub = subband_energy(spec);
      auto cep = mel_.mfcc(spec);
      auto lp12 = lpc(frame, kLpcOrder);
      auto cc = lpcc(lp12.coeffs, lp12.gain, kLpcOrder);
      auto lsf = robust_lsp(lpc(frame, kLspOrder).coeffs);
      auto& row = rows[i];
      std::size_t j = 0;
      row[j++] = frame_rms(frame);
      row[j++] = frame_zcr(frame);
      row[j++] = shape.centroid_hz;
      row[j++] = shape.spread_hz;
      row[j++] = shape.flux;
      row[j++] = shape.kurtosis;
      row[j++] = shape.rolloff_hz;
      for (double v : sub) row[j++] = v;
      for (double v : cep) row[j++] = v;
      for (double v : cc) row[j++] = v;
      for (double v : lsf) row[j++] = v;
      prev = std::move(spec);
    }

    ClipFeatureVector out;
    // Per-frame block widths in layout order.
    const std::array<std::size_t, 11> widths{1, 1, 1, 1, 1, 1, 1, kNumSubbands, kNumMfcc, kLpcOrder, kLspOrder};
    std::size_t col = 0, pos = 0;
    for (std::size_t w : widths) {
      for (std::size_t c = 0; c < w; ++c) {
        double mean = 0.0;
        for (const auto& r : rows) mean += r[col + c];
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (const auto& r : rows) var += (r[col + c] - mean) * (r[col + c] - mean);
        var /= static_cast<double>(n);
        out.values[pos + c] = mean;
        out.values[pos + w + c] = std::sqrt(var);
      }
      pos += 2 * w;
      col += w;
    }
    for (double v : band_periodicity(frames, cfg_)) out.values[pos++] = v;
    const auto ratios = clip_ratio_features(frames, cfg_);
    out.values[pos++] = ratios.hzcrr;
    out.values[pos++] = ratios.lster;
    out.values[pos++] = ratios.nfr;
    out.values[pos++] = ratios.sfr;
    return out;
  }

 private:
  FeatureConfig cfg_;
  MelFilterbank mel_;
};

inline ClipFeatureVector extract_clip_features(const AudioClip& clip, const FeatureConfig& cfg = {}) {
  return FeatureExtractor(cfg).extract(clip);
}

}  // namespace avac
