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
#include <set>

#include "avac/features.hpp"
#include "test_util.hpp"

namespace avac {
namespace {

using testing::clip_of;
using testing::sine;
using testing::white_noise;

TEST(Layout, HundredEntriesCoveringAllGroups) {
  const auto& layout = feature_layout();
  ASSERT_EQ(layout.size(), kFeatureDim);
  std::set<std::string> names;
  for (const auto& d : layout) names.insert(d.name);
  EXPECT_EQ(names.size(), kFeatureDim);
  std::size_t total = 0;
  for (auto g : kAllFeatureGroups) {
    auto idx = feature_group_indices(g);
    EXPECT_FALSE(idx.empty()) << feature_group_name(g);
    total += idx.size();
  }
  EXPECT_EQ(total, kFeatureDim);
  EXPECT_EQ(feature_group_indices(FeatureGroup::kMfcc).size(), 26u);
  EXPECT_EQ(feature_group_indices(FeatureGroup::kBandPeriod).size(), 4u);
  EXPECT_EQ(layout[0].name, "rms_mean");
  EXPECT_EQ(layout[99].name, "sfr");
}

TEST(FrameRms, Basics) {
  EXPECT_EQ(frame_rms(std::vector<double>(1600, 0.0)), 0.0);
  EXPECT_DOUBLE_EQ(frame_rms(std::vector<double>(1600, 0.5)), 0.5);
  EXPECT_NEAR(frame_rms(sine(100.0, 1600)), std::sqrt(0.5), 1e-4);
}

TEST(FrameZcr, Basics) {
  EXPECT_EQ(frame_zcr(std::vector<double>(1600, 0.3)), 0.0);
  std::vector<double> alt(1600);
  for (std::size_t i = 0; i < alt.size(); ++i) alt[i] = i % 2 ? -1.0 : 1.0;
  EXPECT_DOUBLE_EQ(frame_zcr(alt), 1.0);
}

TEST(FrameZcr, KilohertzToneMatchesDirectCount) {
  auto x = sine(1000.0, 1600);
  // Oracle: count sign flips on the same samples with an independent loop.
  int flips = 0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) flips += std::signbit(x[i]) != std::signbit(x[i + 1]);
  EXPECT_NEAR(frame_zcr(x), flips / 1599.0, 1e-12);
  EXPECT_NEAR(frame_zcr(x), 200.0 / 1599.0, 1.0 / 1599.0);
}

// Property: scale covariance of RMS, scale invariance of ZCR and centroid.
TEST(FrameFeatures, ScaleCovariance) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> alpha(0.05, 3.0);
  for (int trial = 0; trial < 30; ++trial) {
    auto x = white_noise(1600, 100 + trial, 0.2);
    double a = alpha(rng);
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = a * x[i];
    EXPECT_NEAR(frame_rms(y), a * frame_rms(x), 1e-12);
    EXPECT_EQ(frame_zcr(y), frame_zcr(x));
    EXPECT_NEAR(spectral_shape(y).centroid_hz, spectral_shape(x).centroid_hz, 1e-8);
  }
}

FrameSequence frames_of(const std::vector<double>& x) { return frame_clip(clip_of(x)); }

TEST(ClipRatios, IdenticalFramesGiveZeroRatios) {
  // 100 Hz has an integer number of cycles per frame, so all frames match.
  auto r = clip_ratio_features(frames_of(sine(100.0, 16000, 0.5)));
  EXPECT_EQ(r.hzcrr, 0.0);
  EXPECT_EQ(r.lster, 0.0);
}

TEST(ClipRatios, SilentClip) {
  auto r = clip_ratio_features(frames_of(std::vector<double>(16000, 0.0)));
  EXPECT_EQ(r.sfr, 1.0);
}

TEST(ClipRatios, PitchedToneHasNoNoiseFrames) {
  auto x = sine(200.0, 16000, 0.5);
  // Oracle: direct normalized autocorrelation at the pitch lag.
  const std::size_t lag = 80;
  double num = 0, ea = 0, eb = 0;
  for (std::size_t i = 0; i + lag < 1600; ++i) {
    num += x[i] * x[i + lag];
    ea += x[i] * x[i];
    eb += x[i + lag] * x[i + lag];
  }
  EXPECT_GT(num / std::sqrt(ea * eb), 0.999);
  EXPECT_EQ(clip_ratio_features(frames_of(x)).nfr, 0.0);
}

TEST(ClipRatios, WhiteNoiseFramesAreNoise) {
  EXPECT_EQ(clip_ratio_features(frames_of(white_noise(16000, 8, 0.1))).nfr, 1.0);
}

TEST(ClipRatios, HighZcrAndLowEnergyFractions) {
  // Frames 0-7 quiet low tone; frames 8-9 loud high tone.
  std::vector<double> x = sine(100.0, 16000, 0.05);
  auto hi = sine(3000.0, 3200, 0.8);
  std::copy(hi.begin(), hi.end(), x.begin() + 12800);
  auto r = clip_ratio_features(frames_of(x));
  EXPECT_DOUBLE_EQ(r.hzcrr, 0.2);
  EXPECT_DOUBLE_EQ(r.lster, 0.8);
}

TEST(SpectralShape, KilohertzTone) {
  auto s = spectral_shape(sine(1000.0, 1600));
  EXPECT_NEAR(s.centroid_hz, 1000.0, 16.0);
  EXPECT_NEAR(s.rolloff_hz, 1000.0, FrameSpectrum::bin_hz());
}

TEST(SpectralShape, OffBinTonesWithinOneBin) {
  for (double hz = 200.0; hz < 7800.0; hz += 137.3) {
    auto s = spectral_shape(sine(hz, 1600));
    EXPECT_NEAR(s.centroid_hz, hz, FrameSpectrum::bin_hz()) << hz;
    EXPECT_NEAR(s.rolloff_hz, hz, FrameSpectrum::bin_hz()) << hz;
  }
}

TEST(SpectralShape, IdenticalFramesHaveZeroFlux) {
  auto x = white_noise(1600, 12, 0.1);
  EXPECT_NEAR(spectral_shape(x, x).flux, 0.0, 1e-15);
}

TEST(SpectralShape, FirstFrameFluxIsUnitNorm) {
  EXPECT_NEAR(spectral_shape(white_noise(1600, 12, 0.1)).flux, 1.0, 1e-12);
}

TEST(SpectralShape, FlatSpectrumKurtosis) {
  FrameSpectrum flat;
  flat.magnitude.assign(kSpectrumFft / 2 + 1, 1.0);
  flat.normalized.assign(flat.magnitude.size(), 1.0 / std::sqrt(static_cast<double>(flat.magnitude.size())));
  flat.silent = false;
  // Oracle: continuous uniform distribution has kurtosis 9/5.
  EXPECT_NEAR(spectral_shape(flat, nullptr).kurtosis, 1.8, 0.02);
  EXPECT_NEAR(spectral_shape(flat, nullptr).centroid_hz, 4000.0, 1e-9);
}

TEST(SpectralShape, SilentFrameIsAllZero) {
  auto s = spectral_shape(std::vector<double>(1600, 0.0));
  EXPECT_EQ(s.centroid_hz, 0.0);
  EXPECT_EQ(s.spread_hz, 0.0);
  EXPECT_EQ(s.flux, 0.0);
  EXPECT_EQ(s.kurtosis, 0.0);
  EXPECT_EQ(s.rolloff_hz, 0.0);
}

TEST(BandPeriodicity, ToneInSecondBand) {
  auto bp = band_periodicity(frames_of(sine(700.0, 16000, 0.5)));
  EXPECT_GT(bp[1], 0.95);
}

TEST(BandPeriodicity, WhiteNoiseIsAperiodic) {
  auto bp = band_periodicity(frames_of(white_noise(16000, 21, 0.1)));
  for (double v : bp) EXPECT_LT(v, 0.6);
}

TEST(BandPeriodicity, SilenceIsZero) {
  auto bp = band_periodicity(frames_of(std::vector<double>(16000, 0.0)));
  for (double v : bp) EXPECT_EQ(v, 0.0);
}

TEST(BandFilters, ButterworthEdgesAreMinusThreeDb) {
  const auto& f = subband_filters();
  EXPECT_NEAR(std::abs(f[0].response(0.0, 16000)), 1.0, 1e-9);
  EXPECT_NEAR(std::abs(f[0].response(500.0, 16000)), std::sqrt(0.5), 1e-6);
  EXPECT_EQ(f[0].order(), 6u);
  for (std::size_t b = 1; b < 4; ++b) {
    EXPECT_EQ(f[b].order(), 6u);
    EXPECT_NEAR(std::abs(f[b].response(kSubbandEdgesHz[b], 16000)), std::sqrt(0.5), 1e-6);
    EXPECT_NEAR(std::abs(f[b].response(kSubbandEdgesHz[b + 1], 16000)), std::sqrt(0.5), 1e-6);
  }
}

TEST(SubbandEnergy, ToneInSecondBand) {
  EXPECT_GT(subband_energy(sine(700.0, 1600))[1], 0.98);
}

TEST(SubbandEnergy, Silence) {
  auto e = subband_energy(std::vector<double>(1600, 0.0));
  for (double v : e) EXPECT_EQ(v, 0.0);
}

TEST(SubbandEnergy, WhiteNoiseFollowsBandwidth) {
  auto e = subband_energy(white_noise(1600, 31, 0.1));
  const std::array<double, 4> want{0.125, 0.125, 0.25, 0.5};
  for (std::size_t b = 0; b < 4; ++b) EXPECT_NEAR(e[b], want[b], 0.05);
}

// Property: fractions sum to one on non-silent frames.
TEST(SubbandEnergy, SumsToOne) {
  for (int trial = 0; trial < 50; ++trial) {
    auto x = white_noise(1600, 500 + trial, 0.01 * (trial + 1));
    auto tone = sine(50.0 + 60.0 * trial, 1600, 0.3);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += tone[i];
    auto e = subband_energy(x);
    EXPECT_NEAR(e[0] + e[1] + e[2] + e[3], 1.0, 1e-9);
  }
}

TEST(Mfcc, SilenceIsConstantLogSpectrum) {
  auto c = mfcc(std::vector<double>(1600, 0.0));
  EXPECT_NEAR(c[0], std::sqrt(26.0) * std::log(1e-10), 1e-9);
  for (std::size_t k = 1; k < 13; ++k) EXPECT_NEAR(c[k], 0.0, 1e-9);
}

TEST(Mfcc, ThirteenFiniteValues) {
  auto c = mfcc(white_noise(1600, 2, 0.3));
  ASSERT_EQ(c.size(), 13u);
  for (double v : c) EXPECT_TRUE(std::isfinite(v));
}

TEST(Mfcc, DifferentTonesDifferInC1) {
  EXPECT_NE(mfcc(sine(1000.0, 1600))[1], mfcc(sine(3000.0, 1600))[1]);
}

TEST(Mfcc, DctBasisIsOrthonormal) {
  MelFilterbank bank(26);
  const auto& d = bank.dct_rows();
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (std::size_t j = 0; j < d.size(); ++j) {
      double dot = 0.0;
      for (std::size_t k = 0; k < d[i].size(); ++k) dot += d[i][k] * d[j][k];
      EXPECT_NEAR(dot, i == j ? 1.0 : 0.0, 1e-10);
    }
  }
}

TEST(ExtractClipFeatures, SilenceClip) {
  auto fv = extract_clip_features(clip_of(std::vector<double>(16000, 0.0)));
  for (const auto& name : {"rms_mean", "rms_std", "centroid_mean", "rolloff_mean", "flux_mean",
                           "subband_energy_mean_0", "band_period_mean_2", "lpcc_mean_0"}) {
    std::size_t i = 0;
    while (feature_layout()[i].name != name) ++i;
    EXPECT_EQ(fv[i], 0.0) << name;
  }
  EXPECT_EQ(fv[99], 1.0);
}

TEST(ExtractClipFeatures, Deterministic) {
  auto clip = clip_of(white_noise(16000, 77, 0.2));
  auto a = extract_clip_features(clip);
  auto b = extract_clip_features(clip);
  EXPECT_EQ(0, std::memcmp(a.values.data(), b.values.data(), sizeof(double) * kFeatureDim));
}

TEST(ExtractClipFeatures, ToneCentroid) {
  auto fv = extract_clip_features(clip_of(sine(700.0, 16000, 0.5)));
  EXPECT_NEAR(fv[4], 700.0, 16.0);  // centroid_mean
  EXPECT_EQ(feature_layout()[4].name, "centroid_mean");
}

TEST(ExtractClipFeatures, TooShortPropagates) {
  try {
    extract_clip_features(clip_of(std::vector<double>(1000, 0.1)));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTooShort);
  }
}

// Property: every entry finite on random clips of mixed character
// (noise, tones, clicks, near-silence, full-scale square waves).
TEST(ExtractClipFeatures, FiniteOnFuzzedClips) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> len(1600, 4800);
  std::uniform_int_distribution<int> kind(0, 4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  FeatureExtractor extractor;
  const int trials = 10000;
  for (int t = 0; t < trials; ++t) {
    std::vector<double> x(len(rng));
    switch (kind(rng)) {
      case 0:
        for (auto& v : x) v = (u(rng) * 2 - 1) * u(rng);
        break;
      case 1: {
        double f = 20 + 7900 * u(rng);
        double a = u(rng);
        x = sine(f, x.size(), a);
        break;
      }
      case 2:
        for (std::size_t i = 0; i < x.size(); i += 1 + static_cast<std::size_t>(u(rng) * 400)) x[i] = u(rng) - 0.5;
        break;
      case 3:
        for (auto& v : x) v = 1e-6 * (u(rng) - 0.5);
        break;
      default: {
        std::size_t period = 2 + static_cast<std::size_t>(u(rng) * 300);
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = ((i / period) % 2) ? 0.999 : -1.0;
      }
    }
    auto fv = extractor.extract(clip_of(x));
    for (std::size_t i = 0; i < kFeatureDim; ++i)
      ASSERT_TRUE(std::isfinite(fv[i])) << "trial " << t << " entry " << feature_layout()[i].name;
  }
}

}  // namespace
}  // namespace avac
