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

// Butterworth low/band-pass filters as cascaded biquads (bilinear transform
// with frequency prewarping).

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace avac {

struct Biquad {
  double b0 = 1, b1 = 0, b2 = 0;
  double a1 = 0, a2 = 0;  // a0 == 1
};

class SosFilter {
 public:
  SosFilter() = default;
  explicit SosFilter(std::vector<Biquad> sections) : sections_(std::move(sections)) {}

  const std::vector<Biquad>& sections() const { return sections_; }
  std::size_t order() const {
    std::size_t n = 0;
    for (const auto& s : sections_) n += (s.a2 != 0.0 || s.b2 != 0.0) ? 2 : 1;
    return n;
  }

  // Zero initial state.
  std::vector<double> apply(std::span<const double> x) const {
    std::vector<double> y(x.begin(), x.end());
    for (const auto& s : sections_) {
      double z1 = 0.0, z2 = 0.0;
      for (double& v : y) {
        double in = v;
        double out = s.b0 * in + z1;
        z1 = s.b1 * in - s.a1 * out + z2;
        z2 = s.b2 * in - s.a2 * out;
        v = out;
      }
    }
    return y;
  }

  std::complex<double> response(double freq_hz, double sample_rate_hz) const {
    const double w = 2.0 * std::numbers::pi * freq_hz / sample_rate_hz;
    const std::complex<double> z1 = std::polar(1.0, -w);
    const std::complex<double> z2 = z1 * z1;
    std::complex<double> h = 1.0;
    for (const auto& s : sections_) h *= (s.b0 + s.b1 * z1 + s.b2 * z2) / (1.0 + s.a1 * z1 + s.a2 * z2);
    return h;
  }

 private:
  std::vector<Biquad> sections_;
};

namespace iir_detail {

using Complex = std::complex<double>;

inline std::vector<Complex> butterworth_prototype(int order) {
  std::vector<Complex> poles;
  for (int k = 0; k < order; ++k) {
    double theta = std::numbers::pi * (2.0 * k + order + 1) / (2.0 * order);
    poles.push_back(std::polar(1.0, theta));
  }
  return poles;
}

inline Complex bilinear(Complex s, double fs) { return (2.0 * fs + s) / (2.0 * fs - s); }

// Groups conjugate pairs (and leftover real poles) into biquads whose zero
// pairs are taken in order from `zeros`.
inline std::vector<Biquad> to_sections(std::vector<Complex> poles, std::vector<double> zeros) {
  std::vector<Complex> upper;
  std::vector<double> real;
  for (auto p : poles) {
    if (std::abs(p.imag()) < 1e-12)
      real.push_back(p.real());
    else if (p.imag() > 0)
      upper.push_back(p);
  }
  std::sort(upper.begin(), upper.end(), [](Complex a, Complex b) { return std::abs(a) < std::abs(b); });
  std::sort(real.begin(), real.end());
  std::vector<Biquad> sections;
  std::size_t zi = 0;
  auto take_zero = [&]() -> std::optional<double> {
    if (zi < zeros.size()) return zeros[zi++];
    return std::nullopt;
  };
  auto numerator = [&](Biquad& s, int count) {
    // (1 - z0 q)(1 - z1 q) with q = z^-1
    std::vector<double> zs;
    for (int i = 0; i < count; ++i)
      if (auto z = take_zero()) zs.push_back(*z);
    s.b0 = 1.0;
    s.b1 = 0.0;
    s.b2 = 0.0;
    if (zs.size() == 1) {
      s.b1 = -zs[0];
    } else if (zs.size() == 2) {
      s.b1 = -(zs[0] + zs[1]);
      s.b2 = zs[0] * zs[1];
    }
  };
  for (auto p : upper) {
    Biquad s;
    s.a1 = -2.0 * p.real();
    s.a2 = std::norm(p);
    numerator(s, 2);
    sections.push_back(s);
  }
  for (std::size_t i = 0; i < real.size(); i += 2) {
    Biquad s;
    if (i + 1 < real.size()) {
      s.a1 = -(real[i] + real[i + 1]);
      s.a2 = real[i] * real[i + 1];
      numerator(s, 2);
    } else {
      s.a1 = -real[i];
      numerator(s, 1);
    }
    sections.push_back(s);
  }
  return sections;
}

inline void normalize_gain(std::vector<Biquad>& sections, double freq_hz, double fs) {
  SosFilter f(sections);
  double g = std::abs(f.response(freq_hz, fs));
  if (g > 0 && !sections.empty()) {
    sections[0].b0 /= g;
    sections[0].b1 /= g;
    sections[0].b2 /= g;
  }
}

}  // namespace iir_detail

inline SosFilter butterworth_lowpass(int order, double cutoff_hz, double fs) {
  using namespace iir_detail;
  if (order < 1 || !(cutoff_hz > 0) || !(cutoff_hz < fs / 2)) throw std::invalid_argument("bad lowpass design");
  const double wc = 2.0 * fs * std::tan(std::numbers::pi * cutoff_hz / fs);
  std::vector<Complex> poles;
  for (auto p : butterworth_prototype(order)) poles.push_back(bilinear(wc * p, fs));
  auto sections = to_sections(poles, std::vector<double>(order, -1.0));
  normalize_gain(sections, 0.0, fs);
  return SosFilter(std::move(sections));
}

// `prototype_order` poles per band edge; the resulting filter has twice that order.
inline SosFilter butterworth_bandpass(int prototype_order, double low_hz, double high_hz, double fs) {
  using namespace iir_detail;
  if (prototype_order < 1 || !(low_hz > 0) || !(high_hz > low_hz) || !(high_hz < fs / 2))
    throw std::invalid_argument("bad bandpass design");
  const double w1 = 2.0 * fs * std::tan(std::numbers::pi * low_hz / fs);
  const double w2 = 2.0 * fs * std::tan(std::numbers::pi * high_hz / fs);
  const double w0sq = w1 * w2;
  const double bw = w2 - w1;
  std::vector<Complex> poles;
  for (auto p : butterworth_prototype(prototype_order)) {
    Complex pb = p * bw;
    Complex disc = std::sqrt(pb * pb - 4.0 * w0sq);
    poles.push_back(bilinear((pb + disc) / 2.0, fs));
    poles.push_back(bilinear((pb - disc) / 2.0, fs));
  }
  std::vector<double> zeros;
  for (int i = 0; i < prototype_order; ++i) {
    zeros.push_back(1.0);
    zeros.push_back(-1.0);
  }
  auto sections = to_sections(poles, zeros);
  const double center_hz = std::atan(std::sqrt(w0sq) / (2.0 * fs)) * fs / std::numbers::pi;
  normalize_gain(sections, center_hz, fs);
  return SosFilter(std::move(sections));
}

}  // namespace avac
