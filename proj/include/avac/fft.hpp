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

#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace avac {

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline std::size_t next_power_of_two(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// Iterative radix-2 FFT. Immutable after construction.
class FftPlan {
 public:
  explicit FftPlan(std::size_t n) : n_(n), twiddles_(n / 2), bitrev_(n) {
    if (!is_power_of_two(n)) throw std::invalid_argument("FFT size must be a power of two");
    for (std::size_t k = 0; k < n / 2; ++k) {
      double angle = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
      twiddles_[k] = {std::cos(angle), std::sin(angle)};
    }
    std::size_t bits = 0;
    while ((std::size_t{1} << bits) < n) ++bits;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t r = 0;
      for (std::size_t b = 0; b < bits; ++b)
        if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (bits - 1 - b);
      bitrev_[i] = r;
    }
  }

  std::size_t size() const { return n_; }

  void forward(std::vector<std::complex<double>>& data) const { transform(data, false); }

  // Unnormalized inverse; caller divides by size().
  void inverse(std::vector<std::complex<double>>& data) const { transform(data, true); }

 private:
  void transform(std::vector<std::complex<double>>& data, bool inverse) const {
    if (data.size() != n_) throw std::invalid_argument("FFT input has wrong length");
    for (std::size_t i = 0; i < n_; ++i)
      if (i < bitrev_[i]) std::swap(data[i], data[bitrev_[i]]);
    for (std::size_t len = 2; len <= n_; len <<= 1) {
      std::size_t half = len / 2;
      std::size_t step = n_ / len;
      for (std::size_t start = 0; start < n_; start += len) {
        for (std::size_t k = 0; k < half; ++k) {
          auto w = twiddles_[k * step];
          if (inverse) w = std::conj(w);
          auto t = w * data[start + k + half];
          data[start + k + half] = data[start + k] - t;
          data[start + k] += t;
        }
      }
    }
  }

  std::size_t n_;
  std::vector<std::complex<double>> twiddles_;
  std::vector<std::size_t> bitrev_;
};

// Per-thread plan cache; plans are never shared across threads.
inline const FftPlan& fft_plan(std::size_t n) {
  thread_local std::map<std::size_t, FftPlan> cache;
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, FftPlan(n)).first;
  return it->second;
}

inline std::vector<double> hann_window(std::size_t length) {
  std::vector<double> w(length);
  if (length == 1) {
    w[0] = 1.0;
    return w;
  }
  for (std::size_t i = 0; i < length; ++i)
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                static_cast<double>(length - 1));
  return w;
}

// Magnitudes of bins 0..n_fft/2 of the zero-padded, optionally windowed input.
inline std::vector<double> magnitude_spectrum(std::span<const double> samples, std::size_t n_fft,
                                              std::span<const double> window = {}) {
  const auto& plan = fft_plan(n_fft);
  std::vector<std::complex<double>> buf(n_fft);
  std::size_t n = std::min(samples.size(), n_fft);
  for (std::size_t i = 0; i < n; ++i)
    buf[i] = window.empty() ? samples[i] : samples[i] * window[i];
  plan.forward(buf);
  std::vector<double> mag(n_fft / 2 + 1);
  for (std::size_t k = 0; k < mag.size(); ++k) mag[k] = std::abs(buf[k]);
  return mag;
}

}  // namespace avac
