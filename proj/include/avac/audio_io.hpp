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

// 16 kHz mono PCM16 clips: WAV I/O, framing, mixing and spectrograms.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "avac/error.hpp"
#include "avac/fft.hpp"
#include "avac/text.hpp"

namespace avac {

inline constexpr int kSampleRateHz = 16000;
inline constexpr std::size_t kFrameLength = 1600;  // 100 ms
inline constexpr std::size_t kClipLength = 16000;  // 1 s
inline constexpr double kMaxSample = 32767.0 / 32768.0;

// Immutable 16 kHz mono buffer with samples in [-1, 1).
class AudioClip {
 public:
  explicit AudioClip(std::vector<float> samples, std::optional<std::string> source_path = std::nullopt)
      : samples_(std::move(samples)), source_path_(std::move(source_path)) {
    if (samples_.empty()) throw Error(ErrorCode::kInvalidArgument, "audio clip must hold at least one sample");
    for (float s : samples_) {
      if (!(s >= -1.0f && s < 1.0f))
        throw Error(ErrorCode::kInvalidArgument, "audio sample outside [-1, 1)");
    }
  }

  // Clips each value into [-1, 1) instead of rejecting it.
  static AudioClip from_unclipped(std::span<const double> values, std::size_t* clipped = nullptr) {
    std::vector<float> out(values.size());
    std::size_t count = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      double v = values[i];
      if (std::isnan(v)) v = 0.0;
      if (v < -1.0) {
        v = -1.0;
        ++count;
      } else if (v > kMaxSample) {
        v = kMaxSample;
        ++count;
      }
      float f = static_cast<float>(v);
      if (f >= 1.0f) f = static_cast<float>(kMaxSample);
      out[i] = f;
    }
    if (clipped) *clipped = count;
    return AudioClip(std::move(out));
  }

  std::span<const float> samples() const { return samples_; }
  std::size_t size() const { return samples_.size(); }
  int sample_rate_hz() const { return kSampleRateHz; }
  const std::optional<std::string>& source_path() const { return source_path_; }
  double duration_seconds() const { return static_cast<double>(samples_.size()) / kSampleRateHz; }

  std::vector<double> as_double() const { return {samples_.begin(), samples_.end()}; }

  friend bool operator==(const AudioClip& a, const AudioClip& b) { return a.samples_ == b.samples_; }

 private:
  std::vector<float> samples_;
  std::optional<std::string> source_path_;
};

// Contiguous, non-overlapping 1600-sample frames.
class FrameSequence {
 public:
  FrameSequence(std::vector<double> data, std::size_t frame_len)
      : data_(std::move(data)), frame_len_(frame_len) {}

  std::size_t size() const { return data_.size() / frame_len_; }
  std::size_t frame_len() const { return frame_len_; }
  std::size_t hop() const { return frame_len_; }
  std::span<const double> operator[](std::size_t i) const {
    return std::span<const double>(data_).subspan(i * frame_len_, frame_len_);
  }
  std::span<const double> samples() const { return data_; }

 private:
  std::vector<double> data_;
  std::size_t frame_len_;
};

inline double rms(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return std::sqrt(acc / static_cast<double>(x.size()));
}

inline double rms(const AudioClip& clip) {
  double acc = 0.0;
  for (float v : clip.samples()) acc += static_cast<double>(v) * v;
  return std::sqrt(acc / static_cast<double>(clip.size()));
}

namespace wav_detail {

inline std::uint32_t read_u32(const unsigned char* p) {
  return std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) | (std::uint32_t(p[2]) << 16) |
         (std::uint32_t(p[3]) << 24);
}
inline std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
inline void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

}  // namespace wav_detail

// Decodes RIFF/WAVE PCM16 mono 16 kHz. Other formats are rejected rather
// than converted.
inline AudioClip decode_wav(std::span<const unsigned char> bytes, std::optional<std::string> source = std::nullopt) {
  using namespace wav_detail;
  const std::string where = source ? *source : std::string("<memory>");
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw Error(ErrorCode::kCorruptContainer, where + ": not a RIFF/WAVE file");

  bool have_fmt = false;
  std::uint16_t format_tag = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* hdr = bytes.data() + pos;
    std::uint32_t chunk_size = read_u32(hdr + 4);
    std::size_t body = pos + 8;
    if (std::memcmp(hdr, "fmt ", 4) == 0) {
      if (chunk_size < 16 || body + chunk_size > bytes.size())
        throw Error(ErrorCode::kCorruptContainer, where + ": truncated fmt chunk");
      format_tag = read_u16(bytes.data() + body);
      channels = read_u16(bytes.data() + body + 2);
      rate = read_u32(bytes.data() + body + 4);
      bits = read_u16(bytes.data() + body + 14);
      if (format_tag == 0xFFFE && chunk_size >= 26) format_tag = read_u16(bytes.data() + body + 24);
      have_fmt = true;
    } else if (std::memcmp(hdr, "data", 4) == 0) {
      if (!have_fmt) throw Error(ErrorCode::kCorruptContainer, where + ": data chunk precedes fmt chunk");
      if (format_tag != 1 || bits != 16 || channels != 1 || rate != kSampleRateHz)
        throw Error(ErrorCode::kUnsupportedFormat,
                    where + ": need PCM16 mono 16000 Hz, got format " + std::to_string(format_tag) + ", " +
                        std::to_string(bits) + " bit, " + std::to_string(channels) + " ch, " +
                        std::to_string(rate) + " Hz");
      if (body + chunk_size > bytes.size())
        throw Error(ErrorCode::kCorruptContainer, where + ": data chunk runs past end of file");
      std::size_t n = chunk_size / 2;
      if (n == 0) throw Error(ErrorCode::kCorruptContainer, where + ": no samples");
      std::vector<float> samples(n);
      for (std::size_t i = 0; i < n; ++i) {
        auto v = static_cast<std::int16_t>(read_u16(bytes.data() + body + 2 * i));
        samples[i] = static_cast<float>(v) / 32768.0f;
      }
      return AudioClip(std::move(samples), source);
    }
    pos = body + chunk_size + (chunk_size & 1u);
  }
  if (!have_fmt) throw Error(ErrorCode::kCorruptContainer, where + ": missing fmt chunk");
  throw Error(ErrorCode::kCorruptContainer, where + ": missing data chunk");
}

inline AudioClip load_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kNotFound, path.string() + ": cannot open");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_wav(bytes, path.string());
}

// Samples are rounded to the nearest PCM16 code. A non-empty comment is stored
// in a LIST/INFO ICMT chunk, which readers skip.
inline std::string encode_wav(const AudioClip& clip, const std::string& comment = {}) {
  using namespace wav_detail;
  std::string info;
  if (!comment.empty()) {
    std::string text = comment;
    text.push_back('\0');
    if (text.size() & 1u) text.push_back('\0');
    info = "LIST";
    put_u32(info, static_cast<std::uint32_t>(4 + 8 + text.size()));
    info += "INFO";
    info += "ICMT";
    put_u32(info, static_cast<std::uint32_t>(text.size()));
    info += text;
  }
  auto data_bytes = static_cast<std::uint32_t>(clip.size() * 2);
  std::string out = "RIFF";
  put_u32(out, static_cast<std::uint32_t>(4 + (8 + 16) + info.size() + 8 + data_bytes));
  out += "WAVE";
  out += "fmt ";
  put_u32(out, 16);
  put_u16(out, 1);
  put_u16(out, 1);
  put_u32(out, kSampleRateHz);
  put_u32(out, kSampleRateHz * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  out += info;
  out += "data";
  put_u32(out, data_bytes);
  for (float s : clip.samples()) {
    double v = std::round(static_cast<double>(s) * 32768.0);
    v = std::clamp(v, -32768.0, 32767.0);
    put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(v)));
  }
  return out;
}

// Writes to a sibling temp file, then renames over the target.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, tmp.string() + ": cannot open for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::kIo, tmp.string() + ": write failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::kIo, path.string() + ": rename failed: " + ec.message());
}

inline void write_wav(const std::filesystem::path& path, const AudioClip& clip, const std::string& comment = {}) {
  write_file_atomic(path, encode_wav(clip, comment));
}

inline FrameSequence frame_clip(const AudioClip& clip) {
  if (clip.size() < kFrameLength)
    throw Error(ErrorCode::kTooShort, "clip has " + std::to_string(clip.size()) + " samples, need at least " +
                                          std::to_string(kFrameLength));
  std::size_t n_frames = clip.size() / kFrameLength;
  auto s = clip.samples();
  return FrameSequence(std::vector<double>(s.begin(), s.begin() + n_frames * kFrameLength), kFrameLength);
}

// Splits a long recording into consecutive 1-s clips; the remainder is dropped.
inline std::vector<AudioClip> split_clips(const AudioClip& audio, std::size_t clip_len = kClipLength) {
  if (audio.size() < clip_len)
    throw Error(ErrorCode::kTooShort, "input has " + std::to_string(audio.size()) + " samples, need at least " +
                                          std::to_string(clip_len));
  std::vector<AudioClip> out;
  auto s = audio.samples();
  for (std::size_t start = 0; start + clip_len <= s.size(); start += clip_len)
    out.emplace_back(std::vector<float>(s.begin() + start, s.begin() + start + clip_len), audio.source_path());
  return out;
}

inline double db_to_amplitude(double db) { return std::pow(10.0, db / 20.0); }

// out = clip(a + 10^(gain_b_db/20) * b).
inline AudioClip mix_signals(const AudioClip& a, const AudioClip& b, double gain_b_db,
                             std::size_t* clipped = nullptr) {
  if (a.size() != b.size())
    throw Error(ErrorCode::kLengthMismatch,
                "mix inputs differ in length (" + std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
  const double g = db_to_amplitude(gain_b_db);
  std::vector<double> out(a.size());
  auto sa = a.samples();
  auto sb = b.samples();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<double>(sa[i]) + g * sb[i];
  return AudioClip::from_unclipped(out, clipped);
}

// Scale applied to `noise` so that the signal-to-noise ratio equals snr_db.
inline double noise_scale_for_snr(const AudioClip& signal, const AudioClip& noise, double snr_db) {
  double rs = rms(signal);
  double rn = rms(noise);
  if (rs == 0.0) throw Error(ErrorCode::kSilentInput, "signal RMS is zero");
  if (rn == 0.0) throw Error(ErrorCode::kSilentInput, "noise RMS is zero");
  return rs / (rn * db_to_amplitude(snr_db));
}

inline AudioClip add_noise_at_snr(const AudioClip& signal, const AudioClip& noise, double snr_db,
                                  std::size_t* clipped = nullptr) {
  if (signal.size() != noise.size())
    throw Error(ErrorCode::kLengthMismatch, "signal and noise differ in length (" + std::to_string(signal.size()) +
                                                " vs " + std::to_string(noise.size()) + ")");
  const double scale = noise_scale_for_snr(signal, noise, snr_db);
  std::vector<double> out(signal.size());
  auto ss = signal.samples();
  auto sn = noise.samples();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<double>(ss[i]) + scale * sn[i];
  return AudioClip::from_unclipped(out, clipped);
}

struct Spectrogram {
  std::vector<std::vector<double>> magnitudes;  // [frame][bin]
  std::size_t n_fft = 0;
  double bin_hz = 0.0;

  std::size_t num_frames() const { return magnitudes.size(); }
  std::size_t num_bins() const { return n_fft / 2 + 1; }
};

inline Spectrogram stft_spectrogram(const AudioClip& clip, double win_ms = 25.0, double hop_ms = 10.0) {
  if (!(win_ms > 0.0) || !(hop_ms > 0.0))
    throw Error(ErrorCode::kInvalidArgument, "window and hop must be positive");
  const auto win = static_cast<std::size_t>(std::lround(win_ms * kSampleRateHz / 1000.0));
  const auto hop = static_cast<std::size_t>(std::lround(hop_ms * kSampleRateHz / 1000.0));
  if (win == 0 || hop == 0) throw Error(ErrorCode::kInvalidArgument, "window or hop shorter than one sample");
  if (clip.size() < win)
    throw Error(ErrorCode::kTooShort, "clip shorter than one " + text::format_significant(win_ms, 6) + " ms window");
  Spectrogram out;
  out.n_fft = next_power_of_two(win);
  out.bin_hz = static_cast<double>(kSampleRateHz) / static_cast<double>(out.n_fft);
  const auto window = hann_window(win);
  const auto x = clip.as_double();
  const std::size_t frames = (x.size() - win) / hop + 1;
  out.magnitudes.reserve(frames);
  for (std::size_t f = 0; f < frames; ++f)
    out.magnitudes.push_back(magnitude_spectrum(std::span<const double>(x).subspan(f * hop, win), out.n_fft, window));
  return out;
}

// Header row of bin centre frequencies, then one row per time frame.
inline void write_spectrogram_csv(std::ostream& os, const Spectrogram& spec) {
  for (std::size_t k = 0; k < spec.num_bins(); ++k) {
    if (k) os << ',';
    os << text::format_significant(spec.bin_hz * static_cast<double>(k), 10);
  }
  os << '\n';
  for (const auto& row : spec.magnitudes) {
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (k) os << ',';
      os << text::format_significant(row[k], 10);
    }
    os << '\n';
  }
}

}  // namespace avac
