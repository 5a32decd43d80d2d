// Copyright 2026 The xcorpus Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "xcorpus/audio_io.hpp"
#include "xcorpus/types.hpp"

namespace xcorpus {

enum class WindowKind { kHamming, kRectangular };

std::string_view to_string(WindowKind kind);
WindowKind window_from_string(std::string_view name);

/// Framing parameters, all in samples.
struct StftConfig {
  int sample_rate = kSampleRate;
  std::size_t frame_len = 512;
  std::size_t frame_shift = 256;
  WindowKind window = WindowKind::kHamming;
  std::size_t fft_size = 512;

  /// fft_size defaults to frame_len (no zero-padding inside a frame).
  static StftConfig make(std::size_t frame_len, std::size_t frame_shift,
                         WindowKind window = WindowKind::kHamming);

  /// 32 ms Hamming frame at the given shift (16, 8, 4 or 2 ms).
  static StftConfig frame32ms(int shift_ms);
  /// 20 ms frame, 10 ms shift: corpus-channel analysis.
  static StftConfig corpus_analysis();
  /// 2048-sample frame, 32-sample shift: channel-removed resynthesis.
  static StftConfig resynthesis(WindowKind window = WindowKind::kHamming);

  /// Throws ConfigError unless 0 < shift <= frame_len <= fft_size and
  /// frame_len is a multiple of shift.
  void validate() const;

  std::size_t bins() const { return fft_size / 2 + 1; }
  /// Frames start at every multiple of frame_shift below `length`; the tail is
  /// zero-padded to complete the last frame.
  std::size_t num_frames(std::size_t length) const;
  double bin_frequency_hz(std::size_t bin) const;
  std::vector<double> window_coefficients() const;

  bool operator==(const StftConfig&) const = default;
  std::string describe() const;
};

struct ComplexSpectrogram {
  ComplexMatrix values;  // T x F
  StftConfig config;
  std::size_t original_length = 0;

  std::size_t frames() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t bins() const { return static_cast<std::size_t>(values.cols()); }
};

/// Natural-log magnitude, floored at log(epsilon).
struct LogSpectrogram {
  RealMatrix values;  // T x F
  double epsilon = 1e-8;

  std::size_t frames() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t bins() const { return static_cast<std::size_t>(values.cols()); }
};

inline constexpr double kLogEpsilon = 1e-8;
inline constexpr double kWindowSumFloor = 1e-10;

ComplexSpectrogram stft(const Waveform& waveform, const StftConfig& config);

/// Weighted overlap-add with the analysis window, normalized pointwise by the
/// accumulated squared-window sum, truncated to original_length.
Waveform istft(const ComplexSpectrogram& spec);

RealMatrix magnitude(const ComplexSpectrogram& spec);

LogSpectrogram log_magnitude(const ComplexSpectrogram& spec,
                             double epsilon = kLogEpsilon);
LogSpectrogram log_magnitude(const RealMatrix& magnitude,
                             double epsilon = kLogEpsilon);

}  // namespace xcorpus
