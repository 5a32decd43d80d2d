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
#include <filesystem>
#include <span>
#include <vector>

#include "xcorpus/types.hpp"

namespace xcorpus {

/// Mono 16 kHz signal. Construction rejects empty or non-finite input.
class Waveform {
 public:
  explicit Waveform(std::vector<double> samples, int sample_rate = kSampleRate);

  std::span<const double> samples() const { return samples_; }
  std::span<double> mutable_samples() { return samples_; }
  const std::vector<double>& data() const { return samples_; }
  std::size_t size() const { return samples_.size(); }
  int sample_rate() const { return sample_rate_; }
  double operator[](std::size_t i) const { return samples_[i]; }

  double peak() const;
  /// Mean-square power.
  double power() const;

 private:
  std::vector<double> samples_;
  int sample_rate_;
};

enum class WavEncoding { kPcm16, kFloat32 };

/// Reads a RIFF/WAVE file. Accepts mono 16 kHz PCM16 (decoded as s/32768) or
/// IEEE float32, including WAVE_FORMAT_EXTENSIBLE wrappers of those two.
Waveform read_wav(const std::filesystem::path& path);

/// PCM16 encodes round(x * 32768) clamped to [-32767, 32767].
void write_wav(const std::filesystem::path& path, const Waveform& waveform,
               WavEncoding encoding = WavEncoding::kFloat32);

struct NormalizedWaveform {
  Waveform waveform;
  double gain;  // multiply any paired signal by this to keep its ratio
};

/// Scales to max |sample| = 1. Throws DegenerateSignal on all-zero input.
NormalizedWaveform peak_normalize(const Waveform& waveform);

inline constexpr double kTrimFrameMs = 20.0;
inline constexpr double kTrimThresholdDb = 20.0;

/// Drops leading and trailing non-overlapping frames whose energy (sum of
/// squares) is below max_frame_energy * 10^(-threshold_db / 10). Interior
/// frames are kept untouched; a partial tail remainder is kept only if the last
/// full frame is kept.
Waveform trim_silence(const Waveform& waveform, double frame_ms = kTrimFrameMs,
                      double threshold_db = kTrimThresholdDb);

/// Frame length in samples for a duration at 16 kHz, rounded to nearest.
std::size_t ms_to_samples(double ms, int sample_rate = kSampleRate);

}  // namespace xcorpus
