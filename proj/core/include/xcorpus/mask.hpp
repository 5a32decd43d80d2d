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

#include "xcorpus/audio_io.hpp"
#include "xcorpus/stft.hpp"
#include "xcorpus/types.hpp"

namespace xcorpus {

/// T x F ratio mask with every value in [0, 1].
class Mask {
 public:
  explicit Mask(RealMatrix values);
  static Mask constant(std::size_t frames, std::size_t bins, double value);

  const RealMatrix& values() const { return values_; }
  std::size_t frames() const { return static_cast<std::size_t>(values_.rows()); }
  std::size_t bins() const { return static_cast<std::size_t>(values_.cols()); }

 private:
  RealMatrix values_;
};

/// T x F indicator with values in {0, 1}.
class BinaryMask {
 public:
  explicit BinaryMask(RealMatrix values);
  static BinaryMask ones(std::size_t frames, std::size_t bins);

  const RealMatrix& values() const { return values_; }
  std::size_t frames() const { return static_cast<std::size_t>(values_.rows()); }
  std::size_t bins() const { return static_cast<std::size_t>(values_.cols()); }
  double support() const { return values_.sum(); }

 private:
  RealMatrix values_;
};

/// sqrt(|X|^2 / (|X|^2 + |N|^2)); units where both are zero get 0.
Mask ideal_ratio_mask(const ComplexSpectrogram& clean, const ComplexSpectrogram& noise);

/// Y * mask elementwise: scales magnitude, keeps the noisy phase.
ComplexSpectrogram apply_mask(const ComplexSpectrogram& noisy, const Mask& mask);

/// (1 / TF) sum (irm - rm)^2.
double mse_loss(const Mask& irm, const Mask& rm);

inline constexpr double kEnergyMaskRatio = 0.01;  // 20 dB on amplitude

/// 1 where magnitude >= ratio * max(magnitude).
BinaryMask energy_mask(const RealMatrix& magnitude, double ratio = kEnergyMaskRatio);

/// sum (irm - rm)^2 * M / sum M. With M all ones this is bitwise mse_loss.
double masked_mse_loss(const Mask& irm, const Mask& rm, const BinaryMask& support);

/// Zeroes every frame at index >= valid_frames (zero-padded batch rows).
BinaryMask restrict_to_valid_frames(const BinaryMask& mask, std::size_t valid_frames);

/// Oracle IRM enhancement: IRM from the clean/noise pair, applied to the
/// mixture spectrogram, resynthesized.
Waveform oracle_enhance(const Waveform& mixture, const Waveform& clean,
                        const Waveform& noise, const StftConfig& config);

}  // namespace xcorpus
