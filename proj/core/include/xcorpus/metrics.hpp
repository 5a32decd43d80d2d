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

#include "xcorpus/audio_io.hpp"
#include "xcorpus/stft.hpp"

namespace xcorpus {

inline constexpr double kSiSnrCeilingDb = 60.0;

/// Scale-invariant SNR in dB: the estimate is projected onto the reference,
/// 10 log10(|target|^2 / |residual|^2), clamped to [-60, 60] dB.
double si_snr(const Waveform& reference, const Waveform& estimate);

struct SegSnrOptions {
  double frame_ms = 32.0;
  double floor_db = -10.0;
  double ceiling_db = 35.0;
};

/// Mean over non-overlapping full frames of the clamped per-frame SNR.
/// Frames where the reference is silent are left out of the mean.
double segmental_snr(const Waveform& reference, const Waveform& estimate,
                     const SegSnrOptions& options = {});

/// RMS over frames of the per-frame RMS difference (over bins) between the
/// 20 log10 magnitude spectra, each floored at epsilon.
double log_spectral_distance(const Waveform& a, const Waveform& b,
                             const StftConfig& config = StftConfig::frame32ms(16),
                             double epsilon = kLogEpsilon);

}  // namespace xcorpus
