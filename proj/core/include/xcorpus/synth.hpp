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

// Seeded stand-ins for speech and noise recordings. The clean signals are
// harmonic sources with moving formants, syllabic envelopes, short unvoiced
// bursts and pauses; they are not meant to be intelligible.

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "xcorpus/audio_io.hpp"
#include "xcorpus/mixer.hpp"

namespace xcorpus {

/// Peak-normalized speech-like utterance of the given duration.
Waveform synth_utterance(std::uint64_t seed, double seconds);

enum class NoiseKind { kWhite, kPink, kBrown, kBabble, kHum };

std::string_view to_string(NoiseKind kind);
NoiseKind noise_kind_from_string(std::string_view name);

/// Peak-normalized noise recording.
Waveform synth_noise(NoiseKind kind, std::uint64_t seed, double seconds);

/// "utt000".."uttNNN" -> synth_utterance with per-utterance sub-seeds.
SourceBank synth_clean_bank(std::size_t count, double seconds, std::uint64_t seed);
/// One entry per kind, keyed by its name.
SourceBank synth_noise_bank(const std::vector<NoiseKind>& kinds, double seconds,
                            std::uint64_t seed);

}  // namespace xcorpus
