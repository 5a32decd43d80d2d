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
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "xcorpus/audio_io.hpp"

namespace xcorpus {

/// One noisy mixture: which segments of which sources, at what SNR.
struct MixtureSpec {
  std::string clean_id;
  std::string noise_id;
  std::size_t clean_offset = 0;
  std::size_t noise_offset = 0;
  std::size_t segment_len = 0;
  double snr_db = 0.0;
  std::uint64_t seed = 0;  // per-entry RNG stream that produced this entry
  std::string split = "train";

  bool operator==(const MixtureSpec&) const = default;
};

inline constexpr int kManifestVersion = 1;

struct Manifest {
  std::string corpus = "corpus";
  std::uint64_t seed = 0;
  std::string rng;  // generator identity, e.g. "splitmix64/v1"
  std::vector<double> snr_set;
  std::size_t segment_len = 0;
  std::string clean_dir;
  std::string noise_dir;
  std::vector<MixtureSpec> entries;

  /// Entries whose split equals `split`, order preserved.
  Manifest subset(const std::string& split) const;
};

/// Audio sources keyed by identifier (file name); iteration order is sorted.
using SourceBank = std::map<std::string, Waveform>;

/// Every *.wav directly inside `dir`. Throws EmptyCorpus if there is none.
SourceBank load_source_dir(const std::filesystem::path& dir);

/// Gain alpha for the noise such that x + alpha * n has the requested SNR,
/// with SNR = 10 log10(P_x / P_{alpha n}) over the full signals.
double snr_gain(const Waveform& speech, const Waveform& noise, double snr_db);

/// 10 log10(sum x^2 / sum n^2).
double measure_snr_db(const Waveform& speech, const Waveform& noise);

struct Mixture {
  Waveform mixture;
  Waveform clean;
  Waveform noise;
};

/// y = x + alpha * n on the entry's segments, then all three are scaled by one
/// gain so that max |y| = 1.
Mixture mix_at_snr(const MixtureSpec& spec, const Waveform& clean, const Waveform& noise);

struct ManifestOptions {
  std::vector<double> snr_set = {-5, -4, -3, -2, -1, 0};
  double segment_s = 4.0;
  std::uint64_t seed = 0;
  std::string corpus = "corpus";
  /// Fraction of clean sources (rounded) assigned to split "test".
  double test_fraction = 0.0;
};

/// Deterministic assignment of noise, offsets and SNR per clean source.
/// Sources shorter than the segment are used whole from offset 0; the segment
/// is also capped at the chosen noise's length.
Manifest build_manifest(const SourceBank& clean, const SourceBank& noise,
                        const ManifestOptions& options);
Manifest build_manifest(const std::filesystem::path& clean_dir,
                        const std::filesystem::path& noise_dir,
                        const ManifestOptions& options);

/// Same clean sources and splits, fresh noise/offset/SNR draws from a sub-seed
/// of (manifest.seed, epoch). Epoch 0 returns the manifest unchanged.
Manifest remix_manifest(const Manifest& manifest, const SourceBank& clean,
                        const SourceBank& noise, std::uint64_t epoch);

Mixture render_entry(const MixtureSpec& spec, const SourceBank& clean,
                     const SourceBank& noise);

/// Offsets in range, SNR finite, and no clean source in both train and test.
void validate_manifest(const Manifest& manifest, const SourceBank& clean,
                       const SourceBank& noise);

/// Line-delimited JSON: a header object, then one MixtureSpec per line.
std::string serialize_manifest(const Manifest& manifest);
Manifest parse_manifest(const std::string& text);
void save_manifest(const std::filesystem::path& path, const Manifest& manifest);
Manifest load_manifest(const std::filesystem::path& path);

}  // namespace xcorpus
