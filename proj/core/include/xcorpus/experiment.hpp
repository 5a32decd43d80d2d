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
#include <map>
#include <string>
#include <vector>

#include "xcorpus/channel.hpp"
#include "xcorpus/estimator.hpp"
#include "xcorpus/synth.hpp"

namespace xcorpus {

inline constexpr int kExperimentConfigVersion = 1;
inline constexpr int kReportVersion = 1;

/// Where clean and noise material comes from. Directories win over synthesis
/// when set.
struct MaterialConfig {
  std::size_t utterances = 48;
  double utterance_s = 2.0;
  double test_fraction = 0.25;
  std::vector<NoiseKind> noises = {NoiseKind::kWhite, NoiseKind::kPink, NoiseKind::kBabble,
                                   NoiseKind::kHum};
  double noise_s = 8.0;
  std::string clean_dir;
  std::string noise_dir;
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  std::vector<FirChannel> channels;  // names must be unique
  std::string train_channel;
  std::vector<std::string> test_channels;
  std::vector<double> train_snr_db = {-5, -4, -3, -2, -1, 0};
  std::vector<double> test_snr_db = {-5, 0, 5};
  std::vector<FeatureKind> feature_kinds = {FeatureKind::kLogRaw, FeatureKind::kLogLsms};
  std::vector<double> frame_shifts_ms = {16};
  double frame_ms = 32;
  std::size_t context_radius = 2;
  TrainConfig train;
  MaterialConfig material;
  unsigned workers = 0;

  const FirChannel& channel(const std::string& name) const;
  void validate() const;
};

/// Versioned JSON. Channels are either {"name", "taps": [...]},
/// {"name", "taps_file"}, or a generator {"name", "type": "identity" |
/// "low_shelf" | "high_shelf" | "resonant_peak" | "cascade", ...}.
/// Relative taps_file paths resolve against `base_dir`.
ExperimentConfig parse_experiment_config(const std::string& json_text,
                                         const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

struct MetricSet {
  double si_snr_db = 0.0;
  double seg_snr_db = 0.0;
  double lsd_db = 0.0;
  double masked_loss = 0.0;
  double mixture_si_snr_db = 0.0;
  std::size_t count = 0;
};

struct ConditionRecord {
  FeatureKind feature_kind;
  double frame_shift_ms;
  std::string train_channel;
  std::string test_channel;
  double snr_db;
  MetricSet metrics;  // means over test utterances and noises
};

/// Mismatched minus matched, per (feature kind, shift, test channel).
struct GapRecord {
  FeatureKind feature_kind;
  double frame_shift_ms;
  std::string test_channel;
  std::vector<double> snr_db;
  std::vector<double> masked_loss_gap;
  std::vector<double> si_snr_gap_db;  // matched minus mismatched, positive = worse
  double mean_masked_loss_gap = 0.0;
  double mean_si_snr_gap_db = 0.0;
};

struct TrainingSummary {
  FeatureKind feature_kind;
  double frame_shift_ms;
  TrainingLog log;
  double baseline_loss = 0.0;  // constant 0.5 mask on the matched test set
};

struct ExperimentReport {
  std::uint64_t seed = 0;
  std::vector<ConditionRecord> records;
  std::vector<GapRecord> gaps;
  std::vector<TrainingSummary> training;
  std::string config_json;

  /// One row per condition; byte-identical for identical config and seed.
  std::string to_csv() const;
  /// Gaps, training summaries and metadata; `timestamp` may be empty.
  std::string summary_json(const std::string& timestamp) const;
  const GapRecord& gap(FeatureKind kind, double shift_ms, const std::string& test_channel) const;
};

ExperimentReport run_crosschannel_experiment(const ExperimentConfig& config);

/// Fixed noisy-mask predictor evaluated across frame shifts: each oracle IRM
/// unit m is replaced by m + r * u with u uniform in [-1, 1] and
/// r = min(perturbation, m, 1 - m), a zero-mean error that stays in [0, 1].
struct FrameShiftConfig {
  std::uint64_t seed = 0;
  std::size_t instances = 6;
  double seconds = 1.0;
  double snr_db = -5.0;
  double perturbation = 0.3;
  /// Independent mask draws per instance; errors are averaged in the power domain.
  std::size_t draws = 1;
  double frame_ms = 32;
  std::vector<double> shifts_ms = {16, 8, 4, 2};
};

struct FrameShiftRow {
  double shift_ms;
  /// Per instance: mean ||x_pert - x_oracle||^2 / ||x_oracle||^2 in dB.
  std::vector<double> error_vs_oracle_db;
  /// Per instance: mean ||x_pert - clean||^2 / ||clean||^2 in dB.
  std::vector<double> error_vs_clean_db;
  /// Per instance: max |istft(stft(y)) - y| with an all-ones mask.
  std::vector<double> identity_max_error;
};

struct FrameShiftReport {
  std::vector<FrameShiftRow> rows;
  std::string to_csv() const;
};

FrameShiftReport run_frame_shift_experiment(const FrameShiftConfig& config);

/// Figure series. Each writes a small CSV of (x, y...) columns.
/// Channel spectra: frequency_hz plus one 20 log10|H| column per channel.
std::string channel_spectrum_csv(const std::vector<FirChannel>& channels,
                                 std::size_t fft_size = 512);
/// Corpus channel in dB: frequency_hz,gain_db.
std::string corpus_channel_spectrum_csv(const CorpusChannel& channel);
/// snr_db plus one masked-loss gap column per (feature kind, shift, channel).
std::string gap_vs_snr_csv(const ExperimentReport& report);
/// Same from a report CSV written by ExperimentReport::to_csv.
std::string gap_vs_snr_csv_from_report(const std::string& report_csv);

}  // namespace xcorpus
