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
#include <string>
#include <vector>

#include "xcorpus/audio_io.hpp"
#include "xcorpus/stft.hpp"
#include "xcorpus/types.hpp"

namespace xcorpus {

/// Stationary recording channel: an FIR impulse response h[0..K).
class FirChannel {
 public:
  FirChannel(std::vector<double> taps, std::string name);

  static FirChannel identity();
  /// Linear-phase frequency-sampling designs (Hamming-windowed, odd length).
  /// Shelves blend between 0 dB and gain_db with a logistic transition in
  /// log-frequency centred on corner_hz.
  static FirChannel low_shelf(double corner_hz, double gain_db, std::size_t taps = 129);
  static FirChannel high_shelf(double corner_hz, double gain_db, std::size_t taps = 129);
  /// Gaussian bump of gain_db centred on center_hz with std-dev bandwidth_hz.
  static FirChannel resonant_peak(double center_hz, double gain_db, double bandwidth_hz,
                                  std::size_t taps = 129);
  /// Series connection (convolution of tap sequences).
  static FirChannel cascade(const FirChannel& first, const FirChannel& second);
  /// Whitespace/newline/comma separated taps; '#' starts a comment.
  static FirChannel load_taps(const std::filesystem::path& path);
  void save_taps(const std::filesystem::path& path) const;

  std::span<const double> taps() const { return taps_; }
  const std::string& name() const { return name_; }

  /// log|H(f)| (natural log) on the fft_size/2+1 bins of an fft_size DFT.
  std::vector<double> log_magnitude_response(std::size_t fft_size) const;

 private:
  std::vector<double> taps_;
  std::string name_;
};

/// x[n] = sum_k h[k] s[n-k], truncated to the input length.
Waveform apply_fir_channel(const Waveform& waveform, const FirChannel& channel);

/// Per-bin long-term average log magnitude of a corpus.
struct CorpusChannel {
  RealVector log_gain;  // F values, natural log
  std::size_t frame_count = 0;
  StftConfig config;

  std::size_t bins() const { return static_cast<std::size_t>(log_gain.size()); }
};

struct NamedWaveform {
  std::string id;
  Waveform waveform;
};

/// Global frame-weighted average of log|X_i(t,f)| over every frame of every
/// utterance, accumulated in extended precision in the given order. Per-
/// utterance work runs on `workers` threads; the result does not depend on the
/// worker count. Utterances shorter than one frame are rejected.
CorpusChannel estimate_corpus_channel(std::span<const Waveform> utterances,
                                      const StftConfig& config,
                                      double epsilon = kLogEpsilon, unsigned workers = 0);
/// Same, with summation order fixed by sorted utterance id.
CorpusChannel estimate_corpus_channel(std::span<const NamedWaveform> utterances,
                                      const StftConfig& config,
                                      double epsilon = kLogEpsilon, unsigned workers = 0);

/// values(t,f) - log_gain(f).
LogSpectrogram remove_corpus_channel(const LogSpectrogram& log_spec,
                                     const CorpusChannel& channel);

/// log_gain(a) - log_gain(b); both must share a config.
CorpusChannel channel_difference(const CorpusChannel& a, const CorpusChannel& b);

/// STFT at the channel's config, divides each bin's magnitude by
/// exp(log_gain(f)) keeping the phase, and resynthesizes. Output length equals
/// input length.
Waveform renormalize_utterance(const Waveform& waveform, const CorpusChannel& channel);

/// Log-spectral mean subtraction: per-bin temporal mean removed.
LogSpectrogram lsms(const LogSpectrogram& log_spec);

/// Spectral mean subtraction on linear magnitudes. Output may be negative.
RealMatrix sms(const RealMatrix& magnitude);

inline constexpr double kRastaCoefficient = 0.97;

/// out(t) = in(t) - in(t-1) + c * in(t-1), with in(-1) := in(0).
LogSpectrogram rasta(const LogSpectrogram& log_spec, double c = kRastaCoefficient);

/// CSV: a "# xcorpus corpus-channel v1 ..." comment carrying the config, then
/// "frequency_hz,log_gain" rows.
void save_channel_csv(const std::filesystem::path& path, const CorpusChannel& channel);
CorpusChannel load_channel_csv(const std::filesystem::path& path);
void save_channel_binary(const std::filesystem::path& path, const CorpusChannel& channel);
CorpusChannel load_channel_binary(const std::filesystem::path& path);
/// Dispatches on extension: ".csv" text, anything else binary container.
CorpusChannel load_channel(const std::filesystem::path& path);

}  // namespace xcorpus
