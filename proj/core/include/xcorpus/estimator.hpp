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

// Small feedforward mask estimator: per-frame spliced features ->
// ReLU hidden layer -> sigmoid mask per frequency bin. Trained with plain
// mini-batch gradient descent on the energy-masked MSE loss.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "xcorpus/audio_io.hpp"
#include "xcorpus/mask.hpp"
#include "xcorpus/mixer.hpp"
#include "xcorpus/stft.hpp"
#include "xcorpus/types.hpp"

namespace xcorpus {

enum class FeatureKind { kMagnitudeSms, kLogLsms, kLogRasta, kLogRaw };

std::string_view to_string(FeatureKind kind);
FeatureKind feature_kind_from_string(std::string_view name);

struct FeatureOptions {
  StftConfig config = StftConfig::frame32ms(16);
  FeatureKind kind = FeatureKind::kLogRaw;
  double epsilon = kLogEpsilon;
  std::size_t context_radius = 2;

  std::size_t dim() const { return (2 * context_radius + 1) * config.bins(); }
};

/// Per-frame normalized spectrum (T x F) before splicing.
RealMatrix frame_features(const ComplexSpectrogram& spec, FeatureKind kind, double epsilon);

/// Row t becomes [frame t-R, ..., frame t, ..., frame t+R]; out-of-range
/// neighbours replicate the first/last frame.
RealMatrix splice_frames(const RealMatrix& frames, std::size_t radius);

/// Spliced, unstandardized features of a mixture.
RealMatrix extract_features(const Waveform& mixture, const FeatureOptions& options);

/// Per-dimension standardization fitted on training features only.
struct FeatureStats {
  RealVector mean;
  RealVector scale;

  static FeatureStats fit(std::span<const RealMatrix> training_features);
  static FeatureStats identity(std::size_t dim);
  RealMatrix apply(const RealMatrix& features) const;
  bool empty() const { return mean.size() == 0; }
};

struct Gradients {
  RealMatrix w1;
  RealVector b1;
  RealMatrix w2;
  RealVector b2;

  double max_abs() const;
};

class MaskEstimator {
 public:
  /// Glorot-uniform weights in +-sqrt(6 / (fan_in + fan_out)), zero biases.
  MaskEstimator(const FeatureOptions& features, std::size_t hidden, std::uint64_t seed);
  /// Explicit parameters; shapes must be consistent.
  MaskEstimator(const FeatureOptions& features, RealMatrix w1, RealVector b1, RealMatrix w2,
                RealVector b2);

  const FeatureOptions& features() const { return features_; }
  std::size_t input_dim() const { return static_cast<std::size_t>(w1_.cols()); }
  std::size_t hidden() const { return static_cast<std::size_t>(w1_.rows()); }
  std::size_t output_dim() const { return static_cast<std::size_t>(w2_.rows()); }

  const RealMatrix& w1() const { return w1_; }
  const RealVector& b1() const { return b1_; }
  const RealMatrix& w2() const { return w2_; }
  const RealVector& b2() const { return b2_; }
  RealMatrix& w1() { return w1_; }
  RealVector& b1() { return b1_; }
  RealMatrix& w2() { return w2_; }
  RealVector& b2() { return b2_; }

  const FeatureStats& stats() const { return stats_; }
  void set_stats(FeatureStats stats);

  /// Mask for already standardized features (T x input_dim).
  Mask forward(const RealMatrix& features) const;
  /// extract_features -> stats -> forward.
  Mask predict(const Waveform& mixture) const;
  /// predict, apply to the mixture spectrogram, resynthesize.
  Waveform enhance(const Waveform& mixture) const;

  /// params -= lr * grads.
  void step(const Gradients& grads, double learning_rate);

  void save(const std::filesystem::path& path) const;
  static MaskEstimator load(const std::filesystem::path& path);

  bool operator==(const MaskEstimator& other) const;

 private:
  void check_shapes() const;

  FeatureOptions features_;
  RealMatrix w1_;  // hidden x input
  RealVector b1_;
  RealMatrix w2_;  // output x hidden
  RealVector b2_;
  FeatureStats stats_;
};

struct LossAndGradients {
  double loss = 0.0;
  Gradients grads;
};

/// Energy-masked MSE between the target IRM and forward(features), with exact
/// gradients. Throws EmptyLossSupport if the support is empty.
LossAndGradients loss_and_gradients(const MaskEstimator& model, const RealMatrix& features,
                                    const Mask& irm, const BinaryMask& support);

/// One utterance worth of training data; features already standardized.
struct TrainingExample {
  RealMatrix features;
  Mask irm;
  BinaryMask support;
};

/// Zero-pads the batch to its longest utterance, intersects each support with
/// its valid frames, and averages the per-utterance masked losses.
LossAndGradients batch_loss_and_gradients(const MaskEstimator& model,
                                          std::span<const TrainingExample* const> batch);

/// Mean per-utterance masked loss.
double evaluate_masked_loss(const MaskEstimator& model,
                            std::span<const TrainingExample> examples);
/// Same for a constant mask (0.5 gives the untrained baseline).
double constant_mask_loss(std::span<const TrainingExample> examples, double value);

/// IRM target, energy support (from |Y|) and unstandardized features for a
/// rendered mixture.
struct PreparedUtterance {
  RealMatrix features;
  Mask irm;
  BinaryMask support;
};
PreparedUtterance prepare_utterance(const Mixture& mixture, const FeatureOptions& options);

struct TrainConfig {
  std::size_t epochs = 30;
  double learning_rate = 8.0;
  std::size_t batch_size = 4;
  std::size_t hidden = 64;
  std::uint64_t seed = 0;
  /// Re-draw noise, offsets and SNRs every epoch from per-epoch sub-seeds.
  bool remix_each_epoch = true;

  void validate() const;
};

/// Step schedule: base rate for epochs 1..0.6E, half for (0.6E, 0.9E], a
/// quarter afterwards. `epoch` is 1-based.
double learning_rate_for_epoch(const TrainConfig& config, std::size_t epoch);

struct EpochRecord {
  std::size_t epoch;  // 0 is the evaluation before any update
  double learning_rate;
  double loss;
};

struct TrainingLog {
  std::vector<EpochRecord> epochs;
  std::string to_csv() const;
};

struct TrainResult {
  MaskEstimator model;
  TrainingLog log;
};

/// Trains on the "train" entries of the manifest.
TrainResult train(const Manifest& manifest, const SourceBank& clean, const SourceBank& noise,
                  const TrainConfig& config, const FeatureOptions& features);

}  // namespace xcorpus
