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

#include "xcorpus/mask.hpp"

#include <cmath>
#include <string>

#include "xcorpus/error.hpp"

namespace xcorpus {

namespace {

template <typename A, typename B>
void require_same_shape(const A& a, const B& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    fail(ErrorKind::kShapeError,
         std::string(what) + ": " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
             " vs " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  }
}

}  // namespace

Mask::Mask(RealMatrix values) : values_(std::move(values)) {
  for (Eigen::Index i = 0; i < values_.size(); ++i) {
    const double v = values_.data()[i];
    if (!(v >= 0.0 && v <= 1.0)) fail(ErrorKind::kInvalidInput, "mask value outside [0, 1]");
  }
}

Mask Mask::constant(std::size_t frames, std::size_t bins, double value) {
  return Mask(RealMatrix::Constant(static_cast<Eigen::Index>(frames),
                                   static_cast<Eigen::Index>(bins), value));
}

BinaryMask::BinaryMask(RealMatrix values) : values_(std::move(values)) {
  for (Eigen::Index i = 0; i < values_.size(); ++i) {
    const double v = values_.data()[i];
    if (v != 0.0 && v != 1.0) fail(ErrorKind::kInvalidInput, "binary mask value not 0 or 1");
  }
}

BinaryMask BinaryMask::ones(std::size_t frames, std::size_t bins) {
  return BinaryMask(RealMatrix::Ones(static_cast<Eigen::Index>(frames),
                                     static_cast<Eigen::Index>(bins)));
}

Mask ideal_ratio_mask(const ComplexSpectrogram& clean, const ComplexSpectrogram& noise) {
  require_same_shape(clean.values, noise.values, "ideal_ratio_mask");
  if (!(clean.config == noise.config)) {
    fail(ErrorKind::kShapeError, "clean and noise spectrograms use different configs");
  }
  RealMatrix irm(clean.values.rows(), clean.values.cols());
  for (Eigen::Index i = 0; i < irm.size(); ++i) {
    const double x2 = std::norm(clean.values.data()[i]);
    const double n2 = std::norm(noise.values.data()[i]);
    const double denom = x2 + n2;
    irm.data()[i] = denom > 0.0 ? std::sqrt(x2 / denom) : 0.0;
  }
  return Mask(std::move(irm));
}

ComplexSpectrogram apply_mask(const ComplexSpectrogram& noisy, const Mask& mask) {
  require_same_shape(noisy.values, mask.values(), "apply_mask");
  ComplexSpectrogram out = noisy;
  out.values.array() *= mask.values().array().cast<std::complex<double>>();
  return out;
}

double mse_loss(const Mask& irm, const Mask& rm) {
  require_same_shape(irm.values(), rm.values(), "mse_loss");
  const auto& a = irm.values();
  const auto& b = rm.values();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double d = a.data()[i] - b.data()[i];
    sum += d * d;
  }
  return sum / static_cast<double>(a.size());
}

BinaryMask energy_mask(const RealMatrix& magnitude, double ratio) {
  if (magnitude.size() == 0) fail(ErrorKind::kShapeError, "energy_mask of empty matrix");
  if ((magnitude.array() < 0.0).any()) {
    fail(ErrorKind::kInvalidInput, "energy_mask needs nonnegative magnitudes");
  }
  const double peak = magnitude.maxCoeff();
  if (peak == 0.0) fail(ErrorKind::kDegenerateSignal, "all-zero magnitude");
  const double threshold = ratio * peak;
  return BinaryMask((magnitude.array() >= threshold).cast<double>().matrix());
}

double masked_mse_loss(const Mask& irm, const Mask& rm, const BinaryMask& support) {
  require_same_shape(irm.values(), rm.values(), "masked_mse_loss");
  require_same_shape(irm.values(), support.values(), "masked_mse_loss");
  const auto& a = irm.values();
  const auto& b = rm.values();
  const auto& m = support.values();
  // Same accumulation order as mse_loss.
  double sum = 0.0;
  double count = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double d = a.data()[i] - b.data()[i];
    sum += d * d * m.data()[i];
    count += m.data()[i];
  }
  if (count == 0.0) fail(ErrorKind::kEmptyLossSupport, "loss mask selects no T-F units");
  return sum / count;
}

BinaryMask restrict_to_valid_frames(const BinaryMask& mask, std::size_t valid_frames) {
  RealMatrix values = mask.values();
  for (Eigen::Index t = static_cast<Eigen::Index>(valid_frames); t < values.rows(); ++t) {
    values.row(t).setZero();
  }
  return BinaryMask(std::move(values));
}

Waveform oracle_enhance(const Waveform& mixture, const Waveform& clean,
                        const Waveform& noise, const StftConfig& config) {
  if (mixture.size() != clean.size() || clean.size() != noise.size()) {
    fail(ErrorKind::kShapeError, "mixture, clean and noise lengths differ");
  }
  const ComplexSpectrogram y = stft(mixture, config);
  const Mask irm = ideal_ratio_mask(stft(clean, config), stft(noise, config));
  return istft(apply_mask(y, irm));
}

}  // namespace xcorpus
