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

#include "xcorpus/stft.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "fft.hpp"
#include "xcorpus/error.hpp"

namespace xcorpus {

std::string_view to_string(WindowKind kind) {
  return kind == WindowKind::kHamming ? "hamming" : "rectangular";
}

WindowKind window_from_string(std::string_view name) {
  if (name == "hamming") return WindowKind::kHamming;
  if (name == "rectangular" || name == "rect") return WindowKind::kRectangular;
  fail(ErrorKind::kConfigError, "unknown window '" + std::string(name) + "'");
}

StftConfig StftConfig::make(std::size_t frame_len, std::size_t frame_shift,
                            WindowKind window) {
  StftConfig c;
  c.frame_len = frame_len;
  c.frame_shift = frame_shift;
  c.window = window;
  c.fft_size = frame_len;
  c.validate();
  return c;
}

StftConfig StftConfig::frame32ms(int shift_ms) {
  if (shift_ms <= 0 || 32 % shift_ms != 0) {
    fail(ErrorKind::kConfigError, "32 ms frame needs a shift dividing 32 ms");
  }
  return make(512, static_cast<std::size_t>(shift_ms) * 16);
}

StftConfig StftConfig::corpus_analysis() { return make(320, 160); }

StftConfig StftConfig::resynthesis(WindowKind window) {
  return make(2048, 32, window);
}

void StftConfig::validate() const {
  if (sample_rate != kSampleRate) {
    fail(ErrorKind::kConfigError, "sample_rate must be 16000");
  }
  if (frame_shift == 0 || frame_shift > frame_len || frame_len > fft_size) {
    fail(ErrorKind::kConfigError,
         "need 0 < frame_shift <= frame_len <= fft_size, got " + describe());
  }
  if (frame_len % frame_shift != 0) {
    fail(ErrorKind::kConfigError,
         "frame_len must be a multiple of frame_shift, got " + describe());
  }
}

std::size_t StftConfig::num_frames(std::size_t length) const {
  return std::max<std::size_t>(1, (length + frame_shift - 1) / frame_shift);
}

double StftConfig::bin_frequency_hz(std::size_t bin) const {
  return static_cast<double>(bin) * sample_rate / static_cast<double>(fft_size);
}

std::vector<double> StftConfig::window_coefficients() const {
  std::vector<double> w(frame_len, 1.0);
  if (window == WindowKind::kHamming && frame_len > 1) {
    const double denom = static_cast<double>(frame_len - 1);
    for (std::size_t k = 0; k < frame_len; ++k) {
      w[k] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * k / denom);
    }
  }
  return w;
}

std::string StftConfig::describe() const {
  std::ostringstream os;
  os << frame_len << "/" << frame_shift << " " << to_string(window)
     << " fft=" << fft_size;
  return os.str();
}

ComplexSpectrogram stft(const Waveform& waveform, const StftConfig& config) {
  config.validate();
  const std::size_t length = waveform.size();
  const std::size_t frames = config.num_frames(length);
  const auto window = config.window_coefficients();
  const detail::RealFft fft(config.fft_size);

  ComplexSpectrogram spec;
  spec.config = config;
  spec.original_length = length;
  spec.values.resize(static_cast<Eigen::Index>(frames),
                     static_cast<Eigen::Index>(config.bins()));

  const auto x = waveform.samples();
  std::vector<double> frame(config.fft_size);
  std::vector<std::complex<double>> bins(config.bins());
  for (std::size_t t = 0; t < frames; ++t) {
    std::fill(frame.begin(), frame.end(), 0.0);
    const std::size_t start = t * config.frame_shift;
    const std::size_t avail = std::min(config.frame_len, length - start);
    for (std::size_t k = 0; k < avail; ++k) frame[k] = x[start + k] * window[k];
    fft.forward(frame, bins);
    for (std::size_t f = 0; f < bins.size(); ++f) {
      spec.values(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(f)) = bins[f];
    }
  }
  return spec;
}

Waveform istft(const ComplexSpectrogram& spec) {
  const StftConfig& config = spec.config;
  config.validate();
  if (spec.bins() != config.bins()) {
    fail(ErrorKind::kShapeError, "spectrogram width does not match fft_size");
  }
  if (spec.original_length == 0 || spec.frames() == 0) {
    fail(ErrorKind::kShapeError, "empty spectrogram");
  }
  const std::size_t frames = spec.frames();
  const std::size_t padded = (frames - 1) * config.frame_shift + config.frame_len;
  if (padded < spec.original_length) {
    fail(ErrorKind::kShapeError, "too few frames for original_length");
  }
  const auto window = config.window_coefficients();
  const detail::RealFft fft(config.fft_size);

  std::vector<double> acc(padded, 0.0);
  std::vector<double> wsum(padded, 0.0);
  std::vector<std::complex<double>> bins(config.bins());
  std::vector<double> frame(config.fft_size);
  // Fixed frame order keeps the accumulation bitwise reproducible.
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t f = 0; f < bins.size(); ++f) {
      bins[f] = spec.values(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(f));
    }
    fft.inverse(bins, frame);
    const std::size_t start = t * config.frame_shift;
    for (std::size_t k = 0; k < config.frame_len; ++k) {
      acc[start + k] += frame[k] * window[k];
      wsum[start + k] += window[k] * window[k];
    }
  }

  std::vector<double> out(spec.original_length);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (wsum[i] < kWindowSumFloor) {
      fail(ErrorKind::kSynthesisError,
           "window sum below floor at sample " + std::to_string(i));
    }
    out[i] = acc[i] / wsum[i];
  }
  return Waveform(std::move(out));
}

RealMatrix magnitude(const ComplexSpectrogram& spec) {
  return spec.values.cwiseAbs();
}

LogSpectrogram log_magnitude(const RealMatrix& mag, double epsilon) {
  if (!(epsilon > 0.0)) fail(ErrorKind::kConfigError, "epsilon must be > 0");
  LogSpectrogram out;
  out.epsilon = epsilon;
  out.values = mag.unaryExpr([epsilon](double m) { return std::log(std::max(m, epsilon)); });
  return out;
}

LogSpectrogram log_magnitude(const ComplexSpectrogram& spec, double epsilon) {
  return log_magnitude(magnitude(spec), epsilon);
}

}  // namespace xcorpus
