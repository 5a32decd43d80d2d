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

#include "xcorpus/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "xcorpus/error.hpp"

namespace xcorpus {

namespace {

void require_equal_length(const Waveform& a, const Waveform& b) {
  if (a.size() != b.size()) {
    fail(ErrorKind::kShapeError, "lengths differ: " + std::to_string(a.size()) + " vs " +
                                     std::to_string(b.size()));
  }
}

}  // namespace

double si_snr(const Waveform& reference, const Waveform& estimate) {
  require_equal_length(reference, estimate);
  const auto r = reference.samples();
  const auto e = estimate.samples();
  long double rr = 0.0L, er = 0.0L;
  for (std::size_t i = 0; i < r.size(); ++i) {
    rr += static_cast<long double>(r[i]) * r[i];
    er += static_cast<long double>(e[i]) * r[i];
  }
  if (rr == 0.0L) fail(ErrorKind::kDegenerateSignal, "silent reference");
  const long double scale = er / rr;
  long double target = 0.0L, residual = 0.0L;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const long double t = scale * r[i];
    const long double d = e[i] - t;
    target += t * t;
    residual += d * d;
  }
  if (residual == 0.0L) return target == 0.0L ? -kSiSnrCeilingDb : kSiSnrCeilingDb;
  if (target == 0.0L) return -kSiSnrCeilingDb;
  const double db = static_cast<double>(10.0L * std::log10(target / residual));
  return std::clamp(db, -kSiSnrCeilingDb, kSiSnrCeilingDb);
}

double segmental_snr(const Waveform& reference, const Waveform& estimate,
                     const SegSnrOptions& options) {
  require_equal_length(reference, estimate);
  const std::size_t frame = ms_to_samples(options.frame_ms);
  if (frame == 0 || reference.size() < frame) {
    fail(ErrorKind::kSignalTooShort, "segmental SNR needs at least one full frame");
  }
  const auto r = reference.samples();
  const auto e = estimate.samples();
  const std::size_t frames = r.size() / frame;
  double total = 0.0;
  std::size_t used = 0;
  for (std::size_t f = 0; f < frames; ++f) {
    long double sig = 0.0L, err = 0.0L;
    for (std::size_t i = f * frame; i < (f + 1) * frame; ++i) {
      sig += static_cast<long double>(r[i]) * r[i];
      const long double d = static_cast<long double>(r[i]) - e[i];
      err += d * d;
    }
    if (sig == 0.0L) continue;
    double db = err == 0.0L ? options.ceiling_db
                            : static_cast<double>(10.0L * std::log10(sig / err));
    total += std::clamp(db, options.floor_db, options.ceiling_db);
    ++used;
  }
  if (used == 0) fail(ErrorKind::kDegenerateSignal, "reference is silent in every frame");
  return total / static_cast<double>(used);
}

double log_spectral_distance(const Waveform& a, const Waveform& b, const StftConfig& config,
                             double epsilon) {
  require_equal_length(a, b);
  if (!(epsilon > 0.0)) fail(ErrorKind::kConfigError, "epsilon must be > 0");
  const RealMatrix ma = magnitude(stft(a, config));
  const RealMatrix mb = magnitude(stft(b, config));
  double frame_sum = 0.0;
  for (Eigen::Index t = 0; t < ma.rows(); ++t) {
    double bin_sum = 0.0;
    for (Eigen::Index f = 0; f < ma.cols(); ++f) {
      const double d = 20.0 * std::log10(std::max(ma(t, f), epsilon)) -
                       20.0 * std::log10(std::max(mb(t, f), epsilon));
      bin_sum += d * d;
    }
    frame_sum += bin_sum / static_cast<double>(ma.cols());
  }
  return std::sqrt(frame_sum / static_cast<double>(ma.rows()));
}

}  // namespace xcorpus
