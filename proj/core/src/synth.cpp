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

#include "xcorpus/synth.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "xcorpus/error.hpp"
#include "xcorpus/rng.hpp"

namespace xcorpus {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr std::uint64_t kUtteranceStream = 0x5554540000000000ULL;
constexpr std::uint64_t kNoiseStream = 0x4e4f495300000000ULL;

std::size_t sample_count(double seconds) {
  if (!(seconds > 0.0) || !std::isfinite(seconds)) {
    fail(ErrorKind::kConfigError, "duration must be positive");
  }
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(seconds * kSampleRate)));
}

Waveform normalized(std::vector<double> x) {
  return peak_normalize(Waveform(std::move(x))).waveform;
}

struct Vowel {
  std::array<double, 3> formant;
  std::array<double, 3> bandwidth;
};

double vocal_tract_gain(const Vowel& v, double f) {
  double g = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    const double d = (f - v.formant[i]) / v.bandwidth[i];
    g += (i == 0 ? 1.0 : 0.6) / (1.0 + d * d);
  }
  return g / (1.0 + f / 600.0);
}

}  // namespace

Waveform synth_utterance(std::uint64_t seed, double seconds) {
  const std::size_t n = sample_count(seconds);
  Rng rng = Rng::derive(seed, kUtteranceStream);
  const double fs = kSampleRate;
  const double f0_base = rng.uniform(95.0, 230.0);
  const double tilt = rng.uniform(0.8, 1.2);

  std::vector<double> x(n, 0.0);
  double phase = 0.0;
  std::size_t pos = static_cast<std::size_t>(rng.uniform(0.02, 0.15) * fs);
  while (pos < n) {
    if (rng.uniform01() < 0.15) {
      pos += static_cast<std::size_t>(rng.uniform(0.05, 0.2) * fs);
      continue;
    }
    if (rng.uniform01() < 0.35) {
      const auto len = static_cast<std::size_t>(rng.uniform(0.03, 0.08) * fs);
      const double amp = rng.uniform(0.1, 0.35);
      double prev = 0.0;
      for (std::size_t i = 0; i < len && pos + i < n; ++i) {
        const double w = rng.normal();
        const double env = std::sin(std::numbers::pi * static_cast<double>(i) /
                                    static_cast<double>(len));
        x[pos + i] += amp * env * (w - 0.9 * prev);
        prev = w;
      }
      pos += len;
    }

    const auto len = static_cast<std::size_t>(rng.uniform(0.12, 0.3) * fs);
    const Vowel v{{rng.uniform(300.0, 850.0), rng.uniform(850.0, 2400.0),
                   rng.uniform(2400.0, 3300.0)},
                  {rng.uniform(60.0, 110.0), rng.uniform(90.0, 160.0), rng.uniform(140.0, 240.0)}};
    const double amp = rng.uniform(0.4, 1.0);
    const double glide = rng.uniform(-0.15, 0.15);
    const double f0_start = f0_base * rng.uniform(0.9, 1.1);
    const std::size_t harmonics = static_cast<std::size_t>(5000.0 / (f0_start * 1.2));
    std::vector<double> gains(harmonics + 1);
    for (std::size_t i = 0; i < len && pos + i < n; ++i) {
      const double u = static_cast<double>(i) / static_cast<double>(len);
      const double f0 = f0_start * (1.0 + glide * u);
      phase = std::fmod(phase + kTwoPi * f0 / fs, kTwoPi);
      if (i % 64 == 0) {
        for (std::size_t k = 1; k <= harmonics; ++k) {
          gains[k] = std::pow(vocal_tract_gain(v, static_cast<double>(k) * f0), tilt);
        }
      }
      double s = 0.0;
      for (std::size_t k = 1; k <= harmonics; ++k) {
        if (static_cast<double>(k) * f0 >= 7000.0) break;
        s += gains[k] * std::sin(static_cast<double>(k) * phase);
      }
      const double env = std::pow(std::sin(std::numbers::pi * u), 2.0);
      x[pos + i] += amp * env * s;
    }
    pos += len;
  }

  // Recording floor, keeps pauses from being digitally silent.
  double peak = 0.0;
  for (double v : x) peak = std::max(peak, std::abs(v));
  const double floor_amp = (peak > 0.0 ? peak : 1.0) * 3e-4;
  for (double& v : x) v += floor_amp * rng.normal();
  return normalized(std::move(x));
}

std::string_view to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::kWhite: return "white";
    case NoiseKind::kPink: return "pink";
    case NoiseKind::kBrown: return "brown";
    case NoiseKind::kBabble: return "babble";
    case NoiseKind::kHum: return "hum";
  }
  return "unknown";
}

NoiseKind noise_kind_from_string(std::string_view name) {
  for (auto k : {NoiseKind::kWhite, NoiseKind::kPink, NoiseKind::kBrown, NoiseKind::kBabble,
                 NoiseKind::kHum}) {
    if (to_string(k) == name) return k;
  }
  fail(ErrorKind::kConfigError, "unknown noise kind '" + std::string(name) + "'");
}

Waveform synth_noise(NoiseKind kind, std::uint64_t seed, double seconds) {
  const std::size_t n = sample_count(seconds);
  Rng rng = Rng::derive(seed, kNoiseStream + static_cast<std::uint64_t>(kind));
  std::vector<double> x(n);
  switch (kind) {
    case NoiseKind::kWhite:
      for (double& v : x) v = rng.normal();
      break;
    case NoiseKind::kPink: {
      // Paul Kellet's economy pink filter.
      double b0 = 0, b1 = 0, b2 = 0;
      for (double& v : x) {
        const double w = rng.normal();
        b0 = 0.99765 * b0 + w * 0.0990460;
        b1 = 0.96300 * b1 + w * 0.2965164;
        b2 = 0.57000 * b2 + w * 1.0526913;
        v = b0 + b1 + b2 + w * 0.1848;
      }
      break;
    }
    case NoiseKind::kBrown: {
      double acc = 0.0;
      for (double& v : x) {
        acc = 0.995 * acc + rng.normal();
        v = acc;
      }
      break;
    }
    case NoiseKind::kBabble: {
      std::fill(x.begin(), x.end(), 0.0);
      for (std::uint64_t talker = 0; talker < 6; ++talker) {
        const Waveform u = synth_utterance(rng.next_u64(), seconds);
        const std::size_t shift = rng.uniform_index(n);
        for (std::size_t i = 0; i < n; ++i) x[i] += u[(i + shift) % n];
      }
      break;
    }
    case NoiseKind::kHum: {
      const double base = rng.uniform(48.0, 62.0);
      std::array<double, 20> amp{};
      std::array<double, 20> ph{};
      for (std::size_t k = 0; k < amp.size(); ++k) {
        amp[k] = rng.uniform(0.2, 1.0) / static_cast<double>(k + 1);
        ph[k] = rng.uniform(0.0, kTwoPi);
      }
      for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / kSampleRate;
        double s = 0.0;
        for (std::size_t k = 0; k < amp.size(); ++k) {
          s += amp[k] * std::sin(kTwoPi * base * static_cast<double>(k + 1) * t + ph[k]);
        }
        x[i] = s * (1.0 + 0.3 * std::sin(kTwoPi * 0.7 * t)) + 0.05 * rng.normal();
      }
      break;
    }
  }
  return normalized(std::move(x));
}

SourceBank synth_clean_bank(std::size_t count, double seconds, std::uint64_t seed) {
  if (count == 0) fail(ErrorKind::kEmptyCorpus, "clean bank size must be > 0");
  SourceBank bank;
  for (std::size_t i = 0; i < count; ++i) {
    char id[32];
    std::snprintf(id, sizeof(id), "utt%03zu", i);
    bank.emplace(id, synth_utterance(Rng::derive(seed, i).next_u64(), seconds));
  }
  return bank;
}

SourceBank synth_noise_bank(const std::vector<NoiseKind>& kinds, double seconds,
                            std::uint64_t seed) {
  if (kinds.empty()) fail(ErrorKind::kEmptyCorpus, "noise bank needs at least one kind");
  SourceBank bank;
  for (NoiseKind k : kinds) bank.emplace(std::string(to_string(k)), synth_noise(k, seed, seconds));
  return bank;
}

}  // namespace xcorpus
