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

#include "xcorpus/audio_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "xcorpus/error.hpp"

namespace xcorpus {

static_assert(std::endian::native == std::endian::little,
              "WAV I/O assumes a little-endian host");

Waveform::Waveform(std::vector<double> samples, int sample_rate)
    : samples_(std::move(samples)), sample_rate_(sample_rate) {
  if (sample_rate_ != kSampleRate) {
    fail(ErrorKind::kRateMismatch,
         "expected " + std::to_string(kSampleRate) + " Hz, got " +
             std::to_string(sample_rate_));
  }
  if (samples_.empty()) fail(ErrorKind::kInvalidInput, "waveform is empty");
  for (double s : samples_) {
    if (!std::isfinite(s)) fail(ErrorKind::kInvalidInput, "non-finite sample");
  }
}

double Waveform::peak() const {
  double peak = 0.0;
  for (double s : samples_) peak = std::max(peak, std::abs(s));
  return peak;
}

double Waveform::power() const {
  long double acc = 0.0L;
  for (double s : samples_) acc += static_cast<long double>(s) * s;
  return static_cast<double>(acc / samples_.size());
}

std::size_t ms_to_samples(double ms, int sample_rate) {
  return static_cast<std::size_t>(std::llround(ms * sample_rate / 1000.0));
}

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

template <typename T>
T load_le(const std::vector<char>& bytes, std::size_t offset) {
  T value;
  std::memcpy(&value, bytes.data() + offset, sizeof(T));
  return value;
}

template <typename T>
void store_le(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

}  // namespace

Waveform read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIoError, "cannot open " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());

  const auto where = " in " + path.string();
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    fail(ErrorKind::kParseError, "missing RIFF/WAVE header" + where);
  }

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const char* data = nullptr;
  std::size_t data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::string id(bytes.data() + pos, 4);
    const auto size = load_le<std::uint32_t>(bytes, pos + 4);
    const std::size_t body = pos + 8;
    if (body + size > bytes.size()) {
      fail(ErrorKind::kParseError, "chunk '" + id + "' overruns file" + where);
    }
    if (id == "fmt ") {
      if (size < 16) fail(ErrorKind::kParseError, "short fmt chunk" + where);
      format = load_le<std::uint16_t>(bytes, body);
      channels = load_le<std::uint16_t>(bytes, body + 2);
      rate = load_le<std::uint32_t>(bytes, body + 4);
      bits = load_le<std::uint16_t>(bytes, body + 14);
      if (format == kFormatExtensible) {
        if (size < 40) fail(ErrorKind::kParseError, "short extensible fmt" + where);
        // First two bytes of the SubFormat GUID carry the base format tag.
        format = load_le<std::uint16_t>(bytes, body + 24);
      }
      have_fmt = true;
    } else if (id == "data") {
      data = bytes.data() + body;
      data_size = size;
    }
    pos = body + size + (size & 1u);
  }
  if (!have_fmt) fail(ErrorKind::kParseError, "no fmt chunk" + where);
  if (data == nullptr) fail(ErrorKind::kParseError, "no data chunk" + where);

  if (rate != static_cast<std::uint32_t>(kSampleRate)) {
    fail(ErrorKind::kRateMismatch,
         std::to_string(rate) + " Hz, expected 16000" + where);
  }
  if (channels != 1) {
    fail(ErrorKind::kChannelMismatch,
         std::to_string(channels) + " channels, expected mono" + where);
  }

  std::vector<double> samples;
  if (format == kFormatPcm && bits == 16) {
    const std::size_t n = data_size / 2;
    samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::int16_t v;
      std::memcpy(&v, data + 2 * i, 2);
      samples[i] = static_cast<double>(v) / 32768.0;
    }
  } else if (format == kFormatFloat && bits == 32) {
    const std::size_t n = data_size / 4;
    samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      float v;
      std::memcpy(&v, data + 4 * i, 4);
      samples[i] = static_cast<double>(v);
    }
  } else {
    fail(ErrorKind::kUnsupportedEncoding,
         "format tag " + std::to_string(format) + " with " +
             std::to_string(bits) + " bits" + where);
  }
  if (samples.empty()) fail(ErrorKind::kParseError, "empty data chunk" + where);
  for (double s : samples) {
    if (!std::isfinite(s)) fail(ErrorKind::kParseError, "non-finite sample" + where);
  }
  return Waveform(std::move(samples));
}

void write_wav(const std::filesystem::path& path, const Waveform& waveform,
               WavEncoding encoding) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::kIoError, "cannot write " + path.string());

  const bool pcm = encoding == WavEncoding::kPcm16;
  const std::uint16_t bits = pcm ? 16 : 32;
  const std::uint16_t block_align = bits / 8;
  const auto data_size =
      static_cast<std::uint32_t>(waveform.size() * block_align);

  out.write("RIFF", 4);
  store_le<std::uint32_t>(out, 36 + data_size);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  store_le<std::uint32_t>(out, 16);
  store_le<std::uint16_t>(out, pcm ? kFormatPcm : kFormatFloat);
  store_le<std::uint16_t>(out, 1);
  store_le<std::uint32_t>(out, kSampleRate);
  store_le<std::uint32_t>(out, kSampleRate * block_align);
  store_le<std::uint16_t>(out, block_align);
  store_le<std::uint16_t>(out, bits);
  out.write("data", 4);
  store_le<std::uint32_t>(out, data_size);

  for (double s : waveform.samples()) {
    if (pcm) {
      const double scaled = std::round(s * 32768.0);
      const auto q = static_cast<std::int16_t>(std::clamp(scaled, -32767.0, 32767.0));
      store_le<std::int16_t>(out, q);
    } else {
      store_le<float>(out, static_cast<float>(s));
    }
  }
  if (!out) fail(ErrorKind::kIoError, "write failed for " + path.string());
}

NormalizedWaveform peak_normalize(const Waveform& waveform) {
  const double peak = waveform.peak();
  if (peak == 0.0) fail(ErrorKind::kDegenerateSignal, "all-zero waveform");
  const double gain = 1.0 / peak;
  std::vector<double> out(waveform.data());
  for (double& s : out) s /= peak;
  return {Waveform(std::move(out)), gain};
}

Waveform trim_silence(const Waveform& waveform, double frame_ms,
                      double threshold_db) {
  const std::size_t frame = ms_to_samples(frame_ms);
  if (frame == 0 || waveform.size() < frame) {
    fail(ErrorKind::kConfigError, "trim_silence needs at least one full frame");
  }
  const std::size_t frames = waveform.size() / frame;
  const auto x = waveform.samples();

  std::vector<double> energy(frames, 0.0);
  for (std::size_t f = 0; f < frames; ++f) {
    for (std::size_t i = f * frame; i < (f + 1) * frame; ++i) energy[f] += x[i] * x[i];
  }
  const double max_energy = *std::max_element(energy.begin(), energy.end());
  const double threshold = max_energy * std::pow(10.0, -threshold_db / 10.0);

  std::size_t first = 0;
  while (energy[first] < threshold) ++first;
  std::size_t last = frames - 1;
  while (energy[last] < threshold) --last;

  const std::size_t begin = first * frame;
  const std::size_t end = (last == frames - 1) ? waveform.size() : (last + 1) * frame;
  return Waveform(std::vector<double>(x.begin() + begin, x.begin() + end));
}

}  // namespace xcorpus
