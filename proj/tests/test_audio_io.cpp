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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "support.hpp"
#include "xcorpus/audio_io.hpp"

namespace xcorpus {
namespace {

using testing::TempDir;

// Hand-assembled RIFF/WAVE bytes, independent of the writer under test.
struct RawWav {
  std::uint16_t format = 1;
  std::uint16_t channels = 1;
  std::uint32_t rate = 16000;
  std::uint16_t bits = 16;
  std::vector<std::uint8_t> payload;
  bool extensible = false;
  std::uint16_t sub_format = 1;

  std::string bytes() const {
    std::string out;
    auto u16 = [&out](std::uint16_t v) {
      out.push_back(static_cast<char>(v & 0xff));
      out.push_back(static_cast<char>(v >> 8));
    };
    auto u32 = [&out](std::uint32_t v) {
      for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    };
    const std::uint32_t fmt_len = extensible ? 40 : 16;
    out += "RIFF";
    u32(4 + 8 + fmt_len + 8 + static_cast<std::uint32_t>(payload.size()));
    out += "WAVE";
    out += "fmt ";
    u32(fmt_len);
    u16(extensible ? 0xFFFE : format);
    u16(channels);
    u32(rate);
    u32(rate * channels * bits / 8);
    u16(static_cast<std::uint16_t>(channels * bits / 8));
    u16(bits);
    if (extensible) {
      u16(22);
      u16(bits);
      u32(0);
      u16(sub_format);
      const unsigned char guid_tail[14] = {0x00, 0x00, 0x00, 0x00, 0x10, 0x00, 0x80,
                                           0x00, 0x00, 0xAA, 0x00, 0x38, 0x9B, 0x71};
      out.append(reinterpret_cast<const char*>(guid_tail), 14);
    }
    out += "data";
    u32(static_cast<std::uint32_t>(payload.size()));
    out.append(payload.begin(), payload.end());
    return out;
  }

  void save(const std::filesystem::path& p) const {
    std::ofstream f(p, std::ios::binary);
    const std::string b = bytes();
    f.write(b.data(), static_cast<std::streamsize>(b.size()));
  }
};

std::vector<std::uint8_t> pcm16_bytes(const std::vector<std::int16_t>& v) {
  std::vector<std::uint8_t> out;
  for (auto s : v) {
    const auto u = static_cast<std::uint16_t>(s);
    out.push_back(static_cast<std::uint8_t>(u & 0xff));
    out.push_back(static_cast<std::uint8_t>(u >> 8));
  }
  return out;
}

std::vector<std::uint8_t> float_bytes(const std::vector<float>& v) {
  std::vector<std::uint8_t> out(v.size() * 4);
  std::memcpy(out.data(), v.data(), out.size());
  return out;
}

TEST(Waveform, RejectsInvalidConstruction) {
  EXPECT_XC_ERROR(Waveform({0.1}, 44100), ErrorKind::kRateMismatch);
  EXPECT_XC_ERROR(Waveform(std::vector<double>{}), ErrorKind::kInvalidInput);
  EXPECT_XC_ERROR(Waveform({0.0, std::numeric_limits<double>::quiet_NaN()}),
                  ErrorKind::kInvalidInput);
  EXPECT_XC_ERROR(Waveform({std::numeric_limits<double>::infinity()}), ErrorKind::kInvalidInput);
}

TEST(ReadWav, Pcm16HalfScaleSample) {
  TempDir dir;
  RawWav w;
  w.payload = pcm16_bytes({16384});
  w.save(dir / "a.wav");
  const Waveform x = read_wav(dir / "a.wav");
  ASSERT_EQ(x.size(), 1u);
  EXPECT_EQ(x[0], 0.5);
  EXPECT_EQ(x.sample_rate(), 16000);
}

TEST(ReadWav, Pcm16FullRangeDivisor) {
  TempDir dir;
  RawWav w;
  w.payload = pcm16_bytes({-32768, 32767, -1});
  w.save(dir / "a.wav");
  const Waveform x = read_wav(dir / "a.wav");
  EXPECT_EQ(x[0], -1.0);
  EXPECT_EQ(x[1], 32767.0 / 32768.0);
  EXPECT_EQ(x[2], -1.0 / 32768.0);
}

TEST(ReadWav, Float32ZerosPassThrough) {
  TempDir dir;
  RawWav w;
  w.format = 3;
  w.bits = 32;
  w.payload = float_bytes(std::vector<float>(160, 0.0f));
  w.save(dir / "z.wav");
  const Waveform x = read_wav(dir / "z.wav");
  ASSERT_EQ(x.size(), 160u);
  for (double v : x.samples()) EXPECT_EQ(v, 0.0);
}

TEST(ReadWav, ExtensibleFloatIsAccepted) {
  TempDir dir;
  RawWav w;
  w.bits = 32;
  w.extensible = true;
  w.sub_format = 3;
  w.payload = float_bytes({0.25f, -0.75f});
  w.save(dir / "e.wav");
  const Waveform x = read_wav(dir / "e.wav");
  ASSERT_EQ(x.size(), 2u);
  EXPECT_EQ(x[0], 0.25);
  EXPECT_EQ(x[1], -0.75);
}

TEST(ReadWav, ValidationErrors) {
  TempDir dir;
  RawWav rate;
  rate.rate = 44100;
  rate.payload = pcm16_bytes({1, 2});
  rate.save(dir / "rate.wav");
  EXPECT_XC_ERROR(read_wav(dir / "rate.wav"), ErrorKind::kRateMismatch);

  RawWav stereo;
  stereo.channels = 2;
  stereo.payload = pcm16_bytes({1, 2});
  stereo.save(dir / "stereo.wav");
  EXPECT_XC_ERROR(read_wav(dir / "stereo.wav"), ErrorKind::kChannelMismatch);

  RawWav pcm24;
  pcm24.bits = 24;
  pcm24.payload = {0, 0, 0};
  pcm24.save(dir / "pcm24.wav");
  EXPECT_XC_ERROR(read_wav(dir / "pcm24.wav"), ErrorKind::kUnsupportedEncoding);

  RawWav alaw;
  alaw.format = 6;
  alaw.bits = 8;
  alaw.payload = {1};
  alaw.save(dir / "alaw.wav");
  EXPECT_XC_ERROR(read_wav(dir / "alaw.wav"), ErrorKind::kUnsupportedEncoding);

  {
    std::ofstream f(dir / "junk.wav", std::ios::binary);
    f << "this is not a wave file";
  }
  EXPECT_XC_ERROR(read_wav(dir / "junk.wav"), ErrorKind::kParseError);

  RawWav empty;
  empty.save(dir / "empty.wav");
  EXPECT_XC_ERROR(read_wav(dir / "empty.wav"), ErrorKind::kParseError);

  const std::string full = RawWav{.payload = pcm16_bytes({1, 2, 3})}.bytes();
  {
    std::ofstream f(dir / "cut.wav", std::ios::binary);
    f.write(full.data(), static_cast<std::streamsize>(full.size() - 3));
  }
  EXPECT_XC_ERROR(read_wav(dir / "cut.wav"), ErrorKind::kParseError);

  EXPECT_XC_ERROR(read_wav(dir / "missing.wav"), ErrorKind::kIoError);
}

TEST(WriteWav, Float32RoundTripIsBitExact) {
  TempDir dir;
  std::vector<double> x = testing::uniform_samples(3, 16000, 0.9);
  for (double& v : x) v = static_cast<float>(v);
  write_wav(dir / "f.wav", Waveform(x), WavEncoding::kFloat32);
  const Waveform back = read_wav(dir / "f.wav");
  ASSERT_EQ(back.size(), x.size());
  for (std::size_t i = 0; i < x.size(); ++i) ASSERT_EQ(back[i], x[i]);
}

TEST(WriteWav, Pcm16RoundTripWithinQuantization) {
  TempDir dir;
  write_wav(dir / "h.wav", Waveform({0.5}), WavEncoding::kPcm16);
  EXPECT_NEAR(read_wav(dir / "h.wav")[0], 0.5, 1.0 / 32768.0);

  const std::vector<double> x = testing::uniform_samples(8, 4000, 1.0);
  write_wav(dir / "r.wav", Waveform(x), WavEncoding::kPcm16);
  const Waveform back = read_wav(dir / "r.wav");
  for (std::size_t i = 0; i < x.size(); ++i) ASSERT_LE(std::abs(back[i] - x[i]), 1.0 / 32768.0);
}

TEST(WriteWav, Pcm16ClampsOutOfRange) {
  TempDir dir;
  write_wav(dir / "c.wav", Waveform({1.7, -3.0}), WavEncoding::kPcm16);
  const Waveform back = read_wav(dir / "c.wav");
  EXPECT_NEAR(back[0], 1.0, 1.0 / 32768.0);
  EXPECT_NEAR(back[1], -1.0, 1.0 / 32768.0);
  EXPECT_EQ(back[0], -back[1]);
}

TEST(WriteWav, UnwritablePathIsIoError) {
  EXPECT_XC_ERROR(write_wav("/nonexistent-dir/x/y.wav", Waveform({0.1})), ErrorKind::kIoError);
}

TEST(PeakNormalize, DividesByPeak) {
  const NormalizedWaveform n = peak_normalize(Waveform({0.2, -0.4}));
  EXPECT_DOUBLE_EQ(n.waveform[0], 0.5);
  EXPECT_EQ(n.waveform[1], -1.0);
  EXPECT_DOUBLE_EQ(n.gain, 2.5);
}

TEST(PeakNormalize, IdempotentAndScaleInvariant) {
  const Waveform w = testing::random_waveform(4, 1000);
  const NormalizedWaveform once = peak_normalize(w);
  const NormalizedWaveform twice = peak_normalize(once.waveform);
  EXPECT_EQ(twice.gain, 1.0);
  EXPECT_EQ(once.waveform.peak(), 1.0);
  for (std::size_t i = 0; i < w.size(); ++i) ASSERT_EQ(twice.waveform[i], once.waveform[i]);

  for (double c : {0.01, 3.0, 1e4}) {
    std::vector<double> scaled(w.data());
    for (double& v : scaled) v *= c;
    const NormalizedWaveform s = peak_normalize(Waveform(scaled));
    for (std::size_t i = 0; i < w.size(); ++i) {
      ASSERT_NEAR(s.waveform[i], once.waveform[i], 1e-15);
    }
  }
}

TEST(PeakNormalize, AllZeroIsDegenerate) {
  EXPECT_XC_ERROR(peak_normalize(Waveform(std::vector<double>(10, 0.0))),
                  ErrorKind::kDegenerateSignal);
}

TEST(TrimSilence, ConstantSignalUnchanged) {
  const Waveform w(std::vector<double>(3200 + 17, 0.3));
  const Waveform t = trim_silence(w);
  EXPECT_EQ(t.size(), w.size());
}

TEST(TrimSilence, RemovesLeadingAndTrailingZeroFrames) {
  const std::size_t frame = 320;
  std::vector<double> x(3 * frame, 0.0);
  const std::vector<double> speech = testing::uniform_samples(1, 5 * frame, 0.5);
  x.insert(x.end(), speech.begin(), speech.end());
  x.insert(x.end(), 2 * frame, 0.0);
  const Waveform t = trim_silence(Waveform(x));
  ASSERT_EQ(t.size(), speech.size());
  for (std::size_t i = 0; i < speech.size(); ++i) ASSERT_EQ(t[i], speech[i]);
}

// Brute-force per-frame energy scan, written independently of the library.
std::pair<std::size_t, std::size_t> trim_oracle(const std::vector<double>& x, std::size_t frame,
                                                double threshold_db) {
  const std::size_t n = x.size() / frame;
  std::vector<double> e(n);
  for (std::size_t f = 0; f < n; ++f) {
    double s = 0.0;
    for (std::size_t k = 0; k < frame; ++k) s += x[f * frame + k] * x[f * frame + k];
    e[f] = s;
  }
  const double emax = *std::max_element(e.begin(), e.end());
  std::size_t first = n, last = 0;
  for (std::size_t f = 0; f < n; ++f) {
    if (10.0 * std::log10(e[f] / emax) >= -threshold_db) {
      first = std::min(first, f);
      last = std::max(last, f);
    }
  }
  return {first * frame, last == n - 1 ? x.size() : (last + 1) * frame};
}

TEST(TrimSilence, LinearRampMatchesEnergyScanOracle) {
  const std::size_t frame = 320;
  std::vector<double> x(10 * frame);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>(i) / x.size();
  const auto [begin, end] = trim_oracle(x, frame, 20.0);
  EXPECT_GT(begin, 0u);
  const Waveform t = trim_silence(Waveform(x));
  ASSERT_EQ(t.size(), end - begin);
  EXPECT_EQ(t[0], x[begin]);
}

TEST(TrimSilence, OutputIsContiguousAndKeepsLoudestFrame) {
  const std::size_t frame = 320;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    std::vector<double> x(frame * (4 + rng.uniform_index(12)) + rng.uniform_index(frame));
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double env = std::exp(-std::pow((static_cast<double>(i) / x.size() - 0.5) * 6, 2));
      x[i] = env * rng.uniform(-1, 1) * rng.uniform(0, 1);
    }
    const auto [begin, end] = trim_oracle(x, frame, 20.0);
    const Waveform t = trim_silence(Waveform(x));
    ASSERT_EQ(t.size(), end - begin) << "seed " << seed;
    for (std::size_t i = 0; i < t.size(); ++i) ASSERT_EQ(t[i], x[begin + i]);
  }
}

TEST(TrimSilence, NeedsOneFullFrame) {
  EXPECT_XC_ERROR(trim_silence(Waveform(std::vector<double>(100, 0.1))), ErrorKind::kConfigError);
}

}  // namespace
}  // namespace xcorpus
