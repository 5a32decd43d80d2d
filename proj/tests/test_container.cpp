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


#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "support.hpp"
#include "xcorpus/container.hpp"

namespace xcorpus {
namespace {

using testing::TempDir;

RealMatrix random_real(std::uint64_t seed, Eigen::Index rows, Eigen::Index cols) {
  Rng rng(seed);
  RealMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal() * 1e3;
  return m;
}

TEST(Meta, FormatsSortedAndParsesBack) {
  const Meta meta = {{"b", "2"}, {"a", "x y"}, {"empty", ""}};
  const std::string text = format_meta(meta);
  EXPECT_EQ(text, "a=x y;b=2;empty=");
  EXPECT_EQ(parse_meta(text), meta);
  EXPECT_TRUE(parse_meta("").empty());
  EXPECT_EQ(parse_meta("k=a=b").at("k"), "a=b");
}

TEST(Meta, RejectsSeparators) {
  EXPECT_XC_ERROR(format_meta({{"a;b", "1"}}), ErrorKind::kInvalidInput);
  EXPECT_XC_ERROR(format_meta({{"a=b", "1"}}), ErrorKind::kInvalidInput);
  EXPECT_XC_ERROR(format_meta({{"a", "1;2"}}), ErrorKind::kInvalidInput);
  EXPECT_XC_ERROR(parse_meta("novalue"), ErrorKind::kParseError);
}

TEST(Record, HeaderLayout) {
  std::ostringstream os;
  RealMatrix m(1, 2);
  m << 1.5, -2.0;
  write_record(os, m, {{"k", "v"}});
  const std::string b = os.str();
  ASSERT_EQ(b.size(), 4u + 4 + 4 + 8 + 8 + 4 + 3 + 16);
  EXPECT_EQ(b.substr(0, 4), "XCBN");
  std::uint32_t version = 0, kind = 0;
  std::uint64_t rows = 0, cols = 0;
  std::memcpy(&version, b.data() + 4, 4);
  std::memcpy(&kind, b.data() + 8, 4);
  std::memcpy(&rows, b.data() + 12, 8);
  std::memcpy(&cols, b.data() + 20, 8);
  EXPECT_EQ(version, kContainerVersion);
  EXPECT_EQ(kind, 1u);
  EXPECT_EQ(rows, 1u);
  EXPECT_EQ(cols, 2u);
  double last = 0.0;
  std::memcpy(&last, b.data() + b.size() - 8, 8);
  EXPECT_EQ(last, -2.0);
}

TEST(Record, RealRoundTripIsExact) {
  const RealMatrix m = random_real(1, 7, 13);
  std::stringstream ss;
  write_record(ss, m, {{"name", "w1"}});
  write_record(ss, RealMatrix(random_real(2, 1, 3)));
  const RealRecord a = read_real_record(ss);
  const RealRecord b = read_real_record(ss);
  EXPECT_TRUE(a.values == m);
  EXPECT_EQ(a.meta.at("name"), "w1");
  EXPECT_TRUE(b.values == random_real(2, 1, 3));
  EXPECT_TRUE(b.meta.empty());
}

TEST(Record, ComplexRoundTripIsExact) {
  ComplexMatrix m(3, 4);
  Rng rng(3);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = {rng.normal(), rng.normal()};
  std::stringstream ss;
  write_record(ss, m);
  EXPECT_TRUE(read_complex_record(ss).values == m);
}

TEST(Record, ParseErrors) {
  {
    std::istringstream in("JUNKJUNKJUNK");
    EXPECT_XC_ERROR(read_real_record(in), ErrorKind::kParseError);
  }
  std::ostringstream os;
  write_record(os, random_real(4, 2, 2));
  const std::string good = os.str();
  {
    std::istringstream in(good.substr(0, good.size() - 5));
    EXPECT_XC_ERROR(read_real_record(in), ErrorKind::kParseError);
  }
  {
    std::istringstream in(good.substr(0, 10));
    EXPECT_XC_ERROR(read_real_record(in), ErrorKind::kParseError);
  }
  {
    std::string bumped = good;
    bumped[4] = 9;
    std::istringstream in(bumped);
    EXPECT_XC_ERROR(read_real_record(in), ErrorKind::kParseError);
  }
  {
    std::istringstream in(good);
    EXPECT_XC_ERROR(read_complex_record(in), ErrorKind::kParseError);
  }
}

TEST(Container, FileRoundTrip) {
  TempDir dir;
  const RealMatrix m = random_real(5, 4, 4);
  save_real(dir / "m.bin", m, {{"type", "test"}});
  const RealRecord r = load_real(dir / "m.bin");
  EXPECT_TRUE(r.values == m);
  EXPECT_EQ(r.meta.at("type"), "test");
  EXPECT_XC_ERROR(load_real(dir / "missing.bin"), ErrorKind::kIoError);
}

TEST(Container, SpectrogramRoundTrip) {
  TempDir dir;
  const ComplexSpectrogram s = stft(testing::random_waveform(6, 3000), StftConfig::frame32ms(8));
  save_spectrogram(dir / "s.bin", s);
  const ComplexSpectrogram back = load_spectrogram(dir / "s.bin");
  EXPECT_TRUE(back.values == s.values);
  EXPECT_EQ(back.config, s.config);
  EXPECT_EQ(back.original_length, 3000u);
}

TEST(Container, ConfigMetaRoundTrip) {
  for (const StftConfig& c : {StftConfig::frame32ms(2), StftConfig::corpus_analysis(),
                              StftConfig::resynthesis(WindowKind::kRectangular)}) {
    Meta meta;
    put_config(meta, c);
    EXPECT_EQ(get_config(meta), c);
  }
  Meta meta;
  put_config(meta, StftConfig::frame32ms(16));
  meta["frame_shift"] = "abc";
  EXPECT_XC_ERROR(get_config(meta), ErrorKind::kParseError);
  meta.erase("frame_shift");
  EXPECT_XC_ERROR(get_config(meta), ErrorKind::kParseError);
  put_config(meta, StftConfig::frame32ms(16));
  meta["frame_shift"] = "300";
  EXPECT_XC_ERROR(get_config(meta), ErrorKind::kConfigError);
}

TEST(Csv, MatrixCsvReadsBack) {
  TempDir dir;
  const RealMatrix m = random_real(7, 3, 257);
  const StftConfig c = StftConfig::frame32ms(16);
  write_matrix_csv(dir / "m.csv", m, c);
  const auto rows = read_numeric_csv(dir / "m.csv");
  ASSERT_EQ(rows.size(), 3u);
  for (std::size_t t = 0; t < rows.size(); ++t) {
    ASSERT_EQ(rows[t].size(), 258u);
    EXPECT_EQ(rows[t][0], static_cast<double>(t));
    for (Eigen::Index f = 0; f < m.cols(); ++f) {
      ASSERT_EQ(rows[t][static_cast<std::size_t>(f) + 1], m(static_cast<Eigen::Index>(t), f));
    }
  }
  std::ifstream in(dir / "m.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header.substr(0, 16), "frame,0,31.25,62");
}

TEST(Csv, SkipsCommentsAndRejectsLateText) {
  TempDir dir;
  {
    std::ofstream f(dir / "a.csv");
    f << "# comment\nx,y\n1,2\n\n3,4.5\n";
  }
  const auto rows = read_numeric_csv(dir / "a.csv");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1][1], 4.5);
  {
    std::ofstream f(dir / "b.csv");
    f << "1,2\noops,3\n";
  }
  EXPECT_XC_ERROR(read_numeric_csv(dir / "b.csv"), ErrorKind::kParseError);
  EXPECT_XC_ERROR(read_numeric_csv(dir / "none.csv"), ErrorKind::kIoError);
}

}  // namespace
}  // namespace xcorpus
