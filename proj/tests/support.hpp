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

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <unistd.h>

#include "xcorpus/audio_io.hpp"
#include "xcorpus/error.hpp"
#include "xcorpus/rng.hpp"

#define EXPECT_XC_ERROR(stmt, expected_kind)                                   \
  do {                                                                         \
    try {                                                                      \
      stmt;                                                                    \
      ADD_FAILURE() << "expected " << ::xcorpus::to_string(expected_kind);     \
    } catch (const ::xcorpus::Error& e) {                                      \
      EXPECT_EQ(e.kind(), expected_kind) << e.what();                          \
    }                                                                          \
  } while (0)

namespace xcorpus::testing {

inline std::vector<double> uniform_samples(std::uint64_t seed, std::size_t n,
                                           double amplitude = 0.5) {
  Rng rng(seed);
  std::vector<double> x(n);
  for (double& v : x) v = rng.uniform(-amplitude, amplitude);
  return x;
}

inline Waveform random_waveform(std::uint64_t seed, std::size_t n, double amplitude = 0.5) {
  return Waveform(uniform_samples(seed, n, amplitude));
}

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("xcorpus-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace xcorpus::testing
