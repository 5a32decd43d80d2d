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

// Binary container, version 1. Each record is
//
//   "XCBN"  u32 version  u32 kind (1 = float64, 2 = complex128)
//   u64 rows  u64 cols  u32 meta_len  meta bytes
//   rows * cols values, row-major, little-endian (complex as re, im)
//
// A file holds one or more records back to back. `meta` is a free-form
// "key=value;key=value" string describing the payload.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "xcorpus/stft.hpp"
#include "xcorpus/types.hpp"

namespace xcorpus {

inline constexpr std::uint32_t kContainerVersion = 1;

using Meta = std::map<std::string, std::string>;

std::string format_meta(const Meta& meta);
Meta parse_meta(std::string_view text);

struct RealRecord {
  RealMatrix values;
  Meta meta;
};

struct ComplexRecord {
  ComplexMatrix values;
  Meta meta;
};

void write_record(std::ostream& out, const RealMatrix& values, const Meta& meta = {});
void write_record(std::ostream& out, const ComplexMatrix& values, const Meta& meta = {});
RealRecord read_real_record(std::istream& in);
ComplexRecord read_complex_record(std::istream& in);

void save_real(const std::filesystem::path& path, const RealMatrix& values,
               const Meta& meta = {});
RealRecord load_real(const std::filesystem::path& path);

void save_spectrogram(const std::filesystem::path& path, const ComplexSpectrogram& spec);
ComplexSpectrogram load_spectrogram(const std::filesystem::path& path);

void put_config(Meta& meta, const StftConfig& config);
StftConfig get_config(const Meta& meta);

/// Wide CSV: header "frame,<bin centre Hz>...", one row per frame.
void write_matrix_csv(const std::filesystem::path& path, const RealMatrix& values,
                      const StftConfig& config);

/// Rows of doubles, skipping '#' comment lines and one optional header row.
std::vector<std::vector<double>> read_numeric_csv(const std::filesystem::path& path);

}  // namespace xcorpus
