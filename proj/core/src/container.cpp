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

#include "xcorpus/container.hpp"

#include <charconv>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "xcorpus/error.hpp"

namespace xcorpus {

namespace {

constexpr char kMagic[4] = {'X', 'C', 'B', 'N'};
constexpr std::uint32_t kKindReal = 1;
constexpr std::uint32_t kKindComplex = 2;

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) {
    fail(ErrorKind::kParseError, "truncated container");
  }
  return v;
}

void write_header(std::ostream& out, std::uint32_t kind, std::uint64_t rows,
                  std::uint64_t cols, const Meta& meta) {
  out.write(kMagic, 4);
  put<std::uint32_t>(out, kContainerVersion);
  put<std::uint32_t>(out, kind);
  put<std::uint64_t>(out, rows);
  put<std::uint64_t>(out, cols);
  const std::string text = format_meta(meta);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(text.size()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

struct Header {
  std::uint32_t kind;
  std::uint64_t rows;
  std::uint64_t cols;
  Meta meta;
};

Header read_header(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    fail(ErrorKind::kParseError, "not an xcorpus container");
  }
  const auto version = get<std::uint32_t>(in);
  if (version != kContainerVersion) {
    fail(ErrorKind::kParseError, "unsupported container version " + std::to_string(version));
  }
  Header h;
  h.kind = get<std::uint32_t>(in);
  h.rows = get<std::uint64_t>(in);
  h.cols = get<std::uint64_t>(in);
  const auto meta_len = get<std::uint32_t>(in);
  std::string text(meta_len, '\0');
  if (meta_len > 0 && !in.read(text.data(), meta_len)) {
    fail(ErrorKind::kParseError, "truncated container metadata");
  }
  h.meta = parse_meta(text);
  return h;
}

std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

std::string format_meta(const Meta& meta) {
  std::string out;
  for (const auto& [k, v] : meta) {
    if (k.find_first_of("=;") != std::string::npos ||
        v.find(';') != std::string::npos) {
      fail(ErrorKind::kInvalidInput, "metadata key/value contains a separator");
    }
    if (!out.empty()) out += ';';
    out += k + '=' + v;
  }
  return out;
}

Meta parse_meta(std::string_view text) {
  Meta meta;
  while (!text.empty()) {
    const auto end = text.find(';');
    const auto item = text.substr(0, end);
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) fail(ErrorKind::kParseError, "bad metadata item");
    meta.emplace(std::string(item.substr(0, eq)), std::string(item.substr(eq + 1)));
    if (end == std::string_view::npos) break;
    text.remove_prefix(end + 1);
  }
  return meta;
}

void write_record(std::ostream& out, const RealMatrix& values, const Meta& meta) {
  write_header(out, kKindReal, static_cast<std::uint64_t>(values.rows()),
               static_cast<std::uint64_t>(values.cols()), meta);
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
}

void write_record(std::ostream& out, const ComplexMatrix& values, const Meta& meta) {
  write_header(out, kKindComplex, static_cast<std::uint64_t>(values.rows()),
               static_cast<std::uint64_t>(values.cols()), meta);
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(std::complex<double>)));
}

RealRecord read_real_record(std::istream& in) {
  const Header h = read_header(in);
  if (h.kind != kKindReal) fail(ErrorKind::kParseError, "expected a real record");
  RealRecord r;
  r.meta = h.meta;
  r.values.resize(static_cast<Eigen::Index>(h.rows), static_cast<Eigen::Index>(h.cols));
  if (!in.read(reinterpret_cast<char*>(r.values.data()),
               static_cast<std::streamsize>(r.values.size() * sizeof(double)))) {
    fail(ErrorKind::kParseError, "truncated record payload");
  }
  return r;
}

ComplexRecord read_complex_record(std::istream& in) {
  const Header h = read_header(in);
  if (h.kind != kKindComplex) fail(ErrorKind::kParseError, "expected a complex record");
  ComplexRecord r;
  r.meta = h.meta;
  r.values.resize(static_cast<Eigen::Index>(h.rows), static_cast<Eigen::Index>(h.cols));
  if (!in.read(reinterpret_cast<char*>(r.values.data()),
               static_cast<std::streamsize>(r.values.size() * sizeof(std::complex<double>)))) {
    fail(ErrorKind::kParseError, "truncated record payload");
  }
  return r;
}

void save_real(const std::filesystem::path& path, const RealMatrix& values,
               const Meta& meta) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::kIoError, "cannot write " + path.string());
  write_record(out, values, meta);
  if (!out) fail(ErrorKind::kIoError, "write failed for " + path.string());
}

RealRecord load_real(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIoError, "cannot open " + path.string());
  return read_real_record(in);
}

void put_config(Meta& meta, const StftConfig& config) {
  meta["sample_rate"] = std::to_string(config.sample_rate);
  meta["frame_len"] = std::to_string(config.frame_len);
  meta["frame_shift"] = std::to_string(config.frame_shift);
  meta["fft_size"] = std::to_string(config.fft_size);
  meta["window"] = std::string(to_string(config.window));
}

StftConfig get_config(const Meta& meta) {
  auto field = [&](const char* key) -> const std::string& {
    auto it = meta.find(key);
    if (it == meta.end()) fail(ErrorKind::kParseError, std::string("missing metadata ") + key);
    return it->second;
  };
  auto as_size = [&](const char* key) {
    std::size_t v = 0;
    const auto& s = field(key);
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) {
      fail(ErrorKind::kParseError, std::string("bad integer for ") + key);
    }
    return v;
  };
  StftConfig c;
  c.sample_rate = static_cast<int>(as_size("sample_rate"));
  c.frame_len = as_size("frame_len");
  c.frame_shift = as_size("frame_shift");
  c.fft_size = as_size("fft_size");
  c.window = window_from_string(field("window"));
  c.validate();
  return c;
}

void save_spectrogram(const std::filesystem::path& path, const ComplexSpectrogram& spec) {
  Meta meta;
  meta["type"] = "complex_spectrogram";
  meta["original_length"] = std::to_string(spec.original_length);
  put_config(meta, spec.config);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::kIoError, "cannot write " + path.string());
  write_record(out, spec.values, meta);
}

ComplexSpectrogram load_spectrogram(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIoError, "cannot open " + path.string());
  auto rec = read_complex_record(in);
  ComplexSpectrogram spec;
  spec.values = std::move(rec.values);
  spec.config = get_config(rec.meta);
  auto it = rec.meta.find("original_length");
  if (it == rec.meta.end()) fail(ErrorKind::kParseError, "missing original_length");
  spec.original_length = std::stoull(it->second);
  return spec;
}

void write_matrix_csv(const std::filesystem::path& path, const RealMatrix& values,
                      const StftConfig& config) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorKind::kIoError, "cannot write " + path.string());
  out << "frame";
  for (Eigen::Index f = 0; f < values.cols(); ++f) {
    out << ',' << format_double(config.bin_frequency_hz(static_cast<std::size_t>(f)));
  }
  out << '\n';
  for (Eigen::Index t = 0; t < values.rows(); ++t) {
    out << t;
    for (Eigen::Index f = 0; f < values.cols(); ++f) out << ',' << format_double(values(t, f));
    out << '\n';
  }
}

std::vector<std::vector<double>> read_numeric_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIoError, "cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  bool first_data_line = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    bool numeric = true;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      double v = 0.0;
      auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || p != cell.data() + cell.size()) {
        numeric = false;
        break;
      }
      row.push_back(v);
    }
    if (!numeric) {
      if (first_data_line) {
        first_data_line = false;
        continue;
      }
      fail(ErrorKind::kParseError, "non-numeric CSV row in " + path.string());
    }
    first_data_line = false;
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace xcorpus
