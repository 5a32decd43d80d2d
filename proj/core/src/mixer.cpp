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

#include "xcorpus/mixer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "xcorpus/error.hpp"
#include "xcorpus/rng.hpp"

namespace xcorpus {

using nlohmann::json;

namespace {

// Stream keys separating the different uses of the manifest seed.
constexpr std::uint64_t kEntryStream = 0x454e545259ULL;   // "ENTRY"
constexpr std::uint64_t kSplitStream = 0x53504c4954ULL;   // "SPLIT"
constexpr std::uint64_t kEpochStream = 0x45504f4348ULL;   // "EPOCH"

long double sum_squares(std::span<const double> x) {
  long double acc = 0.0L;
  for (double v : x) acc += static_cast<long double>(v) * v;
  return acc;
}

Waveform segment(const Waveform& source, std::size_t offset, std::size_t length,
                 const std::string& what) {
  if (length == 0 || offset + length > source.size()) {
    fail(ErrorKind::kInvalidInput, what + " segment [" + std::to_string(offset) + ", " +
                                       std::to_string(offset + length) +
                                       ") exceeds source length " +
                                       std::to_string(source.size()));
  }
  const auto s = source.samples();
  return Waveform(std::vector<double>(s.begin() + static_cast<std::ptrdiff_t>(offset),
                                      s.begin() + static_cast<std::ptrdiff_t>(offset + length)));
}

const Waveform& lookup(const SourceBank& bank, const std::string& id, const char* what) {
  auto it = bank.find(id);
  if (it == bank.end()) fail(ErrorKind::kInvalidInput, std::string("unknown ") + what + " '" + id + "'");
  return it->second;
}

// Draws the random part of one entry. Draw order is part of the manifest
// format: noise, SNR, clean offset, noise offset.
MixtureSpec draw_entry(std::uint64_t entry_seed, const std::string& clean_id,
                       std::size_t clean_len, const SourceBank& noise,
                       const std::vector<double>& snr_set, std::size_t segment_len) {
  Rng rng(entry_seed);
  MixtureSpec spec;
  spec.seed = entry_seed;
  spec.clean_id = clean_id;

  auto noise_it = noise.begin();
  std::advance(noise_it, static_cast<std::ptrdiff_t>(rng.uniform_index(noise.size())));
  spec.noise_id = noise_it->first;
  spec.snr_db = snr_set[rng.uniform_index(snr_set.size())];

  const std::size_t noise_len = noise_it->second.size();
  spec.segment_len = std::min({segment_len, clean_len, noise_len});
  spec.clean_offset = rng.uniform_index(clean_len - spec.segment_len + 1);
  spec.noise_offset = rng.uniform_index(noise_len - spec.segment_len + 1);
  return spec;
}

}  // namespace

Manifest Manifest::subset(const std::string& split) const {
  Manifest out = *this;
  out.entries.clear();
  for (const auto& e : entries) {
    if (e.split == split) out.entries.push_back(e);
  }
  return out;
}

SourceBank load_source_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    fail(ErrorKind::kIoError, dir.string() + " is not a directory");
  }
  SourceBank bank;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".wav") {
      bank.emplace(entry.path().filename().string(), read_wav(entry.path()));
    }
  }
  if (bank.empty()) fail(ErrorKind::kEmptyCorpus, "no .wav files in " + dir.string());
  return bank;
}

double snr_gain(const Waveform& speech, const Waveform& noise, double snr_db) {
  if (!std::isfinite(snr_db)) fail(ErrorKind::kInvalidInput, "snr_db must be finite");
  const double ps = speech.power();
  const double pn = noise.power();
  if (ps == 0.0) fail(ErrorKind::kDegenerateSignal, "speech segment has zero power");
  if (pn == 0.0) fail(ErrorKind::kDegenerateSignal, "noise segment has zero power");
  return std::sqrt(ps / (pn * std::pow(10.0, snr_db / 10.0)));
}

double measure_snr_db(const Waveform& speech, const Waveform& noise) {
  const long double es = sum_squares(speech.samples());
  const long double en = sum_squares(noise.samples());
  if (en == 0.0L) fail(ErrorKind::kDegenerateSignal, "noise has zero energy");
  return static_cast<double>(10.0L * std::log10(es / en));
}

Mixture mix_at_snr(const MixtureSpec& spec, const Waveform& clean, const Waveform& noise) {
  const Waveform x = segment(clean, spec.clean_offset, spec.segment_len, "clean");
  const Waveform n = segment(noise, spec.noise_offset, spec.segment_len, "noise");
  const double alpha = snr_gain(x, n, spec.snr_db);

  const std::size_t len = spec.segment_len;
  std::vector<double> y(len), scaled_noise(len);
  for (std::size_t i = 0; i < len; ++i) {
    scaled_noise[i] = alpha * n[i];
    y[i] = x[i] + scaled_noise[i];
  }
  double peak = 0.0;
  for (double v : y) peak = std::max(peak, std::abs(v));
  if (peak == 0.0) fail(ErrorKind::kDegenerateSignal, "mixture cancels to silence");

  std::vector<double> xs(x.data());
  for (std::size_t i = 0; i < len; ++i) {
    y[i] /= peak;
    xs[i] /= peak;
    scaled_noise[i] /= peak;
  }
  return {Waveform(std::move(y)), Waveform(std::move(xs)), Waveform(std::move(scaled_noise))};
}

Manifest build_manifest(const SourceBank& clean, const SourceBank& noise,
                        const ManifestOptions& options) {
  if (clean.empty()) fail(ErrorKind::kEmptyCorpus, "no clean sources");
  if (noise.empty()) fail(ErrorKind::kEmptyCorpus, "no noise sources");
  if (options.snr_set.empty()) fail(ErrorKind::kConfigError, "empty SNR set");
  for (double s : options.snr_set) {
    if (!std::isfinite(s)) fail(ErrorKind::kConfigError, "non-finite SNR in set");
  }
  if (!(options.segment_s > 0.0)) fail(ErrorKind::kConfigError, "segment_s must be > 0");
  if (options.test_fraction < 0.0 || options.test_fraction > 1.0) {
    fail(ErrorKind::kConfigError, "test_fraction must lie in [0, 1]");
  }

  Manifest m;
  m.corpus = options.corpus;
  m.seed = options.seed;
  m.rng = std::string(Rng::kAlgorithm);
  m.snr_set = options.snr_set;
  m.segment_len = static_cast<std::size_t>(std::llround(options.segment_s * kSampleRate));

  // Seeded Fisher-Yates over the sorted ids picks the test sources.
  std::vector<std::string> ids;
  for (const auto& [id, w] : clean) ids.push_back(id);
  std::vector<std::string> shuffled = ids;
  Rng split_rng = Rng::derive(options.seed, kSplitStream);
  for (std::size_t i = shuffled.size(); i > 1; --i) {
    std::swap(shuffled[i - 1], shuffled[split_rng.uniform_index(i)]);
  }
  const auto n_test = static_cast<std::size_t>(
      std::llround(options.test_fraction * static_cast<double>(ids.size())));
  const std::set<std::string> test_ids(shuffled.begin(),
                                       shuffled.begin() + static_cast<std::ptrdiff_t>(n_test));

  std::uint64_t index = 0;
  for (const auto& [id, w] : clean) {
    const std::uint64_t entry_seed = Rng::derive(options.seed, kEntryStream + index).next_u64();
    MixtureSpec spec = draw_entry(entry_seed, id, w.size(), noise, m.snr_set, m.segment_len);
    spec.split = test_ids.contains(id) ? "test" : "train";
    m.entries.push_back(std::move(spec));
    ++index;
  }
  return m;
}

Manifest build_manifest(const std::filesystem::path& clean_dir,
                        const std::filesystem::path& noise_dir,
                        const ManifestOptions& options) {
  Manifest m = build_manifest(load_source_dir(clean_dir), load_source_dir(noise_dir), options);
  m.clean_dir = clean_dir.string();
  m.noise_dir = noise_dir.string();
  return m;
}

Manifest remix_manifest(const Manifest& manifest, const SourceBank& clean,
                        const SourceBank& noise, std::uint64_t epoch) {
  if (epoch == 0) return manifest;
  if (noise.empty()) fail(ErrorKind::kEmptyCorpus, "no noise sources");
  Manifest out = manifest;
  const std::uint64_t epoch_seed = Rng::derive(manifest.seed, kEpochStream + epoch).next_u64();
  for (std::size_t i = 0; i < out.entries.size(); ++i) {
    auto& e = out.entries[i];
    const Waveform& source = lookup(clean, e.clean_id, "clean source");
    const std::uint64_t entry_seed = Rng::derive(epoch_seed, kEntryStream + i).next_u64();
    MixtureSpec fresh =
        draw_entry(entry_seed, e.clean_id, source.size(), noise, manifest.snr_set,
                   manifest.segment_len);
    fresh.split = e.split;
    e = std::move(fresh);
  }
  return out;
}

Mixture render_entry(const MixtureSpec& spec, const SourceBank& clean, const SourceBank& noise) {
  return mix_at_snr(spec, lookup(clean, spec.clean_id, "clean source"),
                    lookup(noise, spec.noise_id, "noise source"));
}

void validate_manifest(const Manifest& manifest, const SourceBank& clean,
                       const SourceBank& noise) {
  std::set<std::string> train, test;
  for (const auto& e : manifest.entries) {
    const Waveform& c = lookup(clean, e.clean_id, "clean source");
    const Waveform& n = lookup(noise, e.noise_id, "noise source");
    if (e.segment_len == 0 || e.clean_offset + e.segment_len > c.size() ||
        e.noise_offset + e.segment_len > n.size()) {
      fail(ErrorKind::kInvalidInput, "entry for " + e.clean_id + " has out-of-range offsets");
    }
    if (!std::isfinite(e.snr_db)) fail(ErrorKind::kInvalidInput, "non-finite SNR");
    (e.split == "test" ? test : train).insert(e.clean_id);
  }
  for (const auto& id : test) {
    if (train.contains(id)) {
      fail(ErrorKind::kInvalidInput, "clean source " + id + " is in both train and test");
    }
  }
}

std::string serialize_manifest(const Manifest& m) {
  std::ostringstream os;
  json header = {
      {"format", "xcorpus-manifest"},
      {"version", kManifestVersion},
      {"rng", m.rng},
      {"seed", m.seed},
      {"corpus", m.corpus},
      {"snr_set", m.snr_set},
      {"segment_len", m.segment_len},
      {"clean_dir", m.clean_dir},
      {"noise_dir", m.noise_dir},
      {"entries", m.entries.size()},
  };
  os << header.dump() << '\n';
  for (const auto& e : m.entries) {
    json line = {
        {"clean_id", e.clean_id},         {"noise_id", e.noise_id},
        {"clean_offset", e.clean_offset}, {"noise_offset", e.noise_offset},
        {"segment_len", e.segment_len},   {"snr_db", e.snr_db},
        {"seed", e.seed},                 {"split", e.split},
    };
    os << line.dump() << '\n';
  }
  return os.str();
}

Manifest parse_manifest(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  Manifest m;
  bool have_header = false;
  std::size_t expected = 0;
  try {
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const json j = json::parse(line);
      if (!have_header) {
        if (j.value("format", "") != "xcorpus-manifest") {
          fail(ErrorKind::kParseError, "not an xcorpus manifest");
        }
        if (j.at("version").get<int>() != kManifestVersion) {
          fail(ErrorKind::kParseError, "unsupported manifest version");
        }
        m.rng = j.at("rng").get<std::string>();
        m.seed = j.at("seed").get<std::uint64_t>();
        m.corpus = j.at("corpus").get<std::string>();
        m.snr_set = j.at("snr_set").get<std::vector<double>>();
        m.segment_len = j.at("segment_len").get<std::size_t>();
        m.clean_dir = j.at("clean_dir").get<std::string>();
        m.noise_dir = j.at("noise_dir").get<std::string>();
        expected = j.at("entries").get<std::size_t>();
        have_header = true;
        continue;
      }
      MixtureSpec e;
      e.clean_id = j.at("clean_id").get<std::string>();
      e.noise_id = j.at("noise_id").get<std::string>();
      e.clean_offset = j.at("clean_offset").get<std::size_t>();
      e.noise_offset = j.at("noise_offset").get<std::size_t>();
      e.segment_len = j.at("segment_len").get<std::size_t>();
      e.snr_db = j.at("snr_db").get<double>();
      e.seed = j.at("seed").get<std::uint64_t>();
      e.split = j.at("split").get<std::string>();
      m.entries.push_back(std::move(e));
    }
  } catch (const json::exception& ex) {
    fail(ErrorKind::kParseError, std::string("manifest: ") + ex.what());
  }
  if (!have_header) fail(ErrorKind::kParseError, "manifest has no header line");
  if (m.entries.size() != expected) {
    fail(ErrorKind::kParseError, "manifest header announces " + std::to_string(expected) +
                                     " entries, found " + std::to_string(m.entries.size()));
  }
  return m;
}

void save_manifest(const std::filesystem::path& path, const Manifest& manifest) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::kIoError, "cannot write " + path.string());
  out << serialize_manifest(manifest);
}

Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIoError, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_manifest(ss.str());
}

}  // namespace xcorpus
