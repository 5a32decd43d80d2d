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

#include "xcorpus/channel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <numbers>
#include <numeric>
#include <sstream>

#include "xcorpus/container.hpp"
#include "xcorpus/error.hpp"
#include "xcorpus/parallel.hpp"

namespace xcorpus {

FirChannel::FirChannel(std::vector<double> taps, std::string name)
    : taps_(std::move(taps)), name_(std::move(name)) {
  if (taps_.empty()) fail(ErrorKind::kInvalidInput, "FIR channel needs at least one tap");
  bool nonzero = false;
  for (double t : taps_) {
    if (!std::isfinite(t)) fail(ErrorKind::kInvalidInput, "non-finite FIR tap");
    nonzero = nonzero || t != 0.0;
  }
  if (!nonzero) fail(ErrorKind::kInvalidInput, "FIR channel taps are all zero");
}

FirChannel FirChannel::identity() { return FirChannel({1.0}, "identity"); }

namespace {

// Windowed frequency sampling of a zero-phase magnitude given in dB.
std::vector<double> design_linear_phase(const std::function<double(double)>& gain_db,
                                        std::size_t taps) {
  if (taps == 0 || taps % 2 == 0) {
    fail(ErrorKind::kConfigError, "parametric FIR designs need an odd tap count");
  }
  constexpr std::size_t kGrid = 2048;
  std::vector<double> amp(kGrid / 2 + 1);
  for (std::size_t k = 0; k < amp.size(); ++k) {
    const double hz = static_cast<double>(k) * kSampleRate / kGrid;
    amp[k] = std::pow(10.0, gain_db(hz) / 20.0);
  }
  const auto half = static_cast<long>(taps / 2);
  std::vector<double> h(taps);
  for (std::size_t n = 0; n < taps; ++n) {
    const long m = static_cast<long>(n) - half;
    double acc = amp[0] + amp.back() * ((m % 2 == 0) ? 1.0 : -1.0);
    for (std::size_t k = 1; k + 1 < amp.size(); ++k) {
      acc += 2.0 * amp[k] * std::cos(2.0 * std::numbers::pi * k * m / kGrid);
    }
    const double w =
        taps == 1 ? 1.0
                  : 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * n / (taps - 1));
    h[n] = acc / kGrid * w;
  }
  return h;
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Transition steepness per octave of the shelf blend.
constexpr double kShelfSlope = 3.0;

std::string label(const char* kind, double a, double b) {
  std::ostringstream os;
  os << kind << "(" << a << "," << b << ")";
  return os.str();
}

}  // namespace

FirChannel FirChannel::low_shelf(double corner_hz, double gain_db, std::size_t taps) {
  if (!(corner_hz > 0.0)) fail(ErrorKind::kConfigError, "corner_hz must be > 0");
  auto g = [=](double hz) {
    if (hz <= 0.0) return gain_db;
    return gain_db * (1.0 - logistic(kShelfSlope * std::log2(hz / corner_hz)));
  };
  return FirChannel(design_linear_phase(g, taps), label("low_shelf", corner_hz, gain_db));
}

FirChannel FirChannel::high_shelf(double corner_hz, double gain_db, std::size_t taps) {
  if (!(corner_hz > 0.0)) fail(ErrorKind::kConfigError, "corner_hz must be > 0");
  auto g = [=](double hz) {
    if (hz <= 0.0) return 0.0;
    return gain_db * logistic(kShelfSlope * std::log2(hz / corner_hz));
  };
  return FirChannel(design_linear_phase(g, taps), label("high_shelf", corner_hz, gain_db));
}

FirChannel FirChannel::resonant_peak(double center_hz, double gain_db, double bandwidth_hz,
                                     std::size_t taps) {
  if (!(bandwidth_hz > 0.0)) fail(ErrorKind::kConfigError, "bandwidth_hz must be > 0");
  auto g = [=](double hz) {
    const double z = (hz - center_hz) / bandwidth_hz;
    return gain_db * std::exp(-0.5 * z * z);
  };
  return FirChannel(design_linear_phase(g, taps), label("peak", center_hz, gain_db));
}

FirChannel FirChannel::cascade(const FirChannel& first, const FirChannel& second) {
  const auto a = first.taps();
  const auto b = second.taps();
  std::vector<double> h(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) h[i + j] += a[i] * b[j];
  }
  return FirChannel(std::move(h), first.name() + "+" + second.name());
}

FirChannel FirChannel::load_taps(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIoError, "cannot open " + path.string());
  std::vector<double> taps;
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    std::string token;
    while (ss >> token) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(token, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != token.size()) {
        fail(ErrorKind::kParseError, "bad tap '" + token + "' in " + path.string());
      }
      taps.push_back(v);
    }
  }
  return FirChannel(std::move(taps), path.stem().string());
}

void FirChannel::save_taps(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorKind::kIoError, "cannot write " + path.string());
  out << "# " << name_ << "\n" << std::setprecision(17);
  for (double t : taps_) out << t << "\n";
}

std::vector<double> FirChannel::log_magnitude_response(std::size_t fft_size) const {
  std::vector<double> out(fft_size / 2 + 1);
  for (std::size_t f = 0; f < out.size(); ++f) {
    double re = 0.0, im = 0.0;
    for (std::size_t k = 0; k < taps_.size(); ++k) {
      const double phase = -2.0 * std::numbers::pi * static_cast<double>(f * k % fft_size) /
                           static_cast<double>(fft_size);
      re += taps_[k] * std::cos(phase);
      im += taps_[k] * std::sin(phase);
    }
    out[f] = std::log(std::max(std::hypot(re, im), 1e-300));
  }
  return out;
}

Waveform apply_fir_channel(const Waveform& waveform, const FirChannel& channel) {
  const auto s = waveform.samples();
  const auto h = channel.taps();
  std::vector<double> x(s.size(), 0.0);
  for (std::size_t n = 0; n < s.size(); ++n) {
    const std::size_t kmax = std::min(h.size(), n + 1);
    double acc = 0.0;
    for (std::size_t k = 0; k < kmax; ++k) acc += h[k] * s[n - k];
    x[n] = acc;
  }
  return Waveform(std::move(x));
}

namespace {

struct BinSums {
  std::vector<long double> sums;
  std::size_t frames = 0;
};

BinSums utterance_sums(const Waveform& w, const StftConfig& config, double epsilon) {
  if (w.size() < config.frame_len) {
    fail(ErrorKind::kSignalTooShort, "utterance shorter than one analysis frame");
  }
  const LogSpectrogram log_spec = log_magnitude(stft(w, config), epsilon);
  BinSums out;
  out.sums.assign(log_spec.bins(), 0.0L);
  out.frames = log_spec.frames();
  for (Eigen::Index t = 0; t < log_spec.values.rows(); ++t) {
    for (Eigen::Index f = 0; f < log_spec.values.cols(); ++f) {
      out.sums[static_cast<std::size_t>(f)] += log_spec.values(t, f);
    }
  }
  return out;
}

CorpusChannel reduce(const std::vector<BinSums>& parts, const StftConfig& config) {
  std::vector<long double> total(config.bins(), 0.0L);
  std::size_t frames = 0;
  for (const auto& p : parts) {
    for (std::size_t f = 0; f < total.size(); ++f) total[f] += p.sums[f];
    frames += p.frames;
  }
  CorpusChannel channel;
  channel.config = config;
  channel.frame_count = frames;
  channel.log_gain.resize(static_cast<Eigen::Index>(total.size()));
  for (std::size_t f = 0; f < total.size(); ++f) {
    channel.log_gain(static_cast<Eigen::Index>(f)) =
        static_cast<double>(total[f] / static_cast<long double>(frames));
  }
  return channel;
}

}  // namespace

CorpusChannel estimate_corpus_channel(std::span<const Waveform> utterances,
                                      const StftConfig& config, double epsilon,
                                      unsigned workers) {
  config.validate();
  if (utterances.empty()) fail(ErrorKind::kEmptyCorpus, "no utterances to estimate from");
  std::vector<BinSums> parts(utterances.size());
  parallel_for(
      utterances.size(),
      [&](std::size_t i) { parts[i] = utterance_sums(utterances[i], config, epsilon); },
      workers);
  return reduce(parts, config);
}

CorpusChannel estimate_corpus_channel(std::span<const NamedWaveform> utterances,
                                      const StftConfig& config, double epsilon,
                                      unsigned workers) {
  std::vector<const NamedWaveform*> order;
  order.reserve(utterances.size());
  for (const auto& u : utterances) order.push_back(&u);
  std::stable_sort(order.begin(), order.end(),
                   [](const auto* a, const auto* b) { return a->id < b->id; });
  std::vector<Waveform> sorted;
  sorted.reserve(order.size());
  for (const auto* u : order) sorted.push_back(u->waveform);
  return estimate_corpus_channel(std::span<const Waveform>(sorted), config, epsilon, workers);
}

LogSpectrogram remove_corpus_channel(const LogSpectrogram& log_spec,
                                     const CorpusChannel& channel) {
  if (log_spec.bins() != channel.bins()) {
    fail(ErrorKind::kShapeError, "spectrogram has " + std::to_string(log_spec.bins()) +
                                     " bins, channel has " + std::to_string(channel.bins()));
  }
  LogSpectrogram out = log_spec;
  out.values.rowwise() -= channel.log_gain.transpose();
  return out;
}

CorpusChannel channel_difference(const CorpusChannel& a, const CorpusChannel& b) {
  if (!(a.config == b.config) || a.bins() != b.bins()) {
    fail(ErrorKind::kShapeError, "corpus channels use different configs");
  }
  CorpusChannel out;
  out.config = a.config;
  out.frame_count = std::min(a.frame_count, b.frame_count);
  out.log_gain = a.log_gain - b.log_gain;
  return out;
}

Waveform renormalize_utterance(const Waveform& waveform, const CorpusChannel& channel) {
  const StftConfig& config = channel.config;
  if (waveform.size() < config.frame_len) {
    fail(ErrorKind::kSignalTooShort, "utterance shorter than one resynthesis frame");
  }
  ComplexSpectrogram spec = stft(waveform, config);
  if (spec.bins() != channel.bins()) fail(ErrorKind::kShapeError, "channel width mismatch");
  // exp(log|X| - g) * e^{j angle X} == X * exp(-g); the product form avoids
  // flooring tiny magnitudes.
  const Eigen::RowVectorXd scale = (-channel.log_gain).array().exp().transpose();
  for (Eigen::Index t = 0; t < spec.values.rows(); ++t) {
    spec.values.row(t).array() *= scale.array().cast<std::complex<double>>();
  }
  return istft(spec);
}

LogSpectrogram lsms(const LogSpectrogram& log_spec) {
  if (log_spec.frames() == 0) fail(ErrorKind::kShapeError, "lsms needs at least one frame");
  LogSpectrogram out = log_spec;
  const Eigen::RowVectorXd mean = log_spec.values.colwise().mean();
  out.values.rowwise() -= mean;
  return out;
}

RealMatrix sms(const RealMatrix& magnitude) {
  if (magnitude.rows() == 0) fail(ErrorKind::kShapeError, "sms needs at least one frame");
  RealMatrix out = magnitude;
  const Eigen::RowVectorXd mean = magnitude.colwise().mean();
  out.rowwise() -= mean;
  return out;
}

LogSpectrogram rasta(const LogSpectrogram& log_spec, double c) {
  if (log_spec.frames() == 0) fail(ErrorKind::kShapeError, "rasta needs at least one frame");
  LogSpectrogram out = log_spec;
  const auto& in = log_spec.values;
  for (Eigen::Index t = 0; t < in.rows(); ++t) {
    const Eigen::Index prev = t == 0 ? 0 : t - 1;
    out.values.row(t) = in.row(t) - in.row(prev) + c * in.row(prev);
  }
  return out;
}

void save_channel_csv(const std::filesystem::path& path, const CorpusChannel& channel) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorKind::kIoError, "cannot write " + path.string());
  Meta meta;
  put_config(meta, channel.config);
  meta["frame_count"] = std::to_string(channel.frame_count);
  out << "# xcorpus corpus-channel v1 " << format_meta(meta) << "\n";
  out << "frequency_hz,log_gain\n" << std::setprecision(17);
  for (std::size_t f = 0; f < channel.bins(); ++f) {
    out << channel.config.bin_frequency_hz(f) << ','
        << channel.log_gain(static_cast<Eigen::Index>(f)) << "\n";
  }
}

CorpusChannel load_channel_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIoError, "cannot open " + path.string());
  std::string first;
  std::getline(in, first);
  const std::string prefix = "# xcorpus corpus-channel v1 ";
  if (first.rfind(prefix, 0) != 0) {
    fail(ErrorKind::kParseError, "missing corpus-channel header in " + path.string());
  }
  const Meta meta = parse_meta(first.substr(prefix.size()));
  CorpusChannel channel;
  channel.config = get_config(meta);
  channel.frame_count = std::stoull(meta.at("frame_count"));
  const auto rows = read_numeric_csv(path);
  if (rows.size() != channel.config.bins()) {
    fail(ErrorKind::kShapeError, "corpus-channel CSV row count does not match config");
  }
  channel.log_gain.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t f = 0; f < rows.size(); ++f) {
    if (rows[f].size() != 2) fail(ErrorKind::kParseError, "expected two CSV columns");
    channel.log_gain(static_cast<Eigen::Index>(f)) = rows[f][1];
  }
  return channel;
}

void save_channel_binary(const std::filesystem::path& path, const CorpusChannel& channel) {
  Meta meta;
  meta["type"] = "corpus_channel";
  meta["frame_count"] = std::to_string(channel.frame_count);
  put_config(meta, channel.config);
  RealMatrix row = channel.log_gain.transpose();
  save_real(path, row, meta);
}

CorpusChannel load_channel_binary(const std::filesystem::path& path) {
  const RealRecord rec = load_real(path);
  auto type = rec.meta.find("type");
  if (type == rec.meta.end() || type->second != "corpus_channel" || rec.values.rows() != 1) {
    fail(ErrorKind::kParseError, path.string() + " is not a corpus channel");
  }
  CorpusChannel channel;
  channel.config = get_config(rec.meta);
  channel.frame_count = std::stoull(rec.meta.at("frame_count"));
  channel.log_gain = rec.values.row(0).transpose();
  if (channel.bins() != channel.config.bins()) {
    fail(ErrorKind::kShapeError, "corpus channel width does not match config");
  }
  return channel;
}

CorpusChannel load_channel(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? load_channel_csv(path) : load_channel_binary(path);
}

}  // namespace xcorpus
