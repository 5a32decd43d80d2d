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

#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "xcorpus/audio_io.hpp"
#include "xcorpus/channel.hpp"
#include "xcorpus/container.hpp"
#include "xcorpus/error.hpp"
#include "xcorpus/estimator.hpp"
#include "xcorpus/experiment.hpp"
#include "xcorpus/mask.hpp"
#include "xcorpus/metrics.hpp"
#include "xcorpus/mixer.hpp"

namespace xcorpus::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIoError, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::kIoError, "cannot write " + path.string());
  out << text;
  if (!out) fail(ErrorKind::kIoError, "write failed for " + path.string());
}

WavEncoding encoding_from(const std::string& name) {
  return name == "pcm16" ? WavEncoding::kPcm16 : WavEncoding::kFloat32;
}

StftConfig framing(double frame_ms, double shift_ms) {
  return StftConfig::make(ms_to_samples(frame_ms), ms_to_samples(shift_ms));
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Files named directly, plus every *.wav inside named directories (sorted).
std::vector<NamedWaveform> load_inputs(const std::vector<std::string>& inputs) {
  std::vector<NamedWaveform> out;
  for (const auto& in : inputs) {
    if (fs::is_directory(in)) {
      for (auto& [id, w] : load_source_dir(in)) out.push_back({id, std::move(w)});
    } else {
      out.push_back({fs::path(in).filename().string(), read_wav(in)});
    }
  }
  return out;
}

/// Appends `--key value...` for every key of the JSON config that is not
/// already on the command line.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  auto it = std::find(args.begin(), args.end(), "--config");
  if (it == args.end() || it + 1 == args.end()) return args;
  if (std::find(args.begin(), it, "experiment") != it) return args;
  const std::string path = *(it + 1);
  json j;
  try {
    j = json::parse(read_text(path));
  } catch (const json::exception& e) {
    fail(ErrorKind::kParseError, path + ": " + e.what());
  }
  if (!j.is_object()) fail(ErrorKind::kConfigError, path + ": config must be a JSON object");
  auto scalar = [&path](const json& v) -> std::string {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number() || v.is_boolean()) return v.dump();
    fail(ErrorKind::kConfigError, path + ": unsupported config value " + v.dump());
  };
  for (const auto& [key, value] : j.items()) {
    const std::string flag = "--" + key;
    const bool present = std::any_of(args.begin(), args.end(), [&flag](const std::string& a) {
      return a == flag || a.rfind(flag + "=", 0) == 0;
    });
    if (present) continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) args.push_back(flag);
    } else if (value.is_array()) {
      args.push_back(flag);
      for (const auto& v : value) args.push_back(scalar(v));
    } else {
      args.push_back(flag);
      args.push_back(scalar(value));
    }
  }
  return args;
}

struct Options {
  std::string config;

  // estimate-channel
  std::vector<std::string> inputs;
  std::string preset = "analysis";
  double epsilon = kLogEpsilon;
  unsigned workers = 0;

  // shared paths
  std::string input;
  std::string output;
  std::string channel;
  std::string target;
  std::string encoding = "float32";
  std::string manifest;
  std::string clean_dir;
  std::string noise_dir;
  std::string output_dir;
  std::string model;
  std::string log;
  std::optional<std::size_t> index;

  // mixing
  std::uint64_t seed = 0;
  std::vector<double> snr = {-5, -4, -3, -2, -1, 0};
  double segment_s = 4.0;
  double test_fraction = 0.0;
  std::string corpus = "corpus";

  // framing
  double frame_ms = 32.0;
  double shift_ms = 16.0;

  // oracle / evaluate
  std::string mixture;
  std::string clean;
  std::string noise;
  std::string reference;
  std::string estimate;

  // train
  std::string feature_kind = "log_lsms";
  std::size_t epochs = TrainConfig{}.epochs;
  double lr = TrainConfig{}.learning_rate;
  std::size_t batch_size = TrainConfig{}.batch_size;
  std::size_t hidden = TrainConfig{}.hidden;
  std::size_t context = 2;
  bool no_remix = false;

  // experiment
  bool frame_shift = false;
  bool no_timestamp = false;

  // export-figure
  std::string figure;
  std::string experiment_config;
  std::vector<std::string> taps;
  std::size_t fft_size = 512;
  std::string report;
};

void add_config(CLI::App* sc, Options& o) {
  sc->add_option("--config", o.config, "JSON object of flag values")->check(CLI::ExistingFile);
}

void add_framing(CLI::App* sc, Options& o) {
  sc->add_option("--frame-ms", o.frame_ms, "analysis frame length in ms")->capture_default_str();
  sc->add_option("--shift-ms", o.shift_ms, "frame shift in ms")->capture_default_str();
}

void add_encoding(CLI::App* sc, Options& o) {
  sc->add_option("--encoding", o.encoding, "output WAV encoding")
      ->check(CLI::IsMember({"float32", "pcm16"}))
      ->capture_default_str();
}

SourceBank bank_for(const std::string& override_dir, const std::string& manifest_dir,
                    const char* what) {
  const std::string dir = override_dir.empty() ? manifest_dir : override_dir;
  if (dir.empty()) {
    fail(ErrorKind::kConfigError, std::string("no ") + what + " directory in manifest or flags");
  }
  return load_source_dir(dir);
}

int cmd_estimate_channel(const Options& o, std::ostream& out) {
  StftConfig config = o.preset == "resynthesis" ? StftConfig::resynthesis()
                      : o.preset == "frame32"   ? framing(o.frame_ms, o.shift_ms)
                                                : StftConfig::corpus_analysis();
  const auto utterances = load_inputs(o.inputs);
  const CorpusChannel channel = estimate_corpus_channel(utterances, config, o.epsilon, o.workers);
  if (fs::path(o.output).extension() == ".csv") {
    save_channel_csv(o.output, channel);
  } else {
    save_channel_binary(o.output, channel);
  }
  out << "corpus channel: " << utterances.size() << " utterances, " << channel.frame_count
      << " frames, " << channel.bins() << " bins -> " << o.output << "\n";
  return kExitOk;
}

int cmd_renormalize(const Options& o, std::ostream& out) {
  CorpusChannel channel = load_channel(o.channel);
  if (!o.target.empty()) channel = channel_difference(channel, load_channel(o.target));
  const Waveform result = renormalize_utterance(read_wav(o.input), channel);
  write_wav(o.output, result, encoding_from(o.encoding));
  out << "renormalized " << o.input << " -> " << o.output << "\n";
  return kExitOk;
}

int cmd_mix_build(const Options& o, std::ostream& out) {
  ManifestOptions opts;
  opts.snr_set = o.snr;
  opts.segment_s = o.segment_s;
  opts.seed = o.seed;
  opts.corpus = o.corpus;
  opts.test_fraction = o.test_fraction;
  const Manifest m = build_manifest(fs::path(o.clean_dir), fs::path(o.noise_dir), opts);
  save_manifest(o.output, m);
  out << "manifest: " << m.entries.size() << " entries -> " << o.output << "\n";
  return kExitOk;
}

int cmd_mix_render(const Options& o, std::ostream& out) {
  const Manifest m = load_manifest(o.manifest);
  const SourceBank clean = bank_for(o.clean_dir, m.clean_dir, "clean");
  const SourceBank noise = bank_for(o.noise_dir, m.noise_dir, "noise");
  validate_manifest(m, clean, noise);
  fs::create_directories(o.output_dir);
  std::size_t first = 0, last = m.entries.size();
  if (o.index) {
    if (*o.index >= m.entries.size()) {
      fail(ErrorKind::kInvalidInput, "index " + std::to_string(*o.index) + " out of range");
    }
    first = *o.index;
    last = first + 1;
  }
  const WavEncoding enc = encoding_from(o.encoding);
  for (std::size_t i = first; i < last; ++i) {
    const Mixture mix = render_entry(m.entries[i], clean, noise);
    char stem[32];
    std::snprintf(stem, sizeof(stem), "%05zu", i);
    const fs::path dir(o.output_dir);
    write_wav(dir / (std::string(stem) + "_mixture.wav"), mix.mixture, enc);
    write_wav(dir / (std::string(stem) + "_clean.wav"), mix.clean, enc);
    write_wav(dir / (std::string(stem) + "_noise.wav"), mix.noise, enc);
  }
  out << "rendered " << (last - first) << " entries -> " << o.output_dir << "\n";
  return kExitOk;
}

int cmd_oracle_enhance(const Options& o, std::ostream& out) {
  const StftConfig config = framing(o.frame_ms, o.shift_ms);
  std::optional<Mixture> mix;
  if (!o.manifest.empty()) {
    if (!o.index) fail(ErrorKind::kConfigError, "--manifest needs --index");
    const Manifest m = load_manifest(o.manifest);
    if (*o.index >= m.entries.size()) fail(ErrorKind::kInvalidInput, "index out of range");
    mix.emplace(render_entry(m.entries[*o.index], bank_for(o.clean_dir, m.clean_dir, "clean"),
                             bank_for(o.noise_dir, m.noise_dir, "noise")));
  } else {
    if (o.mixture.empty() || o.clean.empty() || o.noise.empty()) {
      fail(ErrorKind::kConfigError, "give --mixture, --clean and --noise, or --manifest");
    }
    mix.emplace(Mixture{read_wav(o.mixture), read_wav(o.clean), read_wav(o.noise)});
  }
  const Waveform enhanced = oracle_enhance(mix->mixture, mix->clean, mix->noise, config);
  write_wav(o.output, enhanced, encoding_from(o.encoding));
  out << "oracle-enhanced (" << config.describe() << ") -> " << o.output << "\n";
  return kExitOk;
}

int cmd_train(const Options& o, std::ostream& out) {
  const Manifest m = load_manifest(o.manifest);
  const SourceBank clean = bank_for(o.clean_dir, m.clean_dir, "clean");
  const SourceBank noise = bank_for(o.noise_dir, m.noise_dir, "noise");
  validate_manifest(m, clean, noise);
  TrainConfig tc;
  tc.epochs = o.epochs;
  tc.learning_rate = o.lr;
  tc.batch_size = o.batch_size;
  tc.hidden = o.hidden;
  tc.seed = o.seed;
  tc.remix_each_epoch = !o.no_remix;
  FeatureOptions features;
  features.config = framing(o.frame_ms, o.shift_ms);
  features.kind = feature_kind_from_string(o.feature_kind);
  features.context_radius = o.context;
  const TrainResult result = train(m, clean, noise, tc, features);
  result.model.save(o.output);
  if (!o.log.empty()) write_text(o.log, result.log.to_csv());
  out << "trained " << o.feature_kind << " model: loss " << result.log.epochs.front().loss
      << " -> " << result.log.epochs.back().loss << "; saved " << o.output << "\n";
  return kExitOk;
}

int cmd_enhance(const Options& o, std::ostream& out) {
  const MaskEstimator model = MaskEstimator::load(o.model);
  write_wav(o.output, model.enhance(read_wav(o.input)), encoding_from(o.encoding));
  out << "enhanced " << o.input << " -> " << o.output << "\n";
  return kExitOk;
}

int cmd_evaluate(const Options& o, std::ostream& out) {
  const Waveform ref = read_wav(o.reference);
  const Waveform est = read_wav(o.estimate);
  json j = {{"si_snr_db", si_snr(ref, est)},
            {"seg_snr_db", segmental_snr(ref, est)},
            {"lsd_db", log_spectral_distance(ref, est)}};
  if (!o.mixture.empty()) {
    const double mix_si = si_snr(ref, read_wav(o.mixture));
    j["mixture_si_snr_db"] = mix_si;
    j["si_snr_improvement_db"] = j["si_snr_db"].get<double>() - mix_si;
  }
  const std::string text = j.dump(2) + "\n";
  if (!o.output.empty()) write_text(o.output, text);
  out << text;
  return kExitOk;
}

int cmd_experiment(const Options& o, const CLI::App& sc, std::ostream& out) {
  const fs::path dir(o.output_dir);
  fs::create_directories(dir);
  if (o.frame_shift) {
    FrameShiftConfig fc;
    if (!o.config.empty()) {
      const json j = json::parse(read_text(o.config));
      fc.instances = j.value("instances", fc.instances);
      fc.seconds = j.value("seconds", fc.seconds);
      fc.snr_db = j.value("snr_db", fc.snr_db);
      fc.perturbation = j.value("perturbation", fc.perturbation);
      fc.draws = j.value("draws", fc.draws);
      fc.frame_ms = j.value("frame_ms", fc.frame_ms);
      if (j.contains("shifts_ms")) fc.shifts_ms = j.at("shifts_ms").get<std::vector<double>>();
      fc.seed = j.value("seed", fc.seed);
    }
    if (sc.count("--seed") > 0) fc.seed = o.seed;
    const FrameShiftReport r = run_frame_shift_experiment(fc);
    write_text(dir / "frame_shift.csv", r.to_csv());
    out << "frame-shift experiment -> " << (dir / "frame_shift.csv").string() << "\n";
    return kExitOk;
  }
  if (o.config.empty()) fail(ErrorKind::kConfigError, "experiment needs --config");
  ExperimentConfig config = load_experiment_config(o.config);
  if (sc.count("--seed") > 0) {
    config.seed = o.seed;
    config.train.seed = o.seed;
  }
  if (sc.count("--workers") > 0) config.workers = o.workers;
  const ExperimentReport report = run_crosschannel_experiment(config);
  write_text(dir / "report.csv", report.to_csv());
  write_text(dir / "summary.json", report.summary_json(o.no_timestamp ? "" : utc_timestamp()));
  if (!report.gaps.empty()) write_text(dir / "gap_vs_snr.csv", gap_vs_snr_csv(report));
  for (const auto& g : report.gaps) {
    out << to_string(g.feature_kind) << " @" << g.frame_shift_ms << " ms, " << config.train_channel
        << " -> " << g.test_channel << ": mean masked-loss gap " << g.mean_masked_loss_gap
        << ", SI-SNR gap " << g.mean_si_snr_gap_db << " dB\n";
  }
  out << "report -> " << (dir / "report.csv").string() << "\n";
  return kExitOk;
}

int cmd_export_figure(const Options& o, std::ostream& out) {
  if (o.figure == "channel-spectrum") {
    std::vector<FirChannel> channels;
    if (!o.experiment_config.empty()) channels = load_experiment_config(o.experiment_config).channels;
    for (const auto& t : o.taps) {
      const FirChannel c = FirChannel::load_taps(t);
      channels.emplace_back(std::vector<double>(c.taps().begin(), c.taps().end()),
                            fs::path(t).stem().string());
    }
    if (!o.channel.empty()) {
      if (!channels.empty()) {
        fail(ErrorKind::kConfigError, "--channel cannot be combined with FIR channel inputs");
      }
      write_text(o.output, corpus_channel_spectrum_csv(load_channel(o.channel)));
    } else {
      if (channels.empty()) {
        fail(ErrorKind::kConfigError, "give --experiment-config, --taps or --channel");
      }
      write_text(o.output, channel_spectrum_csv(channels, o.fft_size));
    }
  } else if (o.figure == "gap-vs-snr") {
    if (o.report.empty()) fail(ErrorKind::kConfigError, "gap-vs-snr needs --report");
    write_text(o.output, gap_vs_snr_csv_from_report(read_text(o.report)));
  } else {
    if (o.input.empty()) fail(ErrorKind::kConfigError, "spectrogram needs --input");
    const ComplexSpectrogram spec = stft(read_wav(o.input), framing(o.frame_ms, o.shift_ms));
    RealMatrix db = magnitude(spec);
    db = db.unaryExpr([](double v) { return 20.0 * std::log10(std::max(v, kLogEpsilon)); });
    if (fs::path(o.output).has_parent_path()) fs::create_directories(fs::path(o.output).parent_path());
    write_matrix_csv(o.output, db, spec.config);
  }
  out << o.figure << " -> " << o.output << "\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"xcorpus: channel-aware speech enhancement toolkit", "xcorpus"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "xcorpus 0.1.0");
  Options o;

  auto* est = app.add_subcommand("estimate-channel", "estimate a corpus channel from WAV files");
  add_config(est, o);
  est->add_option("--input", o.inputs, "WAV files or directories")->required();
  est->add_option("--output", o.output, "output .csv or binary container")->required();
  est->add_option("--preset", o.preset, "framing preset")
      ->check(CLI::IsMember({"analysis", "resynthesis", "frame32"}))
      ->capture_default_str();
  add_framing(est, o);
  est->add_option("--epsilon", o.epsilon, "log floor")->capture_default_str();
  est->add_option("--workers", o.workers, "threads (0 = all cores)");

  auto* ren = app.add_subcommand("renormalize", "remove a corpus channel and resynthesize");
  add_config(ren, o);
  ren->add_option("--input", o.input, "input WAV")->required()->check(CLI::ExistingFile);
  ren->add_option("--channel", o.channel, "corpus channel of the input")->required();
  ren->add_option("--target", o.target, "corpus channel to impose instead of a flat one");
  ren->add_option("--output", o.output, "output WAV")->required();
  add_encoding(ren, o);

  auto* mix = app.add_subcommand("mix", "build or render a mixing manifest");
  mix->require_subcommand(1);
  auto* build = mix->add_subcommand("build", "write a seeded manifest");
  add_config(build, o);
  build->add_option("--clean-dir", o.clean_dir, "clean WAV directory")->required();
  build->add_option("--noise-dir", o.noise_dir, "noise WAV directory")->required();
  build->add_option("--output", o.output, "manifest path (.jsonl)")->required();
  build->add_option("--seed", o.seed, "RNG seed")->capture_default_str();
  build->add_option("--snr", o.snr, "SNR set in dB");
  build->add_option("--segment-s", o.segment_s, "segment length in seconds")->capture_default_str();
  build->add_option("--test-fraction", o.test_fraction, "fraction of clean sources held out");
  build->add_option("--corpus", o.corpus, "corpus label");
  auto* render = mix->add_subcommand("render", "render manifest entries to WAV");
  add_config(render, o);
  render->add_option("--manifest", o.manifest, "manifest path")->required();
  render->add_option("--output-dir", o.output_dir, "output directory")->required();
  render->add_option("--index", o.index, "render only this entry");
  render->add_option("--clean-dir", o.clean_dir, "override the manifest's clean directory");
  render->add_option("--noise-dir", o.noise_dir, "override the manifest's noise directory");
  add_encoding(render, o);

  auto* oracle = app.add_subcommand("oracle-enhance", "enhance with the ideal ratio mask");
  add_config(oracle, o);
  oracle->add_option("--mixture", o.mixture, "noisy WAV");
  oracle->add_option("--clean", o.clean, "clean WAV");
  oracle->add_option("--noise", o.noise, "noise WAV");
  oracle->add_option("--manifest", o.manifest, "manifest (with --index)");
  oracle->add_option("--index", o.index, "manifest entry");
  oracle->add_option("--clean-dir", o.clean_dir, "override the manifest's clean directory");
  oracle->add_option("--noise-dir", o.noise_dir, "override the manifest's noise directory");
  oracle->add_option("--output", o.output, "enhanced WAV")->required();
  add_framing(oracle, o);
  add_encoding(oracle, o);

  auto* tr = app.add_subcommand("train", "train the mask estimator on a manifest");
  add_config(tr, o);
  tr->add_option("--manifest", o.manifest, "manifest path")->required();
  tr->add_option("--output", o.output, "model checkpoint")->required();
  tr->add_option("--log", o.log, "training log CSV");
  tr->add_option("--clean-dir", o.clean_dir, "override the manifest's clean directory");
  tr->add_option("--noise-dir", o.noise_dir, "override the manifest's noise directory");
  tr->add_option("--feature-kind", o.feature_kind, "input features")
      ->check(CLI::IsMember({"magnitude_sms", "log_lsms", "log_rasta", "log_raw"}))
      ->capture_default_str();
  tr->add_option("--epochs", o.epochs)->capture_default_str();
  tr->add_option("--lr", o.lr, "base learning rate")->capture_default_str();
  tr->add_option("--batch-size", o.batch_size)->capture_default_str();
  tr->add_option("--hidden", o.hidden)->capture_default_str();
  tr->add_option("--context", o.context, "splice radius in frames")->capture_default_str();
  tr->add_option("--seed", o.seed, "init/shuffle/remix seed")->capture_default_str();
  tr->add_flag("--no-remix", o.no_remix, "keep the manifest's mixtures every epoch");
  add_framing(tr, o);

  auto* enh = app.add_subcommand("enhance", "apply a trained model to a WAV");
  add_config(enh, o);
  enh->add_option("--model", o.model, "model checkpoint")->required()->check(CLI::ExistingFile);
  enh->add_option("--input", o.input, "noisy WAV")->required()->check(CLI::ExistingFile);
  enh->add_option("--output", o.output, "enhanced WAV")->required();
  add_encoding(enh, o);

  auto* ev = app.add_subcommand("evaluate", "SI-SNR, segmental SNR and LSD of an estimate");
  add_config(ev, o);
  ev->add_option("--reference", o.reference, "clean reference WAV")->required();
  ev->add_option("--estimate", o.estimate, "estimate WAV")->required();
  ev->add_option("--mixture", o.mixture, "unprocessed mixture, to report improvement");
  ev->add_option("--output", o.output, "also write the JSON here");

  auto* ex = app.add_subcommand("experiment", "run the cross-channel or frame-shift experiment");
  ex->add_option("--config", o.config, "experiment JSON")->check(CLI::ExistingFile);
  ex->add_option("--output-dir", o.output_dir, "report directory")->required();
  ex->add_option("--seed", o.seed, "override the config seed");
  ex->add_option("--workers", o.workers, "threads (0 = all cores)");
  ex->add_flag("--frame-shift", o.frame_shift, "run the frame-shift experiment instead");
  ex->add_flag("--no-timestamp", o.no_timestamp, "omit the timestamp from summary.json");

  auto* fig = app.add_subcommand("export-figure", "write figure series as CSV");
  add_config(fig, o);
  fig->add_option("kind", o.figure, "channel-spectrum | gap-vs-snr | spectrogram")
      ->required()
      ->check(CLI::IsMember({"channel-spectrum", "gap-vs-snr", "spectrogram"}));
  fig->add_option("--output", o.output, "output CSV")->required();
  fig->add_option("--experiment-config", o.experiment_config, "channels from an experiment JSON");
  fig->add_option("--taps", o.taps, "FIR tap files");
  fig->add_option("--channel", o.channel, "corpus channel file");
  fig->add_option("--fft-size", o.fft_size)->capture_default_str();
  fig->add_option("--report", o.report, "experiment report.csv");
  fig->add_option("--input", o.input, "WAV for the spectrogram");
  add_framing(fig, o);

  try {
    std::vector<std::string> args(raw_args.begin() + (raw_args.empty() ? 0 : 1), raw_args.end());
    args = expand_config(std::move(args));
    std::reverse(args.begin(), args.end());
    try {
      app.parse(args);
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e, out, err);
      return code == 0 ? kExitOk : kExitUsage;
    }

    if (est->parsed()) return cmd_estimate_channel(o, out);
    if (ren->parsed()) return cmd_renormalize(o, out);
    if (build->parsed()) return cmd_mix_build(o, out);
    if (render->parsed()) return cmd_mix_render(o, out);
    if (oracle->parsed()) return cmd_oracle_enhance(o, out);
    if (tr->parsed()) return cmd_train(o, out);
    if (enh->parsed()) return cmd_enhance(o, out);
    if (ev->parsed()) return cmd_evaluate(o, out);
    if (ex->parsed()) return cmd_experiment(o, *ex, out);
    if (fig->parsed()) return cmd_export_figure(o, out);
    err << app.help();
    return kExitUsage;
  } catch (const Error& e) {
    err << "xcorpus: " << to_string(e.kind()) << ": " << e.what() << "\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "xcorpus: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace xcorpus::cli
