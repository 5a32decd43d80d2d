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

#include "xcorpus/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "xcorpus/error.hpp"
#include "xcorpus/mask.hpp"
#include "xcorpus/metrics.hpp"
#include "xcorpus/mixer.hpp"
#include "xcorpus/parallel.hpp"
#include "xcorpus/rng.hpp"

namespace xcorpus {

using json = nlohmann::json;

namespace {

constexpr std::uint64_t kMaterialStream = 0x4d41544552ULL;  // "MATER"
constexpr std::uint64_t kTestStream = 0x5445535400ULL;       // "TEST"
constexpr std::uint64_t kShiftStream = 0x5348494654ULL;      // "SHIFT"

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

void require_keys(const json& obj, std::initializer_list<const char*> allowed,
                  const std::string& where) {
  if (!obj.is_object()) fail(ErrorKind::kConfigError, where + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (std::find_if(allowed.begin(), allowed.end(),
                     [&key](const char* a) { return key == a; }) == allowed.end()) {
      fail(ErrorKind::kConfigError, "unknown key '" + key + "' in " + where);
    }
  }
}

FirChannel parse_channel(const json& j, const std::filesystem::path& base_dir) {
  require_keys(j,
               {"name", "taps", "taps_file", "type", "corner_hz", "gain_db", "center_hz",
                "bandwidth_hz", "length", "stages"},
               "channel");
  const std::string name = j.value("name", "");
  if (name.empty()) fail(ErrorKind::kConfigError, "channel needs a name");
  if (j.contains("taps")) {
    return FirChannel(j.at("taps").get<std::vector<double>>(), name);
  }
  if (j.contains("taps_file")) {
    std::filesystem::path p = j.at("taps_file").get<std::string>();
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    const FirChannel loaded = FirChannel::load_taps(p);
    return FirChannel(std::vector<double>(loaded.taps().begin(), loaded.taps().end()), name);
  }
  const std::string type = j.value("type", "");
  const std::size_t length = j.value("length", std::size_t{129});
  FirChannel made = [&]() -> FirChannel {
    if (type == "identity") return FirChannel::identity();
    if (type == "low_shelf") {
      return FirChannel::low_shelf(j.at("corner_hz").get<double>(), j.at("gain_db").get<double>(),
                                   length);
    }
    if (type == "high_shelf") {
      return FirChannel::high_shelf(j.at("corner_hz").get<double>(),
                                    j.at("gain_db").get<double>(), length);
    }
    if (type == "resonant_peak") {
      return FirChannel::resonant_peak(j.at("center_hz").get<double>(),
                                       j.at("gain_db").get<double>(),
                                       j.at("bandwidth_hz").get<double>(), length);
    }
    if (type == "cascade") {
      const json& stages = j.at("stages");
      if (!stages.is_array() || stages.empty()) {
        fail(ErrorKind::kConfigError, "cascade needs a non-empty 'stages' array");
      }
      FirChannel acc = FirChannel::identity();
      for (const auto& s : stages) {
        json stage = s;
        if (!stage.contains("name")) stage["name"] = name;
        acc = FirChannel::cascade(acc, parse_channel(stage, base_dir));
      }
      return acc;
    }
    fail(ErrorKind::kConfigError, "channel '" + name + "' has unknown type '" + type + "'");
  }();
  return FirChannel(std::vector<double>(made.taps().begin(), made.taps().end()), name);
}

json channel_to_json(const FirChannel& c) {
  return {{"name", c.name()}, {"taps", std::vector<double>(c.taps().begin(), c.taps().end())}};
}

json config_to_json(const ExperimentConfig& c) {
  json channels = json::array();
  for (const auto& ch : c.channels) channels.push_back(channel_to_json(ch));
  json kinds = json::array();
  for (auto k : c.feature_kinds) kinds.push_back(std::string(to_string(k)));
  json noises = json::array();
  for (auto k : c.material.noises) noises.push_back(std::string(to_string(k)));
  return {
      {"format", "xcorpus-experiment"},
      {"version", kExperimentConfigVersion},
      {"seed", c.seed},
      {"channels", channels},
      {"train_channel", c.train_channel},
      {"test_channels", c.test_channels},
      {"train_snr_db", c.train_snr_db},
      {"test_snr_db", c.test_snr_db},
      {"feature_kinds", kinds},
      {"frame_shifts_ms", c.frame_shifts_ms},
      {"frame_ms", c.frame_ms},
      {"context_radius", c.context_radius},
      {"train",
       {{"epochs", c.train.epochs},
        {"learning_rate", c.train.learning_rate},
        {"batch_size", c.train.batch_size},
        {"hidden", c.train.hidden},
        {"remix_each_epoch", c.train.remix_each_epoch}}},
      {"material",
       {{"utterances", c.material.utterances},
        {"utterance_s", c.material.utterance_s},
        {"test_fraction", c.material.test_fraction},
        {"noises", noises},
        {"noise_s", c.material.noise_s},
        {"clean_dir", c.material.clean_dir},
        {"noise_dir", c.material.noise_dir}}},
  };
}

StftConfig shift_config(double frame_ms, double shift_ms) {
  return StftConfig::make(ms_to_samples(frame_ms), ms_to_samples(shift_ms));
}

}  // namespace

const FirChannel& ExperimentConfig::channel(const std::string& name) const {
  for (const auto& c : channels) {
    if (c.name() == name) return c;
  }
  fail(ErrorKind::kConfigError, "no channel named '" + name + "'");
}

void ExperimentConfig::validate() const {
  if (channels.size() < 2) fail(ErrorKind::kConfigError, "experiment needs at least 2 channels");
  std::set<std::string> names;
  for (const auto& c : channels) {
    if (!names.insert(c.name()).second) {
      fail(ErrorKind::kConfigError, "duplicate channel name '" + c.name() + "'");
    }
  }
  channel(train_channel);
  if (test_channels.empty()) fail(ErrorKind::kConfigError, "no test channels");
  for (const auto& t : test_channels) channel(t);
  if (std::find(test_channels.begin(), test_channels.end(), train_channel) ==
      test_channels.end()) {
    fail(ErrorKind::kConfigError, "test_channels must include the train channel");
  }
  auto check_snrs = [](const std::vector<double>& v, const char* what) {
    if (v.empty()) fail(ErrorKind::kConfigError, std::string(what) + " is empty");
    for (double s : v) {
      if (!std::isfinite(s)) fail(ErrorKind::kConfigError, std::string(what) + " not finite");
    }
  };
  check_snrs(train_snr_db, "train_snr_db");
  check_snrs(test_snr_db, "test_snr_db");
  if (feature_kinds.empty()) fail(ErrorKind::kConfigError, "feature_kinds is empty");
  if (frame_shifts_ms.empty()) fail(ErrorKind::kConfigError, "frame_shifts_ms is empty");
  for (double s : frame_shifts_ms) shift_config(frame_ms, s).validate();
  train.validate();
  if (!(material.test_fraction > 0.0 && material.test_fraction < 1.0)) {
    fail(ErrorKind::kConfigError, "material.test_fraction must be in (0, 1)");
  }
  if (material.clean_dir.empty() && material.utterances < 2) {
    fail(ErrorKind::kConfigError, "material.utterances must be >= 2");
  }
  if (material.noise_dir.empty() && material.noises.empty()) {
    fail(ErrorKind::kConfigError, "material.noises is empty");
  }
}

ExperimentConfig parse_experiment_config(const std::string& json_text,
                                         const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    fail(ErrorKind::kParseError, std::string("experiment config: ") + e.what());
  }
  require_keys(j,
               {"format", "version", "seed", "channels", "train_channel", "test_channels",
                "train_snr_db", "test_snr_db", "feature_kinds", "frame_shifts_ms", "frame_ms",
                "context_radius", "train", "material", "workers"},
               "experiment config");
  if (j.value("format", "xcorpus-experiment") != "xcorpus-experiment") {
    fail(ErrorKind::kConfigError, "not an xcorpus-experiment config");
  }
  if (!j.contains("version") || j.at("version") != kExperimentConfigVersion) {
    fail(ErrorKind::kConfigError, "experiment config version must be " +
                                      std::to_string(kExperimentConfigVersion));
  }
  ExperimentConfig c;
  try {
    c.seed = j.value("seed", std::uint64_t{0});
    if (!j.contains("channels") || !j.at("channels").is_array()) {
      fail(ErrorKind::kConfigError, "'channels' must be an array");
    }
    for (const auto& ch : j.at("channels")) c.channels.push_back(parse_channel(ch, base_dir));
    if (c.channels.empty()) fail(ErrorKind::kConfigError, "no channels");
    c.train_channel = j.value("train_channel", c.channels.front().name());
    if (j.contains("test_channels")) {
      c.test_channels = j.at("test_channels").get<std::vector<std::string>>();
    } else {
      for (const auto& ch : c.channels) c.test_channels.push_back(ch.name());
    }
    if (j.contains("train_snr_db")) c.train_snr_db = j.at("train_snr_db").get<std::vector<double>>();
    if (j.contains("test_snr_db")) c.test_snr_db = j.at("test_snr_db").get<std::vector<double>>();
    if (j.contains("feature_kinds")) {
      c.feature_kinds.clear();
      for (const auto& k : j.at("feature_kinds")) {
        c.feature_kinds.push_back(feature_kind_from_string(k.get<std::string>()));
      }
    }
    if (j.contains("frame_shifts_ms")) {
      c.frame_shifts_ms = j.at("frame_shifts_ms").get<std::vector<double>>();
    }
    c.frame_ms = j.value("frame_ms", c.frame_ms);
    c.context_radius = j.value("context_radius", c.context_radius);
    c.workers = j.value("workers", 0u);
    if (j.contains("train")) {
      const json& t = j.at("train");
      require_keys(t, {"epochs", "learning_rate", "batch_size", "hidden", "remix_each_epoch"},
                   "train");
      c.train.epochs = t.value("epochs", c.train.epochs);
      c.train.learning_rate = t.value("learning_rate", c.train.learning_rate);
      c.train.batch_size = t.value("batch_size", c.train.batch_size);
      c.train.hidden = t.value("hidden", c.train.hidden);
      c.train.remix_each_epoch = t.value("remix_each_epoch", c.train.remix_each_epoch);
    }
    if (j.contains("material")) {
      const json& m = j.at("material");
      require_keys(m,
                   {"utterances", "utterance_s", "test_fraction", "noises", "noise_s",
                    "clean_dir", "noise_dir"},
                   "material");
      c.material.utterances = m.value("utterances", c.material.utterances);
      c.material.utterance_s = m.value("utterance_s", c.material.utterance_s);
      c.material.test_fraction = m.value("test_fraction", c.material.test_fraction);
      if (m.contains("noises")) {
        c.material.noises.clear();
        for (const auto& k : m.at("noises")) {
          c.material.noises.push_back(noise_kind_from_string(k.get<std::string>()));
        }
      }
      c.material.noise_s = m.value("noise_s", c.material.noise_s);
      auto resolve = [&base_dir](std::string p) {
        if (!p.empty() && std::filesystem::path(p).is_relative() && !base_dir.empty()) {
          p = (base_dir / p).string();
        }
        return p;
      };
      c.material.clean_dir = resolve(m.value("clean_dir", std::string()));
      c.material.noise_dir = resolve(m.value("noise_dir", std::string()));
    }
  } catch (const json::exception& e) {
    fail(ErrorKind::kConfigError, std::string("experiment config: ") + e.what());
  }
  c.train.seed = c.seed;
  c.validate();
  return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIoError, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_experiment_config(ss.str(), path.parent_path());
}

namespace {

struct Material {
  SourceBank clean;
  SourceBank noise;
};

Material load_material(const ExperimentConfig& c) {
  const std::uint64_t seed = Rng::derive(c.seed, kMaterialStream).next_u64();
  Material m;
  if (!c.material.clean_dir.empty()) {
    for (auto& [id, w] : load_source_dir(c.material.clean_dir)) {
      m.clean.emplace(id, peak_normalize(trim_silence(w)).waveform);
    }
  } else {
    m.clean = synth_clean_bank(c.material.utterances, c.material.utterance_s, seed);
  }
  if (!c.material.noise_dir.empty()) {
    m.noise = load_source_dir(c.material.noise_dir);
  } else {
    m.noise = synth_noise_bank(c.material.noises, c.material.noise_s, seed);
  }
  return m;
}

SourceBank filter_bank(const SourceBank& bank, const FirChannel& channel) {
  SourceBank out;
  for (const auto& [id, w] : bank) out.emplace(id, apply_fir_channel(w, channel));
  return out;
}

/// Every test utterance against every noise, with a seeded noise offset.
std::vector<MixtureSpec> test_specs(const Manifest& manifest, const SourceBank& clean,
                                    const SourceBank& noise, std::uint64_t seed) {
  std::vector<MixtureSpec> out;
  std::uint64_t index = 0;
  for (const auto& entry : manifest.entries) {
    if (entry.split != "test") continue;
    const std::size_t clean_len = clean.at(entry.clean_id).size();
    for (const auto& [noise_id, n] : noise) {
      MixtureSpec s;
      s.clean_id = entry.clean_id;
      s.noise_id = noise_id;
      s.segment_len = std::min(clean_len, n.size());
      s.clean_offset = 0;
      s.seed = Rng::derive(seed, kTestStream + index++).next_u64();
      s.noise_offset = Rng(s.seed).uniform_index(n.size() - s.segment_len + 1);
      s.split = "test";
      out.push_back(s);
    }
  }
  if (out.empty()) fail(ErrorKind::kEmptyCorpus, "no test utterances after the split");
  return out;
}

std::vector<GapRecord> compute_gaps(const std::vector<ConditionRecord>& records) {
  using Key = std::tuple<int, double, std::string, std::string>;
  std::map<Key, std::map<double, const ConditionRecord*>> grouped;
  for (const auto& r : records) {
    grouped[{static_cast<int>(r.feature_kind), r.frame_shift_ms, r.train_channel,
             r.test_channel}][r.snr_db] = &r;
  }
  std::vector<GapRecord> gaps;
  for (const auto& [key, by_snr] : grouped) {
    const auto& [kind, shift, train_ch, test_ch] = key;
    if (test_ch == train_ch) continue;
    auto matched = grouped.find({kind, shift, train_ch, train_ch});
    if (matched == grouped.end()) continue;
    GapRecord g{static_cast<FeatureKind>(kind), shift, test_ch, {}, {}, {}, 0.0, 0.0};
    for (const auto& [snr, rec] : by_snr) {
      auto m = matched->second.find(snr);
      if (m == matched->second.end()) continue;
      g.snr_db.push_back(snr);
      g.masked_loss_gap.push_back(rec->metrics.masked_loss - m->second->metrics.masked_loss);
      g.si_snr_gap_db.push_back(m->second->metrics.si_snr_db - rec->metrics.si_snr_db);
    }
    if (g.snr_db.empty()) continue;
    for (std::size_t i = 0; i < g.snr_db.size(); ++i) {
      g.mean_masked_loss_gap += g.masked_loss_gap[i];
      g.mean_si_snr_gap_db += g.si_snr_gap_db[i];
    }
    g.mean_masked_loss_gap /= static_cast<double>(g.snr_db.size());
    g.mean_si_snr_gap_db /= static_cast<double>(g.snr_db.size());
    gaps.push_back(std::move(g));
  }
  return gaps;
}

struct JobResult {
  std::vector<ConditionRecord> records;
  TrainingSummary training;
};

}  // namespace

ExperimentReport run_crosschannel_experiment(const ExperimentConfig& config) {
  config.validate();
  const Material material = load_material(config);

  ManifestOptions mopts;
  mopts.snr_set = config.train_snr_db;
  mopts.seed = config.seed;
  mopts.corpus = "experiment";
  mopts.test_fraction = config.material.test_fraction;
  std::size_t longest = 0;
  for (const auto& [id, w] : material.clean) longest = std::max(longest, w.size());
  mopts.segment_s = static_cast<double>(longest) / kSampleRate;
  const Manifest manifest = build_manifest(material.clean, material.noise, mopts);
  if (manifest.subset("train").entries.empty()) {
    fail(ErrorKind::kEmptyCorpus, "no training utterances after the split");
  }
  const std::vector<MixtureSpec> tests =
      test_specs(manifest, material.clean, material.noise, config.seed);

  std::map<std::string, SourceBank> filtered;
  filtered.emplace(config.train_channel,
                   filter_bank(material.clean, config.channel(config.train_channel)));
  for (const auto& t : config.test_channels) {
    if (!filtered.count(t)) filtered.emplace(t, filter_bank(material.clean, config.channel(t)));
  }

  struct Job {
    FeatureKind kind;
    double shift_ms;
  };
  std::vector<Job> jobs;
  for (auto kind : config.feature_kinds) {
    for (double shift : config.frame_shifts_ms) jobs.push_back({kind, shift});
  }

  std::vector<JobResult> results(jobs.size());
  parallel_for(
      jobs.size(),
      [&](std::size_t ji) {
        const Job& job = jobs[ji];
        FeatureOptions features;
        features.config = shift_config(config.frame_ms, job.shift_ms);
        features.kind = job.kind;
        features.context_radius = config.context_radius;
        TrainResult trained = train(manifest, filtered.at(config.train_channel), material.noise,
                                    config.train, features);
        const MaskEstimator& model = trained.model;

        JobResult& out = results[ji];
        std::vector<TrainingExample> matched_examples;
        for (const auto& test_ch : config.test_channels) {
          const SourceBank& clean = filtered.at(test_ch);
          for (double snr : config.test_snr_db) {
            ConditionRecord rec{job.kind, job.shift_ms, config.train_channel, test_ch, snr, {}};
            MetricSet& m = rec.metrics;
            for (MixtureSpec spec : tests) {
              spec.snr_db = snr;
              const Mixture mix = render_entry(spec, clean, material.noise);
              PreparedUtterance p = prepare_utterance(mix, features);
              TrainingExample ex{model.stats().apply(p.features), std::move(p.irm),
                                 std::move(p.support)};
              const ComplexSpectrogram y = stft(mix.mixture, features.config);
              const Mask rm = model.forward(ex.features);
              const Waveform enhanced = istft(apply_mask(y, rm));
              m.masked_loss += masked_mse_loss(ex.irm, rm, ex.support);
              m.si_snr_db += si_snr(mix.clean, enhanced);
              m.seg_snr_db += segmental_snr(mix.clean, enhanced);
              m.lsd_db += log_spectral_distance(mix.clean, enhanced);
              m.mixture_si_snr_db += si_snr(mix.clean, mix.mixture);
              ++m.count;
              if (test_ch == config.train_channel) matched_examples.push_back(std::move(ex));
            }
            const double n = static_cast<double>(m.count);
            m.masked_loss /= n;
            m.si_snr_db /= n;
            m.seg_snr_db /= n;
            m.lsd_db /= n;
            m.mixture_si_snr_db /= n;
            out.records.push_back(std::move(rec));
          }
        }
        out.training = {job.kind, job.shift_ms, std::move(trained.log),
                        constant_mask_loss(matched_examples, 0.5)};
      },
      config.workers);

  ExperimentReport report;
  report.seed = config.seed;
  report.config_json = config_to_json(config).dump();
  for (auto& r : results) {
    for (auto& rec : r.records) report.records.push_back(std::move(rec));
    report.training.push_back(std::move(r.training));
  }
  report.gaps = compute_gaps(report.records);
  return report;
}

std::string ExperimentReport::to_csv() const {
  std::ostringstream os;
  os << "feature_kind,frame_shift_ms,train_channel,test_channel,snr_db,count,si_snr_db,"
        "seg_snr_db,lsd_db,masked_loss,mixture_si_snr_db\n";
  for (const auto& r : records) {
    const MetricSet& m = r.metrics;
    os << to_string(r.feature_kind) << ',' << format_number(r.frame_shift_ms) << ','
       << r.train_channel << ',' << r.test_channel << ',' << format_number(r.snr_db) << ','
       << m.count << ',' << format_number(m.si_snr_db) << ',' << format_number(m.seg_snr_db)
       << ',' << format_number(m.lsd_db) << ',' << format_number(m.masked_loss) << ','
       << format_number(m.mixture_si_snr_db) << '\n';
  }
  return os.str();
}

std::string ExperimentReport::summary_json(const std::string& timestamp) const {
  json gaps_json = json::array();
  for (const auto& g : gaps) {
    gaps_json.push_back({{"feature_kind", to_string(g.feature_kind)},
                         {"frame_shift_ms", g.frame_shift_ms},
                         {"test_channel", g.test_channel},
                         {"snr_db", g.snr_db},
                         {"masked_loss_gap", g.masked_loss_gap},
                         {"si_snr_gap_db", g.si_snr_gap_db},
                         {"mean_masked_loss_gap", g.mean_masked_loss_gap},
                         {"mean_si_snr_gap_db", g.mean_si_snr_gap_db}});
  }
  json training_json = json::array();
  for (const auto& t : training) {
    json log = json::array();
    for (const auto& e : t.log.epochs) {
      log.push_back({{"epoch", e.epoch}, {"lr", e.learning_rate}, {"loss", e.loss}});
    }
    training_json.push_back({{"feature_kind", to_string(t.feature_kind)},
                             {"frame_shift_ms", t.frame_shift_ms},
                             {"initial_loss", t.log.epochs.front().loss},
                             {"final_loss", t.log.epochs.back().loss},
                             {"matched_baseline_loss", t.baseline_loss},
                             {"log", log}});
  }
  json out = {{"format", "xcorpus-report"},
              {"version", kReportVersion},
              {"seed", seed},
              {"rng", std::string(Rng::kAlgorithm)},
              {"gaps", gaps_json},
              {"training", training_json},
              {"config", config_json.empty() ? json() : json::parse(config_json)}};
  if (!timestamp.empty()) out["timestamp"] = timestamp;
  return out.dump(2) + "\n";
}

const GapRecord& ExperimentReport::gap(FeatureKind kind, double shift_ms,
                                       const std::string& test_channel) const {
  for (const auto& g : gaps) {
    if (g.feature_kind == kind && g.frame_shift_ms == shift_ms && g.test_channel == test_channel) {
      return g;
    }
  }
  fail(ErrorKind::kInvalidInput, "report has no gap for " + std::string(to_string(kind)) + " @" +
                                     format_number(shift_ms) + " ms on " + test_channel);
}

FrameShiftReport run_frame_shift_experiment(const FrameShiftConfig& config) {
  if (config.instances == 0) fail(ErrorKind::kConfigError, "instances must be > 0");
  if (!(config.perturbation >= 0.0)) fail(ErrorKind::kConfigError, "perturbation must be >= 0");
  if (config.shifts_ms.empty()) fail(ErrorKind::kConfigError, "no frame shifts");
  if (config.draws == 0) fail(ErrorKind::kConfigError, "draws must be > 0");
  const NoiseKind kinds[] = {NoiseKind::kWhite, NoiseKind::kPink, NoiseKind::kBabble};

  FrameShiftReport report;
  for (double s : config.shifts_ms) {
    shift_config(config.frame_ms, s).validate();
    report.rows.push_back({s, {}, {}, {}});
  }
  for (std::size_t i = 0; i < config.instances; ++i) {
    Rng rng = Rng::derive(config.seed, kShiftStream + i);
    const Waveform clean = synth_utterance(rng.next_u64(), config.seconds);
    const Waveform noise = synth_noise(kinds[i % 3], rng.next_u64(), config.seconds);
    MixtureSpec spec;
    spec.segment_len = std::min(clean.size(), noise.size());
    spec.snr_db = config.snr_db;
    const Mixture mix = mix_at_snr(spec, clean, noise);

    for (std::size_t si = 0; si < config.shifts_ms.size(); ++si) {
      const StftConfig cfg = shift_config(config.frame_ms, config.shifts_ms[si]);
      const ComplexSpectrogram y = stft(mix.mixture, cfg);
      const Mask irm = ideal_ratio_mask(stft(mix.clean, cfg), stft(mix.noise, cfg));
      const Waveform oracle = istft(apply_mask(y, irm));
      const Waveform identity = istft(y);

      auto error_power = [](const Waveform& est, const Waveform& ref) {
        long double num = 0.0L, den = 0.0L;
        for (std::size_t n = 0; n < ref.size(); ++n) {
          const long double d = static_cast<long double>(est[n]) - ref[n];
          num += d * d;
          den += static_cast<long double>(ref[n]) * ref[n];
        }
        return static_cast<double>(num / den);
      };
      double vs_oracle = 0.0, vs_clean = 0.0;
      Rng mask_rng = Rng::derive(rng.next_u64(), si);
      for (std::size_t d = 0; d < config.draws; ++d) {
        RealMatrix noisy = irm.values();
        for (Eigen::Index k = 0; k < noisy.size(); ++k) {
          double& v = noisy.data()[k];
          const double reach = std::min({config.perturbation, v, 1.0 - v});
          v = std::clamp(v + reach * mask_rng.uniform(-1.0, 1.0), 0.0, 1.0);
        }
        const Waveform perturbed = istft(apply_mask(y, Mask(std::move(noisy))));
        vs_oracle += error_power(perturbed, oracle);
        vs_clean += error_power(perturbed, mix.clean);
      }
      const double draws = static_cast<double>(config.draws);
      double max_err = 0.0;
      for (std::size_t n = 0; n < identity.size(); ++n) {
        max_err = std::max(max_err, std::abs(identity[n] - mix.mixture[n]));
      }
      FrameShiftRow& row = report.rows[si];
      row.error_vs_oracle_db.push_back(10.0 * std::log10(vs_oracle / draws));
      row.error_vs_clean_db.push_back(10.0 * std::log10(vs_clean / draws));
      row.identity_max_error.push_back(max_err);
    }
  }
  return report;
}

std::string FrameShiftReport::to_csv() const {
  std::ostringstream os;
  os << "frame_shift_ms,instance,error_vs_oracle_db,error_vs_clean_db,identity_max_error\n";
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.error_vs_oracle_db.size(); ++i) {
      os << format_number(r.shift_ms) << ',' << i << ',' << format_number(r.error_vs_oracle_db[i])
         << ',' << format_number(r.error_vs_clean_db[i]) << ','
         << format_number(r.identity_max_error[i]) << '\n';
    }
  }
  return os.str();
}

std::string channel_spectrum_csv(const std::vector<FirChannel>& channels, std::size_t fft_size) {
  if (channels.empty()) fail(ErrorKind::kInvalidInput, "no channels to export");
  if (fft_size < 2) fail(ErrorKind::kConfigError, "fft_size must be >= 2");
  std::vector<std::vector<double>> responses;
  for (const auto& c : channels) responses.push_back(c.log_magnitude_response(fft_size));
  std::ostringstream os;
  os << "frequency_hz";
  for (const auto& c : channels) os << ',' << c.name() << "_db";
  os << '\n';
  const double to_db = 20.0 / std::log(10.0);
  for (std::size_t k = 0; k <= fft_size / 2; ++k) {
    os << format_number(static_cast<double>(k) * kSampleRate / static_cast<double>(fft_size));
    for (const auto& r : responses) os << ',' << format_number(to_db * r[k]);
    os << '\n';
  }
  return os.str();
}

std::string corpus_channel_spectrum_csv(const CorpusChannel& channel) {
  std::ostringstream os;
  os << "frequency_hz,gain_db\n";
  const double to_db = 20.0 / std::log(10.0);
  for (std::size_t k = 0; k < channel.bins(); ++k) {
    os << format_number(channel.config.bin_frequency_hz(k)) << ','
       << format_number(to_db * channel.log_gain(static_cast<Eigen::Index>(k))) << '\n';
  }
  return os.str();
}

std::string gap_vs_snr_csv(const ExperimentReport& report) {
  if (report.gaps.empty()) fail(ErrorKind::kInvalidInput, "report has no mismatched channels");
  std::set<double> snrs;
  for (const auto& g : report.gaps) snrs.insert(g.snr_db.begin(), g.snr_db.end());
  std::ostringstream os;
  os << "snr_db";
  for (const auto& g : report.gaps) {
    os << ',' << to_string(g.feature_kind) << '@' << format_number(g.frame_shift_ms) << "ms:"
       << g.test_channel;
  }
  os << '\n';
  for (double s : snrs) {
    os << format_number(s);
    for (const auto& g : report.gaps) {
      os << ',';
      auto it = std::find(g.snr_db.begin(), g.snr_db.end(), s);
      if (it != g.snr_db.end()) {
        os << format_number(g.masked_loss_gap[static_cast<std::size_t>(it - g.snr_db.begin())]);
      }
    }
    os << '\n';
  }
  return os.str();
}

std::string gap_vs_snr_csv_from_report(const std::string& report_csv) {
  std::istringstream in(report_csv);
  std::string line;
  if (!std::getline(in, line) || line.rfind("feature_kind,", 0) != 0) {
    fail(ErrorKind::kParseError, "not an experiment report CSV");
  }
  ExperimentReport report;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) f.push_back(cell);
    if (f.size() != 11) fail(ErrorKind::kParseError, "report row has " + std::to_string(f.size()) +
                                                         " fields, expected 11");
    try {
      ConditionRecord r{feature_kind_from_string(f[0]), std::stod(f[1]), f[2], f[3],
                        std::stod(f[4]), {}};
      r.metrics.count = std::stoull(f[5]);
      r.metrics.si_snr_db = std::stod(f[6]);
      r.metrics.seg_snr_db = std::stod(f[7]);
      r.metrics.lsd_db = std::stod(f[8]);
      r.metrics.masked_loss = std::stod(f[9]);
      r.metrics.mixture_si_snr_db = std::stod(f[10]);
      report.records.push_back(std::move(r));
    } catch (const std::logic_error&) {
      fail(ErrorKind::kParseError, "malformed number in report row: " + line);
    }
  }
  report.gaps = compute_gaps(report.records);
  return gap_vs_snr_csv(report);
}

}  // namespace xcorpus
