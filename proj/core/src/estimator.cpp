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

#include "xcorpus/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "xcorpus/channel.hpp"
#include "xcorpus/container.hpp"
#include "xcorpus/error.hpp"
#include "xcorpus/rng.hpp"

namespace xcorpus {

std::string_view to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::kMagnitudeSms: return "magnitude_sms";
    case FeatureKind::kLogLsms: return "log_lsms";
    case FeatureKind::kLogRasta: return "log_rasta";
    case FeatureKind::kLogRaw: return "log_raw";
  }
  return "unknown";
}

FeatureKind feature_kind_from_string(std::string_view name) {
  for (auto k : {FeatureKind::kMagnitudeSms, FeatureKind::kLogLsms, FeatureKind::kLogRasta,
                 FeatureKind::kLogRaw}) {
    if (to_string(k) == name) return k;
  }
  fail(ErrorKind::kConfigError, "unknown feature kind '" + std::string(name) + "'");
}

RealMatrix frame_features(const ComplexSpectrogram& spec, FeatureKind kind, double epsilon) {
  switch (kind) {
    case FeatureKind::kMagnitudeSms: return sms(magnitude(spec));
    case FeatureKind::kLogLsms: return lsms(log_magnitude(spec, epsilon)).values;
    case FeatureKind::kLogRasta: return rasta(log_magnitude(spec, epsilon)).values;
    case FeatureKind::kLogRaw: return log_magnitude(spec, epsilon).values;
  }
  fail(ErrorKind::kConfigError, "unknown feature kind");
}

RealMatrix splice_frames(const RealMatrix& frames, std::size_t radius) {
  const Eigen::Index t_count = frames.rows();
  const Eigen::Index f_count = frames.cols();
  const auto width = static_cast<Eigen::Index>(2 * radius + 1);
  const auto r = static_cast<Eigen::Index>(radius);
  RealMatrix out(t_count, width * f_count);
  for (Eigen::Index t = 0; t < t_count; ++t) {
    for (Eigen::Index k = 0; k < width; ++k) {
      const Eigen::Index src = std::clamp<Eigen::Index>(t + k - r, 0, t_count - 1);
      out.block(t, k * f_count, 1, f_count) = frames.row(src);
    }
  }
  return out;
}

RealMatrix extract_features(const Waveform& mixture, const FeatureOptions& options) {
  return splice_frames(frame_features(stft(mixture, options.config), options.kind,
                                      options.epsilon),
                       options.context_radius);
}

FeatureStats FeatureStats::fit(std::span<const RealMatrix> training_features) {
  if (training_features.empty()) fail(ErrorKind::kEmptyCorpus, "no training features");
  const Eigen::Index dim = training_features.front().cols();
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(dim);
  double rows = 0.0;
  for (const auto& m : training_features) {
    if (m.cols() != dim) fail(ErrorKind::kShapeError, "feature widths differ");
    sum += m.colwise().sum().transpose();
    rows += static_cast<double>(m.rows());
  }
  FeatureStats stats;
  stats.mean = sum / rows;
  Eigen::VectorXd sq = Eigen::VectorXd::Zero(dim);
  for (const auto& m : training_features) {
    sq += (m.rowwise() - stats.mean.transpose()).array().square().colwise().sum().matrix().transpose();
  }
  stats.scale = (sq / rows).array().sqrt().matrix();
  for (Eigen::Index i = 0; i < dim; ++i) {
    if (!(stats.scale(i) > 1e-8)) stats.scale(i) = 1.0;
  }
  return stats;
}

FeatureStats FeatureStats::identity(std::size_t dim) {
  const auto d = static_cast<Eigen::Index>(dim);
  return {Eigen::VectorXd::Zero(d), Eigen::VectorXd::Ones(d)};
}

RealMatrix FeatureStats::apply(const RealMatrix& features) const {
  if (features.cols() != mean.size()) {
    fail(ErrorKind::kShapeError, "feature width " + std::to_string(features.cols()) +
                                     " does not match stats width " +
                                     std::to_string(mean.size()));
  }
  RealMatrix out = features.rowwise() - mean.transpose();
  out.array().rowwise() /= scale.transpose().array();
  return out;
}

double Gradients::max_abs() const {
  return std::max({w1.cwiseAbs().maxCoeff(), b1.cwiseAbs().maxCoeff(),
                   w2.cwiseAbs().maxCoeff(), b2.cwiseAbs().maxCoeff()});
}

MaskEstimator::MaskEstimator(const FeatureOptions& features, std::size_t hidden,
                             std::uint64_t seed)
    : features_(features) {
  features_.config.validate();
  if (hidden == 0) fail(ErrorKind::kConfigError, "hidden width must be > 0");
  const auto d = static_cast<Eigen::Index>(features_.dim());
  const auto h = static_cast<Eigen::Index>(hidden);
  const auto f = static_cast<Eigen::Index>(features_.config.bins());
  Rng rng(seed);
  auto glorot = [&rng](Eigen::Index rows, Eigen::Index cols) {
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    RealMatrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-limit, limit);
    return m;
  };
  w1_ = glorot(h, d);
  b1_ = RealVector::Zero(h);
  w2_ = glorot(f, h);
  b2_ = RealVector::Zero(f);
  stats_ = FeatureStats::identity(features_.dim());
}

MaskEstimator::MaskEstimator(const FeatureOptions& features, RealMatrix w1, RealVector b1,
                             RealMatrix w2, RealVector b2)
    : features_(features),
      w1_(std::move(w1)),
      b1_(std::move(b1)),
      w2_(std::move(w2)),
      b2_(std::move(b2)) {
  check_shapes();
  stats_ = FeatureStats::identity(input_dim());
}

void MaskEstimator::check_shapes() const {
  if (w1_.rows() == 0 || w1_.cols() == 0 || b1_.size() != w1_.rows() ||
      w2_.cols() != w1_.rows() || b2_.size() != w2_.rows() || w2_.rows() == 0) {
    fail(ErrorKind::kShapeError, "inconsistent estimator parameter shapes");
  }
  auto finite = [](const auto& m) { return m.allFinite(); };
  if (!finite(w1_) || !finite(b1_) || !finite(w2_) || !finite(b2_)) {
    fail(ErrorKind::kInvalidInput, "non-finite estimator parameters");
  }
}

void MaskEstimator::set_stats(FeatureStats stats) {
  if (static_cast<std::size_t>(stats.mean.size()) != input_dim() ||
      stats.scale.size() != stats.mean.size()) {
    fail(ErrorKind::kShapeError, "feature stats width does not match model input");
  }
  stats_ = std::move(stats);
}

namespace {

// Pre-activations are clamped here; the clamp's zero derivative is honoured in
// the backward pass so outputs stay strictly inside (0, 1).
constexpr double kLogitClamp = 30.0;

struct ForwardCache {
  RealMatrix z1;  // T x H pre-activation
  RealMatrix a1;  // T x H
  RealMatrix z2;  // T x F, unclamped
  RealMatrix out;  // T x F
};

ForwardCache run_forward(const MaskEstimator& m, const RealMatrix& x) {
  if (static_cast<std::size_t>(x.cols()) != m.input_dim()) {
    fail(ErrorKind::kShapeError, "features have width " + std::to_string(x.cols()) +
                                     ", model expects " + std::to_string(m.input_dim()));
  }
  ForwardCache c;
  c.z1.noalias() = x * m.w1().transpose();
  c.z1.rowwise() += m.b1().transpose();
  c.a1 = c.z1.cwiseMax(0.0);
  c.z2.noalias() = c.a1 * m.w2().transpose();
  c.z2.rowwise() += m.b2().transpose();
  c.out = c.z2.unaryExpr([](double z) {
    const double zc = std::clamp(z, -kLogitClamp, kLogitClamp);
    return 1.0 / (1.0 + std::exp(-zc));
  });
  return c;
}

}  // namespace

Mask MaskEstimator::forward(const RealMatrix& features) const {
  return Mask(run_forward(*this, features).out);
}

Mask MaskEstimator::predict(const Waveform& mixture) const {
  return forward(stats_.apply(extract_features(mixture, features_)));
}

Waveform MaskEstimator::enhance(const Waveform& mixture) const {
  const ComplexSpectrogram y = stft(mixture, features_.config);
  const Mask rm = forward(stats_.apply(splice_frames(
      frame_features(y, features_.kind, features_.epsilon), features_.context_radius)));
  return istft(apply_mask(y, rm));
}

void MaskEstimator::step(const Gradients& g, double learning_rate) {
  w1_ -= learning_rate * g.w1;
  b1_ -= learning_rate * g.b1;
  w2_ -= learning_rate * g.w2;
  b2_ -= learning_rate * g.b2;
}

bool MaskEstimator::operator==(const MaskEstimator& o) const {
  return features_.config == o.features_.config && features_.kind == o.features_.kind &&
         features_.epsilon == o.features_.epsilon &&
         features_.context_radius == o.features_.context_radius && w1_ == o.w1_ &&
         b1_ == o.b1_ && w2_ == o.w2_ && b2_ == o.b2_ && stats_.mean == o.stats_.mean &&
         stats_.scale == o.stats_.scale;
}

void MaskEstimator::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::kIoError, "cannot write " + path.string());
  Meta meta;
  meta["type"] = "mask_estimator";
  meta["checkpoint_version"] = "1";
  meta["feature_kind"] = std::string(to_string(features_.kind));
  meta["context_radius"] = std::to_string(features_.context_radius);
  std::ostringstream eps;
  eps.precision(17);
  eps << features_.epsilon;
  meta["epsilon"] = eps.str();
  put_config(meta, features_.config);
  write_record(out, w1_, meta);
  write_record(out, RealMatrix(b1_.transpose()), {{"name", "b1"}});
  write_record(out, w2_, {{"name", "w2"}});
  write_record(out, RealMatrix(b2_.transpose()), {{"name", "b2"}});
  write_record(out, RealMatrix(stats_.mean.transpose()), {{"name", "feature_mean"}});
  write_record(out, RealMatrix(stats_.scale.transpose()), {{"name", "feature_scale"}});
  if (!out) fail(ErrorKind::kIoError, "write failed for " + path.string());
}

MaskEstimator MaskEstimator::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIoError, "cannot open " + path.string());
  RealRecord w1 = read_real_record(in);
  const Meta& meta = w1.meta;
  auto type = meta.find("type");
  if (type == meta.end() || type->second != "mask_estimator") {
    fail(ErrorKind::kParseError, path.string() + " is not a mask estimator checkpoint");
  }
  if (meta.at("checkpoint_version") != "1") {
    fail(ErrorKind::kParseError, "unsupported checkpoint version");
  }
  FeatureOptions features;
  features.config = get_config(meta);
  features.kind = feature_kind_from_string(meta.at("feature_kind"));
  features.context_radius = std::stoull(meta.at("context_radius"));
  features.epsilon = std::stod(meta.at("epsilon"));

  auto next_row = [&in](const char* name) -> RealVector {
    RealRecord r = read_real_record(in);
    auto it = r.meta.find("name");
    if (it == r.meta.end() || it->second != name || r.values.rows() != 1) {
      fail(ErrorKind::kParseError, std::string("checkpoint missing ") + name);
    }
    return r.values.row(0).transpose();
  };
  RealVector b1 = next_row("b1");
  RealRecord w2 = read_real_record(in);
  if (w2.meta.count("name") == 0 || w2.meta.at("name") != "w2") {
    fail(ErrorKind::kParseError, "checkpoint missing w2");
  }
  RealVector b2 = next_row("b2");
  FeatureStats stats;
  stats.mean = next_row("feature_mean");
  stats.scale = next_row("feature_scale");

  MaskEstimator model(features, std::move(w1.values), std::move(b1), std::move(w2.values),
                      std::move(b2));
  if (model.input_dim() != features.dim() || model.output_dim() != features.config.bins()) {
    fail(ErrorKind::kShapeError, "checkpoint weights do not match its feature options");
  }
  model.set_stats(std::move(stats));
  return model;
}

LossAndGradients batch_loss_and_gradients(const MaskEstimator& model,
                                          std::span<const TrainingExample* const> batch) {
  if (batch.empty()) fail(ErrorKind::kInvalidInput, "empty batch");
  const auto d = static_cast<Eigen::Index>(model.input_dim());
  const auto f = static_cast<Eigen::Index>(model.output_dim());
  Eigen::Index t_max = 0;
  for (const auto* ex : batch) {
    if (ex->features.cols() != d) fail(ErrorKind::kShapeError, "feature width mismatch");
    if (ex->irm.values().cols() != f || ex->support.values().cols() != f ||
        ex->irm.values().rows() != ex->features.rows() ||
        ex->support.values().rows() != ex->features.rows()) {
      fail(ErrorKind::kShapeError, "target shape does not match features");
    }
    t_max = std::max(t_max, ex->features.rows());
  }
  const auto b = static_cast<Eigen::Index>(batch.size());

  // Zero-padded stack: utterance u occupies rows [u * t_max, (u + 1) * t_max).
  RealMatrix x = RealMatrix::Zero(b * t_max, d);
  RealMatrix target = RealMatrix::Zero(b * t_max, f);
  RealMatrix weight = RealMatrix::Zero(b * t_max, f);
  for (Eigen::Index u = 0; u < b; ++u) {
    const auto& ex = *batch[static_cast<std::size_t>(u)];
    const Eigen::Index t = ex.features.rows();
    BinaryMask padded(RealMatrix::Zero(t_max, f));
    {
      RealMatrix m = RealMatrix::Zero(t_max, f);
      m.topRows(t) = ex.support.values();
      padded = restrict_to_valid_frames(BinaryMask(std::move(m)), static_cast<std::size_t>(t));
    }
    const double support = padded.support();
    if (support == 0.0) fail(ErrorKind::kEmptyLossSupport, "utterance loss mask is empty");
    x.middleRows(u * t_max, t) = ex.features;
    target.middleRows(u * t_max, t) = ex.irm.values();
    weight.middleRows(u * t_max, t_max) = padded.values() / (support * static_cast<double>(b));
  }

  const ForwardCache c = run_forward(model, x);
  const RealMatrix diff = c.out - target;

  LossAndGradients r;
  r.loss = (diff.array().square() * weight.array()).sum();

  RealMatrix dz2 = (2.0 * diff.array() * weight.array() * c.out.array() *
                    (1.0 - c.out.array()))
                       .matrix();
  for (Eigen::Index i = 0; i < dz2.size(); ++i) {
    if (std::abs(c.z2.data()[i]) > kLogitClamp) dz2.data()[i] = 0.0;
  }
  r.grads.w2.noalias() = dz2.transpose() * c.a1;
  r.grads.b2 = dz2.colwise().sum().transpose();
  RealMatrix dz1 = dz2 * model.w2();
  dz1.array() *= (c.z1.array() > 0.0).cast<double>();
  r.grads.w1.noalias() = dz1.transpose() * x;
  r.grads.b1 = dz1.colwise().sum().transpose();
  return r;
}

LossAndGradients loss_and_gradients(const MaskEstimator& model, const RealMatrix& features,
                                    const Mask& irm, const BinaryMask& support) {
  const TrainingExample example{features, irm, support};
  const TrainingExample* batch[] = {&example};
  return batch_loss_and_gradients(model, batch);
}

double evaluate_masked_loss(const MaskEstimator& model,
                            std::span<const TrainingExample> examples) {
  if (examples.empty()) fail(ErrorKind::kEmptyCorpus, "no examples to evaluate");
  double total = 0.0;
  for (const auto& ex : examples) {
    total += masked_mse_loss(ex.irm, model.forward(ex.features), ex.support);
  }
  return total / static_cast<double>(examples.size());
}

double constant_mask_loss(std::span<const TrainingExample> examples, double value) {
  if (examples.empty()) fail(ErrorKind::kEmptyCorpus, "no examples to evaluate");
  double total = 0.0;
  for (const auto& ex : examples) {
    total += masked_mse_loss(ex.irm, Mask::constant(ex.irm.frames(), ex.irm.bins(), value),
                             ex.support);
  }
  return total / static_cast<double>(examples.size());
}

PreparedUtterance prepare_utterance(const Mixture& mixture, const FeatureOptions& options) {
  const ComplexSpectrogram y = stft(mixture.mixture, options.config);
  const ComplexSpectrogram x = stft(mixture.clean, options.config);
  const ComplexSpectrogram n = stft(mixture.noise, options.config);
  return {splice_frames(frame_features(y, options.kind, options.epsilon), options.context_radius),
          ideal_ratio_mask(x, n), energy_mask(magnitude(y))};
}

void TrainConfig::validate() const {
  if (epochs == 0) fail(ErrorKind::kConfigError, "epochs must be > 0");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    fail(ErrorKind::kConfigError, "learning rate must be finite and >= 0");
  }
  if (batch_size == 0) fail(ErrorKind::kConfigError, "batch_size must be > 0");
  if (hidden == 0) fail(ErrorKind::kConfigError, "hidden must be > 0");
}

double learning_rate_for_epoch(const TrainConfig& config, std::size_t epoch) {
  const std::size_t first_decay = config.epochs * 6 / 10;
  const std::size_t second_decay = config.epochs * 9 / 10;
  if (epoch <= first_decay) return config.learning_rate;
  if (epoch <= second_decay) return config.learning_rate / 2.0;
  return config.learning_rate / 4.0;
}

std::string TrainingLog::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "epoch,lr,loss\n";
  for (const auto& e : epochs) os << e.epoch << ',' << e.learning_rate << ',' << e.loss << '\n';
  return os.str();
}

namespace {

constexpr std::uint64_t kShuffleStream = 0x5348554646ULL;  // "SHUFF"

std::vector<TrainingExample> prepare_examples(const Manifest& manifest, const SourceBank& clean,
                                              const SourceBank& noise,
                                              const FeatureOptions& features,
                                              const FeatureStats* stats,
                                              std::vector<RealMatrix>* raw_out) {
  std::vector<TrainingExample> out;
  out.reserve(manifest.entries.size());
  for (const auto& spec : manifest.entries) {
    PreparedUtterance p = prepare_utterance(render_entry(spec, clean, noise), features);
    if (raw_out) raw_out->push_back(p.features);
    RealMatrix x = stats ? stats->apply(p.features) : std::move(p.features);
    out.push_back({std::move(x), std::move(p.irm), std::move(p.support)});
  }
  return out;
}

}  // namespace

TrainResult train(const Manifest& manifest, const SourceBank& clean, const SourceBank& noise,
                  const TrainConfig& config, const FeatureOptions& features) {
  config.validate();
  const Manifest train_set = manifest.subset("train");
  if (train_set.entries.empty()) fail(ErrorKind::kEmptyCorpus, "manifest has no train entries");

  MaskEstimator model(features, config.hidden, config.seed);

  // Statistics are fitted once on the initial training mixtures and frozen.
  std::vector<RealMatrix> raw;
  std::vector<TrainingExample> examples =
      prepare_examples(train_set, clean, noise, features, nullptr, &raw);
  model.set_stats(FeatureStats::fit(raw));
  raw.clear();
  for (auto& ex : examples) ex.features = model.stats().apply(ex.features);

  TrainingLog log;
  log.epochs.push_back({0, 0.0, evaluate_masked_loss(model, examples)});

  std::vector<std::size_t> order(examples.size());
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    if (config.remix_each_epoch && epoch > 1) {
      examples = prepare_examples(remix_manifest(train_set, clean, noise, epoch - 1), clean,
                                  noise, features, &model.stats(), nullptr);
    }
    const double lr = learning_rate_for_epoch(config, epoch);
    std::iota(order.begin(), order.end(), 0);
    Rng rng = Rng::derive(config.seed, kShuffleStream + epoch);
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[rng.uniform_index(i)]);
    }
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      std::vector<const TrainingExample*> batch;
      for (std::size_t i = start; i < end; ++i) batch.push_back(&examples[order[i]]);
      const LossAndGradients lg = batch_loss_and_gradients(model, batch);
      model.step(lg.grads, lr);
    }
    log.epochs.push_back({epoch, lr, evaluate_masked_loss(model, examples)});
  }
  return {std::move(model), std::move(log)};
}

}  // namespace xcorpus
