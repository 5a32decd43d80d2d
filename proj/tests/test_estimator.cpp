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
#include <fstream>
#include <functional>
#include <vector>

#include <gtest/gtest.h>

#include "support.hpp"
#include "xcorpus/channel.hpp"
#include "xcorpus/container.hpp"
#include "xcorpus/estimator.hpp"
#include "xcorpus/synth.hpp"

namespace xcorpus {
namespace {

using testing::TempDir;

RealMatrix random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double scale = 1.0) {
  RealMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal() * scale;
  return m;
}

FeatureOptions tiny_options() {
  FeatureOptions o;
  o.config = StftConfig::make(16, 8);
  o.context_radius = 1;
  return o;
}

TrainingExample random_example(Rng& rng, Eigen::Index frames, const MaskEstimator& model) {
  const auto f = static_cast<Eigen::Index>(model.output_dim());
  RealMatrix irm(frames, f), sup(frames, f);
  for (Eigen::Index i = 0; i < irm.size(); ++i) {
    irm.data()[i] = rng.uniform01();
    sup.data()[i] = rng.uniform01() < 0.6 ? 1.0 : 0.0;
  }
  sup(0, 0) = 1.0;
  return {random_matrix(rng, frames, static_cast<Eigen::Index>(model.input_dim())), Mask(irm),
          BinaryMask(sup)};
}

TEST(FeatureKind, NamesRoundTrip) {
  for (FeatureKind k : {FeatureKind::kMagnitudeSms, FeatureKind::kLogLsms, FeatureKind::kLogRasta,
                        FeatureKind::kLogRaw}) {
    EXPECT_EQ(feature_kind_from_string(to_string(k)), k);
  }
  EXPECT_EQ(to_string(FeatureKind::kLogLsms), "log_lsms");
  EXPECT_XC_ERROR(feature_kind_from_string("mfcc"), ErrorKind::kConfigError);
}

TEST(FrameFeatures, DispatchesToNormalizers) {
  const ComplexSpectrogram s = stft(testing::random_waveform(1, 2000), StftConfig::frame32ms(16));
  const RealMatrix raw = log_magnitude(s).values;
  EXPECT_TRUE(frame_features(s, FeatureKind::kLogRaw, kLogEpsilon) == raw);
  EXPECT_TRUE(frame_features(s, FeatureKind::kLogLsms, kLogEpsilon) == lsms(log_magnitude(s)).values);
  EXPECT_TRUE(frame_features(s, FeatureKind::kLogRasta, kLogEpsilon) == rasta(log_magnitude(s)).values);
  EXPECT_TRUE(frame_features(s, FeatureKind::kMagnitudeSms, kLogEpsilon) == sms(magnitude(s)));
}

TEST(SpliceFrames, ReplicatesEdgesAndOrdersByOffset) {
  RealMatrix frames(3, 2);
  frames << 0, 10, 1, 11, 2, 12;
  const RealMatrix s = splice_frames(frames, 1);
  ASSERT_EQ(s.rows(), 3);
  ASSERT_EQ(s.cols(), 6);
  RealMatrix expected(3, 6);
  expected << 0, 10, 0, 10, 1, 11,  //
      0, 10, 1, 11, 2, 12,          //
      1, 11, 2, 12, 2, 12;
  EXPECT_TRUE(s == expected);
  EXPECT_TRUE(splice_frames(frames, 0) == frames);
  const RealMatrix wide = splice_frames(frames, 4);
  EXPECT_EQ(wide.cols(), 18);
  EXPECT_EQ(wide(0, 0), 0.0);
  EXPECT_EQ(wide(2, 17), 12.0);
}

TEST(ExtractFeatures, WidthMatchesOptions) {
  FeatureOptions o;
  o.context_radius = 2;
  const RealMatrix f = extract_features(testing::random_waveform(2, 4000), o);
  EXPECT_EQ(static_cast<std::size_t>(f.cols()), o.dim());
  EXPECT_EQ(o.dim(), 5u * 257u);
  EXPECT_EQ(static_cast<std::size_t>(f.rows()), o.config.num_frames(4000));
}

TEST(FeatureStats, FitExample) {
  RealMatrix a(2, 2), b(1, 2);
  a << 1, 7, 3, 7;
  b << 5, 7;
  const std::vector<RealMatrix> data = {a, b};
  const FeatureStats s = FeatureStats::fit(data);
  EXPECT_DOUBLE_EQ(s.mean(0), 3.0);
  EXPECT_DOUBLE_EQ(s.scale(0), std::sqrt(8.0 / 3.0));
  EXPECT_EQ(s.mean(1), 7.0);
  EXPECT_EQ(s.scale(1), 1.0);
  const RealMatrix z = s.apply(b);
  EXPECT_DOUBLE_EQ(z(0, 0), 2.0 / std::sqrt(8.0 / 3.0));
  EXPECT_EQ(z(0, 1), 0.0);
  EXPECT_XC_ERROR(s.apply(RealMatrix::Zero(1, 3)), ErrorKind::kShapeError);
  EXPECT_XC_ERROR(FeatureStats::fit(std::vector<RealMatrix>{}), ErrorKind::kEmptyCorpus);
  EXPECT_XC_ERROR(FeatureStats::fit(std::vector<RealMatrix>{a, RealMatrix::Zero(1, 3)}),
                  ErrorKind::kShapeError);
}

TEST(FeatureStats, StandardizedFeaturesHaveUnitMoments) {
  Rng rng(3);
  std::vector<RealMatrix> data;
  for (int i = 0; i < 4; ++i) {
    RealMatrix m = random_matrix(rng, 50, 6, 3.0);
    m.array() += 10.0;
    data.push_back(m);
  }
  const FeatureStats s = FeatureStats::fit(data);
  RealMatrix all(200, 6);
  for (int i = 0; i < 4; ++i) all.middleRows(50 * i, 50) = s.apply(data[static_cast<std::size_t>(i)]);
  const Eigen::RowVectorXd mean = all.colwise().mean();
  EXPECT_LT(mean.cwiseAbs().maxCoeff(), 1e-12);
  const Eigen::RowVectorXd var = all.array().square().colwise().mean();
  EXPECT_LT((var.array() - 1.0).abs().maxCoeff(), 1e-12);
}

TEST(MaskEstimator, InitializationShapesAndBounds) {
  const FeatureOptions o = tiny_options();
  const MaskEstimator m(o, 7, 11);
  EXPECT_EQ(m.input_dim(), 27u);
  EXPECT_EQ(m.hidden(), 7u);
  EXPECT_EQ(m.output_dim(), 9u);
  EXPECT_LE(m.w1().cwiseAbs().maxCoeff(), std::sqrt(6.0 / 34.0));
  EXPECT_LE(m.w2().cwiseAbs().maxCoeff(), std::sqrt(6.0 / 16.0));
  EXPECT_EQ(m.b1().cwiseAbs().maxCoeff(), 0.0);
  EXPECT_TRUE(MaskEstimator(o, 7, 11) == m);
  EXPECT_FALSE(MaskEstimator(o, 7, 12) == m);
  EXPECT_XC_ERROR(MaskEstimator(o, 0, 1), ErrorKind::kConfigError);
  EXPECT_XC_ERROR(MaskEstimator(o, RealMatrix::Zero(2, 3), RealVector::Zero(3), RealMatrix::Zero(1, 2),
                                RealVector::Zero(1)),
                  ErrorKind::kShapeError);
}

TEST(MaskEstimator, ZeroWeightsGiveHalfMask) {
  const FeatureOptions o = tiny_options();
  const MaskEstimator m(o, RealMatrix::Zero(4, 27), RealVector::Zero(4), RealMatrix::Zero(9, 4),
                        RealVector::Zero(9));
  Rng rng(1);
  const Mask out = m.forward(random_matrix(rng, 5, 27));
  EXPECT_EQ(out.values().minCoeff(), 0.5);
  EXPECT_EQ(out.values().maxCoeff(), 0.5);
  EXPECT_XC_ERROR(m.forward(RealMatrix::Zero(2, 26)), ErrorKind::kShapeError);
}

TEST(MaskEstimator, ScalarNetworkOracle) {
  FeatureOptions o;
  o.config = StftConfig::make(1, 1, WindowKind::kRectangular);
  o.context_radius = 0;
  RealMatrix w1(1, 1), w2(1, 1);
  w1 << 2.0;
  w2 << -1.0;
  RealVector b1(1), b2(1);
  b1 << 0.5;
  b2 << 0.25;
  const MaskEstimator m(o, w1, b1, w2, b2);
  const RealMatrix x = RealMatrix::Constant(1, 1, 1.0);
  const double t = 0.3;

  const double z1 = 2.5, a1 = 2.5, z2 = -2.25;
  const double out = 1.0 / (1.0 + std::exp(-z2));
  EXPECT_DOUBLE_EQ(m.forward(x).values()(0, 0), out);

  const LossAndGradients lg = loss_and_gradients(m, x, Mask(RealMatrix::Constant(1, 1, t)),
                                                 BinaryMask::ones(1, 1));
  const double dz2 = 2.0 * (out - t) * out * (1.0 - out);
  const double dz1 = dz2 * -1.0 * (z1 > 0 ? 1.0 : 0.0);
  EXPECT_DOUBLE_EQ(lg.loss, (out - t) * (out - t));
  EXPECT_DOUBLE_EQ(lg.grads.w2(0, 0), dz2 * a1);
  EXPECT_DOUBLE_EQ(lg.grads.b2(0), dz2);
  EXPECT_DOUBLE_EQ(lg.grads.w1(0, 0), dz1 * 1.0);
  EXPECT_DOUBLE_EQ(lg.grads.b1(0), dz1);

  MaskEstimator stepped = m;
  stepped.step(lg.grads, 0.5);
  EXPECT_DOUBLE_EQ(stepped.w2()(0, 0), -1.0 - 0.5 * dz2 * a1);
}

TEST(MaskEstimator, LogitsClampKeepOutputsInsideUnitInterval) {
  FeatureOptions o;
  o.config = StftConfig::make(1, 1, WindowKind::kRectangular);
  o.context_radius = 0;
  const MaskEstimator m(o, RealMatrix::Constant(1, 1, 1.0), RealVector::Zero(1),
                        RealMatrix::Constant(1, 1, 1.0), RealVector::Zero(1));
  const double hi = m.forward(RealMatrix::Constant(1, 1, 1000.0)).values()(0, 0);
  EXPECT_LT(hi, 1.0);
  EXPECT_DOUBLE_EQ(hi, 1.0 / (1.0 + std::exp(-30.0)));
  const LossAndGradients lg = loss_and_gradients(m, RealMatrix::Constant(1, 1, 1000.0),
                                                 Mask::constant(1, 1, 0.0), BinaryMask::ones(1, 1));
  EXPECT_EQ(lg.grads.max_abs(), 0.0);
}

double relative_error(double g, double fd) {
  return std::abs(g - fd) / std::max({std::abs(g), std::abs(fd), 1e-6});
}

void check_gradients(const MaskEstimator& model, const std::vector<TrainingExample>& examples) {
  std::vector<const TrainingExample*> batch;
  for (const auto& e : examples) batch.push_back(&e);
  const LossAndGradients lg = batch_loss_and_gradients(model, batch);
  const double h = 1e-6;
  auto probe = [&](auto get_param, const RealMatrix& grad, const char* name) {
    for (Eigen::Index i = 0; i < grad.size(); ++i) {
      MaskEstimator plus = model, minus = model;
      get_param(plus).data()[i] += h;
      get_param(minus).data()[i] -= h;
      const double fd = (batch_loss_and_gradients(plus, batch).loss -
                         batch_loss_and_gradients(minus, batch).loss) / (2.0 * h);
      ASSERT_LT(relative_error(grad.data()[i], fd), 1e-4) << name << "[" << i << "]";
    }
  };
  probe([](MaskEstimator& m) -> RealMatrix& { return m.w1(); }, lg.grads.w1, "w1");
  probe([](MaskEstimator& m) -> RealMatrix& { return m.w2(); }, lg.grads.w2, "w2");
  probe([](MaskEstimator& m) -> RealVector& { return m.b1(); }, lg.grads.b1, "b1");
  probe([](MaskEstimator& m) -> RealVector& { return m.b2(); }, lg.grads.b2, "b2");
}

TEST(Gradients, MatchFiniteDifferencesSingleUtterance) {
  const MaskEstimator model(tiny_options(), 6, 5);
  Rng rng(21);
  check_gradients(model, {random_example(rng, 7, model)});
}

TEST(Gradients, MatchFiniteDifferencesPaddedBatch) {
  MaskEstimator model(tiny_options(), 5, 6);
  Rng rng(22);
  model.b1().setConstant(0.1);
  check_gradients(model, {random_example(rng, 4, model), random_example(rng, 9, model),
                          random_example(rng, 6, model)});
}

TEST(BatchLoss, IsMeanOfPerUtteranceMaskedLosses) {
  const MaskEstimator model(tiny_options(), 6, 7);
  Rng rng(23);
  const std::vector<TrainingExample> ex = {random_example(rng, 3, model), random_example(rng, 10, model)};
  const TrainingExample* batch[] = {&ex[0], &ex[1]};
  const double batch_loss = batch_loss_and_gradients(model, batch).loss;
  double expected = 0.0;
  for (const auto& e : ex) expected += masked_mse_loss(e.irm, model.forward(e.features), e.support);
  EXPECT_NEAR(batch_loss, expected / 2.0, 1e-14);
  EXPECT_NEAR(evaluate_masked_loss(model, ex), expected / 2.0, 1e-14);
}

TEST(BatchLoss, TargetsOutsideSupportDoNotMatter) {
  const MaskEstimator model(tiny_options(), 6, 8);
  Rng rng(24);
  TrainingExample a = random_example(rng, 8, model);
  RealMatrix changed = a.irm.values();
  for (Eigen::Index i = 0; i < changed.size(); ++i) {
    if (a.support.values().data()[i] == 0.0) changed.data()[i] = rng.uniform01();
  }
  const LossAndGradients la = loss_and_gradients(model, a.features, a.irm, a.support);
  const LossAndGradients lb = loss_and_gradients(model, a.features, Mask(changed), a.support);
  EXPECT_EQ(la.loss, lb.loss);
  EXPECT_TRUE(la.grads.w1 == lb.grads.w1);
  EXPECT_TRUE(la.grads.w2 == lb.grads.w2);
  EXPECT_XC_ERROR(loss_and_gradients(model, a.features, a.irm, BinaryMask(RealMatrix::Zero(8, 9))),
                  ErrorKind::kEmptyLossSupport);
}

TEST(ConstantMaskLoss, Example) {
  RealMatrix irm(1, 2);
  irm << 1.0, 0.0;
  const std::vector<TrainingExample> ex = {{RealMatrix::Zero(1, 1), Mask(irm), BinaryMask::ones(1, 2)}};
  EXPECT_DOUBLE_EQ(constant_mask_loss(ex, 0.5), 0.25);
  EXPECT_XC_ERROR(constant_mask_loss(std::vector<TrainingExample>{}, 0.5), ErrorKind::kEmptyCorpus);
}

TEST(Checkpoint, RoundTripIsExact) {
  TempDir dir;
  FeatureOptions o = tiny_options();
  o.kind = FeatureKind::kLogRasta;
  o.epsilon = 1e-7;
  MaskEstimator m(o, 5, 9);
  Rng rng(9);
  std::vector<RealMatrix> data = {random_matrix(rng, 10, 27)};
  m.set_stats(FeatureStats::fit(data));
  m.save(dir / "m.bin");
  const MaskEstimator back = MaskEstimator::load(dir / "m.bin");
  EXPECT_TRUE(back == m);
  EXPECT_EQ(back.features().kind, FeatureKind::kLogRasta);
  EXPECT_EQ(back.features().epsilon, 1e-7);
  EXPECT_EQ(back.features().context_radius, 1u);
}

TEST(Checkpoint, RejectsForeignAndTruncatedFiles) {
  TempDir dir;
  save_real(dir / "other.bin", RealMatrix::Zero(2, 2), {{"type", "corpus_channel"}});
  EXPECT_XC_ERROR(MaskEstimator::load(dir / "other.bin"), ErrorKind::kParseError);
  MaskEstimator(tiny_options(), 3, 1).save(dir / "m.bin");
  const auto size = std::filesystem::file_size(dir / "m.bin");
  std::filesystem::resize_file(dir / "m.bin", size - 20);
  EXPECT_XC_ERROR(MaskEstimator::load(dir / "m.bin"), ErrorKind::kParseError);
  EXPECT_XC_ERROR(MaskEstimator::load(dir / "none.bin"), ErrorKind::kIoError);
}

TEST(LearningRate, HalvesAtSixAndNineTenths) {
  TrainConfig c;
  c.epochs = 10;
  c.learning_rate = 1.0;
  EXPECT_EQ(learning_rate_for_epoch(c, 1), 1.0);
  EXPECT_EQ(learning_rate_for_epoch(c, 6), 1.0);
  EXPECT_EQ(learning_rate_for_epoch(c, 7), 0.5);
  EXPECT_EQ(learning_rate_for_epoch(c, 9), 0.5);
  EXPECT_EQ(learning_rate_for_epoch(c, 10), 0.25);
  c.epochs = 30;
  EXPECT_EQ(learning_rate_for_epoch(c, 18), 1.0);
  EXPECT_EQ(learning_rate_for_epoch(c, 19), 0.5);
  EXPECT_EQ(learning_rate_for_epoch(c, 27), 0.5);
  EXPECT_EQ(learning_rate_for_epoch(c, 28), 0.25);
}

TEST(TrainConfig, Validation) {
  TrainConfig c;
  c.validate();
  c.epochs = 0;
  EXPECT_XC_ERROR(c.validate(), ErrorKind::kConfigError);
  c = TrainConfig{};
  c.learning_rate = -1.0;
  EXPECT_XC_ERROR(c.validate(), ErrorKind::kConfigError);
  c.learning_rate = NAN;
  EXPECT_XC_ERROR(c.validate(), ErrorKind::kConfigError);
  c = TrainConfig{};
  c.batch_size = 0;
  EXPECT_XC_ERROR(c.validate(), ErrorKind::kConfigError);
}

struct TrainingFixture {
  SourceBank clean = synth_clean_bank(8, 1.0, 5);
  SourceBank noise = synth_noise_bank({NoiseKind::kWhite, NoiseKind::kBabble}, 4.0, 6);
  Manifest manifest;
  FeatureOptions features;
  TrainConfig config;

  TrainingFixture() {
    ManifestOptions mo;
    mo.seed = 3;
    mo.segment_s = 1.0;
    manifest = build_manifest(clean, noise, mo);
    features.kind = FeatureKind::kLogLsms;
    features.context_radius = 1;
    config.epochs = 6;
    config.hidden = 16;
    config.seed = 4;
  }

  std::vector<TrainingExample> examples(const MaskEstimator& model) const {
    std::vector<TrainingExample> out;
    for (const auto& e : manifest.entries) {
      PreparedUtterance p = prepare_utterance(render_entry(e, clean, noise), features);
      out.push_back({model.stats().apply(p.features), p.irm, p.support});
    }
    return out;
  }
};

TEST(Train, ZeroLearningRateLeavesInitialWeights) {
  TrainingFixture fx;
  fx.config.learning_rate = 0.0;
  fx.config.epochs = 2;
  const TrainResult r = train(fx.manifest, fx.clean, fx.noise, fx.config, fx.features);
  const MaskEstimator init(fx.features, fx.config.hidden, fx.config.seed);
  EXPECT_TRUE(r.model.w1() == init.w1());
  EXPECT_TRUE(r.model.w2() == init.w2());
  EXPECT_TRUE(r.model.b2() == init.b2());
  ASSERT_EQ(r.log.epochs.size(), 3u);
  EXPECT_EQ(r.log.epochs[0].epoch, 0u);
  EXPECT_EQ(r.log.epochs[0].learning_rate, 0.0);
}

TEST(Train, DeterministicForFixedSeed) {
  TrainingFixture fx;
  fx.config.epochs = 3;
  const TrainResult a = train(fx.manifest, fx.clean, fx.noise, fx.config, fx.features);
  const TrainResult b = train(fx.manifest, fx.clean, fx.noise, fx.config, fx.features);
  EXPECT_TRUE(a.model == b.model);
  EXPECT_EQ(a.log.to_csv(), b.log.to_csv());
  fx.config.seed = 99;
  const TrainResult c = train(fx.manifest, fx.clean, fx.noise, fx.config, fx.features);
  EXPECT_FALSE(a.model == c.model);
}

TEST(Train, BeatsConstantHalfMaskAndReducesLoss) {
  TrainingFixture fx;
  const TrainResult r = train(fx.manifest, fx.clean, fx.noise, fx.config, fx.features);
  const auto ex = fx.examples(r.model);
  const double trained = evaluate_masked_loss(r.model, ex);
  const double baseline = constant_mask_loss(ex, 0.5);
  EXPECT_LT(trained, baseline);
  EXPECT_LT(r.log.epochs.back().loss, r.log.epochs.front().loss);
  const std::string csv = r.log.to_csv();
  EXPECT_EQ(csv.substr(0, 14), "epoch,lr,loss\n");
}

TEST(Train, CheckpointPredictionsMatchAfterReload) {
  TempDir dir;
  TrainingFixture fx;
  fx.config.epochs = 1;
  const TrainResult r = train(fx.manifest, fx.clean, fx.noise, fx.config, fx.features);
  r.model.save(dir / "m.bin");
  const MaskEstimator back = MaskEstimator::load(dir / "m.bin");
  const Waveform& probe = fx.clean.begin()->second;
  EXPECT_TRUE(back.predict(probe).values() == r.model.predict(probe).values());
  const Waveform e = back.enhance(probe);
  EXPECT_EQ(e.size(), probe.size());
}

TEST(Train, NeedsTrainEntries) {
  TrainingFixture fx;
  Manifest only_test = fx.manifest;
  for (auto& e : only_test.entries) e.split = "test";
  EXPECT_XC_ERROR(train(only_test, fx.clean, fx.noise, fx.config, fx.features),
                  ErrorKind::kEmptyCorpus);
}

}  // namespace
}  // namespace xcorpus
