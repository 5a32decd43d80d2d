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


#include <vector>

#include <benchmark/benchmark.h>

#include "xcorpus/channel.hpp"
#include "xcorpus/estimator.hpp"
#include "xcorpus/rng.hpp"
#include "xcorpus/stft.hpp"
#include "xcorpus/synth.hpp"

namespace xcorpus {
namespace {

Waveform noise_signal(double seconds, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> x(static_cast<std::size_t>(seconds * kSampleRate));
  for (double& v : x) v = rng.uniform(-0.5, 0.5);
  return Waveform(x);
}

void BM_Stft(benchmark::State& state) {
  const Waveform w = noise_signal(1.0, 1);
  const auto c = StftConfig::make(512, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(stft(w, c));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(w.size()));
}
BENCHMARK(BM_Stft)->Arg(256)->Arg(128)->Arg(32);

void BM_StftRoundTrip(benchmark::State& state) {
  const Waveform w = noise_signal(1.0, 2);
  const auto c = StftConfig::make(512, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(istft(stft(w, c)));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(w.size()));
}
BENCHMARK(BM_StftRoundTrip)->Arg(256)->Arg(32);

void BM_FirChannel(benchmark::State& state) {
  const Waveform w = noise_signal(1.0, 3);
  const FirChannel h = FirChannel::high_shelf(1500, 12, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(apply_fir_channel(w, h));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(w.size()));
}
BENCHMARK(BM_FirChannel)->Arg(33)->Arg(129);

void BM_CorpusChannel(benchmark::State& state) {
  std::vector<Waveform> corpus;
  for (auto& [id, w] : synth_clean_bank(8, 2.0, 4)) corpus.push_back(w);
  const StftConfig c = StftConfig::corpus_analysis();
  for (auto _ : state) {
    benchmark::DoNotOptimize(estimate_corpus_channel(std::span<const Waveform>(corpus), c));
  }
}
BENCHMARK(BM_CorpusChannel);

void BM_TrainingStep(benchmark::State& state) {
  FeatureOptions fo;
  fo.context_radius = 2;
  MaskEstimator model(fo, static_cast<std::size_t>(state.range(0)), 5);
  Rng rng(6);
  const Eigen::Index frames = 63;
  const auto bins = static_cast<Eigen::Index>(fo.config.bins());
  RealMatrix x(frames, static_cast<Eigen::Index>(model.input_dim()));
  RealMatrix t(frames, bins);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = rng.uniform01();
  const Mask irm(t);
  const BinaryMask support = BinaryMask::ones(static_cast<std::size_t>(frames),
                                              static_cast<std::size_t>(bins));
  for (auto _ : state) {
    const LossAndGradients lg = loss_and_gradients(model, x, irm, support);
    model.step(lg.grads, 1e-3);
    benchmark::DoNotOptimize(lg.loss);
  }
}
BENCHMARK(BM_TrainingStep)->Arg(64)->Arg(256);

}  // namespace
}  // namespace xcorpus

BENCHMARK_MAIN();
