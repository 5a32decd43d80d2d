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

#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <vector>

#include "xcorpus/error.hpp"

namespace xcorpus::detail {

struct RealFft::Plans {
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;
  ~Plans() {
    if (r2c) fftw_destroy_plan(r2c);
    if (c2r) fftw_destroy_plan(c2r);
  }
};

namespace {

// fftw_plan_* is not thread-safe; fftw_execute_* on an existing plan is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

RealFft::RealFft(std::size_t size) : size_(size) {
  if (size == 0) fail(ErrorKind::kConfigError, "FFT size must be positive");
  static std::map<std::size_t, std::shared_ptr<const Plans>> cache;

  std::lock_guard lock(planner_mutex());
  if (auto it = cache.find(size); it != cache.end()) {
    plans_ = it->second;
    return;
  }
  const int n = static_cast<int>(size);
  std::vector<double> real(size);
  std::vector<fftw_complex> spec(size / 2 + 1);
  auto plans = std::make_shared<Plans>();
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  plans->r2c = fftw_plan_dft_r2c_1d(n, real.data(), spec.data(), flags);
  // c2r destroys its input; execute() always hands it a scratch copy.
  plans->c2r = fftw_plan_dft_c2r_1d(n, spec.data(), real.data(), flags);
  if (!plans->r2c || !plans->c2r) fail(ErrorKind::kConfigError, "FFTW planning failed");
  cache.emplace(size, plans);
  plans_ = std::move(plans);
}

RealFft::~RealFft() = default;

void RealFft::forward(std::span<const double> in,
                      std::span<std::complex<double>> out) const {
  // r2c does not modify its input despite the non-const signature.
  fftw_execute_dft_r2c(plans_->r2c, const_cast<double*>(in.data()),
                       reinterpret_cast<fftw_complex*>(out.data()));
}

void RealFft::inverse(std::span<const std::complex<double>> in,
                      std::span<double> out) const {
  std::vector<std::complex<double>> scratch(in.begin(), in.end());
  fftw_execute_dft_c2r(plans_->c2r, reinterpret_cast<fftw_complex*>(scratch.data()),
                       out.data());
  const double scale = 1.0 / static_cast<double>(size_);
  for (double& v : out) v *= scale;
}

}  // namespace xcorpus::detail
