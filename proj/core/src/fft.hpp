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

#include <complex>
#include <cstddef>
#include <memory>
#include <span>

namespace xcorpus::detail {

/// Real-input DFT of arbitrary size backed by FFTW. Plans are created once per
/// size (FFTW_ESTIMATE, unaligned) and shared; execution is thread-safe and
/// bitwise deterministic for a given size.
class RealFft {
 public:
  explicit RealFft(std::size_t size);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t size() const { return size_; }
  std::size_t bins() const { return size_ / 2 + 1; }

  /// in: size() reals; out: bins() complex. Unnormalized.
  void forward(std::span<const double> in, std::span<std::complex<double>> out) const;
  /// in: bins() complex; out: size() reals, scaled by 1/size().
  void inverse(std::span<const std::complex<double>> in, std::span<double> out) const;

 private:
  struct Plans;
  std::size_t size_;
  std::shared_ptr<const Plans> plans_;
};

}  // namespace xcorpus::detail
