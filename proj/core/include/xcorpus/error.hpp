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

#include <stdexcept>
#include <string>
#include <string_view>

namespace xcorpus {

/// Failure categories surfaced by every module. The CLI maps any of these to
/// a nonzero exit status with the message as diagnostic.
enum class ErrorKind {
  kRateMismatch,
  kChannelMismatch,
  kUnsupportedEncoding,
  kParseError,
  kIoError,
  kDegenerateSignal,
  kConfigError,
  kSynthesisError,
  kEmptyCorpus,
  kShapeError,
  kSignalTooShort,
  kEmptyLossSupport,
  kInvalidInput,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kRateMismatch: return "RateMismatch";
    case ErrorKind::kChannelMismatch: return "ChannelMismatch";
    case ErrorKind::kUnsupportedEncoding: return "UnsupportedEncoding";
    case ErrorKind::kParseError: return "ParseError";
    case ErrorKind::kIoError: return "IoError";
    case ErrorKind::kDegenerateSignal: return "DegenerateSignal";
    case ErrorKind::kConfigError: return "ConfigError";
    case ErrorKind::kSynthesisError: return "SynthesisError";
    case ErrorKind::kEmptyCorpus: return "EmptyCorpus";
    case ErrorKind::kShapeError: return "ShapeError";
    case ErrorKind::kSignalTooShort: return "SignalTooShort";
    case ErrorKind::kEmptyLossSupport: return "EmptyLossSupport";
    case ErrorKind::kInvalidInput: return "InvalidInput";
  }
  return "Unknown";
}

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace xcorpus
