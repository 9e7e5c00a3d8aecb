// Copyright 2026 The avac Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
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

namespace avac {

enum class ErrorCode {
  kNotFound,
  kUnsupportedFormat,
  kCorruptContainer,
  kTooShort,
  kLengthMismatch,
  kSilentInput,
  kRootFindingFailed,
  kTooFewSamples,
  kSingleClass,
  kDimensionMismatch,
  kLayoutMismatch,
  kMissingClass,
  kUnknownEnvironment,
  kInsufficientCentroids,
  kEmptyManifest,
  kEmptyInput,
  kMissingGenreColumn,
  kInvalidManifest,
  kInvalidConfig,
  kInvalidModel,
  kInvalidArgument,
  kIo,
};

inline std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotFound: return "NotFound";
    case ErrorCode::kUnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::kCorruptContainer: return "CorruptContainer";
    case ErrorCode::kTooShort: return "TooShort";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kSilentInput: return "SilentInput";
    case ErrorCode::kRootFindingFailed: return "RootFindingFailed";
    case ErrorCode::kTooFewSamples: return "TooFewSamples";
    case ErrorCode::kSingleClass: return "SingleClass";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kLayoutMismatch: return "LayoutMismatch";
    case ErrorCode::kMissingClass: return "MissingClass";
    case ErrorCode::kUnknownEnvironment: return "UnknownEnvironment";
    case ErrorCode::kInsufficientCentroids: return "InsufficientCentroids";
    case ErrorCode::kEmptyManifest: return "EmptyManifest";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kMissingGenreColumn: return "MissingGenreColumn";
    case ErrorCode::kInvalidManifest: return "InvalidManifest";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kInvalidModel: return "InvalidModel";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

// All library failures surface as this exception; code() identifies the
// failure class and what() carries the human-readable detail.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code),
        detail_(message) {}

  ErrorCode code() const noexcept { return code_; }
  // The message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace avac
