// Copyright 2026 The Audio Spectral Enhancement Authors. All Rights Reserved.
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

#include "ase/error.h"

namespace ase {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUsage: return "Usage";
    case ErrorCode::kConfig: return "ConfigError";
    case ErrorCode::kIoFailure: return "IoFailure";
    case ErrorCode::kMalformedWav: return "MalformedWav";
    case ErrorCode::kUnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::kEmptyClip: return "EmptyClip";
    case ErrorCode::kEncoderFailure: return "EncoderFailure";
    case ErrorCode::kPairLengthMismatch: return "PairLengthMismatch";
    case ErrorCode::kClipTooShort: return "ClipTooShort";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kShapeTooSmall: return "ShapeTooSmall";
    case ErrorCode::kCacheMismatch: return "CacheMismatch";
    case ErrorCode::kBadMagic: return "BadMagic";
    case ErrorCode::kVersionUnsupported: return "VersionUnsupported";
    case ErrorCode::kChecksumMismatch: return "ChecksumMismatch";
    case ErrorCode::kConstantTarget: return "ConstantTarget";
    case ErrorCode::kTooSmall: return "TooSmall";
    case ErrorCode::kEmptyTrainSet: return "EmptyTrainSet";
    case ErrorCode::kNonFiniteInput: return "NonFiniteInput";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kSilentReference: return "SilentReference";
    case ErrorCode::kTooShort: return "TooShort";
    case ErrorCode::kInternal: return "Internal";
  }
  return "Internal";
}

int ExitStatusFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUsage:
    case ErrorCode::kConfig:
      return 1;
    case ErrorCode::kInternal:
      return 3;
    default:
      return 2;
  }
}

}  // namespace ase
