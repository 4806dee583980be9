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

#ifndef ASE_ERROR_H_
#define ASE_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace ase {

// Every failure surfaced by the library carries one of these codes. The CLI
// prints the code name verbatim and maps it to an exit status.
enum class ErrorCode {
  kUsage,
  kConfig,
  kIoFailure,
  kMalformedWav,
  kUnsupportedFormat,
  kEmptyClip,
  kEncoderFailure,
  kPairLengthMismatch,
  kClipTooShort,
  kShapeMismatch,
  kShapeTooSmall,
  kCacheMismatch,
  kBadMagic,
  kVersionUnsupported,
  kChecksumMismatch,
  kConstantTarget,
  kTooSmall,
  kEmptyTrainSet,
  kNonFiniteInput,
  kLengthMismatch,
  kSilentReference,
  kTooShort,
  kInternal,
};

std::string_view ErrorCodeName(ErrorCode code);

// 1 = usage error, 2 = data error, 3 = internal error.
int ExitStatusFor(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ase

#endif  // ASE_ERROR_H_
