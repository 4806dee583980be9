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

#ifndef ASE_CONFIG_H_
#define ASE_CONFIG_H_

#include <filesystem>
#include <string>
#include <string_view>

#include "ase/losses.h"
#include "ase/model.h"
#include "ase/train.h"

namespace ase {

struct RunConfig {
  ModelConfig model;
  TrainConfig train;
  SsimConfig ssim;
};

// Applies "key = value" lines on top of `base`. Blank lines and text after
// '#' are ignored. Keys are field names of TrainConfig, ModelConfig or
// SsimConfig ("mode" takes "triangular" or "constant"). Unknown keys,
// malformed numbers and failed validation throw kConfig.
RunConfig ParseConfig(std::string_view text, RunConfig base = {});
RunConfig LoadConfig(const std::filesystem::path& path, RunConfig base = {});

}  // namespace ase

#endif  // ASE_CONFIG_H_
