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

#ifndef ASE_CHECKPOINT_H_
#define ASE_CHECKPOINT_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "ase/model.h"

namespace ase {

// "ASE1" float32 checkpoint: magic, u32 version (1), u32 n_blocks,
// u32 latent_channels, u32 kernel_size, f32 norm_scale, then per block the
// tensors dw1, pw1, alpha, dw2, pw2 as (u32 rank, u32 dims[rank],
// f32 payload), and a trailing CRC32 of all preceding bytes.
inline constexpr uint32_t kCheckpointVersion = 1;

std::vector<uint8_t> EncodeCheckpoint(const ModelParams<float>& params);
ModelParams<float> DecodeCheckpoint(const std::vector<uint8_t>& bytes);

void SaveCheckpoint(const ModelParams<float>& params,
                    const std::filesystem::path& path);
// Throws kIoFailure, kBadMagic, kVersionUnsupported or kChecksumMismatch.
ModelParams<float> LoadCheckpoint(const std::filesystem::path& path);

// Bytes spent on tensor payloads alone (no headers, dims or CRC).
size_t CheckpointPayloadBytes(const ModelParams<float>& params);

}  // namespace ase

#endif  // ASE_CHECKPOINT_H_
