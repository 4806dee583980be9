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

#ifndef ASE_QUANTIZE_H_
#define ASE_QUANTIZE_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <variant>
#include <vector>

#include "ase/model.h"
#include "ase/tensor.h"

namespace ase {

// Symmetric per-tensor int8: value ~= scale * q, |q| <= 127, zero point 0.
struct QuantizedTensor {
  std::vector<int8_t> values;
  float scale = 1.0f;
  std::vector<size_t> shape;

  bool operator==(const QuantizedTensor&) const = default;
};

// scale = max|t| / 127 (1 for an all-zero tensor); q = round(t / scale)
// clamped to [-127, 127]. Throws kNonFiniteInput on NaN or infinity.
QuantizedTensor QuantizeTensor(const Tensor<float>& t);
Tensor<float> Dequantize(const QuantizedTensor& q);

struct QuantizedBlock {
  QuantizedTensor dw1;
  QuantizedTensor pw1;
  Tensor<float> alpha;
  QuantizedTensor dw2;
  QuantizedTensor pw2;

  bool operator==(const QuantizedBlock&) const = default;
};

struct QuantizedModel {
  ModelConfig config;
  std::vector<QuantizedBlock> blocks;
  float norm_scale = 1.0f;

  bool operator==(const QuantizedModel&) const = default;
};

QuantizedModel QuantizeModel(const ModelParams<float>& params);
ModelParams<float> DequantizeModel(const QuantizedModel& model);

// Forward pass with int8 weights. Every convolution input is quantized on
// the fly with a per-tensor scale from its live max-abs, products are
// accumulated in int32 and the result is rescaled to float. PReLU and the
// skip additions stay in float.
Tensor<float> QuantizedForward(const QuantizedModel& model,
                               const Tensor<float>& x);

// Worst-case |accumulator| of one integer convolution stage.
inline constexpr int64_t kMaxDepthwiseAccumulator = 127LL * 127 * 25;
inline constexpr int64_t kMaxSeparableAccumulator = 127LL * 127 * 25 * 256;
static_assert(kMaxSeparableAccumulator < (int64_t{1} << 31),
              "int32 accumulators overflow for 5x5 kernels over 256 channels");

// Weights rounded through IEEE binary16 (alpha stays float32).
ModelParams<float> RoundWeightsToHalf(const ModelParams<float>& params);

// "ASEQ" checkpoint: magic, u32 version (1), u32 n_blocks,
// u32 latent_channels, u32 kernel_size, f32 norm_scale, then per tensor
// (u8 dtype: 0 = int8 + f32 scale, 1 = f32, 2 = f16; u32 rank; u32 dims;
// f32 scale if int8; payload), and a trailing CRC32.
std::vector<uint8_t> EncodeQuantizedModel(const QuantizedModel& model);
std::vector<uint8_t> EncodeHalfModel(const ModelParams<float>& params);

// Payload bytes only: int8 values, their f32 scales and f32 alphas.
size_t QuantizedPayloadBytes(const QuantizedModel& model);

// Either a float model (ASE1, or ASEQ with f16 weights) or an int8 model.
using AnyModel = std::variant<ModelParams<float>, QuantizedModel>;

AnyModel DecodeAnyModel(const std::vector<uint8_t>& bytes);
AnyModel LoadAnyModel(const std::filesystem::path& path);
void SaveQuantizedModel(const QuantizedModel& model,
                        const std::filesystem::path& path);
void SaveHalfModel(const ModelParams<float>& params,
                   const std::filesystem::path& path);

Tensor<float> RunModel(const AnyModel& model, const Tensor<float>& x);
const ModelConfig& ConfigOf(const AnyModel& model);

}  // namespace ase

#endif  // ASE_QUANTIZE_H_
