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

#ifndef ASE_MODEL_H_
#define ASE_MODEL_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "ase/tensor.h"

namespace ase {

// A block is two depthwise-separable convolutions around a per-channel
// PReLU, io -> latent -> io, with an identity skip around the block.
struct ModelConfig {
  size_t n_blocks = 1;
  size_t latent_channels = 256;
  size_t kernel_size = 5;
  size_t io_channels = 2;

  size_t pad() const { return kernel_size / 2; }
  void Validate() const;
  bool operator==(const ModelConfig&) const = default;
};

template <typename T>
struct BlockParams {
  Tensor<T> dw1;    // [io, k, k]
  Tensor<T> pw1;    // [latent, io]
  Tensor<T> alpha;  // [latent]
  Tensor<T> dw2;    // [latent, k, k]
  Tensor<T> pw2;    // [io, latent]

  bool operator==(const BlockParams&) const = default;
};

inline constexpr std::array<std::string_view, 5> kBlockTensorNames = {
    "dw1", "pw1", "alpha", "dw2", "pw2"};

template <typename T>
struct ModelParams {
  ModelConfig config;
  std::vector<BlockParams<T>> blocks;
  // Mean per-clip normalization scale seen in training. Informational:
  // inference normalizes each clip by its own scale.
  float norm_scale = 1.0f;

  bool operator==(const ModelParams&) const = default;
};

// Visits dw1, pw1, alpha, dw2, pw2 of every block in order. Works for const
// and mutable params alike.
template <typename Params, typename Fn>
void ForEachTensor(Params& params, Fn&& fn) {
  for (auto& b : params.blocks) {
    fn(b.dw1);
    fn(b.pw1);
    fn(b.alpha);
    fn(b.dw2);
    fn(b.pw2);
  }
}

template <typename A, typename B, typename Fn>
void ForEachTensorPair(A& a, B& b, Fn&& fn) {
  for (size_t i = 0; i < a.blocks.size(); ++i) {
    fn(a.blocks[i].dw1, b.blocks[i].dw1);
    fn(a.blocks[i].pw1, b.blocks[i].pw1);
    fn(a.blocks[i].alpha, b.blocks[i].alpha);
    fn(a.blocks[i].dw2, b.blocks[i].dw2);
    fn(a.blocks[i].pw2, b.blocks[i].pw2);
  }
}

template <typename T>
size_t ParameterCount(const ModelParams<T>& params) {
  size_t n = 0;
  ForEachTensor(params, [&](const Tensor<T>& t) { n += t.size(); });
  return n;
}

// All tensors zero. Each block is then an exact identity through its skip.
template <typename T>
ModelParams<T> ZeroParams(const ModelConfig& cfg);

// He-uniform kernels, U(-sqrt(6 / fan_in), sqrt(6 / fan_in)); fan_in is
// k * k for depthwise kernels (one input channel per group) and the input
// channel count for pointwise kernels. PReLU slopes start at 0.
template <typename T>
ModelParams<T> InitParams(const ModelConfig& cfg, uint64_t seed);

template <typename To, typename From>
ModelParams<To> CastParams(const ModelParams<From>& params) {
  ModelParams<To> out{params.config, {}, params.norm_scale};
  for (const auto& b : params.blocks) {
    out.blocks.push_back({TensorCast<To>(b.dw1), TensorCast<To>(b.pw1),
                          TensorCast<To>(b.alpha), TensorCast<To>(b.dw2),
                          TensorCast<To>(b.pw2)});
  }
  return out;
}

// Per-block state kept by a training forward pass: the replicate-padded
// block input and the first depthwise output. Latent activations are
// recomputed channel by channel during the backward pass.
template <typename T>
struct ForwardCache {
  ModelConfig config;
  std::vector<size_t> shape;
  std::vector<Tensor<T>> padded_inputs;  // [io, F + 2p, B + 2p]
  std::vector<Tensor<T>> depthwise1;     // [io, F, B]
};

// x is [io, F, B] with F, B >= kernel_size; the output has the same shape.
// When cache is non-null it is filled for Backward.
template <typename T>
Tensor<T> Forward(const ModelParams<T>& params, const Tensor<T>& x,
                  ForwardCache<T>* cache = nullptr);

template <typename T>
struct BackwardResult {
  ModelParams<T> grads;
  Tensor<T> dx;
};

// Exact reverse-mode gradients of a scalar loss given dL/dy.
template <typename T>
BackwardResult<T> Backward(const ModelParams<T>& params,
                           const ForwardCache<T>& cache, const Tensor<T>& dy);

// Instrumentation shared by the float and quantized forward paths.
uint64_t ForwardCallCount();
std::vector<size_t> LastForwardShape();
void RecordForwardCall(const std::vector<size_t>& shape);

extern template ModelParams<float> ZeroParams(const ModelConfig&);
extern template ModelParams<double> ZeroParams(const ModelConfig&);
extern template ModelParams<float> InitParams(const ModelConfig&, uint64_t);
extern template ModelParams<double> InitParams(const ModelConfig&, uint64_t);
extern template Tensor<float> Forward(const ModelParams<float>&,
                                      const Tensor<float>&,
                                      ForwardCache<float>*);
extern template Tensor<double> Forward(const ModelParams<double>&,
                                       const Tensor<double>&,
                                       ForwardCache<double>*);
extern template BackwardResult<float> Backward(const ModelParams<float>&,
                                               const ForwardCache<float>&,
                                               const Tensor<float>&);
extern template BackwardResult<double> Backward(const ModelParams<double>&,
                                                const ForwardCache<double>&,
                                                const Tensor<double>&);

}  // namespace ase

#endif  // ASE_MODEL_H_
