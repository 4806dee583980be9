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

#include "ase/model.h"

#include <atomic>
#include <cmath>
#include <mutex>
#include <string>

#include "ase/error.h"
#include "ase/random.h"
#include "conv_kernels.h"

namespace ase {
namespace {

std::atomic<uint64_t> g_forward_calls{0};
std::mutex g_shape_mutex;
std::vector<size_t> g_last_shape;

void CheckInput(const ModelConfig& cfg, const std::vector<size_t>& shape) {
  if (shape.size() != 3 || shape[0] != cfg.io_channels) {
    throw Error(ErrorCode::kShapeMismatch,
                "model input must be [" + std::to_string(cfg.io_channels) +
                    ", frames, bins]");
  }
  if (shape[1] < cfg.kernel_size || shape[2] < cfg.kernel_size) {
    throw Error(ErrorCode::kShapeTooSmall,
                "spatial dims must be at least the kernel size");
  }
}

template <typename T>
void FillUniform(Tensor<T>& t, double bound, Rng& rng) {
  for (auto& v : t.values()) v = static_cast<T>(rng.Uniform(-bound, bound));
}

// Scratch planes for one block evaluation.
template <typename T>
struct Workspace {
  Workspace(size_t rows, size_t cols, size_t pad)
      : plane(rows * cols),
        padded((rows + 2 * pad) * (cols + 2 * pad)),
        h1(plane),
        h2_padded(padded, T(0)),
        d2(plane) {}
  size_t plane;
  size_t padded;
  std::vector<T> h1;
  std::vector<T> h2_padded;
  std::vector<T> d2;
};

// h1 = pw1[c] . d1 and h2 = PReLU(h1) written into the interior of
// h2_padded, then the border replicated.
template <typename T>
void LatentChannel(const BlockParams<T>& block, const ModelConfig& cfg,
                   size_t c, const Tensor<T>& d1, size_t rows, size_t cols,
                   Workspace<T>& ws) {
  const size_t io = cfg.io_channels;
  const size_t pad = cfg.pad();
  const size_t pc = cols + 2 * pad;
  T* h1 = ws.h1.data();
  std::fill(h1, h1 + ws.plane, T(0));
  for (size_t i = 0; i < io; ++i) {
    const T w = block.pw1.at(c, i);
    const T* src = d1.plane(i).data();
    for (size_t p = 0; p < ws.plane; ++p) h1[p] += w * src[p];
  }
  const T a = block.alpha[c];
  for (size_t r = 0; r < rows; ++r) {
    const T* src = h1 + r * cols;
    T* dst = ws.h2_padded.data() + (r + pad) * pc + pad;
    for (size_t col = 0; col < cols; ++col) {
      // Branch-free PReLU so the loop vectorizes.
      const T v = src[col];
      dst[col] = std::max(v, T(0)) + a * std::min(v, T(0));
    }
  }
  detail::FillReplicateBorder(ws.h2_padded.data(), rows, cols, pad);
}

}  // namespace

void ModelConfig::Validate() const {
  if (n_blocks < 1) throw Error(ErrorCode::kConfig, "n_blocks must be >= 1");
  if (latent_channels < 1) {
    throw Error(ErrorCode::kConfig, "latent_channels must be >= 1");
  }
  if (kernel_size % 2 == 0) {
    throw Error(ErrorCode::kConfig, "kernel_size must be odd");
  }
  if (io_channels < 1) throw Error(ErrorCode::kConfig, "io_channels must be >= 1");
}

uint64_t ForwardCallCount() { return g_forward_calls.load(); }

std::vector<size_t> LastForwardShape() {
  std::lock_guard<std::mutex> lock(g_shape_mutex);
  return g_last_shape;
}

void RecordForwardCall(const std::vector<size_t>& shape) {
  g_forward_calls.fetch_add(1);
  std::lock_guard<std::mutex> lock(g_shape_mutex);
  g_last_shape = shape;
}

template <typename T>
ModelParams<T> ZeroParams(const ModelConfig& cfg) {
  cfg.Validate();
  const size_t k = cfg.kernel_size;
  const size_t io = cfg.io_channels;
  const size_t latent = cfg.latent_channels;
  ModelParams<T> params;
  params.config = cfg;
  for (size_t b = 0; b < cfg.n_blocks; ++b) {
    params.blocks.push_back({Tensor<T>({io, k, k}), Tensor<T>({latent, io}),
                             Tensor<T>({latent}), Tensor<T>({latent, k, k}),
                             Tensor<T>({io, latent})});
  }
  return params;
}

template <typename T>
ModelParams<T> InitParams(const ModelConfig& cfg, uint64_t seed) {
  ModelParams<T> params = ZeroParams<T>(cfg);
  Rng rng(seed);
  const double k2 = static_cast<double>(cfg.kernel_size * cfg.kernel_size);
  const double depthwise_bound = std::sqrt(6.0 / k2);
  for (auto& b : params.blocks) {
    FillUniform(b.dw1, depthwise_bound, rng);
    FillUniform(b.pw1, std::sqrt(6.0 / static_cast<double>(cfg.io_channels)),
                rng);
    FillUniform(b.dw2, depthwise_bound, rng);
    FillUniform(b.pw2,
                std::sqrt(6.0 / static_cast<double>(cfg.latent_channels)), rng);
  }
  return params;
}

template <typename T>
Tensor<T> Forward(const ModelParams<T>& params, const Tensor<T>& x,
                  ForwardCache<T>* cache) {
  const ModelConfig& cfg = params.config;
  CheckInput(cfg, x.shape());
  RecordForwardCall(x.shape());

  const size_t io = cfg.io_channels;
  const size_t rows = x.dim(1);
  const size_t cols = x.dim(2);
  const size_t k = cfg.kernel_size;
  const size_t pad = cfg.pad();
  const size_t k2 = k * k;

  if (cache != nullptr) {
    cache->config = cfg;
    cache->shape = x.shape();
    cache->padded_inputs.clear();
    cache->depthwise1.clear();
  }

  Workspace<T> ws(rows, cols, pad);
  Tensor<T> current = x;
  for (const auto& block : params.blocks) {
    Tensor<T> xp({io, rows + 2 * pad, cols + 2 * pad});
    Tensor<T> d1({io, rows, cols});
    for (size_t i = 0; i < io; ++i) {
      detail::PadReplicate(current.plane(i).data(), rows, cols, pad,
                           xp.plane(i).data());
      detail::DepthwiseConv(xp.plane(i).data(), rows, cols, k,
                            block.dw1.data() + i * k2, d1.plane(i).data());
    }

    Tensor<T> out = current;  // identity skip
    for (size_t c = 0; c < cfg.latent_channels; ++c) {
      LatentChannel(block, cfg, c, d1, rows, cols, ws);
      detail::DepthwiseConv(ws.h2_padded.data(), rows, cols, k,
                            block.dw2.data() + c * k2, ws.d2.data());
      for (size_t o = 0; o < io; ++o) {
        const T w = block.pw2.at(o, c);
        if (w == T(0)) continue;
        T* dst = out.plane(o).data();
        const T* src = ws.d2.data();
        for (size_t p = 0; p < ws.plane; ++p) dst[p] += w * src[p];
      }
    }

    if (cache != nullptr) {
      cache->padded_inputs.push_back(std::move(xp));
      cache->depthwise1.push_back(std::move(d1));
    }
    current = std::move(out);
  }
  return current;
}

template <typename T>
BackwardResult<T> Backward(const ModelParams<T>& params,
                           const ForwardCache<T>& cache, const Tensor<T>& dy) {
  const ModelConfig& cfg = params.config;
  if (!(cache.config == cfg) ||
      cache.padded_inputs.size() != cfg.n_blocks ||
      cache.depthwise1.size() != cfg.n_blocks || dy.shape() != cache.shape) {
    throw Error(ErrorCode::kCacheMismatch,
                "forward cache does not match these params or gradient");
  }

  const size_t io = cfg.io_channels;
  const size_t rows = dy.dim(1);
  const size_t cols = dy.dim(2);
  const size_t k = cfg.kernel_size;
  const size_t pad = cfg.pad();
  const size_t k2 = k * k;

  BackwardResult<T> result{ZeroParams<T>(cfg), Tensor<T>()};
  result.grads.norm_scale = params.norm_scale;

  Workspace<T> ws(rows, cols, pad);
  std::vector<T> g_d2(ws.plane);
  std::vector<T> g_h2_padded(ws.padded);
  std::vector<T> g_h1(ws.plane);
  std::vector<T> scratch(cols);

  Tensor<T> g_out = dy;
  for (size_t bi = cfg.n_blocks; bi-- > 0;) {
    const BlockParams<T>& block = params.blocks[bi];
    BlockParams<T>& grad = result.grads.blocks[bi];
    const Tensor<T>& xp = cache.padded_inputs[bi];
    const Tensor<T>& d1 = cache.depthwise1[bi];

    Tensor<T> g_in = g_out;  // identity skip
    Tensor<T> g_d1({io, rows, cols});

    for (size_t c = 0; c < cfg.latent_channels; ++c) {
      LatentChannel(block, cfg, c, d1, rows, cols, ws);
      detail::DepthwiseConv(ws.h2_padded.data(), rows, cols, k,
                            block.dw2.data() + c * k2, ws.d2.data());

      std::fill(g_d2.begin(), g_d2.end(), T(0));
      for (size_t o = 0; o < io; ++o) {
        const T* g = g_out.plane(o).data();
        grad.pw2.at(o, c) +=
            static_cast<T>(detail::Dot(g, ws.d2.data(), ws.plane));
        const T w = block.pw2.at(o, c);
        for (size_t p = 0; p < ws.plane; ++p) g_d2[p] += w * g[p];
      }

      detail::DepthwiseConvAdjointKernel(g_d2.data(), ws.h2_padded.data(),
                                         rows, cols, k,
                                         grad.dw2.data() + c * k2,
                                         scratch.data());
      std::fill(g_h2_padded.begin(), g_h2_padded.end(), T(0));
      detail::DepthwiseConvAdjointInput(g_d2.data(), rows, cols, k,
                                        block.dw2.data() + c * k2,
                                        g_h2_padded.data());
      // g_h1 temporarily holds dL/dh2.
      std::fill(g_h1.begin(), g_h1.end(), T(0));
      detail::PadReplicateAdjoint(g_h2_padded.data(), rows, cols, pad,
                                  g_h1.data());

      const T a = block.alpha[c];
      double g_alpha = 0.0;
      const T* h1 = ws.h1.data();
      for (size_t p = 0; p < ws.plane; ++p) {
        if (h1[p] < T(0)) {
          g_alpha += static_cast<double>(g_h1[p]) * h1[p];
          g_h1[p] *= a;
        }
      }
      grad.alpha[c] += static_cast<T>(g_alpha);

      for (size_t i = 0; i < io; ++i) {
        grad.pw1.at(c, i) +=
            static_cast<T>(detail::Dot(g_h1.data(), d1.plane(i).data(), ws.plane));
        const T w = block.pw1.at(c, i);
        T* dst = g_d1.plane(i).data();
        for (size_t p = 0; p < ws.plane; ++p) dst[p] += w * g_h1[p];
      }
    }

    std::vector<T> g_xp(ws.padded);
    for (size_t i = 0; i < io; ++i) {
      detail::DepthwiseConvAdjointKernel(g_d1.plane(i).data(),
                                         xp.plane(i).data(), rows, cols, k,
                                         grad.dw1.data() + i * k2,
                                         scratch.data());
      std::fill(g_xp.begin(), g_xp.end(), T(0));
      detail::DepthwiseConvAdjointInput(g_d1.plane(i).data(), rows, cols, k,
                                        block.dw1.data() + i * k2,
                                        g_xp.data());
      detail::PadReplicateAdjoint(g_xp.data(), rows, cols, pad,
                                  g_in.plane(i).data());
    }
    g_out = std::move(g_in);
  }
  result.dx = std::move(g_out);
  return result;
}

template ModelParams<float> ZeroParams(const ModelConfig&);
template ModelParams<double> ZeroParams(const ModelConfig&);
template ModelParams<float> InitParams(const ModelConfig&, uint64_t);
template ModelParams<double> InitParams(const ModelConfig&, uint64_t);
template Tensor<float> Forward(const ModelParams<float>&, const Tensor<float>&,
                               ForwardCache<float>*);
template Tensor<double> Forward(const ModelParams<double>&,
                                const Tensor<double>&, ForwardCache<double>*);
template BackwardResult<float> Backward(const ModelParams<float>&,
                                        const ForwardCache<float>&,
                                        const Tensor<float>&);
template BackwardResult<double> Backward(const ModelParams<double>&,
                                         const ForwardCache<double>&,
                                         const Tensor<double>&);

}  // namespace ase
