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

#include "ase/quantize.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <cstdlib>
#include <new>
#include <string>

#if defined(__linux__)
#include <sys/mman.h>
#endif

#include "ase/checkpoint.h"
#include "ase/error.h"
#include "ase/half.h"
#include "binary_io.h"
#include "conv_kernels.h"

namespace ase {
namespace {

enum DType : uint8_t { kInt8 = 0, kFloat32 = 1, kFloat16 = 2 };

constexpr uint32_t kQuantizedVersion = 1;

float MaxAbs(const float* p, size_t n) {
  float m = 0.0f;
  for (size_t i = 0; i < n; ++i) m = std::max(m, std::fabs(p[i]));
  return m;
}

float ScaleFor(float max_abs) { return max_abs > 0.0f ? max_abs / 127.0f : 1.0f; }

// Round half to even for |v| < 2^22, the same result lrintf gives under the
// default rounding mode. Adding and removing 1.5 * 2^23 pushes the fraction
// out of the mantissa, and the plain float ops vectorize.
inline float RoundEven(float v) {
  constexpr float kShift = 12582912.0f;
  return (v + kShift) - kShift;
}

// Uninitialized int32 scratch. Large buffers are 2 MiB aligned and marked
// for transparent huge pages, which cuts page-fault time on first touch.
class ScratchBuffer {
 public:
  explicit ScratchBuffer(size_t n) {
    constexpr size_t kHuge = size_t{2} << 20;
    const size_t bytes = (n * sizeof(int32_t) + kHuge - 1) / kHuge * kHuge;
    data_ = static_cast<int32_t*>(std::aligned_alloc(kHuge, bytes));
    if (data_ == nullptr) throw std::bad_alloc();
#ifdef MADV_HUGEPAGE
    madvise(data_, bytes, MADV_HUGEPAGE);
#endif
  }
  ~ScratchBuffer() { std::free(data_); }
  ScratchBuffer(const ScratchBuffer&) = delete;
  ScratchBuffer& operator=(const ScratchBuffer&) = delete;
  int32_t* get() const { return data_; }

 private:
  int32_t* data_ = nullptr;
};

// Rounds onto int16 storage, clamped to the int8 range. The clamp only
// guards against float error in the scale; DepthwiseConvInt8 relies on it.
inline int16_t ToInt8Range(float v) {
  return static_cast<int16_t>(
      static_cast<int32_t>(std::clamp(RoundEven(v), -127.0f, 127.0f)));
}

void QuantizeActivations(const float* src, size_t n, float inv_scale,
                         int16_t* dst) {
  for (size_t i = 0; i < n; ++i) dst[i] = ToInt8Range(src[i] * inv_scale);
}

// DepthwiseConv for inputs and weights in [-127, 127]. Taps are taken two at
// a time: a pair of products is at most 2 * 127 * 127 = 32258, so it is summed
// exactly in 16-bit lanes before widening into the int32 accumulator.
void DepthwiseConvInt8(const int16_t* padded, size_t rows, size_t cols,
                       size_t k, const int16_t* kernel, int32_t* out) {
  const size_t pc = cols + k - 1;
  const size_t taps = k * k;
  for (size_t r = 0; r < rows; ++r) {
    int32_t* o = out + r * cols;
    std::fill(o, o + cols, 0);
    size_t t = 0;
    for (; t + 1 < taps; t += 2) {
      const int16_t w0 = kernel[t];
      const int16_t w1 = kernel[t + 1];
      const int16_t* a = padded + (r + t / k) * pc + t % k;
      const int16_t* b = padded + (r + (t + 1) / k) * pc + (t + 1) % k;
      for (size_t c = 0; c < cols; ++c) {
        o[c] += static_cast<int16_t>(w0 * a[c] + w1 * b[c]);
      }
    }
    if (t < taps) {
      const int16_t w0 = kernel[t];
      const int16_t* a = padded + (r + t / k) * pc + t % k;
      for (size_t c = 0; c < cols; ++c) o[c] += static_cast<int16_t>(w0 * a[c]);
    }
  }
}

std::vector<int16_t> Widen(const QuantizedTensor& q) {
  return std::vector<int16_t>(q.values.begin(), q.values.end());
}

void WriteHeader(detail::ByteWriter& w, const ModelConfig& cfg,
                 float norm_scale) {
  w.Magic("ASEQ");
  w.U32(kQuantizedVersion);
  w.U32(static_cast<uint32_t>(cfg.n_blocks));
  w.U32(static_cast<uint32_t>(cfg.latent_channels));
  w.U32(static_cast<uint32_t>(cfg.kernel_size));
  w.F32(norm_scale);
}

void WriteShape(detail::ByteWriter& w, const std::vector<size_t>& shape) {
  w.U32(static_cast<uint32_t>(shape.size()));
  for (size_t d : shape) w.U32(static_cast<uint32_t>(d));
}

void WriteInt8(detail::ByteWriter& w, const QuantizedTensor& q) {
  w.U8(kInt8);
  WriteShape(w, q.shape);
  w.F32(q.scale);
  w.Raw(q.values.data(), q.values.size());
}

void WriteFloat32(detail::ByteWriter& w, const Tensor<float>& t) {
  w.U8(kFloat32);
  WriteShape(w, t.shape());
  w.Raw(t.data(), t.size() * sizeof(float));
}

void WriteFloat16(detail::ByteWriter& w, const Tensor<float>& t) {
  w.U8(kFloat16);
  WriteShape(w, t.shape());
  for (float v : t.values()) w.U16(FloatToHalf(v));
}

struct StoredTensor {
  DType dtype;
  Tensor<float> as_float;  // f32 / f16 payloads, widened
  QuantizedTensor as_int8;
};

StoredTensor ReadStored(detail::ByteReader& r,
                        const std::vector<size_t>& expected) {
  StoredTensor s;
  const uint8_t tag = r.U8();
  if (tag > kFloat16) {
    throw Error(ErrorCode::kShapeMismatch,
                "unknown tensor dtype " + std::to_string(tag));
  }
  s.dtype = static_cast<DType>(tag);
  std::vector<size_t> shape(r.U32());
  for (auto& d : shape) d = r.U32();
  if (shape != expected) {
    throw Error(ErrorCode::kShapeMismatch,
                "quantized tensor shape does not match its header");
  }
  const size_t n = Tensor<float>::ElementCount(shape);
  switch (s.dtype) {
    case kInt8:
      s.as_int8.shape = shape;
      s.as_int8.scale = r.F32();
      s.as_int8.values.resize(n);
      r.Raw(s.as_int8.values.data(), n);
      break;
    case kFloat32:
      s.as_float = Tensor<float>(shape);
      r.Raw(s.as_float.data(), n * sizeof(float));
      break;
    case kFloat16:
      s.as_float = Tensor<float>(shape);
      for (size_t i = 0; i < n; ++i) s.as_float[i] = HalfToFloat(r.U16());
      break;
  }
  return s;
}

Tensor<float> AsFloat(const StoredTensor& s) {
  return s.dtype == kInt8 ? Dequantize(s.as_int8) : s.as_float;
}

}  // namespace

QuantizedTensor QuantizeTensor(const Tensor<float>& t) {
  for (float v : t.values()) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::kNonFiniteInput, "cannot quantize non-finite values");
    }
  }
  QuantizedTensor q;
  q.shape = t.shape();
  q.scale = ScaleFor(MaxAbs(t.data(), t.size()));
  q.values.resize(t.size());
  for (size_t i = 0; i < t.size(); ++i) {
    const float v = std::round(t[i] / q.scale);
    q.values[i] = static_cast<int8_t>(std::clamp(v, -127.0f, 127.0f));
  }
  return q;
}

Tensor<float> Dequantize(const QuantizedTensor& q) {
  Tensor<float> t(q.shape);
  for (size_t i = 0; i < t.size(); ++i) t[i] = q.scale * q.values[i];
  return t;
}

QuantizedModel QuantizeModel(const ModelParams<float>& params) {
  QuantizedModel model{params.config, {}, params.norm_scale};
  for (const auto& b : params.blocks) {
    model.blocks.push_back({QuantizeTensor(b.dw1), QuantizeTensor(b.pw1),
                            b.alpha, QuantizeTensor(b.dw2),
                            QuantizeTensor(b.pw2)});
  }
  return model;
}

ModelParams<float> DequantizeModel(const QuantizedModel& model) {
  ModelParams<float> params{model.config, {}, model.norm_scale};
  for (const auto& b : model.blocks) {
    params.blocks.push_back({Dequantize(b.dw1), Dequantize(b.pw1), b.alpha,
                             Dequantize(b.dw2), Dequantize(b.pw2)});
  }
  return params;
}

Tensor<float> QuantizedForward(const QuantizedModel& model,
                               const Tensor<float>& x) {
  const ModelConfig& cfg = model.config;
  if (x.rank() != 3 || x.dim(0) != cfg.io_channels) {
    throw Error(ErrorCode::kShapeMismatch, "model input must be [io, F, B]");
  }
  if (x.dim(1) < cfg.kernel_size || x.dim(2) < cfg.kernel_size) {
    throw Error(ErrorCode::kShapeTooSmall,
                "spatial dims must be at least the kernel size");
  }
  RecordForwardCall(x.shape());

  const size_t io = cfg.io_channels;
  const size_t latent = cfg.latent_channels;
  const size_t rows = x.dim(1);
  const size_t cols = x.dim(2);
  const size_t k = cfg.kernel_size;
  const size_t k2 = k * k;
  const size_t pad = cfg.pad();
  const size_t plane = rows * cols;
  const size_t padded = (rows + 2 * pad) * (cols + 2 * pad);
  const size_t pc = cols + 2 * pad;

  std::vector<int16_t> q_in(plane);
  std::vector<int16_t> q_padded(padded);
  std::vector<int32_t> acc(plane);
  std::vector<float> d1(io * plane);
  std::vector<int16_t> q_d1(io * plane);
  std::vector<int32_t> h1_acc(plane);
  const ScratchBuffer d2_acc(latent * plane);
  std::vector<int32_t> out_acc(io * plane);

  Tensor<float> current = x;
  for (const QuantizedBlock& block : model.blocks) {
    const std::vector<int16_t> w_dw1 = Widen(block.dw1);
    const std::vector<int16_t> w_dw2 = Widen(block.dw2);

    // Depthwise 1 on the quantized block input.
    const float s_x = ScaleFor(MaxAbs(current.data(), current.size()));
    const float d1_factor = s_x * block.dw1.scale;
    for (size_t i = 0; i < io; ++i) {
      QuantizeActivations(current.plane(i).data(), plane, 1.0f / s_x,
                          q_in.data());
      detail::PadReplicate(q_in.data(), rows, cols, pad, q_padded.data());
      DepthwiseConvInt8(q_padded.data(), rows, cols, k,
                            w_dw1.data() + i * k2, acc.data());
      float* dst = d1.data() + i * plane;
      for (size_t p = 0; p < plane; ++p) dst[p] = acc[p] * d1_factor;
    }

    // Pointwise 1: quantize d1, then find the PReLU output range so the
    // latent tensor can be quantized with one scale.
    const float s_d1 = ScaleFor(MaxAbs(d1.data(), d1.size()));
    QuantizeActivations(d1.data(), d1.size(), 1.0f / s_d1, q_d1.data());
    const float h1_factor = s_d1 * block.pw1.scale;

    auto pointwise1 = [&](size_t c) {
      std::fill(h1_acc.begin(), h1_acc.end(), 0);
      for (size_t i = 0; i < io; ++i) {
        const int32_t w = block.pw1.values[c * io + i];
        const int16_t* src = q_d1.data() + i * plane;
        for (size_t p = 0; p < plane; ++p) h1_acc[p] += w * src[p];
      }
    };

    float h2_max = 0.0f;
    for (size_t c = 0; c < latent; ++c) {
      pointwise1(c);
      int32_t hi = 0, lo = 0;
      for (size_t p = 0; p < plane; ++p) {
        hi = std::max(hi, h1_acc[p]);
        lo = std::min(lo, h1_acc[p]);
      }
      const float pos = static_cast<float>(hi) * h1_factor;
      const float neg = std::fabs(block.alpha[c] * static_cast<float>(lo) * h1_factor);
      h2_max = std::max({h2_max, pos, neg});
    }
    const float s_h2 = ScaleFor(h2_max);
    const float inv_h2 = 1.0f / s_h2;

    // Depthwise 2 per latent channel, kept as int32 until the global
    // range of its output is known.
    int32_t d2_max = 0;
    for (size_t c = 0; c < latent; ++c) {
      pointwise1(c);
      const float a = block.alpha[c];
      for (size_t r = 0; r < rows; ++r) {
        int16_t* dst = q_padded.data() + (r + pad) * pc + pad;
        const int32_t* src = h1_acc.data() + r * cols;
        for (size_t col = 0; col < cols; ++col) {
          const float h = static_cast<float>(src[col]) * h1_factor;
          const float h2 = std::max(h, 0.0f) + a * std::min(h, 0.0f);
          dst[col] = ToInt8Range(h2 * inv_h2);
        }
      }
      detail::FillReplicateBorder(q_padded.data(), rows, cols, pad);
      int32_t* d2 = d2_acc.get() + c * plane;
      DepthwiseConvInt8(q_padded.data(), rows, cols, k,
                            w_dw2.data() + c * k2, d2);
      int32_t m = 0;
      for (size_t p = 0; p < plane; ++p) m = std::max(m, std::abs(d2[p]));
      d2_max = std::max(d2_max, m);
    }

    // Pointwise 2 on the requantized depthwise output.
    std::fill(out_acc.begin(), out_acc.end(), 0);
    float out_factor = 0.0f;
    if (d2_max > 0) {
      const float requant = 127.0f / static_cast<float>(d2_max);
      const float s_d2 =
          static_cast<float>(d2_max) * s_h2 * block.dw2.scale / 127.0f;
      out_factor = s_d2 * block.pw2.scale;
      // Tiled over positions so the accumulators stay cache resident.
      constexpr size_t kTile = 2048;
      for (size_t p0 = 0; p0 < plane; p0 += kTile) {
        const size_t len = std::min(kTile, plane - p0);
        for (size_t c = 0; c < latent; ++c) {
          const int32_t* d2 = d2_acc.get() + c * plane + p0;
          for (size_t p = 0; p < len; ++p) {
            acc[p] = static_cast<int32_t>(
                RoundEven(static_cast<float>(d2[p]) * requant));
          }
          for (size_t o = 0; o < io; ++o) {
            const int32_t w = block.pw2.values[o * latent + c];
            if (w == 0) continue;
            int32_t* dst = out_acc.data() + o * plane + p0;
            for (size_t p = 0; p < len; ++p) dst[p] += w * acc[p];
          }
        }
      }
    }

    for (size_t o = 0; o < io; ++o) {
      float* dst = current.plane(o).data();
      const int32_t* src = out_acc.data() + o * plane;
      for (size_t p = 0; p < plane; ++p) dst[p] += src[p] * out_factor;
    }
  }
  return current;
}

ModelParams<float> RoundWeightsToHalf(const ModelParams<float>& params) {
  ModelParams<float> out = params;
  for (auto& b : out.blocks) {
    for (Tensor<float>* t : {&b.dw1, &b.pw1, &b.dw2, &b.pw2}) {
      for (float& v : t->values()) v = HalfToFloat(FloatToHalf(v));
    }
  }
  return out;
}

std::vector<uint8_t> EncodeQuantizedModel(const QuantizedModel& model) {
  detail::ByteWriter w;
  WriteHeader(w, model.config, model.norm_scale);
  for (const auto& b : model.blocks) {
    WriteInt8(w, b.dw1);
    WriteInt8(w, b.pw1);
    WriteFloat32(w, b.alpha);
    WriteInt8(w, b.dw2);
    WriteInt8(w, b.pw2);
  }
  w.AppendCrc();
  return w.bytes();
}

std::vector<uint8_t> EncodeHalfModel(const ModelParams<float>& params) {
  detail::ByteWriter w;
  WriteHeader(w, params.config, params.norm_scale);
  for (const auto& b : params.blocks) {
    WriteFloat16(w, b.dw1);
    WriteFloat16(w, b.pw1);
    WriteFloat32(w, b.alpha);
    WriteFloat16(w, b.dw2);
    WriteFloat16(w, b.pw2);
  }
  w.AppendCrc();
  return w.bytes();
}

size_t QuantizedPayloadBytes(const QuantizedModel& model) {
  size_t n = 0;
  for (const auto& b : model.blocks) {
    for (const QuantizedTensor* q : {&b.dw1, &b.pw1, &b.dw2, &b.pw2}) {
      n += q->values.size() + sizeof(float);
    }
    n += b.alpha.size() * sizeof(float);
  }
  return n;
}

AnyModel DecodeAnyModel(const std::vector<uint8_t>& bytes) {
  if (bytes.size() >= 4 && std::memcmp(bytes.data(), "ASE1", 4) == 0) {
    return DecodeCheckpoint(bytes);
  }
  detail::ByteReader r = detail::OpenVerified(bytes, "ASEQ", "checkpoint");
  const uint32_t version = r.U32();
  if (version != kQuantizedVersion) {
    throw Error(ErrorCode::kVersionUnsupported,
                "quantized checkpoint version " + std::to_string(version));
  }
  ModelConfig cfg;
  cfg.n_blocks = r.U32();
  cfg.latent_channels = r.U32();
  cfg.kernel_size = r.U32();
  cfg.Validate();
  const float norm_scale = r.F32();

  // Shapes come from a zero model of the same config.
  const ModelParams<float> shapes = ZeroParams<float>(cfg);
  std::vector<StoredTensor> stored;
  ForEachTensor(shapes, [&](const Tensor<float>& t) {
    stored.push_back(ReadStored(r, t.shape()));
  });
  if (r.remaining() != 0) {
    throw Error(ErrorCode::kShapeMismatch, "trailing bytes in checkpoint");
  }

  bool all_int8 = true;
  bool any_int8 = false;
  for (size_t i = 0; i < stored.size(); ++i) {
    if (i % 5 == 2) continue;  // alpha
    all_int8 = all_int8 && stored[i].dtype == kInt8;
    any_int8 = any_int8 || stored[i].dtype == kInt8;
  }
  if (any_int8 && !all_int8) {
    throw Error(ErrorCode::kShapeMismatch, "mixed int8/float kernels");
  }
  if (all_int8) {
    QuantizedModel model{cfg, {}, norm_scale};
    for (size_t b = 0; b < cfg.n_blocks; ++b) {
      const StoredTensor* s = &stored[b * 5];
      model.blocks.push_back({s[0].as_int8, s[1].as_int8, AsFloat(s[2]),
                              s[3].as_int8, s[4].as_int8});
    }
    return model;
  }
  ModelParams<float> params{cfg, {}, norm_scale};
  for (size_t b = 0; b < cfg.n_blocks; ++b) {
    const StoredTensor* s = &stored[b * 5];
    params.blocks.push_back({AsFloat(s[0]), AsFloat(s[1]), AsFloat(s[2]),
                             AsFloat(s[3]), AsFloat(s[4])});
  }
  return params;
}

AnyModel LoadAnyModel(const std::filesystem::path& path) {
  try {
    return DecodeAnyModel(detail::ReadFile(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kIoFailure) throw;
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void SaveQuantizedModel(const QuantizedModel& model,
                        const std::filesystem::path& path) {
  detail::ByteWriter w;
  const auto bytes = EncodeQuantizedModel(model);
  w.Raw(bytes.data(), bytes.size());
  w.WriteFile(path);
}

void SaveHalfModel(const ModelParams<float>& params,
                   const std::filesystem::path& path) {
  detail::ByteWriter w;
  const auto bytes = EncodeHalfModel(params);
  w.Raw(bytes.data(), bytes.size());
  w.WriteFile(path);
}

Tensor<float> RunModel(const AnyModel& model, const Tensor<float>& x) {
  if (const auto* q = std::get_if<QuantizedModel>(&model)) {
    return QuantizedForward(*q, x);
  }
  return Forward(std::get<ModelParams<float>>(model), x);
}

const ModelConfig& ConfigOf(const AnyModel& model) {
  if (const auto* q = std::get_if<QuantizedModel>(&model)) return q->config;
  return std::get<ModelParams<float>>(model).config;
}

}  // namespace ase
