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

#include "ase/checkpoint.h"

#include <zlib.h>

#include <fstream>
#include <iterator>
#include <string>

#include "ase/error.h"
#include "binary_io.h"

namespace ase {
namespace detail {

uint32_t Crc32(const uint8_t* data, size_t size) {
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, data, static_cast<uInt>(size));
  return static_cast<uint32_t>(crc);
}

void ByteWriter::WriteFile(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes_.data()),
            static_cast<std::streamsize>(bytes_.size()));
  if (!out) throw Error(ErrorCode::kIoFailure, "cannot write " + path.string());
}

std::vector<uint8_t> ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoFailure, "cannot open " + path.string());
  return std::vector<uint8_t>(std::istreambuf_iterator<char>(in), {});
}

ByteReader OpenVerified(const std::vector<uint8_t>& bytes,
                        std::string_view magic, const std::string& name) {
  const size_t m = magic.size();
  if (bytes.size() >= m &&
      std::memcmp(bytes.data(), magic.data(), m) != 0) {
    throw Error(ErrorCode::kBadMagic, name + ": not a " + std::string(magic) +
                                          " checkpoint");
  }
  if (bytes.size() < m + 4) {
    throw Error(ErrorCode::kChecksumMismatch, name + ": truncated checkpoint");
  }
  const size_t body = bytes.size() - 4;
  uint32_t stored;
  std::memcpy(&stored, bytes.data() + body, 4);
  if (stored != Crc32(bytes.data(), body)) {
    throw Error(ErrorCode::kChecksumMismatch, name + ": CRC32 mismatch");
  }
  return ByteReader(bytes.data() + m, body - m);
}

}  // namespace detail

namespace {

void WriteTensor(detail::ByteWriter& w, const Tensor<float>& t) {
  w.U32(static_cast<uint32_t>(t.rank()));
  for (size_t d : t.shape()) w.U32(static_cast<uint32_t>(d));
  w.Raw(t.data(), t.size() * sizeof(float));
}

void ReadTensor(detail::ByteReader& r, Tensor<float>& expected) {
  const uint32_t rank = r.U32();
  std::vector<size_t> shape(rank);
  for (auto& d : shape) d = r.U32();
  if (shape != expected.shape()) {
    throw Error(ErrorCode::kShapeMismatch,
                "checkpoint tensor shape does not match its header");
  }
  r.Raw(expected.data(), expected.size() * sizeof(float));
}

}  // namespace

std::vector<uint8_t> EncodeCheckpoint(const ModelParams<float>& params) {
  detail::ByteWriter w;
  w.Magic("ASE1");
  w.U32(kCheckpointVersion);
  w.U32(static_cast<uint32_t>(params.config.n_blocks));
  w.U32(static_cast<uint32_t>(params.config.latent_channels));
  w.U32(static_cast<uint32_t>(params.config.kernel_size));
  w.F32(params.norm_scale);
  ForEachTensor(params, [&](const Tensor<float>& t) { WriteTensor(w, t); });
  w.AppendCrc();
  return w.bytes();
}

ModelParams<float> DecodeCheckpoint(const std::vector<uint8_t>& bytes) {
  detail::ByteReader r = detail::OpenVerified(bytes, "ASE1", "checkpoint");
  const uint32_t version = r.U32();
  if (version != kCheckpointVersion) {
    throw Error(ErrorCode::kVersionUnsupported,
                "checkpoint version " + std::to_string(version));
  }
  ModelConfig cfg;
  cfg.n_blocks = r.U32();
  cfg.latent_channels = r.U32();
  cfg.kernel_size = r.U32();
  cfg.Validate();
  const float norm_scale = r.F32();
  ModelParams<float> params = ZeroParams<float>(cfg);
  params.norm_scale = norm_scale;
  ForEachTensor(params, [&](Tensor<float>& t) { ReadTensor(r, t); });
  if (r.remaining() != 0) {
    throw Error(ErrorCode::kShapeMismatch, "trailing bytes in checkpoint");
  }
  return params;
}

void SaveCheckpoint(const ModelParams<float>& params,
                    const std::filesystem::path& path) {
  detail::ByteWriter w;
  const auto bytes = EncodeCheckpoint(params);
  w.Raw(bytes.data(), bytes.size());
  w.WriteFile(path);
}

ModelParams<float> LoadCheckpoint(const std::filesystem::path& path) {
  try {
    return DecodeCheckpoint(detail::ReadFile(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kIoFailure) throw;
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

size_t CheckpointPayloadBytes(const ModelParams<float>& params) {
  return ParameterCount(params) * sizeof(float);
}

}  // namespace ase
