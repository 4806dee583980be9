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

#ifndef ASE_SRC_BINARY_IO_H_
#define ASE_SRC_BINARY_IO_H_

// Little-endian byte buffers for the checkpoint formats.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "ase/error.h"

namespace ase::detail {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

uint32_t Crc32(const uint8_t* data, size_t size);

class ByteWriter {
 public:
  void Raw(const void* p, size_t n) {
    const auto* b = static_cast<const uint8_t*>(p);
    bytes_.insert(bytes_.end(), b, b + n);
  }
  void Magic(std::string_view m) { Raw(m.data(), m.size()); }
  void U8(uint8_t v) { bytes_.push_back(v); }
  void U16(uint16_t v) { Raw(&v, sizeof v); }
  void U32(uint32_t v) { Raw(&v, sizeof v); }
  void F32(float v) { Raw(&v, sizeof v); }

  // Appends the CRC32 of everything written so far.
  void AppendCrc() { U32(Crc32(bytes_.data(), bytes_.size())); }

  const std::vector<uint8_t>& bytes() const { return bytes_; }
  void WriteFile(const std::filesystem::path& path) const;

 private:
  std::vector<uint8_t> bytes_;
};

class ByteReader {
 public:
  ByteReader(const uint8_t* data, size_t size) : data_(data), size_(size) {}

  void Raw(void* p, size_t n) {
    if (pos_ + n > size_) {
      throw Error(ErrorCode::kChecksumMismatch, "checkpoint ends early");
    }
    std::memcpy(p, data_ + pos_, n);
    pos_ += n;
  }
  uint8_t U8() { uint8_t v; Raw(&v, 1); return v; }
  uint16_t U16() { uint16_t v; Raw(&v, 2); return v; }
  uint32_t U32() { uint32_t v; Raw(&v, 4); return v; }
  float F32() { float v; Raw(&v, 4); return v; }
  size_t remaining() const { return size_ - pos_; }

 private:
  const uint8_t* data_;
  size_t size_;
  size_t pos_ = 0;
};

std::vector<uint8_t> ReadFile(const std::filesystem::path& path);

// Verifies magic and trailing CRC and returns a reader positioned after the
// magic over the CRC-covered bytes.
ByteReader OpenVerified(const std::vector<uint8_t>& bytes,
                        std::string_view magic, const std::string& name);

}  // namespace ase::detail

#endif  // ASE_SRC_BINARY_IO_H_
