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

#include "ase/audio_io.h"

#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "ase/error.h"
#include "ase/parallel.h"
#include "ase/random.h"

namespace ase {
namespace {

namespace fs = std::filesystem;

uint32_t ReadU32(const uint8_t* p) {
  return uint32_t{p[0]} | (uint32_t{p[1]} << 8) | (uint32_t{p[2]} << 16) |
         (uint32_t{p[3]} << 24);
}

uint16_t ReadU16(const uint8_t* p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

void PutU32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>(v >> (8 * i)));
}

void PutU16(std::string& out, uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>(v >> 8));
}

std::vector<uint8_t> ReadFileBytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoFailure, "cannot open " + path.string());
  return std::vector<uint8_t>(std::istreambuf_iterator<char>(in), {});
}

// KSDATAFORMAT_SUBTYPE_PCM tail shared by WAVE_FORMAT_EXTENSIBLE files.
constexpr std::array<uint8_t, 14> kPcmGuidTail = {
    0x00, 0x00, 0x00, 0x00, 0x10, 0x00, 0x80,
    0x00, 0x00, 0xAA, 0x00, 0x38, 0x9B, 0x71};

std::string ShellQuote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out.push_back(c);
    }
  }
  out.push_back('\'');
  return out;
}

void ReplaceAll(std::string& s, std::string_view from, const std::string& to) {
  size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
}

std::string IdFor(const fs::path& source_dir, const fs::path& file) {
  std::string id = fs::relative(file, source_dir).replace_extension().string();
  std::replace(id.begin(), id.end(), '/', '_');
  return id;
}

}  // namespace

AudioClip ReadWav(const fs::path& path) {
  const std::vector<uint8_t> bytes = ReadFileBytes(path);
  const std::string name = path.string();
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw Error(ErrorCode::kMalformedWav, name + ": missing RIFF/WAVE magic");
  }

  bool have_fmt = false;
  int sample_rate = 0;
  const uint8_t* data = nullptr;
  size_t data_size = 0;
  size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const uint8_t* chunk = bytes.data() + pos;
    uint64_t size = ReadU32(chunk + 4);
    const size_t body = pos + 8;
    const size_t remaining = bytes.size() - body;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16 || size > remaining) {
        throw Error(ErrorCode::kMalformedWav, name + ": truncated fmt chunk");
      }
      const uint8_t* f = bytes.data() + body;
      uint16_t format = ReadU16(f);
      const uint16_t channels = ReadU16(f + 2);
      sample_rate = static_cast<int>(ReadU32(f + 4));
      const uint16_t bits = ReadU16(f + 14);
      if (format == 0xFFFE && size >= 40 &&
          std::equal(kPcmGuidTail.begin(), kPcmGuidTail.end(), f + 26)) {
        format = ReadU16(f + 24);
      }
      if (format != 1 || bits != 16) {
        throw Error(ErrorCode::kUnsupportedFormat,
                    name + ": only PCM 16-bit is supported");
      }
      if (channels != 1) {
        throw Error(ErrorCode::kUnsupportedFormat,
                    name + ": expected 1 channel, found " +
                        std::to_string(channels));
      }
      if (sample_rate <= 0) {
        throw Error(ErrorCode::kMalformedWav, name + ": zero sample rate");
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      // Streaming writers leave the size unset.
      if (size == 0xFFFFFFFFu) size = remaining;
      if (size > remaining) {
        throw Error(ErrorCode::kMalformedWav, name + ": truncated data chunk");
      }
      data = bytes.data() + body;
      data_size = static_cast<size_t>(size);
      break;
    }
    pos = body + static_cast<size_t>(size) + (size & 1);
  }
  if (!have_fmt) throw Error(ErrorCode::kMalformedWav, name + ": no fmt chunk");
  if (data == nullptr) {
    throw Error(ErrorCode::kMalformedWav, name + ": no data chunk");
  }

  AudioClip clip;
  clip.sample_rate = sample_rate;
  clip.samples.resize(data_size / 2);
  for (size_t i = 0; i < clip.samples.size(); ++i) {
    const auto v = static_cast<int16_t>(ReadU16(data + 2 * i));
    clip.samples[i] = std::clamp(v / 32768.0f, -1.0f, 1.0f);
  }
  return clip;
}

void WriteWav(const AudioClip& clip, const fs::path& path) {
  const auto data_bytes = static_cast<uint32_t>(clip.samples.size() * 2);
  std::string out;
  out.reserve(44 + data_bytes);
  out += "RIFF";
  PutU32(out, 36 + data_bytes);
  out += "WAVEfmt ";
  PutU32(out, 16);
  PutU16(out, 1);
  PutU16(out, 1);
  PutU32(out, static_cast<uint32_t>(clip.sample_rate));
  PutU32(out, static_cast<uint32_t>(clip.sample_rate) * 2);
  PutU16(out, 2);
  PutU16(out, 16);
  out += "data";
  PutU32(out, data_bytes);
  for (float s : clip.samples) {
    const double scaled = std::round(static_cast<double>(s) * 32768.0);
    PutU16(out, static_cast<uint16_t>(static_cast<int16_t>(
                    std::clamp(scaled, -32768.0, 32767.0))));
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) throw Error(ErrorCode::kIoFailure, "cannot write " + path.string());
}

std::vector<AudioClip> SplitClip(const AudioClip& clip, int parts) {
  if (parts <= 0) throw Error(ErrorCode::kUsage, "parts must be positive");
  if (clip.size() < static_cast<size_t>(parts)) {
    throw Error(ErrorCode::kEmptyClip, "clip shorter than the part count");
  }
  const size_t length = clip.size() / static_cast<size_t>(parts);
  std::vector<AudioClip> out(static_cast<size_t>(parts));
  for (size_t p = 0; p < out.size(); ++p) {
    out[p].sample_rate = clip.sample_rate;
    auto first = clip.samples.begin() + static_cast<ptrdiff_t>(p * length);
    out[p].samples.assign(first, first + static_cast<ptrdiff_t>(length));
  }
  return out;
}

AudioClip CenterCrop(const AudioClip& clip, size_t length) {
  if (clip.size() <= length) return clip;
  const size_t start = (clip.size() - length) / 2;
  AudioClip out;
  out.sample_rate = clip.sample_rate;
  out.samples.assign(clip.samples.begin() + static_cast<ptrdiff_t>(start),
                     clip.samples.begin() + static_cast<ptrdiff_t>(start + length));
  return out;
}

void AlignPairFromHead(AudioClip& a, AudioClip& b) {
  const size_t n = std::min(a.size(), b.size());
  a.samples.erase(a.samples.begin(),
                  a.samples.begin() + static_cast<ptrdiff_t>(a.size() - n));
  b.samples.erase(b.samples.begin(),
                  b.samples.begin() + static_cast<ptrdiff_t>(b.size() - n));
}

std::string_view SplitName(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "train";
}

Split ParseSplit(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "val") return Split::kVal;
  if (name == "test") return Split::kTest;
  throw Error(ErrorCode::kConfig, "unknown split '" + std::string(name) + "'");
}

std::vector<ManifestEntry> DatasetManifest::Select(Split split) const {
  std::vector<ManifestEntry> out;
  for (const auto& e : entries) {
    if (e.split == split) out.push_back(e);
  }
  return out;
}

std::vector<Split> AssignSplits(size_t n, uint64_t seed) {
  const auto n_train = static_cast<size_t>(std::llround(0.85 * n));
  const auto n_val =
      std::min(n - n_train, static_cast<size_t>(std::llround(0.08 * n)));
  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  rng.Shuffle(order);
  std::vector<Split> splits(n, Split::kTest);
  for (size_t rank = 0; rank < n; ++rank) {
    if (rank < n_train) {
      splits[order[rank]] = Split::kTrain;
    } else if (rank < n_train + n_val) {
      splits[order[rank]] = Split::kVal;
    }
  }
  return splits;
}

void WriteManifest(const DatasetManifest& manifest, const fs::path& path) {
  const fs::path base = path.parent_path();
  auto rel = [&](const fs::path& p) {
    if (p.is_relative() || base.empty()) return p.generic_string();
    return p.lexically_relative(base).generic_string();
  };
  std::ofstream out(path, std::ios::trunc);
  out << "# seed=" << manifest.seed << "\n";
  for (const auto& e : manifest.entries) {
    out << SplitName(e.split) << '\t' << rel(e.degraded_path) << '\t'
        << rel(e.reference_path) << '\n';
  }
  if (!out) throw Error(ErrorCode::kIoFailure, "cannot write " + path.string());
}

DatasetManifest ReadManifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoFailure, "cannot open " + path.string());
  const fs::path base = path.parent_path();
  DatasetManifest manifest;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line.rfind("# seed=", 0) == 0) {
        manifest.seed = std::stoull(line.substr(7));
      }
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, '\t')) fields.push_back(field);
    if (fields.size() != 3) {
      throw Error(ErrorCode::kConfig, path.string() + ":" +
                                          std::to_string(line_no) +
                                          ": expected 3 tab-separated fields");
    }
    auto resolve = [&](const std::string& p) {
      fs::path fp(p);
      return fp.is_relative() ? base / fp : fp;
    };
    manifest.entries.push_back(
        {ParseSplit(fields[0]), resolve(fields[1]), resolve(fields[2])});
  }
  return manifest;
}

std::pair<AudioClip, AudioClip> LoadPair(const ManifestEntry& entry) {
  AudioClip degraded = ReadWav(entry.degraded_path);
  AudioClip reference = ReadWav(entry.reference_path);
  if (degraded.size() != reference.size() ||
      degraded.sample_rate != reference.sample_rate) {
    throw Error(ErrorCode::kPairLengthMismatch,
                "unaligned pair " + entry.degraded_path.string() + " / " +
                    entry.reference_path.string());
  }
  return {std::move(degraded), std::move(reference)};
}

std::string ExpandEncoderTemplate(std::string_view tmpl, const fs::path& in,
                                  const fs::path& out, int bitrate_kbps) {
  std::string cmd(tmpl);
  ReplaceAll(cmd, "{in}", ShellQuote(in.string()));
  ReplaceAll(cmd, "{out}", ShellQuote(out.string()));
  ReplaceAll(cmd, "{bitrate}", std::to_string(bitrate_kbps));
  return cmd;
}

void RunEncoder(std::string_view tmpl, const fs::path& in, const fs::path& out,
                int bitrate_kbps) {
  const std::string cmd =
      "( " + ExpandEncoderTemplate(tmpl, in, out, bitrate_kbps) + " ) 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) {
    throw Error(ErrorCode::kEncoderFailure, "cannot spawn: " + cmd);
  }
  std::string captured;
  std::array<char, 4096> buf;
  size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) {
    captured.append(buf.data(), n);
  }
  const int status = pclose(pipe);
  const bool ok = status != -1 && WIFEXITED(status) && WEXITSTATUS(status) == 0;
  if (!ok || !fs::exists(out)) {
    std::string msg = "encoder failed (" + cmd + ")";
    if (!captured.empty()) msg += ": " + captured;
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    throw Error(ErrorCode::kEncoderFailure, msg);
  }
}

DatasetManifest PrepareDataset(const fs::path& source_dir,
                               const fs::path& work_dir,
                               const PrepareOptions& options) {
  std::vector<fs::path> sources;
  if (fs::exists(source_dir)) {
    for (const auto& item : fs::recursive_directory_iterator(source_dir)) {
      if (!item.is_regular_file()) continue;
      std::string ext = item.path().extension().string();
      std::transform(ext.begin(), ext.end(), ext.begin(),
                     [](unsigned char c) { return std::tolower(c); });
      if (ext == ".wav") sources.push_back(item.path());
    }
  }
  std::sort(sources.begin(), sources.end());

  const fs::path decoded_dir = work_dir / "decoded";
  const fs::path segment_dir = work_dir / "segments";
  fs::create_directories(decoded_dir);
  fs::create_directories(segment_dir);

  const auto parts = static_cast<size_t>(options.parts);
  // One slot per (source, segment) in source order; filled concurrently.
  std::vector<ManifestEntry> slots(sources.size() * parts);
  ParallelFor(sources.size(), options.workers, [&](size_t s) {
    const std::string id = IdFor(source_dir, sources[s]);
    const fs::path ref_path = decoded_dir / (id + ".ref.wav");
    const fs::path deg_path = decoded_dir / (id + ".deg.wav");
    RunEncoder(options.encoder_template, sources[s], ref_path,
               options.reference_kbps);
    RunEncoder(options.encoder_template, ref_path, deg_path,
               options.degraded_kbps);
    AudioClip reference = ReadWav(ref_path);
    AudioClip degraded = ReadWav(deg_path);
    if (reference.sample_rate != degraded.sample_rate) {
      throw Error(ErrorCode::kPairLengthMismatch,
                  id + ": codec changed the sample rate");
    }
    AlignPairFromHead(degraded, reference);
    const auto ref_parts = SplitClip(reference, options.parts);
    const auto deg_parts = SplitClip(degraded, options.parts);
    for (size_t p = 0; p < parts; ++p) {
      if (ref_parts[p].size() != deg_parts[p].size()) {
        throw Error(ErrorCode::kPairLengthMismatch,
                    id + ": segment lengths differ after alignment");
      }
      const std::string stem = id + "." + std::to_string(p);
      ManifestEntry& entry = slots[s * parts + p];
      entry.reference_path = segment_dir / (stem + ".ref.wav");
      entry.degraded_path = segment_dir / (stem + ".deg.wav");
      WriteWav(ref_parts[p], entry.reference_path);
      WriteWav(deg_parts[p], entry.degraded_path);
    }
  });

  DatasetManifest manifest;
  manifest.seed = options.seed;
  const std::vector<Split> splits = AssignSplits(slots.size(), options.seed);
  for (size_t i = 0; i < slots.size(); ++i) {
    slots[i].split = splits[i];
    manifest.entries.push_back(std::move(slots[i]));
  }
  WriteManifest(manifest, work_dir / "manifest.tsv");
  return manifest;
}

}  // namespace ase
