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

#ifndef ASE_AUDIO_IO_H_
#define ASE_AUDIO_IO_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ase {

// Mono PCM audio as unit-range floats.
struct AudioClip {
  std::vector<float> samples;
  int sample_rate = 22050;

  size_t size() const { return samples.size(); }
  bool operator==(const AudioClip&) const = default;
};

// Reads a RIFF/WAVE PCM16 mono file. Samples are scaled by 1/32768.
// Throws kMalformedWav, kUnsupportedFormat or kIoFailure.
AudioClip ReadWav(const std::filesystem::path& path);

// Writes a PCM16 mono file. Each sample s is stored as round(s * 32768)
// clamped to [-32768, 32767], which makes ReadWav(WriteWav(x)) idempotent.
void WriteWav(const AudioClip& clip, const std::filesystem::path& path);

// Splits into `parts` contiguous segments of floor(len / parts) samples;
// the remainder is dropped from the tail.
std::vector<AudioClip> SplitClip(const AudioClip& clip, int parts);

// Returns the centered `length`-sample window, or the whole clip if it is
// not longer than `length`.
AudioClip CenterCrop(const AudioClip& clip, size_t length);

// Trims the longer clip from the head so both have the same length. MP3
// round trips add leading padding, so alignment is done from the front.
void AlignPairFromHead(AudioClip& a, AudioClip& b);

enum class Split { kTrain, kVal, kTest };

std::string_view SplitName(Split split);
Split ParseSplit(std::string_view name);

struct ManifestEntry {
  Split split = Split::kTrain;
  std::filesystem::path degraded_path;
  std::filesystem::path reference_path;

  bool operator==(const ManifestEntry&) const = default;
};

struct DatasetManifest {
  uint64_t seed = 0;
  std::vector<ManifestEntry> entries;

  std::vector<ManifestEntry> Select(Split split) const;
  bool operator==(const DatasetManifest&) const = default;
};

// Deterministic 85/8/7 assignment over a seeded permutation of [0, n).
std::vector<Split> AssignSplits(size_t n, uint64_t seed);

// Text format: first line "# seed=<n>", then one
// "split<TAB>degraded<TAB>reference" line per entry. Relative paths are
// written relative to the manifest's directory and resolved against it
// when reading.
void WriteManifest(const DatasetManifest& manifest,
                   const std::filesystem::path& path);
DatasetManifest ReadManifest(const std::filesystem::path& path);

// Loads both clips of an entry and checks that they are sample-aligned.
std::pair<AudioClip, AudioClip> LoadPair(const ManifestEntry& entry);

inline constexpr std::string_view kDefaultEncoderTemplate =
    "ffmpeg -hide_banner -loglevel error -y -i {in} -codec:a libmp3lame "
    "-b:a {bitrate}k -f mp3 - | ffmpeg -hide_banner -loglevel error -y "
    "-f mp3 -i - -ac 1 -c:a pcm_s16le {out}";

// Substitutes {in}, {out} (shell-quoted) and {bitrate} (kbps).
std::string ExpandEncoderTemplate(std::string_view tmpl,
                                  const std::filesystem::path& in,
                                  const std::filesystem::path& out,
                                  int bitrate_kbps);

// Runs one codec round trip through /bin/sh. Throws kEncoderFailure with the
// captured output on a nonzero exit status or a missing output file.
void RunEncoder(std::string_view tmpl, const std::filesystem::path& in,
                const std::filesystem::path& out, int bitrate_kbps);

struct PrepareOptions {
  std::string encoder_template{kDefaultEncoderTemplate};
  uint64_t seed = 0;
  int workers = 1;
  int parts = 3;
  int reference_kbps = 128;
  int degraded_kbps = 32;
};

// Builds (degraded, reference) segment pairs from every WAV under
// source_dir, writes them below work_dir and persists
// work_dir/manifest.tsv.
DatasetManifest PrepareDataset(const std::filesystem::path& source_dir,
                               const std::filesystem::path& work_dir,
                               const PrepareOptions& options);

}  // namespace ase

#endif  // ASE_AUDIO_IO_H_
