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

#ifndef ASE_PIPELINE_H_
#define ASE_PIPELINE_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ase/audio_io.h"
#include "ase/metrics.h"
#include "ase/quantize.h"
#include "ase/stft.h"

namespace ase {

// Runs one forward pass over the whole clip: STFT, divide by the clip's
// max-abs scale, model, multiply back, inverse STFT to the input length.
AudioClip EnhanceClip(const AnyModel& model, const AudioClip& input,
                      double* forward_ms = nullptr,
                      const StftConfig& stft = {});

struct EnhanceRequest {
  std::filesystem::path input_path;
  std::filesystem::path checkpoint_path;
  std::filesystem::path output_path;
  // Convert a float checkpoint to int8 before running. Quantized
  // checkpoints always run on the integer path.
  bool use_quantized = false;
};

struct EnhanceTiming {
  double forward_ms = 0.0;
  size_t samples = 0;
  std::vector<size_t> spectrogram_shape;
};

EnhanceTiming EnhanceFile(const EnhanceRequest& request);

enum class SpectralView { kMagnitude, kPowerDb, kPhase };

SpectralView ParseSpectralView(const std::string& name);

// Binary PGM (P5) with width = frames and height = bins, bin 0 on the
// bottom row. Values map linearly from [min, max] of the view to 0..255
// (phase from [-pi, pi]); a degenerate range maps to 0.
std::vector<uint8_t> RenderSpectrogramPgm(const AudioClip& clip,
                                          SpectralView view,
                                          const StftConfig& stft = {});
void EmitSpectrogramImage(const AudioClip& clip, SpectralView view,
                          const std::filesystem::path& path);

struct LatencyStats {
  size_t trials = 0;
  double mean_ms = 0.0;
  double p50_ms = 0.0;
  double p95_ms = 0.0;
  std::vector<double> samples_ms;
};

// Nearest-rank percentiles of the samples.
LatencyStats SummarizeLatency(std::vector<double> samples_ms);

// Times only the forward pass over n_trials random clips of clip_len
// samples. Throws kUsage when n_trials < 3.
LatencyStats BenchLatency(const AnyModel& model, size_t n_trials,
                          size_t clip_len, uint64_t seed);

struct EvaluateOptions {
  bool use_quantized = false;
  // Oracle check: score each reference against itself instead of running
  // the model.
  bool oracle_bypass = false;
  int threads = 1;
};

// Enhances every test entry and scores it against its reference. Rows are
// in manifest order.
MetricsReport EvaluateTestset(const DatasetManifest& manifest,
                              const AnyModel& model,
                              const EvaluateOptions& options);

}  // namespace ase

#endif  // ASE_PIPELINE_H_
