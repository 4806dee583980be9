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

#ifndef ASE_STFT_H_
#define ASE_STFT_H_

#include <cstddef>
#include <span>
#include <vector>

#include "ase/audio_io.h"
#include "ase/tensor.h"

namespace ase {

// Frame t covers samples [t * hop, t * hop + frame_length). The symmetric
// Hann window of window_length taps is zero-padded at the tail up to
// frame_length. No centering or signal padding is applied.
struct StftConfig {
  size_t window_length = 1023;
  size_t hop = 248;
  size_t frame_length = 1024;

  // One-sided bins minus the Nyquist bin.
  size_t bins() const { return frame_length / 2; }
  void Validate() const;
};

// w[n] = 0.5 * (1 - cos(2 pi n / (length - 1))).
std::vector<double> SymmetricHann(size_t length);

// Analysis/synthesis window of cfg.frame_length taps.
std::vector<double> FrameWindow(const StftConfig& cfg);

// floor((num_samples - frame_length) / hop) + 1. Throws kClipTooShort when
// num_samples < frame_length.
size_t FrameCount(size_t num_samples, const StftConfig& cfg);

// Returns a [2, frames, bins] tensor of real and imaginary parts.
StackedSpectrogram StftStack(std::span<const float> samples,
                             const StftConfig& cfg = {});
inline StackedSpectrogram StftStack(const AudioClip& clip,
                                    const StftConfig& cfg = {}) {
  return StftStack(clip.samples, cfg);
}

// Least-squares overlap-add inverse. The Nyquist bin is taken to be zero.
// Samples whose squared-window sum is <= 1e-8 are set to 0; the result is
// truncated or zero-padded to out_len.
AudioClip IstftUnstack(const StackedSpectrogram& spec, const StftConfig& cfg,
                       size_t out_len, int sample_rate);

struct SpectralViews {
  Tensor<float> magnitude;  // [frames, bins]
  Tensor<float> power_db;   // 10 log10(|X|^2 + 1e-10)
  Tensor<float> phase;      // atan2(im, re) in (-pi, pi]
};

SpectralViews ComputeSpectralViews(const StackedSpectrogram& spec);

}  // namespace ase

#endif  // ASE_STFT_H_
