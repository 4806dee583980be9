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

#include "ase/stft.h"

#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "ase/error.h"
#include "ase/fft.h"

namespace ase {
namespace {

constexpr double kOverlapAddFloor = 1e-8;
constexpr double kPowerFloor = 1e-10;

void CheckSpectrogramShape(const StackedSpectrogram& spec,
                           const StftConfig& cfg) {
  if (spec.rank() != 3 || spec.dim(0) != 2 || spec.dim(2) != cfg.bins()) {
    throw Error(ErrorCode::kShapeMismatch,
                "expected a [2, frames, " + std::to_string(cfg.bins()) +
                    "] spectrogram");
  }
}

}  // namespace

void StftConfig::Validate() const {
  if (window_length == 0 || window_length > frame_length) {
    throw Error(ErrorCode::kConfig, "window_length must be in [1, frame_length]");
  }
  if (hop == 0 || hop > window_length) {
    throw Error(ErrorCode::kConfig, "hop must be in [1, window_length]");
  }
  if (frame_length % 2 != 0) {
    throw Error(ErrorCode::kConfig, "frame_length must be even");
  }
}

std::vector<double> SymmetricHann(size_t length) {
  std::vector<double> w(length, 1.0);
  if (length < 2) return w;
  const double denom = static_cast<double>(length - 1);
  for (size_t n = 0; n < length; ++n) {
    w[n] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * n / denom));
  }
  return w;
}

std::vector<double> FrameWindow(const StftConfig& cfg) {
  std::vector<double> w = SymmetricHann(cfg.window_length);
  w.resize(cfg.frame_length, 0.0);
  return w;
}

size_t FrameCount(size_t num_samples, const StftConfig& cfg) {
  if (num_samples < cfg.frame_length) {
    throw Error(ErrorCode::kClipTooShort,
                "clip has " + std::to_string(num_samples) +
                    " samples, at least " + std::to_string(cfg.frame_length) +
                    " are required");
  }
  return (num_samples - cfg.frame_length) / cfg.hop + 1;
}

StackedSpectrogram StftStack(std::span<const float> samples,
                             const StftConfig& cfg) {
  cfg.Validate();
  const size_t frames = FrameCount(samples.size(), cfg);
  const size_t bins = cfg.bins();
  const std::vector<double> window = FrameWindow(cfg);
  const RealFft fft(cfg.frame_length);

  StackedSpectrogram out({2, frames, bins});
  std::vector<double> frame(cfg.frame_length);
  std::vector<std::complex<double>> spectrum(fft.bins());
  for (size_t t = 0; t < frames; ++t) {
    const float* src = samples.data() + t * cfg.hop;
    for (size_t n = 0; n < cfg.frame_length; ++n) frame[n] = window[n] * src[n];
    fft.Forward(frame, spectrum);
    for (size_t k = 0; k < bins; ++k) {
      out.at(0, t, k) = static_cast<float>(spectrum[k].real());
      out.at(1, t, k) = static_cast<float>(spectrum[k].imag());
    }
  }
  return out;
}

AudioClip IstftUnstack(const StackedSpectrogram& spec, const StftConfig& cfg,
                       size_t out_len, int sample_rate) {
  cfg.Validate();
  CheckSpectrogramShape(spec, cfg);
  const size_t frames = spec.dim(1);
  const size_t bins = cfg.bins();
  const std::vector<double> window = FrameWindow(cfg);
  const RealFft fft(cfg.frame_length);

  const size_t covered =
      frames == 0 ? 0 : (frames - 1) * cfg.hop + cfg.frame_length;
  std::vector<double> numerator(covered, 0.0);
  std::vector<double> denominator(covered, 0.0);
  std::vector<std::complex<double>> spectrum(fft.bins());
  std::vector<double> frame(cfg.frame_length);
  for (size_t t = 0; t < frames; ++t) {
    for (size_t k = 0; k < bins; ++k) {
      spectrum[k] = {spec.at(0, t, k), spec.at(1, t, k)};
    }
    spectrum[bins] = 0.0;
    fft.Inverse(spectrum, frame);
    const size_t offset = t * cfg.hop;
    for (size_t n = 0; n < cfg.frame_length; ++n) {
      numerator[offset + n] += window[n] * frame[n];
      denominator[offset + n] += window[n] * window[n];
    }
  }

  AudioClip clip;
  clip.sample_rate = sample_rate;
  clip.samples.assign(out_len, 0.0f);
  const size_t n = std::min(out_len, covered);
  for (size_t i = 0; i < n; ++i) {
    if (denominator[i] > kOverlapAddFloor) {
      clip.samples[i] = static_cast<float>(numerator[i] / denominator[i]);
    }
  }
  return clip;
}

SpectralViews ComputeSpectralViews(const StackedSpectrogram& spec) {
  if (spec.rank() != 3 || spec.dim(0) != 2) {
    throw Error(ErrorCode::kShapeMismatch, "expected a [2, frames, bins] tensor");
  }
  const size_t frames = spec.dim(1);
  const size_t bins = spec.dim(2);
  SpectralViews views{Tensor<float>({frames, bins}),
                      Tensor<float>({frames, bins}),
                      Tensor<float>({frames, bins})};
  for (size_t t = 0; t < frames; ++t) {
    for (size_t k = 0; k < bins; ++k) {
      const double re = spec.at(0, t, k);
      const double im = spec.at(1, t, k);
      const double power = re * re + im * im;
      double phase = std::atan2(im, re);
      if (phase <= -std::numbers::pi) phase = std::numbers::pi;
      views.magnitude.at(t, k) = static_cast<float>(std::sqrt(power));
      views.power_db.at(t, k) =
          static_cast<float>(10.0 * std::log10(power + kPowerFloor));
      views.phase.at(t, k) = static_cast<float>(phase);
    }
  }
  return views;
}

}  // namespace ase
