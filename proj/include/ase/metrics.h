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

#ifndef ASE_METRICS_H_
#define ASE_METRICS_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ase/audio_io.h"

namespace ase {

// 10 log10(|y|^2 / |y - y_hat|^2). Returns kSnrCapDb when the error energy
// is below 1e-20. Throws kLengthMismatch or kSilentReference.
inline constexpr double kSnrCapDb = 100.0;
double Snr(std::span<const float> reference, std::span<const float> estimate);

struct LsdConfig {
  size_t window = 2048;
  size_t hop = 512;
};

// Periodic Hann, w[n] = 0.5 (1 - cos(2 pi n / length)).
std::vector<double> PeriodicHann(size_t length);

// Mean over frames of the RMS (over one-sided bins) difference of
// log10(|STFT|^2 + 1e-10). Throws kLengthMismatch or kTooShort.
double Lsd(std::span<const float> reference, std::span<const float> estimate,
           const LsdConfig& cfg = {});

// Rational-ratio polyphase resampler with a Kaiser-windowed sinc of
// 2 * half_taps taps per phase.
std::vector<double> ResamplePoly(std::span<const double> input, int from_rate,
                                 int to_rate, int half_taps = 32);

// Short-time objective intelligibility: 10 kHz, 256-sample frames, 15
// third-octave bands from 150 Hz, 30-frame segments, -15 dB clipping,
// frames more than 40 dB below the loudest reference frame dropped.
// Result lies in [-1, 1]. Throws kLengthMismatch or kTooShort.
double Stoi(std::span<const float> reference, std::span<const float> estimate,
            int sample_rate);

struct MetricsRow {
  std::string clip;
  double snr_db = 0.0;
  double lsd = 0.0;
  double stoi = 0.0;
};

struct MetricsReport {
  std::vector<MetricsRow> rows;
  MetricsRow mean{"MEAN"};
};

// Averages rows into report.mean.
void Summarize(MetricsReport& report);

// Header "clip,snr_db,lsd,stoi", one row per clip, then the MEAN row.
std::string FormatReportCsv(const MetricsReport& report);

}  // namespace ase

#endif  // ASE_METRICS_H_
