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

#include "ase/metrics.h"

#include <cmath>
#include <complex>
#include <cstdio>
#include <numbers>
#include <string>

#include "ase/error.h"
#include "ase/fft.h"

namespace ase {
namespace {

constexpr double kSnrNoiseFloor = 1e-20;
constexpr double kLogPowerFloor = 1e-10;

void CheckLengths(size_t a, size_t b) {
  if (a != b) {
    throw Error(ErrorCode::kLengthMismatch,
                "clip lengths differ: " + std::to_string(a) + " vs " +
                    std::to_string(b));
  }
}

std::vector<double> LogPowerFrames(std::span<const float> x,
                                   const LsdConfig& cfg,
                                   const std::vector<double>& window,
                                   size_t frames) {
  const RealFft fft(cfg.window);
  const size_t bins = fft.bins();
  std::vector<double> out(frames * bins);
  std::vector<double> frame(cfg.window);
  std::vector<std::complex<double>> spectrum(bins);
  for (size_t t = 0; t < frames; ++t) {
    for (size_t n = 0; n < cfg.window; ++n) {
      frame[n] = window[n] * x[t * cfg.hop + n];
    }
    fft.Forward(frame, spectrum);
    for (size_t k = 0; k < bins; ++k) {
      out[t * bins + k] = std::log10(std::norm(spectrum[k]) + kLogPowerFloor);
    }
  }
  return out;
}

}  // namespace

double Snr(std::span<const float> reference, std::span<const float> estimate) {
  CheckLengths(reference.size(), estimate.size());
  double signal = 0.0;
  double noise = 0.0;
  for (size_t i = 0; i < reference.size(); ++i) {
    const double y = reference[i];
    const double e = y - estimate[i];
    signal += y * y;
    noise += e * e;
  }
  if (signal <= 0.0) {
    throw Error(ErrorCode::kSilentReference, "SNR reference is all zeros");
  }
  if (noise < kSnrNoiseFloor) return kSnrCapDb;
  return 10.0 * std::log10(signal / noise);
}

std::vector<double> PeriodicHann(size_t length) {
  std::vector<double> w(length);
  for (size_t n = 0; n < length; ++n) {
    w[n] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * n / length));
  }
  return w;
}

double Lsd(std::span<const float> reference, std::span<const float> estimate,
           const LsdConfig& cfg) {
  CheckLengths(reference.size(), estimate.size());
  if (reference.size() < cfg.window) {
    throw Error(ErrorCode::kTooShort,
                "LSD needs at least " + std::to_string(cfg.window) + " samples");
  }
  const size_t frames = (reference.size() - cfg.window) / cfg.hop + 1;
  const std::vector<double> window = PeriodicHann(cfg.window);
  const std::vector<double> s = LogPowerFrames(reference, cfg, window, frames);
  const std::vector<double> s_hat = LogPowerFrames(estimate, cfg, window, frames);
  const size_t bins = cfg.window / 2 + 1;
  double total = 0.0;
  for (size_t t = 0; t < frames; ++t) {
    double sum = 0.0;
    for (size_t k = 0; k < bins; ++k) {
      const double d = s[t * bins + k] - s_hat[t * bins + k];
      sum += d * d;
    }
    total += std::sqrt(sum / static_cast<double>(bins));
  }
  return total / static_cast<double>(frames);
}

void Summarize(MetricsReport& report) {
  MetricsRow mean{"MEAN"};
  if (!report.rows.empty()) {
    for (const auto& r : report.rows) {
      mean.snr_db += r.snr_db;
      mean.lsd += r.lsd;
      mean.stoi += r.stoi;
    }
    const double n = static_cast<double>(report.rows.size());
    mean.snr_db /= n;
    mean.lsd /= n;
    mean.stoi /= n;
  }
  report.mean = mean;
}

std::string FormatReportCsv(const MetricsReport& report) {
  std::string out = "clip,snr_db,lsd,stoi\n";
  char line[512];
  auto append = [&](const MetricsRow& r) {
    std::snprintf(line, sizeof line, "%s,%.6f,%.6f,%.6f\n", r.clip.c_str(),
                  r.snr_db, r.lsd, r.stoi);
    out += line;
  };
  for (const auto& r : report.rows) append(r);
  if (!report.rows.empty()) append(report.mean);
  return out;
}

}  // namespace ase
