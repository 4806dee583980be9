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

#include "ase/pipeline.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>

#include "ase/error.h"
#include "ase/model.h"
#include "ase/parallel.h"
#include "ase/random.h"
#include "ase/train.h"

namespace ase {
namespace {

double ElapsedMs(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now() - start)
      .count();
}

AnyModel PrepareModel(const AnyModel& model, bool use_quantized) {
  if (use_quantized && std::holds_alternative<ModelParams<float>>(model)) {
    return QuantizeModel(std::get<ModelParams<float>>(model));
  }
  return model;
}

}  // namespace

AudioClip EnhanceClip(const AnyModel& model, const AudioClip& input,
                      double* forward_ms, const StftConfig& stft) {
  StackedSpectrogram spec = StftStack(input, stft);
  const float scale = NormScale(spec);
  const float inv = 1.0f / scale;
  for (float& v : spec.values()) v *= inv;

  const auto start = std::chrono::steady_clock::now();
  Tensor<float> out = RunModel(model, spec);
  if (forward_ms != nullptr) *forward_ms = ElapsedMs(start);

  for (float& v : out.values()) v *= scale;
  return IstftUnstack(out, stft, input.size(), input.sample_rate);
}

EnhanceTiming EnhanceFile(const EnhanceRequest& request) {
  const AnyModel model =
      PrepareModel(LoadAnyModel(request.checkpoint_path), request.use_quantized);
  const AudioClip input = ReadWav(request.input_path);
  EnhanceTiming timing;
  const AudioClip output = EnhanceClip(model, input, &timing.forward_ms);
  timing.samples = output.size();
  timing.spectrogram_shape = LastForwardShape();
  WriteWav(output, request.output_path);
  return timing;
}

SpectralView ParseSpectralView(const std::string& name) {
  if (name == "magnitude") return SpectralView::kMagnitude;
  if (name == "power_db" || name == "power") return SpectralView::kPowerDb;
  if (name == "phase") return SpectralView::kPhase;
  throw Error(ErrorCode::kUsage, "unknown spectrogram view '" + name + "'");
}

std::vector<uint8_t> RenderSpectrogramPgm(const AudioClip& clip,
                                          SpectralView view,
                                          const StftConfig& stft) {
  const SpectralViews views = ComputeSpectralViews(StftStack(clip, stft));
  const Tensor<float>& data = view == SpectralView::kMagnitude ? views.magnitude
                              : view == SpectralView::kPowerDb ? views.power_db
                                                               : views.phase;
  const size_t frames = data.dim(0);
  const size_t bins = data.dim(1);
  double lo = 0.0;
  double hi = 0.0;
  if (view == SpectralView::kPhase) {
    lo = -std::numbers::pi;
    hi = std::numbers::pi;
  } else {
    const auto [mn, mx] = std::minmax_element(data.values().begin(), data.values().end());
    lo = *mn;
    hi = *mx;
  }
  const double range = hi - lo;

  const std::string header =
      "P5\n" + std::to_string(frames) + " " + std::to_string(bins) + "\n255\n";
  std::vector<uint8_t> out(header.begin(), header.end());
  out.reserve(out.size() + frames * bins);
  for (size_t row = 0; row < bins; ++row) {
    const size_t bin = bins - 1 - row;
    for (size_t t = 0; t < frames; ++t) {
      uint8_t px = 0;
      if (range > 0.0) {
        const double u = (data.at(t, bin) - lo) / range;
        px = static_cast<uint8_t>(std::clamp(std::lround(u * 255.0), 0L, 255L));
      }
      out.push_back(px);
    }
  }
  return out;
}

void EmitSpectrogramImage(const AudioClip& clip, SpectralView view,
                          const std::filesystem::path& path) {
  const std::vector<uint8_t> bytes = RenderSpectrogramPgm(clip, view);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIoFailure, "cannot write " + path.string());
}

LatencyStats SummarizeLatency(std::vector<double> samples_ms) {
  LatencyStats stats;
  stats.trials = samples_ms.size();
  stats.samples_ms = samples_ms;
  if (samples_ms.empty()) return stats;
  double sum = 0.0;
  for (double s : samples_ms) sum += s;
  stats.mean_ms = sum / static_cast<double>(samples_ms.size());
  std::sort(samples_ms.begin(), samples_ms.end());
  auto rank = [&](double p) {
    const size_t n = samples_ms.size();
    size_t k = static_cast<size_t>(std::ceil(p * static_cast<double>(n)));
    return samples_ms[std::clamp<size_t>(k, 1, n) - 1];
  };
  stats.p50_ms = rank(0.50);
  stats.p95_ms = rank(0.95);
  return stats;
}

LatencyStats BenchLatency(const AnyModel& model, size_t n_trials,
                          size_t clip_len, uint64_t seed) {
  if (n_trials < 3) throw Error(ErrorCode::kUsage, "bench needs at least 3 trials");
  Rng rng(seed);
  std::vector<double> times;
  times.reserve(n_trials);
  for (size_t trial = 0; trial < n_trials; ++trial) {
    std::vector<float> samples(clip_len);
    for (float& s : samples) s = static_cast<float>(rng.Uniform(-0.5, 0.5));
    StackedSpectrogram spec = StftStack(samples);
    const float inv = 1.0f / NormScale(spec);
    for (float& v : spec.values()) v *= inv;
    const auto start = std::chrono::steady_clock::now();
    const Tensor<float> out = RunModel(model, spec);
    times.push_back(ElapsedMs(start));
    if (out.size() != spec.size()) {
      throw Error(ErrorCode::kInternal, "forward pass changed the tensor size");
    }
  }
  return SummarizeLatency(std::move(times));
}

MetricsReport EvaluateTestset(const DatasetManifest& manifest,
                              const AnyModel& model,
                              const EvaluateOptions& options) {
  const AnyModel runnable = PrepareModel(model, options.use_quantized);
  const std::vector<ManifestEntry> entries = manifest.Select(Split::kTest);
  MetricsReport report;
  report.rows.resize(entries.size());
  ParallelFor(entries.size(), options.threads, [&](size_t i) {
    auto [degraded, reference] = LoadPair(entries[i]);
    const AudioClip estimate =
        options.oracle_bypass ? reference : EnhanceClip(runnable, degraded);
    MetricsRow& row = report.rows[i];
    row.clip = entries[i].degraded_path.filename().string();
    row.snr_db = Snr(reference.samples, estimate.samples);
    row.lsd = Lsd(reference.samples, estimate.samples);
    row.stoi = Stoi(reference.samples, estimate.samples, reference.sample_rate);
  });
  Summarize(report);
  return report;
}

}  // namespace ase
