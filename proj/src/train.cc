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

#include "ase/train.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>

#include "ase/checkpoint.h"
#include "ase/error.h"
#include "ase/parallel.h"
#include "ase/random.h"

namespace ase {
namespace {

constexpr float kNormFloor = 1e-8f;

void WriteText(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  out << text;
  if (!out) throw Error(ErrorCode::kIoFailure, "cannot write " + path.string());
}

std::string Num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<TrainingSample> LoadSamples(
    const std::vector<ManifestEntry>& entries, const TrainConfig& cfg,
    int threads) {
  std::vector<TrainingSample> samples(entries.size());
  ParallelFor(entries.size(), threads, [&](size_t i) {
    auto [degraded, reference] = LoadPair(entries[i]);
    samples[i] = MakeSample(degraded, reference, cfg.crop_length);
  });
  return samples;
}

}  // namespace

void TrainConfig::Validate() const {
  if (!(min_lr > 0.0) || min_lr > max_lr) {
    throw Error(ErrorCode::kConfig, "require 0 < min_lr <= max_lr");
  }
  if (!(base_lr > 0.0)) throw Error(ErrorCode::kConfig, "base_lr must be > 0");
  if (decay < 0.0 || decay >= 1.0) {
    throw Error(ErrorCode::kConfig, "decay must lie in [0, 1)");
  }
  if (batch_size < 1) throw Error(ErrorCode::kConfig, "batch_size must be >= 1");
  if (period < 1) throw Error(ErrorCode::kConfig, "period must be >= 1");
  if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0) {
    throw Error(ErrorCode::kConfig, "beta1 and beta2 must lie in [0, 1)");
  }
  if (!(eps > 0.0)) throw Error(ErrorCode::kConfig, "eps must be > 0");
  if (crop_length < 1) throw Error(ErrorCode::kConfig, "crop_length must be >= 1");
}

double LrAtStep(const TrainConfig& cfg, uint64_t step, size_t steps_per_epoch) {
  double lr = cfg.base_lr;
  if (cfg.mode == LrMode::kTriangular) {
    const uint64_t period_steps =
        std::max<uint64_t>(1, cfg.period * std::max<size_t>(1, steps_per_epoch));
    const double phase =
        static_cast<double>(step % period_steps) / static_cast<double>(period_steps);
    const double tri = 1.0 - std::fabs(2.0 * phase - 1.0);
    lr = cfg.min_lr + (cfg.max_lr - cfg.min_lr) * tri;
  }
  return lr * std::pow(1.0 - cfg.decay, static_cast<double>(step));
}

template <typename T>
void AdamStep(ModelParams<T>& params, const ModelParams<T>& grads,
              AdamState<T>& state, double lr, const TrainConfig& cfg) {
  if (!(params.config == grads.config) || !(params.config == state.m.config) ||
      params.blocks.size() != grads.blocks.size()) {
    throw Error(ErrorCode::kShapeMismatch, "Adam operands differ in structure");
  }
  state.t += 1;
  const double t = static_cast<double>(state.t);
  const double bc1 = 1.0 - std::pow(cfg.beta1, t);
  const double bc2 = 1.0 - std::pow(cfg.beta2, t);
  for (size_t b = 0; b < params.blocks.size(); ++b) {
    auto update = [&](Tensor<T>& p, const Tensor<T>& g, Tensor<T>& m,
                      Tensor<T>& v) {
      if (p.shape() != g.shape()) {
        throw Error(ErrorCode::kShapeMismatch, "gradient shape mismatch");
      }
      for (size_t i = 0; i < p.size(); ++i) {
        const double gi = g[i];
        const double mi = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * gi;
        const double vi = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * gi * gi;
        m[i] = static_cast<T>(mi);
        v[i] = static_cast<T>(vi);
        const double m_hat = mi / bc1;
        const double v_hat = vi / bc2;
        p[i] = static_cast<T>(p[i] - lr * m_hat / (std::sqrt(v_hat) + cfg.eps));
      }
    };
    auto& pb = params.blocks[b];
    const auto& gb = grads.blocks[b];
    auto& mb = state.m.blocks[b];
    auto& vb = state.v.blocks[b];
    update(pb.dw1, gb.dw1, mb.dw1, vb.dw1);
    update(pb.pw1, gb.pw1, mb.pw1, vb.pw1);
    update(pb.alpha, gb.alpha, mb.alpha, vb.alpha);
    update(pb.dw2, gb.dw2, mb.dw2, vb.dw2);
    update(pb.pw2, gb.pw2, mb.pw2, vb.pw2);
  }
}

float NormScale(const StackedSpectrogram& spec) {
  float m = 0.0f;
  for (float v : spec.values()) m = std::max(m, std::fabs(v));
  return std::max(kNormFloor, m);
}

TrainingSample MakeSample(const AudioClip& degraded, const AudioClip& reference,
                          size_t crop_length, const StftConfig& stft) {
  if (degraded.size() != reference.size()) {
    throw Error(ErrorCode::kPairLengthMismatch, "training pair is not aligned");
  }
  TrainingSample s;
  s.input = StftStack(CenterCrop(degraded, crop_length), stft);
  s.target = StftStack(CenterCrop(reference, crop_length), stft);
  s.scale = NormScale(s.input);
  const float inv = 1.0f / s.scale;
  for (float& v : s.input.values()) v *= inv;
  for (float& v : s.target.values()) v *= inv;
  return s;
}

SampleGradient ComputeSampleGradient(const ModelParams<float>& params,
                                     const TrainingSample& sample,
                                     const SsimConfig& ssim) {
  ForwardCache<float> cache;
  const Tensor<float> y = Forward(params, sample.input, &cache);
  TotalLossResult<float> loss = TotalLoss(y, sample.target, ssim);
  BackwardResult<float> back = Backward(params, cache, loss.grad);
  return {loss.loss, std::move(back.grads)};
}

SampleGradient ComputeBatchGradient(const ModelParams<float>& params,
                                    const std::vector<TrainingSample>& batch,
                                    const SsimConfig& ssim, int threads) {
  if (batch.empty()) throw Error(ErrorCode::kEmptyTrainSet, "empty batch");
  std::vector<SampleGradient> per_sample(batch.size());
  ParallelFor(batch.size(), threads, [&](size_t i) {
    per_sample[i] = ComputeSampleGradient(params, batch[i], ssim);
  });
  SampleGradient mean{0.0, ZeroParams<float>(params.config)};
  mean.grads.norm_scale = params.norm_scale;
  // Accumulate in double, in index order.
  ModelParams<double> sum = ZeroParams<double>(params.config);
  for (const auto& s : per_sample) {
    mean.loss += s.loss;
    ForEachTensorPair(sum, s.grads, [](Tensor<double>& acc, const Tensor<float>& g) {
      for (size_t i = 0; i < acc.size(); ++i) acc[i] += g[i];
    });
  }
  const double n = static_cast<double>(batch.size());
  mean.loss /= n;
  ForEachTensorPair(mean.grads, sum, [n](Tensor<float>& out, const Tensor<double>& acc) {
    for (size_t i = 0; i < out.size(); ++i) out[i] = static_cast<float>(acc[i] / n);
  });
  return mean;
}

double EvaluateLoss(const ModelParams<float>& params,
                    const std::vector<ManifestEntry>& entries,
                    const TrainConfig& cfg, const SsimConfig& ssim,
                    int threads) {
  if (entries.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::vector<double> losses(entries.size());
  ParallelFor(entries.size(), threads, [&](size_t i) {
    auto [degraded, reference] = LoadPair(entries[i]);
    const TrainingSample s = MakeSample(degraded, reference, cfg.crop_length);
    losses[i] = TotalLoss(Forward(params, s.input), s.target, ssim).loss;
  });
  double total = 0.0;
  for (double l : losses) total += l;
  return total / static_cast<double>(losses.size());
}

std::string FormatTrainLog(const std::vector<EpochRecord>& log) {
  std::string out = "epoch,step,lr,train_loss,val_loss\n";
  for (const auto& r : log) {
    out += std::to_string(r.epoch) + "," + std::to_string(r.step) + "," +
           Num(r.lr) + "," + Num(r.train_loss) + "," + Num(r.val_loss) + "\n";
  }
  return out;
}

TrainResult Train(const DatasetManifest& manifest, const ModelConfig& model_cfg,
                  const TrainConfig& train_cfg, const SsimConfig& ssim_cfg,
                  const std::filesystem::path& out_dir, int threads) {
  model_cfg.Validate();
  train_cfg.Validate();
  ssim_cfg.Validate();
  std::vector<ManifestEntry> train_entries = manifest.Select(Split::kTrain);
  const std::vector<ManifestEntry> val_entries = manifest.Select(Split::kVal);
  if (train_entries.empty()) {
    throw Error(ErrorCode::kEmptyTrainSet, "manifest has no training entries");
  }
  std::filesystem::create_directories(out_dir);

  const size_t batch_size = train_cfg.batch_size;
  const size_t steps_per_epoch =
      (train_entries.size() + batch_size - 1) / batch_size;

  TrainResult result;
  ModelParams<float> params = InitParams<float>(model_cfg, train_cfg.seed);
  AdamState<float> adam = MakeAdamState<float>(model_cfg);
  Rng shuffler(train_cfg.seed ^ 0x9E3779B97F4A7C15ULL);
  double best_loss = std::numeric_limits<double>::infinity();
  uint64_t step = 0;

  for (size_t epoch = 1; epoch <= train_cfg.epochs; ++epoch) {
    shuffler.Shuffle(train_entries);
    double loss_sum = 0.0;
    double scale_sum = 0.0;
    double last_lr = 0.0;
    for (size_t first = 0; first < train_entries.size(); first += batch_size) {
      const size_t last = std::min(train_entries.size(), first + batch_size);
      const std::vector<ManifestEntry> batch_entries(
          train_entries.begin() + static_cast<ptrdiff_t>(first),
          train_entries.begin() + static_cast<ptrdiff_t>(last));
      const std::vector<TrainingSample> batch =
          LoadSamples(batch_entries, train_cfg, threads);
      for (const auto& s : batch) scale_sum += s.scale;

      const SampleGradient g =
          ComputeBatchGradient(params, batch, ssim_cfg, threads);
      loss_sum += g.loss * static_cast<double>(batch.size());
      last_lr = LrAtStep(train_cfg, step, steps_per_epoch);
      result.lr_trace.push_back(last_lr);
      AdamStep(params, g.grads, adam, last_lr, train_cfg);
      ++step;
    }
    params.norm_scale =
        static_cast<float>(scale_sum / static_cast<double>(train_entries.size()));

    EpochRecord record;
    record.epoch = epoch;
    record.step = step;
    record.lr = last_lr;
    record.train_loss = loss_sum / static_cast<double>(train_entries.size());
    record.val_loss =
        EvaluateLoss(params, val_entries, train_cfg, ssim_cfg, threads);
    result.log.push_back(record);

    const double selection =
        val_entries.empty() ? record.train_loss : record.val_loss;
    if (selection < best_loss || result.best_params.blocks.empty()) {
      best_loss = selection;
      result.best_params = params;
      SaveCheckpoint(params, out_dir / "best.ase");
    }
    if (train_cfg.checkpoint_every > 0 &&
        epoch % train_cfg.checkpoint_every == 0) {
      char name[32];
      std::snprintf(name, sizeof name, "epoch_%04zu.ase", epoch);
      SaveCheckpoint(params, out_dir / name);
    }
    WriteText(out_dir / "train_log.csv", FormatTrainLog(result.log));
  }

  std::string trace = "step,lr\n";
  for (size_t i = 0; i < result.lr_trace.size(); ++i) {
    trace += std::to_string(i) + "," + Num(result.lr_trace[i]) + "\n";
  }
  WriteText(out_dir / "lr_trace.csv", trace);
  SaveCheckpoint(params, out_dir / "final.ase");
  result.final_params = std::move(params);
  return result;
}

template void AdamStep(ModelParams<float>&, const ModelParams<float>&,
                       AdamState<float>&, double, const TrainConfig&);
template void AdamStep(ModelParams<double>&, const ModelParams<double>&,
                       AdamState<double>&, double, const TrainConfig&);

}  // namespace ase
