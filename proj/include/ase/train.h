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

#ifndef ASE_TRAIN_H_
#define ASE_TRAIN_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ase/audio_io.h"
#include "ase/losses.h"
#include "ase/model.h"
#include "ase/stft.h"

namespace ase {

enum class LrMode { kTriangular, kConstant };

struct TrainConfig {
  double base_lr = 1e-3;  // used when mode is kConstant
  size_t batch_size = 32;
  size_t epochs = 200;
  double min_lr = 1e-4;
  double max_lr = 1e-3;
  size_t period = 10;     // epochs per triangular cycle
  double decay = 5e-4;    // multiplicative, per optimizer step
  LrMode mode = LrMode::kTriangular;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  uint64_t seed = 0;
  size_t checkpoint_every = 0;  // epochs; 0 disables periodic checkpoints
  size_t crop_length = 100000;  // centered crop per clip

  void Validate() const;
};

// Triangular wave between min_lr (at step 0) and max_lr (half a period
// later), times (1 - decay)^step.
double LrAtStep(const TrainConfig& cfg, uint64_t step, size_t steps_per_epoch);

template <typename T>
struct AdamState {
  ModelParams<T> m;
  ModelParams<T> v;
  uint64_t t = 0;
};

template <typename T>
AdamState<T> MakeAdamState(const ModelConfig& cfg) {
  return {ZeroParams<T>(cfg), ZeroParams<T>(cfg), 0};
}

// Bias-corrected Adam update of every tensor, alpha included.
template <typename T>
void AdamStep(ModelParams<T>& params, const ModelParams<T>& grads,
              AdamState<T>& state, double lr, const TrainConfig& cfg);

// One normalized training example: both spectrograms divided by the
// degraded clip's max-abs STFT value.
struct TrainingSample {
  StackedSpectrogram input;
  StackedSpectrogram target;
  float scale = 1.0f;
};

// max(1e-8, max |x|) over a stacked spectrogram.
float NormScale(const StackedSpectrogram& spec);

TrainingSample MakeSample(const AudioClip& degraded, const AudioClip& reference,
                          size_t crop_length, const StftConfig& stft = {});

struct SampleGradient {
  double loss = 0.0;
  ModelParams<float> grads;
};

SampleGradient ComputeSampleGradient(const ModelParams<float>& params,
                                     const TrainingSample& sample,
                                     const SsimConfig& ssim);

// Mean loss and mean gradient over the batch. Per-sample gradients are
// computed on up to `threads` workers and reduced in index order, so the
// result does not depend on the thread count.
SampleGradient ComputeBatchGradient(const ModelParams<float>& params,
                                    const std::vector<TrainingSample>& batch,
                                    const SsimConfig& ssim, int threads);

// Mean total loss over the entries, evaluated exactly as in training.
double EvaluateLoss(const ModelParams<float>& params,
                    const std::vector<ManifestEntry>& entries,
                    const TrainConfig& cfg, const SsimConfig& ssim,
                    int threads);

struct EpochRecord {
  size_t epoch = 0;
  uint64_t step = 0;      // optimizer steps completed
  double lr = 0.0;        // rate used by the epoch's last step
  double train_loss = 0.0;
  double val_loss = 0.0;  // NaN without validation entries
};

struct TrainResult {
  ModelParams<float> final_params;
  ModelParams<float> best_params;
  std::vector<EpochRecord> log;
  std::vector<double> lr_trace;  // one entry per optimizer step
};

// Writes out_dir/train_log.csv ("epoch,step,lr,train_loss,val_loss"),
// out_dir/lr_trace.csv, best.ase (lowest validation loss, or training loss
// when there is no validation split), final.ase and optional
// epoch_NNNN.ase snapshots.
TrainResult Train(const DatasetManifest& manifest,
                  const ModelConfig& model_cfg, const TrainConfig& train_cfg,
                  const SsimConfig& ssim_cfg,
                  const std::filesystem::path& out_dir, int threads);

std::string FormatTrainLog(const std::vector<EpochRecord>& log);

extern template void AdamStep(ModelParams<float>&, const ModelParams<float>&,
                              AdamState<float>&, double, const TrainConfig&);
extern template void AdamStep(ModelParams<double>&, const ModelParams<double>&,
                              AdamState<double>&, double, const TrainConfig&);

}  // namespace ase

#endif  // ASE_TRAIN_H_
