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

#ifndef ASE_LOSSES_H_
#define ASE_LOSSES_H_

#include <cstddef>

#include "ase/tensor.h"

namespace ase {

// SSIM stabilizers are C1 = (k1 L)^2 and C2 = (k2 L)^2. When
// dynamic_range is 0, L is range_fraction * (max - min) of the reference
// magnitudes of each evaluated pair.
struct SsimConfig {
  double k1 = 0.01;
  double k2 = 0.02;
  double dynamic_range = 0.0;
  double range_fraction = 0.4;
  size_t window = 3;

  void Validate() const;
};

template <typename T>
struct PixelLossResult {
  double loss = 0.0;
  Tensor<T> grad;
};

// sum (y - y_hat)^2 / sum (y - mean(y))^2 over every element, with its
// gradient with respect to y_hat. Throws kConstantTarget when the
// denominator is <= 1e-12.
template <typename T>
PixelLossResult<T> PixelLoss(const Tensor<T>& y_hat, const Tensor<T>& y);

template <typename T>
struct SsimResult {
  double ssim_mean = 0.0;
  double loss = 0.0;      // 1 - ssim_mean
  Tensor<double> map;     // [F - w + 1, B - w + 1]
  Tensor<T> grad;         // d loss / d y_hat_mag
};

// Mean SSIM over every fully contained w x w box window (stride 1, no
// padding) of two [F, B] magnitude tensors.
template <typename T>
SsimResult<T> SsimLoss(const Tensor<T>& y_hat_mag, const Tensor<T>& y_mag,
                       const SsimConfig& cfg);

// sqrt(re^2 + im^2) of a [2, F, B] stacked tensor.
template <typename T>
Tensor<T> Magnitude(const Tensor<T>& stacked);

template <typename T>
struct TotalLossResult {
  double loss = 0.0;
  double pixel = 0.0;
  double ssim_mean = 0.0;
  Tensor<T> grad;  // like y_hat
};

// pixel_loss(y_hat, y) + 0.5 * (1 - SSIM(|y_hat|, |y|)) on stacked
// spectrograms. The SSIM gradient is chained through the magnitude with the
// magnitude floored at 1e-8 in the denominator.
template <typename T>
TotalLossResult<T> TotalLoss(const Tensor<T>& y_hat, const Tensor<T>& y,
                             const SsimConfig& cfg);

inline constexpr double kSsimWeight = 0.5;

extern template PixelLossResult<float> PixelLoss(const Tensor<float>&,
                                                 const Tensor<float>&);
extern template PixelLossResult<double> PixelLoss(const Tensor<double>&,
                                                  const Tensor<double>&);
extern template SsimResult<float> SsimLoss(const Tensor<float>&,
                                           const Tensor<float>&,
                                           const SsimConfig&);
extern template SsimResult<double> SsimLoss(const Tensor<double>&,
                                            const Tensor<double>&,
                                            const SsimConfig&);
extern template Tensor<float> Magnitude(const Tensor<float>&);
extern template Tensor<double> Magnitude(const Tensor<double>&);
extern template TotalLossResult<float> TotalLoss(const Tensor<float>&,
                                                 const Tensor<float>&,
                                                 const SsimConfig&);
extern template TotalLossResult<double> TotalLoss(const Tensor<double>&,
                                                  const Tensor<double>&,
                                                  const SsimConfig&);

}  // namespace ase

#endif  // ASE_LOSSES_H_
