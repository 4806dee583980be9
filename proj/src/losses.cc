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

#include "ase/losses.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "ase/error.h"

namespace ase {
namespace {

constexpr double kConstantTargetFloor = 1e-12;
constexpr double kMagnitudeFloor = 1e-8;

template <typename T>
double ResolveRange(const SsimConfig& cfg, const Tensor<T>& reference) {
  if (cfg.dynamic_range > 0.0) return cfg.dynamic_range;
  const auto [lo, hi] =
      std::minmax_element(reference.values().begin(), reference.values().end());
  const double range =
      cfg.range_fraction * (static_cast<double>(*hi) - static_cast<double>(*lo));
  if (!(range > 0.0)) {
    throw Error(ErrorCode::kConstantTarget,
                "reference magnitudes are constant; set an explicit SSIM range");
  }
  return range;
}

}  // namespace

void SsimConfig::Validate() const {
  if (k1 < 0.005 || k1 > 0.01) {
    throw Error(ErrorCode::kConfig, "k1 must lie in [0.005, 0.01]");
  }
  if (k2 < 0.01 || k2 > 0.03) {
    throw Error(ErrorCode::kConfig, "k2 must lie in [0.01, 0.03]");
  }
  if (dynamic_range < 0.0) {
    throw Error(ErrorCode::kConfig, "L must be positive (or 0 for automatic)");
  }
  if (range_fraction <= 0.0 || range_fraction >= 0.5) {
    throw Error(ErrorCode::kConfig, "range_fraction must lie in (0, 0.5)");
  }
  if (window < 1) throw Error(ErrorCode::kConfig, "window must be >= 1");
}

template <typename T>
PixelLossResult<T> PixelLoss(const Tensor<T>& y_hat, const Tensor<T>& y) {
  if (y_hat.shape() != y.shape()) {
    throw Error(ErrorCode::kShapeMismatch, "pixel loss operands differ in shape");
  }
  const size_t n = y.size();
  double mean = 0.0;
  for (size_t i = 0; i < n; ++i) mean += y[i];
  mean /= static_cast<double>(n);
  double numerator = 0.0;
  double denominator = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double r = static_cast<double>(y[i]) - y_hat[i];
    const double d = static_cast<double>(y[i]) - mean;
    numerator += r * r;
    denominator += d * d;
  }
  if (!(denominator > kConstantTargetFloor)) {
    throw Error(ErrorCode::kConstantTarget, "pixel loss target is constant");
  }
  PixelLossResult<T> result{numerator / denominator, Tensor<T>(y.shape())};
  const double scale = -2.0 / denominator;
  for (size_t i = 0; i < n; ++i) {
    result.grad[i] =
        static_cast<T>(scale * (static_cast<double>(y[i]) - y_hat[i]));
  }
  return result;
}

template <typename T>
SsimResult<T> SsimLoss(const Tensor<T>& y_hat_mag, const Tensor<T>& y_mag,
                       const SsimConfig& cfg) {
  cfg.Validate();
  if (y_hat_mag.shape() != y_mag.shape() || y_mag.rank() != 2) {
    throw Error(ErrorCode::kShapeMismatch,
                "SSIM operands must be equal-shape [F, B] tensors");
  }
  const size_t w = cfg.window;
  const size_t rows = y_mag.dim(0);
  const size_t cols = y_mag.dim(1);
  if (rows < w || cols < w) {
    throw Error(ErrorCode::kTooSmall, "SSIM input smaller than its window");
  }
  const double range = ResolveRange(cfg, y_mag);
  const double c1 = (cfg.k1 * range) * (cfg.k1 * range);
  const double c2 = (cfg.k2 * range) * (cfg.k2 * range);

  const size_t out_rows = rows - w + 1;
  const size_t out_cols = cols - w + 1;
  const double count = static_cast<double>(w * w);
  const double n_windows = static_cast<double>(out_rows * out_cols);

  SsimResult<T> result;
  result.map = Tensor<double>({out_rows, out_cols});
  // Per-pixel accumulation of the affine window derivative a + b y + c x.
  Tensor<double> ga({rows, cols});
  Tensor<double> gb({rows, cols});
  Tensor<double> gc({rows, cols});

  double total = 0.0;
  for (size_t r = 0; r < out_rows; ++r) {
    for (size_t c = 0; c < out_cols; ++c) {
      double mx = 0.0, my = 0.0;
      for (size_t i = 0; i < w; ++i) {
        for (size_t j = 0; j < w; ++j) {
          mx += y_hat_mag.at(r + i, c + j);
          my += y_mag.at(r + i, c + j);
        }
      }
      mx /= count;
      my /= count;
      double vx = 0.0, vy = 0.0, cxy = 0.0;
      for (size_t i = 0; i < w; ++i) {
        for (size_t j = 0; j < w; ++j) {
          const double dx = y_hat_mag.at(r + i, c + j) - mx;
          const double dy = y_mag.at(r + i, c + j) - my;
          vx += dx * dx;
          vy += dy * dy;
          cxy += dx * dy;
        }
      }
      vx /= count;
      vy /= count;
      cxy /= count;

      const double a1 = 2.0 * mx * my + c1;
      const double a2 = 2.0 * cxy + c2;
      const double b1 = mx * mx + my * my + c1;
      const double b2 = vx + vy + c2;
      const double denom = b1 * b2;
      const double s = (a1 * a2) / denom;
      result.map.at(r, c) = s;
      total += s;

      const double f = 2.0 / (count * denom);
      const double a = f * (my * a2 - a1 * my - s * mx * b2 + s * b1 * mx);
      const double b = f * a1;
      const double cc = -f * s * b1;
      for (size_t i = 0; i < w; ++i) {
        for (size_t j = 0; j < w; ++j) {
          ga.at(r + i, c + j) += a;
          gb.at(r + i, c + j) += b;
          gc.at(r + i, c + j) += cc;
        }
      }
    }
  }
  result.ssim_mean = total / n_windows;
  result.loss = 1.0 - result.ssim_mean;
  result.grad = Tensor<T>(y_mag.shape());
  for (size_t i = 0; i < y_mag.size(); ++i) {
    const double d = ga[i] + gb[i] * y_mag[i] + gc[i] * y_hat_mag[i];
    result.grad[i] = static_cast<T>(-d / n_windows);
  }
  return result;
}

template <typename T>
Tensor<T> Magnitude(const Tensor<T>& stacked) {
  if (stacked.rank() != 3 || stacked.dim(0) != 2) {
    throw Error(ErrorCode::kShapeMismatch, "expected a [2, F, B] tensor");
  }
  Tensor<T> mag({stacked.dim(1), stacked.dim(2)});
  const auto re = stacked.plane(0);
  const auto im = stacked.plane(1);
  for (size_t i = 0; i < mag.size(); ++i) {
    mag[i] = static_cast<T>(std::sqrt(static_cast<double>(re[i]) * re[i] +
                                      static_cast<double>(im[i]) * im[i]));
  }
  return mag;
}

template <typename T>
TotalLossResult<T> TotalLoss(const Tensor<T>& y_hat, const Tensor<T>& y,
                             const SsimConfig& cfg) {
  if (y_hat.shape() != y.shape()) {
    throw Error(ErrorCode::kShapeMismatch, "loss operands differ in shape");
  }
  PixelLossResult<T> pixel = PixelLoss(y_hat, y);
  const Tensor<T> mag_hat = Magnitude(y_hat);
  const SsimResult<T> ssim = SsimLoss(mag_hat, Magnitude(y), cfg);

  TotalLossResult<T> result;
  result.pixel = pixel.loss;
  result.ssim_mean = ssim.ssim_mean;
  result.loss = pixel.loss + kSsimWeight * ssim.loss;
  result.grad = std::move(pixel.grad);
  const size_t plane = mag_hat.size();
  T* g_re = result.grad.plane(0).data();
  T* g_im = result.grad.plane(1).data();
  const auto re = y_hat.plane(0);
  const auto im = y_hat.plane(1);
  for (size_t i = 0; i < plane; ++i) {
    const double m = std::max(static_cast<double>(mag_hat[i]), kMagnitudeFloor);
    const double g = kSsimWeight * ssim.grad[i] / m;
    g_re[i] += static_cast<T>(g * re[i]);
    g_im[i] += static_cast<T>(g * im[i]);
  }
  return result;
}

template PixelLossResult<float> PixelLoss(const Tensor<float>&,
                                          const Tensor<float>&);
template PixelLossResult<double> PixelLoss(const Tensor<double>&,
                                           const Tensor<double>&);
template SsimResult<float> SsimLoss(const Tensor<float>&, const Tensor<float>&,
                                    const SsimConfig&);
template SsimResult<double> SsimLoss(const Tensor<double>&,
                                     const Tensor<double>&, const SsimConfig&);
template Tensor<float> Magnitude(const Tensor<float>&);
template Tensor<double> Magnitude(const Tensor<double>&);
template TotalLossResult<float> TotalLoss(const Tensor<float>&,
                                          const Tensor<float>&,
                                          const SsimConfig&);
template TotalLossResult<double> TotalLoss(const Tensor<double>&,
                                           const Tensor<double>&,
                                           const SsimConfig&);

}  // namespace ase
