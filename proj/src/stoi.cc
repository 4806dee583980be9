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

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include "ase/error.h"
#include "ase/fft.h"
#include "ase/metrics.h"

namespace ase {
namespace {

constexpr int kStoiRate = 10000;
constexpr size_t kFrame = 256;
constexpr size_t kFftSize = 512;
constexpr size_t kBands = 15;
constexpr double kMinFreq = 150.0;
constexpr size_t kSegment = 30;
constexpr double kClipDb = -15.0;
constexpr double kDynamicRangeDb = 40.0;
constexpr double kKaiserBeta = 5.0;
const double kEps = std::numeric_limits<double>::epsilon();

// Hann of length n + 2 without its zero endpoints.
std::vector<double> InnerHann(size_t n) {
  std::vector<double> w(n);
  for (size_t i = 0; i < n; ++i) {
    w[i] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * (i + 1) / (n + 1)));
  }
  return w;
}

using Frames = std::vector<std::vector<double>>;

// Drops frames of x more than kDynamicRangeDb below its loudest frame (and
// the matching frames of y), then overlap-adds what remains.
void RemoveSilentFrames(std::vector<double>& x, std::vector<double>& y) {
  const size_t hop = kFrame / 2;
  const std::vector<double> w = InnerHann(kFrame);
  Frames xf, yf;
  std::vector<double> energy;
  for (size_t start = 0; start + kFrame <= x.size(); start += hop) {
    std::vector<double> a(kFrame), b(kFrame);
    double e = 0.0;
    for (size_t n = 0; n < kFrame; ++n) {
      a[n] = w[n] * x[start + n];
      b[n] = w[n] * y[start + n];
      e += a[n] * a[n];
    }
    energy.push_back(20.0 * std::log10(std::sqrt(e) + kEps));
    xf.push_back(std::move(a));
    yf.push_back(std::move(b));
  }
  const double loudest =
      energy.empty() ? 0.0 : *std::max_element(energy.begin(), energy.end());
  Frames kept_x, kept_y;
  for (size_t i = 0; i < energy.size(); ++i) {
    if (loudest - kDynamicRangeDb - energy[i] < 0.0) {
      kept_x.push_back(std::move(xf[i]));
      kept_y.push_back(std::move(yf[i]));
    }
  }
  auto overlap_add = [&](const Frames& frames) {
    if (frames.empty()) return std::vector<double>();
    std::vector<double> out((frames.size() - 1) * hop + kFrame, 0.0);
    for (size_t i = 0; i < frames.size(); ++i) {
      for (size_t n = 0; n < kFrame; ++n) out[i * hop + n] += frames[i][n];
    }
    return out;
  };
  x = overlap_add(kept_x);
  y = overlap_add(kept_y);
}

// Power spectra, frame-major: [frames][kFftSize / 2 + 1].
Frames PowerSpectra(const std::vector<double>& x) {
  const size_t hop = kFrame / 2;
  const std::vector<double> w = InnerHann(kFrame);
  const RealFft fft(kFftSize);
  std::vector<double> frame(kFftSize, 0.0);
  std::vector<std::complex<double>> spectrum(fft.bins());
  Frames out;
  for (size_t start = 0; start + kFrame < x.size(); start += hop) {
    for (size_t n = 0; n < kFrame; ++n) frame[n] = w[n] * x[start + n];
    fft.Forward(frame, spectrum);
    std::vector<double> power(fft.bins());
    for (size_t k = 0; k < power.size(); ++k) power[k] = std::norm(spectrum[k]);
    out.push_back(std::move(power));
  }
  return out;
}

// Bin ranges [lo, hi) of the third-octave bands.
std::vector<std::pair<size_t, size_t>> ThirdOctaveBands() {
  const size_t bins = kFftSize / 2 + 1;
  std::vector<double> freqs(bins);
  for (size_t k = 0; k < bins; ++k) {
    freqs[k] = static_cast<double>(k) * kStoiRate / kFftSize;
  }
  auto nearest = [&](double f) {
    size_t best = 0;
    for (size_t k = 1; k < bins; ++k) {
      if ((freqs[k] - f) * (freqs[k] - f) <
          (freqs[best] - f) * (freqs[best] - f)) {
        best = k;
      }
    }
    return best;
  };
  std::vector<std::pair<size_t, size_t>> bands(kBands);
  for (size_t b = 0; b < kBands; ++b) {
    const double k = static_cast<double>(b);
    const double lo = kMinFreq * std::pow(2.0, (2.0 * k - 1.0) / 6.0);
    const double hi = kMinFreq * std::pow(2.0, (2.0 * k + 1.0) / 6.0);
    bands[b] = {nearest(lo), nearest(hi)};
  }
  return bands;
}

// [band][frame] envelopes.
Frames BandEnvelopes(const Frames& spectra) {
  const auto bands = ThirdOctaveBands();
  Frames out(kBands, std::vector<double>(spectra.size()));
  for (size_t t = 0; t < spectra.size(); ++t) {
    for (size_t b = 0; b < kBands; ++b) {
      double sum = 0.0;
      for (size_t k = bands[b].first; k < bands[b].second; ++k) {
        sum += spectra[t][k];
      }
      out[b][t] = std::sqrt(sum);
    }
  }
  return out;
}

double Norm(const std::vector<double>& v) {
  return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
}

}  // namespace

std::vector<double> ResamplePoly(std::span<const double> input, int from_rate,
                                 int to_rate, int half_taps) {
  if (from_rate == to_rate) return {input.begin(), input.end()};
  const int g = std::gcd(from_rate, to_rate);
  const long up = to_rate / g;
  const long down = from_rate / g;
  const long center = static_cast<long>(half_taps) * up;
  const long length = 2 * center + 1;
  const double cutoff = 0.5 / static_cast<double>(std::max(up, down));

  std::vector<double> h(static_cast<size_t>(length));
  const double i0_beta = std::cyl_bessel_i(0.0, kKaiserBeta);
  double sum = 0.0;
  for (long n = 0; n < length; ++n) {
    const double t = static_cast<double>(n - center);
    const double x = 2.0 * cutoff * t;
    const double sinc =
        x == 0.0 ? 1.0 : std::sin(std::numbers::pi * x) / (std::numbers::pi * x);
    const double r = t / static_cast<double>(center);
    const double win =
        std::cyl_bessel_i(0.0, kKaiserBeta * std::sqrt(std::max(0.0, 1.0 - r * r))) /
        i0_beta;
    h[static_cast<size_t>(n)] = sinc * win;
    sum += h[static_cast<size_t>(n)];
  }
  // Unit DC gain after zero stuffing.
  for (double& v : h) v *= static_cast<double>(up) / sum;

  const long in_len = static_cast<long>(input.size());
  const long out_len = (in_len * up + down - 1) / down;
  std::vector<double> out(static_cast<size_t>(out_len), 0.0);
  for (long m = 0; m < out_len; ++m) {
    const long pos = m * down;
    long n_lo = pos - center;
    n_lo = n_lo <= 0 ? 0 : (n_lo + up - 1) / up;
    const long n_hi = std::min(in_len - 1, (pos + center) / up);
    double acc = 0.0;
    for (long n = n_lo; n <= n_hi; ++n) {
      acc += input[static_cast<size_t>(n)] *
             h[static_cast<size_t>(pos - n * up + center)];
    }
    out[static_cast<size_t>(m)] = acc;
  }
  return out;
}

double Stoi(std::span<const float> reference, std::span<const float> estimate,
            int sample_rate) {
  if (reference.size() != estimate.size()) {
    throw Error(ErrorCode::kLengthMismatch, "STOI inputs differ in length");
  }
  std::vector<double> x(reference.begin(), reference.end());
  std::vector<double> y(estimate.begin(), estimate.end());
  x = ResamplePoly(x, sample_rate, kStoiRate);
  y = ResamplePoly(y, sample_rate, kStoiRate);
  const size_t min_samples = kSegment * kFrame / 2 + kFrame;
  if (x.size() < min_samples) {
    throw Error(ErrorCode::kTooShort, "STOI needs at least 0.384 s of audio");
  }

  RemoveSilentFrames(x, y);
  const Frames x_env = BandEnvelopes(PowerSpectra(x));
  const Frames y_env = BandEnvelopes(PowerSpectra(y));
  const size_t frames = x_env.empty() ? 0 : x_env[0].size();
  if (frames < kSegment) {
    throw Error(ErrorCode::kTooShort,
                "fewer than 30 non-silent frames remain for STOI");
  }

  const double clip = std::pow(10.0, -kClipDb / 20.0);
  double total = 0.0;
  size_t count = 0;
  std::vector<double> xs(kSegment), ys(kSegment);
  for (size_t m = kSegment; m <= frames; ++m) {
    for (size_t b = 0; b < kBands; ++b) {
      for (size_t j = 0; j < kSegment; ++j) {
        xs[j] = x_env[b][m - kSegment + j];
        ys[j] = y_env[b][m - kSegment + j];
      }
      const double gain = Norm(xs) / (Norm(ys) + kEps);
      for (size_t j = 0; j < kSegment; ++j) {
        ys[j] = std::min(ys[j] * gain, xs[j] * (1.0 + clip));
      }
      const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / kSegment;
      const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / kSegment;
      for (size_t j = 0; j < kSegment; ++j) {
        xs[j] -= mx;
        ys[j] -= my;
      }
      const double nx = Norm(xs) + kEps;
      const double ny = Norm(ys) + kEps;
      double corr = 0.0;
      for (size_t j = 0; j < kSegment; ++j) corr += (xs[j] / nx) * (ys[j] / ny);
      total += corr;
      ++count;
    }
  }
  return total / static_cast<double>(count);
}

}  // namespace ase
