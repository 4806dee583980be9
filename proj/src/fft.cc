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

#include "ase/fft.h"

#include <fftw3.h>

#include <algorithm>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>

namespace ase {
namespace {

struct Plans {
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
};

// FFTW planning is not thread-safe; execution with the new-array interface
// is, provided buffers share the planning alignment (fftw_malloc).
std::mutex& PlannerMutex() {
  static std::mutex m;
  return m;
}

Plans GetPlans(size_t n) {
  static std::map<size_t, Plans> cache;
  std::lock_guard<std::mutex> lock(PlannerMutex());
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  const int size = static_cast<int>(n);
  double* real = fftw_alloc_real(n);
  fftw_complex* spec = fftw_alloc_complex(n / 2 + 1);
  Plans p;
  p.forward = fftw_plan_dft_r2c_1d(size, real, spec, FFTW_ESTIMATE);
  p.inverse = fftw_plan_dft_c2r_1d(size, spec, real, FFTW_ESTIMATE);
  fftw_free(real);
  fftw_free(spec);
  cache.emplace(n, p);
  return p;
}

struct FftwDeleter {
  void operator()(void* p) const { fftw_free(p); }
};

}  // namespace

RealFft::RealFft(size_t size) : size_(size) {
  const Plans p = GetPlans(size);
  forward_plan_ = p.forward;
  inverse_plan_ = p.inverse;
}

void RealFft::Forward(std::span<const double> in,
                      std::span<std::complex<double>> out) const {
  std::unique_ptr<double, FftwDeleter> real(fftw_alloc_real(size_));
  std::unique_ptr<fftw_complex, FftwDeleter> spec(fftw_alloc_complex(bins()));
  std::copy(in.begin(), in.end(), real.get());
  fftw_execute_dft_r2c(static_cast<fftw_plan>(forward_plan_), real.get(),
                       spec.get());
  for (size_t k = 0; k < bins(); ++k) {
    out[k] = {spec.get()[k][0], spec.get()[k][1]};
  }
}

void RealFft::Inverse(std::span<const std::complex<double>> in,
                      std::span<double> out) const {
  std::unique_ptr<double, FftwDeleter> real(fftw_alloc_real(size_));
  std::unique_ptr<fftw_complex, FftwDeleter> spec(fftw_alloc_complex(bins()));
  // c2r destroys its input, so it always works on a private copy.
  std::memcpy(spec.get(), in.data(), bins() * sizeof(fftw_complex));
  fftw_execute_dft_c2r(static_cast<fftw_plan>(inverse_plan_), spec.get(),
                       real.get());
  const double scale = 1.0 / static_cast<double>(size_);
  for (size_t i = 0; i < size_; ++i) out[i] = real.get()[i] * scale;
}

}  // namespace ase
