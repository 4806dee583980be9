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

#ifndef ASE_FFT_H_
#define ASE_FFT_H_

#include <complex>
#include <cstddef>
#include <span>

namespace ase {

// Real-input DFT of a fixed size backed by FFTW (double precision).
// Instances are cheap handles onto a process-wide plan cache and are safe to
// use from several threads at once.
class RealFft {
 public:
  explicit RealFft(size_t size);

  size_t size() const { return size_; }
  size_t bins() const { return size_ / 2 + 1; }

  // in.size() == size(), out.size() == bins(). Unnormalized.
  void Forward(std::span<const double> in,
               std::span<std::complex<double>> out) const;
  // in.size() == bins(), out.size() == size(). Scaled by 1/size so that
  // Inverse(Forward(x)) == x.
  void Inverse(std::span<const std::complex<double>> in,
               std::span<double> out) const;

 private:
  size_t size_;
  void* forward_plan_;
  void* inverse_plan_;
};

}  // namespace ase

#endif  // ASE_FFT_H_
