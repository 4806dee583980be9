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

#ifndef ASE_SRC_CONV_KERNELS_H_
#define ASE_SRC_CONV_KERNELS_H_

// Plane-level kernels shared by the float and integer model paths. A plane
// is rows x cols, row-major; a padded plane is (rows + 2p) x (cols + 2p).

#include <algorithm>
#include <cstddef>

namespace ase::detail {

// Fills the border of a padded plane by repeating its edge rows/columns.
// The interior must already hold the source plane.
template <typename T>
void FillReplicateBorder(T* padded, size_t rows, size_t cols, size_t pad) {
  const size_t pc = cols + 2 * pad;
  for (size_t r = pad; r < rows + pad; ++r) {
    T* row = padded + r * pc;
    std::fill(row, row + pad, row[pad]);
    std::fill(row + pad + cols, row + pc, row[pad + cols - 1]);
  }
  for (size_t r = 0; r < pad; ++r) {
    std::copy(padded + pad * pc, padded + (pad + 1) * pc, padded + r * pc);
    std::copy(padded + (pad + rows - 1) * pc, padded + (pad + rows) * pc,
              padded + (pad + rows + r) * pc);
  }
}

template <typename T>
void PadReplicate(const T* src, size_t rows, size_t cols, size_t pad,
                  T* padded) {
  const size_t pc = cols + 2 * pad;
  for (size_t r = 0; r < rows; ++r) {
    std::copy(src + r * cols, src + (r + 1) * cols,
              padded + (r + pad) * pc + pad);
  }
  FillReplicateBorder(padded, rows, cols, pad);
}

// grad_src += adjoint of PadReplicate applied to grad_padded.
template <typename T>
void PadReplicateAdjoint(const T* grad_padded, size_t rows, size_t cols,
                         size_t pad, T* grad_src) {
  const size_t pc = cols + 2 * pad;
  for (size_t pr = 0; pr < rows + 2 * pad; ++pr) {
    const size_t sr = std::clamp<size_t>(pr < pad ? 0 : pr - pad, 0, rows - 1);
    const T* g = grad_padded + pr * pc;
    T* dst = grad_src + sr * cols;
    for (size_t j = 0; j < pad; ++j) dst[0] += g[j];
    for (size_t c = 0; c < cols; ++c) dst[c] += g[pad + c];
    for (size_t j = 0; j < pad; ++j) dst[cols - 1] += g[pad + cols + j];
  }
}

// out[r][c] = sum_{ky,kx} kernel[ky][kx] * padded[r + ky][c + kx].
template <typename In, typename W, typename Acc>
void DepthwiseConv(const In* padded, size_t rows, size_t cols, size_t k,
                   const W* kernel, Acc* out) {
  const size_t pc = cols + k - 1;
  for (size_t r = 0; r < rows; ++r) {
    Acc* o = out + r * cols;
    std::fill(o, o + cols, Acc(0));
    for (size_t ky = 0; ky < k; ++ky) {
      const In* in_row = padded + (r + ky) * pc;
      for (size_t kx = 0; kx < k; ++kx) {
        const Acc w = static_cast<Acc>(kernel[ky * k + kx]);
        const In* in = in_row + kx;
        for (size_t c = 0; c < cols; ++c) o[c] += w * static_cast<Acc>(in[c]);
      }
    }
  }
}

// grad_padded += transpose of DepthwiseConv applied to grad_out.
template <typename T>
void DepthwiseConvAdjointInput(const T* grad_out, size_t rows, size_t cols,
                               size_t k, const T* kernel, T* grad_padded) {
  const size_t pc = cols + k - 1;
  for (size_t r = 0; r < rows; ++r) {
    const T* g = grad_out + r * cols;
    for (size_t ky = 0; ky < k; ++ky) {
      T* gp_row = grad_padded + (r + ky) * pc;
      for (size_t kx = 0; kx < k; ++kx) {
        const T w = kernel[ky * k + kx];
        T* gp = gp_row + kx;
        for (size_t c = 0; c < cols; ++c) gp[c] += w * g[c];
      }
    }
  }
}

// grad_kernel[ky][kx] += sum_{r,c} grad_out[r][c] * padded[r + ky][c + kx].
// Partial sums are kept per column so the inner loop vectorizes; `scratch`
// must hold `cols` elements.
template <typename T>
void DepthwiseConvAdjointKernel(const T* grad_out, const T* padded,
                                size_t rows, size_t cols, size_t k,
                                T* grad_kernel, T* scratch) {
  const size_t pc = cols + k - 1;
  for (size_t ky = 0; ky < k; ++ky) {
    for (size_t kx = 0; kx < k; ++kx) {
      std::fill(scratch, scratch + cols, T(0));
      for (size_t r = 0; r < rows; ++r) {
        const T* g = grad_out + r * cols;
        const T* in = padded + (r + ky) * pc + kx;
        for (size_t c = 0; c < cols; ++c) scratch[c] += g[c] * in[c];
      }
      double total = 0.0;
      for (size_t c = 0; c < cols; ++c) total += scratch[c];
      grad_kernel[ky * k + kx] += static_cast<T>(total);
    }
  }
}

// Lane-split dot product; the fixed lane count lets the compiler vectorize
// without reassociating a single accumulator.
template <typename T>
double Dot(const T* a, const T* b, size_t n) {
  constexpr size_t kLanes = 16;
  T lanes[kLanes] = {};
  size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    for (size_t l = 0; l < kLanes; ++l) lanes[l] += a[i + l] * b[i + l];
  }
  double total = 0.0;
  for (size_t l = 0; l < kLanes; ++l) total += lanes[l];
  for (; i < n; ++i) total += static_cast<double>(a[i]) * b[i];
  return total;
}

}  // namespace ase::detail

#endif  // ASE_SRC_CONV_KERNELS_H_
