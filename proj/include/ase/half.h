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

#ifndef ASE_HALF_H_
#define ASE_HALF_H_

#include <cstdint>

namespace ase {

// IEEE 754 binary16 conversions, round-to-nearest-even. Overflow saturates
// to infinity; NaN payloads are preserved as a quiet NaN.
uint16_t FloatToHalf(float value);
float HalfToFloat(uint16_t bits);

}  // namespace ase

#endif  // ASE_HALF_H_
