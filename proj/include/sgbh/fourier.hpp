/*
 * Copyright 2026 The sgbh Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef SGBH_FOURIER_HPP_
#define SGBH_FOURIER_HPP_

#include <cmath>
#include <numbers>

namespace sgbh {

// Truncated Fourier series of the unit square wave with half-period H:
// (4/pi) * sum_{odd i <= n} sin(pi i phi / H) / i. Tends to sign(phi) on
// (-H, H) as n grows.
inline double fourier_sign_surrogate(double phi, double h, int n) {
  double s = 0.0;
  for (int i = 1; i <= n; i += 2) {
    s += std::sin(std::numbers::pi * i * phi / h) / i;
  }
  return 4.0 / std::numbers::pi * s;
}

// Derivative of fourier_sign_surrogate, used as the backward estimate of
// d sign(phi) / d phi: (4/H) * sum_{odd i <= n} cos(pi i phi / H).
inline double fourier_sign_grad(double phi, double h, int n) {
  double s = 0.0;
  for (int i = 1; i <= n; i += 2) {
    s += std::cos(std::numbers::pi * i * phi / h);
  }
  return 4.0 / h * s;
}

}  // namespace sgbh

#endif  // SGBH_FOURIER_HPP_
