/*=========================================================================
 *
 *  Copyright The ictmsav Authors
 *
 *  Licensed under the Apache License, Version 2.0 (the "License");
 *  you may not use this file except in compliance with the License.
 *  You may obtain a copy of the License at
 *
 *         http://www.apache.org/licenses/LICENSE-2.0.txt
 *
 *  Unless required by applicable law or agreed to in writing, software
 *  distributed under the License is distributed on an "AS IS" BASIS,
 *  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 *  See the License for the specific language governing permissions and
 *  limitations under the License.
 *
 *=========================================================================*/
#pragma once

#include "ictmsav/field.hpp"

#include <array>
#include <cstdint>
#include <string>

namespace ictmsav {

/// Philox4x32-10 counter-based generator (Salmon, Moraes, Dror, Shaw 2011).
/// A 128-bit counter is enciphered under a 64-bit key; equal (key, counter)
/// pairs give equal outputs on every platform.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key) noexcept;

/// Sequential draws for one pixel. The key is the seed; the counter is
/// (pixel index lo, pixel index hi, block number, stream tag). Each block
/// yields two 53-bit uniforms.
class PixelStream {
public:
  PixelStream(std::uint64_t seed, std::uint64_t pixel, std::uint32_t tag = 0) noexcept;

  /// Uniform on the open interval (0, 1).
  double uniform() noexcept;
  /// Standard normal (Marsaglia polar method).
  double normal() noexcept;

private:
  void refill() noexcept;

  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> counter_;
  std::array<std::uint32_t, 4> block_{};
  int used_ = 4;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Gamma(shape, scale=1) by Marsaglia-Tsang; shapes below 1 use the
/// Gamma(shape+1) * U^(1/shape) boost.
double sample_gamma(PixelStream &stream, double shape);

/// Poisson(mean): inversion below mean 10, Hormann's PTRS above.
double sample_poisson(PixelStream &stream, double mean);

enum class NoiseKind { none, poisson, gamma };

struct NoiseSpec {
  NoiseKind kind = NoiseKind::none;
  double looks = 10.0; ///< L; the Gamma scale is 1/L so the noise has mean 1
  std::uint64_t seed = 0;
};

NoiseKind parse_noise_kind(const std::string &name);
std::string to_string(NoiseKind kind);

/// i.i.d. Gamma(L, 1/L) multiplicative noise field.
ScalarField sample_gamma_field(int width, int height, double looks, std::uint64_t seed);

/// Pointwise clean * eta. No clamping.
ScalarField apply_multiplicative(const ScalarField &clean, const ScalarField &eta);

/// Pixel values are used directly as Poisson means.
ScalarField apply_poisson(const ScalarField &clean, std::uint64_t seed);

/// Dispatches on `spec.kind`.
ScalarField apply_noise(const ScalarField &clean, const NoiseSpec &spec);

} // namespace ictmsav
