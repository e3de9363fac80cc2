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
#include "ictmsav/noise.hpp"

#include "ictmsav/error.hpp"

#include <cmath>

namespace ictmsav {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

constexpr std::uint32_t kGammaTag = 1;
constexpr std::uint32_t kPoissonTag = 2;

} // namespace

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key) noexcept {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kPhiloxW0;
      key[1] += kPhiloxW1;
    }
    const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

PixelStream::PixelStream(std::uint64_t seed, std::uint64_t pixel, std::uint32_t tag) noexcept
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
      counter_{static_cast<std::uint32_t>(pixel), static_cast<std::uint32_t>(pixel >> 32), 0u, tag} {}

void PixelStream::refill() noexcept {
  block_ = philox4x32_10(counter_, key_);
  ++counter_[2];
  used_ = 0;
}

double PixelStream::uniform() noexcept {
  if (used_ >= 4)
    refill();
  const std::uint32_t a = block_[static_cast<std::size_t>(used_)] >> 5;
  const std::uint32_t b = block_[static_cast<std::size_t>(used_ + 1)] >> 6;
  used_ += 2;
  const double k = static_cast<double>(a) * 67108864.0 + static_cast<double>(b);
  return (k + 0.5) / 9007199254740992.0;
}

double PixelStream::normal() noexcept {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double m = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * m;
  has_spare_ = true;
  return u * m;
}

double sample_gamma(PixelStream &stream, double shape) {
  if (!(shape > 0.0) || !std::isfinite(shape))
    throw ParameterError("gamma shape must be positive");
  if (shape < 1.0) {
    const double boosted = sample_gamma(stream, shape + 1.0);
    return boosted * std::pow(stream.uniform(), 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = stream.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = stream.uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2)
      return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v)))
      return d * v;
  }
}

double sample_poisson(PixelStream &stream, double mean) {
  if (!(mean >= 0.0) || !std::isfinite(mean))
    throw ParameterError("poisson mean must be finite and nonnegative");
  if (mean == 0.0)
    return 0.0;
  if (mean < 10.0) {
    const double u = stream.uniform();
    double p = std::exp(-mean);
    double cdf = p;
    double k = 0.0;
    while (u > cdf && p > 0.0) {
      k += 1.0;
      p *= mean / k;
      cdf += p;
    }
    return k;
  }
  // Transformed rejection with squeeze (PTRS).
  const double smu = std::sqrt(mean);
  const double b = 0.931 + 2.53 * smu;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  const double log_mean = std::log(mean);
  for (;;) {
    const double u = stream.uniform() - 0.5;
    const double v = stream.uniform();
    const double us = 0.5 - std::fabs(u);
    const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= vr)
      return k;
    if (k < 0.0 || (us < 0.013 && v > us))
      continue;
    if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
        -mean + k * log_mean - std::lgamma(k + 1.0))
      return k;
  }
}

NoiseKind parse_noise_kind(const std::string &name) {
  if (name == "none")
    return NoiseKind::none;
  if (name == "poisson")
    return NoiseKind::poisson;
  if (name == "gamma")
    return NoiseKind::gamma;
  throw ConfigError("unknown noise kind '" + name + "' (expected none, poisson or gamma)");
}

std::string to_string(NoiseKind kind) {
  switch (kind) {
  case NoiseKind::none: return "none";
  case NoiseKind::poisson: return "poisson";
  case NoiseKind::gamma: return "gamma";
  }
  return "none";
}

ScalarField sample_gamma_field(int width, int height, double looks, std::uint64_t seed) {
  if (!(looks > 0.0) || !std::isfinite(looks))
    throw ParameterError("gamma looks L must be positive, got " + std::to_string(looks));
  ScalarField eta(width, height);
  const double scale = 1.0 / looks;
  for (std::size_t i = 0; i < eta.size(); ++i) {
    PixelStream stream(seed, i, kGammaTag);
    eta[i] = sample_gamma(stream, looks) * scale;
  }
  return eta;
}

ScalarField apply_multiplicative(const ScalarField &clean, const ScalarField &eta) {
  require_same_shape(clean, eta, "apply_multiplicative");
  return hadamard(clean, eta);
}

ScalarField apply_poisson(const ScalarField &clean, std::uint64_t seed) {
  ScalarField out(clean.width(), clean.height());
  for (std::size_t i = 0; i < clean.size(); ++i) {
    if (!(clean[i] >= 0.0))
      throw ParameterError("poisson noise needs nonnegative pixels; pixel " + std::to_string(i) + " is " +
                           std::to_string(clean[i]));
    PixelStream stream(seed, i, kPoissonTag);
    out[i] = sample_poisson(stream, clean[i]);
  }
  return out;
}

ScalarField apply_noise(const ScalarField &clean, const NoiseSpec &spec) {
  switch (spec.kind) {
  case NoiseKind::none: return clean;
  case NoiseKind::poisson: return apply_poisson(clean, spec.seed);
  case NoiseKind::gamma:
    return apply_multiplicative(clean, sample_gamma_field(clean.width(), clean.height(), spec.looks, spec.seed));
  }
  return clean;
}

} // namespace ictmsav
