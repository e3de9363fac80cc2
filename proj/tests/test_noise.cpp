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

#include "doctest.h"

#include "ictmsav/error.hpp"
#include "ictmsav/noise.hpp"

#include <cmath>

using namespace ictmsav;

namespace {

struct Moments {
  double mean = 0, var = 0;
};

template <class Draw> Moments moments(int n, Draw draw) {
  double m = 0, m2 = 0;
  for (int i = 0; i < n; ++i) {
    const double v = draw(i);
    m += v;
    m2 += v * v;
  }
  m /= n;
  return {m, (m2 / n - m * m) * n / (n - 1)};
}

} // namespace

TEST_CASE("philox known answers") {
  using W = std::array<std::uint32_t, 4>;
  CHECK(philox4x32_10({0, 0, 0, 0}, {0, 0}) == W{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        W{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        W{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("pixel streams") {
  PixelStream a(9, 100), b(9, 100), c(9, 101), d(10, 100), e(9, 100, 1);
  const double u = a.uniform();
  CHECK(u == b.uniform());
  CHECK(u != c.uniform());
  CHECK(u != d.uniform());
  CHECK(u != e.uniform());
  PixelStream s(1, 2);
  const Moments m = moments(200000, [&](int) {
    const double v = s.uniform();
    REQUIRE(v > 0.0);
    REQUIRE(v < 1.0);
    return v;
  });
  CHECK(m.mean == doctest::Approx(0.5).epsilon(0.01));
  CHECK(m.var == doctest::Approx(1.0 / 12).epsilon(0.02));
  const Moments n = moments(200000, [&](int) { return s.normal(); });
  CHECK(std::fabs(n.mean) < 0.01);
  CHECK(n.var == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("gamma sampler moments") {
  for (double shape : {0.5, 1.0, 3.0, 10.0}) {
    PixelStream s(42, static_cast<std::uint64_t>(shape * 10));
    const Moments m = moments(300000, [&](int) { return sample_gamma(s, shape); });
    CHECK(m.mean == doctest::Approx(shape).epsilon(0.01));
    CHECK(m.var == doctest::Approx(shape).epsilon(0.03));
  }
  PixelStream s(1, 1);
  CHECK_THROWS_AS(sample_gamma(s, 0.0), ParameterError);
}

TEST_CASE("poisson sampler moments") {
  for (double mean : {0.0, 0.7, 4.0, 9.5, 10.0, 37.0, 250.0}) {
    PixelStream s(7, static_cast<std::uint64_t>(mean * 3));
    const Moments m = moments(200000, [&](int) {
      const double v = sample_poisson(s, mean);
      REQUIRE(v == std::floor(v));
      return v;
    });
    if (mean == 0.0) {
      CHECK(m.mean == 0.0);
      continue;
    }
    CHECK(m.mean == doctest::Approx(mean).epsilon(0.01));
    CHECK(m.var == doctest::Approx(mean).epsilon(0.03));
  }
  PixelStream s(1, 1);
  CHECK_THROWS_AS(sample_poisson(s, -1.0), ParameterError);
}

TEST_CASE("noise fields") {
  const ScalarField eta = sample_gamma_field(64, 32, 4.0, 5);
  CHECK(eta == sample_gamma_field(64, 32, 4.0, 5));
  CHECK_FALSE(eta == sample_gamma_field(64, 32, 4.0, 6));
  CHECK(eta.min() > 0.0);
  // Draws depend on the pixel index only, so a wider field shares its
  // leading pixels.
  const ScalarField wide = sample_gamma_field(64, 40, 4.0, 5);
  for (std::size_t i = 0; i < eta.size(); ++i)
    REQUIRE(wide[i] == eta[i]);

  const ScalarField clean(64, 32, 80.0);
  const ScalarField noisy = apply_noise(clean, {NoiseKind::gamma, 4.0, 5});
  for (std::size_t i = 0; i < noisy.size(); ++i)
    REQUIRE(noisy[i] == doctest::Approx(80.0 * eta[i]).epsilon(1e-15));
  CHECK(apply_noise(clean, {NoiseKind::none, 4.0, 5}) == clean);
  CHECK(apply_poisson(clean, 3) == apply_noise(clean, {NoiseKind::poisson, 1.0, 3}));
  CHECK_THROWS_AS(apply_poisson(ScalarField(2, 2, -1.0), 1), ParameterError);
  CHECK_THROWS_AS(sample_gamma_field(2, 2, 0.0, 1), ParameterError);
}

TEST_CASE("noise kind names") {
  CHECK(parse_noise_kind("gamma") == NoiseKind::gamma);
  CHECK(parse_noise_kind("poisson") == NoiseKind::poisson);
  CHECK(to_string(NoiseKind::none) == "none");
  CHECK_THROWS_AS(parse_noise_kind("speckle"), ConfigError);
}
