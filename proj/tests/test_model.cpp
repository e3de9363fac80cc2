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
#include "ictmsav/model.hpp"

#include "oracles.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace ictmsav;

TEST_CASE("default parameters") {
  const ModelParams p;
  CHECK_NOTHROW(p.validate());
  CHECK(p.sigma == 1.0);
  CHECK(p.p == 1.3);
  CHECK(p.tau == 0.02);
  CHECK(p.rho == 3.0);
  CHECK(p.tol1 == 1e-8);
  CHECK(p.tol2 == 1e-3);
  CHECK(p.eta_relax == 0.99);
  CHECK(p.mu == doctest::Approx(1e-9 * 255 * 255));
  CHECK(p.lambdas == std::vector<double>{1.0, 1.0});
}

TEST_CASE("parameter validation") {
  auto bad = [](auto mutate) {
    ModelParams p;
    mutate(p);
    CHECK_THROWS_AS(p.validate(), ParameterError);
  };
  bad([](ModelParams &p) { p.n_phases = 1; });
  bad([](ModelParams &p) { p.n_phases = 3; });
  bad([](ModelParams &p) { p.lambdas = {1.0, 0.0}; });
  bad([](ModelParams &p) { p.mu = -1; });
  bad([](ModelParams &p) { p.gamma = NAN; });
  bad([](ModelParams &p) { p.rho = 0; });
  bad([](ModelParams &p) { p.dt = 0; });
  bad([](ModelParams &p) { p.eta_relax = 1.5; });
  bad([](ModelParams &p) { p.c0 = 0; });
  bad([](ModelParams &p) { p.max_inner = 0; });
  bad([](ModelParams &p) { p.intensity_scale = 0; });
  ModelParams p;
  p.tol1 = p.tol2 = -1.0;
  CHECK_NOTHROW(p.validate());
}

TEST_CASE("indicator sets") {
  const IndicatorSet u = IndicatorSet::from_labels({0, 1, 2, 1, 0, 2}, 3, 2, 3);
  CHECK(u.n() == 3);
  CHECK(u[1](1, 0) == 1.0);
  CHECK(u[1](0, 0) == 0.0);
  CHECK(u.labels() == std::vector<int>{0, 1, 2, 1, 0, 2});
  CHECK(IndicatorSet::from_label_field(u.label_field(), 3) == u);
  CHECK_THROWS_AS(IndicatorSet::from_labels({0, 3}, 2, 1, 3), ContractViolation);
  CHECK_THROWS_AS(IndicatorSet({ScalarField(2, 1, 1.0), ScalarField(2, 1, 1.0)}), ContractViolation);
  CHECK_THROWS_AS(IndicatorSet({ScalarField(2, 1, 0.5), ScalarField(2, 1, 0.5)}), ContractViolation);
  CHECK_THROWS_AS(IndicatorSet::from_label_field(ScalarField(2, 1, 0.5), 2), ContractViolation);
}

TEST_CASE("gray indicator") {
  std::mt19937_64 rng(11);
  const ScalarField f = oracle::random_field(rng, 12, 10, 0.0, 200.0);
  const ScalarField a = compute_alpha(f, 1.0, 1.3);
  const ScalarField s = oracle::convolve(f, make_gaussian_kernel(1.0));
  const double m = s.max();
  for (std::size_t i = 0; i < a.size(); ++i)
    REQUIRE(a[i] == doctest::Approx(std::pow(s[i] / m, 1.3)).epsilon(1e-12));
  CHECK(a.max() == doctest::Approx(1.0));
  CHECK(compute_alpha(ScalarField(4, 4, 7.0), 1.0, 2.0).min() == doctest::Approx(1.0));
  CHECK_THROWS_AS(compute_alpha(ScalarField(4, 4, 0.0), 1.0, 1.3), DegenerateInput);
  CHECK_THROWS_AS(compute_alpha(ScalarField(4, 4, -1.0), 1.0, 1.3), ContractViolation);
}

TEST_CASE("fitting field and energy against the double sum") {
  std::mt19937_64 rng(12);
  const ScalarField g = oracle::random_field(rng, 9, 6, 0.1, 1.0);
  const ScalarField b = oracle::random_field(rng, 9, 6, 0.5, 1.5);
  const Kernel k = make_gaussian_kernel(2.5);
  for (double c : {0.0, 0.4, 1.7}) {
    const ScalarField ref = oracle::fitting_field(g, b, c, k);
    CHECK(oracle::max_abs_diff(fitting_field(g, b, c, k), ref) < 1e-13);
  }
  ModelParams prm;
  prm.rho = 2.5;
  prm.lambdas = {0.5, 2.0};
  const KernelBank kb = KernelBank::build(prm, 9, 6);
  SegState st{{0.3, 0.8}, b, g, IndicatorSet(oracle::random_partition(rng, 9, 6, 2))};
  const double ref = oracle::fit_energy(g, b, st.c, st.u.masks(), prm.lambdas, kb.rho);
  CHECK(fitting_energy(st, prm, kb) == doctest::Approx(ref).epsilon(1e-13));
}

TEST_CASE("kernel bank") {
  ModelParams prm;
  const KernelBank kb = KernelBank::build(prm, 100, 60);
  CHECK(kb.heat_scale == 100.0);
  CHECK(kb.length_prefactor == doctest::Approx(std::sqrt(std::numbers::pi / (0.02 * 100 * 100))));
  CHECK(kb.rho.radius() == 12);
  CHECK(kb.sigma.radius() == 4);
  prm.heat_scale = 50.0;
  CHECK(KernelBank::build(prm, 100, 60).heat.radius() == 40);
}

TEST_CASE("length energy") {
  std::mt19937_64 rng(13);
  ModelParams prm;
  prm.tau = 0.01;
  const KernelBank kb = KernelBank::build(prm, 8, 7);
  const IndicatorSet u(oracle::random_partition(rng, 8, 7, 3));
  const double ref = oracle::length_energy(u.masks(), 0.3, prm.tau, 8, kb.heat);
  CHECK(length_energy(u, 0.3, kb) == doctest::Approx(ref).epsilon(1e-13));
  CHECK(length_energy(u, 0.0, kb) == 0.0);
  const IndicatorSet whole({ScalarField(8, 7, 1.0), ScalarField(8, 7, 0.0)});
  CHECK(length_energy(whole, 1.0, kb) == 0.0);
}

TEST_CASE("length of a straight edge in pixels") {
  ModelParams prm;
  const int n = 96;
  prm.tau = 0.5 * (2.0 / n) * (2.0 / n);
  const KernelBank kb = KernelBank::build(prm, n, n);
  std::vector<int> lab(static_cast<std::size_t>(n) * n);
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x)
      lab[static_cast<std::size_t>(y) * n + x] = y < 40 ? 1 : 0;
  const double len = length_energy(IndicatorSet::from_labels(lab, n, n, 2), 1.0, kb);
  CHECK(len / 2 == doctest::Approx(n).epsilon(0.03));
}

TEST_CASE("data and smoothness energies") {
  const ScalarField g(2, 1, std::vector<double>{1.0, 2.0});
  const ScalarField f(2, 1, std::vector<double>{2.0, 1.0});
  CHECK(idiv_energy(g, f, 0.5, 1e-3) == doctest::Approx(0.5 * (1.0 + 2.0 - std::log(2.0))));
  CHECK(idiv_energy(g, f, 0.0, 1e-3) == 0.0);
  CHECK_THROWS_AS(idiv_energy(ScalarField(2, 1, 1e-4), f, 1.0, 1e-3), ContractViolation);
  const ScalarField alpha(2, 1, std::vector<double>{0.5, 1.0});
  // Forward difference 1 at the first pixel, 0 at the last column.
  const double eps = 0.1;
  CHECK(tv_energy(g, alpha, 2.0, eps) == doctest::Approx(2.0 * (0.5 * std::sqrt(1 + eps * eps) + eps)));

  ModelParams prm;
  prm.rho = 1.0;
  prm.tau = 1.0;
  const KernelBank kb = KernelBank::build(prm, 2, 1);
  const SegState st{{1.0, 2.0}, ScalarField(2, 1, 1.0), g, IndicatorSet::from_labels({0, 1}, 2, 1, 2)};
  const ScalarField a(2, 1, 1.0);
  const EnergyBreakdown e = total_energy(st, f, a, prm, kb);
  CHECK(e.total == doctest::Approx(e.fit + e.length + e.idiv + e.tv));
  CHECK(e.idiv == doctest::Approx(idiv_energy(g, f, prm.gamma, prm.g_floor)));
}
