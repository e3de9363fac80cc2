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
#include "ictmsav/metrics.hpp"

#include <random>

using namespace ictmsav;

TEST_CASE("hand-counted confusion example") {
  const ScalarField pred(2, 2, std::vector<double>{1, 1, 0, 0});
  const ScalarField truth(2, 2, std::vector<double>{1, 0, 0, 0});
  const ConfusionCounts c = confusion(pred, truth);
  CHECK(c.tp == 1);
  CHECK(c.fp == 1);
  CHECK(c.fn == 0);
  CHECK(c.tn == 2);
  CHECK(dsc(c) == 2.0 / 3.0);
  CHECK(iou(c) == 0.5);
  CHECK(accuracy(c) == 0.75);
  CHECK(kappa(c) == 0.5);
}

TEST_CASE("metrics against direct formulas on random masks") {
  std::mt19937_64 rng(31);
  std::bernoulli_distribution coin(0.3);
  for (int t = 0; t < 20; ++t) {
    ScalarField p(17, 11), q(17, 11);
    for (std::size_t i = 0; i < p.size(); ++i) {
      p[i] = coin(rng);
      q[i] = coin(rng);
    }
    double tp = 0, fp = 0, fn = 0, tn = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      tp += p[i] * q[i];
      fp += p[i] * (1 - q[i]);
      fn += (1 - p[i]) * q[i];
      tn += (1 - p[i]) * (1 - q[i]);
    }
    const double n = tp + fp + fn + tn;
    const double po = (tp + tn) / n;
    const double pe = ((tp + fp) * (tp + fn) + (fn + tn) * (fp + tn)) / (n * n);
    const MetricRow r = metric_row(confusion(p, q), "x");
    CHECK(r.dsc == doctest::Approx(2 * tp / (2 * tp + fp + fn)));
    CHECK(r.iou == doctest::Approx(tp / (tp + fp + fn)));
    CHECK(r.accuracy == doctest::Approx(po));
    CHECK(r.kappa == doctest::Approx((po - pe) / (1 - pe)));
    CHECK(r.dsc == doctest::Approx(2 * r.iou / (1 + r.iou)));
  }
}

TEST_CASE("degenerate agreement") {
  const ScalarField zeros(3, 3, 0.0);
  bool degenerate = false;
  const ConfusionCounts c = confusion(zeros, zeros);
  CHECK(kappa(c, &degenerate) == 1.0);
  CHECK(degenerate);
  CHECK(accuracy(c) == 1.0);
  const MetricRow r = metric_row(c);
  CHECK(r.kappa_degenerate);
  CHECK_THROWS_AS(confusion(ScalarField(2, 2, 0.5), zeros), ContractViolation);
  CHECK_THROWS_AS(confusion(ScalarField(2, 2), zeros), ContractViolation);
}

TEST_CASE("one-vs-rest report") {
  const IndicatorSet pred = IndicatorSet::from_labels({0, 0, 1, 2, 2, 2}, 3, 2, 3);
  const IndicatorSet truth = IndicatorSet::from_labels({0, 1, 1, 2, 2, 0}, 3, 2, 3);
  const auto rows = multiphase_report(pred, truth, {"a", "b", "c"});
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].name == "a");
  CHECK(rows[0].counts.tp == 1);
  CHECK(rows[0].counts.fp == 1);
  CHECK(rows[0].counts.fn == 1);
  CHECK(rows[1].dsc == doctest::Approx(2.0 / 3.0));
  CHECK(rows[2].iou == doctest::Approx(2.0 / 3.0));
  CHECK(format_row(rows[1]).find("0.6667") != std::string::npos);
  CHECK_THROWS_AS(multiphase_report(pred, IndicatorSet::from_labels({0, 1, 1, 0, 0, 0}, 3, 2, 2)),
                  ContractViolation);
}
