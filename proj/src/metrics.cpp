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
#include "ictmsav/metrics.hpp"

#include "ictmsav/error.hpp"

#include <cstdio>

namespace ictmsav {

ConfusionCounts confusion(const ScalarField &pred, const ScalarField &truth) {
  require_same_shape(pred, truth, "confusion");
  ConfusionCounts c;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double p = pred[i], t = truth[i];
    if ((p != 0.0 && p != 1.0) || (t != 0.0 && t != 1.0))
      throw ContractViolation("confusion needs binary masks (pixel " + std::to_string(i) + ")");
    if (p == 1.0)
      (t == 1.0 ? c.tp : c.fp)++;
    else
      (t == 1.0 ? c.fn : c.tn)++;
  }
  return c;
}

double dsc(const ConfusionCounts &c) {
  const auto denom = 2 * c.tp + c.fp + c.fn;
  return denom == 0 ? 1.0 : 2.0 * static_cast<double>(c.tp) / static_cast<double>(denom);
}

double iou(const ConfusionCounts &c) {
  const auto denom = c.tp + c.fp + c.fn;
  return denom == 0 ? 1.0 : static_cast<double>(c.tp) / static_cast<double>(denom);
}

double accuracy(const ConfusionCounts &c) {
  if (c.total() <= 0)
    throw ContractViolation("metrics need at least one pixel");
  return static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
}

double kappa(const ConfusionCounts &c, bool *degenerate) {
  const double n = static_cast<double>(c.total());
  const double po = accuracy(c);
  const double pe = (static_cast<double>(c.tp + c.fp) * static_cast<double>(c.tp + c.fn) +
                     static_cast<double>(c.fn + c.tn) * static_cast<double>(c.fp + c.tn)) /
                    (n * n);
  if (degenerate)
    *degenerate = pe == 1.0;
  if (pe == 1.0)
    return 1.0;
  return (po - pe) / (1.0 - pe);
}

MetricRow metric_row(const ConfusionCounts &counts, std::string name) {
  MetricRow row;
  row.name = std::move(name);
  row.counts = counts;
  row.dsc = dsc(counts);
  row.iou = iou(counts);
  row.accuracy = accuracy(counts);
  row.kappa = kappa(counts, &row.kappa_degenerate);
  return row;
}

std::vector<MetricRow> multiphase_report(const IndicatorSet &pred, const IndicatorSet &truth,
                                         const std::vector<std::string> &class_names) {
  if (pred.n() != truth.n())
    throw ContractViolation("multiphase_report: phase counts differ (" + std::to_string(pred.n()) + " vs " +
                            std::to_string(truth.n()) + ")");
  std::vector<MetricRow> rows;
  for (int i = 0; i < pred.n(); ++i) {
    std::string name = static_cast<std::size_t>(i) < class_names.size() ? class_names[static_cast<std::size_t>(i)]
                                                                        : "phase" + std::to_string(i);
    rows.push_back(metric_row(confusion(pred[i], truth[i]), std::move(name)));
  }
  return rows;
}

std::string format_row(const MetricRow &row) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%.4f %.4f %.4f %.4f", row.dsc, row.iou, row.accuracy, row.kappa);
  return row.name.empty() ? std::string(buf) : row.name + " " + buf;
}

} // namespace ictmsav
