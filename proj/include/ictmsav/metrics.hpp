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
#include "ictmsav/model.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace ictmsav {

struct ConfusionCounts {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  std::int64_t tn = 0;

  std::int64_t total() const noexcept { return tp + fp + fn + tn; }
};

/// Per-pixel counts of two binary masks (values exactly 0 or 1).
ConfusionCounts confusion(const ScalarField &pred, const ScalarField &truth);

double dsc(const ConfusionCounts &c);
double iou(const ConfusionCounts &c);
double accuracy(const ConfusionCounts &c);
/// Cohen's kappa. When the chance agreement is 1 the value is 1 and
/// `degenerate` (if given) is set.
double kappa(const ConfusionCounts &c, bool *degenerate = nullptr);

struct MetricRow {
  std::string name;
  ConfusionCounts counts;
  double dsc = 0, iou = 0, accuracy = 0, kappa = 0;
  bool kappa_degenerate = false;
};

MetricRow metric_row(const ConfusionCounts &counts, std::string name = {});

/// One-vs-rest metrics for every phase.
std::vector<MetricRow> multiphase_report(const IndicatorSet &pred, const IndicatorSet &truth,
                                         const std::vector<std::string> &class_names = {});

/// "name DSC IoU Accuracy kappa" with four decimals.
std::string format_row(const MetricRow &row);

} // namespace ictmsav
