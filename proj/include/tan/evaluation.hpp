// Copyright 2026 The TAN Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TAN_EVALUATION_HPP
#define TAN_EVALUATION_HPP

#include <cstddef>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "json.hpp"
#include "tan/tensor.hpp"

namespace tanet {

struct Confusion {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
  friend bool operator==(const Confusion&, const Confusion&) = default;
};

struct MetricsReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double accuracy = 0.0;
  std::optional<double> auc;
  Confusion confusion;
  std::size_t positive_class = 1;
  /// Set when precision, recall or F1 had a zero denominator and was reported as 0.
  bool degenerate = false;
};

/// Harmonic mean; 0 when both inputs are 0.
double f1_score(double precision, double recall);

/// Binary confusion counts and derived rates. Any label other than
/// `positive_class` counts as negative. Rejects empty or unequal inputs.
MetricsReport compute_prf(std::span<const std::size_t> predictions,
                          std::span<const std::size_t> labels, std::size_t positive_class = 1);

/// Area under the ROC curve with tied scores averaged (midrank statistic).
/// Throws when only one class is present.
double roc_auc(std::span<const double> scores, std::span<const std::size_t> labels,
               std::size_t positive_class = 1);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  double threshold = 0.0;
};

/// One point per distinct score, descending, preceded by (0, 0, +inf).
std::vector<RocPoint> roc_curve(std::span<const double> scores,
                                std::span<const std::size_t> labels,
                                std::size_t positive_class = 1);
void write_roc_csv(std::ostream& out, std::span<const RocPoint> points);

enum class MmdEstimator { kBiased, kUnbiased };

/// Median Euclidean distance over all distinct pairs of the pooled rows.
double median_pairwise_distance(const Tensor& a, const Tensor& b);

/// Squared MMD with k(x, y) = exp(-|x - y|^2 / (2 h^2)). The bandwidth h
/// defaults to the median heuristic (1 when that median is 0).
double mmd(const Tensor& a, const Tensor& b, MmdEstimator estimator = MmdEstimator::kBiased,
           std::optional<double> bandwidth = std::nullopt);

nlohmann::json to_json(const MetricsReport& report);

}  // namespace tanet

#endif  // TAN_EVALUATION_HPP
