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

#ifndef TAN_PIVOT_HPP
#define TAN_PIVOT_HPP

#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "tan/networks.hpp"
#include "tan/tensor.hpp"

namespace tanet {

enum class PivotStrategy { kTopM, kRandomM, kBottomM };

std::string to_string(PivotStrategy s);
PivotStrategy parse_pivot_strategy(const std::string& name);

struct PivotEntry {
  std::size_t index = 0;
  double confidence = 0.0;

  friend bool operator==(const PivotEntry&, const PivotEntry&) = default;
};

/// Per-class, per-domain confident samples. Each class list is sorted by
/// decreasing confidence (ties by index) and holds at most m entries.
struct PivotSet {
  std::size_t m = 0;
  std::vector<std::vector<PivotEntry>> source_by_class;
  std::vector<std::vector<PivotEntry>> target_by_class;
  std::vector<std::string> warnings;

  std::size_t num_classes() const { return source_by_class.size(); }
  std::size_t source_size() const;
  std::size_t target_size() const;
  /// Every class has at least one entry on both domains.
  bool class_complete() const;

  friend bool operator==(const PivotSet&, const PivotSet&) = default;
};

struct PseudoLabels {
  std::vector<std::size_t> labels;
  std::vector<double> confidences;
};

/// Argmax per row, lowest class index on ties; confidence is the row max.
PseudoLabels pseudo_label_from_probabilities(const Tensor& probabilities);
PseudoLabels pseudo_label(const NetworkParams& params, const Tensor& x);

/// Chooses up to m of the candidates. top_m keeps the highest confidences,
/// bottom_m the lowest (ties by index in both), random_m draws one 64-bit
/// key per candidate from `seed` and keeps the smallest keys. The result
/// is ordered by decreasing confidence.
std::vector<PivotEntry> select_from(std::span<const PivotEntry> candidates, std::size_t m,
                                    PivotStrategy strategy, std::uint64_t seed);

/// Source candidates of class c are samples labelled c, scored by the
/// predicted probability of c. Target candidates of class c are samples
/// pseudo-labelled c, scored by their confidence.
PivotSet select_pivot(const NetworkParams& params, const Tensor& source_x,
                      std::span<const std::size_t> source_labels, const Tensor& target_x,
                      std::size_t num_classes, std::size_t m, PivotStrategy strategy,
                      std::uint64_t seed);

/// Same selection from precomputed class probabilities.
PivotSet select_pivot_from_probabilities(const Tensor& source_probabilities,
                                         std::span<const std::size_t> source_labels,
                                         const Tensor& target_probabilities, std::size_t m,
                                         PivotStrategy strategy, std::uint64_t seed);

/// Row indices pairing source and target pivots by per-class rank, m rows
/// per class. A class with fewer than m entries repeats its ranked entries
/// cyclically. Requires class_complete().
struct PivotRows {
  std::vector<std::size_t> source;
  std::vector<std::size_t> target;
};
PivotRows pivot_rows(const PivotSet& pivot);

inline constexpr const char* kPivotCsvHeader = "epoch,domain,class,sample_index,confidence";
void write_pivot_csv_rows(std::ostream& out, std::size_t epoch, const PivotSet& pivot);

}  // namespace tanet

#endif  // TAN_PIVOT_HPP
