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

#include "tan/pivot.hpp"

#include <algorithm>
#include <iomanip>
#include <random>
#include <stdexcept>

namespace tanet {

std::string to_string(PivotStrategy s) {
  switch (s) {
    case PivotStrategy::kTopM: return "top_m";
    case PivotStrategy::kRandomM: return "random_m";
    case PivotStrategy::kBottomM: return "bottom_m";
  }
  return "unknown";
}

PivotStrategy parse_pivot_strategy(const std::string& name) {
  for (auto s : {PivotStrategy::kTopM, PivotStrategy::kRandomM, PivotStrategy::kBottomM}) {
    if (to_string(s) == name) return s;
  }
  throw std::invalid_argument("unknown pivot strategy '" + name + "'");
}

std::size_t PivotSet::source_size() const {
  std::size_t n = 0;
  for (const auto& c : source_by_class) n += c.size();
  return n;
}

std::size_t PivotSet::target_size() const {
  std::size_t n = 0;
  for (const auto& c : target_by_class) n += c.size();
  return n;
}

bool PivotSet::class_complete() const {
  if (source_by_class.empty() || source_by_class.size() != target_by_class.size()) return false;
  for (std::size_t c = 0; c < source_by_class.size(); ++c) {
    if (source_by_class[c].empty() || target_by_class[c].empty()) return false;
  }
  return true;
}

PseudoLabels pseudo_label_from_probabilities(const Tensor& probabilities) {
  PseudoLabels out;
  const std::size_t n = probabilities.rows(), k = probabilities.cols();
  out.labels.resize(n);
  out.confidences.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < k; ++c) {
      if (probabilities(i, c) > probabilities(i, best)) best = c;
    }
    out.labels[i] = best;
    out.confidences[i] = probabilities(i, best);
  }
  return out;
}

PseudoLabels pseudo_label(const NetworkParams& params, const Tensor& x) {
  return pseudo_label_from_probabilities(forward_classifier(params, forward_feature(params, x)));
}

namespace {

bool by_decreasing_confidence(const PivotEntry& a, const PivotEntry& b) {
  if (a.confidence != b.confidence) return a.confidence > b.confidence;
  return a.index < b.index;
}

bool by_increasing_confidence(const PivotEntry& a, const PivotEntry& b) {
  if (a.confidence != b.confidence) return a.confidence < b.confidence;
  return a.index < b.index;
}

}  // namespace

std::vector<PivotEntry> select_from(std::span<const PivotEntry> candidates, std::size_t m,
                                    PivotStrategy strategy, std::uint64_t seed) {
  if (m == 0) throw std::invalid_argument("pivot size m must be at least 1");
  std::vector<PivotEntry> pool(candidates.begin(), candidates.end());
  const std::size_t keep = std::min(m, pool.size());
  const auto mid = pool.begin() + static_cast<std::ptrdiff_t>(keep);
  switch (strategy) {
    case PivotStrategy::kTopM:
      std::partial_sort(pool.begin(), mid, pool.end(), by_decreasing_confidence);
      break;
    case PivotStrategy::kBottomM:
      std::partial_sort(pool.begin(), mid, pool.end(), by_increasing_confidence);
      break;
    case PivotStrategy::kRandomM: {
      std::mt19937_64 rng(seed);
      std::vector<std::pair<std::uint64_t, std::size_t>> keyed(pool.size());
      for (std::size_t i = 0; i < pool.size(); ++i) keyed[i] = {rng(), i};
      std::partial_sort(keyed.begin(), keyed.begin() + static_cast<std::ptrdiff_t>(keep), keyed.end());
      std::vector<PivotEntry> chosen;
      chosen.reserve(keep);
      for (std::size_t i = 0; i < keep; ++i) chosen.push_back(pool[keyed[i].second]);
      pool = std::move(chosen);
      break;
    }
  }
  pool.resize(keep);
  std::sort(pool.begin(), pool.end(), by_decreasing_confidence);
  return pool;
}

PivotSet select_pivot_from_probabilities(const Tensor& source_probabilities,
                                         std::span<const std::size_t> source_labels,
                                         const Tensor& target_probabilities, std::size_t m,
                                         PivotStrategy strategy, std::uint64_t seed) {
  if (m == 0) throw std::invalid_argument("pivot size m must be at least 1");
  const std::size_t k = source_probabilities.cols();
  if (target_probabilities.cols() != k) {
    throw ShapeError("select_pivot: class counts differ: " + to_string(source_probabilities.shape()) +
                     " vs " + to_string(target_probabilities.shape()));
  }
  if (source_labels.size() != source_probabilities.rows()) {
    throw ShapeError("select_pivot: " + std::to_string(source_labels.size()) +
                     " source labels for " + std::to_string(source_probabilities.rows()) + " rows");
  }

  std::vector<std::vector<PivotEntry>> source_candidates(k), target_candidates(k);
  for (std::size_t i = 0; i < source_labels.size(); ++i) {
    const std::size_t c = source_labels[i];
    if (c >= k) throw std::out_of_range("select_pivot: source label out of range");
    source_candidates[c].push_back({i, source_probabilities(i, c)});
  }
  const PseudoLabels pseudo = pseudo_label_from_probabilities(target_probabilities);
  for (std::size_t i = 0; i < pseudo.labels.size(); ++i) {
    target_candidates[pseudo.labels[i]].push_back({i, pseudo.confidences[i]});
  }

  PivotSet out;
  out.m = m;
  // Each (domain, class) list gets its own stream so that one list's
  // size never shifts another's random draw.
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  std::vector<std::uint64_t> streams(2 * k);
  {
    std::vector<std::uint32_t> words(4 * k);
    seq.generate(words.begin(), words.end());
    for (std::size_t i = 0; i < 2 * k; ++i) {
      streams[i] = (static_cast<std::uint64_t>(words[2 * i]) << 32) | words[2 * i + 1];
    }
  }
  for (std::size_t c = 0; c < k; ++c) {
    out.source_by_class.push_back(select_from(source_candidates[c], m, strategy, streams[c]));
    out.target_by_class.push_back(select_from(target_candidates[c], m, strategy, streams[k + c]));
    if (out.source_by_class.back().empty()) {
      out.warnings.push_back("class " + std::to_string(c) + " has no source candidates");
    }
    if (out.target_by_class.back().empty()) {
      out.warnings.push_back("class " + std::to_string(c) + " has no target candidates");
    }
  }
  return out;
}

PivotSet select_pivot(const NetworkParams& params, const Tensor& source_x,
                      std::span<const std::size_t> source_labels, const Tensor& target_x,
                      std::size_t num_classes, std::size_t m, PivotStrategy strategy,
                      std::uint64_t seed) {
  const Tensor ps = forward_classifier(params, forward_feature(params, source_x));
  const Tensor pt = forward_classifier(params, forward_feature(params, target_x));
  if (ps.cols() != num_classes) {
    throw ShapeError("select_pivot: classifier emits " + std::to_string(ps.cols()) +
                     " classes, expected " + std::to_string(num_classes));
  }
  return select_pivot_from_probabilities(ps, source_labels, pt, m, strategy, seed);
}

PivotRows pivot_rows(const PivotSet& pivot) {
  if (!pivot.class_complete()) {
    throw std::invalid_argument("pivot_rows: pivot set has an empty class");
  }
  PivotRows rows;
  for (std::size_t c = 0; c < pivot.num_classes(); ++c) {
    const auto& s = pivot.source_by_class[c];
    const auto& t = pivot.target_by_class[c];
    for (std::size_t r = 0; r < pivot.m; ++r) {
      rows.source.push_back(s[r % s.size()].index);
      rows.target.push_back(t[r % t.size()].index);
    }
  }
  return rows;
}

void write_pivot_csv_rows(std::ostream& out, std::size_t epoch, const PivotSet& pivot) {
  const auto emit = [&](const char* domain, const std::vector<std::vector<PivotEntry>>& lists) {
    for (std::size_t c = 0; c < lists.size(); ++c) {
      for (const PivotEntry& e : lists[c]) {
        out << epoch << ',' << domain << ',' << c << ',' << e.index << ','
            << std::setprecision(17) << e.confidence << '\n';
      }
    }
  };
  emit("source", pivot.source_by_class);
  emit("target", pivot.target_by_class);
}

}  // namespace tanet
