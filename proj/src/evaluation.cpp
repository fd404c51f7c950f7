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

#include "tan/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace tanet {

double f1_score(double precision, double recall) {
  const double denom = precision + recall;
  return denom > 0.0 ? 2.0 * precision * recall / denom : 0.0;
}

MetricsReport compute_prf(std::span<const std::size_t> predictions,
                          std::span<const std::size_t> labels, std::size_t positive_class) {
  if (predictions.empty()) throw std::invalid_argument("compute_prf: empty input");
  if (predictions.size() != labels.size()) {
    throw std::invalid_argument("compute_prf: " + std::to_string(predictions.size()) +
                                " predictions vs " + std::to_string(labels.size()) + " labels");
  }
  MetricsReport r;
  r.positive_class = positive_class;
  Confusion& c = r.confusion;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool predicted = predictions[i] == positive_class;
    const bool actual = labels[i] == positive_class;
    if (predicted && actual) ++c.tp;
    else if (predicted) ++c.fp;
    else if (actual) ++c.fn;
    else ++c.tn;
  }
  const auto ratio = [&r](std::size_t num, std::size_t den) {
    if (den == 0) {
      r.degenerate = true;
      return 0.0;
    }
    return static_cast<double>(num) / static_cast<double>(den);
  };
  r.precision = ratio(c.tp, c.tp + c.fp);
  r.recall = ratio(c.tp, c.tp + c.fn);
  if (r.precision + r.recall == 0.0) r.degenerate = true;
  r.f1 = f1_score(r.precision, r.recall);
  r.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
  return r;
}

namespace {

void check_scores(std::span<const double> scores, std::span<const std::size_t> labels,
                  std::size_t positive_class, std::size_t& positives, std::size_t& negatives) {
  if (scores.size() != labels.size()) {
    throw std::invalid_argument("roc: " + std::to_string(scores.size()) + " scores vs " +
                                std::to_string(labels.size()) + " labels");
  }
  positives = static_cast<std::size_t>(
      std::count(labels.begin(), labels.end(), positive_class));
  negatives = labels.size() - positives;
  if (positives == 0 || negatives == 0) {
    throw std::invalid_argument("roc: AUC is undefined when only one class is present");
  }
}

std::vector<std::size_t> descending_order(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&scores](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

}  // namespace

std::vector<RocPoint> roc_curve(std::span<const double> scores,
                                std::span<const std::size_t> labels, std::size_t positive_class) {
  std::size_t pos = 0, neg = 0;
  check_scores(scores, labels, positive_class, pos, neg);
  const auto order = descending_order(scores);
  std::vector<RocPoint> points{{0.0, 0.0, std::numeric_limits<double>::infinity()}};
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double threshold = scores[order[i]];
    // Consume the whole tie group before emitting a point.
    for (; i < order.size() && scores[order[i]] == threshold; ++i) {
      if (labels[order[i]] == positive_class) ++tp;
      else ++fp;
    }
    points.push_back({static_cast<double>(fp) / static_cast<double>(neg),
                      static_cast<double>(tp) / static_cast<double>(pos), threshold});
  }
  return points;
}

double roc_auc(std::span<const double> scores, std::span<const std::size_t> labels,
               std::size_t positive_class) {
  const auto points = roc_curve(scores, labels, positive_class);
  double area = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    area += (points[i].fpr - points[i - 1].fpr) * (points[i].tpr + points[i - 1].tpr) / 2.0;
  }
  return area;
}

void write_roc_csv(std::ostream& out, std::span<const RocPoint> points) {
  out << "fpr,tpr,threshold\n" << std::setprecision(17);
  for (const RocPoint& p : points) out << p.fpr << ',' << p.tpr << ',' << p.threshold << '\n';
}

namespace {

double sq_dist(const Tensor& a, std::size_t i, const Tensor& b, std::size_t j) {
  double s = 0.0;
  for (std::size_t l = 0; l < a.cols(); ++l) {
    const double d = a(i, l) - b(j, l);
    s += d * d;
  }
  return s;
}

}  // namespace

double median_pairwise_distance(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.cols()) throw ShapeError("median_pairwise_distance: width mismatch " +
                                             to_string(a.shape()) + " vs " + to_string(b.shape()));
  const std::size_t na = a.rows(), nb = b.rows();
  const auto pooled = [&](std::size_t i) -> std::pair<const Tensor*, std::size_t> {
    return i < na ? std::pair{&a, i} : std::pair{&b, i - na};
  };
  std::vector<double> d;
  d.reserve((na + nb) * (na + nb - 1) / 2);
  for (std::size_t i = 0; i < na + nb; ++i) {
    const auto [ti, ri] = pooled(i);
    for (std::size_t j = i + 1; j < na + nb; ++j) {
      const auto [tj, rj] = pooled(j);
      d.push_back(std::sqrt(sq_dist(*ti, ri, *tj, rj)));
    }
  }
  if (d.empty()) return 0.0;
  const std::size_t mid = d.size() / 2;
  std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid), d.end());
  if (d.size() % 2 == 1) return d[mid];
  const double upper = d[mid];
  const double lower = *std::max_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid));
  return (lower + upper) / 2.0;
}

double mmd(const Tensor& a, const Tensor& b, MmdEstimator estimator, std::optional<double> bandwidth) {
  if (a.cols() != b.cols()) {
    throw ShapeError("mmd: width mismatch " + to_string(a.shape()) + " vs " + to_string(b.shape()));
  }
  const std::size_t n = a.rows(), m = b.rows();
  if (n == 0 || m == 0) throw std::invalid_argument("mmd: empty sample");
  if (estimator == MmdEstimator::kUnbiased && (n < 2 || m < 2)) {
    throw std::invalid_argument("mmd: unbiased estimator needs at least 2 samples per side");
  }
  double h = bandwidth ? *bandwidth : median_pairwise_distance(a, b);
  if (!(h > 0.0)) h = 1.0;
  const double inv = 1.0 / (2.0 * h * h);
  const auto kernel_sum = [inv](const Tensor& x, const Tensor& y, bool skip_diagonal) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i)
      for (std::size_t j = 0; j < y.rows(); ++j)
        if (!(skip_diagonal && i == j)) s += std::exp(-sq_dist(x, i, y, j) * inv);
    return s;
  };
  const double dn = static_cast<double>(n), dm = static_cast<double>(m);
  const double cross = kernel_sum(a, b, false) / (dn * dm);
  if (estimator == MmdEstimator::kBiased) {
    const double value = kernel_sum(a, a, false) / (dn * dn) + kernel_sum(b, b, false) / (dm * dm) -
                         2.0 * cross;
    return std::max(value, 0.0);
  }
  return kernel_sum(a, a, true) / (dn * (dn - 1.0)) + kernel_sum(b, b, true) / (dm * (dm - 1.0)) -
         2.0 * cross;
}

nlohmann::json to_json(const MetricsReport& r) {
  nlohmann::json j;
  j["precision"] = r.precision;
  j["recall"] = r.recall;
  j["f1"] = r.f1;
  j["accuracy"] = r.accuracy;
  j["auc"] = r.auc ? nlohmann::json(*r.auc) : nlohmann::json(nullptr);
  j["confusion"] = {{"tp", r.confusion.tp},
                    {"fp", r.confusion.fp},
                    {"tn", r.confusion.tn},
                    {"fn", r.confusion.fn}};
  return j;
}

}  // namespace tanet
