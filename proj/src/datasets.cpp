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

#include "tan/datasets.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

namespace tanet {

void DomainDataset::validate() const {
  const std::size_t d = feature_width();
  if (source.size() == 0 || target_train.rows() == 0 || target_validation.size() == 0) {
    throw std::invalid_argument("dataset splits must be non-empty");
  }
  if (target_train.cols() != d || target_validation.x.cols() != d) {
    throw std::invalid_argument("dataset splits disagree on feature width");
  }
  if (source.labels.size() != source.size() ||
      target_validation.labels.size() != target_validation.size()) {
    throw std::invalid_argument("labelled split has a label count that differs from its rows");
  }
}

void ShiftSpec::validate() const {
  if (!(noise_std > 0.0) || !std::isfinite(noise_std)) {
    throw std::invalid_argument("noise_std must be positive and finite");
  }
  if (!std::isfinite(rotation_deg)) throw std::invalid_argument("rotation_deg must be finite");
  if (positive_mode_shift.size() != 2) {
    throw std::invalid_argument("positive_mode_shift must have 2 components");
  }
  for (double v : positive_mode_shift) {
    if (!std::isfinite(v)) throw std::invalid_argument("positive_mode_shift must be finite");
  }
  if (n_source == 0 || n_target == 0) throw std::invalid_argument("sample counts must be positive");
  if (!(positive_fraction_target > 0.0 && positive_fraction_target <= 1.0)) {
    throw std::invalid_argument("positive_fraction_target must lie in (0, 1]");
  }
  if (!(positive_fraction_source > 0.0 && positive_fraction_source < 1.0)) {
    throw std::invalid_argument("positive_fraction_source must lie in (0, 1)");
  }
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    throw std::invalid_argument("validation_fraction must lie in (0, 1)");
  }
}

nlohmann::json to_json(const ShiftSpec& s) {
  return {{"rotation_deg", s.rotation_deg},
          {"positive_mode_shift", s.positive_mode_shift},
          {"noise_std", s.noise_std},
          {"n_source", s.n_source},
          {"n_target", s.n_target},
          {"positive_fraction_target", s.positive_fraction_target},
          {"positive_fraction_source", s.positive_fraction_source},
          {"validation_fraction", s.validation_fraction}};
}

ShiftSpec shift_spec_from_json(const nlohmann::json& j) {
  ShiftSpec s;
  s.rotation_deg = j.value("rotation_deg", s.rotation_deg);
  s.positive_mode_shift = j.value("positive_mode_shift", s.positive_mode_shift);
  s.noise_std = j.value("noise_std", s.noise_std);
  s.n_source = j.value("n_source", s.n_source);
  s.n_target = j.value("n_target", s.n_target);
  s.positive_fraction_target = j.value("positive_fraction_target", s.positive_fraction_target);
  s.positive_fraction_source = j.value("positive_fraction_source", s.positive_fraction_source);
  s.validation_fraction = j.value("validation_fraction", s.validation_fraction);
  s.validate();
  return s;
}

std::vector<std::size_t> stratified_counts(const std::vector<std::size_t>& class_counts,
                                           double fraction) {
  std::size_t total = 0;
  for (std::size_t c : class_counts) total += c;
  const auto wanted = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(total)));
  std::vector<std::size_t> out(class_counts.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < class_counts.size(); ++c) {
    const double exact = fraction * static_cast<double>(class_counts[c]);
    out[c] = static_cast<std::size_t>(std::floor(exact));
    assigned += out[c];
    remainders.emplace_back(exact - std::floor(exact), c);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; assigned < wanted && i < remainders.size(); ++i) {
    const std::size_t c = remainders[i].second;
    if (out[c] < class_counts[c]) {
      ++out[c];
      ++assigned;
    }
  }
  return out;
}

namespace {

using Point = std::array<double, 2>;
/// Draws the noiseless point of one class.
using ClassSampler = std::function<Point(std::size_t label, std::mt19937_64&)>;

struct Domain {
  std::vector<Point> points;
  std::vector<std::size_t> labels;
};

Domain sample_domain(std::size_t n, double positive_fraction, const ClassSampler& base,
                     double noise_std, double rotation_deg, Point rotation_centre,
                     const std::vector<double>& positive_shift, std::mt19937_64& rng) {
  const auto n_pos = static_cast<std::size_t>(std::floor(static_cast<double>(n) * positive_fraction));
  std::normal_distribution<double> noise(0.0, noise_std);
  const double angle = rotation_deg * std::numbers::pi / 180.0;
  const double cs = std::cos(angle), sn = std::sin(angle);
  Domain d;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t label = i < n - n_pos ? 0 : 1;
    Point p = base(label, rng);
    p[0] += noise(rng);
    p[1] += noise(rng);
    const double x = p[0] - rotation_centre[0], y = p[1] - rotation_centre[1];
    p = {rotation_centre[0] + cs * x - sn * y, rotation_centre[1] + sn * x + cs * y};
    if (label == 1) {
      p[0] += positive_shift[0];
      p[1] += positive_shift[1];
    }
    d.points.push_back(p);
    d.labels.push_back(label);
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  Domain shuffled;
  for (std::size_t i : order) {
    shuffled.points.push_back(d.points[i]);
    shuffled.labels.push_back(d.labels[i]);
  }
  return shuffled;
}

Tensor to_tensor(const std::vector<Point>& pts) {
  Tensor t({pts.size(), 2});
  for (std::size_t i = 0; i < pts.size(); ++i) {
    t(i, 0) = pts[i][0];
    t(i, 1) = pts[i][1];
  }
  return t;
}

DomainDataset assemble(const std::string& generator, const ShiftSpec& spec, std::uint64_t seed,
                       const ClassSampler& base, Point centre) {
  spec.validate();
  // Independent streams so the target never depends on the source size.
  std::mt19937_64 source_rng(seed);
  std::mt19937_64 target_rng(seed ^ 0x9e3779b97f4a7c15ULL);
  const Domain src = sample_domain(spec.n_source, spec.positive_fraction_source, base,
                                   spec.noise_std, 0.0, centre, {0.0, 0.0}, source_rng);
  const Domain tgt = sample_domain(spec.n_target, spec.positive_fraction_target, base,
                                   spec.noise_std, spec.rotation_deg, centre,
                                   spec.positive_mode_shift, target_rng);

  std::vector<std::size_t> class_counts(2, 0);
  for (std::size_t l : tgt.labels) ++class_counts[l];
  std::vector<std::size_t> remaining = stratified_counts(class_counts, spec.validation_fraction);

  DomainDataset ds;
  ds.source = {to_tensor(src.points), src.labels};
  std::vector<Point> train_pts, val_pts;
  for (std::size_t i = 0; i < tgt.points.size(); ++i) {
    const std::size_t l = tgt.labels[i];
    if (remaining[l] > 0) {
      --remaining[l];
      val_pts.push_back(tgt.points[i]);
      ds.target_validation.labels.push_back(l);
    } else {
      train_pts.push_back(tgt.points[i]);
      ds.target_train_labels.push_back(l);
    }
  }
  ds.target_train = to_tensor(train_pts);
  ds.target_validation.x = to_tensor(val_pts);
  ds.metadata = {{"generator", generator}, {"seed", seed}, {"shift", to_json(spec)}};
  return ds;
}

}  // namespace

DomainDataset generate_task_shift_moons(const ShiftSpec& spec, std::uint64_t seed) {
  const ClassSampler moons = [](std::size_t label, std::mt19937_64& rng) -> Point {
    std::uniform_real_distribution<double> t(0.0, std::numbers::pi);
    const double a = t(rng);
    if (label == 0) return {std::cos(a), std::sin(a)};
    return {1.0 - std::cos(a), 0.5 - std::sin(a)};
  };
  return assemble("moons", spec, seed, moons, {0.5, 0.25});
}

DomainDataset generate_gaussian_blobs(const ShiftSpec& spec, std::uint64_t seed) {
  const ClassSampler blobs = [](std::size_t label, std::mt19937_64&) -> Point {
    return {label == 0 ? -2.0 : 2.0, 0.0};
  };
  return assemble("blobs", spec, seed, blobs, {0.0, 0.0});
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

double parse_double(const std::string& text, std::size_t row, const std::string& column) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw DataError("row " + std::to_string(row) + ": column '" + column +
                    "' is not numeric: '" + text + "'");
  }
  return v;
}

}  // namespace

CsvSplit load_csv(const std::filesystem::path& path, const std::vector<std::string>& feature_columns,
                  const std::optional<std::string>& label_column) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + ": missing header row");
  std::vector<std::string> header = split_fields(line);
  for (auto& h : header) h = trim(h);

  std::optional<std::size_t> label_index;
  if (label_column) {
    const auto it = std::find(header.begin(), header.end(), *label_column);
    if (it != header.end()) label_index = static_cast<std::size_t>(it - header.begin());
  }
  std::vector<std::size_t> feature_index;
  if (feature_columns.empty()) {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (!label_index || i != *label_index) feature_index.push_back(i);
  } else {
    for (const std::string& name : feature_columns) {
      const auto it = std::find(header.begin(), header.end(), name);
      if (it == header.end()) throw DataError(path.string() + ": no column named '" + name + "'");
      feature_index.push_back(static_cast<std::size_t>(it - header.begin()));
    }
  }
  if (feature_index.empty()) throw DataError(path.string() + ": no feature columns");

  std::vector<double> values;
  std::vector<std::size_t> labels;
  std::size_t rows = 0;
  for (std::size_t row = 1; std::getline(in, line); ++row) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const std::vector<std::string> fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw DataError("row " + std::to_string(row) + ": expected " + std::to_string(header.size()) +
                      " fields, found " + std::to_string(fields.size()));
    }
    for (std::size_t i : feature_index) values.push_back(parse_double(fields[i], row, header[i]));
    if (label_index) {
      const double v = parse_double(fields[*label_index], row, header[*label_index]);
      if (v < 0.0 || v != std::floor(v)) {
        throw DataError("row " + std::to_string(row) + ": label must be a non-negative integer");
      }
      labels.push_back(static_cast<std::size_t>(v));
    }
    ++rows;
  }
  CsvSplit out{Tensor({rows, feature_index.size()}, std::move(values)), std::nullopt};
  if (label_index) out.labels = std::move(labels);
  return out;
}

void write_csv(const std::filesystem::path& path, const Tensor& x,
               const std::vector<std::size_t>* labels) {
  if (labels && labels->size() != x.rows()) {
    throw std::invalid_argument("write_csv: label count differs from row count");
  }
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    for (std::size_t j = 0; j < x.cols(); ++j) out << (j ? "," : "") << 'f' << j;
    if (labels) out << ",label";
    out << '\n' << std::setprecision(17);
    for (std::size_t i = 0; i < x.rows(); ++i) {
      for (std::size_t j = 0; j < x.cols(); ++j) out << (j ? "," : "") << x(i, j);
      if (labels) out << ',' << (*labels)[i];
      out << '\n';
    }
    if (!out) throw std::runtime_error("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace tanet
