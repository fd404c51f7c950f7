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

#ifndef TAN_DATASETS_HPP
#define TAN_DATASETS_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "tan/tensor.hpp"

namespace tanet {

/// Rejected CSV input; the message names the offending row.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LabeledSplit {
  Tensor x;
  std::vector<std::size_t> labels;

  std::size_t size() const { return x.rows(); }
};

struct DomainDataset {
  LabeledSplit source;
  /// Unlabelled target samples used for adaptation.
  Tensor target_train;
  /// Ground truth of target_train, kept for diagnostics. Training never reads it.
  std::vector<std::size_t> target_train_labels;
  LabeledSplit target_validation;
  nlohmann::json metadata;

  std::size_t feature_width() const { return source.x.cols(); }
  /// Throws std::invalid_argument if splits disagree on width or are empty.
  void validate() const;
};

/// Covariate shift (rotation) plus task-semantic shift (displaced positive mode).
struct ShiftSpec {
  double rotation_deg = 30.0;
  std::vector<double> positive_mode_shift{0.0, 0.0};
  double noise_std = 0.15;
  std::size_t n_source = 2000;
  std::size_t n_target = 2000;
  double positive_fraction_target = 0.3;
  double positive_fraction_source = 0.5;
  double validation_fraction = 0.2;

  void validate() const;
};

nlohmann::json to_json(const ShiftSpec& spec);
ShiftSpec shift_spec_from_json(const nlohmann::json& j);

/// Source: two interleaved moons, class 1 the lower moon. Target: the same
/// moons rotated about their centre, class 1 additionally displaced by
/// positive_mode_shift. A stratified validation_fraction of the target is
/// held out. Pure function of (spec, seed).
DomainDataset generate_task_shift_moons(const ShiftSpec& spec, std::uint64_t seed);

/// Source classes are isotropic Gaussians at (-2, 0) and (+2, 0) (class 1 at
/// +2); the target applies the same rotation and positive-mode shift.
DomainDataset generate_gaussian_blobs(const ShiftSpec& spec, std::uint64_t seed);

/// Number of held-out samples per class: counts scaled by `fraction`,
/// rounded down, with the rounding remainder of the overall total handed to
/// the largest fractional parts. Each class stays within one sample of the
/// exact share.
std::vector<std::size_t> stratified_counts(const std::vector<std::size_t>& class_counts,
                                           double fraction);

struct CsvSplit {
  Tensor x;
  std::optional<std::vector<std::size_t>> labels;
};

/// Reads `f0,...,f{d-1}[,label]`. Empty `feature_columns` selects every
/// column except the label column. Without a label column the split is
/// unlabelled.
CsvSplit load_csv(const std::filesystem::path& path,
                  const std::vector<std::string>& feature_columns = {},
                  const std::optional<std::string>& label_column = std::string("label"));

/// Writes with full round-trip precision; atomic via temporary file.
void write_csv(const std::filesystem::path& path, const Tensor& x,
               const std::vector<std::size_t>* labels);

}  // namespace tanet

#endif  // TAN_DATASETS_HPP
