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

#ifndef TAN_EXPERIMENT_HPP
#define TAN_EXPERIMENT_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "tan/datasets.hpp"
#include "tan/evaluation.hpp"
#include "tan/trainer.hpp"

namespace tanet {

/// Invalid or inconsistent experiment configuration (CLI exit code 1).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Ablation variants, in the order they are tabulated.
enum class Variant { kClsOnly, kClsTask, kClsFeat, kFull };

std::string to_string(Variant v);
Variant parse_variant(const std::string& name);
/// Row label of the ablation table, e.g. "L_cls+L_feat".
std::string variant_label(Variant v);
/// Weights actually trained with: cls_only zeroes both, cls_task zeroes
/// lambda, cls_feat zeroes mu, full keeps the configured pair.
LossWeights effective_weights(Variant v, const LossWeights& configured);

struct DatasetConfig {
  std::string kind = "moons";  // moons | blobs | csv
  std::uint64_t seed = 0;
  ShiftSpec shift;
  std::filesystem::path source;
  std::filesystem::path target_train;
  std::filesystem::path target_validation;
};

struct ExperimentConfig {
  DatasetConfig dataset;
  TrainConfig train;
  Variant variant = Variant::kFull;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  std::filesystem::path output_dir = "runs";
  bool dump_pivots = false;
  bool dump_roc = false;
};

inline constexpr const char* kBenchmarkName = "shifted-moons-taskflip";
/// Environment variable that, when set, prefixes relative output_dir values.
inline constexpr const char* kOutputRootEnv = "TAN_OUTPUT_ROOT";

/// The frozen synthetic benchmark shift.
ShiftSpec benchmark_shift();
/// Benchmark dataset plus default training hyperparameters.
ExperimentConfig benchmark_config();

/// Parses an experiment JSON. Unknown keys and inconsistent values raise
/// ConfigError. `"dataset": {"benchmark": "shifted-moons-taskflip"}`
/// selects the frozen benchmark shift.
ExperimentConfig parse_experiment_config(const nlohmann::json& j);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
nlohmann::json to_json(const ExperimentConfig& c);
nlohmann::json to_json(const TrainConfig& c);

/// output_dir resolved against kOutputRootEnv when that is set and the path is relative.
std::filesystem::path resolve_output_dir(const ExperimentConfig& c);

/// Train config with the variant's weights applied.
TrainConfig effective_train_config(const ExperimentConfig& c, Variant v);
/// Hex digest of everything that determines a run's outputs.
std::string config_hash(const ExperimentConfig& c, Variant v);

DomainDataset materialize_dataset(const DatasetConfig& c);

struct SeedRun {
  std::uint64_t seed = 0;
  MetricsReport metrics;
  TrainLog log;  // empty when loaded from cache
  std::string log_path;
  std::string metrics_path;
};

struct RunSummary {
  Variant variant = Variant::kFull;
  std::string config_hash;
  std::vector<SeedRun> runs;
  std::map<std::string, double> mean;
  std::map<std::string, double> stddev;
  bool from_cache = false;
};

/// Mean and sample standard deviation of each metric across runs.
void aggregate(RunSummary& summary);
nlohmann::json to_json(const RunSummary& s);

/// Writes source.csv, target_train.csv (unlabelled), target_validation.csv
/// and dataset.json into the output directory. Returns the written paths.
std::vector<std::filesystem::path> cmd_generate(const ExperimentConfig& c);

/// One fit per seed under <output>/<variant>/seed_<s>/, then aggregate.json.
RunSummary cmd_train(const ExperimentConfig& c);

struct AblationTable {
  std::vector<RunSummary> rows;  // cls_only, cls_task, cls_feat, full
};

/// All four variants over the seed list; reuses a variant's results when
/// its aggregate.json carries the same config hash. Writes ablation.csv
/// and ablation.txt.
AblationTable cmd_ablate(const ExperimentConfig& c);

struct SweepCell {
  std::map<std::string, std::string> point;
  std::optional<RunSummary> summary;
  std::string error;
};

/// `param` is one of "lambda,mu", "lambda", "mu", "m", "sigma", "beta",
/// "pivot_strategy", "adaptor_variant". "lambda,mu" crosses the values
/// with themselves. A failing cell is recorded and the sweep continues.
std::vector<SweepCell> cmd_sweep(const ExperimentConfig& c, const std::string& param,
                                 const std::vector<std::string>& values);

/// "0..9" (inclusive) or "1,2,5".
std::vector<std::uint64_t> parse_seed_list(const std::string& text);

}  // namespace tanet

#endif  // TAN_EXPERIMENT_HPP
