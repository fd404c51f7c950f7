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

// Command-line front end: generate, train, ablate, sweep.
// Exit codes: 0 success, 1 configuration error, 2 runtime failure.

#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tan/experiment.hpp"

namespace {

std::string pct(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(1) << 100.0 * v;
  return s.str();
}

void print_summary(const tanet::RunSummary& s) {
  std::cout << tanet::to_string(s.variant) << (s.from_cache ? " (cached)" : "") << ": F1 "
            << pct(s.mean.at("f1")) << " +/- " << pct(s.stddev.at("f1")) << "  P "
            << pct(s.mean.at("precision")) << "  R " << pct(s.mean.at("recall")) << "  over "
            << s.runs.size() << " seed(s)\n";
}

std::vector<std::string> split_values(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string part; std::getline(ss, part, ',');) {
    if (!part.empty()) out.push_back(part);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Task adaptation network experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::string seeds;
  std::string variant;
  std::string output_dir;
  std::string param;
  std::string values;

  auto* generate = app.add_subcommand("generate", "Write the synthetic dataset as CSV");
  generate->add_option("--config", config_path, "Experiment JSON")->required();
  generate->add_option("--output-dir", output_dir, "Override output_dir");

  auto* train = app.add_subcommand("train", "Train one variant over the seed list");
  train->add_option("--config", config_path, "Experiment JSON")->required();
  train->add_option("--seeds", seeds, "Seed list, e.g. 0..9 or 1,3");
  train->add_option("--variant", variant, "full, cls_only, cls_task or cls_feat");
  train->add_option("--output-dir", output_dir, "Override output_dir");

  auto* ablate = app.add_subcommand("ablate", "Train all four loss variants and tabulate");
  ablate->add_option("--config", config_path, "Experiment JSON")->required();
  ablate->add_option("--seeds", seeds, "Seed list, e.g. 0..9 or 1,3");
  ablate->add_option("--output-dir", output_dir, "Override output_dir");

  auto* sweep = app.add_subcommand("sweep", "Grid over one hyperparameter (or lambda,mu)");
  sweep->add_option("--config", config_path, "Experiment JSON")->required();
  sweep->add_option("--param", param, "lambda,mu | lambda | mu | m | sigma | beta | pivot_strategy | adaptor_variant")
      ->required();
  sweep->add_option("--values", values, "Comma-separated values")->required();
  sweep->add_option("--seeds", seeds, "Seed list, e.g. 0..9 or 1,3");
  sweep->add_option("--output-dir", output_dir, "Override output_dir");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    tanet::ExperimentConfig config = tanet::load_experiment_config(config_path);
    if (!seeds.empty()) config.seeds = tanet::parse_seed_list(seeds);
    if (!variant.empty()) config.variant = tanet::parse_variant(variant);
    if (!output_dir.empty()) config.output_dir = output_dir;

    if (generate->parsed()) {
      for (const auto& p : tanet::cmd_generate(config)) std::cout << "wrote " << p.string() << '\n';
    } else if (train->parsed()) {
      print_summary(tanet::cmd_train(config));
    } else if (ablate->parsed()) {
      const tanet::AblationTable table = tanet::cmd_ablate(config);
      for (const auto& row : table.rows) print_summary(row);
      std::cout << "wrote " << (tanet::resolve_output_dir(config) / "ablation.txt").string() << '\n';
    } else if (sweep->parsed()) {
      const auto cells = tanet::cmd_sweep(config, param, split_values(values));
      std::size_t failed = 0;
      for (const auto& cell : cells) {
        std::string point;
        for (const auto& [k, v] : cell.point) point += (point.empty() ? "" : " ") + k + "=" + v;
        if (cell.summary) {
          std::cout << point << ": F1 " << pct(cell.summary->mean.at("f1")) << '\n';
        } else {
          ++failed;
          std::cout << point << ": failed (" << cell.error << ")\n";
        }
      }
      if (failed > 0) std::cerr << failed << " of " << cells.size() << " cells failed\n";
    }
  } catch (const tanet::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
