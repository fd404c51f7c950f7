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

#include "tan/experiment.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace tanet {

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(Variant v) {
  switch (v) {
    case Variant::kClsOnly: return "cls_only";
    case Variant::kClsTask: return "cls_task";
    case Variant::kClsFeat: return "cls_feat";
    case Variant::kFull: return "full";
  }
  return "unknown";
}

Variant parse_variant(const std::string& name) {
  for (Variant v : {Variant::kClsOnly, Variant::kClsTask, Variant::kClsFeat, Variant::kFull}) {
    if (to_string(v) == name) return v;
  }
  throw ConfigError("unknown variant '" + name + "' (expected full, cls_only, cls_task, cls_feat)");
}

std::string variant_label(Variant v) {
  switch (v) {
    case Variant::kClsOnly: return "L_cls";
    case Variant::kClsTask: return "L_cls+L_task";
    case Variant::kClsFeat: return "L_cls+L_feat";
    case Variant::kFull: return "L_cls+L_feat+L_task";
  }
  return "unknown";
}

LossWeights effective_weights(Variant v, const LossWeights& w) {
  switch (v) {
    case Variant::kClsOnly: return {0.0, 0.0};
    case Variant::kClsTask: return {0.0, w.mu};
    case Variant::kClsFeat: return {w.lambda, 0.0};
    case Variant::kFull: return w;
  }
  return w;
}

ShiftSpec benchmark_shift() {
  ShiftSpec s;
  s.rotation_deg = 30.0;
  s.noise_std = 0.15;
  s.positive_mode_shift = {1.5 * s.noise_std, 0.0};
  s.n_source = 2000;
  s.n_target = 2000;
  s.positive_fraction_target = 0.3;
  s.positive_fraction_source = 0.3;
  s.validation_fraction = 0.2;
  return s;
}

ExperimentConfig benchmark_config() {
  ExperimentConfig c;
  c.dataset.kind = "moons";
  c.dataset.seed = 0;
  c.dataset.shift = benchmark_shift();
  c.output_dir = "runs/" + std::string(kBenchmarkName);
  return c;
}

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

TrainConfig parse_train(const json& j) {
  reject_unknown(j,
                 {"lambda", "mu", "alpha", "beta", "gamma", "upsilon", "momentum",
                  "batch_per_domain", "m", "epochs", "seed", "sigma", "adaptor_variant",
                  "pivot_strategy", "num_classes", "feature_hidden", "feature_dim",
                  "discriminator_hidden", "adaptor_hidden", "adaptor_output", "mmd_probe"},
                 "train");
  TrainConfig t;
  read(j, "lambda", t.weights.lambda);
  read(j, "mu", t.weights.mu);
  read(j, "alpha", t.alpha);
  read(j, "beta", t.beta);
  read(j, "gamma", t.gamma);
  read(j, "upsilon", t.upsilon);
  read(j, "momentum", t.momentum);
  read(j, "m", t.m);
  read(j, "epochs", t.epochs);
  read(j, "seed", t.seed);
  read(j, "num_classes", t.num_classes);
  read(j, "feature_hidden", t.feature_hidden);
  read(j, "feature_dim", t.feature_dim);
  read(j, "discriminator_hidden", t.discriminator_hidden);
  read(j, "adaptor_hidden", t.adaptor_hidden);
  read(j, "mmd_probe", t.mmd_probe);
  t.batch_per_domain = t.m * t.num_classes;
  read(j, "batch_per_domain", t.batch_per_domain);
  try {
    if (j.contains("sigma")) t.sigma = parse_critic_activation(j.at("sigma").get<std::string>());
    if (j.contains("adaptor_variant"))
      t.adaptor_variant = parse_adaptor_variant(j.at("adaptor_variant").get<std::string>());
    if (j.contains("adaptor_output"))
      t.adaptor_output = parse_activation(j.at("adaptor_output").get<std::string>());
    if (j.contains("pivot_strategy"))
      t.pivot_strategy = parse_pivot_strategy(j.at("pivot_strategy").get<std::string>());
    t.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("train: ") + e.what());
  }
  return t;
}

DatasetConfig parse_dataset(const json& j) {
  reject_unknown(j, {"benchmark", "kind", "seed", "shift", "source", "target_train", "target_validation"},
                 "dataset");
  DatasetConfig d;
  if (j.contains("benchmark")) {
    const std::string name = j.at("benchmark").get<std::string>();
    if (name != kBenchmarkName) throw ConfigError("unknown benchmark '" + name + "'");
    d.kind = "moons";
    d.shift = benchmark_shift();
  }
  read(j, "kind", d.kind);
  read(j, "seed", d.seed);
  if (d.kind != "moons" && d.kind != "blobs" && d.kind != "csv") {
    throw ConfigError("dataset kind must be moons, blobs or csv, got '" + d.kind + "'");
  }
  if (j.contains("shift")) {
    reject_unknown(j.at("shift"),
                   {"rotation_deg", "positive_mode_shift", "noise_std", "n_source", "n_target",
                    "positive_fraction_target", "positive_fraction_source", "validation_fraction"},
                   "dataset.shift");
    json merged = to_json(d.shift);
    merged.update(j.at("shift"));
    try {
      d.shift = shift_spec_from_json(merged);
    } catch (const std::exception& e) {
      throw ConfigError(std::string("dataset.shift: ") + e.what());
    }
  }
  if (d.kind == "csv") {
    for (const char* key : {"source", "target_train", "target_validation"}) {
      if (!j.contains(key)) throw ConfigError(std::string("csv dataset needs '") + key + "'");
    }
    d.source = j.at("source").get<std::string>();
    d.target_train = j.at("target_train").get<std::string>();
    d.target_validation = j.at("target_validation").get<std::string>();
  }
  return d;
}

void write_atomic(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out) throw std::runtime_error("failed writing " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string hex64(std::uint64_t v) {
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << v;
  return s.str();
}

}  // namespace

ExperimentConfig parse_experiment_config(const json& j) {
  reject_unknown(j, {"dataset", "train", "variant", "seeds", "output_dir", "dump_pivots", "dump_roc"},
                 "experiment config");
  ExperimentConfig c;
  if (j.contains("dataset")) c.dataset = parse_dataset(j.at("dataset"));
  if (j.contains("train")) c.train = parse_train(j.at("train"));
  if (j.contains("variant")) c.variant = parse_variant(j.at("variant").get<std::string>());
  read(j, "seeds", c.seeds);
  if (c.seeds.empty()) throw ConfigError("seeds must not be empty");
  if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
  read(j, "dump_pivots", c.dump_pivots);
  read(j, "dump_roc", c.dump_roc);
  return c;
}

ExperimentConfig load_experiment_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_experiment_config(j);
}

json to_json(const TrainConfig& t) {
  return {{"lambda", t.weights.lambda},
          {"mu", t.weights.mu},
          {"alpha", t.alpha},
          {"beta", t.beta},
          {"gamma", t.gamma},
          {"upsilon", t.upsilon},
          {"momentum", t.momentum},
          {"batch_per_domain", t.batch_per_domain},
          {"m", t.m},
          {"epochs", t.epochs},
          {"seed", t.seed},
          {"sigma", to_string(t.sigma)},
          {"adaptor_variant", to_string(t.adaptor_variant)},
          {"pivot_strategy", to_string(t.pivot_strategy)},
          {"num_classes", t.num_classes},
          {"feature_hidden", t.feature_hidden},
          {"feature_dim", t.feature_dim},
          {"discriminator_hidden", t.discriminator_hidden},
          {"adaptor_hidden", t.adaptor_hidden},
          {"adaptor_output", to_string(t.adaptor_output)},
          {"mmd_probe", t.mmd_probe}};
}

json to_json(const ExperimentConfig& c) {
  json d = {{"kind", c.dataset.kind}, {"seed", c.dataset.seed}};
  if (c.dataset.kind == "csv") {
    d["source"] = c.dataset.source.string();
    d["target_train"] = c.dataset.target_train.string();
    d["target_validation"] = c.dataset.target_validation.string();
  } else {
    d["shift"] = to_json(c.dataset.shift);
  }
  return {{"dataset", d},
          {"train", to_json(c.train)},
          {"variant", to_string(c.variant)},
          {"seeds", c.seeds},
          {"output_dir", c.output_dir.string()},
          {"dump_pivots", c.dump_pivots},
          {"dump_roc", c.dump_roc}};
}

fs::path resolve_output_dir(const ExperimentConfig& c) {
  const char* root = std::getenv(kOutputRootEnv);
  if (root != nullptr && *root != '\0' && c.output_dir.is_relative()) return fs::path(root) / c.output_dir;
  return c.output_dir;
}

TrainConfig effective_train_config(const ExperimentConfig& c, Variant v) {
  TrainConfig t = c.train;
  t.weights = effective_weights(v, c.train.weights);
  return t;
}

std::string config_hash(const ExperimentConfig& c, Variant v) {
  json j = to_json(c);
  j.erase("output_dir");
  j["variant"] = to_string(v);
  j["train"] = to_json(effective_train_config(c, v));
  j["train"].erase("seed");  // per-run seeds come from the seed list
  // FNV-1a over the canonical dump (object keys are sorted).
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : j.dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return hex64(h);
}

DomainDataset materialize_dataset(const DatasetConfig& c) {
  if (c.kind == "moons") return generate_task_shift_moons(c.shift, c.seed);
  if (c.kind == "blobs") return generate_gaussian_blobs(c.shift, c.seed);
  const CsvSplit src = load_csv(c.source);
  const CsvSplit tt = load_csv(c.target_train);
  const CsvSplit tv = load_csv(c.target_validation);
  if (!src.labels || !tv.labels) throw ConfigError("source and target_validation CSVs need a label column");
  DomainDataset ds;
  ds.source = {src.x, *src.labels};
  ds.target_train = tt.x;
  ds.target_validation = {tv.x, *tv.labels};
  ds.metadata = {{"generator", "csv"},
                 {"source", c.source.string()},
                 {"target_train", c.target_train.string()},
                 {"target_validation", c.target_validation.string()}};
  ds.validate();
  return ds;
}

void aggregate(RunSummary& s) {
  s.mean.clear();
  s.stddev.clear();
  if (s.runs.empty()) return;
  std::map<std::string, std::vector<double>> values;
  bool have_auc = true;
  for (const SeedRun& r : s.runs) {
    values["precision"].push_back(r.metrics.precision);
    values["recall"].push_back(r.metrics.recall);
    values["f1"].push_back(r.metrics.f1);
    values["accuracy"].push_back(r.metrics.accuracy);
    if (r.metrics.auc) values["auc"].push_back(*r.metrics.auc);
    else have_auc = false;
  }
  if (!have_auc) values.erase("auc");
  for (const auto& [name, v] : values) {
    double sum = 0.0;
    for (double x : v) sum += x;
    const double mean = sum / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    s.mean[name] = mean;
    s.stddev[name] = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
  }
}

json to_json(const RunSummary& s) {
  json runs = json::array();
  json seeds = json::array();
  for (const SeedRun& r : s.runs) {
    seeds.push_back(r.seed);
    runs.push_back({{"seed", r.seed}, {"metrics", r.metrics_path}, {"log", r.log_path}});
  }
  return {{"variant", to_string(s.variant)},
          {"config_hash", s.config_hash},
          {"seeds", seeds},
          {"runs", runs},
          {"mean", s.mean},
          {"std", s.stddev}};
}

std::vector<fs::path> cmd_generate(const ExperimentConfig& c) {
  if (c.dataset.kind == "csv") throw ConfigError("generate needs a synthetic dataset kind (moons or blobs)");
  const DomainDataset ds = materialize_dataset(c.dataset);
  const fs::path root = resolve_output_dir(c);
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + root.string() + ": " + ec.message());
  const std::vector<fs::path> paths{root / "source.csv", root / "target_train.csv",
                                    root / "target_validation.csv", root / "dataset.json"};
  write_csv(paths[0], ds.source.x, &ds.source.labels);
  write_csv(paths[1], ds.target_train, nullptr);
  write_csv(paths[2], ds.target_validation.x, &ds.target_validation.labels);
  json meta = ds.metadata;
  meta["files"] = {{"source", "source.csv"},
                   {"target_train", "target_train.csv"},
                   {"target_validation", "target_validation.csv"}};
  meta["rows"] = {{"source", ds.source.size()},
                  {"target_train", ds.target_train.rows()},
                  {"target_validation", ds.target_validation.size()}};
  write_atomic(paths[3], meta.dump(2) + "\n");
  return paths;
}

namespace {

RunSummary run_variant(const ExperimentConfig& c, Variant v, const DomainDataset& data) {
  const fs::path dir = resolve_output_dir(c) / to_string(v);
  fs::create_directories(dir);
  RunSummary summary;
  summary.variant = v;
  summary.config_hash = config_hash(c, v);
  for (std::uint64_t seed : c.seeds) {
    TrainConfig tc = effective_train_config(c, v);
    tc.seed = seed;
    const std::string seed_dir = "seed_" + std::to_string(seed);
    fs::create_directories(dir / seed_dir);
    SeedRun run;
    run.seed = seed;
    run.log_path = seed_dir + "/log.csv";
    run.metrics_path = seed_dir + "/metrics.json";

    // The log is appended as epochs finish so an aborted run leaves its prefix behind.
    std::ofstream log(dir / run.log_path, std::ios::binary | std::ios::trunc);
    log << TrainLog::kCsvHeader << '\n' << std::flush;
    std::ofstream pivots;
    FitHooks hooks;
    hooks.on_epoch = [&log](const EpochRecord& r) {
      TrainLog::write_csv_row(log, r);
      log.flush();
    };
    if (c.dump_pivots) {
      pivots.open(dir / seed_dir / "pivots.csv", std::ios::binary | std::ios::trunc);
      pivots << kPivotCsvHeader << '\n';
      hooks.on_pivot = [&pivots](std::size_t epoch, const PivotSet& p) {
        write_pivot_csv_rows(pivots, epoch, p);
      };
    }
    FitResult result = fit(tc, data, hooks);
    run.metrics = evaluate(result.params, data.target_validation);
    run.log = std::move(result.log);
    write_atomic(dir / run.metrics_path, to_json(run.metrics).dump(2) + "\n");
    save_checkpoint(dir / seed_dir / "checkpoint.json", result.params, result.adaptor);
    if (c.dump_roc) {
      const Prediction p = predict(result.params, data.target_validation.x);
      std::vector<double> scores(p.labels.size());
      for (std::size_t i = 0; i < scores.size(); ++i) scores[i] = p.probabilities(i, 1);
      std::ostringstream roc;
      write_roc_csv(roc, roc_curve(scores, data.target_validation.labels));
      write_atomic(dir / seed_dir / "roc.csv", roc.str());
    }
    summary.runs.push_back(std::move(run));
  }
  aggregate(summary);
  write_atomic(dir / "aggregate.json", to_json(summary).dump(2) + "\n");
  return summary;
}

MetricsReport metrics_from_json(const json& j) {
  MetricsReport r;
  r.precision = j.at("precision").get<double>();
  r.recall = j.at("recall").get<double>();
  r.f1 = j.at("f1").get<double>();
  r.accuracy = j.at("accuracy").get<double>();
  if (!j.at("auc").is_null()) r.auc = j.at("auc").get<double>();
  const json& cm = j.at("confusion");
  r.confusion = {cm.at("tp").get<std::size_t>(), cm.at("fp").get<std::size_t>(),
                 cm.at("tn").get<std::size_t>(), cm.at("fn").get<std::size_t>()};
  return r;
}

std::optional<RunSummary> load_cached(const ExperimentConfig& c, Variant v) {
  const fs::path dir = resolve_output_dir(c) / to_string(v);
  std::ifstream in(dir / "aggregate.json");
  if (!in) return std::nullopt;
  try {
    const json agg = json::parse(in);
    if (agg.at("config_hash").get<std::string>() != config_hash(c, v)) return std::nullopt;
    RunSummary s;
    s.variant = v;
    s.config_hash = agg.at("config_hash").get<std::string>();
    s.from_cache = true;
    for (const json& r : agg.at("runs")) {
      SeedRun run;
      run.seed = r.at("seed").get<std::uint64_t>();
      run.metrics_path = r.at("metrics").get<std::string>();
      run.log_path = r.at("log").get<std::string>();
      std::ifstream m(dir / run.metrics_path);
      if (!m) return std::nullopt;
      run.metrics = metrics_from_json(json::parse(m));
      s.runs.push_back(std::move(run));
    }
    aggregate(s);
    return s;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

std::string percent(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(1) << 100.0 * v;
  return s.str();
}

}  // namespace

RunSummary cmd_train(const ExperimentConfig& c) {
  const DomainDataset data = materialize_dataset(c.dataset);
  return run_variant(c, c.variant, data);
}

AblationTable cmd_ablate(const ExperimentConfig& c) {
  std::optional<DomainDataset> data;
  AblationTable table;
  for (Variant v : {Variant::kClsOnly, Variant::kClsTask, Variant::kClsFeat, Variant::kFull}) {
    if (auto cached = load_cached(c, v)) {
      table.rows.push_back(std::move(*cached));
      continue;
    }
    if (!data) data = materialize_dataset(c.dataset);
    table.rows.push_back(run_variant(c, v, *data));
  }

  std::ostringstream csv, txt;
  csv << "variant,label,precision,recall,f1,accuracy,f1_std\n" << std::setprecision(17);
  txt << std::left << std::setw(22) << "Variant" << std::right << std::setw(8) << "P (%)"
      << std::setw(8) << "R (%)" << std::setw(8) << "F1 (%)" << std::setw(9) << "Acc (%)" << '\n';
  for (const RunSummary& s : table.rows) {
    csv << to_string(s.variant) << ',' << variant_label(s.variant) << ',' << s.mean.at("precision")
        << ',' << s.mean.at("recall") << ',' << s.mean.at("f1") << ',' << s.mean.at("accuracy")
        << ',' << s.stddev.at("f1") << '\n';
    txt << std::left << std::setw(22) << variant_label(s.variant) << std::right << std::setw(8)
        << percent(s.mean.at("precision")) << std::setw(8) << percent(s.mean.at("recall"))
        << std::setw(8) << percent(s.mean.at("f1")) << std::setw(9)
        << percent(s.mean.at("accuracy")) << '\n';
  }
  const fs::path root = resolve_output_dir(c);
  write_atomic(root / "ablation.csv", csv.str());
  write_atomic(root / "ablation.txt", txt.str());
  return table;
}

namespace {

void apply_sweep_value(ExperimentConfig& c, const std::string& name, const std::string& value) {
  try {
    if (name == "lambda") c.train.weights.lambda = std::stod(value);
    else if (name == "mu") c.train.weights.mu = std::stod(value);
    else if (name == "beta") c.train.beta = std::stod(value);
    else if (name == "m") {
      c.train.m = std::stoul(value);
      c.train.batch_per_domain = c.train.m * c.train.num_classes;
    } else if (name == "sigma") c.train.sigma = parse_critic_activation(value);
    else if (name == "pivot_strategy") c.train.pivot_strategy = parse_pivot_strategy(value);
    else if (name == "adaptor_variant") c.train.adaptor_variant = parse_adaptor_variant(value);
    else throw ConfigError("unknown sweep parameter '" + name + "'");
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError("bad sweep value '" + value + "' for " + name + ": " + e.what());
  }
}

}  // namespace

std::vector<SweepCell> cmd_sweep(const ExperimentConfig& c, const std::string& param,
                                 const std::vector<std::string>& values) {
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  std::vector<std::string> names;
  std::stringstream ss(param);
  for (std::string part; std::getline(ss, part, ',');) names.push_back(part);
  if (names.empty() || names.size() > 2) throw ConfigError("sweep --param takes one name or 'lambda,mu'");
  {
    ExperimentConfig probe = c;
    for (const auto& n : names)
      for (const auto& v : values) apply_sweep_value(probe, n, v);
  }

  std::vector<std::map<std::string, std::string>> points;
  if (names.size() == 1) {
    for (const auto& v : values) points.push_back({{names[0], v}});
  } else {
    for (const auto& a : values)
      for (const auto& b : values) points.push_back({{names[0], a}, {names[1], b}});
  }

  const fs::path root = resolve_output_dir(c);
  std::string tag;
  for (const auto& n : names) tag += (tag.empty() ? "" : "_") + n;
  std::vector<SweepCell> cells;
  for (const auto& point : points) {
    SweepCell cell;
    cell.point = point;
    ExperimentConfig cc = c;
    std::string sub;
    for (const auto& n : names) {
      apply_sweep_value(cc, n, point.at(n));
      sub += (sub.empty() ? "" : "_") + n + "=" + point.at(n);
    }
    cc.output_dir = root / ("sweep_" + tag) / sub;
    try {
      cc.train.validate();
      cell.summary = cmd_train(cc);
    } catch (const std::exception& e) {
      cell.error = e.what();
    }
    cells.push_back(std::move(cell));
  }

  std::ostringstream csv;
  csv << std::setprecision(17);
  const auto f1_of = [](const SweepCell& cell) -> std::string {
    if (!cell.summary) return "nan";
    std::ostringstream s;
    s << std::setprecision(17) << cell.summary->mean.at("f1");
    return s.str();
  };
  if (names.size() == 2) {
    csv << names[0] << '\\' << names[1];
    for (const auto& v : values) csv << ',' << v;
    csv << '\n';
    for (std::size_t i = 0; i < values.size(); ++i) {
      csv << values[i];
      for (std::size_t j = 0; j < values.size(); ++j) csv << ',' << f1_of(cells[i * values.size() + j]);
      csv << '\n';
    }
  } else {
    csv << names[0] << ",mean_f1,std_f1,error\n";
    for (const SweepCell& cell : cells) {
      csv << cell.point.at(names[0]) << ',' << f1_of(cell) << ','
          << (cell.summary ? cell.summary->stddev.at("f1") : std::nan("")) << ',' << cell.error << '\n';
    }
  }
  write_atomic(root / ("sweep_" + tag + ".csv"), csv.str());
  return cells;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> out;
  try {
    const auto dots = text.find("..");
    if (dots != std::string::npos) {
      const std::uint64_t lo = std::stoull(text.substr(0, dots));
      const std::uint64_t hi = std::stoull(text.substr(dots + 2));
      if (hi < lo) throw ConfigError("seed range '" + text + "' is empty");
      for (std::uint64_t s = lo; s <= hi; ++s) out.push_back(s);
      return out;
    }
    std::stringstream ss(text);
    for (std::string part; std::getline(ss, part, ',');) out.push_back(std::stoull(part));
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    throw ConfigError("cannot parse seed list '" + text + "'");
  }
  if (out.empty()) throw ConfigError("seed list is empty");
  return out;
}

}  // namespace tanet
