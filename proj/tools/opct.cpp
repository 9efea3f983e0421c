/*
 * Copyright 2026 The OPCT Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// opct: train, apply and evaluate oblique predictive clustering trees.
//
//   opct train --task mtr --features x.csv --targets y.csv --out model.opce
//   opct predict --model model.opce --features x.csv --out scores.txt
//   opct evaluate --task mtr --targets y.csv --scores scores.txt
//   opct cv --task bin --features x.csv --targets y.csv --folds 10
//   opct importance --task mtr --features x.csv --targets y.csv --noise-audit
//   opct benchmark --suite scaling --out timings.csv
//
// Feature files ending in .csv are read as CSV with a header row; anything
// else is read as sparse `index:value` lines. Target files ending in .csv are
// CSV; anything else is one comma-separated label set per line.
//
// Every subcommand accepts --config PATH, a file of `key = value` lines naming
// long flags without the leading dashes. Flags given on the command line win.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "opct/opct.hpp"

namespace {

using namespace opct;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

bool is_blank_file(const std::string& path) {
  for (const auto& line : read_lines(path)) {
    if (!trim(line).empty()) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Config files

// Inserts `--key value` for every config entry whose flag is not already on
// the command line. Bare `true`/`false` values toggle flags.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::optional<std::string> path;
  for (std::size_t i = 0; i + 1 < args.size(); ++i) {
    if (args[i] == "--config") path = args[i + 1];
  }
  for (const auto& a : args) {
    if (a.rfind("--config=", 0) == 0) path = a.substr(9);
  }
  if (!path) return args;
  std::ifstream probe(*path);
  if (!probe) throw UsageError("cannot open config file " + *path);
  std::vector<std::string> extra;
  std::size_t line_no = 0;
  for (const auto& raw : read_lines(*path)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw UsageError(*path + ":" + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw UsageError(*path + ":" + std::to_string(line_no) + ": empty key");
    if (key == "config") throw UsageError(*path + ":" + std::to_string(line_no) + ": config files do not nest");
    const std::string flag = "--" + key;
    const bool given = std::any_of(args.begin(), args.end(), [&](const std::string& a) {
      return a == flag || a.rfind(flag + "=", 0) == 0;
    });
    if (given || value == "false") continue;
    extra.push_back(flag);
    if (value != "true") extra.push_back(value);
  }
  args.insert(args.end(), extra.begin(), extra.end());
  return args;
}

// ---------------------------------------------------------------------------
// Shared training flags

struct DataArgs {
  std::string task;
  std::string features;
  std::string targets;
  std::string hierarchy;
  std::string labels;
};

struct TrainArgs {
  DataArgs data;
  std::string variant = "grad";
  std::string mode = "bagging";
  std::size_t trees = 50;
  double c = 10.0;
  double lr = 0.1;
  std::size_t max_iter = 100;
  std::size_t cluster_iter = 10;
  std::size_t min_examples = 2;
  double impurity_threshold = 0.05;
  std::optional<std::size_t> max_depth;
  std::uint64_t seed = 0;
  std::optional<double> feature_fraction;
  std::size_t workers = 0;
};

void add_data_flags(CLI::App* cmd, DataArgs& a, bool need_features) {
  cmd->add_option("--task", a.task, "str|mtr|bin|mcc|mlc|hmlc")->required();
  auto* f = cmd->add_option("--features", a.features, "feature file (.csv or sparse index:value)");
  if (need_features) f->required();
  cmd->add_option("--targets", a.targets, "target file (.csv or label sets)")->required();
  cmd->add_option("--hierarchy", a.hierarchy, "label hierarchy, parent<TAB>child lines (hmlc only)");
  cmd->add_option("--labels", a.labels, "label names, one per line, fixing label-set column order");
}

void add_train_flags(CLI::App* cmd, TrainArgs& a) {
  add_data_flags(cmd, a.data, true);
  cmd->add_option("--variant", a.variant, "svm|grad|axis")->capture_default_str();
  cmd->add_option("--mode", a.mode, "single|bagging|rf")->capture_default_str();
  cmd->add_option("--trees", a.trees, "ensemble size")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--C", a.c, "regularization strength")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--lr", a.lr, "Adam learning rate")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--max-iter", a.max_iter, "optimization iteration cap")->capture_default_str();
  cmd->add_option("--cluster-iter", a.cluster_iter, "clustering iteration cap")->capture_default_str();
  cmd->add_option("--min-examples", a.min_examples, "smallest node that may split")->capture_default_str();
  cmd->add_option("--impurity-threshold", a.impurity_threshold, "required relative impurity reduction")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--max-depth", a.max_depth, "depth limit (unlimited when omitted)");
  cmd->add_option("--seed", a.seed, "master seed")->capture_default_str();
  cmd->add_option("--feature-fraction", a.feature_fraction, "rf features per split (default sqrt(D)/D)")
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--workers", a.workers, "parallel tree builders (default OPCT_WORKERS or all cores)");
}

void add_config_flag(CLI::App* cmd) {
  cmd->add_option("--config", "file of 'key = value' lines supplying defaults for any flag");
}

EnsembleConfig make_config(const TrainArgs& a) {
  EnsembleConfig cfg;
  cfg.n_trees = a.trees;
  cfg.mode = parse_mode(a.mode);
  cfg.master_seed = a.seed;
  cfg.workers = a.workers;
  cfg.rf_feature_fraction = a.feature_fraction;
  if (a.feature_fraction && cfg.mode != EnsembleMode::kRandomForest) {
    throw UsageError("--feature-fraction needs --mode rf");
  }
  GrowConfig& g = cfg.grow;
  g.split.variant = parse_variant(a.variant);
  g.split.svm.C = a.c;
  g.split.svm.max_cluster_iter = a.cluster_iter;
  g.split.svm.max_opt_iter = a.max_iter;
  g.split.grad.C = a.c;
  g.split.grad.lr = a.lr;
  g.split.grad.max_opt_iter = a.max_iter;
  g.max_depth = a.max_depth;
  g.min_examples_to_split = a.min_examples;
  g.impurity_reduction_threshold = a.impurity_threshold;
  return cfg;
}

Task checked_task(const DataArgs& a) {
  Task task;
  try {
    task = parse_task(a.task);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (!a.hierarchy.empty() && task != Task::kHmlc) throw UsageError("--hierarchy is only valid with --task hmlc");
  if (a.hierarchy.empty() && task == Task::kHmlc) throw UsageError("--task hmlc needs --hierarchy");
  return task;
}

struct LoadedFeatures {
  Matrix x;
  FeatureEncoder encoder;
  std::vector<std::string> names;
};

LoadedFeatures load_features(const std::string& path) {
  if (ends_with(path, ".csv")) {
    auto f = load_features_csv(path);
    return {std::move(f.x), std::move(f.encoder), std::move(f.names)};
  }
  return {load_sparse_features(path), FeatureEncoder(), {}};
}

struct LoadedTargets {
  Matrix y;
  std::vector<std::string> names;
  std::optional<HierarchyGraph> hierarchy;
};

LoadedTargets load_targets(const DataArgs& a, Task task) {
  LoadedTargets t;
  std::optional<std::vector<std::string>> names;
  if (!a.labels.empty()) names = load_label_names(a.labels);
  if (ends_with(a.targets, ".csv")) {
    if (names) throw UsageError("--labels applies to label-set target files, not CSV");
    auto [y, columns] = load_targets_csv(a.targets, task);
    t.y = std::move(y);
    t.names = std::move(columns);
    if (task == Task::kHmlc) t.hierarchy = load_hierarchy(a.hierarchy, t.names);
    return t;
  }
  if (task != Task::kMlc && task != Task::kHmlc) {
    throw UsageError("label-set target files need --task mlc or hmlc; use a .csv target file for " +
                     std::string(task_name(task)));
  }
  if (task == Task::kHmlc) {
    t.hierarchy = load_hierarchy(a.hierarchy, names);
    names = t.hierarchy->names();
  } else if (!names) {
    names = collect_label_names(a.targets);
  }
  t.y = load_label_sets(a.targets, *names);
  t.names = *names;
  return t;
}

Dataset load_training_data(const DataArgs& a) {
  const Task task = checked_task(a);
  LoadedFeatures f = load_features(a.features);
  LoadedTargets t = load_targets(a, task);
  if (f.x.rows() != t.y.rows()) {
    throw std::runtime_error(a.features + " has " + std::to_string(f.x.rows()) + " examples but " + a.targets +
                             " has " + std::to_string(t.y.rows()));
  }
  Dataset ds = make_dataset(std::move(f.x), std::move(t.y), task, std::move(t.hierarchy));
  ds.feature_names = std::move(f.names);
  ds.encoder = std::move(f.encoder);
  ds.target_names = std::move(t.names);
  return ds;
}

// ---------------------------------------------------------------------------
// Model files

void write_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("cannot write " + path);
}

EnsembleModel read_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return deserialize_ensemble(bytes);
  } catch (const ParseError& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

// Opens `path` for writing, or returns std::cout when it is empty or "-".
class Output {
 public:
  explicit Output(const std::string& path) {
    if (path.empty() || path == "-") return;
    file_.open(path);
    if (!file_) throw std::runtime_error("cannot write " + path);
  }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

 private:
  std::ofstream file_;
};

void print_model_report(const EnsembleModel& m, double seconds) {
  std::size_t nodes = 0;
  double per_tree_nonzero = 0.0;
  for (const auto& t : m.trees) {
    nodes += node_count(t);
    std::size_t splits = 0, nonzero = 0;
    for (const auto& n : t.nodes) {
      if (n.is_leaf) continue;
      ++splits;
      nonzero += n.plane.nonzero_count();
    }
    if (splits > 0) per_tree_nonzero += static_cast<double>(nonzero) / static_cast<double>(splits);
  }
  std::cout << "seconds=" << format_double(seconds) << '\n'
            << "trees=" << m.trees.size() << '\n'
            << "nodes=" << nodes << '\n'
            << "mean_nonzero_weights="
            << format_double(m.trees.empty() ? 0.0 : per_tree_nonzero / static_cast<double>(m.trees.size()))
            << '\n';
}

// ---------------------------------------------------------------------------
// Subcommands

int run_train(const TrainArgs& a, const std::string& out) {
  const EnsembleConfig cfg = make_config(a);
  const Dataset ds = load_training_data(a.data);
  const auto start = std::chrono::steady_clock::now();
  const EnsembleModel model = fit_ensemble(ds, cfg);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_bytes(out, serialize(model));
  print_model_report(model, seconds);
  return 0;
}

Matrix load_prediction_features(const EnsembleModel& model, const std::string& path) {
  if (!ends_with(path, ".csv")) return load_sparse_features(path, model.n_features);
  if (model.encoder.empty()) return load_features_csv(path).x;
  const CsvTable t = read_csv(path);
  const auto& columns = model.encoder.columns();
  if (t.header.size() != columns.size()) {
    parse_fail(path, 1, "model expects " + std::to_string(columns.size()) + " columns, found " +
                            std::to_string(t.header.size()));
  }
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (t.header[c] != columns[c].name) {
      parse_fail(path, 1, "column " + std::to_string(c + 1) + " is '" + t.header[c] + "', model expects '" +
                              columns[c].name + "'");
    }
  }
  try {
    return model.encoder.apply(t.rows, 2);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what(), e.position());
  }
}

int run_predict(const std::string& model_path, const std::string& features, const std::string& out_path) {
  const EnsembleModel model = read_model(model_path);
  Output out(out_path);
  if (is_blank_file(features)) return 0;
  const Matrix x = load_prediction_features(model, features);
  write_scores(out.stream(), predict(model, x));
  return 0;
}

int run_evaluate(const DataArgs& a, const std::string& scores_path) {
  const Task task = checked_task(a);
  LoadedTargets t = load_targets(a, task);
  Matrix truth = std::move(t.y);
  if (t.hierarchy) truth = expand_hierarchy(truth, *t.hierarchy);
  const DenseMatrix scores = load_scores(scores_path);
  if (scores.rows() != truth.rows() || scores.cols() != truth.cols()) {
    throw std::runtime_error(scores_path + " holds " + std::to_string(scores.rows()) + "x" +
                             std::to_string(scores.cols()) + " scores, targets are " + std::to_string(truth.rows()) +
                             "x" + std::to_string(truth.cols()));
  }
  const EvalResult r = evaluate(task, truth, scores, t.hierarchy ? &*t.hierarchy : nullptr);
  std::cout << "metric=" << r.metric << '\n'
            << "value=" << format_double(r.value) << '\n'
            << "examples=" << truth.rows() << '\n'
            << "skipped=" << r.skipped << '\n';
  return 0;
}

std::vector<std::size_t> class_of(const Dataset& ds) {
  if (ds.task == Task::kMcc) return argmax_rows(ds.y);
  std::vector<std::size_t> out(ds.rows());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = ds.y.at(i, 0) == 1.0 ? 1 : 0;
  return out;
}

int run_cv(const TrainArgs& a, std::size_t folds) {
  const EnsembleConfig cfg = make_config(a);
  const Dataset ds = load_training_data(a.data);
  const bool stratify = ds.task == Task::kBin || ds.task == Task::kMcc;
  const auto strata = stratify ? class_of(ds) : std::vector<std::size_t>{};
  const FoldPlan plan =
      stratify ? kfold(ds.rows(), folds, a.seed, std::span<const std::size_t>(strata)) : kfold(ds.rows(), folds, a.seed);
  Vector values;
  std::string metric;
  for (std::size_t f = 0; f < folds; ++f) {
    const auto train_rows = plan.train_indices(f);
    const auto test_rows = plan.test_indices(f);
    const Dataset train = take_rows(ds, train_rows);
    const Dataset test = take_rows(ds, test_rows);
    const EnsembleModel model = fit_ensemble(train, cfg);
    const EvalResult r = evaluate(ds.task, test.y, predict(model, test.x), ds.hierarchy ? &*ds.hierarchy : nullptr);
    metric = r.metric;
    values.push_back(r.value);
  }
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  std::cout << "metric=" << metric << '\n' << "folds=" << folds << '\n' << "stratified=" << (stratify ? 1 : 0) << '\n';
  for (std::size_t f = 0; f < values.size(); ++f) std::cout << "fold" << f + 1 << '=' << format_double(values[f]) << '\n';
  std::cout << "mean=" << format_double(mean) << '\n' << "std=" << format_double(sd) << '\n';
  return 0;
}

int run_importance(const TrainArgs& a, const std::string& model_path, bool audit, const std::string& out_path) {
  NoiseAuditReport report;
  if (!model_path.empty()) {
    if (audit) throw UsageError("--noise-audit trains a fresh model and cannot use --model");
    const EnsembleModel model = read_model(model_path);
    report = summarize_importance(ensemble_importance(model), std::vector<bool>(model.n_features, false));
  } else {
    if (a.data.features.empty()) throw UsageError("importance needs --model or --features");
    const EnsembleConfig cfg = make_config(a);
    const Dataset ds = load_training_data(a.data);
    if (audit) {
      Rng rng(mix_seed(a.seed));
      report = noise_audit(ds, cfg, rng);
    } else {
      const EnsembleModel model = fit_ensemble(ds, cfg);
      report = summarize_importance(ensemble_importance(model), std::vector<bool>(model.n_features, false));
    }
  }
  {
    Output out(out_path);
    write_importance_csv(out.stream(), report);
  }
  std::cout << "real_mean=" << format_double(report.real_mean) << '\n'
            << "real_max=" << format_double(report.real_max) << '\n';
  if (audit) {
    std::cout << "noise_mean=" << format_double(report.noise_mean) << '\n'
              << "noise_max=" << format_double(report.noise_max) << '\n';
  }
  return 0;
}

struct BenchArgs {
  std::string suite;
  std::string out;
  bench::ScalingOptions options;
  std::vector<std::string> variants{"svm", "grad", "axis"};
  bool split_only = false;
};

int run_benchmark(BenchArgs& a) {
  if (a.suite != "scaling") throw UsageError("unknown suite '" + a.suite + "'; available: scaling");
  a.options.variants.clear();
  for (const auto& v : a.variants) a.options.variants.push_back(parse_variant(v));
  a.options.full_trees = !a.split_only;
  const auto rows = bench::run_scaling_suite(a.options);
  Output out(a.out);
  bench::write_timing_csv(out.stream(), rows);
  return 0;
}

int run(int argc, char** argv) {
  CLI::App app{"Oblique predictive clustering trees and ensembles."};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "help for every subcommand");

  TrainArgs train_args;
  std::string model_out;
  auto* train = app.add_subcommand("train", "fit a model and write it to --out");
  add_train_flags(train, train_args);
  train->add_option("--out", model_out, "model file")->required();
  add_config_flag(train);

  std::string model_in, predict_features, predict_out;
  auto* pred = app.add_subcommand("predict", "write one line of scores per example");
  pred->add_option("--model", model_in, "model file")->required();
  pred->add_option("--features", predict_features, "feature file")->required();
  pred->add_option("--out", predict_out, "score file (stdout when omitted)");
  add_config_flag(pred);

  DataArgs eval_args;
  std::string scores_path;
  auto* eval = app.add_subcommand("evaluate", "score predictions with the task's metric");
  add_data_flags(eval, eval_args, false);
  eval->add_option("--scores", scores_path, "score file written by predict")->required();
  add_config_flag(eval);

  TrainArgs cv_args;
  std::size_t folds = 10;
  auto* cv = app.add_subcommand("cv", "k-fold cross-validation");
  add_train_flags(cv, cv_args);
  cv->add_option("--folds", folds, "number of folds")->capture_default_str()->check(CLI::Range(2, 1 << 30));
  add_config_flag(cv);

  TrainArgs imp_args;
  std::string imp_model, imp_out;
  bool noise_audit_flag = false;
  auto* imp = app.add_subcommand("importance", "per-feature importance table");
  add_train_flags(imp, imp_args);
  imp->get_option("--features")->required(false);
  imp->get_option("--targets")->required(false);
  imp->get_option("--task")->required(false);
  imp->add_option("--model", imp_model, "read importances from an existing model instead of training");
  imp->add_flag("--noise-audit", noise_audit_flag, "append one noise feature per real feature before training");
  imp->add_option("--out", imp_out, "importance CSV (stdout when omitted)");
  add_config_flag(imp);

  BenchArgs bench_args;
  auto* bm = app.add_subcommand("benchmark", "time split learning and tree growth");
  bm->add_option("--suite", bench_args.suite, "scaling")->required();
  bm->add_option("--out", bench_args.out, "CSV file")->required();
  bm->add_option("--n", bench_args.options.n, "examples")->capture_default_str();
  bm->add_option("--d", bench_args.options.d, "features in the K sweep")->capture_default_str();
  bm->add_option("--k", bench_args.options.k_values, "target counts")->delimiter(',')->capture_default_str();
  bm->add_option("--d-sweep", bench_args.options.d_values, "feature counts")->delimiter(',')->capture_default_str();
  bm->add_option("--sparse-d", bench_args.options.sparse_d, "features in the dense-vs-CSR rows, 0 to skip")
      ->capture_default_str();
  bm->add_option("--repeats", bench_args.options.repeats, "split timings per cell")->capture_default_str();
  bm->add_option("--variants", bench_args.variants, "svm,grad,axis")->delimiter(',')->capture_default_str();
  bm->add_option("--seed", bench_args.options.seed, "data seed")->capture_default_str();
  bm->add_flag("--split-only", bench_args.split_only, "skip full-tree timings");
  add_config_flag(bm);

  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  args = expand_config(std::move(args));
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  if (*train) return run_train(train_args, model_out);
  if (*pred) return run_predict(model_in, predict_features, predict_out);
  if (*eval) return run_evaluate(eval_args, scores_path);
  if (*cv) return run_cv(cv_args, folds);
  if (*imp) {
    if (imp_model.empty() && imp_args.data.task.empty()) throw UsageError("importance needs --model or --task");
    return run_importance(imp_args, imp_model, noise_audit_flag, imp_out);
  }
  return run_benchmark(bench_args);
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const UsageError& e) {
    std::cerr << "opct: usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::string what = e.what();
    std::replace(what.begin(), what.end(), '\n', ' ');
    std::cerr << "opct: error: " << what << '\n';
    return 1;
  }
}
