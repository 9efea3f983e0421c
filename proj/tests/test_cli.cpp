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

// Drives the opct executable end to end.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "opct/opct.hpp"

namespace opct {
namespace {

namespace fs = std::filesystem;

struct RunResult {
  int status = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::map<std::string, std::string> key_values(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

EnsembleModel read_model(const std::string& p) {
  const std::string bytes = slurp(p);
  return deserialize_ensemble(
      std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()));
}

std::size_t line_count(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("opct_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  void write(const std::string& name, const std::string& content) const {
    std::ofstream(path(name), std::ios::binary) << content;
  }

  RunResult run(const std::string& args) const {
    const std::string out = path("stdout.txt"), err = path("stderr.txt");
    const std::string cmd = std::string(OPCT_CLI_PATH) + " " + args + " >" + out + " 2>" + err;
    const int raw = std::system(cmd.c_str());
    RunResult r;
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
  }

  // Writes the oblique toy as x.csv (features) and y.csv (BIN target).
  void write_toy(std::size_t n = 120, std::uint64_t seed = 5) const {
    const Dataset ds = synthetic::oblique_toy(n, seed);
    std::ofstream x(path("x.csv")), y(path("y.csv"));
    write_csv(x, ds.x, {"x1", "x2"});
    write_csv(y, ds.y, {"label"});
  }

  fs::path dir_;
};

TEST_F(CliTest, TrainPredictEvaluateRoundTrip) {
  write_toy();
  const auto train = run("train --task bin --variant svm --trees 5 --seed 3 --features " + path("x.csv") +
                         " --targets " + path("y.csv") + " --out " + path("m.opce"));
  ASSERT_EQ(train.status, 0) << train.err;
  const auto report = key_values(train.out);
  EXPECT_EQ(report.at("trees"), "5");
  EXPECT_TRUE(report.count("seconds"));
  EXPECT_TRUE(report.count("nodes"));
  EXPECT_TRUE(report.count("mean_nonzero_weights"));

  const auto pred = run("predict --model " + path("m.opce") + " --features " + path("x.csv") + " --out " +
                        path("s.txt"));
  ASSERT_EQ(pred.status, 0) << pred.err;
  const auto eval = run("evaluate --task bin --targets " + path("y.csv") + " --scores " + path("s.txt"));
  ASSERT_EQ(eval.status, 0) << eval.err;
  const auto kv = key_values(eval.out);
  EXPECT_EQ(kv.at("metric"), "f1");

  const Dataset ds = synthetic::oblique_toy(120, 5);
  const EvalResult expected = evaluate(Task::kBin, ds.y, predict(read_model(path("m.opce")), ds.x));
  EXPECT_EQ(kv.at("value"), format_double(expected.value));
}

TEST_F(CliTest, EvaluateMatchesInProcess) {
  const Dataset ds = synthetic::nonlinear_regression(80, 3, 2, 3, 9);
  {
    std::ofstream x(path("x.csv")), y(path("y.csv"));
    write_csv(x, ds.x, {"a", "b", "c"});
    write_csv(y, ds.y, {"t1", "t2"});
  }
  ASSERT_EQ(run("train --task mtr --trees 3 --seed 1 --features " + path("x.csv") + " --targets " + path("y.csv") +
                " --out " + path("m.opce"))
                .status,
            0);
  ASSERT_EQ(run("predict --model " + path("m.opce") + " --features " + path("x.csv") + " --out " + path("s.txt"))
                .status,
            0);
  const auto eval = run("evaluate --task mtr --targets " + path("y.csv") + " --scores " + path("s.txt"));
  ASSERT_EQ(eval.status, 0) << eval.err;

  const EnsembleModel model = read_model(path("m.opce"));
  const DenseMatrix scores = predict(model, ds.x);
  EXPECT_EQ(load_scores(path("s.txt")), scores);
  const EvalResult expected = evaluate(Task::kMtr, ds.y, scores);
  EXPECT_EQ(key_values(eval.out).at("value"), format_double(expected.value));
  EXPECT_EQ(key_values(eval.out).at("metric"), "mean_r2");
}

TEST_F(CliTest, SameSeedSameModelFile) {
  write_toy();
  for (const char* name : {"a.opce", "b.opce"}) {
    ASSERT_EQ(run("train --task bin --trees 4 --seed 7 --features " + path("x.csv") + " --targets " + path("y.csv") +
                  " --out " + path(name))
                  .status,
              0);
  }
  EXPECT_EQ(slurp(path("a.opce")), slurp(path("b.opce")));
  ASSERT_EQ(run("train --task bin --trees 4 --seed 7 --workers 1 --features " + path("x.csv") + " --targets " +
                path("y.csv") + " --out " + path("c.opce"))
                .status,
            0);
  EXPECT_EQ(slurp(path("a.opce")), slurp(path("c.opce")));
}

TEST_F(CliTest, DefaultsAndRandomForestFraction) {
  const Dataset ds = synthetic::nonlinear_regression(60, 9, 1, 9, 3);
  {
    std::ofstream x(path("x.csv")), y(path("y.csv"));
    write_csv(x, ds.x, {"a", "b", "c", "d", "e", "f", "g", "h", "i"});
    write_csv(y, ds.y, {"t"});
  }
  ASSERT_EQ(run("train --task str --mode rf --trees 2 --features " + path("x.csv") + " --targets " + path("y.csv") +
                " --out " + path("m.opce"))
                .status,
            0);
  const EnsembleModel m = read_model(path("m.opce"));
  EXPECT_DOUBLE_EQ(m.feature_fraction, 3.0 / 9.0);
  EXPECT_EQ(m.config.grow.split.variant, SplitVariant::kGrad);
  EXPECT_EQ(m.config.grow.split.grad.C, 10.0);
  EXPECT_EQ(m.config.grow.split.grad.lr, 0.1);
  EXPECT_EQ(m.config.grow.split.grad.max_opt_iter, 100u);
  EXPECT_EQ(m.config.grow.split.svm.max_cluster_iter, 10u);
  EXPECT_EQ(m.config.grow.impurity_reduction_threshold, 0.05);
  EXPECT_EQ(m.config.grow.min_examples_to_split, 2u);
  EXPECT_FALSE(m.config.grow.max_depth.has_value());
}

TEST_F(CliTest, SingleLeafModelGivesConstantRows) {
  write_toy(40);
  ASSERT_EQ(run("train --task bin --mode single --max-depth 0 --features " + path("x.csv") + " --targets " +
                path("y.csv") + " --out " + path("m.opce"))
                .status,
            0);
  const auto pred = run("predict --model " + path("m.opce") + " --features " + path("x.csv"));
  ASSERT_EQ(pred.status, 0) << pred.err;
  std::istringstream lines(pred.out);
  std::string first, line;
  std::getline(lines, first);
  std::size_t count = 1;
  while (std::getline(lines, line)) {
    EXPECT_EQ(line, first);
    ++count;
  }
  EXPECT_EQ(count, 40u);
}

TEST_F(CliTest, EmptyFeatureFileGivesEmptyOutput) {
  write_toy(40);
  ASSERT_EQ(run("train --task bin --trees 2 --features " + path("x.csv") + " --targets " + path("y.csv") + " --out " +
                path("m.opce"))
                .status,
            0);
  write("empty.csv", "");
  const auto r = run("predict --model " + path("m.opce") + " --features " + path("empty.csv"));
  EXPECT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(r.out, "");
}

TEST_F(CliTest, UsageErrorsAreOneLine) {
  write_toy(40);
  write("h.tsv", "a\tb\n");
  const auto r = run("train --task bin --hierarchy " + path("h.tsv") + " --features " + path("x.csv") +
                     " --targets " + path("y.csv") + " --out " + path("m.opce"));
  EXPECT_NE(r.status, 0);
  EXPECT_EQ(line_count(r.err), 1u) << r.err;
  EXPECT_NE(r.err.find("--hierarchy"), std::string::npos);

  const auto missing = run("train --task bin --features " + path("x.csv"));
  EXPECT_NE(missing.status, 0);
  EXPECT_EQ(line_count(missing.err), 1u) << missing.err;

  const auto bad_variant = run("train --task bin --variant tabu --features " + path("x.csv") + " --targets " +
                               path("y.csv") + " --out " + path("m.opce"));
  EXPECT_NE(bad_variant.status, 0);
  EXPECT_EQ(line_count(bad_variant.err), 1u);

  EXPECT_NE(run("").status, 0);
  EXPECT_NE(run("frobnicate").status, 0);
}

TEST_F(CliTest, MalformedInputsReportLocation) {
  write("x.csv", "a,b\n1,2\n3\n");
  write("y.csv", "y\n0\n1\n");
  const auto r = run("train --task bin --features " + path("x.csv") + " --targets " + path("y.csv") + " --out " +
                     path("m.opce"));
  EXPECT_NE(r.status, 0);
  EXPECT_NE(r.err.find("x.csv:3:"), std::string::npos) << r.err;
  EXPECT_EQ(line_count(r.err), 1u);

  write("x.txt", "0:1 2:2\n3:1 1:1\n");
  const auto sparse = run("train --task bin --features " + path("x.txt") + " --targets " + path("y.csv") +
                          " --out " + path("m.opce"));
  EXPECT_NE(sparse.status, 0);
  EXPECT_NE(sparse.err.find("x.txt:2:"), std::string::npos) << sparse.err;

  write("m.opce", "not a model");
  write("ok.csv", "a,b\n1,2\n");
  const auto model = run("predict --model " + path("m.opce") + " --features " + path("ok.csv"));
  EXPECT_NE(model.status, 0);
  EXPECT_EQ(line_count(model.err), 1u);
}

TEST_F(CliTest, FeatureCountMismatch) {
  write_toy(40);
  ASSERT_EQ(run("train --task bin --trees 2 --features " + path("x.csv") + " --targets " + path("y.csv") + " --out " +
                path("m.opce"))
                .status,
            0);
  write("wide.csv", "x1,x2,x3\n1,2,3\n");
  const auto r = run("predict --model " + path("m.opce") + " --features " + path("wide.csv"));
  EXPECT_NE(r.status, 0);
  EXPECT_NE(r.err.find("wide.csv:1:"), std::string::npos) << r.err;
  write("wide.txt", "0:1 2:1\n");
  EXPECT_NE(run("predict --model " + path("m.opce") + " --features " + path("wide.txt")).status, 0);
}

TEST_F(CliTest, SparseFeaturesWithLabelSets) {
  const Dataset ds = synthetic::multilabel(60, 6, 3, 6, 21);
  const std::vector<std::string> names{"red", "green", "blue"};
  {
    std::ofstream x(path("x.txt")), y(path("y.txt")), l(path("labels.txt"));
    write_sparse_features(x, to_sparse(ds.x));
    write_label_sets(y, ds.y, names);
    for (const auto& n : names) l << n << '\n';
  }
  const auto train = run("train --task mlc --trees 3 --labels " + path("labels.txt") + " --features " +
                         path("x.txt") + " --targets " + path("y.txt") + " --out " + path("m.opce"));
  ASSERT_EQ(train.status, 0) << train.err;
  ASSERT_EQ(run("predict --model " + path("m.opce") + " --features " + path("x.txt") + " --out " + path("s.txt"))
                .status,
            0);
  const auto eval = run("evaluate --task mlc --labels " + path("labels.txt") + " --targets " + path("y.txt") +
                        " --scores " + path("s.txt"));
  ASSERT_EQ(eval.status, 0) << eval.err;
  EXPECT_EQ(key_values(eval.out).at("metric"), "lrap");
}

TEST_F(CliTest, HierarchicalRoundTrip) {
  write("x.csv", "a,b\n0,0\n0,1\n1,0\n1,1\n0,0.1\n1,0.9\n");
  write("y.txt", "leaf1\nleaf2\nleaf1\nleaf2\nleaf1\nleaf2\n");
  write("h.tsv", "root\tleaf1\nroot\tleaf2\n");
  const auto train = run("train --task hmlc --trees 2 --hierarchy " + path("h.tsv") + " --features " + path("x.csv") +
                         " --targets " + path("y.txt") + " --out " + path("m.opce"));
  ASSERT_EQ(train.status, 0) << train.err;
  ASSERT_EQ(run("predict --model " + path("m.opce") + " --features " + path("x.csv") + " --out " + path("s.txt"))
                .status,
            0);
  const auto eval = run("evaluate --task hmlc --hierarchy " + path("h.tsv") + " --targets " + path("y.txt") +
                        " --scores " + path("s.txt"));
  ASSERT_EQ(eval.status, 0) << eval.err;
  EXPECT_EQ(key_values(eval.out).at("metric"), "weighted_lrap");
  // Three labels per row, the root always predicted at 1.
  EXPECT_EQ(line_count(slurp(path("s.txt"))), 6u);
}

TEST_F(CliTest, CrossValidationReport) {
  write_toy(100);
  const std::string args = "cv --task bin --variant grad --mode single --seed 4 --features " + path("x.csv") +
                           " --targets " + path("y.csv");
  const auto a = run(args);
  ASSERT_EQ(a.status, 0) << a.err;
  const auto kv = key_values(a.out);
  EXPECT_EQ(kv.at("folds"), "10");
  EXPECT_EQ(kv.at("stratified"), "1");
  EXPECT_TRUE(kv.count("fold10"));
  double mean = 0.0;
  ASSERT_TRUE(parse_double(kv.at("mean"), mean));
  EXPECT_NEAR(mean, 1.0, 0.01);
  EXPECT_TRUE(kv.count("std"));
  EXPECT_EQ(run(args).out, a.out);
}

TEST_F(CliTest, ImportanceTable) {
  write_toy(80);
  const auto r = run("importance --task bin --trees 4 --noise-audit --features " + path("x.csv") + " --targets " +
                     path("y.csv") + " --out " + path("imp.csv"));
  ASSERT_EQ(r.status, 0) << r.err;
  const std::string table = slurp(path("imp.csv"));
  EXPECT_EQ(line_count(table), 5u);
  EXPECT_EQ(table.rfind("feature_id,group,importance\n", 0), 0u);
  EXPECT_NE(table.find("\n2,noise,"), std::string::npos);
  const auto kv = key_values(r.out);
  EXPECT_TRUE(kv.count("real_mean"));
  EXPECT_TRUE(kv.count("noise_mean"));

  ASSERT_EQ(run("train --task bin --trees 2 --features " + path("x.csv") + " --targets " + path("y.csv") + " --out " +
                path("m.opce"))
                .status,
            0);
  const auto from_model = run("importance --model " + path("m.opce"));
  ASSERT_EQ(from_model.status, 0) << from_model.err;
  EXPECT_NE(from_model.out.find("1,real,"), std::string::npos);
}

TEST_F(CliTest, ConfigFileSuppliesFlags) {
  write_toy(60);
  write("run.cfg", "# toy settings\ntask = bin\ntrees = 3\nseed = 11\nvariant = svm\nfeatures = " + path("x.csv") +
                       "\ntargets = " + path("y.csv") + "\n");
  const auto r = run("train --config " + path("run.cfg") + " --trees 2 --out " + path("m.opce"));
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(key_values(r.out).at("trees"), "2");
  const EnsembleModel m = read_model(path("m.opce"));
  EXPECT_EQ(m.config.master_seed, 11u);
  EXPECT_EQ(m.config.grow.split.variant, SplitVariant::kSvm);

  write("bad.cfg", "trees 3\n");
  const auto bad = run("train --config " + path("bad.cfg") + " --out " + path("m.opce"));
  EXPECT_NE(bad.status, 0);
  EXPECT_NE(bad.err.find("bad.cfg:1:"), std::string::npos);
}

TEST_F(CliTest, BenchmarkCsv) {
  const auto r = run("benchmark --suite scaling --n 60 --d 4 --k 2,4 --d-sweep 3 --sparse-d 20 --repeats 1 --out " +
                     path("t.csv"));
  ASSERT_EQ(r.status, 0) << r.err;
  const std::string csv = slurp(path("t.csv"));
  EXPECT_EQ(csv.rfind("variant,stage,N,D,K,sparse,seconds,nodes\n", 0), 0u);
  // (2 K values + 1 D value) x 3 variants x 2 stages, plus 2 oblique variants x 2 representations x 2 stages.
  EXPECT_EQ(line_count(csv), 1u + 18u + 8u);
  EXPECT_NE(csv.find("axis,split,60,4,2,0,"), std::string::npos);
  EXPECT_NE(csv.find("grad,tree,60,20,10,1,"), std::string::npos);
  EXPECT_NE(run("benchmark --suite other --out " + path("t.csv")).status, 0);
}

}  // namespace
}  // namespace opct
