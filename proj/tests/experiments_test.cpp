// Copyright 2026 The cmix Authors.
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

// Small-scale runs of every experiment kind.

#include "cmix/experiments.hpp"

#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "cmix/persist.hpp"
#include "test_util.hpp"

namespace cmix {
namespace {

nlohmann::json metric_payload(const ExperimentResult& r) {
  nlohmann::json j = to_json(r);
  j.erase("wall_seconds");
  return j;
}

class TabularExperimentTest : public ::testing::Test {
 protected:
  void SetUp() override {
    std::ostringstream csv;
    csv << "u,v,target\n";
    Rng rng(42);
    std::normal_distribution<double> normal;
    for (int i = 0; i < 150; ++i) {
      const double u = normal(rng), v = normal(rng);
      csv << u << ',' << v << ',' << 5.0 + std::sin(2.0 * u) + v + 0.05 * normal(rng) << '\n';
    }
    testing::write_file(dir_ / "toy.csv", csv.str());
    cfg_.kind = ExperimentKind::kTabularTrain;
    cfg_.dataset.path = (dir_ / "toy.csv").string();
    cfg_.dataset.label_columns = {"target"};
    cfg_.dataset.split.mode = SplitMode::kFixedCounts;
    cfg_.dataset.split.counts = {100, 25, 25};
    cfg_.model.hidden = {8, 8};
    cfg_.model.epochs = 3;
    cfg_.seeds = {0, 1};
    cfg_.arms = {"erm", "mixup", "manifold-mixup", "cmixup"};
    cfg_.policy.site_layer = 1;
  }

  testing::TempDir dir_;
  ExperimentConfig cfg_;
};

TEST_F(TabularExperimentTest, TrainsEveryArm) {
  const ExperimentResult r = run_experiment(cfg_);
  EXPECT_EQ(r.records.size(), 8u);
  EXPECT_EQ(r.failures(), 0u);
  for (const std::string arm : {"erm", "mixup", "manifold-mixup", "cmixup"}) {
    const Aggregate* a = r.find(arm, "rmse");
    ASSERT_NE(a, nullptr) << arm;
    EXPECT_EQ(a->count, 2);
    EXPECT_TRUE(std::isfinite(a->mean));
  }
  EXPECT_EQ(metric_payload(r), metric_payload(run_experiment(cfg_)));
}

TEST_F(TabularExperimentTest, BandwidthSweep) {
  cfg_.kind = ExperimentKind::kBandwidthSweep;
  cfg_.grid = {1e-6, 1e6};
  cfg_.reference_arms = {"erm", "manifold-mixup"};
  const ExperimentResult r = run_experiment(cfg_);
  EXPECT_EQ(r.records.size(), 2u * (2 + 2));
  ASSERT_EQ(r.summary.at("table").size(), 2u);
  EXPECT_EQ(r.summary.at("parameter"), "sigma");
  EXPECT_TRUE(r.summary.at("reference").contains("erm"));
  EXPECT_NE(r.find("cmixup", "rmse", 1e6), nullptr);
  testing::TempDir out;
  persist(r, out.path());
  EXPECT_TRUE(std::filesystem::exists(out / "sweep.csv"));
}

TEST_F(TabularExperimentTest, AlphaSweepAndNoise) {
  cfg_.kind = ExperimentKind::kAlphaSweep;
  cfg_.grid = {0.5, 2.0};
  cfg_.reference_arms = {"erm"};
  EXPECT_EQ(run_experiment(cfg_).summary.at("parameter"), "alpha");
  cfg_.kind = ExperimentKind::kNoiseRobustness;
  cfg_.arms = {"erm", "cmixup"};
  const ExperimentResult noisy = run_experiment(cfg_);
  EXPECT_EQ(noisy.records.size(), 4u);
  EXPECT_DOUBLE_EQ(noisy.summary.at("noise_fraction").get<double>(), 0.3);
}

TEST_F(TabularExperimentTest, MissingDatasetIsAnError) {
  cfg_.dataset.path = (dir_ / "absent.csv").string();
  EXPECT_THROW(run_experiment(cfg_), DataError);
}

TEST(Theorem1ExperimentTest, SmallRun) {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::kTheorem1;
  cfg.single_index.N = 600;
  cfg.theorem1.n_test = 200;
  cfg.seeds = {0, 1};
  const ExperimentResult r = run_experiment(cfg);
  EXPECT_EQ(r.records.size(), 6u);
  for (const auto& rec : r.records) {
    EXPECT_GE(rec.metrics.at("same_cluster_rate"), 0.0);
    EXPECT_LE(rec.metrics.at("same_cluster_rate"), 1.0);
    EXPECT_TRUE(std::isfinite(rec.metrics.at("mse")));
  }
  EXPECT_GT(r.find("cmixup", "same_cluster_rate")->mean, 0.9);
  EXPECT_EQ(metric_payload(r), metric_payload(run_experiment(cfg)));
}

TEST(Theorem3ExperimentTest, TwinsAndOrdering) {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::kTheorem3;
  cfg.seeds = {0, 1, 2};
  const ExperimentResult r = run_experiment(cfg);
  for (std::uint64_t seed : cfg.seeds) {
    EXPECT_GE(*r.value("cmixup", seed, "twin_pairs"), cfg.shift.n - cfg.shift.p1 / 2.0);
    EXPECT_EQ(*r.value("cmixup", seed, "ordered"), 1.0);
  }
}

// Without spurious variation the a-block of every mixed input is zero up to
// the twin noise.
TEST(Theorem3ExperimentTest, NoSpuriousFeatures) {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::kTheorem3;
  cfg.seeds = {0};
  cfg.shift.sigma_a = 0.0;
  cfg.theorem3.enforce_regime = false;
  const ExperimentResult r = run_experiment(cfg);
  for (const char* arm : {"mixup", "feature", "cmixup"}) EXPECT_LE(*r.value(arm, 0, "a_block_sq_norm"), 1e-12);
}

TEST(Theorem3ExperimentTest, EnforcedRegimeRejectsBadPenalty) {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::kTheorem3;
  cfg.theorem3.ridge_k = 0.01;
  cfg.theorem3.enforce_regime = true;
  EXPECT_THROW(run_experiment(cfg), ConfigError);
}

TEST(MetaExperimentTest, SmallRun) {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::kMeta;
  cfg.meta_tasks.M = 4;
  cfg.meta_tasks.target_tasks = 3;
  cfg.meta.max_iterations = 5;
  cfg.meta.hidden = {8};
  cfg.seeds = {0};
  const ExperimentResult r = run_experiment(cfg);
  ASSERT_EQ(r.records.size(), 3u);
  for (const char* arm : {"maml", "metamix", "cmetamix"}) {
    EXPECT_TRUE(std::isfinite(*r.value(arm, 0, "target_mse"))) << arm;
  }
}

TEST(InvarianceExperimentTest, SmallRun) {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::kInvariance;
  cfg.shift.n = 60;
  cfg.shift.n_test = 50;
  cfg.shift.a_mean = 1.0;
  cfg.invariance.eval_pairs = 80;
  cfg.invariance.bins = 4;
  cfg.model.hidden = {8, 8};
  cfg.model.epochs = 2;
  cfg.seeds = {0};
  const ExperimentResult r = run_experiment(cfg);
  for (const char* arm : {"erm", "cmixup"}) {
    EXPECT_GE(*r.value(arm, 0, "inv"), 0.0);
    EXPECT_EQ(*r.value(arm, 0, "bins_used"), 4.0);
  }
}

}  // namespace
}  // namespace cmix
