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

#include "cmix/trainer.hpp"

#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "cmix/metrics.hpp"
#include "test_util.hpp"

namespace cmix {
namespace {

Dataset smooth_problem(Index n, std::uint64_t seed) {
  Rng rng(seed);
  const Matrix x = testing::random_matrix(n, 2, rng);
  Matrix y(n, 1);
  for (Index i = 0; i < n; ++i) y(i, 0) = 10.0 + 3.0 * std::sin(x(i, 0)) + 2.0 * x(i, 1);
  return testing::make_dataset(x, y);
}

ModelConfig small_model() {
  ModelConfig m;
  m.hidden = {16, 16};
  m.lr = 1e-2;
  m.batch_size = 16;
  m.epochs = 30;
  return m;
}

TEST(ArmPolicyTest, Mapping) {
  MixPolicy base;
  base.metric = DistanceMetric::kLabel;
  base.site_layer = 0;
  base.bandwidth = 1.75;
  EXPECT_FALSE(arm_policy("erm", base).has_value());
  EXPECT_EQ(arm_policy("mixup", base)->metric, DistanceMetric::kUniform);
  EXPECT_EQ(arm_policy("manifold-mixup", base)->site_layer, 1);
  base.site_layer = 2;
  EXPECT_EQ(arm_policy("manifold-mixup", base)->site_layer, 2);
  EXPECT_EQ(arm_policy("mixup", base)->site_layer, 0);
  const auto c = arm_policy("cmixup", base);
  EXPECT_EQ(c->metric, DistanceMetric::kLabel);
  EXPECT_EQ(c->bandwidth, 1.75);
  EXPECT_EQ(arm_policy("cmixup-batch", base)->scope, PairingScope::kBatch);
  EXPECT_EQ(arm_policy("cmixup-feature", base)->metric, DistanceMetric::kFeature);
  EXPECT_THROW(arm_policy("cmixup-cosine", base), std::invalid_argument);
  EXPECT_THROW(arm_policy("bogus", base), std::invalid_argument);
}

TEST(TrainFcnTest, LearnsSmoothFunction) {
  const Dataset train = smooth_problem(400, 1);
  const Dataset val = smooth_problem(100, 2);
  const TrainOutcome out = train_fcn(train, val, std::nullopt, small_model(), 0);
  ASSERT_EQ(out.train_loss.size(), 30u);
  EXPECT_LT(out.train_loss.back(), 0.5 * out.train_loss.front());
  const double label_sd = std::sqrt((val.labels.array() - val.labels.mean()).square().mean());
  const double rmse = compute_metrics(out.predict(val.features), val.labels).rmse;
  EXPECT_LT(rmse, 0.3 * label_sd);
  EXPECT_DOUBLE_EQ(rmse, out.best_val_rmse);
  EXPECT_EQ(*std::min_element(out.val_rmse.begin(), out.val_rmse.end()), out.best_val_rmse);
}

TEST(TrainFcnTest, DeterministicPerSeed) {
  const Dataset train = smooth_problem(120, 3);
  const Dataset val = smooth_problem(40, 4);
  MixPolicy policy;
  policy.bandwidth = 0.5;
  ModelConfig cfg = small_model();
  cfg.epochs = 5;
  const auto a = train_fcn(train, val, policy, cfg, 9);
  const auto b = train_fcn(train, val, policy, cfg, 9);
  EXPECT_EQ(a.train_loss, b.train_loss);
  EXPECT_EQ(a.model.flatten(), b.model.flatten());
  const auto c = train_fcn(train, val, policy, cfg, 10);
  EXPECT_NE(a.train_loss, c.train_loss);
}

// With a vanishing bandwidth and self-pairing allowed every anchor mixes with
// itself, which is plain ERM on the same batches.
TEST(TrainFcnTest, TinyBandwidthWithSelfPairingTracksErm) {
  const Dataset train = smooth_problem(96, 5);
  const Dataset val = smooth_problem(32, 6);
  MixPolicy policy;
  policy.bandwidth = 1e-9;
  policy.exclude_self = false;
  ModelConfig cfg = small_model();
  cfg.epochs = 8;
  const auto erm = train_fcn(train, val, std::nullopt, cfg, 4);
  const auto mix = train_fcn(train, val, policy, cfg, 4);
  ASSERT_EQ(erm.train_loss.size(), mix.train_loss.size());
  for (std::size_t e = 0; e < erm.train_loss.size(); ++e) {
    EXPECT_NEAR(mix.train_loss[e], erm.train_loss[e], 1e-9 * erm.train_loss[e]) << "epoch " << e;
  }
}

TEST(TrainFcnTest, AllArmsRun) {
  const Dataset train = smooth_problem(64, 7);
  const Dataset val = smooth_problem(16, 8);
  ModelConfig cfg = small_model();
  cfg.epochs = 2;
  MixPolicy base;
  base.site_layer = 1;
  for (const std::string arm : {"erm", "mixup", "manifold-mixup", "cmixup", "cmixup-batch", "cmixup-feature",
                                "cmixup-feature-concat-label", "cmixup-representation",
                                "cmixup-representation-concat-label", "cmixup-uniform"}) {
    const auto out = train_fcn(train, val, arm_policy(arm, base), cfg, 1);
    EXPECT_TRUE(std::isfinite(out.best_val_rmse)) << arm;
  }
}

TEST(TrainFcnTest, RejectsSiteBeyondNetwork) {
  const Dataset train = smooth_problem(20, 9);
  MixPolicy policy;
  policy.site_layer = 3;
  EXPECT_THROW(train_fcn(train, train, policy, small_model(), 0), std::invalid_argument);
}

}  // namespace
}  // namespace cmix
