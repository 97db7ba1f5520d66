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

#include "cmix/fcn.hpp"

#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "test_util.hpp"

namespace cmix {
namespace {

double mixed_loss(const FcnModel& model, const MixedBatch& batch) { return fcn_backward(model, batch).loss; }

struct GradCase {
  std::vector<Index> sizes;
  Activation activation;
  int site;
  Index rows;
};

// Central differences over every parameter. Inputs are continuous draws, so
// no pre-activation lands on the ReLU kink with any real probability.
TEST(FcnGradientTest, MatchesFiniteDifferences) {
  const std::vector<GradCase> cases{
      {{3, 1}, Activation::kRelu, 0, 5},
      {{2, 4, 1}, Activation::kRelu, 0, 7},
      {{4, 6, 2}, Activation::kLeakyRelu, 0, 3},
      {{3, 5, 1}, Activation::kLeakyRelu, 1, 6},
      {{5, 8, 6, 1}, Activation::kRelu, 0, 4},
      {{5, 8, 6, 1}, Activation::kLeakyRelu, 2, 4},
      {{2, 3, 3, 3, 2}, Activation::kLeakyRelu, 1, 9},
      {{6, 10, 10, 3}, Activation::kRelu, 1, 8},
      {{1, 7, 1}, Activation::kLeakyRelu, 0, 11},
      {{4, 5, 5, 1}, Activation::kLeakyRelu, 2, 1},
  };
  Rng rng(2026);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t c = 0; c < cases.size(); ++c) {
    const GradCase& gc = cases[c];
    FcnModel model = FcnModel::create(gc.sizes, gc.activation, rng);
    for (auto& layer : model.layers) layer.bias = testing::random_matrix(layer.bias.size(), 1, rng, 0.1).col(0);
    MixedBatch batch;
    batch.anchor_x = testing::random_matrix(gc.rows, gc.sizes.front(), rng);
    batch.partner_x = testing::random_matrix(gc.rows, gc.sizes.front(), rng);
    batch.lambda.resize(gc.rows);
    for (Index i = 0; i < gc.rows; ++i) batch.lambda[i] = unit(rng);
    batch.target = testing::random_matrix(gc.rows, gc.sizes.back(), rng);
    batch.site_layer = gc.site;

    const Vector analytic = flatten(fcn_backward(model, batch).gradients);
    const Vector theta = model.flatten();
    Vector numeric(theta.size());
    const double h = 1e-6;
    for (Index k = 0; k < theta.size(); ++k) {
      Vector p = theta;
      p[k] += h;
      model.assign(p);
      const double up = mixed_loss(model, batch);
      p[k] -= 2.0 * h;
      model.assign(p);
      const double down = mixed_loss(model, batch);
      numeric[k] = (up - down) / (2.0 * h);
    }
    model.assign(theta);
    const double rel = (analytic - numeric).norm() / std::max(1e-12, analytic.norm() + numeric.norm());
    EXPECT_LE(rel, 1e-4) << "case " << c;
  }
}

TEST(FcnGradientTest, PlainBatchEqualsLambdaOneMix) {
  Rng rng(5);
  const FcnModel model = FcnModel::create({3, 4, 2}, Activation::kLeakyRelu, rng);
  const Matrix x = testing::random_matrix(6, 3, rng);
  const Matrix y = testing::random_matrix(6, 2, rng);
  MixedBatch batch{x, testing::random_matrix(6, 3, rng), Vector::Ones(6), y, 1};
  const auto a = fcn_backward(model, x, y);
  const auto b = fcn_backward(model, batch);
  EXPECT_NEAR(a.loss, b.loss, 1e-14);
  EXPECT_TRUE(flatten(a.gradients).isApprox(flatten(b.gradients), 1e-12));
}

TEST(FcnGradientTest, ZeroErrorGivesZeroGradient) {
  Rng rng(6);
  const FcnModel model = FcnModel::create({3, 5, 1}, Activation::kRelu, rng);
  const Matrix x = testing::random_matrix(8, 3, rng);
  const auto lg = fcn_backward(model, x, fcn_predict(model, x));
  EXPECT_LE(flatten(lg.gradients).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(FcnGradientTest, DuplicatedExampleDoesNotChangeGradient) {
  Rng rng(7);
  const FcnModel model = FcnModel::create({2, 3, 1}, Activation::kLeakyRelu, rng);
  const Matrix x{{0.3, -1.2}};
  const Matrix y{{0.7}};
  Matrix x2(2, 2), y2(2, 1);
  x2 << x, x;
  y2 << y, y;
  EXPECT_TRUE(flatten(fcn_backward(model, x, y).gradients)
                  .isApprox(flatten(fcn_backward(model, x2, y2).gradients), 1e-14));
}

TEST(FcnForwardTest, ZeroNetwork) {
  Rng rng(1);
  FcnModel model = FcnModel::create({4, 3, 2}, Activation::kRelu, rng);
  model.assign(Vector::Zero(model.parameter_count()));
  EXPECT_TRUE(fcn_forward(model, Vector::Ones(4)).prediction.isZero(0.0));
}

TEST(FcnForwardTest, ReluGatesNegativeInput) {
  Rng rng(1);
  FcnModel model = FcnModel::create({1, 1, 1}, Activation::kRelu, rng);
  model.layers[0].weight(0, 0) = 1.0;
  model.layers[0].bias[0] = 0.0;
  model.layers[1].weight(0, 0) = 3.0;
  model.layers[1].bias[0] = 0.25;
  const ForwardResult r = fcn_forward(model, Vector::Constant(1, -1.0), true);
  ASSERT_EQ(r.hidden.size(), 1u);
  EXPECT_EQ(r.hidden[0][0], 0.0);
  EXPECT_EQ(r.prediction[0], 0.25);
}

TEST(FcnForwardTest, BatchedMatchesSingle) {
  Rng rng(2);
  const FcnModel model = FcnModel::create({3, 6, 4, 2}, Activation::kLeakyRelu, rng);
  const Matrix x = testing::random_matrix(5, 3, rng);
  const Matrix p = fcn_predict(model, x);
  const Matrix h2 = fcn_hidden(model, x, 2);
  for (Index i = 0; i < 5; ++i) {
    const ForwardResult r = fcn_forward(model, x.row(i).transpose(), true);
    EXPECT_TRUE(r.prediction.isApprox(p.row(i).transpose(), 1e-14));
    EXPECT_TRUE(r.hidden[1].isApprox(h2.row(i).transpose(), 1e-14));
  }
  EXPECT_THROW(fcn_hidden(model, x, 3), std::out_of_range);
  EXPECT_THROW(fcn_forward(model, Vector::Zero(2)), DimensionError);
}

TEST(FcnCreateTest, GlorotBounds) {
  Rng rng(3);
  const FcnModel model = FcnModel::create({20, 30, 1}, Activation::kRelu, rng);
  EXPECT_EQ(model.parameter_count(), 20 * 30 + 30 + 30 + 1);
  EXPECT_LE(model.layers[0].weight.cwiseAbs().maxCoeff(), std::sqrt(6.0 / 50.0));
  EXPECT_TRUE(model.layers[0].bias.isZero(0.0));
  EXPECT_THROW(FcnModel::create({3}, Activation::kRelu, rng), std::invalid_argument);
}

TEST(AdamTest, ZeroLearningRateIsNoOp) {
  Rng rng(4);
  FcnModel model = FcnModel::create({2, 3, 1}, Activation::kRelu, rng);
  const Vector before = model.flatten();
  AdamState state = AdamState::for_model(model);
  const Matrix x = testing::random_matrix(4, 2, rng);
  MixedBatch batch{x, x, Vector::Ones(4), Matrix::Ones(4, 1), 0};
  fcn_train_step(model, batch, state, 0.0);
  EXPECT_EQ(model.flatten(), before);
}

// Linear model w * x fitted to y = 3x; Adam must reach the minimizer.
TEST(AdamTest, ConvergesOnScalarRegression) {
  Rng rng(5);
  FcnModel model = FcnModel::create({1, 1}, Activation::kRelu, rng);
  AdamState state = AdamState::for_model(model);
  const Matrix x{{1.0}, {2.0}, {-1.0}};
  const Matrix y = 3.0 * x;
  MixedBatch batch{x, x, Vector::Ones(3), y, 0};
  double loss = 0.0;
  for (int step = 0; step < 3000; ++step) loss = fcn_train_step(model, batch, state, 0.01);
  EXPECT_LT(loss, 1e-8);
  EXPECT_NEAR(model.layers[0].weight(0, 0), 3.0, 1e-4);
  EXPECT_NEAR(model.layers[0].bias[0], 0.0, 1e-4);
}

TEST(AdamTest, DeterministicUnderSeed) {
  auto run = [] {
    Rng rng(77);
    FcnModel model = FcnModel::create({3, 8, 1}, Activation::kLeakyRelu, rng);
    AdamState state = AdamState::for_model(model);
    const Matrix x = testing::random_matrix(16, 3, rng);
    const Matrix y = testing::random_matrix(16, 1, rng);
    MixedBatch batch{x, x.reverse(), Vector::Constant(16, 0.6), y, 1};
    for (int i = 0; i < 50; ++i) fcn_train_step(model, batch, state, 1e-2);
    return model.flatten();
  };
  EXPECT_EQ(run(), run());
}

TEST(AdamTest, NonFiniteLossThrows) {
  Rng rng(8);
  FcnModel model = FcnModel::create({1, 1}, Activation::kRelu, rng);
  AdamState state = AdamState::for_model(model);
  const Matrix x{{1.0}};
  MixedBatch batch{x, x, Vector::Ones(1), Matrix::Constant(1, 1, std::numeric_limits<double>::infinity()), 0};
  EXPECT_THROW(fcn_train_step(model, batch, state, 0.1), DivergenceError);
}

TEST(CheckpointTest, RoundTrip) {
  testing::TempDir dir;
  Rng rng(10);
  const FcnModel model = FcnModel::create({4, 7, 3, 2}, Activation::kLeakyRelu, rng);
  save_checkpoint(model, dir / "m.json");
  const FcnModel back = load_checkpoint(dir / "m.json");
  EXPECT_EQ(back.layer_sizes, model.layer_sizes);
  EXPECT_EQ(back.activation, model.activation);
  EXPECT_EQ(back.flatten(), model.flatten());
  testing::write_file(dir / "bad.json", R"({"format": "other"})");
  EXPECT_THROW(load_checkpoint(dir / "bad.json"), std::runtime_error);
  EXPECT_THROW(load_checkpoint(dir / "none.json"), std::runtime_error);
}

TEST(ActivationNamesTest, RoundTrip) {
  EXPECT_EQ(parse_activation(to_string(Activation::kRelu)), Activation::kRelu);
  EXPECT_EQ(parse_activation(to_string(Activation::kLeakyRelu)), Activation::kLeakyRelu);
  EXPECT_THROW(parse_activation("tanh"), std::invalid_argument);
}

}  // namespace
}  // namespace cmix
