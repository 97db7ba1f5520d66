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

#include "cmix/ridge.hpp"

#include <gtest/gtest.h>

#include "test_util.hpp"

namespace cmix {
namespace {

TEST(RidgeTest, IdentityDesign) {
  const Matrix x = Matrix::Identity(2, 2);
  const Vector y{{3.0, 5.0}};
  EXPECT_TRUE(ridge_fit(x, y, 0.0).theta.isApprox(Vector{{3.0, 5.0}}, 1e-14));
  EXPECT_TRUE(ridge_fit(x, y, 1.0).theta.isApprox(Vector{{1.5, 2.5}}, 1e-14));
}

TEST(RidgeTest, HugePenaltyShrinksToZero) {
  Rng rng(3);
  const Matrix x = testing::random_matrix(50, 4, rng);
  const Vector y = testing::random_matrix(50, 1, rng).col(0);
  EXPECT_LE(ridge_fit(x, y, 1e9).theta.norm(), 1e-6);
}

TEST(RidgeTest, NormalEquationResidual) {
  Rng rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const Index n = 30 + 10 * trial;
    const Index d = 3 + trial;
    const Matrix x = testing::random_matrix(n, d, rng);
    const Vector y = testing::random_matrix(n, 1, rng).col(0);
    const double k = 0.1 * trial;
    const RidgeModel m = ridge_fit(x, y, k);
    Matrix gram = x.transpose() * x;
    gram.diagonal().array() += k;
    const Vector residual = gram * m.theta - x.transpose() * y;
    EXPECT_LE(residual.norm(), 1e-8);
  }
}

TEST(RidgeTest, RankDeficientNeedsPenalty) {
  Matrix x(3, 2);
  x << 1, 2, 2, 4, 3, 6;
  const Vector y{{1.0, 2.0, 3.0}};
  EXPECT_THROW(ridge_fit(x, y, 0.0), SingularSystemError);
  EXPECT_TRUE(ridge_fit(x, y, 1e-3).theta.allFinite());
}

TEST(RidgeTest, BadInput) {
  EXPECT_THROW(ridge_fit(Matrix::Zero(0, 2), Vector::Zero(0), 1.0), DimensionError);
  EXPECT_THROW(ridge_fit(Matrix::Zero(3, 2), Vector::Zero(2), 1.0), DimensionError);
  EXPECT_THROW(ridge_fit(Matrix::Identity(2, 2), Vector::Zero(2), -1.0), std::invalid_argument);
}

}  // namespace
}  // namespace cmix
