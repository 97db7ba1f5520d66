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

// OpenMP kernels against their serial references, plus direct examples.

#include "cmix/kernels.hpp"

#include <cmath>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "test_util.hpp"

namespace cmix::kernels {
namespace {

TEST(PairwiseSqDistanceTest, HandExample) {
  const Matrix a{{0.0}, {1.0}, {3.0}};
  const Matrix expected{{0, 1, 9}, {1, 0, 4}, {9, 4, 0}};
  EXPECT_EQ(pairwise_sq_distance(a, a), expected);
}

TEST(PairwiseSqDistanceTest, IdenticalRowsGiveZero) {
  const Matrix a = Matrix::Constant(4, 3, 2.5);
  EXPECT_TRUE(pairwise_sq_distance(a, a).isZero(0.0));
}

TEST(PairwiseSqDistanceTest, WidthMismatchThrows) {
  EXPECT_THROW(pairwise_sq_distance(Matrix::Zero(2, 2), Matrix::Zero(2, 3)), DimensionError);
}

TEST(ParallelMatchesSerialTest, PairwiseDistance) {
  Rng rng(1);
  const Matrix a = testing::random_matrix(157, 9, rng);
  const Matrix b = testing::random_matrix(61, 9, rng);
  EXPECT_EQ(pairwise_sq_distance(a, b), serial::pairwise_sq_distance(a, b));
}

TEST(ParallelMatchesSerialTest, PmfRows) {
  Rng rng(2);
  const Matrix a = testing::random_matrix(120, 3, rng);
  const Matrix d = serial::pairwise_sq_distance(a, a);
  for (bool exclude : {false, true}) {
    const Matrix p = gaussian_pmf_rows(d, 0.7, exclude);
    EXPECT_EQ(p, serial::gaussian_pmf_rows(d, 0.7, exclude));
    for (Index i = 0; i < p.rows(); ++i) EXPECT_NEAR(p.row(i).sum(), 1.0, 1e-12);
    if (exclude) {
      EXPECT_TRUE(p.diagonal().isZero(0.0));
    }
  }
}

TEST(ParallelMatchesSerialTest, NadarayaWatsonAndKde) {
  Rng rng(3);
  std::normal_distribution<double> normal;
  std::vector<double> t(500), y(500), q(300);
  for (auto& v : t) v = normal(rng);
  for (auto& v : y) v = normal(rng);
  for (auto& v : q) v = 2.0 * normal(rng);
  for (auto k : {SmoothingKernel::kUniform, SmoothingKernel::kGaussian}) {
    EXPECT_EQ(nadaraya_watson(t, y, q, k, 0.3), serial::nadaraya_watson(t, y, q, k, 0.3));
  }
  EXPECT_EQ(gaussian_kde(t, 0.2, q), serial::gaussian_kde(t, 0.2, q));
}

TEST(GaussianKdeTest, IntegratesToOne) {
  const std::vector<double> samples{-1.0, 0.0, 0.5, 2.0};
  std::vector<double> grid(4001);
  const double step = 0.005;
  for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = -10.0 + step * static_cast<double>(i);
  const Vector f = gaussian_kde(samples, 0.4, grid);
  EXPECT_NEAR(f.sum() * step, 1.0, 1e-9);
  EXPECT_GT(f.minCoeff(), -1e-300);
}

TEST(GaussianRowPmfTest, SkipsAndNormalizes) {
  const std::vector<double> d{3.0, 0.0, 1.0};
  std::vector<double> out(3);
  ASSERT_TRUE(gaussian_row_pmf(d, 1.0, 1, out));
  EXPECT_EQ(out[1], 0.0);
  EXPECT_NEAR(out[0] + out[2], 1.0, 1e-15);
  const std::vector<double> single{0.0};
  std::vector<double> one(1);
  EXPECT_FALSE(gaussian_row_pmf(single, 1.0, 0, one));
}

// Far-away rows underflow without the min-shift; the result must stay a pmf.
TEST(GaussianRowPmfTest, LargeDistancesStayFinite) {
  const std::vector<double> d{1e6, 1e6 + 2.0};
  std::vector<double> out(2);
  ASSERT_TRUE(gaussian_row_pmf(d, 1.0, -1, out));
  EXPECT_NEAR(out[0], 1.0 / (1.0 + std::exp(-1.0)), 1e-15);
}

}  // namespace
}  // namespace cmix::kernels
