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

#include "cmix/synthgen.hpp"

#include <cmath>
#include <map>

#include <gtest/gtest.h>

namespace cmix {
namespace {

TEST(LinkTest, Evaluations) {
  Link sig;
  EXPECT_DOUBLE_EQ(sig(0.0), sig.a / 2.0);
  Link cubic;
  cubic.kind = Link::Kind::kCubicPlusLinear;
  cubic.a = 2.0;
  cubic.c = 0.5;
  EXPECT_DOUBLE_EQ(cubic(-1.0), -2.5);
  Link table;
  table.kind = Link::Kind::kTable;
  table.knots_t = {0.0, 1.0, 3.0};
  table.knots_y = {0.0, 2.0, 3.0};
  EXPECT_DOUBLE_EQ(table(0.5), 1.0);
  EXPECT_DOUBLE_EQ(table(2.0), 2.5);
  EXPECT_DOUBLE_EQ(table(4.0), 3.5);  // linear extrapolation past the last knot
  EXPECT_NO_THROW(table.validate());
  table.knots_y = {0.0, 2.0, 1.0};
  EXPECT_THROW(table.validate(), std::invalid_argument);
  EXPECT_EQ(parse_link_kind(to_string(Link::Kind::kTable)), Link::Kind::kTable);
}

TEST(SparseDirectionTest, SupportAndNorm) {
  Rng rng(3);
  const Vector theta = draw_sparse_direction(20, 3, rng);
  EXPECT_NEAR(theta.norm(), 1.0, 1e-14);
  EXPECT_EQ((theta.array() != 0.0).count(), 3);
}

TEST(SingleIndexTest, NoiselessCollapse) {
  SingleIndexSpec spec;
  spec.sigma_z = spec.sigma_xi = spec.sigma_eps = 0.0;
  spec.N = 500;
  const SingleIndexData d = gen_single_index(spec);
  for (Index i = 0; i < spec.N; ++i) {
    const int k = d.truth.cluster[static_cast<std::size_t>(i)];
    ASSERT_GE(k, 1);
    ASSERT_LE(k, spec.K);
    EXPECT_NEAR(d.data.labels(i, 0), spec.link(static_cast<double>(k)), 1e-12);
  }
}

TEST(SingleIndexTest, ClusterMeansOfProjection) {
  SingleIndexSpec spec;
  spec.N = 5000;
  spec.seed = 4;
  const SingleIndexData d = gen_single_index(spec);
  std::map<int, std::pair<double, int>> acc;
  const Vector proj = d.data.features * d.truth.theta;
  for (Index i = 0; i < spec.N; ++i) {
    auto& [sum, count] = acc[d.truth.cluster[static_cast<std::size_t>(i)]];
    sum += proj[i];
    ++count;
  }
  ASSERT_EQ(static_cast<int>(acc.size()), spec.K);
  const double sd = std::sqrt(spec.sigma_z * spec.sigma_z + spec.sigma_xi * spec.sigma_xi);
  for (const auto& [k, sc] : acc) {
    const double mean = sc.first / sc.second;
    EXPECT_NEAR(mean, k, 3.0 * sd / std::sqrt(static_cast<double>(sc.second))) << "cluster " << k;
  }
}

TEST(SingleIndexTest, Deterministic) {
  SingleIndexSpec spec;
  spec.N = 200;
  spec.seed = 9;
  const SingleIndexData a = gen_single_index(spec);
  const SingleIndexData b = gen_single_index(spec);
  EXPECT_EQ(a.data.features, b.data.features);
  EXPECT_EQ(a.data.labels, b.data.labels);
  spec.seed = 10;
  EXPECT_NE(gen_single_index(spec).data.labels, a.data.labels);
}

TEST(SingleIndexTest, Validation) {
  SingleIndexSpec spec;
  spec.s = 30;
  EXPECT_THROW(gen_single_index(spec), std::invalid_argument);
  spec = SingleIndexSpec{};
  spec.sigma_xi = -1.0;
  EXPECT_THROW(gen_single_index(spec), std::invalid_argument);
}

TEST(MetaTasksTest, ShapesRangesAndDeterminism) {
  MetaTaskSpec spec;
  spec.M = 12;
  spec.target_tasks = 7;
  spec.seed = 3;
  const MetaTaskSet set = gen_meta_tasks(spec);
  ASSERT_EQ(set.train.size(), 12u);
  ASSERT_EQ(set.target.size(), 7u);
  EXPECT_NEAR(set.theta.norm(), 1.0, 1e-14);
  for (const auto* tasks : {&set.train, &set.target}) {
    for (const MetaTask& t : *tasks) {
      EXPECT_EQ(t.support.size(), spec.support_shots);
      EXPECT_EQ(t.query.size(), spec.query_shots);
      EXPECT_EQ(t.support.feature_dim(), spec.p);
      EXPECT_GE(t.link.a, spec.a_range.first);
      EXPECT_LE(t.link.a, spec.a_range.second);
      EXPECT_GE(t.link.b, spec.b_range.first);
      EXPECT_LE(t.link.b, spec.b_range.second);
      EXPECT_GE(t.link.c, spec.c_range.first);
      EXPECT_LE(t.link.c, spec.c_range.second);
    }
  }
  const MetaTaskSet again = gen_meta_tasks(spec);
  EXPECT_EQ(again.train[5].query.labels, set.train[5].query.labels);
  EXPECT_EQ(again.target[6].support.features, set.target[6].support.features);
}

TEST(MetaTasksTest, NoiselessLabelsFollowTaskLink) {
  MetaTaskSpec spec;
  spec.M = 3;
  spec.target_tasks = 1;
  spec.sigma_z = spec.sigma_xi = spec.sigma_eps = 0.0;
  const MetaTaskSet set = gen_meta_tasks(spec);
  for (const MetaTask& t : set.train) {
    for (Index i = 0; i < t.support.size(); ++i) {
      const double index = t.support.features.row(i).dot(set.theta);
      EXPECT_NEAR(t.support.labels(i, 0), t.link(index), 1e-12);
    }
  }
}

TEST(CovariateShiftTest, NoiselessPairsShareLabels) {
  CovariateShiftSpec spec;
  spec.sigma_eps = 0.0;
  spec.n = 50;
  const CovariateShiftData d = gen_covariate_shift(spec, TestShift::kNone);
  ASSERT_EQ(d.train.size(), 100);
  EXPECT_TRUE(d.theta.tail(spec.p2).isZero(0.0));
  for (Index i = 0; i < spec.n; ++i) {
    EXPECT_NEAR(d.train.labels(2 * i, 0), d.train.labels(2 * i + 1, 0), 1e-12);
    EXPECT_EQ((*d.train.domain_ids)[static_cast<std::size_t>(2 * i)], 0);
    EXPECT_EQ((*d.train.domain_ids)[static_cast<std::size_t>(2 * i + 1)], 1);
  }
}

TEST(CovariateShiftTest, SpuriousBlockCovariance) {
  CovariateShiftSpec spec;
  spec.n = 4000;
  spec.p2 = 4;
  spec.sigma_a = 1.5;
  spec.seed = 21;
  const CovariateShiftData d = gen_covariate_shift(spec, TestShift::kNone);
  Matrix a(spec.n, spec.p2);
  for (Index i = 0; i < spec.n; ++i) a.row(i) = d.train.features.row(2 * i).tail(spec.p2);
  const Matrix centered = a.rowwise() - a.colwise().mean();
  const Matrix cov = centered.transpose() * centered / static_cast<double>(spec.n - 1);
  const double s2 = spec.sigma_a * spec.sigma_a;
  const double n = static_cast<double>(spec.n);
  for (Index r = 0; r < spec.p2; ++r) {
    for (Index c = 0; c < spec.p2; ++c) {
      const double se = r == c ? s2 * std::sqrt(2.0 / (n - 1.0)) : s2 / std::sqrt(n);
      EXPECT_NEAR(cov(r, c), r == c ? s2 : 0.0, 3.0 * se) << r << "," << c;
    }
  }
}

TEST(CovariateShiftTest, InvariantPredictorIgnoresShift) {
  CovariateShiftSpec spec;
  spec.sigma_eps = 0.1;
  spec.n_test = 20000;
  spec.a_mean = 0.7;
  for (auto shift : {TestShift::kNone, TestShift::kSignFlip, TestShift::kScale2}) {
    const CovariateShiftData d = gen_covariate_shift(spec, shift);
    const double mse = (d.test.features * d.theta - d.test.labels.col(0)).squaredNorm() / spec.n_test;
    const double s2 = spec.sigma_eps * spec.sigma_eps;
    EXPECT_NEAR(mse, s2, 3.0 * s2 * std::sqrt(2.0 / spec.n_test)) << to_string(shift);
  }
}

TEST(CovariateShiftTest, ShiftsTransformSpuriousBlock) {
  CovariateShiftSpec spec;
  spec.a_mean = 2.0;
  spec.sigma_a = 0.1;
  spec.n_test = 500;
  const auto flip = gen_covariate_shift(spec, TestShift::kSignFlip);
  const auto scale = gen_covariate_shift(spec, TestShift::kScale2);
  EXPECT_NEAR(flip.test.features.rightCols(spec.p2).mean(), -2.0, 0.05);
  EXPECT_NEAR(scale.test.features.rightCols(spec.p2).mean(), 4.0, 0.05);
}

TEST(RegimeCheckTest, DefaultRegimeHolds) {
  const CovariateShiftSpec spec;
  const auto checks = check_shift_regime(spec, 10.0, RegimeConstants{});
  EXPECT_EQ(checks.size(), 7u);
  for (const auto& c : checks) EXPECT_TRUE(c.ok) << c.name << ": " << c.lhs << " vs " << c.rhs;
  bool k_failed = false;
  for (const auto& c : check_shift_regime(spec, 0.1, RegimeConstants{})) k_failed |= !c.ok;
  EXPECT_TRUE(k_failed);
}

TEST(RegimeCheckTest, BandwidthFromBruteForceGap) {
  CovariateShiftSpec spec;
  spec.n = 40;
  spec.sigma_eps = 1e-8;
  const CovariateShiftData d = gen_covariate_shift(spec, TestShift::kNone);
  double gap = 1e300;
  for (Index i = 0; i < spec.n; ++i) {
    for (Index j = 0; j < spec.n; ++j) {
      if (i != j) gap = std::min(gap, std::abs(d.train.labels(2 * i, 0) - d.train.labels(2 * j + 1, 0)));
    }
  }
  EXPECT_EQ(min_cross_pair_gap(d.train), gap);
  const RegimeConstants c;
  const double expected = c.c6 * gap / std::sqrt(std::log(40.0 * 40.0 / spec.p1));
  EXPECT_DOUBLE_EQ(shift_bandwidth(d.train, spec, c), expected);
}

}  // namespace
}  // namespace cmix
