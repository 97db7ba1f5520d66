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

#include "cmix/data.hpp"

#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "test_util.hpp"

namespace cmix {
namespace {

using testing::TempDir;
using testing::write_file;

TEST(LoadCsvTest, ParsesHeaderAndSplitsLabels) {
  TempDir dir;
  write_file(dir / "t.csv", "a,b,y\n1,2,3\n4,5,6\n7,8,9\n");
  const Dataset ds = load_csv(dir / "t.csv", {"y"});
  EXPECT_EQ(ds.size(), 3);
  EXPECT_EQ(ds.feature_dim(), 2);
  EXPECT_EQ(ds.label_dim(), 1);
  EXPECT_DOUBLE_EQ(ds.features(2, 1), 8.0);
  EXPECT_DOUBLE_EQ(ds.labels(1, 0), 6.0);
  EXPECT_EQ(ds.feature_names, (std::vector<std::string>{"a", "b"}));
}

TEST(LoadCsvTest, MissingCellsTakeColumnMean) {
  TempDir dir;
  write_file(dir / "t.csv", "a,y\n1.0,0\n,1\n3.0,2\n");
  const Dataset ds = load_csv(dir / "t.csv", {"y"});
  EXPECT_DOUBLE_EQ(ds.features(1, 0), 2.0);
}

TEST(LoadCsvTest, DomainColumnIsNotAFeature) {
  TempDir dir;
  write_file(dir / "t.csv", "a,site,y\n1,0,1\n2,1,2\n3,1,3\n");
  const Dataset ds = load_csv(dir / "t.csv", {"y"}, "site");
  EXPECT_EQ(ds.feature_dim(), 1);
  ASSERT_TRUE(ds.domain_ids.has_value());
  EXPECT_EQ(*ds.domain_ids, (std::vector<int>{0, 1, 1}));
}

TEST(LoadCsvTest, Errors) {
  TempDir dir;
  EXPECT_THROW(load_csv(dir / "absent.csv", {"y"}), DataError);
  write_file(dir / "ragged.csv", "a,y\n1,2\n3\n");
  EXPECT_THROW(load_csv(dir / "ragged.csv", {"y"}), DataError);
  write_file(dir / "text.csv", "a,y\n1,2\nabc,3\n");
  EXPECT_THROW(load_csv(dir / "text.csv", {"y"}), DataError);
  write_file(dir / "ok.csv", "a,y\n1,2\n");
  EXPECT_THROW(load_csv(dir / "ok.csv", {"z"}), DataError);
}

TEST(SaveCsvTest, RoundTrip) {
  TempDir dir;
  Dataset ds = testing::make_dataset(Matrix{{0.5, -1.25}, {3.0, 1e-7}}, Matrix{{2.0}, {4.5}});
  ds.feature_names = {"u", "v"};
  ds.label_names = {"y"};
  save_csv(ds, dir / "rt.csv");
  const Dataset back = load_csv(dir / "rt.csv", {"y"});
  EXPECT_EQ(back.features, ds.features);
  EXPECT_EQ(back.labels, ds.labels);
}

TEST(MinMaxTest, Examples) {
  Dataset ds = testing::make_dataset(Matrix{{2, 5}, {4, 5}, {6, 5}}, Matrix::Zero(3, 1));
  const auto [scaled, scaler] = normalize_minmax(ds);
  EXPECT_DOUBLE_EQ(scaled.features(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(scaled.features(1, 0), 0.5);
  EXPECT_DOUBLE_EQ(scaled.features(2, 0), 1.0);
  for (Index i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(scaled.features(i, 1), 0.0);
  EXPECT_EQ(scaled.labels, ds.labels);

  MinMaxScaler s;
  s.min = Vector::Constant(1, 0.0);
  s.max = Vector::Constant(1, 10.0);
  EXPECT_DOUBLE_EQ(s.transform(Matrix::Constant(1, 1, 12.0))(0, 0), 1.2);
}

TEST(SplitTest, RandomFractionsAreDeterministic) {
  const Dataset ds = testing::make_dataset(Matrix::Random(10, 2), Matrix::Random(10, 1));
  SplitSpec spec;
  spec.seed = 7;
  const DataSplits a = split(ds, spec);
  const DataSplits b = split(ds, spec);
  EXPECT_EQ(a.train.size(), 8);
  EXPECT_EQ(a.val.size(), 1);
  EXPECT_EQ(a.test.size(), 1);
  EXPECT_EQ(a.train.features, b.train.features);
  EXPECT_EQ(a.test.labels, b.test.labels);
}

TEST(SplitTest, FixedCounts) {
  const Dataset ds = testing::make_dataset(Matrix::Zero(1503, 5), Matrix::Zero(1503, 1));
  SplitSpec spec;
  spec.mode = SplitMode::kFixedCounts;
  spec.counts = {1003, 300, 200};
  const DataSplits s = split(ds, spec);
  EXPECT_EQ(s.train.size(), 1003);
  EXPECT_EQ(s.val.size(), 300);
  EXPECT_EQ(s.test.size(), 200);
  spec.counts = {1500, 300, 200};
  EXPECT_THROW(split(ds, spec), DataError);
}

TEST(SplitTest, ByDomainIsDisjoint) {
  Dataset ds = testing::make_dataset(Matrix::Random(6, 1), Matrix::Random(6, 1));
  ds.domain_ids = std::vector<int>{0, 0, 1, 1, 2, 2};
  SplitSpec spec;
  spec.mode = SplitMode::kByDomain;
  spec.train_fraction = 2.0 / 3.0;
  spec.val_fraction = 0.0;
  spec.test_fraction = 1.0 / 3.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    spec.seed = seed;
    const DataSplits s = split(ds, spec);
    ASSERT_EQ(s.test.size(), 2);
    const std::set<int> test_domains(s.test.domain_ids->begin(), s.test.domain_ids->end());
    EXPECT_EQ(test_domains.size(), 1u);
    for (int d : *s.train.domain_ids) EXPECT_EQ(test_domains.count(d), 0u);
  }
}

TEST(SplitTest, RejectsBadFractions) {
  SplitSpec spec;
  spec.train_fraction = 0.9;
  EXPECT_THROW(spec.validate(), DataError);
}

TEST(LabelNoiseTest, ZeroFractionAndSingleRow) {
  const Dataset ds = testing::make_dataset(Matrix::Random(5, 1), Matrix::Random(5, 1));
  EXPECT_EQ(inject_label_noise(ds, 0.0, 3).labels, ds.labels);
  const Dataset one = testing::make_dataset(Matrix::Ones(1, 1), Matrix::Ones(1, 1));
  EXPECT_EQ(inject_label_noise(one, 0.3, 3).labels, one.labels);
}

TEST(LabelNoiseTest, NoiseScaleMatchesFraction) {
  const Index n = 10000;
  Rng rng(11);
  const Matrix y = testing::random_matrix(n, 1, rng);
  const Dataset ds = testing::make_dataset(Matrix::Zero(n, 1), y);
  const Dataset noisy = inject_label_noise(ds, 0.3, 5);
  const Vector delta = noisy.labels.col(0) - ds.labels.col(0);
  const double label_sd = std::sqrt((y.array() - y.mean()).square().sum() / (n - 1));
  const double sd = std::sqrt((delta.array() - delta.mean()).square().sum() / (n - 1));
  const double expected = 0.3 * label_sd;
  // Standard error of a sample standard deviation is about sd / sqrt(2n).
  EXPECT_NEAR(sd, expected, 3.0 * expected / std::sqrt(2.0 * n));
}

}  // namespace
}  // namespace cmix
