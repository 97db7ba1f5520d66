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

#include "cmix/persist.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include <gtest/gtest.h>

#include "test_util.hpp"

namespace cmix {
namespace {

ExperimentResult sample_result() {
  ExperimentResult r;
  r.kind = "bandwidth-sweep";
  r.config = {{"kind", "bandwidth-sweep"}};
  for (std::uint64_t seed : {0, 1}) {
    SeedRecord rec;
    rec.seed = seed;
    rec.arm = "cmixup";
    rec.parameter = 1.75;
    rec.metrics = {{"rmse", 2.5 + 0.1 * static_cast<double>(seed)}, {"mape", 0.02}};
    rec.train_loss = {1.0, 0.5};
    rec.val_rmse = {3.0, 2.7};
    r.records.push_back(rec);
  }
  SeedRecord failed;
  failed.seed = 2;
  failed.arm = "erm";
  failed.error = "training diverged";
  r.records.push_back(failed);
  r.summary = {{"parameter", "sigma"},
               {"table", {{{"parameter", 1.75}, {"mean", 2.55}, {"std", nullptr}}}},
               {"reference", {{"erm", {{"mean", 2.9}, {"std", 0.1}}}}}};
  r.wall_seconds = 1.5;
  r.finalize();
  return r;
}

TEST(PersistTest, RoundTrip) {
  testing::TempDir dir;
  const ExperimentResult r = sample_result();
  const auto file = persist(r, dir / "out");
  EXPECT_TRUE(std::filesystem::exists(dir / "out" / "records.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "out" / "sweep.csv"));
  const ExperimentResult back = load_result(file);
  EXPECT_EQ(to_json(back), to_json(r));
  EXPECT_EQ(back.failures(), 1u);
  ASSERT_EQ(back.records.size(), 3u);
  EXPECT_EQ(back.records[0].parameter, 1.75);
  EXPECT_EQ(back.records[2].error, "training diverged");
}

TEST(PersistTest, AggregatesAndLookup) {
  const ExperimentResult r = sample_result();
  const Aggregate* a = r.find("cmixup", "rmse", 1.75);
  ASSERT_NE(a, nullptr);
  EXPECT_NEAR(a->mean, 2.55, 1e-12);
  EXPECT_NEAR(a->std, std::sqrt(0.005), 1e-12);
  EXPECT_EQ(a->count, 2);
  EXPECT_EQ(r.find("cmixup", "rmse"), nullptr);
  EXPECT_EQ(r.value("cmixup", 1, "rmse", 1.75), 2.6);
  EXPECT_FALSE(r.value("erm", 2, "rmse").has_value());
}

TEST(PersistTest, IdenticalPayloadsIgnoringTimestamp) {
  testing::TempDir dir;
  const ExperimentResult r = sample_result();
  auto a = nlohmann::json::parse(std::ifstream(persist(r, dir / "a")));
  auto b = nlohmann::json::parse(std::ifstream(persist(r, dir / "b")));
  a.erase("created_at");
  b.erase("created_at");
  EXPECT_EQ(a, b);
}

TEST(PersistTest, NonDirectoryTargetNamesThePath) {
  testing::TempDir dir;
  testing::write_file(dir / "file", "x");
  try {
    persist(sample_result(), dir / "file");
    FAIL() << "expected PersistError";
  } catch (const PersistError& e) {
    EXPECT_NE(std::string(e.what()).find((dir / "file").string()), std::string::npos);
  }
  EXPECT_THROW(load_result(dir / "absent.json"), PersistError);
}

}  // namespace
}  // namespace cmix
