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

// Experiment runners. Each runner takes a validated ExperimentConfig and
// returns an ExperimentResult with one record per (seed, arm[, parameter]).
// Records within a result are sorted by (arm, parameter, seed) so that the
// payload does not depend on scheduling.

#ifndef CMIX_EXPERIMENTS_HPP_
#define CMIX_EXPERIMENTS_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cmix/config.hpp"
#include "cmix/data.hpp"

namespace cmix {

struct SeedRecord {
  std::uint64_t seed = 0;
  std::string arm;
  std::optional<double> parameter;  // sweep grid value
  std::map<std::string, double> metrics;
  std::vector<double> train_loss;
  std::vector<double> val_rmse;
  std::string error;  // set when the run failed; metrics are then empty
};

struct Aggregate {
  std::string arm;
  std::optional<double> parameter;
  std::string metric;
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, 0 for a single seed
  Index count = 0;
};

struct ExperimentResult {
  std::string kind;
  nlohmann::json config;
  std::vector<SeedRecord> records;
  std::vector<Aggregate> aggregates;
  nlohmann::json summary = nlohmann::json::object();
  double wall_seconds = 0.0;
  std::string version = CMIX_VERSION;

  /// Sorts records and recomputes aggregates from successful records.
  void finalize();
  const Aggregate* find(const std::string& arm, const std::string& metric,
                        std::optional<double> parameter = std::nullopt) const;
  /// Metric of the record for (arm, seed[, parameter]), if present.
  std::optional<double> value(const std::string& arm, std::uint64_t seed, const std::string& metric,
                              std::optional<double> parameter = std::nullopt) const;
  std::size_t failures() const;
};

/// Loads the configured CSV, splits it, and min-max normalizes features with
/// training statistics when dataset.normalize_features is set.
DataSplits prepare_tabular(const ExperimentConfig& cfg);

ExperimentResult run_tabular(const ExperimentConfig& cfg);
ExperimentResult run_noise(const ExperimentConfig& cfg);
ExperimentResult run_sweep(const ExperimentConfig& cfg);
ExperimentResult run_theorem1(const ExperimentConfig& cfg);
ExperimentResult run_theorem3(const ExperimentConfig& cfg);
ExperimentResult run_meta(const ExperimentConfig& cfg);
ExperimentResult run_invariance(const ExperimentConfig& cfg);

/// Dispatches on cfg.kind.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

}  // namespace cmix

#endif  // CMIX_EXPERIMENTS_HPP_
