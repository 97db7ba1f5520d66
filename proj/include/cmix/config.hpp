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

// Declarative experiment configuration, read from a JSON file.
//
// Every section is optional and falls back to the defaults below; unknown
// top-level keys are rejected so that typos do not silently run defaults.
// configs/ in the repository holds one file per experiment kind.

#ifndef CMIX_CONFIG_HPP_
#define CMIX_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cmix/data.hpp"
#include "cmix/fcn.hpp"
#include "cmix/kernel_regressor.hpp"
#include "cmix/metalearn.hpp"
#include "cmix/mixer.hpp"
#include "cmix/synthgen.hpp"

namespace cmix {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ExperimentKind {
  kTabularTrain,
  kTheorem1,
  kTheorem3,
  kMeta,
  kBandwidthSweep,
  kAlphaSweep,
  kNoiseRobustness,
  kInvariance,
};

std::string to_string(ExperimentKind kind);
ExperimentKind parse_experiment_kind(const std::string& name);

struct DatasetSource {
  std::string path;
  std::vector<std::string> label_columns;
  std::optional<std::string> domain_column;
  bool normalize_features = true;
  SplitSpec split;
};

struct ModelConfig {
  std::vector<Index> hidden{128, 128};
  Activation activation = Activation::kLeakyRelu;
  double lr = 1e-2;
  Index batch_size = 16;
  int epochs = 100;
  bool standardize_labels = true;
  // Epochs between hidden-state refreshes for representation metrics.
  int representation_refresh = 1;
};

struct Theorem1Options {
  double label_bandwidth = 0.1;
  double feature_bandwidth = 1.0;
  double beta_alpha = 2.0;
  SmoothingKernel nw_kernel = SmoothingKernel::kGaussian;
  double nw_bandwidth = 0.1;
  Index n_test = 5000;
};

struct Theorem3Options {
  double ridge_k = 10.0;
  double lambda = 0.5;
  // Bandwidth of the feature-distance policy; 0 reuses the label bandwidth.
  double feature_bandwidth = 0.0;
  RegimeConstants constants;
  bool enforce_regime = true;
};

struct InvarianceOptions {
  int bins = 10;
  Index grid_points = 512;
  double grid_span = 4.0;  // pooled standard deviations on each side
  Index eval_pairs = 1000;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::kTabularTrain;
  DatasetSource dataset;
  MixPolicy policy;
  ModelConfig model;
  std::vector<std::string> arms{"erm", "cmixup"};
  // Per-arm bandwidth overrides, e.g. for feature-distance ablations.
  std::map<std::string, double> arm_bandwidths;
  std::vector<std::uint64_t> seeds{0, 1, 2};
  std::string output = "results";

  std::vector<double> grid;
  std::vector<std::string> reference_arms{"erm", "mixup"};
  double noise_fraction = 0.3;

  SingleIndexSpec single_index;
  Theorem1Options theorem1;
  CovariateShiftSpec shift;
  Theorem3Options theorem3;
  MetaTaskSpec meta_tasks;
  MetaConfig meta;
  std::vector<std::string> meta_arms{"maml", "metamix", "cmetamix"};
  InvarianceOptions invariance;

  void validate() const;
};

nlohmann::json to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace cmix

#endif  // CMIX_CONFIG_HPP_
