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

// First-order MAML with optional MetaMix query augmentation.
//
// For every task in a meta-batch the shared initialization is adapted on the
// support set by a few full-batch gradient steps. Each query example is then
// interpolated with a support example (lambda * support + (1 - lambda) *
// query), and the query loss gradient at the adapted parameters is averaged
// over the meta-batch and applied to the initialization. Partners are chosen
// uniformly (MetaMix), by feature distance, or by label distance (C-Mixup).

#ifndef CMIX_METALEARN_HPP_
#define CMIX_METALEARN_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "cmix/common.hpp"
#include "cmix/data.hpp"
#include "cmix/fcn.hpp"
#include "cmix/synthgen.hpp"

namespace cmix {

enum class MetaPairing { kNone, kUniform, kFeature, kLabel };

std::string to_string(MetaPairing pairing);
MetaPairing parse_meta_pairing(const std::string& name);

struct MetaConfig {
  double outer_lr = 1e-3;
  double inner_lr = 0.01;
  int inner_steps = 5;
  double beta_alpha = 0.5;
  double bandwidth = 1.0;
  MetaPairing pairing = MetaPairing::kLabel;  // kNone is plain MAML
  int meta_batch_size = 4;
  Index support_shots = 15;
  Index query_shots = 15;
  int max_iterations = 2000;
  std::vector<Index> hidden{40, 40};
  Activation activation = Activation::kLeakyRelu;
  // z-score features and labels with statistics pooled over the training
  // tasks before meta-training (see TaskScaling).
  bool standardize = true;

  void validate() const;
};

/// Column-wise affine map fitted on the pooled support and query rows of a
/// task list. Keeps the inner-loop step size meaningful regardless of the
/// raw feature and label scale.
struct TaskScaling {
  Vector x_mean;
  Vector x_scale;
  Vector y_mean;
  Vector y_scale;

  static TaskScaling fit(const std::vector<MetaTask>& tasks);
  MetaTask apply(const MetaTask& task) const;
  std::vector<MetaTask> apply(const std::vector<MetaTask>& tasks) const;
  // Multiplies a mean squared error in standardized units back to label
  // units (exact for one label column).
  double mse_to_label_units(double mse) const;
};

/// inner_steps full-batch gradient steps on the support mean squared error.
/// Returns the adapted copy; theta is untouched.
FcnModel inner_adapt(const FcnModel& theta, const Dataset& support, const MetaConfig& cfg);

struct MetaMixResult {
  Dataset mixed;
  std::vector<Index> partner;  // support row per query row
  std::vector<double> lambda;
};

/// One augmented example per query example. With kNone the query set is
/// returned unchanged with lambda 0.
MetaMixResult metamix_query(const Dataset& support, const Dataset& query, const MetaConfig& cfg, Rng& rng);

struct MetaTrainResult {
  FcnModel init;
  std::vector<double> outer_losses;  // mean meta-batch query loss per iteration
};

/// Outer updates use Adam on the averaged first-order meta-gradient.
MetaTrainResult meta_train(const std::vector<MetaTask>& tasks, const MetaConfig& cfg, std::uint64_t seed);

/// Same loop starting from a given initialization.
MetaTrainResult meta_train(const std::vector<MetaTask>& tasks, const MetaConfig& cfg, std::uint64_t seed,
                           FcnModel init);

struct MetaEvaluation {
  double mean_mse = 0.0;
  // 1.96 * sample std / sqrt(T); zero with half_width_defined unset for T = 1.
  double half_width = 0.0;
  bool half_width_defined = true;
  std::vector<double> task_mse;
};

MetaEvaluation meta_evaluate(const FcnModel& theta, const std::vector<MetaTask>& targets, const MetaConfig& cfg);

}  // namespace cmix

#endif  // CMIX_METALEARN_HPP_
