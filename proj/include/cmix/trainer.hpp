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

#ifndef CMIX_TRAINER_HPP_
#define CMIX_TRAINER_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cmix/config.hpp"
#include "cmix/data.hpp"
#include "cmix/fcn.hpp"
#include "cmix/mixer.hpp"

namespace cmix {

/// Mixing policy of a named arm, or nullopt for plain ERM.
///   erm, mixup (uniform, input), manifold-mixup (uniform, base site),
///   cmixup (base), cmixup-batch (base, per-batch scope),
///   cmixup-<metric> for the distance-metric ablations (cmixup-feature,
///   cmixup-feature-label, cmixup-representation,
///   cmixup-representation-label, cmixup-uniform).
/// The manifold-mixup arm mixes at base.site_layer, or layer 1 when the base
/// mixes inputs.
std::optional<MixPolicy> arm_policy(const std::string& arm, const MixPolicy& base);

struct TrainOutcome {
  FcnModel model;  // parameters of the best validation epoch
  std::optional<LabelStandardizer> scaler;
  std::vector<double> train_loss;  // mean mixed-batch loss per epoch
  std::vector<double> val_rmse;    // original label units
  int best_epoch = -1;
  double best_val_rmse = 0.0;

  Matrix predict(const Matrix& features) const;
};

/// Trains an FCN with Adam on (optionally mixed) mini-batches. Pair tables
/// are built from the raw training labels; the network fits standardized
/// labels when model.standardize_labels is set. Model selection keeps the
/// epoch with the lowest validation RMSE, or the last epoch when val is
/// empty. Random streams: 0 init, 1 batch order, 2 pairing.
TrainOutcome train_fcn(const Dataset& train, const Dataset& val, const std::optional<MixPolicy>& policy,
                       const ModelConfig& model, std::uint64_t seed);

}  // namespace cmix

#endif  // CMIX_TRAINER_HPP_
