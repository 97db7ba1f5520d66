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

// Fully connected regression network with hand-written reverse mode.
//
// The topology is fixed: affine layers with a (leaky) ReLU after every layer
// but the last. Loss is the mean squared error over all output entries of a
// batch. Mixing can be injected at the input (site 0) or after hidden layer
// k; in the latter case anchors and partners are propagated separately up to
// layer k, combined row-wise with their lambda, and the gradient of the mixed
// activation is split back onto both branches with weights lambda and
// 1 - lambda.

#ifndef CMIX_FCN_HPP_
#define CMIX_FCN_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include "cmix/common.hpp"

namespace cmix {

enum class Activation { kRelu, kLeakyRelu };

std::string to_string(Activation a);
Activation parse_activation(const std::string& name);

struct DenseLayer {
  Matrix weight;  // out x in
  Vector bias;    // out
};

struct FcnModel {
  std::vector<Index> layer_sizes;  // input, hidden..., output
  Activation activation = Activation::kLeakyRelu;
  double leaky_slope = 0.01;
  std::vector<DenseLayer> layers;

  /// Weights uniform in +-sqrt(6 / (fan_in + fan_out)), biases zero.
  static FcnModel create(std::vector<Index> layer_sizes, Activation activation, Rng& rng);

  Index input_dim() const { return layer_sizes.front(); }
  Index output_dim() const { return layer_sizes.back(); }
  int hidden_layers() const { return static_cast<int>(layers.size()) - 1; }
  Index parameter_count() const;

  Vector flatten() const;
  void assign(const Vector& flat);
  bool all_finite() const;
};

// Same shapes as FcnModel::layers.
using FcnGradients = std::vector<DenseLayer>;

FcnGradients zeros_like(const FcnModel& model);
Vector flatten(const FcnGradients& grads);
// params += scale * grads
void add_scaled(FcnModel& model, const FcnGradients& grads, double scale);
void add_scaled(FcnGradients& acc, const FcnGradients& grads, double scale);

struct ForwardResult {
  Vector prediction;
  std::vector<Vector> hidden;  // post-activation, one per hidden layer
};

ForwardResult fcn_forward(const FcnModel& model, const Vector& x, bool capture_hidden = false);

/// Batched forward; one row per example.
Matrix fcn_predict(const FcnModel& model, const Matrix& X);

/// Post-activation output of hidden layer `layer` (1-based) for every row.
Matrix fcn_hidden(const FcnModel& model, const Matrix& X, int layer);

struct LossAndGradients {
  double loss = 0.0;
  FcnGradients gradients;
};

/// Mean squared error of (X, Y) and its exact gradient.
LossAndGradients fcn_backward(const FcnModel& model, const Matrix& X, const Matrix& Y);

struct MixedBatch {
  Matrix anchor_x;
  Matrix partner_x;
  Vector lambda;
  Matrix target;  // already-mixed labels
  int site_layer = 0;
};

/// Mean squared error of the mixed batch and its exact gradient.
LossAndGradients fcn_backward(const FcnModel& model, const MixedBatch& batch);

struct AdamState {
  FcnGradients first_moment;
  FcnGradients second_moment;
  long step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState for_model(const FcnModel& model);
};

void adam_update(FcnModel& model, const FcnGradients& grads, AdamState& state, double lr);

/// One Adam step on the mixed batch. Returns the pre-update loss; throws
/// DivergenceError when the loss or the updated parameters are not finite.
double fcn_train_step(FcnModel& model, const MixedBatch& batch, AdamState& state, double lr);

/// Versioned text checkpoint (JSON): layer sizes, activation, flat params.
void save_checkpoint(const FcnModel& model, const std::filesystem::path& path);
FcnModel load_checkpoint(const std::filesystem::path& path);

}  // namespace cmix

#endif  // CMIX_FCN_HPP_
