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

#include "cmix/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cmix/metrics.hpp"

namespace cmix {
namespace {

Matrix gather(const Matrix& m, std::span<const Index> rows) {
  Matrix out(static_cast<Index>(rows.size()), m.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Index>(r)) = m.row(rows[r]);
  return out;
}

}  // namespace

std::optional<MixPolicy> arm_policy(const std::string& arm, const MixPolicy& base) {
  if (arm == "erm") return std::nullopt;
  MixPolicy p = base;
  p.scope = PairingScope::kFull;
  if (arm == "mixup") {
    p.metric = DistanceMetric::kUniform;
    p.site_layer = 0;
    return p;
  }
  if (arm == "manifold-mixup") {
    p.metric = DistanceMetric::kUniform;
    p.site_layer = std::max(base.site_layer, 1);
    return p;
  }
  if (arm == "cmixup") return p;
  if (arm == "cmixup-batch") {
    p.scope = PairingScope::kBatch;
    return p;
  }
  const std::string prefix = "cmixup-";
  if (arm.rfind(prefix, 0) == 0) {
    try {
      p.metric = parse_metric(arm.substr(prefix.size()));
    } catch (const std::invalid_argument&) {
      throw std::invalid_argument("unknown arm: " + arm);
    }
    return p;
  }
  throw std::invalid_argument("unknown arm: " + arm);
}

Matrix TrainOutcome::predict(const Matrix& features) const {
  const Matrix raw = fcn_predict(model, features);
  return scaler ? scaler->inverse(raw) : raw;
}

TrainOutcome train_fcn(const Dataset& train, const Dataset& val, const std::optional<MixPolicy>& policy,
                       const ModelConfig& cfg, std::uint64_t seed) {
  const Index n = train.size();
  if (n == 0) throw std::invalid_argument("train_fcn: empty training set");
  if (cfg.batch_size < 1 || cfg.epochs < 1) throw std::invalid_argument("train_fcn: bad batch size or epoch count");
  if (policy) policy->validate();

  TrainOutcome out;
  std::vector<Index> sizes{train.feature_dim()};
  sizes.insert(sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
  sizes.push_back(train.label_dim());
  Rng init_rng = make_rng(seed, 0);
  FcnModel model = FcnModel::create(sizes, cfg.activation, init_rng);
  if (policy && policy->site_layer > model.hidden_layers()) {
    throw std::invalid_argument("train_fcn: mixing site " + std::to_string(policy->site_layer) +
                                " exceeds the hidden layer count");
  }
  Matrix targets = train.labels;
  if (cfg.standardize_labels) {
    out.scaler = LabelStandardizer::fit(train.labels);
    targets = out.scaler->forward(train.labels);
  }
  AdamState adam = AdamState::for_model(model);
  Rng order_rng = make_rng(seed, 1);
  Rng pair_rng = make_rng(seed, 2);

  const bool uses_table = policy && policy->scope == PairingScope::kFull;
  const bool uses_reps = policy && policy->needs_representations();
  Matrix reps;
  PairTable table;
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::vector<Index> partners_pool = order;

  out.best_val_rmse = std::numeric_limits<double>::infinity();
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const bool refresh = epoch == 0 || (uses_reps && cfg.representation_refresh > 0 &&
                                        epoch % cfg.representation_refresh == 0);
    if (policy && refresh) {
      if (uses_reps) reps = fcn_hidden(model, train.features, model.hidden_layers());
      if (uses_table) table = build_pair_table(train, *policy, uses_reps ? &reps : nullptr);
    }
    std::shuffle(order.begin(), order.end(), order_rng);
    if (policy && policy->scope == PairingScope::kBatch) std::shuffle(partners_pool.begin(), partners_pool.end(), order_rng);

    double loss_sum = 0.0;
    Index batches = 0;
    for (Index start = 0; start < n; start += cfg.batch_size) {
      const Index len = std::min(cfg.batch_size, n - start);
      const std::span<const Index> anchors(order.data() + start, static_cast<std::size_t>(len));
      MixedBatch batch;
      batch.anchor_x = gather(train.features, anchors);
      if (!policy) {
        batch.partner_x = batch.anchor_x;
        batch.lambda = Vector::Ones(len);
        batch.target = gather(targets, anchors);
      } else {
        std::vector<Pairing> pairs;
        if (uses_table) {
          pairs = draw_pairings(anchors, table, policy->beta_alpha, pair_rng);
        } else {
          const std::span<const Index> second(partners_pool.data() + start, static_cast<std::size_t>(len));
          pairs = draw_pairings_pairwise(anchors, second, train, *policy, pair_rng, uses_reps ? &reps : nullptr);
        }
        batch.partner_x.resize(len, train.feature_dim());
        batch.lambda.resize(len);
        batch.target.resize(len, targets.cols());
        for (Index r = 0; r < len; ++r) {
          const Pairing& p = pairs[static_cast<std::size_t>(r)];
          batch.partner_x.row(r) = train.features.row(p.partner);
          batch.lambda[r] = p.lambda;
          batch.target.row(r) = p.lambda * targets.row(p.anchor) + (1.0 - p.lambda) * targets.row(p.partner);
        }
        batch.site_layer = policy->site_layer;
      }
      loss_sum += fcn_train_step(model, batch, adam, cfg.lr);
      ++batches;
    }
    out.train_loss.push_back(loss_sum / static_cast<double>(batches));

    if (val.size() > 0) {
      Matrix pred = fcn_predict(model, val.features);
      if (out.scaler) pred = out.scaler->inverse(pred);
      const double rmse = compute_metrics(pred, val.labels).rmse;
      out.val_rmse.push_back(rmse);
      if (rmse < out.best_val_rmse) {
        out.best_val_rmse = rmse;
        out.best_epoch = epoch;
        out.model = model;
      }
    }
  }
  if (out.best_epoch < 0) {
    out.model = model;
    out.best_epoch = cfg.epochs - 1;
    out.best_val_rmse = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

}  // namespace cmix
