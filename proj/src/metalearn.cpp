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

#include "cmix/metalearn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cmix/mixer.hpp"

namespace cmix {

std::string to_string(MetaPairing pairing) {
  switch (pairing) {
    case MetaPairing::kNone:
      return "none";
    case MetaPairing::kUniform:
      return "uniform";
    case MetaPairing::kFeature:
      return "feature";
    case MetaPairing::kLabel:
      return "label";
  }
  return "?";
}

MetaPairing parse_meta_pairing(const std::string& name) {
  if (name == "none") return MetaPairing::kNone;
  if (name == "uniform") return MetaPairing::kUniform;
  if (name == "feature") return MetaPairing::kFeature;
  if (name == "label") return MetaPairing::kLabel;
  throw std::invalid_argument("unknown meta pairing: " + name);
}

void MetaConfig::validate() const {
  if (!(outer_lr >= 0.0) || !(inner_lr > 0.0)) throw std::invalid_argument("meta config: bad learning rates");
  if (inner_steps < 1) throw std::invalid_argument("meta config: inner_steps must be >= 1");
  if (!(beta_alpha > 0.0) || !(bandwidth > 0.0)) throw std::invalid_argument("meta config: alpha and sigma must be > 0");
  if (meta_batch_size < 1 || support_shots < 1 || query_shots < 1 || max_iterations < 0) {
    throw std::invalid_argument("meta config: batch size and shots must be >= 1");
  }
}

TaskScaling TaskScaling::fit(const std::vector<MetaTask>& tasks) {
  if (tasks.empty()) throw std::invalid_argument("TaskScaling::fit: no tasks");
  const Index dx = tasks.front().support.feature_dim();
  const Index dy = tasks.front().support.label_dim();
  Index rows = 0;
  for (const auto& t : tasks) rows += t.support.size() + t.query.size();
  Matrix x(rows, dx);
  Matrix y(rows, dy);
  Index r = 0;
  for (const auto& t : tasks) {
    for (const Dataset* d : {&t.support, &t.query}) {
      if (d->feature_dim() != dx || d->label_dim() != dy) throw DimensionError("TaskScaling::fit: task shapes differ");
      x.middleRows(r, d->size()) = d->features;
      y.middleRows(r, d->size()) = d->labels;
      r += d->size();
    }
  }
  auto column_stats = [](const Matrix& m, Vector& mean, Vector& scale) {
    mean = m.colwise().mean().transpose();
    scale.resize(m.cols());
    for (Index c = 0; c < m.cols(); ++c) {
      const double var = (m.col(c).array() - mean[c]).square().mean();
      scale[c] = var > 0.0 ? std::sqrt(var) : 1.0;
    }
  };
  TaskScaling s;
  column_stats(x, s.x_mean, s.x_scale);
  column_stats(y, s.y_mean, s.y_scale);
  return s;
}

MetaTask TaskScaling::apply(const MetaTask& task) const {
  MetaTask out = task;
  for (Dataset* d : {&out.support, &out.query}) {
    d->features = ((d->features.rowwise() - x_mean.transpose()).array().rowwise() / x_scale.transpose().array()).matrix();
    d->labels = ((d->labels.rowwise() - y_mean.transpose()).array().rowwise() / y_scale.transpose().array()).matrix();
  }
  return out;
}

std::vector<MetaTask> TaskScaling::apply(const std::vector<MetaTask>& tasks) const {
  std::vector<MetaTask> out;
  out.reserve(tasks.size());
  for (const auto& t : tasks) out.push_back(apply(t));
  return out;
}

double TaskScaling::mse_to_label_units(double mse) const { return mse * y_scale.array().square().mean(); }

FcnModel inner_adapt(const FcnModel& theta, const Dataset& support, const MetaConfig& cfg) {
  if (support.size() == 0) throw std::invalid_argument("inner_adapt: empty support set");
  FcnModel phi = theta;
  for (int step = 0; step < cfg.inner_steps; ++step) {
    LossAndGradients lg = fcn_backward(phi, support.features, support.labels);
    if (!std::isfinite(lg.loss)) {
      throw DivergenceError("inner_adapt: non-finite support loss at step " + std::to_string(step));
    }
    add_scaled(phi, lg.gradients, -cfg.inner_lr);
  }
  return phi;
}

MetaMixResult metamix_query(const Dataset& support, const Dataset& query, const MetaConfig& cfg, Rng& rng) {
  if (support.size() == 0 || query.size() == 0) throw std::invalid_argument("metamix_query: empty set");
  MetaMixResult out;
  out.mixed = query;
  const Index nq = query.size();
  if (cfg.pairing == MetaPairing::kNone) {
    out.partner.assign(static_cast<std::size_t>(nq), -1);
    out.lambda.assign(static_cast<std::size_t>(nq), 0.0);
    return out;
  }
  Matrix dist;
  if (cfg.pairing == MetaPairing::kLabel) dist = pairwise_sq_distance(query.labels, support.labels);
  if (cfg.pairing == MetaPairing::kFeature) dist = pairwise_sq_distance(query.features, support.features);
  std::uniform_int_distribution<Index> pick(0, support.size() - 1);
  for (Index i = 0; i < nq; ++i) {
    // Partner before lambda, matching the per-example loop order.
    Index j = 0;
    if (cfg.pairing == MetaPairing::kUniform) {
      j = pick(rng);
    } else {
      PairDistribution row = kernel_pmf(
          std::span<const double>(dist.row(i).data(), static_cast<std::size_t>(dist.cols())), cfg.bandwidth, false, 0);
      j = row.draw(rng);
    }
    const double lam = sample_beta(cfg.beta_alpha, rng);
    out.mixed.features.row(i) = lam * support.features.row(j) + (1.0 - lam) * query.features.row(i);
    out.mixed.labels.row(i) = lam * support.labels.row(j) + (1.0 - lam) * query.labels.row(i);
    out.partner.push_back(j);
    out.lambda.push_back(lam);
  }
  return out;
}

MetaTrainResult meta_train(const std::vector<MetaTask>& tasks, const MetaConfig& cfg, std::uint64_t seed) {
  if (tasks.empty()) throw std::invalid_argument("meta_train: no tasks");
  std::vector<Index> sizes{tasks.front().support.feature_dim()};
  sizes.insert(sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
  sizes.push_back(tasks.front().support.label_dim());
  Rng init_rng = make_rng(seed, 0);
  return meta_train(tasks, cfg, seed, FcnModel::create(sizes, cfg.activation, init_rng));
}

MetaTrainResult meta_train(const std::vector<MetaTask>& tasks, const MetaConfig& cfg, std::uint64_t seed,
                           FcnModel init) {
  cfg.validate();
  if (tasks.empty()) throw std::invalid_argument("meta_train: no tasks");
  MetaTrainResult result;
  result.init = std::move(init);
  AdamState adam = AdamState::for_model(result.init);
  Rng rng = make_rng(seed, 1);
  std::vector<std::size_t> order(tasks.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::size_t cursor = order.size();
  const auto batch = static_cast<std::size_t>(std::min<int>(cfg.meta_batch_size, static_cast<int>(tasks.size())));

  for (int it = 0; it < cfg.max_iterations; ++it) {
    FcnGradients meta_grad = zeros_like(result.init);
    double loss = 0.0;
    for (std::size_t b = 0; b < batch; ++b) {
      if (cursor == order.size()) {
        std::shuffle(order.begin(), order.end(), rng);
        cursor = 0;
      }
      const MetaTask& task = tasks[order[cursor++]];
      const FcnModel phi = inner_adapt(result.init, task.support, cfg);
      const MetaMixResult q = metamix_query(task.support, task.query, cfg, rng);
      LossAndGradients lg = fcn_backward(phi, q.mixed.features, q.mixed.labels);
      loss += lg.loss;
      add_scaled(meta_grad, lg.gradients, 1.0 / static_cast<double>(batch));
    }
    loss /= static_cast<double>(batch);
    if (!std::isfinite(loss)) {
      throw DivergenceError("meta_train: non-finite query loss at iteration " + std::to_string(it));
    }
    result.outer_losses.push_back(loss);
    adam_update(result.init, meta_grad, adam, cfg.outer_lr);
    if (!result.init.all_finite()) {
      throw DivergenceError("meta_train: non-finite parameters after iteration " + std::to_string(it));
    }
  }
  return result;
}

MetaEvaluation meta_evaluate(const FcnModel& theta, const std::vector<MetaTask>& targets, const MetaConfig& cfg) {
  if (targets.empty()) throw std::invalid_argument("meta_evaluate: no target tasks");
  MetaEvaluation ev;
  for (const MetaTask& task : targets) {
    const FcnModel phi = inner_adapt(theta, task.support, cfg);
    const Matrix pred = fcn_predict(phi, task.query.features);
    ev.task_mse.push_back((pred - task.query.labels).squaredNorm() / static_cast<double>(pred.size()));
  }
  const auto t = static_cast<double>(ev.task_mse.size());
  ev.mean_mse = std::accumulate(ev.task_mse.begin(), ev.task_mse.end(), 0.0) / t;
  if (ev.task_mse.size() < 2) {
    ev.half_width = 0.0;
    ev.half_width_defined = false;
    return ev;
  }
  double ss = 0.0;
  for (double v : ev.task_mse) ss += (v - ev.mean_mse) * (v - ev.mean_mse);
  ev.half_width = 1.96 * std::sqrt(ss / (t - 1.0)) / std::sqrt(t);
  return ev;
}

}  // namespace cmix
