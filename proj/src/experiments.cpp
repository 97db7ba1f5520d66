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

#include "cmix/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <functional>
#include <numeric>
#include <sstream>
#include <tuple>

#include "cmix/fcn.hpp"
#include "cmix/invariance.hpp"
#include "cmix/kernel_regressor.hpp"
#include "cmix/metalearn.hpp"
#include "cmix/metrics.hpp"
#include "cmix/mixer.hpp"
#include "cmix/ridge.hpp"
#include "cmix/synthgen.hpp"
#include "cmix/trainer.hpp"

namespace cmix {
namespace {

using Clock = std::chrono::steady_clock;

// Runs job(i) for i in [0, n) across OpenMP threads. A DivergenceError is
// caught and stored in the job's record by the job itself; any other
// exception stops the experiment and is rethrown here.
void run_jobs(std::size_t n, const std::function<void(std::size_t)>& job) {
  std::exception_ptr first;
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < n; ++i) {
    try {
      job(i);
    } catch (...) {
#pragma omp critical(cmix_job_error)
      if (!first) first = std::current_exception();
    }
  }
  if (first) std::rethrow_exception(first);
}

ExperimentResult start(const ExperimentConfig& cfg) {
  ExperimentResult r;
  r.kind = to_string(cfg.kind);
  r.config = to_json(cfg);
  return r;
}

void finish(ExperimentResult& r, Clock::time_point t0) {
  r.finalize();
  r.wall_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
}

MixPolicy arm_base(const ExperimentConfig& cfg, const std::string& arm) {
  MixPolicy p = cfg.policy;
  if (auto it = cfg.arm_bandwidths.find(arm); it != cfg.arm_bandwidths.end()) p.bandwidth = it->second;
  return p;
}

SeedRecord train_and_test(const DataSplits& data, const ExperimentConfig& cfg, const std::string& arm,
                          const MixPolicy& base, std::uint64_t seed) {
  SeedRecord rec;
  rec.seed = seed;
  rec.arm = arm;
  try {
    const TrainOutcome out = train_fcn(data.train, data.val, arm_policy(arm, base), cfg.model, seed);
    const RegressionMetrics m = compute_metrics(out.predict(data.test.features), data.test.labels);
    rec.metrics = {{"rmse", m.rmse}, {"mape", m.mape}, {"mse", m.mse}, {"best_epoch", out.best_epoch},
                   {"val_rmse", out.best_val_rmse}};
    if (m.r_defined) rec.metrics["r"] = m.r;
    rec.train_loss = out.train_loss;
    rec.val_rmse = out.val_rmse;
  } catch (const DivergenceError& e) {
    rec.error = e.what();
  }
  return rec;
}

ExperimentResult tabular_arms(const ExperimentConfig& cfg, const DataSplits& shared,
                              const std::function<DataSplits(std::uint64_t)>* per_seed) {
  const auto t0 = Clock::now();
  ExperimentResult result = start(cfg);
  struct Job {
    std::uint64_t seed;
    std::string arm;
  };
  std::vector<Job> jobs;
  for (std::uint64_t seed : cfg.seeds) {
    for (const auto& arm : cfg.arms) jobs.push_back({seed, arm});
  }
  for (const auto& job : jobs) arm_policy(job.arm, cfg.policy);  // reject unknown arms up front
  std::map<std::uint64_t, DataSplits> seeded;
  if (per_seed) {
    for (std::uint64_t seed : cfg.seeds) seeded.emplace(seed, (*per_seed)(seed));
  }
  result.records.resize(jobs.size());
  run_jobs(jobs.size(), [&](std::size_t i) {
    const DataSplits& data = per_seed ? seeded.at(jobs[i].seed) : shared;
    result.records[i] = train_and_test(data, cfg, jobs[i].arm, arm_base(cfg, jobs[i].arm), jobs[i].seed);
  });
  finish(result, t0);
  return result;
}

// Partner of every row drawn from the Gaussian kernel over the embedding rows,
// self excluded, or uniformly when embedding is empty.
std::vector<Index> draw_partners(const Matrix& embedding, Index n, double sigma, Rng& rng) {
  std::vector<Index> partner(static_cast<std::size_t>(n));
  if (embedding.size() == 0) {
    std::uniform_int_distribution<Index> pick(0, n - 2);
    for (Index i = 0; i < n; ++i) {
      Index j = pick(rng);
      partner[static_cast<std::size_t>(i)] = j >= i ? j + 1 : j;
    }
    return partner;
  }
  MixPolicy policy;
  policy.metric = DistanceMetric::kFeature;
  policy.bandwidth = sigma;
  for_each_pair_row(
      embedding, embedding, policy, [](Index i) { return i; },
      [&](const PairDistribution& row) { partner[static_cast<std::size_t>(row.anchor_index)] = row.draw(rng); });
  return partner;
}

std::string failed_checks(const std::vector<RegimeCheck>& checks) {
  std::ostringstream os;
  for (const auto& c : checks) {
    if (!c.ok) os << "  " << c.name << ": lhs " << c.lhs << ", rhs " << c.rhs << "\n";
  }
  return os.str();
}

}  // namespace

void ExperimentResult::finalize() {
  std::sort(records.begin(), records.end(), [](const SeedRecord& a, const SeedRecord& b) {
    return std::tie(a.arm, a.parameter, a.seed) < std::tie(b.arm, b.parameter, b.seed);
  });
  aggregates.clear();
  std::map<std::tuple<std::string, std::optional<double>, std::string>, std::vector<double>> groups;
  for (const auto& r : records) {
    if (!r.error.empty()) continue;
    for (const auto& [metric, v] : r.metrics) groups[{r.arm, r.parameter, metric}].push_back(v);
  }
  for (const auto& [key, values] : groups) {
    Aggregate a;
    std::tie(a.arm, a.parameter, a.metric) = key;
    a.count = static_cast<Index>(values.size());
    a.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - a.mean) * (v - a.mean);
    a.std = values.size() > 1 ? std::sqrt(ss / static_cast<double>(values.size() - 1)) : 0.0;
    aggregates.push_back(a);
  }
}

const Aggregate* ExperimentResult::find(const std::string& arm, const std::string& metric,
                                        std::optional<double> parameter) const {
  for (const auto& a : aggregates) {
    if (a.arm == arm && a.metric == metric && a.parameter == parameter) return &a;
  }
  return nullptr;
}

std::optional<double> ExperimentResult::value(const std::string& arm, std::uint64_t seed, const std::string& metric,
                                              std::optional<double> parameter) const {
  for (const auto& r : records) {
    if (r.arm != arm || r.seed != seed || r.parameter != parameter) continue;
    if (auto it = r.metrics.find(metric); it != r.metrics.end()) return it->second;
  }
  return std::nullopt;
}

std::size_t ExperimentResult::failures() const {
  return static_cast<std::size_t>(
      std::count_if(records.begin(), records.end(), [](const SeedRecord& r) { return !r.error.empty(); }));
}

DataSplits prepare_tabular(const ExperimentConfig& cfg) {
  const Dataset full = load_csv(cfg.dataset.path, cfg.dataset.label_columns, cfg.dataset.domain_column);
  DataSplits s = split(full, cfg.dataset.split);
  if (cfg.dataset.normalize_features) {
    auto [train, scaler] = normalize_minmax(s.train);
    s.train = std::move(train);
    s.val = scaler.transform(s.val);
    s.test = scaler.transform(s.test);
  }
  return s;
}

ExperimentResult run_tabular(const ExperimentConfig& cfg) {
  return tabular_arms(cfg, prepare_tabular(cfg), nullptr);
}

ExperimentResult run_noise(const ExperimentConfig& cfg) {
  const DataSplits clean = prepare_tabular(cfg);
  // Every arm of a seed sees the same corrupted training labels.
  const std::function<DataSplits(std::uint64_t)> noisy = [&](std::uint64_t seed) {
    DataSplits s = clean;
    s.train = inject_label_noise(clean.train, cfg.noise_fraction, derive_seed(seed, 0x4e4f495345ULL));
    return s;
  };
  ExperimentResult r = tabular_arms(cfg, clean, &noisy);
  r.summary["noise_fraction"] = cfg.noise_fraction;
  return r;
}

ExperimentResult run_sweep(const ExperimentConfig& cfg) {
  const auto t0 = Clock::now();
  const bool sigma = cfg.kind != ExperimentKind::kAlphaSweep;
  const DataSplits data = prepare_tabular(cfg);
  ExperimentResult result = start(cfg);
  struct Job {
    std::uint64_t seed;
    std::string arm;
    std::optional<double> value;
  };
  std::vector<Job> jobs;
  for (std::uint64_t seed : cfg.seeds) {
    for (double v : cfg.grid) jobs.push_back({seed, "cmixup", v});
    for (const auto& arm : cfg.reference_arms) jobs.push_back({seed, arm, std::nullopt});
  }
  result.records.resize(jobs.size());
  run_jobs(jobs.size(), [&](std::size_t i) {
    const Job& job = jobs[i];
    MixPolicy base = arm_base(cfg, job.arm);
    if (job.value) (sigma ? base.bandwidth : base.beta_alpha) = *job.value;
    result.records[i] = train_and_test(data, cfg, job.arm, base, job.seed);
    result.records[i].parameter = job.value;
  });
  finish(result, t0);

  nlohmann::json table = nlohmann::json::array();
  for (double v : cfg.grid) {
    const Aggregate* a = result.find("cmixup", "rmse", v);
    table.push_back({{"parameter", v}, {"mean", a ? a->mean : NAN}, {"std", a ? a->std : NAN}});
  }
  result.summary["parameter"] = sigma ? "sigma" : "alpha";
  result.summary["table"] = table;
  for (const auto& arm : cfg.reference_arms) {
    if (const Aggregate* a = result.find(arm, "rmse")) result.summary["reference"][arm] = {{"mean", a->mean}, {"std", a->std}};
  }
  return result;
}

ExperimentResult run_theorem1(const ExperimentConfig& cfg) {
  const auto t0 = Clock::now();
  ExperimentResult result = start(cfg);
  const std::vector<std::string> arms{"mixup", "feature", "cmixup"};
  std::vector<std::vector<SeedRecord>> per_seed(cfg.seeds.size());
  run_jobs(cfg.seeds.size(), [&](std::size_t s) {
    const std::uint64_t seed = cfg.seeds[s];
    SingleIndexSpec spec = cfg.single_index;
    spec.seed = seed;
    const SingleIndexData train = gen_single_index(spec);
    Rng test_rng = make_rng(seed, 3);
    const SingleIndexData test = sample_single_index(spec, train.truth.theta, spec.link, cfg.theorem1.n_test, test_rng);
    const Dataset& ds = train.data;
    const Index n = ds.size();
    for (std::size_t a = 0; a < arms.size(); ++a) {
      Rng rng = make_rng(seed, 10 + a);
      std::vector<Index> partner;
      if (arms[a] == "mixup") partner = draw_partners(Matrix(), n, 1.0, rng);
      if (arms[a] == "feature") partner = draw_partners(ds.features, n, cfg.theorem1.feature_bandwidth, rng);
      if (arms[a] == "cmixup") partner = draw_partners(ds.labels, n, cfg.theorem1.label_bandwidth, rng);
      Matrix xm(n, ds.feature_dim());
      Vector ym(n);
      Index same = 0;
      for (Index i = 0; i < n; ++i) {
        const Index j = partner[static_cast<std::size_t>(i)];
        const double lam = sample_beta(cfg.theorem1.beta_alpha, rng);
        xm.row(i) = lam * ds.features.row(i) + (1.0 - lam) * ds.features.row(j);
        ym[i] = lam * ds.labels(i, 0) + (1.0 - lam) * ds.labels(j, 0);
        same += train.truth.cluster[static_cast<std::size_t>(i)] == train.truth.cluster[static_cast<std::size_t>(j)];
      }
      const Vector theta_hat = ridge_fit(xm, ym, 0.0).theta;
      const Vector t_train = xm * theta_hat;
      const Vector t_test = test.data.features * theta_hat;
      const KernelRegressor g = KernelRegressor::fit(std::span<const double>(t_train.data(), t_train.size()),
                                                     std::span<const double>(ym.data(), ym.size()),
                                                     cfg.theorem1.nw_kernel, cfg.theorem1.nw_bandwidth);
      const Vector pred = g.predict(std::span<const double>(t_test.data(), t_test.size()));
      SeedRecord rec;
      rec.seed = seed;
      rec.arm = arms[a];
      rec.metrics["mse"] = (pred - test.data.labels.col(0)).squaredNorm() / static_cast<double>(pred.size());
      rec.metrics["same_cluster_rate"] = static_cast<double>(same) / static_cast<double>(n);
      rec.metrics["direction_cosine"] = std::abs(theta_hat.dot(train.truth.theta)) / theta_hat.norm();
      per_seed[s].push_back(rec);
    }
    auto& recs = per_seed[s];
    const bool ordered = recs[2].metrics["mse"] < std::min(recs[0].metrics["mse"], recs[1].metrics["mse"]);
    recs[2].metrics["ordered"] = ordered ? 1.0 : 0.0;
  });
  for (auto& recs : per_seed) result.records.insert(result.records.end(), recs.begin(), recs.end());
  finish(result, t0);
  if (const Aggregate* a = result.find("cmixup", "ordered")) result.summary["ordered_fraction"] = a->mean;
  return result;
}

ExperimentResult run_theorem3(const ExperimentConfig& cfg) {
  const auto t0 = Clock::now();
  ExperimentResult result = start(cfg);
  const Theorem3Options& opt = cfg.theorem3;
  const auto checks = check_shift_regime(cfg.shift, opt.ridge_k, opt.constants);
  nlohmann::json regime = nlohmann::json::array();
  bool regime_ok = true;
  for (const auto& c : checks) {
    regime.push_back({{"check", c.name}, {"lhs", c.lhs}, {"rhs", c.rhs}, {"ok", c.ok}});
    regime_ok = regime_ok && c.ok;
  }
  result.summary["regime"] = regime;
  if (!regime_ok && opt.enforce_regime) {
    throw ConfigError("theorem3 regime violates the required inequalities:\n" + failed_checks(checks));
  }

  const std::vector<std::string> arms{"mixup", "feature", "cmixup"};
  std::vector<std::vector<SeedRecord>> per_seed(cfg.seeds.size());
  run_jobs(cfg.seeds.size(), [&](std::size_t s) {
    const std::uint64_t seed = cfg.seeds[s];
    CovariateShiftSpec spec = cfg.shift;
    spec.seed = seed;
    const CovariateShiftData flip = gen_covariate_shift(spec, TestShift::kSignFlip);
    const CovariateShiftData scaled = gen_covariate_shift(spec, TestShift::kScale2);
    const Dataset& ds = flip.train;
    const Index rows = ds.size();
    const double h = shift_bandwidth(ds, spec, opt.constants);
    for (std::size_t a = 0; a < arms.size(); ++a) {
      Rng rng = make_rng(seed, 20 + a);
      std::vector<Index> partner;
      if (arms[a] == "mixup") partner = draw_partners(Matrix(), rows, 1.0, rng);
      if (arms[a] == "feature") {
        partner = draw_partners(ds.features, rows, opt.feature_bandwidth > 0.0 ? opt.feature_bandwidth : h, rng);
      }
      if (arms[a] == "cmixup") partner = draw_partners(ds.labels, rows, h, rng);
      Matrix xm(rows, ds.feature_dim());
      Vector ym(rows);
      for (Index i = 0; i < rows; ++i) {
        const Index j = partner[static_cast<std::size_t>(i)];
        xm.row(i) = opt.lambda * ds.features.row(i) + (1.0 - opt.lambda) * ds.features.row(j);
        ym[i] = opt.lambda * ds.labels(i, 0) + (1.0 - opt.lambda) * ds.labels(j, 0);
      }
      Index twins = 0;
      for (Index i = 0; i < spec.n; ++i) twins += partner[static_cast<std::size_t>(2 * i)] == 2 * i + 1;
      const Vector theta_hat = ridge_fit(xm, ym, opt.ridge_k).theta;
      auto test_mse = [&](const Dataset& t) {
        return (t.features * theta_hat - t.labels.col(0)).squaredNorm() / static_cast<double>(t.size());
      };
      SeedRecord rec;
      rec.seed = seed;
      rec.arm = arms[a];
      rec.metrics["param_error"] = (theta_hat - flip.theta).squaredNorm();
      rec.metrics["test_mse_sign_flip"] = test_mse(flip.test);
      rec.metrics["test_mse_scale2"] = test_mse(scaled.test);
      rec.metrics["twin_pairs"] = static_cast<double>(twins);
      rec.metrics["a_block_sq_norm"] = xm.rightCols(spec.p2).rowwise().squaredNorm().mean();
      rec.metrics["bandwidth"] = h;
      per_seed[s].push_back(rec);
    }
    auto& recs = per_seed[s];
    const double c = recs[2].metrics["param_error"];
    recs[2].metrics["ordered"] = c < std::min(recs[0].metrics["param_error"], recs[1].metrics["param_error"]) ? 1.0 : 0.0;
    recs[2].metrics["twin_bound_met"] =
        recs[2].metrics["twin_pairs"] >= static_cast<double>(spec.n) - static_cast<double>(spec.p1) / 2.0 ? 1.0 : 0.0;
  });
  for (auto& recs : per_seed) result.records.insert(result.records.end(), recs.begin(), recs.end());
  finish(result, t0);
  if (const Aggregate* a = result.find("cmixup", "ordered")) result.summary["ordered_fraction"] = a->mean;
  if (const Aggregate* a = result.find("cmixup", "twin_bound_met")) result.summary["twin_bound_fraction"] = a->mean;
  return result;
}

ExperimentResult run_meta(const ExperimentConfig& cfg) {
  const auto t0 = Clock::now();
  ExperimentResult result = start(cfg);
  auto pairing_of = [](const std::string& arm) {
    if (arm == "maml") return MetaPairing::kNone;
    if (arm == "metamix") return MetaPairing::kUniform;
    if (arm == "metamix-feature") return MetaPairing::kFeature;
    if (arm == "cmetamix") return MetaPairing::kLabel;
    throw ConfigError("unknown meta arm: " + arm);
  };
  for (const auto& arm : cfg.meta_arms) pairing_of(arm);
  struct Job {
    std::size_t seed_index;
    std::string arm;
  };
  std::vector<Job> jobs;
  for (std::size_t s = 0; s < cfg.seeds.size(); ++s) {
    for (const auto& arm : cfg.meta_arms) jobs.push_back({s, arm});
  }
  std::vector<MetaTaskSet> sets;
  for (std::uint64_t seed : cfg.seeds) {
    MetaTaskSpec spec = cfg.meta_tasks;
    spec.seed = seed;
    sets.push_back(gen_meta_tasks(spec));
  }
  result.records.resize(jobs.size());
  run_jobs(jobs.size(), [&](std::size_t i) {
    const std::uint64_t seed = cfg.seeds[jobs[i].seed_index];
    const MetaTaskSet& set = sets[jobs[i].seed_index];
    MetaConfig mc = cfg.meta;
    mc.pairing = pairing_of(jobs[i].arm);
    SeedRecord& rec = result.records[i];
    rec.seed = seed;
    rec.arm = jobs[i].arm;
    try {
      double to_units = 1.0;
      std::vector<MetaTask> train = set.train;
      std::vector<MetaTask> target = set.target;
      if (mc.standardize) {
        const TaskScaling scaling = TaskScaling::fit(set.train);
        train = scaling.apply(set.train);
        target = scaling.apply(set.target);
        to_units = scaling.mse_to_label_units(1.0);
      }
      const MetaTrainResult trained = meta_train(train, mc, seed);
      const MetaEvaluation ev = meta_evaluate(trained.init, target, mc);
      rec.metrics = {{"target_mse", ev.mean_mse * to_units}, {"half_width", ev.half_width * to_units}};
      rec.train_loss = trained.outer_losses;
    } catch (const DivergenceError& e) {
      rec.error = e.what();
    }
  });
  finish(result, t0);
  return result;
}

ExperimentResult run_invariance(const ExperimentConfig& cfg) {
  const auto t0 = Clock::now();
  ExperimentResult result = start(cfg);
  struct Job {
    std::size_t seed_index;
    std::string arm;
  };
  std::vector<Job> jobs;
  for (std::size_t s = 0; s < cfg.seeds.size(); ++s) {
    for (const auto& arm : cfg.arms) jobs.push_back({s, arm});
  }
  for (const auto& job : jobs) arm_policy(job.arm, cfg.policy);
  std::vector<CovariateShiftData> train_sets;
  std::vector<Dataset> eval_sets;
  for (std::uint64_t seed : cfg.seeds) {
    CovariateShiftSpec spec = cfg.shift;
    spec.seed = seed;
    train_sets.push_back(gen_covariate_shift(spec, TestShift::kNone));
    spec.seed = derive_seed(seed, 0x494e56ULL);
    spec.n = cfg.invariance.eval_pairs;
    eval_sets.push_back(gen_covariate_shift(spec, TestShift::kNone).train);
  }
  result.records.resize(jobs.size());
  run_jobs(jobs.size(), [&](std::size_t i) {
    const std::size_t s = jobs[i].seed_index;
    SeedRecord& rec = result.records[i];
    rec.seed = cfg.seeds[s];
    rec.arm = jobs[i].arm;
    try {
      const TrainOutcome out = train_fcn(train_sets[s].train, train_sets[s].test,
                                         arm_policy(jobs[i].arm, arm_base(cfg, jobs[i].arm)), cfg.model, rec.seed);
      const Dataset& ev = eval_sets[s];
      const Matrix hidden = fcn_hidden(out.model, ev.features, out.model.hidden_layers());
      const InvarianceReport inv = invariance_score(hidden, ev.labels.col(0), *ev.domain_ids, cfg.invariance);
      const RegressionMetrics m = compute_metrics(out.predict(train_sets[s].test.features), train_sets[s].test.labels);
      rec.metrics = {{"inv", inv.score}, {"bins_used", inv.bins_used}, {"bins_skipped", inv.bins_skipped},
                     {"test_rmse", m.rmse}};
      rec.train_loss = out.train_loss;
      rec.val_rmse = out.val_rmse;
    } catch (const DivergenceError& e) {
      rec.error = e.what();
    }
  });
  finish(result, t0);
  return result;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  switch (cfg.kind) {
    case ExperimentKind::kTabularTrain:
      return run_tabular(cfg);
    case ExperimentKind::kTheorem1:
      return run_theorem1(cfg);
    case ExperimentKind::kTheorem3:
      return run_theorem3(cfg);
    case ExperimentKind::kMeta:
      return run_meta(cfg);
    case ExperimentKind::kBandwidthSweep:
    case ExperimentKind::kAlphaSweep:
      return run_sweep(cfg);
    case ExperimentKind::kNoiseRobustness:
      return run_noise(cfg);
    case ExperimentKind::kInvariance:
      return run_invariance(cfg);
  }
  throw ConfigError("unhandled experiment kind");
}

}  // namespace cmix
