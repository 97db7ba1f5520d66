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

#include "cmix/config.hpp"

#include <fstream>
#include <set>
#include <utility>

namespace cmix {
namespace {

using nlohmann::json;

// Reads the keys of one JSON object, rejecting keys that were never asked
// for once the section is closed.
class Section {
 public:
  Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw ConfigError("config: '" + name_ + "' must be an object");
  }

  template <typename T>
  void get(const char* key, T& field) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      field = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError("config: bad value for " + name_ + "." + key + ": " + e.what());
    }
  }

  template <typename T, typename Parse>
  void get_enum(const char* key, T& field, Parse parse) {
    std::string text;
    get(key, text);
    if (text.empty()) return;
    try {
      field = parse(text);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("config: " + name_ + "." + key + ": " + e.what());
    }
  }

  const json* child(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  void close() const {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) throw ConfigError("config: unknown key " + name_ + "." + item.key());
    }
  }

 private:
  const json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

SplitMode parse_split_mode(const std::string& s) {
  if (s == "random") return SplitMode::kRandom;
  if (s == "by-domain") return SplitMode::kByDomain;
  if (s == "fixed-counts") return SplitMode::kFixedCounts;
  throw std::invalid_argument("unknown split mode: " + s);
}

std::string to_string(SplitMode m) {
  switch (m) {
    case SplitMode::kRandom:
      return "random";
    case SplitMode::kByDomain:
      return "by-domain";
    case SplitMode::kFixedCounts:
      return "fixed-counts";
  }
  return "?";
}

void read_dataset(const json& j, DatasetSource& d) {
  Section s(j, "dataset");
  s.get("path", d.path);
  s.get("label_columns", d.label_columns);
  std::string domain;
  s.get("domain_column", domain);
  if (!domain.empty()) d.domain_column = domain;
  s.get("normalize_features", d.normalize_features);
  if (const json* sp = s.child("split")) {
    Section t(*sp, "dataset.split");
    t.get("train", d.split.train_fraction);
    t.get("val", d.split.val_fraction);
    t.get("test", d.split.test_fraction);
    t.get("seed", d.split.seed);
    t.get_enum("mode", d.split.mode, parse_split_mode);
    std::vector<Index> counts;
    t.get("counts", counts);
    if (!counts.empty()) {
      if (counts.size() != 3) throw ConfigError("config: dataset.split.counts needs three entries");
      d.split.counts = {counts[0], counts[1], counts[2]};
    }
    t.close();
  }
  s.close();
}

void read_policy(const json& j, MixPolicy& p) {
  Section s(j, "policy");
  s.get_enum("metric", p.metric, [](const std::string& v) { return parse_metric(v); });
  s.get("bandwidth", p.bandwidth);
  s.get("alpha", p.beta_alpha);
  s.get("site_layer", p.site_layer);
  s.get_enum("scope", p.scope, [](const std::string& v) { return parse_scope(v); });
  s.get("exclude_self", p.exclude_self);
  s.close();
}

void read_model(const json& j, ModelConfig& m) {
  Section s(j, "model");
  s.get("hidden", m.hidden);
  s.get_enum("activation", m.activation, parse_activation);
  s.get("lr", m.lr);
  s.get("batch_size", m.batch_size);
  s.get("epochs", m.epochs);
  s.get("standardize_labels", m.standardize_labels);
  s.get("representation_refresh", m.representation_refresh);
  s.close();
}

void read_link(const json& j, Link& l) {
  Section s(j, "link");
  s.get_enum("kind", l.kind, parse_link_kind);
  s.get("a", l.a);
  s.get("b", l.b);
  s.get("c", l.c);
  s.get("knots_t", l.knots_t);
  s.get("knots_y", l.knots_y);
  s.close();
}

void read_single_index(const json& j, SingleIndexSpec& si, Theorem1Options& t1) {
  Section s(j, "theorem1");
  s.get("p", si.p);
  s.get("s", si.s);
  s.get("K", si.K);
  s.get("sigma_z", si.sigma_z);
  s.get("sigma_xi", si.sigma_xi);
  s.get("sigma_eps", si.sigma_eps);
  s.get("N", si.N);
  if (const json* link = s.child("link")) read_link(*link, si.link);
  s.get("label_bandwidth", t1.label_bandwidth);
  s.get("feature_bandwidth", t1.feature_bandwidth);
  s.get("alpha", t1.beta_alpha);
  s.get_enum("nw_kernel", t1.nw_kernel, parse_smoothing_kernel);
  s.get("nw_bandwidth", t1.nw_bandwidth);
  s.get("n_test", t1.n_test);
  s.close();
}

void read_shift(const json& j, CovariateShiftSpec& cs, Theorem3Options& t3) {
  Section s(j, "theorem3");
  s.get("n", cs.n);
  s.get("p1", cs.p1);
  s.get("p2", cs.p2);
  s.get("sigma_x", cs.sigma_x);
  s.get("sigma_a", cs.sigma_a);
  s.get("sigma_eps", cs.sigma_eps);
  s.get("a_mean", cs.a_mean);
  s.get("theta_norm", cs.theta_norm);
  s.get("n_test", cs.n_test);
  s.get("ridge_k", t3.ridge_k);
  s.get("lambda", t3.lambda);
  s.get("feature_bandwidth", t3.feature_bandwidth);
  s.get("enforce_regime", t3.enforce_regime);
  if (const json* c = s.child("constants")) {
    Section t(*c, "theorem3.constants");
    RegimeConstants& k = t3.constants;
    t.get("c1", k.c1);
    t.get("c2", k.c2);
    t.get("c3", k.c3);
    t.get("c4", k.c4);
    t.get("c5", k.c5);
    t.get("c6", k.c6);
    t.get("delta", k.delta);
    t.close();
  }
  s.close();
}

void read_meta(const json& j, MetaTaskSpec& ts, MetaConfig& mc, std::vector<std::string>& arms) {
  Section s(j, "meta");
  s.get("M", ts.M);
  s.get("target_tasks", ts.target_tasks);
  s.get("p", ts.p);
  s.get("s", ts.s);
  s.get("K", ts.K);
  s.get("sigma_z", ts.sigma_z);
  s.get("sigma_xi", ts.sigma_xi);
  s.get("sigma_eps", ts.sigma_eps);
  s.get("a_range", ts.a_range);
  s.get("b_range", ts.b_range);
  s.get("c_range", ts.c_range);
  s.get("support_shots", ts.support_shots);
  s.get("query_shots", ts.query_shots);
  mc.support_shots = ts.support_shots;
  mc.query_shots = ts.query_shots;
  s.get("outer_lr", mc.outer_lr);
  s.get("inner_lr", mc.inner_lr);
  s.get("inner_steps", mc.inner_steps);
  s.get("alpha", mc.beta_alpha);
  s.get("bandwidth", mc.bandwidth);
  s.get("meta_batch_size", mc.meta_batch_size);
  s.get("iterations", mc.max_iterations);
  s.get("hidden", mc.hidden);
  s.get_enum("activation", mc.activation, parse_activation);
  s.get("standardize", mc.standardize);
  s.get("arms", arms);
  s.close();
}

void read_invariance(const json& j, InvarianceOptions& o) {
  Section s(j, "invariance");
  s.get("bins", o.bins);
  s.get("grid_points", o.grid_points);
  s.get("grid_span", o.grid_span);
  s.get("eval_pairs", o.eval_pairs);
  s.close();
}

json link_json(const Link& l) {
  json j = {{"kind", to_string(l.kind)}, {"a", l.a}, {"b", l.b}, {"c", l.c}};
  if (l.kind == Link::Kind::kTable) {
    j["knots_t"] = l.knots_t;
    j["knots_y"] = l.knots_y;
  }
  return j;
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kTabularTrain:
      return "tabular-train";
    case ExperimentKind::kTheorem1:
      return "theorem1";
    case ExperimentKind::kTheorem3:
      return "theorem3";
    case ExperimentKind::kMeta:
      return "meta";
    case ExperimentKind::kBandwidthSweep:
      return "bandwidth-sweep";
    case ExperimentKind::kAlphaSweep:
      return "alpha-sweep";
    case ExperimentKind::kNoiseRobustness:
      return "noise-robustness";
    case ExperimentKind::kInvariance:
      return "invariance";
  }
  return "?";
}

ExperimentKind parse_experiment_kind(const std::string& name) {
  for (auto k : {ExperimentKind::kTabularTrain, ExperimentKind::kTheorem1, ExperimentKind::kTheorem3,
                 ExperimentKind::kMeta, ExperimentKind::kBandwidthSweep, ExperimentKind::kAlphaSweep,
                 ExperimentKind::kNoiseRobustness, ExperimentKind::kInvariance}) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown experiment kind: " + name);
}

void ExperimentConfig::validate() const {
  if (seeds.empty()) throw ConfigError("config: seed list is empty");
  try {
    policy.validate();
    switch (kind) {
      case ExperimentKind::kTheorem1:
        single_index.validate();
        break;
      case ExperimentKind::kTheorem3:
      case ExperimentKind::kInvariance:
        shift.validate();
        break;
      case ExperimentKind::kMeta:
        meta_tasks.validate();
        meta.validate();
        break;
      default:
        if (dataset.path.empty()) throw ConfigError("config: dataset.path is required for " + to_string(kind));
        if (dataset.label_columns.empty()) throw ConfigError("config: dataset.label_columns is empty");
        dataset.split.validate();
        if (model.epochs < 1 || model.batch_size < 1 || !(model.lr > 0.0)) {
          throw ConfigError("config: model needs epochs >= 1, batch_size >= 1, lr > 0");
        }
        if (arms.empty()) throw ConfigError("config: arm list is empty");
        break;
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if ((kind == ExperimentKind::kBandwidthSweep || kind == ExperimentKind::kAlphaSweep) && grid.empty()) {
    throw ConfigError("config: sweep grid is empty");
  }
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig cfg;
  Section s(j, "config");
  s.get_enum("kind", cfg.kind, parse_experiment_kind);
  if (const json* d = s.child("dataset")) read_dataset(*d, cfg.dataset);
  if (const json* p = s.child("policy")) read_policy(*p, cfg.policy);
  if (const json* m = s.child("model")) read_model(*m, cfg.model);
  s.get("arms", cfg.arms);
  s.get("arm_bandwidths", cfg.arm_bandwidths);
  s.get("seeds", cfg.seeds);
  s.get("output", cfg.output);
  s.get("grid", cfg.grid);
  s.get("reference_arms", cfg.reference_arms);
  s.get("noise_fraction", cfg.noise_fraction);
  if (const json* t = s.child("theorem1")) read_single_index(*t, cfg.single_index, cfg.theorem1);
  if (const json* t = s.child("theorem3")) read_shift(*t, cfg.shift, cfg.theorem3);
  if (const json* m = s.child("meta")) read_meta(*m, cfg.meta_tasks, cfg.meta, cfg.meta_arms);
  if (const json* i = s.child("invariance")) read_invariance(*i, cfg.invariance);
  s.close();
  return cfg;
}

json to_json(const ExperimentConfig& cfg) {
  const auto& d = cfg.dataset;
  json dataset = {{"path", d.path},
                  {"label_columns", d.label_columns},
                  {"normalize_features", d.normalize_features},
                  {"split",
                   {{"train", d.split.train_fraction},
                    {"val", d.split.val_fraction},
                    {"test", d.split.test_fraction},
                    {"seed", d.split.seed},
                    {"mode", to_string(d.split.mode)},
                    {"counts", std::vector<Index>(d.split.counts.begin(), d.split.counts.end())}}}};
  if (d.domain_column) dataset["domain_column"] = *d.domain_column;
  const auto& p = cfg.policy;
  const auto& m = cfg.model;
  const auto& si = cfg.single_index;
  const auto& t1 = cfg.theorem1;
  const auto& cs = cfg.shift;
  const auto& t3 = cfg.theorem3;
  const auto& c = t3.constants;
  const auto& ts = cfg.meta_tasks;
  const auto& mc = cfg.meta;
  return {
      {"kind", to_string(cfg.kind)},
      {"dataset", dataset},
      {"policy",
       {{"metric", to_string(p.metric)},
        {"bandwidth", p.bandwidth},
        {"alpha", p.beta_alpha},
        {"site_layer", p.site_layer},
        {"scope", to_string(p.scope)},
        {"exclude_self", p.exclude_self}}},
      {"model",
       {{"hidden", m.hidden},
        {"activation", to_string(m.activation)},
        {"lr", m.lr},
        {"batch_size", m.batch_size},
        {"epochs", m.epochs},
        {"standardize_labels", m.standardize_labels},
        {"representation_refresh", m.representation_refresh}}},
      {"arms", cfg.arms},
      {"arm_bandwidths", cfg.arm_bandwidths},
      {"seeds", cfg.seeds},
      {"output", cfg.output},
      {"grid", cfg.grid},
      {"reference_arms", cfg.reference_arms},
      {"noise_fraction", cfg.noise_fraction},
      {"theorem1",
       {{"p", si.p},
        {"s", si.s},
        {"K", si.K},
        {"sigma_z", si.sigma_z},
        {"sigma_xi", si.sigma_xi},
        {"sigma_eps", si.sigma_eps},
        {"N", si.N},
        {"link", link_json(si.link)},
        {"label_bandwidth", t1.label_bandwidth},
        {"feature_bandwidth", t1.feature_bandwidth},
        {"alpha", t1.beta_alpha},
        {"nw_kernel", to_string(t1.nw_kernel)},
        {"nw_bandwidth", t1.nw_bandwidth},
        {"n_test", t1.n_test}}},
      {"theorem3",
       {{"n", cs.n},
        {"p1", cs.p1},
        {"p2", cs.p2},
        {"sigma_x", cs.sigma_x},
        {"sigma_a", cs.sigma_a},
        {"sigma_eps", cs.sigma_eps},
        {"a_mean", cs.a_mean},
        {"theta_norm", cs.theta_norm},
        {"n_test", cs.n_test},
        {"ridge_k", t3.ridge_k},
        {"lambda", t3.lambda},
        {"feature_bandwidth", t3.feature_bandwidth},
        {"enforce_regime", t3.enforce_regime},
        {"constants",
         {{"c1", c.c1}, {"c2", c.c2}, {"c3", c.c3}, {"c4", c.c4}, {"c5", c.c5}, {"c6", c.c6}, {"delta", c.delta}}}}},
      {"meta",
       {{"M", ts.M},
        {"target_tasks", ts.target_tasks},
        {"p", ts.p},
        {"s", ts.s},
        {"K", ts.K},
        {"sigma_z", ts.sigma_z},
        {"sigma_xi", ts.sigma_xi},
        {"sigma_eps", ts.sigma_eps},
        {"a_range", ts.a_range},
        {"b_range", ts.b_range},
        {"c_range", ts.c_range},
        {"support_shots", ts.support_shots},
        {"query_shots", ts.query_shots},
        {"outer_lr", mc.outer_lr},
        {"inner_lr", mc.inner_lr},
        {"inner_steps", mc.inner_steps},
        {"alpha", mc.beta_alpha},
        {"bandwidth", mc.bandwidth},
        {"meta_batch_size", mc.meta_batch_size},
        {"iterations", mc.max_iterations},
        {"hidden", mc.hidden},
        {"activation", to_string(mc.activation)},
        {"standardize", mc.standardize},
        {"arms", cfg.meta_arms}}},
      {"invariance",
       {{"bins", cfg.invariance.bins},
        {"grid_points", cfg.invariance.grid_points},
        {"grid_span", cfg.invariance.grid_span},
        {"eval_pairs", cfg.invariance.eval_pairs}}},
  };
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  json j;
  try {
    j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError("config: " + path.string() + " is not valid JSON: " + e.what());
  }
  ExperimentConfig cfg = config_from_json(j);
  cfg.validate();
  return cfg;
}

}  // namespace cmix
