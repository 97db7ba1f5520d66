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

// Acceptance runner. Prints one line per criterion:
//
//   [PASS] 3 theorem-1 ordering: ordered 20/20 (need >= 18), ...
//   [FAIL] 1 airfoil: dataset missing (data/airfoil.csv)
//
// Exit status is 0 when every failing criterion is listed in --expect-fail,
// 1 otherwise. Criteria listed there that pass are reported but do not fail
// the run.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cmix/config.hpp"
#include "cmix/experiments.hpp"
#include "cmix/fcn.hpp"
#include "cmix/invariance.hpp"
#include "cmix/kernel_regressor.hpp"
#include "cmix/mixer.hpp"
#include "cmix/persist.hpp"
#include "cmix/ridge.hpp"
#include "cmix/synthgen.hpp"
#include "cmix/trainer.hpp"

namespace fs = std::filesystem;
using namespace cmix;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

struct Context {
  fs::path root;
  fs::path out;  // empty: do not persist
};

std::string fmt(double v, int precision = 4) {
  std::ostringstream s;
  s << std::setprecision(precision) << v;
  return s.str();
}

ExperimentConfig load(const Context& ctx, const std::string& name) { return load_config(ctx.root / "configs" / name); }

void maybe_persist(const Context& ctx, const ExperimentResult& r, const std::string& name) {
  if (!ctx.out.empty()) persist(r, ctx.out / name);
}

double per_seed_seconds(const ExperimentResult& r, std::size_t seeds) {
  return r.wall_seconds / static_cast<double>(std::max<std::size_t>(seeds, 1));
}

// Dataset path: environment override, else the config's path relative to the
// repository root.
std::optional<fs::path> resolve_dataset(const Context& ctx, ExperimentConfig& cfg, const char* env) {
  fs::path p = cfg.dataset.path;
  if (const char* v = std::getenv(env); v != nullptr && *v != '\0') p = v;
  if (p.is_relative()) p = ctx.root / p;
  if (!fs::exists(p)) return std::nullopt;
  cfg.dataset.path = p.string();
  return p;
}

// Per-seed values of one metric for one arm; nullopt if any seed failed.
std::optional<std::vector<double>> seed_values(const ExperimentResult& r, const std::string& arm,
                                               const std::vector<std::uint64_t>& seeds, const std::string& metric,
                                               std::optional<double> parameter = std::nullopt) {
  std::vector<double> out;
  for (std::uint64_t s : seeds) {
    auto v = r.value(arm, s, metric, parameter);
    if (!v || !std::isfinite(*v)) return std::nullopt;
    out.push_back(*v);
  }
  return out;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_sd(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

Verdict tabular(const Context& ctx, const std::string& config, const char* env, double cap, double time_limit) {
  ExperimentConfig cfg = load(ctx, config);
  const std::string declared = cfg.dataset.path;
  if (!resolve_dataset(ctx, cfg, env)) return {false, "dataset missing (" + declared + ", or set " + env + ")"};
  cfg.arms = {"erm", "cmixup"};
  const ExperimentResult r = run_experiment(cfg);
  maybe_persist(ctx, r, config.substr(0, config.find('.')));
  const auto erm = seed_values(r, "erm", cfg.seeds, "rmse");
  const auto cm = seed_values(r, "cmixup", cfg.seeds, "rmse");
  if (!erm || !cm) return {false, "a seed failed to train"};
  const double t = per_seed_seconds(r, cfg.seeds.size());
  const bool ok = mean(*cm) < mean(*erm) && mean(*cm) <= cap && t < time_limit;
  return {ok, "C-Mixup RMSE " + fmt(mean(*cm)) + " vs ERM " + fmt(mean(*erm)) + " (cap " + fmt(cap) + "), " +
                  fmt(t, 3) + " s/seed (limit " + fmt(time_limit) + ")"};
}

Verdict criterion1(const Context& ctx) { return tabular(ctx, "airfoil.json", "CMIX_AIRFOIL_CSV", 3.0, 120.0); }
Verdict criterion2(const Context& ctx) { return tabular(ctx, "no2.json", "CMIX_NO2_CSV", 0.55, 60.0); }

Verdict criterion3(const Context& ctx) {
  const ExperimentConfig cfg = load(ctx, "theorem1.json");
  const ExperimentResult r = run_experiment(cfg);
  maybe_persist(ctx, r, "theorem1");
  const auto ordered = seed_values(r, "cmixup", cfg.seeds, "ordered");
  const auto same = seed_values(r, "cmixup", cfg.seeds, "same_cluster_rate");
  const auto vanilla = seed_values(r, "mixup", cfg.seeds, "same_cluster_rate");
  if (!ordered || !same || !vanilla) return {false, "a seed failed"};
  const double n = static_cast<double>(cfg.seeds.size());
  const double hits = mean(*ordered) * n;
  const double k = static_cast<double>(cfg.single_index.K);
  const double t = per_seed_seconds(r, cfg.seeds.size());
  const bool ok = hits >= 0.9 * n && mean(*same) >= 0.95 && std::abs(mean(*vanilla) - 1.0 / k) <= 0.05 && t < 30.0;
  return {ok, "ordered " + fmt(hits) + "/" + fmt(n) + " (need >= 90%), same-cluster C-Mixup " + fmt(mean(*same)) +
                  " (need >= 0.95), mixup " + fmt(mean(*vanilla)) + " (need 1/K +- 0.05), " + fmt(t, 3) + " s/seed"};
}

Verdict criterion4(const Context& ctx) {
  const ExperimentConfig cfg = load(ctx, "theorem3.json");
  const ExperimentResult r = run_experiment(cfg);
  maybe_persist(ctx, r, "theorem3");
  const auto ordered = seed_values(r, "cmixup", cfg.seeds, "ordered");
  const auto twins = seed_values(r, "cmixup", cfg.seeds, "twin_pairs");
  const auto met = seed_values(r, "cmixup", cfg.seeds, "twin_bound_met");
  if (!ordered || !twins || !met) return {false, "a seed failed"};
  const double n = static_cast<double>(cfg.seeds.size());
  const double hits = mean(*ordered) * n;
  const double bound = static_cast<double>(cfg.shift.n) - static_cast<double>(cfg.shift.p1) / 2.0;
  const double min_twins = *std::min_element(twins->begin(), twins->end());
  const bool every_seed = std::all_of(met->begin(), met->end(), [](double v) { return v == 1.0; });
  const double t = per_seed_seconds(r, cfg.seeds.size());
  const bool ok = hits >= 0.9 * n && every_seed && t < 10.0;
  return {ok, "ordered " + fmt(hits) + "/" + fmt(n) + " (need >= 90%), min pairs " + fmt(min_twins) + " (need >= " +
                  fmt(bound) + " in every seed), " + fmt(t, 3) + " s/seed"};
}

Verdict criterion5(const Context& ctx) {
  ExperimentConfig cfg = load(ctx, "airfoil_sweep.json");
  const std::string declared = cfg.dataset.path;
  if (!resolve_dataset(ctx, cfg, "CMIX_AIRFOIL_CSV")) {
    return {false, "dataset missing (" + declared + ", or set CMIX_AIRFOIL_CSV)"};
  }
  cfg.grid = {1e-6, 1e6};
  const ExperimentResult r = run_experiment(cfg);
  maybe_persist(ctx, r, "airfoil_sweep");
  const std::string vanilla = cfg.reference_arms.size() > 1 ? cfg.reference_arms[1] : "mixup";
  const auto lo = seed_values(r, "cmixup", cfg.seeds, "rmse", 1e-6);
  const auto hi = seed_values(r, "cmixup", cfg.seeds, "rmse", 1e6);
  const auto erm = seed_values(r, "erm", cfg.seeds, "rmse");
  const auto mix = seed_values(r, vanilla, cfg.seeds, "rmse");
  if (!lo || !hi || !erm || !mix) return {false, "a seed failed to train"};
  auto pooled = [](const std::vector<double>& a, const std::vector<double>& b) {
    return std::sqrt(0.5 * (sample_sd(a) * sample_sd(a) + sample_sd(b) * sample_sd(b)));
  };
  const double gap_hi = std::abs(mean(*hi) - mean(*mix));
  const double gap_lo = std::abs(mean(*lo) - mean(*erm));
  const double tol_hi = 2.0 * pooled(*hi, *mix);
  const double tol_lo = 2.0 * pooled(*lo, *erm);
  return {gap_hi <= tol_hi && gap_lo <= tol_lo,
          "sigma=1e6 vs " + vanilla + " gap " + fmt(gap_hi) + " (tol " + fmt(tol_hi) + "), sigma=1e-6 vs erm gap " +
              fmt(gap_lo) + " (tol " + fmt(tol_lo) + ")"};
}

// Compact re-run of the property suites.
Verdict criterion6(const Context&) {
  std::vector<std::string> broken;
  auto check = [&](bool ok, const std::string& what) {
    if (!ok) broken.push_back(what);
  };
  Rng rng(6);
  std::normal_distribution<double> normal;

  {
    std::vector<double> d(25);
    for (auto& v : d) v = std::abs(5.0 * normal(rng));
    const auto row = kernel_pmf(d, 0.8, false, -1);
    double sum = 0.0;
    for (double p : row.pmf) sum += p;
    check(std::abs(sum - 1.0) <= 1e-12, "pmf normalization");
    bool mono = true;
    for (std::size_t a = 0; a < d.size(); ++a) {
      for (std::size_t b = 0; b < d.size(); ++b) mono = mono && (d[a] >= d[b] || row.pmf[a] >= row.pmf[b]);
    }
    check(mono, "pmf monotonicity");
    std::vector<double> scaled;
    for (double v : d) scaled.push_back(9.0 * v);
    const auto row3 = kernel_pmf(scaled, 2.4, false, -1);
    double dev = 0.0;
    for (std::size_t k = 0; k < d.size(); ++k) dev = std::max(dev, std::abs(row3.pmf[k] - row.pmf[k]));
    check(dev <= 1e-12, "pmf scale equivariance");
  }
  {
    const Vector xi = Vector::Random(4), xj = Vector::Random(4), yi = Vector::Random(2), yj = Vector::Random(2);
    const auto [x1, y1] = mix_pair(xi, yi, xj, yj, 1.0);
    const auto [xa, ya] = mix_pair(xi, yi, xj, yj, 0.3);
    const auto [xb, yb] = mix_pair(xj, yj, xi, yi, 0.7);
    check(x1 == xi && y1 == yi && xa.isApprox(xb, 1e-15) && ya.isApprox(yb, 1e-15), "mix_pair identities");
  }
  {
    int bad = 0;
    for (int c = 0; c < 10; ++c) {
      const std::vector<Index> sizes{2 + c % 3, 4 + c, 3, 1 + c % 2};
      FcnModel m = FcnModel::create(sizes, c % 2 ? Activation::kLeakyRelu : Activation::kRelu, rng);
      MixedBatch b;
      b.anchor_x = Matrix::Random(5, sizes[0]);
      b.partner_x = Matrix::Random(5, sizes[0]);
      b.lambda = (Vector::Random(5).array() + 1.0) / 2.0;
      b.target = Matrix::Random(5, sizes.back());
      b.site_layer = c % 3;
      const Vector g = flatten(fcn_backward(m, b).gradients);
      const Vector theta = m.flatten();
      Vector num(theta.size());
      for (Index k = 0; k < theta.size(); ++k) {
        Vector p = theta;
        p[k] += 1e-6;
        m.assign(p);
        const double up = fcn_backward(m, b).loss;
        p[k] -= 2e-6;
        m.assign(p);
        num[k] = (up - fcn_backward(m, b).loss) / 2e-6;
      }
      bad += (g - num).norm() / std::max(1e-12, g.norm() + num.norm()) > 1e-4;
    }
    check(bad == 0, "FCN finite differences (" + std::to_string(bad) + "/10 off)");
  }
  {
    Matrix x = Matrix::Random(60, 7);
    Vector y = Vector::Random(60);
    const RidgeModel m = ridge_fit(x, y, 0.3);
    Matrix gram = x.transpose() * x;
    gram.diagonal().array() += 0.3;
    check((gram * m.theta - x.transpose() * y).norm() <= 1e-8, "ridge residual");
  }
  {
    std::vector<double> t(100), y(100), q(200);
    for (auto& v : t) v = normal(rng);
    for (auto& v : y) v = normal(rng);
    for (auto& v : q) v = 3.0 * normal(rng);
    const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
    bool inside = true;
    for (auto k : {SmoothingKernel::kUniform, SmoothingKernel::kGaussian}) {
      const Vector p = KernelRegressor::fit(t, y, k, 0.2).predict(q);
      inside = inside && p.minCoeff() >= *lo && p.maxCoeff() <= *hi;
    }
    check(inside, "kernel regressor range");
  }
  {
    SingleIndexSpec spec;
    spec.N = 2000;
    spec.seed = 3;
    const auto a = gen_single_index(spec);
    const auto b = gen_single_index(spec);
    check(a.data.features == b.data.features && a.data.labels == b.data.labels, "generator determinism");
    const Vector proj = a.data.features * a.truth.theta;
    bool stats = true;
    for (int k = 1; k <= spec.K; ++k) {
      double s = 0.0;
      int c = 0;
      for (Index i = 0; i < spec.N; ++i) {
        if (a.truth.cluster[static_cast<std::size_t>(i)] == k) {
          s += proj[i];
          ++c;
        }
      }
      const double sd = std::hypot(spec.sigma_z, spec.sigma_xi);
      stats = stats && c > 0 && std::abs(s / c - k) <= 3.0 * sd / std::sqrt(static_cast<double>(c));
    }
    check(stats, "generator sample statistics");
  }
  if (broken.empty()) return {true, "pmf, mix_pair, FCN gradients, ridge, kernel regressor, generators all green"};
  std::string d = "broken:";
  for (const auto& b : broken) d += " " + b + ";";
  return {false, d};
}

Verdict criterion7(const Context& ctx) {
  const ExperimentConfig cfg = load(ctx, "meta.json");
  const ExperimentResult r = run_experiment(cfg);
  maybe_persist(ctx, r, "meta");
  const auto maml = seed_values(r, "maml", cfg.seeds, "target_mse");
  const auto mm = seed_values(r, "metamix", cfg.seeds, "target_mse");
  const auto cm = seed_values(r, "cmetamix", cfg.seeds, "target_mse");
  if (!maml || !mm || !cm) return {false, "a seed failed (" + std::to_string(r.failures()) + " errors)"};
  int wins = 0;
  for (std::size_t i = 0; i < cm->size(); ++i) wins += (*cm)[i] <= (*mm)[i];
  const double n = static_cast<double>(cfg.seeds.size());
  const double t = per_seed_seconds(r, cfg.seeds.size());
  const bool ok = wins >= 0.7 * n && mean(*cm) < mean(*maml) && mean(*mm) < mean(*maml) && t < 300.0;
  return {ok, "C-MetaMix <= MetaMix in " + std::to_string(wins) + "/" + fmt(n) + " (need >= 70%); means MAML " +
                  fmt(mean(*maml)) + ", MetaMix " + fmt(mean(*mm)) + ", C-MetaMix " + fmt(mean(*cm)) +
                  " (both must be below MAML), " + fmt(t, 3) + " s/seed"};
}

Verdict criterion8(const Context& ctx) {
  const ExperimentConfig cfg = load(ctx, "invariance.json");
  const ExperimentResult r = run_experiment(cfg);
  maybe_persist(ctx, r, "invariance");
  const auto erm = seed_values(r, "erm", cfg.seeds, "inv");
  const auto cm = seed_values(r, "cmixup", cfg.seeds, "inv");
  if (!erm || !cm) return {false, "a seed failed"};
  int wins = 0;
  for (std::size_t i = 0; i < cm->size(); ++i) wins += (*cm)[i] < (*erm)[i];

  // Identical-distribution control: every representation appears once in
  // each domain with the same label.
  Rng rng(8);
  const Index half = 500;
  Matrix base(half, 16);
  std::normal_distribution<double> normal;
  for (Index i = 0; i < base.size(); ++i) base.data()[i] = normal(rng);
  Matrix hidden(2 * half, 16);
  Vector labels(2 * half);
  std::vector<int> domains(static_cast<std::size_t>(2 * half));
  for (Index i = 0; i < half; ++i) {
    hidden.row(2 * i) = hidden.row(2 * i + 1) = base.row(i);
    labels[2 * i] = labels[2 * i + 1] = normal(rng);
    domains[static_cast<std::size_t>(2 * i)] = 0;
    domains[static_cast<std::size_t>(2 * i + 1)] = 1;
  }
  const double control = invariance_score(hidden, labels, domains, cfg.invariance).score;
  const double n = static_cast<double>(cfg.seeds.size());
  const bool ok = wins >= 0.8 * n && std::abs(control) <= 1e-6;
  return {ok, "Inv C-Mixup < ERM in " + std::to_string(wins) + "/" + fmt(n) + " (need >= 80%); mean Inv ERM " +
                  fmt(mean(*erm)) + ", C-Mixup " + fmt(mean(*cm)) + "; control " + fmt(control) + " (need |.| <= 1e-6)"};
}

Verdict criterion9(const Context& ctx) {
  ExperimentConfig cfg = load(ctx, "airfoil_noise.json");
  const std::string declared = cfg.dataset.path;
  if (!resolve_dataset(ctx, cfg, "CMIX_AIRFOIL_CSV")) {
    return {false, "dataset missing (" + declared + ", or set CMIX_AIRFOIL_CSV)"};
  }
  const ExperimentResult r = run_experiment(cfg);
  maybe_persist(ctx, r, "airfoil_noise");
  const auto erm = seed_values(r, "erm", cfg.seeds, "rmse");
  const auto cm = seed_values(r, "cmixup", cfg.seeds, "rmse");
  if (!erm || !cm) return {false, "a seed failed to train"};
  return {mean(*cm) < mean(*erm), "noise " + fmt(cfg.noise_fraction) + " of label std: C-Mixup RMSE " +
                                      fmt(mean(*cm)) + " vs ERM " + fmt(mean(*erm))};
}

std::set<int> parse_ids(const std::string& text) {
  std::set<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.insert(std::stoi(item));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Runs the acceptance criteria and prints one PASS/FAIL line each."};
  std::string root = CMIX_SOURCE_DIR;
  std::string only;
  std::string expect_fail;
  std::string out;
  app.add_option("--root", root, "Repository root holding configs/ and data/");
  app.add_option("--only", only, "Comma-separated criterion ids to run (default all)");
  app.add_option("--expect-fail", expect_fail, "Comma-separated criterion ids known to fail");
  app.add_option("--out", out, "Directory to persist each experiment's results");
  CLI11_PARSE(app, argc, argv);

  const Context ctx{root, out};
  const std::vector<std::pair<std::string, std::function<Verdict(const Context&)>>> criteria{
      {"airfoil reproduction", criterion1},  {"no2 reproduction", criterion2},
      {"theorem-1 ordering", criterion3},    {"theorem-3 ordering", criterion4},
      {"bandwidth limits", criterion5},      {"property suites", criterion6},
      {"meta-learning ordering", criterion7}, {"invariance diagnostic", criterion8},
      {"label-noise robustness", criterion9},
  };
  const std::set<int> selected = parse_ids(only);
  const std::set<int> expected = parse_ids(expect_fail);
  int unexpected = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i].second(ctx);
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::string note;
    if (!v.pass && expected.count(id)) note = " [expected]";
    if (v.pass && expected.count(id)) note = " [unexpected pass]";
    if (!v.pass && !expected.count(id)) ++unexpected;
    std::cout << (v.pass ? "[PASS] " : "[FAIL] ") << id << ' ' << criteria[i].first << ": " << v.detail << " ("
              << fmt(secs, 3) << " s)" << note << std::endl;
  }
  return unexpected == 0 ? 0 : 1;
}
