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

// Command-line front end: one subcommand per experiment kind.
//
//   cmix train      --config airfoil.json [--seed 0 --seed 1] [--out dir] [--dump-pairs pairs.csv]
//   cmix theorem1   --config theorem1.json
//   cmix theorem3   --config theorem3.json
//   cmix meta       --config meta.json
//   cmix sweep      --config sweep.json [--param sigma|alpha] [--grid 0.1,1,10]
//   cmix invariance --config invariance.json
//   cmix noise      --config noise.json [--fraction 0.3]
//
// Results go to --out, else $CMIX_OUTPUT_DIR, else the config's output
// field. Exit status: 0 success, 1 runtime failure, 2 bad usage or config,
// 3 finished with some failed seeds. Failures print one JSON object on
// stderr.

#include <cstdint>
#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cmix/config.hpp"
#include "cmix/data.hpp"
#include "cmix/experiments.hpp"
#include "cmix/mixer.hpp"
#include "cmix/persist.hpp"
#include "cmix/trainer.hpp"

namespace {

enum Exit { kOk = 0, kRuntime = 1, kUsage = 2, kPartial = 3 };

int fail(Exit code, const std::string& type, const std::string& message) {
  nlohmann::json j = {{"status", "error"}, {"error_type", type}, {"message", message}};
  std::cerr << j.dump() << '\n';
  return code;
}

void print_summary(const cmix::ExperimentResult& r) {
  std::cout << r.kind << ": " << r.records.size() << " records, " << std::fixed << std::setprecision(1)
            << r.wall_seconds << " s\n";
  for (const auto& a : r.aggregates) {
    std::cout << "  " << std::left << std::setw(16) << a.arm;
    if (a.parameter) std::cout << " @" << std::setw(10) << std::defaultfloat << *a.parameter;
    std::cout << std::setw(22) << a.metric << std::defaultfloat << std::setprecision(6) << a.mean << " +- " << a.std
              << " (n=" << a.count << ")\n";
  }
  if (!r.summary.empty()) std::cout << "  summary: " << r.summary.dump() << '\n';
}

struct Options {
  std::string config;
  std::vector<std::uint64_t> seeds;
  std::string out;
  std::string dump_pairs;
  std::string param;
  std::vector<double> grid;
  std::optional<double> fraction;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"C-Mixup regression augmentation experiments"};
  app.set_version_flag("--version", std::string(CMIX_VERSION));
  app.require_subcommand(1);
  Options opt;

  struct Command {
    const char* name;
    const char* help;
    cmix::ExperimentKind kind;
  };
  const std::vector<Command> commands{
      {"train", "train FCN arms on a tabular dataset", cmix::ExperimentKind::kTabularTrain},
      {"theorem1", "single-index simulation", cmix::ExperimentKind::kTheorem1},
      {"theorem3", "covariate-shift ridge simulation", cmix::ExperimentKind::kTheorem3},
      {"meta", "meta-learning on synthetic tasks", cmix::ExperimentKind::kMeta},
      {"sweep", "bandwidth or alpha sweep", cmix::ExperimentKind::kBandwidthSweep},
      {"invariance", "representation invariance on covariate-shift data", cmix::ExperimentKind::kInvariance},
      {"noise", "label-noise robustness", cmix::ExperimentKind::kNoiseRobustness},
  };
  std::vector<CLI::App*> subs;
  for (const auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("--config", opt.config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", opt.seeds, "seed; repeat to run several (replaces the config list)");
    sub->add_option("--out", opt.out, "output directory");
    if (c.kind == cmix::ExperimentKind::kTabularTrain) {
      sub->add_option("--dump-pairs", opt.dump_pairs, "write the training pair table as CSV and exit");
    }
    if (c.kind == cmix::ExperimentKind::kBandwidthSweep) {
      sub->add_option("--param", opt.param, "swept parameter")->check(CLI::IsMember({"sigma", "alpha"}));
      sub->add_option("--grid", opt.grid, "grid values")->delimiter(',');
    }
    if (c.kind == cmix::ExperimentKind::kNoiseRobustness) {
      sub->add_option("--fraction", opt.fraction, "noise std as a fraction of the label std");
    }
    subs.push_back(sub);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  std::size_t which = 0;
  while (!subs[which]->parsed()) ++which;
  const Command& cmd = commands[which];

  cmix::ExperimentConfig cfg;
  try {
    cfg = cmix::load_config(opt.config);
    const bool sweep_kind =
        cfg.kind == cmix::ExperimentKind::kBandwidthSweep || cfg.kind == cmix::ExperimentKind::kAlphaSweep;
    if (cmd.kind != cmix::ExperimentKind::kBandwidthSweep || !sweep_kind) cfg.kind = cmd.kind;
    if (opt.param == "sigma") cfg.kind = cmix::ExperimentKind::kBandwidthSweep;
    if (opt.param == "alpha") cfg.kind = cmix::ExperimentKind::kAlphaSweep;
    if (!opt.grid.empty()) cfg.grid = opt.grid;
    if (!opt.seeds.empty()) cfg.seeds = opt.seeds;
    if (opt.fraction) cfg.noise_fraction = *opt.fraction;
    cfg.validate();
  } catch (const std::exception& e) {
    return fail(kUsage, "config", e.what());
  }

  std::string out_dir = opt.out;
  if (out_dir.empty()) {
    const char* env = std::getenv("CMIX_OUTPUT_DIR");
    out_dir = env && *env ? env : cfg.output;
  }

  try {
    if (!opt.dump_pairs.empty()) {
      const cmix::DataSplits data = cmix::prepare_tabular(cfg);
      cmix::MixPolicy policy = cfg.policy;
      policy.scope = cmix::PairingScope::kFull;
      if (policy.needs_representations()) {
        return fail(kUsage, "config", "pair dump needs a label or feature metric");
      }
      cmix::write_pair_table_csv(cmix::build_pair_table(data.train, policy), data.train, policy, opt.dump_pairs);
      std::cout << "wrote " << opt.dump_pairs << '\n';
      return kOk;
    }
    const cmix::ExperimentResult result = cmix::run_experiment(cfg);
    const auto path = cmix::persist(result, out_dir);
    print_summary(result);
    std::cout << "wrote " << path.string() << '\n';
    if (result.failures() > 0) {
      nlohmann::json failed = nlohmann::json::array();
      for (const auto& r : result.records) {
        if (!r.error.empty()) failed.push_back({{"seed", r.seed}, {"arm", r.arm}, {"error", r.error}});
      }
      std::cerr << nlohmann::json{{"status", "partial"}, {"failed", failed}}.dump() << '\n';
      return kPartial;
    }
  } catch (const cmix::ConfigError& e) {
    return fail(kUsage, "config", e.what());
  } catch (const cmix::DataError& e) {
    return fail(kRuntime, "data", e.what());
  } catch (const cmix::PersistError& e) {
    return fail(kRuntime, "io", e.what());
  } catch (const std::exception& e) {
    return fail(kRuntime, "runtime", e.what());
  }
  return kOk;
}
