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

#include "cmix/persist.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace cmix {
namespace {

using nlohmann::json;

json record_json(const SeedRecord& r) {
  json j = {{"seed", r.seed}, {"arm", r.arm}, {"metrics", r.metrics}};
  if (r.parameter) j["parameter"] = *r.parameter;
  if (!r.train_loss.empty()) j["train_loss"] = r.train_loss;
  if (!r.val_rmse.empty()) j["val_rmse"] = r.val_rmse;
  if (!r.error.empty()) j["error"] = r.error;
  return j;
}

SeedRecord record_from_json(const json& j) {
  SeedRecord r;
  r.seed = j.at("seed").get<std::uint64_t>();
  r.arm = j.at("arm").get<std::string>();
  r.metrics = j.at("metrics").get<std::map<std::string, double>>();
  if (j.contains("parameter")) r.parameter = j.at("parameter").get<double>();
  r.train_loss = j.value("train_loss", std::vector<double>{});
  r.val_rmse = j.value("val_rmse", std::vector<double>{});
  r.error = j.value("error", std::string{});
  return r;
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw PersistError("cannot write " + path.string());
  out << std::setprecision(17);
  return out;
}

double number_or_nan(const json& j) { return j.is_number() ? j.get<double>() : std::nan(""); }

std::string param_text(const std::optional<double>& p) {
  if (!p) return "";
  std::ostringstream os;
  os << std::setprecision(17) << *p;
  return os.str();
}

}  // namespace

json to_json(const ExperimentResult& result) {
  json records = json::array();
  for (const auto& r : result.records) records.push_back(record_json(r));
  json aggregates = json::array();
  for (const auto& a : result.aggregates) {
    json j = {{"arm", a.arm}, {"metric", a.metric}, {"mean", a.mean}, {"std", a.std}, {"count", a.count}};
    if (a.parameter) j["parameter"] = *a.parameter;
    aggregates.push_back(j);
  }
  return {{"format", "cmix-result"},
          {"format_version", 1},
          {"library_version", result.version},
          {"kind", result.kind},
          {"config", result.config},
          {"records", records},
          {"aggregates", aggregates},
          {"summary", result.summary},
          {"wall_seconds", result.wall_seconds}};
}

ExperimentResult result_from_json(const json& j) {
  if (j.value("format", "") != "cmix-result") throw PersistError("not a cmix result record");
  ExperimentResult r;
  r.version = j.at("library_version").get<std::string>();
  r.kind = j.at("kind").get<std::string>();
  r.config = j.at("config");
  for (const auto& rec : j.at("records")) r.records.push_back(record_from_json(rec));
  r.summary = j.value("summary", json::object());
  r.wall_seconds = j.value("wall_seconds", 0.0);
  r.finalize();
  return r;
}

std::filesystem::path persist(const ExperimentResult& result, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (fs::exists(dir, ec) && !fs::is_directory(dir, ec)) {
    throw PersistError("output path exists and is not a directory: " + dir.string());
  }
  fs::create_directories(dir, ec);
  if (ec) throw PersistError("cannot create output directory " + dir.string() + ": " + ec.message());

  json j = to_json(result);
  j["created_at"] = utc_now();
  const fs::path json_path = dir / "result.json";
  {
    std::ofstream out = open_for_write(json_path);
    out << j.dump(2) << '\n';
    if (!out) throw PersistError("write failed: " + json_path.string());
  }
  {
    const fs::path csv = dir / "records.csv";
    std::ofstream out = open_for_write(csv);
    out << "arm,parameter,seed,metric,value\n";
    for (const auto& r : result.records) {
      for (const auto& [metric, v] : r.metrics) {
        out << r.arm << ',' << param_text(r.parameter) << ',' << r.seed << ',' << metric << ',' << v << '\n';
      }
    }
    if (!out) throw PersistError("write failed: " + csv.string());
  }
  if (result.summary.contains("table")) {
    const fs::path csv = dir / "sweep.csv";
    std::ofstream out = open_for_write(csv);
    std::vector<std::string> refs;
    if (result.summary.contains("reference")) {
      for (const auto& item : result.summary.at("reference").items()) refs.push_back(item.key());
    }
    out << result.summary.value("parameter", std::string("parameter")) << ",mean,std";
    for (const auto& r : refs) out << ',' << r << "_mean," << r << "_std";
    out << '\n';
    for (const auto& row : result.summary.at("table")) {
      out << number_or_nan(row.at("parameter")) << ',' << number_or_nan(row.at("mean")) << ','
          << number_or_nan(row.at("std"));
      for (const auto& r : refs) {
        const auto& ref = result.summary.at("reference").at(r);
        out << ',' << number_or_nan(ref.at("mean")) << ',' << number_or_nan(ref.at("std"));
      }
      out << '\n';
    }
    if (!out) throw PersistError("write failed: " + csv.string());
  }
  return json_path;
}

ExperimentResult load_result(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw PersistError("cannot read " + file.string());
  try {
    return result_from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw PersistError("malformed result file " + file.string() + ": " + e.what());
  }
}

}  // namespace cmix
