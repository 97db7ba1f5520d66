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

// Result files. result.json holds the config echo, every per-seed record and
// the aggregates; records.csv is one row per (arm, parameter, seed, metric)
// for plotting. Sweeps additionally write sweep.csv with one row per grid
// point and the reference-arm means as extra columns.

#ifndef CMIX_PERSIST_HPP_
#define CMIX_PERSIST_HPP_

#include <filesystem>

#include <json.hpp>

#include "cmix/experiments.hpp"

namespace cmix {

class PersistError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

nlohmann::json to_json(const ExperimentResult& result);
ExperimentResult result_from_json(const nlohmann::json& j);

/// Writes the result files into `dir`, creating it if needed. Returns the
/// path of result.json.
std::filesystem::path persist(const ExperimentResult& result, const std::filesystem::path& dir);

ExperimentResult load_result(const std::filesystem::path& file);

}  // namespace cmix

#endif  // CMIX_PERSIST_HPP_
