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

#ifndef CMIX_DATA_HPP_
#define CMIX_DATA_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cmix/common.hpp"

namespace cmix {

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Rows of (features, labels, optional domain id).
///
/// A plain value type; copies are independent and nothing mutates a
/// dataset after construction, so instances can be shared across threads.
struct Dataset {
  Matrix features;  // n x d_x
  Matrix labels;    // n x d_y
  std::optional<std::vector<int>> domain_ids;
  std::vector<std::string> feature_names;
  std::vector<std::string> label_names;

  Index size() const { return labels.rows(); }
  Index feature_dim() const { return features.cols(); }
  Index label_dim() const { return labels.cols(); }

  // Throws DataError when a structural invariant does not hold.
  void validate() const;

  Dataset subset(std::span<const Index> rows) const;
};

struct MinMaxScaler {
  Vector min;
  Vector max;

  // Affine map fitted on training data. Constant columns map to 0 and values
  // outside the fitted range extrapolate.
  Dataset transform(const Dataset& ds) const;
  Matrix transform(const Matrix& features) const;
};

std::pair<Dataset, MinMaxScaler> normalize_minmax(const Dataset& ds);

/// z-score for labels. The FCN trainer fits on standardized labels and maps
/// predictions back with inverse() before computing metrics.
struct LabelStandardizer {
  Vector mean;
  Vector scale;

  static LabelStandardizer fit(const Matrix& labels);
  Matrix forward(const Matrix& labels) const;
  Matrix inverse(const Matrix& labels) const;
};

enum class SplitMode { kRandom, kByDomain, kFixedCounts };

struct SplitSpec {
  double train_fraction = 0.8;
  double val_fraction = 0.1;
  double test_fraction = 0.1;
  std::uint64_t seed = 0;
  SplitMode mode = SplitMode::kRandom;
  // Only read in kFixedCounts mode: train, val, test row counts.
  std::array<Index, 3> counts{0, 0, 0};

  void validate() const;
};

struct DataSplits {
  Dataset train;
  Dataset val;
  Dataset test;
};

/// Reads a comma-separated file with a header row. Every column that is not a
/// label or the domain column becomes a feature. Empty cells and "?" are
/// missing and get the column mean.
Dataset load_csv(const std::filesystem::path& path,
                 const std::vector<std::string>& label_columns,
                 const std::optional<std::string>& domain_column = std::nullopt);

void save_csv(const Dataset& ds, const std::filesystem::path& path);

DataSplits split(const Dataset& ds, const SplitSpec& spec);

/// Adds N(0, (fraction * std_c)^2) noise to every label entry of column c.
Dataset inject_label_noise(const Dataset& ds, double noise_std_fraction, std::uint64_t seed);

}  // namespace cmix

#endif  // CMIX_DATA_HPP_
