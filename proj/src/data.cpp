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

#include "cmix/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace cmix {
namespace {

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
    s = s.substr(1, s.size() - 2);
  }
  return s;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(trim(cell));
  // getline drops a trailing empty field.
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

bool is_missing(const std::string& token) { return token.empty() || token == "?"; }

std::optional<double> parse_real(const std::string& token) {
  const char* begin = token.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::vector<Index> permutation(Index n, std::uint64_t seed) {
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

}  // namespace

void Dataset::validate() const {
  if (labels.rows() < 1) throw DataError("dataset must have at least one row");
  if (features.rows() != labels.rows()) {
    throw DataError("feature and label row counts differ: " + std::to_string(features.rows()) +
                    " vs " + std::to_string(labels.rows()));
  }
  if (labels.cols() < 1) throw DataError("dataset must have at least one label column");
  if (domain_ids && static_cast<Index>(domain_ids->size()) != labels.rows()) {
    throw DataError("domain id count does not match row count");
  }
  if (!features.allFinite() || !labels.allFinite()) {
    throw DataError("dataset contains non-finite values");
  }
}

Dataset Dataset::subset(std::span<const Index> rows) const {
  Dataset out;
  out.features.resize(static_cast<Index>(rows.size()), features.cols());
  out.labels.resize(static_cast<Index>(rows.size()), labels.cols());
  if (domain_ids) out.domain_ids.emplace();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const Index src = rows[r];
    if (src < 0 || src >= size()) throw DataError("subset row out of range");
    out.features.row(static_cast<Index>(r)) = features.row(src);
    out.labels.row(static_cast<Index>(r)) = labels.row(src);
    if (domain_ids) out.domain_ids->push_back((*domain_ids)[static_cast<std::size_t>(src)]);
  }
  out.feature_names = feature_names;
  out.label_names = label_names;
  return out;
}

Matrix MinMaxScaler::transform(const Matrix& features) const {
  if (features.cols() != min.size()) throw DimensionError("scaler column count mismatch");
  Matrix out(features.rows(), features.cols());
  for (Index c = 0; c < features.cols(); ++c) {
    const double range = max[c] - min[c];
    if (range > 0.0) {
      out.col(c) = (features.col(c).array() - min[c]) / range;
    } else {
      out.col(c).setZero();
    }
  }
  return out;
}

Dataset MinMaxScaler::transform(const Dataset& ds) const {
  Dataset out = ds;
  out.features = transform(ds.features);
  return out;
}

std::pair<Dataset, MinMaxScaler> normalize_minmax(const Dataset& ds) {
  MinMaxScaler scaler;
  scaler.min = ds.features.colwise().minCoeff().transpose();
  scaler.max = ds.features.colwise().maxCoeff().transpose();
  Dataset out = scaler.transform(ds);
  return {std::move(out), std::move(scaler)};
}

LabelStandardizer LabelStandardizer::fit(const Matrix& labels) {
  LabelStandardizer s;
  const double n = static_cast<double>(labels.rows());
  s.mean = labels.colwise().mean().transpose();
  s.scale.resize(labels.cols());
  for (Index c = 0; c < labels.cols(); ++c) {
    const double var = (labels.col(c).array() - s.mean[c]).square().sum() / n;
    s.scale[c] = var > 0.0 ? std::sqrt(var) : 1.0;
  }
  return s;
}

Matrix LabelStandardizer::forward(const Matrix& labels) const {
  Matrix out = labels;
  for (Index c = 0; c < labels.cols(); ++c) {
    out.col(c) = (labels.col(c).array() - mean[c]) / scale[c];
  }
  return out;
}

Matrix LabelStandardizer::inverse(const Matrix& labels) const {
  Matrix out = labels;
  for (Index c = 0; c < labels.cols(); ++c) {
    out.col(c) = labels.col(c).array() * scale[c] + mean[c];
  }
  return out;
}

void SplitSpec::validate() const {
  if (mode == SplitMode::kFixedCounts) {
    for (Index c : counts) {
      if (c < 0) throw DataError("split counts must be non-negative");
    }
    return;
  }
  for (double f : {train_fraction, val_fraction, test_fraction}) {
    if (f < 0.0 || f > 1.0) throw DataError("split fractions must lie in [0, 1]");
  }
  if (std::abs(train_fraction + val_fraction + test_fraction - 1.0) > 1e-9) {
    throw DataError("split fractions must sum to 1");
  }
}

Dataset load_csv(const std::filesystem::path& path,
                 const std::vector<std::string>& label_columns,
                 const std::optional<std::string>& domain_column) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open CSV file: " + path.string());
  if (label_columns.empty()) throw DataError("at least one label column is required");

  std::string line;
  if (!std::getline(in, line)) throw DataError("CSV file has no header row: " + path.string());
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split_line(line);

  auto find_column = [&](const std::string& name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw DataError("unknown column '" + name + "' in " + path.string());
    return static_cast<std::size_t>(it - header.begin());
  };

  std::vector<std::size_t> label_idx;
  for (const auto& name : label_columns) label_idx.push_back(find_column(name));
  std::optional<std::size_t> domain_idx;
  if (domain_column) domain_idx = find_column(*domain_column);

  std::vector<std::size_t> feature_idx;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const bool is_label = std::find(label_idx.begin(), label_idx.end(), c) != label_idx.end();
    if (!is_label && domain_idx != c) feature_idx.push_back(c);
  }

  // Numeric columns in file order; NaN marks a missing cell until imputation.
  std::vector<std::vector<double>> columns(header.size());
  std::vector<std::string> domain_tokens;
  std::size_t line_no = 1;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const std::vector<std::string> cells = split_line(line);
    ++n;
    if (cells.size() != header.size()) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                      std::to_string(header.size()) + " columns, found " +
                      std::to_string(cells.size()));
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (domain_idx == c) {
        domain_tokens.push_back(cells[c]);
        continue;
      }
      if (is_missing(cells[c])) {
        columns[c].push_back(std::numeric_limits<double>::quiet_NaN());
        continue;
      }
      const auto v = parse_real(cells[c]);
      if (!v) {
        throw DataError(path.string() + ":" + std::to_string(line_no) + ": non-numeric cell '" +
                        cells[c] + "' in column '" + header[c] + "'");
      }
      columns[c].push_back(*v);
    }
  }

  if (n == 0) throw DataError("CSV file has no data rows: " + path.string());

  for (auto& col : columns) {
    if (col.empty()) continue;
    double sum = 0.0;
    std::size_t count = 0;
    for (double v : col) {
      if (!std::isnan(v)) {
        sum += v;
        ++count;
      }
    }
    if (count == 0) throw DataError("column has no numeric values: " + path.string());
    const double mean = sum / static_cast<double>(count);
    for (double& v : col) {
      if (std::isnan(v)) v = mean;
    }
  }

  Dataset ds;
  ds.features.resize(static_cast<Index>(n), static_cast<Index>(feature_idx.size()));
  ds.labels.resize(static_cast<Index>(n), static_cast<Index>(label_idx.size()));
  for (std::size_t j = 0; j < feature_idx.size(); ++j) {
    ds.feature_names.push_back(header[feature_idx[j]]);
    for (std::size_t i = 0; i < n; ++i) {
      ds.features(static_cast<Index>(i), static_cast<Index>(j)) = columns[feature_idx[j]][i];
    }
  }
  for (std::size_t j = 0; j < label_idx.size(); ++j) {
    ds.label_names.push_back(header[label_idx[j]]);
    for (std::size_t i = 0; i < n; ++i) {
      ds.labels(static_cast<Index>(i), static_cast<Index>(j)) = columns[label_idx[j]][i];
    }
  }

  if (domain_idx) {
    // Integer tokens are used as-is; otherwise distinct strings get ids in
    // first-appearance order.
    std::vector<int> ids;
    bool all_integer = true;
    for (const auto& t : domain_tokens) {
      char* end = nullptr;
      const long v = std::strtol(t.c_str(), &end, 10);
      if (t.empty() || *end != '\0') {
        all_integer = false;
        break;
      }
      ids.push_back(static_cast<int>(v));
    }
    if (!all_integer) {
      ids.clear();
      std::map<std::string, int> lookup;
      for (const auto& t : domain_tokens) {
        auto [it, inserted] = lookup.try_emplace(t, static_cast<int>(lookup.size()));
        ids.push_back(it->second);
      }
    }
    ds.domain_ids = std::move(ids);
  }
  ds.validate();
  return ds;
}

void save_csv(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write CSV file: " + path.string());
  out.precision(17);
  std::vector<std::string> names;
  for (Index c = 0; c < ds.feature_dim(); ++c) {
    names.push_back(static_cast<std::size_t>(c) < ds.feature_names.size()
                        ? ds.feature_names[static_cast<std::size_t>(c)]
                        : "x" + std::to_string(c));
  }
  for (Index c = 0; c < ds.label_dim(); ++c) {
    names.push_back(static_cast<std::size_t>(c) < ds.label_names.size()
                        ? ds.label_names[static_cast<std::size_t>(c)]
                        : "y" + std::to_string(c));
  }
  if (ds.domain_ids) names.emplace_back("domain");
  for (std::size_t i = 0; i < names.size(); ++i) out << (i ? "," : "") << names[i];
  out << '\n';
  for (Index r = 0; r < ds.size(); ++r) {
    bool first = true;
    auto emit = [&](double v) {
      out << (first ? "" : ",") << v;
      first = false;
    };
    for (Index c = 0; c < ds.feature_dim(); ++c) emit(ds.features(r, c));
    for (Index c = 0; c < ds.label_dim(); ++c) emit(ds.labels(r, c));
    if (ds.domain_ids) out << ',' << (*ds.domain_ids)[static_cast<std::size_t>(r)];
    out << '\n';
  }
  if (!out) throw DataError("failed writing CSV file: " + path.string());
}

DataSplits split(const Dataset& ds, const SplitSpec& spec) {
  spec.validate();
  const Index n = ds.size();
  std::vector<Index> train, val, test;

  switch (spec.mode) {
    case SplitMode::kRandom: {
      const auto order = permutation(n, spec.seed);
      const Index n_test = std::llround(spec.test_fraction * static_cast<double>(n));
      const Index n_val = std::llround(spec.val_fraction * static_cast<double>(n));
      const Index n_train = n - n_test - n_val;
      if (n_train < 0) throw DataError("split fractions leave no training rows");
      train.assign(order.begin(), order.begin() + n_train);
      val.assign(order.begin() + n_train, order.begin() + n_train + n_val);
      test.assign(order.begin() + n_train + n_val, order.end());
      break;
    }
    case SplitMode::kFixedCounts: {
      const auto [n_train, n_val, n_test] = spec.counts;
      if (n_train + n_val + n_test > n) {
        throw DataError("fixed split counts (" + std::to_string(n_train + n_val + n_test) +
                        ") exceed dataset size " + std::to_string(n));
      }
      const auto order = permutation(n, spec.seed);
      train.assign(order.begin(), order.begin() + n_train);
      val.assign(order.begin() + n_train, order.begin() + n_train + n_val);
      test.assign(order.begin() + n_train + n_val, order.begin() + n_train + n_val + n_test);
      break;
    }
    case SplitMode::kByDomain: {
      if (!ds.domain_ids) throw DataError("by-domain split requires domain ids");
      std::set<int> unique(ds.domain_ids->begin(), ds.domain_ids->end());
      std::vector<int> domains(unique.begin(), unique.end());
      Rng rng(spec.seed);
      std::shuffle(domains.begin(), domains.end(), rng);
      const auto count_for = [&](double fraction) -> std::size_t {
        if (fraction <= 0.0) return 0;
        return std::max<std::size_t>(
            1, static_cast<std::size_t>(std::llround(fraction * static_cast<double>(domains.size()))));
      };
      const std::size_t n_test = count_for(spec.test_fraction);
      const std::size_t n_val = count_for(spec.val_fraction);
      if (n_test + n_val >= domains.size() && spec.train_fraction > 0.0) {
        throw DataError("not enough domains for a disjoint by-domain split");
      }
      std::map<int, int> side;  // 0 train, 1 val, 2 test
      for (std::size_t i = 0; i < domains.size(); ++i) {
        side[domains[i]] = i < n_test ? 2 : (i < n_test + n_val ? 1 : 0);
      }
      for (Index r = 0; r < n; ++r) {
        switch (side[(*ds.domain_ids)[static_cast<std::size_t>(r)]]) {
          case 0: train.push_back(r); break;
          case 1: val.push_back(r); break;
          default: test.push_back(r); break;
        }
      }
      break;
    }
  }
  return {ds.subset(train), ds.subset(val), ds.subset(test)};
}

Dataset inject_label_noise(const Dataset& ds, double noise_std_fraction, std::uint64_t seed) {
  if (noise_std_fraction < 0.0) throw DataError("noise fraction must be non-negative");
  Dataset out = ds;
  const Index n = ds.size();
  if (n < 2 || noise_std_fraction == 0.0) return out;
  Vector stddev(ds.label_dim());
  for (Index c = 0; c < ds.label_dim(); ++c) {
    const double mean = ds.labels.col(c).mean();
    stddev[c] = std::sqrt((ds.labels.col(c).array() - mean).square().sum() / static_cast<double>(n - 1));
  }
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Index r = 0; r < n; ++r) {
    for (Index c = 0; c < ds.label_dim(); ++c) {
      out.labels(r, c) += noise_std_fraction * stddev[c] * normal(rng);
    }
  }
  return out;
}

}  // namespace cmix
