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

#include "cmix/metrics.hpp"

#include <cmath>
#include <limits>

namespace cmix {

double pearson_r(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw DimensionError("pearson_r: length mismatch");
  const Vector da = a.array() - a.mean();
  const Vector db = b.array() - b.mean();
  const double den = std::sqrt(da.squaredNorm() * db.squaredNorm());
  if (!(den > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return da.dot(db) / den;
}

RegressionMetrics compute_metrics(const Matrix& pred, const Matrix& truth) {
  if (pred.rows() != truth.rows() || pred.cols() != truth.cols()) {
    throw DimensionError("metrics: prediction and truth shapes differ");
  }
  if (pred.size() == 0) throw std::invalid_argument("metrics: empty input");
  RegressionMetrics m;
  const auto n = static_cast<double>(pred.size());
  m.mse = (pred - truth).squaredNorm() / n;
  m.rmse = std::sqrt(m.mse);

  double ape = 0.0;
  Index counted = 0;
  for (Index i = 0; i < truth.size(); ++i) {
    const double t = truth.data()[i];
    if (t == 0.0) {
      ++m.mape_excluded;
      continue;
    }
    ape += std::abs(pred.data()[i] - t) / std::abs(t);
    ++counted;
  }
  m.mape = counted > 0 ? ape / static_cast<double>(counted) : std::numeric_limits<double>::quiet_NaN();

  const Vector p = Eigen::Map<const Vector>(pred.data(), pred.size());
  const Vector t = Eigen::Map<const Vector>(truth.data(), truth.size());
  m.r = pearson_r(p, t);
  m.r_defined = !std::isnan(m.r);
  return m;
}

}  // namespace cmix
