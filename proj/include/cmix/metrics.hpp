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

#ifndef CMIX_METRICS_HPP_
#define CMIX_METRICS_HPP_

#include "cmix/common.hpp"

namespace cmix {

struct RegressionMetrics {
  double rmse = 0.0;
  double mse = 0.0;
  // Mean of |pred - truth| / |truth| over entries with truth != 0.
  double mape = 0.0;
  Index mape_excluded = 0;
  // Pearson correlation of the flattened matrices. NaN with r_defined unset
  // when either side is constant.
  double r = 0.0;
  bool r_defined = true;
};

RegressionMetrics compute_metrics(const Matrix& pred, const Matrix& truth);

double pearson_r(const Vector& a, const Vector& b);

}  // namespace cmix

#endif  // CMIX_METRICS_HPP_
