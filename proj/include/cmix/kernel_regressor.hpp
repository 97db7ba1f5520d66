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

#ifndef CMIX_KERNEL_REGRESSOR_HPP_
#define CMIX_KERNEL_REGRESSOR_HPP_

#include <span>
#include <vector>

#include "cmix/common.hpp"
#include "cmix/kernels.hpp"

namespace cmix {

using kernels::SmoothingKernel;

/// Nadaraya-Watson estimate of a one-dimensional link function from
/// (t, y) support points.
struct KernelRegressor {
  std::vector<double> support_t;
  std::vector<double> support_y;
  SmoothingKernel kernel = SmoothingKernel::kGaussian;
  double bandwidth = 1.0;

  static KernelRegressor fit(std::span<const double> t, std::span<const double> y, SmoothingKernel kernel,
                             double bandwidth);

  double predict(double t) const;
  Vector predict(std::span<const double> t) const;
};

double kernel_predict(const KernelRegressor& reg, double t);

SmoothingKernel parse_smoothing_kernel(const std::string& name);
std::string to_string(SmoothingKernel kernel);

}  // namespace cmix

#endif  // CMIX_KERNEL_REGRESSOR_HPP_
