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

#include "cmix/kernel_regressor.hpp"

#include <stdexcept>
#include <string>

namespace cmix {

KernelRegressor KernelRegressor::fit(std::span<const double> t, std::span<const double> y, SmoothingKernel kernel,
                                     double bandwidth) {
  if (t.empty()) throw std::invalid_argument("kernel regressor needs at least one support point");
  if (t.size() != y.size()) throw DimensionError("kernel regressor: t and y lengths differ");
  if (!(bandwidth > 0.0)) throw std::invalid_argument("kernel regressor bandwidth must be positive");
  KernelRegressor reg;
  reg.support_t.assign(t.begin(), t.end());
  reg.support_y.assign(y.begin(), y.end());
  reg.kernel = kernel;
  reg.bandwidth = bandwidth;
  return reg;
}

double KernelRegressor::predict(double t) const { return predict(std::span<const double>(&t, 1))[0]; }

Vector KernelRegressor::predict(std::span<const double> t) const {
  return kernels::nadaraya_watson(support_t, support_y, t, kernel, bandwidth);
}

double kernel_predict(const KernelRegressor& reg, double t) { return reg.predict(t); }

SmoothingKernel parse_smoothing_kernel(const std::string& name) {
  if (name == "uniform") return SmoothingKernel::kUniform;
  if (name == "gaussian") return SmoothingKernel::kGaussian;
  throw std::invalid_argument("unknown smoothing kernel: " + name);
}

std::string to_string(SmoothingKernel kernel) {
  return kernel == SmoothingKernel::kUniform ? "uniform" : "gaussian";
}

}  // namespace cmix
