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

#ifndef CMIX_RIDGE_HPP_
#define CMIX_RIDGE_HPP_

#include "cmix/common.hpp"

namespace cmix {

class SingularSystemError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RidgeModel {
  Vector theta;
  double penalty = 0.0;

  Vector predict(const Matrix& X) const { return X * theta; }
};

/// theta = (X^T X + k I)^{-1} X^T y via Cholesky, falling back to a
/// full-pivot LU when the system is not numerically positive definite.
/// Throws SingularSystemError for a rank-deficient design at k = 0.
RidgeModel ridge_fit(const Matrix& X, const Vector& y, double k);

}  // namespace cmix

#endif  // CMIX_RIDGE_HPP_
