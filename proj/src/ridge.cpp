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

#include "cmix/ridge.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

namespace cmix {

RidgeModel ridge_fit(const Matrix& X, const Vector& y, double k) {
  if (X.rows() < 1) throw DimensionError("ridge_fit needs at least one row");
  if (X.rows() != y.size()) throw DimensionError("ridge_fit: X and y row counts differ");
  if (k < 0.0) throw std::invalid_argument("ridge penalty must be non-negative");

  const Index d = X.cols();
  Eigen::MatrixXd gram = X.transpose() * X;
  gram.diagonal().array() += k;
  const Eigen::VectorXd rhs = X.transpose() * y;

  RidgeModel model;
  model.penalty = k;
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  // A numerically rank-deficient Gram matrix can still factor with a tiny
  // positive pivot; route those through the rank-revealing solver.
  const auto pivots = llt.matrixLLT().diagonal();
  const bool well_posed = llt.info() == Eigen::Success && d > 0 &&
                          pivots.minCoeff() > 1e-7 * pivots.maxCoeff();
  if (well_posed) {
    model.theta = llt.solve(rhs);
    if (model.theta.allFinite()) return model;
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
  if (lu.rank() < d) {
    throw SingularSystemError("ridge system is singular (rank " + std::to_string(lu.rank()) + " < " +
                              std::to_string(d) + "); use a positive penalty");
  }
  model.theta = lu.solve(rhs);
  return model;
}

}  // namespace cmix
