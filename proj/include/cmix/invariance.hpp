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

// Domain-invariance score of a hidden representation.
//
// Examples are split into equal-count label bins. Within each bin and for
// each domain, a Gaussian KDE (Scott's rule) of a one-dimensional projection
// of the representation is evaluated on a shared grid, and the KL divergence
// is summed over all ordered domain pairs. The score averages over bins and
// divides by the squared domain count. Lower is more invariant.

#ifndef CMIX_INVARIANCE_HPP_
#define CMIX_INVARIANCE_HPP_

#include <span>
#include <vector>

#include "cmix/common.hpp"
#include "cmix/config.hpp"

namespace cmix {

struct InvarianceReport {
  double score = 0.0;
  int bins_used = 0;
  int bins_skipped = 0;      // fewer than two examples in some domain
  Index groups_skipped = 0;  // (bin, domain) groups with fewer than two examples
};

/// Projection of each row onto the first principal direction of the
/// centred rows.
Vector first_pc_projection(const Matrix& hidden);

/// Scott's rule: sample std * n^(-1/5).
double scott_bandwidth(std::span<const double> samples);

/// KL(p || q) by the rectangle rule on a uniform grid; both densities are
/// renormalized on the grid first.
double grid_kl(const Vector& p, const Vector& q, double step);

InvarianceReport invariance_score_1d(const Vector& projection, const Vector& labels, const std::vector<int>& domains,
                                     const InvarianceOptions& opts);

InvarianceReport invariance_score(const Matrix& hidden, const Vector& labels, const std::vector<int>& domains,
                                  const InvarianceOptions& opts);

}  // namespace cmix

#endif  // CMIX_INVARIANCE_HPP_
