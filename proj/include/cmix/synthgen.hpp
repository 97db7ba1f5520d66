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

// Seeded generators for the three simulation settings.
//
// Single-index: x = z + xi, y = g(theta^T z) + eps, with z drawn from a
// mixture of K Gaussians centred at k * theta (||theta|| = 1).
// Meta tasks: the same construction with a task-specific monotone link.
// Covariate shift: pairs of examples from two domains sharing the invariant
// block z and carrying opposite spurious blocks a and -a; theta is zero on
// the spurious block so labels ignore it.

#ifndef CMIX_SYNTHGEN_HPP_
#define CMIX_SYNTHGEN_HPP_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cmix/common.hpp"
#include "cmix/data.hpp"

namespace cmix {

/// Monotone link functions.
///   sigmoid-scaled:     a * sigmoid(b * t) + c * t
///   cubic-plus-linear:  a * t^3 + c * t
///   table:              piecewise linear through (knots_t, knots_y),
///                       extended linearly beyond the end knots
struct Link {
  enum class Kind { kSigmoidScaled, kCubicPlusLinear, kTable };
  Kind kind = Kind::kSigmoidScaled;
  double a = 4.0;
  double b = 1.0;
  double c = 0.5;
  std::vector<double> knots_t;
  std::vector<double> knots_y;

  double operator()(double t) const;
  // Throws std::invalid_argument unless the link is strictly increasing by
  // construction (positive coefficients, increasing knots).
  void validate() const;
};

Link::Kind parse_link_kind(const std::string& name);
std::string to_string(Link::Kind kind);

struct SingleIndexSpec {
  Index p = 20;
  Index s = 3;
  int K = 5;
  double sigma_z = 0.05;
  double sigma_xi = 0.2;
  double sigma_eps = 0.01;
  Link link;
  Index N = 5000;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Hidden quantities of a single-index draw, kept out of the Dataset.
struct SingleIndexTruth {
  Vector theta;
  std::vector<int> cluster;  // 1..K
  Matrix clean_z;
};

struct SingleIndexData {
  Dataset data;
  SingleIndexTruth truth;
};

/// s-sparse direction with unit norm; support and values from rng.
Vector draw_sparse_direction(Index p, Index s, Rng& rng);

/// Draws theta from seed stream 0 and N samples from stream 1.
SingleIndexData gen_single_index(const SingleIndexSpec& spec);

/// n fresh samples for a given theta and link (e.g. a test draw).
SingleIndexData sample_single_index(const SingleIndexSpec& spec, const Vector& theta, const Link& link, Index n,
                                    Rng& rng);

struct MetaTaskSpec {
  int M = 200;
  int target_tasks = 500;
  Index support_shots = 15;
  Index query_shots = 15;
  Index p = 10;
  Index s = 3;
  int K = 5;
  double sigma_z = 0.05;
  double sigma_xi = 0.2;
  double sigma_eps = 0.01;
  // Per-task link a * sigmoid(b t) + c t with each coefficient uniform in
  // its [lo, hi] range.
  std::pair<double, double> a_range{1.0, 5.0};
  std::pair<double, double> b_range{0.5, 2.0};
  std::pair<double, double> c_range{0.1, 1.0};
  std::uint64_t seed = 0;

  void validate() const;
};

struct MetaTask {
  Dataset support;
  Dataset query;
  Link link;
};

struct MetaTaskSet {
  std::vector<MetaTask> train;
  std::vector<MetaTask> target;
  Vector theta;
};

MetaTaskSet gen_meta_tasks(const MetaTaskSpec& spec);

enum class TestShift { kNone, kSignFlip, kScale2 };

std::string to_string(TestShift shift);

struct CovariateShiftSpec {
  Index n = 300;  // pairs; the training set has 2n rows
  Index p1 = 40;
  Index p2 = 10;
  double sigma_x = 1.0;
  double sigma_a = 1.0;
  double sigma_eps = 1e-8;
  // Mean of the spurious block in domain 0; domain 1 is centred at -a_mean.
  // Zero in the theorem setting.
  double a_mean = 0.0;
  double theta_norm = 1.0;
  Index n_test = 2000;
  std::uint64_t seed = 0;

  void validate() const;
};

struct CovariateShiftData {
  Dataset train;  // rows 2i and 2i + 1 are the pair, domain ids 0 and 1
  Dataset test;
  Vector theta;
};

/// The test set draws z as in training and the spurious block from the
/// shifted law: sign-flipped (a -> -(a_mean + sigma_a g)) or scaled by 2.
CovariateShiftData gen_covariate_shift(const CovariateShiftSpec& spec, TestShift shift);

/// Universal constants of the covariate-shift regime inequalities.
struct RegimeConstants {
  double c1 = 1.0;
  double c2 = 1.0;
  double c3 = 1.0;
  double c4 = 1.0;
  double c5 = 1.0;
  double c6 = 0.5;
  double delta = 0.1;
};

struct RegimeCheck {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool ok = false;
};

/// Evaluates the variance, noise, penalty and confidence inequalities of the
/// covariate-shift setting at penalty k, with o(1) exponents dropped.
std::vector<RegimeCheck> check_shift_regime(const CovariateShiftSpec& spec, double k, const RegimeConstants& c);

/// l = min over i != j of |y_i - y'_j| on a paired training set.
double min_cross_pair_gap(const Dataset& train);

/// c6 * l / sqrt(log(n^2 / p1)).
double shift_bandwidth(const Dataset& train, const CovariateShiftSpec& spec, const RegimeConstants& c);

}  // namespace cmix

#endif  // CMIX_SYNTHGEN_HPP_
