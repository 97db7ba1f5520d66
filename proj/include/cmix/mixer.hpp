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

// Pair sampling and interpolation.
//
// A pair table holds, for every anchor row i, a probability mass function
// over mix partners j proportional to exp(-d(i, j) / (2 sigma^2)), where d is
// a squared Euclidean distance between label vectors (C-Mixup), feature
// vectors, hidden representations, or concatenations of those. The uniform
// metric gives vanilla mixup. Partners are drawn from the table, an
// interpolation ratio is drawn from Beta(alpha, alpha), and the two examples
// are mixed linearly in inputs and labels.

#ifndef CMIX_MIXER_HPP_
#define CMIX_MIXER_HPP_

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cmix/common.hpp"
#include "cmix/data.hpp"

namespace cmix {

enum class DistanceMetric {
  kLabel,
  kFeature,
  kFeatureConcatLabel,
  kRepresentation,
  kRepresentationConcatLabel,
  kUniform,
};

enum class PairingScope { kFull, kBatch };

std::string to_string(DistanceMetric metric);
DistanceMetric parse_metric(std::string_view name);
std::string to_string(PairingScope scope);
PairingScope parse_scope(std::string_view name);

struct MixPolicy {
  DistanceMetric metric = DistanceMetric::kLabel;
  double bandwidth = 1.0;   // sigma of the sampling kernel
  double beta_alpha = 2.0;  // lambda ~ Beta(alpha, alpha)
  int site_layer = 0;       // 0 mixes inputs, k >= 1 mixes after hidden layer k
  PairingScope scope = PairingScope::kFull;
  bool exclude_self = true;  // only read for scope = kFull

  void validate() const;
  bool needs_representations() const;
};

class DegenerateAnchorError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Sampling distribution over mix partners for one anchor.
struct PairDistribution {
  Index anchor_index = 0;
  std::vector<Index> candidate_indices;
  std::vector<double> pmf;
  std::vector<double> cdf;  // running sum of pmf, filled by finalize()

  void finalize();
  // Draws a candidate (a dataset row index, not a position).
  Index draw(Rng& rng) const;
};

using PairTable = std::vector<PairDistribution>;

struct Pairing {
  Index anchor = 0;
  Index partner = 0;
  double lambda = 1.0;
};

struct MixedExample {
  Vector x;
  Vector y;
  Index partner = 0;
  double lambda = 1.0;
};

/// (i, j) = ||A_i - B_j||^2; OpenMP-parallel over rows of A.
Matrix pairwise_sq_distance(const Matrix& A, const Matrix& B);

/// Normalized Gaussian kernel over one row of distances. Candidates are all
/// positions of dist_row except self_index when exclude_self is set.
PairDistribution kernel_pmf(std::span<const double> dist_row, double sigma, bool exclude_self,
                            Index self_index);

/// Matrix whose rows are compared to build distances for `metric`. Uniform
/// has no embedding and returns an empty matrix.
Matrix metric_embedding(const Dataset& ds, DistanceMetric metric, const Matrix* representations = nullptr);

/// One distribution per row of ds, computed once up front (scope = full).
PairTable build_pair_table(const Dataset& ds, const MixPolicy& policy, const Matrix* representations = nullptr);

/// Same rows as build_pair_table, computed in blocks and handed to `visit`
/// in anchor order without keeping the whole table in memory. Anchors and
/// candidates may be different point sets; self_index(i) names the candidate
/// to exclude for anchor i, or -1.
void for_each_pair_row(const Matrix& anchors, const Matrix& candidates, const MixPolicy& policy,
                       const std::function<Index(Index)>& self_index,
                       const std::function<void(const PairDistribution&)>& visit);

/// Beta(alpha, alpha) through the ratio of two Gamma(alpha, 1) draws.
double sample_beta(double alpha, Rng& rng);

std::pair<Vector, Vector> mix_pair(const Vector& xi, const Vector& yi, const Vector& xj, const Vector& yj,
                                   double lambda);

/// For each anchor draws a partner from its table row, then lambda.
std::vector<Pairing> draw_pairings(std::span<const Index> batch, const PairTable& table, double beta_alpha,
                                   Rng& rng);

std::vector<MixedExample> draw_mixed_batch(std::span<const Index> batch, const Dataset& ds, const PairTable& table,
                                           const MixPolicy& policy, Rng& rng);

/// Per-batch pairing: distances only between batch1 and batch2, each batch1
/// anchor draws its partner from batch2 (self allowed).
std::vector<Pairing> draw_pairings_pairwise(std::span<const Index> batch1, std::span<const Index> batch2,
                                            const Dataset& ds, const MixPolicy& policy, Rng& rng,
                                            const Matrix* representations = nullptr);

std::vector<MixedExample> draw_mixed_batch_pairwise(std::span<const Index> batch1, std::span<const Index> batch2,
                                                    const Dataset& ds, const MixPolicy& policy, Rng& rng,
                                                    const Matrix* representations = nullptr);

/// anchor, candidate, distance, probability.
void write_pair_table_csv(const PairTable& table, const Dataset& ds, const MixPolicy& policy,
                          const std::string& path, const Matrix* representations = nullptr);

}  // namespace cmix

#endif  // CMIX_MIXER_HPP_
