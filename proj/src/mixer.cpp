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

#include "cmix/mixer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "cmix/kernels.hpp"

namespace cmix {
namespace {

constexpr Index kRowBlock = 256;

Matrix gather_rows(const Matrix& m, std::span<const Index> rows) {
  Matrix out(static_cast<Index>(rows.size()), m.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Index>(r)) = m.row(rows[r]);
  return out;
}

PairDistribution uniform_row(Index anchor, Index n_candidates, Index self) {
  PairDistribution row;
  row.anchor_index = anchor;
  for (Index j = 0; j < n_candidates; ++j) {
    if (j != self) row.candidate_indices.push_back(j);
  }
  if (row.candidate_indices.empty()) {
    throw DegenerateAnchorError("anchor " + std::to_string(anchor) + " has no candidate partner");
  }
  row.pmf.assign(row.candidate_indices.size(), 1.0 / static_cast<double>(row.candidate_indices.size()));
  row.finalize();
  return row;
}

}  // namespace

std::string to_string(DistanceMetric metric) {
  switch (metric) {
    case DistanceMetric::kLabel: return "label";
    case DistanceMetric::kFeature: return "feature";
    case DistanceMetric::kFeatureConcatLabel: return "feature-concat-label";
    case DistanceMetric::kRepresentation: return "representation";
    case DistanceMetric::kRepresentationConcatLabel: return "representation-concat-label";
    case DistanceMetric::kUniform: return "uniform";
  }
  return "unknown";
}

DistanceMetric parse_metric(std::string_view name) {
  for (auto m : {DistanceMetric::kLabel, DistanceMetric::kFeature, DistanceMetric::kFeatureConcatLabel,
                 DistanceMetric::kRepresentation, DistanceMetric::kRepresentationConcatLabel,
                 DistanceMetric::kUniform}) {
    if (to_string(m) == name) return m;
  }
  throw std::invalid_argument("unknown distance metric: " + std::string(name));
}

std::string to_string(PairingScope scope) { return scope == PairingScope::kFull ? "full" : "batch"; }

PairingScope parse_scope(std::string_view name) {
  if (name == "full") return PairingScope::kFull;
  if (name == "batch") return PairingScope::kBatch;
  throw std::invalid_argument("unknown pairing scope: " + std::string(name));
}

void MixPolicy::validate() const {
  if (!(bandwidth > 0.0)) throw std::invalid_argument("mix bandwidth must be positive");
  if (!(beta_alpha > 0.0)) throw std::invalid_argument("Beta shape alpha must be positive");
  if (site_layer < 0) throw std::invalid_argument("mixing site layer must be >= 0");
}

bool MixPolicy::needs_representations() const {
  return metric == DistanceMetric::kRepresentation || metric == DistanceMetric::kRepresentationConcatLabel;
}

void PairDistribution::finalize() {
  cdf.resize(pmf.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < pmf.size(); ++k) {
    acc += pmf[k];
    cdf[k] = acc;
  }
}

Index PairDistribution::draw(Rng& rng) const {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double u = unit(rng) * cdf.back();
  auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  if (it == cdf.end()) --it;
  return candidate_indices[static_cast<std::size_t>(it - cdf.begin())];
}

Matrix pairwise_sq_distance(const Matrix& A, const Matrix& B) { return kernels::pairwise_sq_distance(A, B); }

PairDistribution kernel_pmf(std::span<const double> dist_row, double sigma, bool exclude_self, Index self_index) {
  if (!(sigma > 0.0)) throw std::invalid_argument("kernel bandwidth must be positive");
  for (double d : dist_row) {
    if (!(d >= 0.0)) throw std::invalid_argument("distances must be non-negative");
  }
  const Index skip = exclude_self ? self_index : Index{-1};
  std::vector<double> weights(dist_row.size());
  if (!kernels::gaussian_row_pmf(dist_row, sigma, skip, weights)) {
    throw DegenerateAnchorError("anchor " + std::to_string(self_index) + " has no candidate partner");
  }
  PairDistribution row;
  row.anchor_index = self_index;
  row.candidate_indices.reserve(dist_row.size());
  row.pmf.reserve(dist_row.size());
  for (std::size_t j = 0; j < dist_row.size(); ++j) {
    if (static_cast<Index>(j) == skip) continue;
    row.candidate_indices.push_back(static_cast<Index>(j));
    row.pmf.push_back(weights[j]);
  }
  row.finalize();
  return row;
}

Matrix metric_embedding(const Dataset& ds, DistanceMetric metric, const Matrix* representations) {
  auto concat = [](const Matrix& a, const Matrix& b) {
    Matrix out(a.rows(), a.cols() + b.cols());
    out << a, b;
    return out;
  };
  auto reps = [&]() -> const Matrix& {
    if (representations == nullptr) {
      throw std::invalid_argument("metric '" + to_string(metric) + "' requires hidden representations");
    }
    if (representations->rows() != ds.size()) {
      throw DimensionError("representation rows do not match dataset rows");
    }
    return *representations;
  };
  switch (metric) {
    case DistanceMetric::kLabel: return ds.labels;
    case DistanceMetric::kFeature: return ds.features;
    case DistanceMetric::kFeatureConcatLabel: return concat(ds.features, ds.labels);
    case DistanceMetric::kRepresentation: return reps();
    case DistanceMetric::kRepresentationConcatLabel: return concat(reps(), ds.labels);
    case DistanceMetric::kUniform: return Matrix();
  }
  return Matrix();
}

PairTable build_pair_table(const Dataset& ds, const MixPolicy& policy, const Matrix* representations) {
  policy.validate();
  const Index n = ds.size();
  PairTable table(static_cast<std::size_t>(n));
  if (policy.metric == DistanceMetric::kUniform) {
    for (Index i = 0; i < n; ++i) {
      table[static_cast<std::size_t>(i)] = uniform_row(i, n, policy.exclude_self ? i : -1);
    }
    return table;
  }
  if (policy.exclude_self && n < 2) throw DegenerateAnchorError("a single row has no partner to mix with");
  const Matrix embedding = metric_embedding(ds, policy.metric, representations);
  const Matrix D = kernels::pairwise_sq_distance(embedding, embedding);
  const Matrix P = kernels::gaussian_pmf_rows(D, policy.bandwidth, policy.exclude_self);
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < n; ++i) {
    PairDistribution& row = table[static_cast<std::size_t>(i)];
    row.anchor_index = i;
    row.candidate_indices.reserve(static_cast<std::size_t>(n));
    row.pmf.reserve(static_cast<std::size_t>(n));
    for (Index j = 0; j < n; ++j) {
      if (policy.exclude_self && j == i) continue;
      row.candidate_indices.push_back(j);
      row.pmf.push_back(P(i, j));
    }
    row.finalize();
  }
  return table;
}

void for_each_pair_row(const Matrix& anchors, const Matrix& candidates, const MixPolicy& policy,
                       const std::function<Index(Index)>& self_index,
                       const std::function<void(const PairDistribution&)>& visit) {
  policy.validate();
  const Index n = anchors.rows();
  std::vector<Index> skips(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) skips[static_cast<std::size_t>(i)] = self_index ? self_index(i) : -1;

  for (Index start = 0; start < n; start += kRowBlock) {
    const Index len = std::min(kRowBlock, n - start);
    std::vector<PairDistribution> rows(static_cast<std::size_t>(len));
    if (policy.metric == DistanceMetric::kUniform) {
      for (Index r = 0; r < len; ++r) {
        rows[static_cast<std::size_t>(r)] =
            uniform_row(start + r, candidates.rows(), skips[static_cast<std::size_t>(start + r)]);
      }
    } else {
      const Matrix block = anchors.middleRows(start, len);
      const Matrix D = kernels::pairwise_sq_distance(block, candidates);
      bool degenerate = false;
#pragma omp parallel for schedule(static)
      for (Index r = 0; r < len; ++r) {
        const Index skip = skips[static_cast<std::size_t>(start + r)];
        std::span<const double> dist(D.row(r).data(), static_cast<std::size_t>(D.cols()));
        std::vector<double> weights(dist.size());
        if (!kernels::gaussian_row_pmf(dist, policy.bandwidth, skip, weights)) {
#pragma omp atomic write
          degenerate = true;
          continue;
        }
        PairDistribution& row = rows[static_cast<std::size_t>(r)];
        row.anchor_index = start + r;
        for (std::size_t j = 0; j < dist.size(); ++j) {
          if (static_cast<Index>(j) == skip) continue;
          row.candidate_indices.push_back(static_cast<Index>(j));
          row.pmf.push_back(weights[j]);
        }
        row.finalize();
      }
      if (degenerate) throw DegenerateAnchorError("an anchor has no candidate partner");
    }
    for (const auto& row : rows) visit(row);
  }
}

double sample_beta(double alpha, Rng& rng) {
  if (!(alpha > 0.0)) throw std::invalid_argument("Beta shape alpha must be positive");
  std::gamma_distribution<double> gamma(alpha, 1.0);
  const double a = gamma(rng);
  const double b = gamma(rng);
  const double total = a + b;
  // Both draws underflow only for tiny alpha, where Beta(alpha, alpha) puts
  // nearly all mass at the endpoints.
  if (total == 0.0) return (rng() & 1U) ? 1.0 : 0.0;
  return a / total;
}

std::pair<Vector, Vector> mix_pair(const Vector& xi, const Vector& yi, const Vector& xj, const Vector& yj,
                                   double lambda) {
  if (xi.size() != xj.size() || yi.size() != yj.size()) throw DimensionError("mix_pair: dimension mismatch");
  return {lambda * xi + (1.0 - lambda) * xj, lambda * yi + (1.0 - lambda) * yj};
}

std::vector<Pairing> draw_pairings(std::span<const Index> batch, const PairTable& table, double beta_alpha,
                                   Rng& rng) {
  std::vector<Pairing> out;
  out.reserve(batch.size());
  for (Index anchor : batch) {
    if (anchor < 0 || anchor >= static_cast<Index>(table.size())) {
      throw std::out_of_range("anchor index " + std::to_string(anchor) + " outside pair table");
    }
    Pairing p;
    p.anchor = anchor;
    p.partner = table[static_cast<std::size_t>(anchor)].draw(rng);
    p.lambda = sample_beta(beta_alpha, rng);
    out.push_back(p);
  }
  return out;
}

namespace {

std::vector<MixedExample> materialize(const std::vector<Pairing>& pairings, const Dataset& ds) {
  std::vector<MixedExample> out;
  out.reserve(pairings.size());
  for (const auto& p : pairings) {
    auto [x, y] = mix_pair(ds.features.row(p.anchor).transpose(), ds.labels.row(p.anchor).transpose(),
                           ds.features.row(p.partner).transpose(), ds.labels.row(p.partner).transpose(), p.lambda);
    out.push_back({std::move(x), std::move(y), p.partner, p.lambda});
  }
  return out;
}

}  // namespace

std::vector<MixedExample> draw_mixed_batch(std::span<const Index> batch, const Dataset& ds, const PairTable& table,
                                           const MixPolicy& policy, Rng& rng) {
  return materialize(draw_pairings(batch, table, policy.beta_alpha, rng), ds);
}

std::vector<Pairing> draw_pairings_pairwise(std::span<const Index> batch1, std::span<const Index> batch2,
                                            const Dataset& ds, const MixPolicy& policy, Rng& rng,
                                            const Matrix* representations) {
  policy.validate();
  if (batch1.empty() || batch2.empty()) throw std::invalid_argument("per-batch pairing needs two nonempty batches");
  for (Index r : batch1) {
    if (r < 0 || r >= ds.size()) throw std::out_of_range("batch index outside dataset");
  }
  for (Index r : batch2) {
    if (r < 0 || r >= ds.size()) throw std::out_of_range("batch index outside dataset");
  }
  std::vector<Pairing> out;
  out.reserve(batch1.size());
  if (policy.metric == DistanceMetric::kUniform) {
    std::uniform_int_distribution<std::size_t> pick(0, batch2.size() - 1);
    for (Index anchor : batch1) {
      Pairing p{anchor, batch2[pick(rng)], 0.0};
      p.lambda = sample_beta(policy.beta_alpha, rng);
      out.push_back(p);
    }
    return out;
  }
  const Matrix embedding = metric_embedding(ds, policy.metric, representations);
  const Matrix D = kernels::pairwise_sq_distance(gather_rows(embedding, batch1), gather_rows(embedding, batch2));
  for (std::size_t r = 0; r < batch1.size(); ++r) {
    const PairDistribution row = kernel_pmf(
        std::span<const double>(D.row(static_cast<Index>(r)).data(), batch2.size()), policy.bandwidth, false, -1);
    Pairing p;
    p.anchor = batch1[r];
    p.partner = batch2[static_cast<std::size_t>(row.draw(rng))];
    p.lambda = sample_beta(policy.beta_alpha, rng);
    out.push_back(p);
  }
  return out;
}

std::vector<MixedExample> draw_mixed_batch_pairwise(std::span<const Index> batch1, std::span<const Index> batch2,
                                                    const Dataset& ds, const MixPolicy& policy, Rng& rng,
                                                    const Matrix* representations) {
  return materialize(draw_pairings_pairwise(batch1, batch2, ds, policy, rng, representations), ds);
}

void write_pair_table_csv(const PairTable& table, const Dataset& ds, const MixPolicy& policy,
                          const std::string& path, const Matrix* representations) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write pair table: " + path);
  out.precision(17);
  const Matrix embedding = metric_embedding(ds, policy.metric, representations);
  out << "anchor,candidate,distance,probability\n";
  for (const auto& row : table) {
    for (std::size_t k = 0; k < row.candidate_indices.size(); ++k) {
      const Index j = row.candidate_indices[k];
      const double d = embedding.size() == 0 ? std::numeric_limits<double>::quiet_NaN()
                                              : (embedding.row(row.anchor_index) - embedding.row(j)).squaredNorm();
      out << row.anchor_index << ',' << j << ',' << d << ',' << row.pmf[k] << '\n';
    }
  }
  if (!out) throw std::runtime_error("failed writing pair table: " + path);
}

}  // namespace cmix
