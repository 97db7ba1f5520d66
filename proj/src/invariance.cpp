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

#include "cmix/invariance.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "cmix/kernels.hpp"

namespace cmix {
namespace {

constexpr double kDensityFloor = 1e-300;

double sample_std(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

Vector first_pc_projection(const Matrix& hidden) {
  if (hidden.rows() < 1 || hidden.cols() < 1) throw std::invalid_argument("first_pc_projection: empty input");
  const Eigen::RowVectorXd mean = hidden.colwise().mean();
  const Matrix centred = hidden.rowwise() - mean;
  const Eigen::MatrixXd cov = centred.transpose() * centred;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  // Eigenvalues ascend; the last column is the leading direction.
  Vector dir = eig.eigenvectors().col(cov.cols() - 1);
  // Fix the sign so repeated runs agree.
  Index arg = 0;
  dir.cwiseAbs().maxCoeff(&arg);
  if (dir[arg] < 0.0) dir = -dir;
  return centred * dir;
}

double scott_bandwidth(std::span<const double> samples) {
  return sample_std(samples) * std::pow(static_cast<double>(samples.size()), -0.2);
}

double grid_kl(const Vector& p, const Vector& q, double step) {
  if (p.size() != q.size()) throw DimensionError("grid_kl: density lengths differ");
  const Vector pp = p.cwiseMax(kDensityFloor);
  const Vector qq = q.cwiseMax(kDensityFloor);
  const double zp = pp.sum() * step;
  const double zq = qq.sum() * step;
  double kl = 0.0;
  for (Index i = 0; i < pp.size(); ++i) {
    const double a = pp[i] / zp;
    const double b = qq[i] / zq;
    kl += a * std::log(a / b) * step;
  }
  return std::max(kl, 0.0);
}

InvarianceReport invariance_score_1d(const Vector& projection, const Vector& labels, const std::vector<int>& domains,
                                     const InvarianceOptions& opts) {
  const Index n = projection.size();
  if (labels.size() != n || static_cast<Index>(domains.size()) != n) {
    throw DimensionError("invariance: projection, labels and domains differ in length");
  }
  if (opts.bins < 1 || opts.grid_points < 2 || !(opts.grid_span > 0.0)) {
    throw std::invalid_argument("invariance: bad options");
  }
  std::vector<int> domain_set(domains.begin(), domains.end());
  std::sort(domain_set.begin(), domain_set.end());
  domain_set.erase(std::unique(domain_set.begin(), domain_set.end()), domain_set.end());
  const auto n_domains = static_cast<double>(domain_set.size());

  std::vector<Index> by_label(static_cast<std::size_t>(n));
  std::iota(by_label.begin(), by_label.end(), Index{0});
  std::stable_sort(by_label.begin(), by_label.end(), [&](Index a, Index b) { return labels[a] < labels[b]; });

  InvarianceReport report;
  double total = 0.0;
  for (int c = 0; c < opts.bins; ++c) {
    const auto lo = static_cast<std::size_t>(n * c / opts.bins);
    const auto hi = static_cast<std::size_t>(n * (c + 1) / opts.bins);
    std::map<int, std::vector<double>> groups;
    std::vector<double> pooled;
    for (std::size_t k = lo; k < hi; ++k) {
      const Index r = by_label[k];
      groups[domains[static_cast<std::size_t>(r)]].push_back(projection[r]);
      pooled.push_back(projection[r]);
    }
    bool usable = groups.size() == domain_set.size();
    for (const auto& [d, v] : groups) {
      if (v.size() < 2) {
        ++report.groups_skipped;
        usable = false;
      }
    }
    if (!usable) {
      ++report.bins_skipped;
      continue;
    }
    const double pooled_std = sample_std(pooled);
    ++report.bins_used;
    if (!(pooled_std > 0.0)) continue;  // every point identical: zero divergence
    const double centre = std::accumulate(pooled.begin(), pooled.end(), 0.0) / static_cast<double>(pooled.size());
    const double half = opts.grid_span * pooled_std;
    const double step = 2.0 * half / static_cast<double>(opts.grid_points - 1);
    std::vector<double> grid(static_cast<std::size_t>(opts.grid_points));
    for (Index g = 0; g < opts.grid_points; ++g) grid[static_cast<std::size_t>(g)] = centre - half + step * g;

    std::vector<Vector> dens;
    for (const auto& [d, v] : groups) {
      double bw = scott_bandwidth(v);
      if (!(bw > 0.0)) bw = pooled_std * std::pow(static_cast<double>(v.size()), -0.2);
      dens.push_back(kernels::gaussian_kde(v, bw, grid));
    }
    double bin_sum = 0.0;
    for (std::size_t a = 0; a < dens.size(); ++a) {
      for (std::size_t b = 0; b < dens.size(); ++b) {
        if (a != b) bin_sum += grid_kl(dens[a], dens[b], step);
      }
    }
    total += bin_sum / (n_domains * n_domains);
  }
  report.score = report.bins_used > 0 ? total / report.bins_used : 0.0;
  return report;
}

InvarianceReport invariance_score(const Matrix& hidden, const Vector& labels, const std::vector<int>& domains,
                                  const InvarianceOptions& opts) {
  return invariance_score_1d(first_pc_projection(hidden), labels, domains, opts);
}

}  // namespace cmix
