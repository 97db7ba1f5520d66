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

#include "cmix/kernels.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace cmix::kernels {
namespace {

// Per-element bodies shared by the serial and OpenMP loops.

inline double sq_distance(const Matrix& A, Index i, const Matrix& B, Index j) {
  double acc = 0.0;
  const double* a = A.row(i).data();
  const double* b = B.row(j).data();
  for (Index k = 0; k < A.cols(); ++k) {
    const double d = a[k] - b[k];
    acc += d * d;
  }
  return acc;
}

inline double nearest_label(std::span<const double> t, std::span<const double> y, double q) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double d = std::abs(t[i] - q);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return y[best];
}

inline double nw_point(std::span<const double> t, std::span<const double> y, double q,
                       SmoothingKernel kernel, double h) {
  double num = 0.0;
  double den = 0.0;
  if (kernel == SmoothingKernel::kUniform) {
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (std::abs(t[i] - q) < h) {
        num += y[i];
        den += 1.0;
      }
    }
  } else {
    double min_sq = std::numeric_limits<double>::infinity();
    for (double s : t) min_sq = std::min(min_sq, (s - q) * (s - q));
    const double inv_h2 = 1.0 / (h * h);
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double w = std::exp(-((t[i] - q) * (t[i] - q) - min_sq) * inv_h2);
      num += w * y[i];
      den += w;
    }
  }
  if (den == 0.0) return nearest_label(t, y, q);
  return num / den;
}

inline double kde_point(std::span<const double> samples, double bandwidth, double g) {
  double acc = 0.0;
  for (double s : samples) {
    const double u = (g - s) / bandwidth;
    acc += std::exp(-0.5 * u * u);
  }
  return acc / (static_cast<double>(samples.size()) * bandwidth * std::sqrt(2.0 * std::numbers::pi));
}

void check_nw_inputs(std::span<const double> t, std::span<const double> y, double h) {
  if (t.empty() || t.size() != y.size()) throw std::invalid_argument("kernel regression needs matching, nonempty support");
  if (!(h > 0.0)) throw std::invalid_argument("kernel regression bandwidth must be positive");
}

void check_kde_inputs(std::span<const double> samples, double bandwidth) {
  if (samples.empty()) throw std::invalid_argument("kde needs at least one sample");
  if (!(bandwidth > 0.0)) throw std::invalid_argument("kde bandwidth must be positive");
}

void check_same_width(const Matrix& A, const Matrix& B) {
  if (A.cols() != B.cols()) {
    throw DimensionError("pairwise distance: column counts differ (" + std::to_string(A.cols()) +
                         " vs " + std::to_string(B.cols()) + ")");
  }
}

void check_pmf_inputs(const Matrix& D, double sigma, bool exclude_diagonal) {
  if (!(sigma > 0.0)) throw std::invalid_argument("bandwidth must be positive");
  if (exclude_diagonal && D.cols() < 2) throw std::domain_error("no candidate left after excluding self");
}

}  // namespace

bool gaussian_row_pmf(std::span<const double> dist, double sigma, Index skip, std::span<double> out) {
  const std::size_t n = dist.size();
  double min_d = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n; ++j) {
    if (static_cast<Index>(j) != skip) min_d = std::min(min_d, dist[j]);
  }
  if (!std::isfinite(min_d)) return false;
  const double inv = 1.0 / (2.0 * sigma * sigma);
  double total = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    out[j] = static_cast<Index>(j) == skip ? 0.0 : std::exp(-(dist[j] - min_d) * inv);
    total += out[j];
  }
  // The minimum entry contributes exp(0) = 1, so total >= 1.
  for (std::size_t j = 0; j < n; ++j) out[j] /= total;
  return true;
}

Matrix pairwise_sq_distance(const Matrix& A, const Matrix& B) {
  check_same_width(A, B);
  Matrix D(A.rows(), B.rows());
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < A.rows(); ++i) {
    for (Index j = 0; j < B.rows(); ++j) D(i, j) = sq_distance(A, i, B, j);
  }
  return D;
}

Matrix gaussian_pmf_rows(const Matrix& D, double sigma, bool exclude_diagonal) {
  check_pmf_inputs(D, sigma, exclude_diagonal);
  Matrix P(D.rows(), D.cols());
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < D.rows(); ++i) {
    gaussian_row_pmf(std::span<const double>(D.row(i).data(), static_cast<std::size_t>(D.cols())), sigma,
                     exclude_diagonal ? i : Index{-1},
                     std::span<double>(P.row(i).data(), static_cast<std::size_t>(D.cols())));
  }
  return P;
}

Vector nadaraya_watson(std::span<const double> support_t, std::span<const double> support_y,
                       std::span<const double> queries, SmoothingKernel kernel, double h) {
  check_nw_inputs(support_t, support_y, h);
  Vector out(static_cast<Index>(queries.size()));
  const auto n = static_cast<Index>(queries.size());
#pragma omp parallel for schedule(static)
  for (Index q = 0; q < n; ++q) {
    out[q] = nw_point(support_t, support_y, queries[static_cast<std::size_t>(q)], kernel, h);
  }
  return out;
}

Vector gaussian_kde(std::span<const double> samples, double bandwidth, std::span<const double> grid) {
  check_kde_inputs(samples, bandwidth);
  Vector out(static_cast<Index>(grid.size()));
  const auto n = static_cast<Index>(grid.size());
#pragma omp parallel for schedule(static)
  for (Index g = 0; g < n; ++g) out[g] = kde_point(samples, bandwidth, grid[static_cast<std::size_t>(g)]);
  return out;
}

namespace serial {

Matrix pairwise_sq_distance(const Matrix& A, const Matrix& B) {
  check_same_width(A, B);
  Matrix D(A.rows(), B.rows());
  for (Index i = 0; i < A.rows(); ++i) {
    for (Index j = 0; j < B.rows(); ++j) D(i, j) = sq_distance(A, i, B, j);
  }
  return D;
}

Matrix gaussian_pmf_rows(const Matrix& D, double sigma, bool exclude_diagonal) {
  check_pmf_inputs(D, sigma, exclude_diagonal);
  Matrix P(D.rows(), D.cols());
  for (Index i = 0; i < D.rows(); ++i) {
    gaussian_row_pmf(std::span<const double>(D.row(i).data(), static_cast<std::size_t>(D.cols())), sigma,
                     exclude_diagonal ? i : Index{-1},
                     std::span<double>(P.row(i).data(), static_cast<std::size_t>(D.cols())));
  }
  return P;
}

Vector nadaraya_watson(std::span<const double> support_t, std::span<const double> support_y,
                       std::span<const double> queries, SmoothingKernel kernel, double h) {
  check_nw_inputs(support_t, support_y, h);
  Vector out(static_cast<Index>(queries.size()));
  for (std::size_t q = 0; q < queries.size(); ++q) {
    out[static_cast<Index>(q)] = nw_point(support_t, support_y, queries[q], kernel, h);
  }
  return out;
}

Vector gaussian_kde(std::span<const double> samples, double bandwidth, std::span<const double> grid) {
  check_kde_inputs(samples, bandwidth);
  Vector out(static_cast<Index>(grid.size()));
  for (std::size_t g = 0; g < grid.size(); ++g) out[static_cast<Index>(g)] = kde_point(samples, bandwidth, grid[g]);
  return out;
}

}  // namespace serial

}  // namespace cmix::kernels
