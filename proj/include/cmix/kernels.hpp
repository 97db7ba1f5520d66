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

// Data-parallel numeric kernels.
//
// Every kernel in cmix::kernels is OpenMP-parallel over independent output
// rows or points and has a straight-line twin in cmix::kernels::serial. Both
// versions evaluate each output element with the same sequence of floating
// point operations, so results agree bit-for-bit; the serial versions exist
// as test oracles and as the baseline for bench/kernel_bench.

#ifndef CMIX_KERNELS_HPP_
#define CMIX_KERNELS_HPP_

#include <span>

#include "cmix/common.hpp"

namespace cmix::kernels {

enum class SmoothingKernel { kUniform, kGaussian };

/// Normalized Gaussian weights exp(-d_j / (2 sigma^2)) over one distance row,
/// shifted by the row minimum before exponentiation. When skip >= 0 that
/// entry gets weight 0 and is excluded from the minimum. Returns false when
/// no entry is left to normalize over.
bool gaussian_row_pmf(std::span<const double> dist, double sigma, Index skip, std::span<double> out);

/// (i, j) = ||A_i - B_j||^2.
Matrix pairwise_sq_distance(const Matrix& A, const Matrix& B);

/// Row i = gaussian_row_pmf(D.row(i)), skipping the diagonal entry when
/// exclude_diagonal is set. Throws std::domain_error on an empty row.
Matrix gaussian_pmf_rows(const Matrix& D, double sigma, bool exclude_diagonal);

/// Nadaraya-Watson estimate at each query point. Uniform kernel is
/// 1{|t - s| < h}; Gaussian kernel is exp(-|t - s|^2 / h^2). A query with no
/// support inside the window gets the label of the nearest support point.
Vector nadaraya_watson(std::span<const double> support_t, std::span<const double> support_y,
                       std::span<const double> queries, SmoothingKernel kernel, double h);

/// Gaussian kernel density estimate of `samples` evaluated on `grid`.
Vector gaussian_kde(std::span<const double> samples, double bandwidth, std::span<const double> grid);

namespace serial {

Matrix pairwise_sq_distance(const Matrix& A, const Matrix& B);
Matrix gaussian_pmf_rows(const Matrix& D, double sigma, bool exclude_diagonal);
Vector nadaraya_watson(std::span<const double> support_t, std::span<const double> support_y,
                       std::span<const double> queries, SmoothingKernel kernel, double h);
Vector gaussian_kde(std::span<const double> samples, double bandwidth, std::span<const double> grid);

}  // namespace serial

}  // namespace cmix::kernels

#endif  // CMIX_KERNELS_HPP_
