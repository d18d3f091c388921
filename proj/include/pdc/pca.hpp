// SPDX-License-Identifier: Apache-2.0

/**
 * @file pca.hpp
 * Classical principal components (empirical orthogonal functions) of a
 * series treated as unordered samples, and the singular-value tail used
 * as the static baseline when choosing the reduced dimension.
 */

#ifndef PDC_PCA_HPP
#define PDC_PCA_HPP

#include <Eigen/SVD>

#include "pdc/core.hpp"

namespace pdc {

struct PcaResult {
  Vector mean;            // n
  Matrix basis;           // n x n orthogonal, columns sorted by singular value
  Vector singular_values; // length n, non-increasing, zero-padded when N < n
};

/// SVD of the mean-removed n x N data matrix Z = U S V'.
inline PcaResult principal_components(const TimeSeries& series) {
  const Matrix& Z0 = series.values();
  const int n = series.n();
  PcaResult out;
  out.mean = Z0.rowwise().mean();
  const Matrix Z = Z0.colwise() - out.mean;
  Eigen::JacobiSVD<Matrix> svd(Z, Eigen::ComputeFullU);
  out.basis = svd.matrixU();
  out.singular_values = Vector::Zero(n);
  const auto& s = svd.singularValues();
  out.singular_values.head(s.size()) = s;
  return out;
}

/// (1/N) sum_{i>m} S_i^2: the mean squared PCA reconstruction error with m components.
inline double spectrum_tail(const PcaResult& result, int m, int N) {
  const auto n = result.singular_values.size();
  detail::require(m >= 0 && m <= n, "spectrum_tail: need 0 <= m <= n");
  detail::require(N > 0, "spectrum_tail: N must be positive");
  return result.singular_values.tail(n - m).squaredNorm() / static_cast<double>(N);
}

}  // namespace pdc

#endif  // PDC_PCA_HPP
