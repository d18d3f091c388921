// SPDX-License-Identifier: Apache-2.0
// Shared fixtures for the unit tests: random series and random models.

#ifndef PDC_TESTS_SUPPORT_HPP
#define PDC_TESTS_SUPPORT_HPP

#include <random>

#include "pdc/pdc.hpp"

namespace pdc::testing {

inline Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Matrix M(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) M(i, j) = g(rng);
  return M;
}

inline Vector gaussian_vector(Eigen::Index n, Rng& rng, double scale = 1.0) {
  return gaussian_matrix(n, 1, rng, scale).col(0);
}

inline TimeSeries random_series(int n, int N, Rng& rng) { return TimeSeries(gaussian_matrix(n, N, rng)); }

/// Random orthogonal bases and small random dynamics in every slot.
inline ReducedModel random_model(int n, int m, int r, SlotIndexer slots, int slot_count, Rng& rng,
                                 double a_scale = 0.3) {
  ReducedModel model(n, m, r, slots, slot_count);
  for (int s = 0; s < slot_count; ++s) {
    auto& p = model.slot(s);
    p.Q = random_orthogonal(n, rng);
    for (auto& A : p.A) A = gaussian_matrix(m, m, rng, a_scale);
    p.b = gaussian_vector(m, rng, 0.2);
    p.ybar = gaussian_vector(n - m, rng, 0.2);
  }
  return model;
}

inline std::vector<double> ones(int N) { return std::vector<double>(static_cast<std::size_t>(N), 1.0); }

}  // namespace pdc::testing

#endif  // PDC_TESTS_SUPPORT_HPP
