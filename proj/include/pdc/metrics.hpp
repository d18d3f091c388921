// SPDX-License-Identifier: Apache-2.0

/**
 * @file metrics.hpp
 * Recovery errors modulo re-parametrization of the reduced manifold,
 * natural bases of the dynamics, monthly climatology and anomaly indices,
 * and one-step prediction reports.
 */

#ifndef PDC_METRICS_HPP
#define PDC_METRICS_HPP

#include <Eigen/SVD>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "pdc/core.hpp"

namespace pdc {

// ============================================================================
// Subspace and dynamics comparison
// ============================================================================

struct SubspaceComparison {
  double e_Q = 0.0;
  double e_A = 0.0;
  Matrix B;  // (Qx_fit)' Qx_true
};

/**
 * e_Q = |Qx_fit' - B Qx_true'| / |Qx_true| with B = Qx_fit' Qx_true
 * (Frobenius). Zero iff both bases span the same subspace.
 */
inline SubspaceComparison subspace_error(const Matrix& Qx_true, const Matrix& Qx_fit, double ortho_tol = 1e-8) {
  detail::require(Qx_true.rows() == Qx_fit.rows() && Qx_true.cols() == Qx_fit.cols(),
                  "subspace_error: bases have different shapes");
  detail::require(orthogonality_error(Qx_true) <= ortho_tol, "subspace_error: Qx_true is not column-orthonormal");
  detail::require(orthogonality_error(Qx_fit) <= ortho_tol, "subspace_error: Qx_fit is not column-orthonormal");
  SubspaceComparison out;
  out.B = Qx_fit.transpose() * Qx_true;
  out.e_Q = (Qx_fit.transpose() - out.B * Qx_true.transpose()).norm() / Qx_true.norm();
  return out;
}

/// e_A = |A_true - B^-1 A_fit B| / |A_fit|.
inline double dynamics_error(const Matrix& A_true, const Matrix& A_fit, const Matrix& B) {
  detail::require(B.rows() == B.cols() && B.rows() == A_true.rows(), "dynamics_error: shape mismatch");
  Eigen::FullPivLU<Matrix> lu(B);
  const double smin = Eigen::JacobiSVD<Matrix>(B).singularValues().minCoeff();
  if (!lu.isInvertible() || smin < 1e-12)
    throw DegenerateComparison("dynamics_error: basis-change matrix is singular (subspaces nearly orthogonal)");
  const double denom = A_fit.norm();
  detail::require(denom > 0.0, "dynamics_error: fitted dynamics are zero");
  return (A_true - lu.solve(A_fit * B)).norm() / denom;
}

/// Worst e_Q and e_A over slots and memory lags; slot counts must agree.
inline SubspaceComparison compare_models(const ReducedModel& truth, const ReducedModel& fit) {
  detail::require(truth.n() == fit.n() && truth.m() == fit.m() && truth.r() == fit.r(), "compare_models: dimension mismatch");
  detail::require(truth.slot_count() == fit.slot_count(), "compare_models: slot count mismatch");
  SubspaceComparison worst;
  for (int s = 0; s < truth.slot_count(); ++s) {
    auto c = subspace_error(truth.Qx(s), fit.Qx(s), 1e-8);
    for (int i = 0; i < truth.r(); ++i)
      c.e_A = std::max(c.e_A, dynamics_error(truth.slot(s).A[static_cast<std::size_t>(i)], fit.slot(s).A[static_cast<std::size_t>(i)], c.B));
    if (s == 0 || c.e_Q > worst.e_Q) {
      worst.e_Q = c.e_Q;
      worst.B = c.B;
    }
    worst.e_A = std::max(worst.e_A, c.e_A);
  }
  return worst;
}

// ============================================================================
// Natural bases
// ============================================================================

struct NaturalBasis {
  Matrix U_in;    // eigenvectors of A'A: directions of largest input sensitivity
  Matrix U_out;   // eigenvectors of AA': where those effects appear one step later
  Vector singular_values;
};

/// A = U_out diag(s) U_in', singular values non-increasing.
inline NaturalBasis natural_basis(const Matrix& A) {
  detail::require(A.rows() == A.cols(), "natural_basis: A must be square");
  detail::require(A.allFinite(), "natural_basis: A must be finite");
  Eigen::JacobiSVD<Matrix> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return {svd.matrixV(), svd.matrixU(), svd.singularValues()};
}

/// Qx(s) U_out(A_1(s)): loading of each natural x-coordinate on the observed channels.
inline Matrix natural_loadings(const ReducedModel& model, int slot) {
  return model.Qx(slot) * natural_basis(model.slot(slot).A[0]).U_out;
}

// ============================================================================
// Planar angle helpers
// ============================================================================

/// Direction angle of a 2-vector reduced modulo pi into [lower, lower + pi).
inline double canonical_angle(const Vector& q, double lower = 0.0) {
  detail::require(q.size() == 2, "canonical_angle: needs a 2-vector");
  double th = std::atan2(q(1), q(0));
  th = std::fmod(th - lower, std::numbers::pi);
  if (th < 0.0) th += std::numbers::pi;
  return th + lower;
}

/// Difference of two direction angles modulo pi, in [-pi/2, pi/2).
inline double angle_distance(double a, double b) {
  double d = std::fmod(a - b + 0.5 * std::numbers::pi, std::numbers::pi);
  if (d < 0.0) d += std::numbers::pi;
  return d - 0.5 * std::numbers::pi;
}

/// Per-slot (a, b, ybar, theta) of a planar memory-one fit, with the sign of each slot's x and y axes matched to truth.
struct PlanarCurves {
  std::vector<double> a, b, ybar, theta;
};

inline PlanarCurves align_planar(const ReducedModel& truth, const ReducedModel& fit) {
  detail::require(fit.n() == 2 && fit.m() == 1 && fit.r() == 1, "align_planar: needs n = 2, m = 1, r = 1");
  detail::require(truth.slot_count() == fit.slot_count(), "align_planar: slot count mismatch");
  const int S = fit.slot_count();
  std::vector<double> sx(static_cast<std::size_t>(S)), sy(static_cast<std::size_t>(S));
  PlanarCurves out;
  for (int s = 0; s < S; ++s) {
    sx[static_cast<std::size_t>(s)] = truth.Qx(s).col(0).dot(fit.Qx(s).col(0)) < 0.0 ? -1.0 : 1.0;
    sy[static_cast<std::size_t>(s)] = truth.Qy(s).col(0).dot(fit.Qy(s).col(0)) < 0.0 ? -1.0 : 1.0;
  }
  for (int s = 0; s < S; ++s) {
    const int next = (s + 1) % S;
    const auto& p = fit.slot(s);
    out.a.push_back(sx[static_cast<std::size_t>(next)] * sx[static_cast<std::size_t>(s)] * p.A[0](0, 0));
    out.b.push_back(sx[static_cast<std::size_t>(next)] * p.b(0));
    out.ybar.push_back(sy[static_cast<std::size_t>(s)] * p.ybar(0));
    const double th_true = std::atan2(truth.Qx(s)(1, 0), truth.Qx(s)(0, 0));
    const double th_fit = std::atan2(fit.Qx(s)(1, 0), fit.Qx(s)(0, 0));
    out.theta.push_back(th_true + angle_distance(th_fit, th_true));
  }
  return out;
}

// ============================================================================
// Climatology and anomaly index
// ============================================================================

struct Climatology {
  Matrix mean;        // n x T, column p = mean over indices j with j mod T = p
  TimeSeries anomaly; // input minus its phase mean
};

inline Climatology monthly_climatology(const TimeSeries& series, int T) {
  detail::require(T >= 1, "monthly_climatology: period must be positive");
  if (series.N() < T) throw InsufficientData("monthly_climatology: need at least one full period");
  const int n = series.n(), N = series.N();
  Matrix mean = Matrix::Zero(n, T);
  std::vector<int> count(static_cast<std::size_t>(T), 0);
  for (int j = 0; j < N; ++j) {
    mean.col(j % T) += series.values().col(j);
    ++count[static_cast<std::size_t>(j % T)];
  }
  for (int p = 0; p < T; ++p) mean.col(p) /= count[static_cast<std::size_t>(p)];
  Matrix anomaly(n, N);
  for (int j = 0; j < N; ++j) anomaly.col(j) = series.values().col(j) - mean.col(j % T);
  return {std::move(mean), TimeSeries(std::move(anomaly), series.times(), series.exogenous())};
}

/// Channels averaged for the ENSO-style index on the 50-point ocean grid (1-based).
inline constexpr std::array<int, 10> kEnsoChannels{16, 17, 24, 28, 29, 32, 33, 37, 41, 42};

/// Centered running mean of odd length `window`, truncated at both ends.
inline std::vector<double> running_mean(const std::vector<double>& v, int window) {
  detail::require(window >= 1 && window % 2 == 1, "running_mean: window must be odd and positive");
  if (window > static_cast<int>(v.size())) throw InsufficientData("running_mean: window longer than series");
  std::vector<double> out;
  out.reserve(v.size() - static_cast<std::size_t>(window) + 1);
  for (std::size_t j = 0; j + static_cast<std::size_t>(window) <= v.size(); ++j) {
    double acc = 0.0;
    for (int i = 0; i < window; ++i) acc += v[j + static_cast<std::size_t>(i)];
    out.push_back(acc / window);
  }
  return out;
}

/// Mean over 1-based channel ids of each column.
inline std::vector<double> channel_average(const Matrix& values, const std::vector<int>& channels) {
  detail::require(!channels.empty(), "channel_average: empty channel set");
  for (int c : channels) detail::require(c >= 1 && c <= values.rows(), "channel_average: channel id out of range");
  std::vector<double> out(static_cast<std::size_t>(values.cols()), 0.0);
  for (Eigen::Index j = 0; j < values.cols(); ++j) {
    double acc = 0.0;
    for (int c : channels) acc += values(c - 1, j);
    out[static_cast<std::size_t>(j)] = acc / static_cast<double>(channels.size());
  }
  return out;
}

/**
 * Removes the period-T climatology, averages the anomaly over 1-based
 * `channels`, then applies a centered running mean of length `window`.
 * Output has N - window + 1 entries; entry i is centered on index i + window/2.
 */
inline std::vector<double> anomaly_index(const TimeSeries& series, const std::vector<int>& channels, int window,
                                         int period = 12) {
  detail::require(window >= 1 && window % 2 == 1, "anomaly_index: window must be odd and positive");
  if (window > series.N()) throw InsufficientData("anomaly_index: window longer than series");
  const Climatology clim = monthly_climatology(series, period);
  return running_mean(channel_average(clim.anomaly.values(), channels), window);
}

// ============================================================================
// Prediction report
// ============================================================================

/**
 * One-step predictions aligned with observations for j = r .. N-1 (0-based
 * predicted index). z-space prediction is Qx x~ + Qy ybar of the slot of the
 * predicted snapshot.
 */
struct PredictionReport {
  std::vector<int> index;   // 0-based index of each predicted snapshot
  Matrix x_actual, x_predicted;
  Matrix z_actual, z_predicted;
  Vector channel_rmse;      // n
  Vector x_rmse;            // m
  double aggregate_mse = 0.0;  // total squared error / (N - r)
  double total_squared_error = 0.0;
};

inline PredictionReport prediction_report(const ReducedModel& model, const TimeSeries& series) {
  const Coordinates c = project_series(model, series);
  const Residuals res = residuals(model, c);
  const auto terms = res.ex.cols();
  PredictionReport rep;
  rep.x_actual.resize(model.m(), terms);
  rep.x_predicted.resize(model.m(), terms);
  rep.z_actual.resize(model.n(), terms);
  rep.z_predicted.resize(model.n(), terms);
  for (Eigen::Index col = 0; col < terms; ++col) {
    const int j = static_cast<int>(col) + res.first;
    const int s1 = model.slot_of(j + 1);
    rep.index.push_back(j + 1);
    rep.x_actual.col(col) = c.x.col(j + 1);
    rep.x_predicted.col(col) = c.x.col(j + 1) - res.ex.col(col);
    rep.z_actual.col(col) = series.values().col(j + 1);
    rep.z_predicted.col(col) = model.Qx(s1) * rep.x_predicted.col(col) + model.Qy(s1) * model.slot(s1).ybar;
  }
  const double denom = static_cast<double>(terms);
  rep.channel_rmse = ((rep.z_actual - rep.z_predicted).array().square().rowwise().sum() / denom).sqrt();
  rep.x_rmse = ((rep.x_actual - rep.x_predicted).array().square().rowwise().sum() / denom).sqrt();
  rep.total_squared_error = (rep.z_actual - rep.z_predicted).squaredNorm();
  rep.aggregate_mse = rep.total_squared_error / denom;
  return rep;
}

}  // namespace pdc

#endif  // PDC_METRICS_HPP
