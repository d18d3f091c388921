// SPDX-License-Identifier: Apache-2.0

/**
 * @file likelihood.hpp
 * Gaussian log-likelihoods of a reduced model: isotropic noise (where the
 * maximum-likelihood model is the minimum-cost model) and general block
 * covariances for x and y. Evaluation only.
 */

#ifndef PDC_LIKELIHOOD_HPP
#define PDC_LIKELIHOOD_HPP

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>

#include "pdc/core.hpp"

namespace pdc {

struct GaussianNoiseSpec {
  enum class Kind { Isotropic, General };
  Kind kind = Kind::Isotropic;
  double sigma = 1.0;
  Matrix sigma_x;  // m x m SPD
  Matrix sigma_y;  // (n-m) x (n-m) SPD

  static GaussianNoiseSpec isotropic(double sigma) {
    detail::require(sigma > 0.0, "GaussianNoiseSpec: sigma must be positive");
    GaussianNoiseSpec s;
    s.sigma = sigma;
    return s;
  }
  static GaussianNoiseSpec general(Matrix sx, Matrix sy) {
    GaussianNoiseSpec s;
    s.kind = Kind::General;
    s.sigma_x = std::move(sx);
    s.sigma_y = std::move(sy);
    check_spd(s.sigma_x, "sigma_x");
    check_spd(s.sigma_y, "sigma_y");
    return s;
  }

  static void check_spd(const Matrix& S, const char* name) {
    detail::require(S.rows() == S.cols() && S.rows() > 0, std::string("GaussianNoiseSpec: ") + name + " must be square");
    detail::require((S - S.transpose()).norm() <= 1e-12 * (1.0 + S.norm()), std::string("GaussianNoiseSpec: ") + name + " must be symmetric");
    Eigen::SelfAdjointEigenSolver<Matrix> es(S, Eigen::EigenvaluesOnly);
    detail::require(es.eigenvalues().minCoeff() > 1e-12 * S.trace(),
                    std::string("GaussianNoiseSpec: ") + name + " must be positive definite");
  }
};

/**
 * L = sum_j -[(n/2) log(2 pi) + n log(sigma) + (|x_{j+1} - x~_{j+1}|^2 + |y_{j+1} - ybar|^2) / (2 sigma^2)]
 * over the N - r predicted snapshots.
 */
inline double isotropic_loglik(const ReducedModel& model, const TimeSeries& series, double sigma) {
  detail::require(sigma > 0.0, "isotropic_loglik: sigma must be positive");
  const Residuals res = residuals(model, series);
  const double n = model.n();
  double L = 0.0;
  for (Eigen::Index col = 0; col < res.ex.cols(); ++col) {
    const double e2 = res.ex.col(col).squaredNorm() + res.ey.col(col).squaredNorm();
    L -= 0.5 * n * std::log(2.0 * std::numbers::pi) + n * std::log(sigma) + e2 / (2.0 * sigma * sigma);
  }
  return L;
}

struct OptimalSigma {
  double sigma = 0.0;
  bool degenerate = false;  // zero cost: likelihood unbounded as sigma -> 0
};

/// sigma = sqrt(c / n), c the normalized cost.
inline OptimalSigma optimal_sigma(const ReducedModel& model, const TimeSeries& series) {
  const double c = evaluate_cost(model, series).normalized;
  if (c <= 0.0) return {0.0, true};
  return {std::sqrt(c / model.n()), false};
}

/// L = sum_j -1/2 [log((2 pi)^n |Sx| |Sy|) + ex' Sx^-1 ex + ey' Sy^-1 ey].
inline double general_loglik(const ReducedModel& model, const TimeSeries& series, const GaussianNoiseSpec& spec) {
  detail::require(spec.kind == GaussianNoiseSpec::Kind::General, "general_loglik: needs a General noise spec");
  detail::require(spec.sigma_x.rows() == model.m(), "general_loglik: sigma_x must be m x m");
  detail::require(spec.sigma_y.rows() == model.n() - model.m(), "general_loglik: sigma_y must be (n-m) x (n-m)");
  GaussianNoiseSpec::check_spd(spec.sigma_x, "sigma_x");
  GaussianNoiseSpec::check_spd(spec.sigma_y, "sigma_y");
  const Eigen::LLT<Matrix> lx(spec.sigma_x), ly(spec.sigma_y);
  const double logdet = 2.0 * (lx.matrixL().toDenseMatrix().diagonal().array().log().sum() +
                               ly.matrixL().toDenseMatrix().diagonal().array().log().sum());
  const double base = model.n() * std::log(2.0 * std::numbers::pi) + logdet;
  const Residuals res = residuals(model, series);
  double L = 0.0;
  for (Eigen::Index col = 0; col < res.ex.cols(); ++col) {
    const Vector ex = res.ex.col(col), ey = res.ey.col(col);
    L -= 0.5 * (base + ex.dot(lx.solve(ex)) + ey.dot(ly.solve(ey)));
  }
  return L;
}

/// Principal axes of the x and y noise covariances, largest variance first.
struct CovarianceRanking {
  Vector x_variances;
  Matrix x_axes;
  Vector y_variances;
  Matrix y_axes;
};

inline CovarianceRanking covariance_ranking(const GaussianNoiseSpec& spec) {
  detail::require(spec.kind == GaussianNoiseSpec::Kind::General, "covariance_ranking: needs a General noise spec");
  auto ranked = [](const Matrix& S, Vector& vals, Matrix& axes) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(S);
    vals = es.eigenvalues().reverse();
    axes = es.eigenvectors().rowwise().reverse();
  };
  CovarianceRanking out;
  ranked(spec.sigma_x, out.x_variances, out.x_axes);
  ranked(spec.sigma_y, out.y_variances, out.y_axes);
  return out;
}

}  // namespace pdc

#endif  // PDC_LIKELIHOOD_HPP
