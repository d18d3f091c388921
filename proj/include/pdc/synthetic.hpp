// SPDX-License-Identifier: Apache-2.0

/**
 * @file synthetic.hpp
 * Linear-Gaussian test scenarios with known generating model: planar
 * autonomous, multidimensional autonomous, seasonal (period T) and
 * higher-order planar. Each returns the series, the truth model and the
 * irreducible cost c* computed from the noise actually drawn.
 */

#ifndef PDC_SYNTHETIC_HPP
#define PDC_SYNTHETIC_HPP

#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <variant>
#include <vector>

#include "pdc/core.hpp"

namespace pdc {

struct Auto2D {
  double a = 0.6;
  double theta = std::numbers::pi / 3.0;
  double rx = 0.3;
  double ry = 0.6;
};

struct AutoMulti {
  Matrix A;   // m x m
  Matrix Qx;  // n x m, orthonormalized on use
  double rx = 0.3;
  double ry = 0.6;
};

/// a(t) = a_amp cos^2(2 pi t/T), b = b_amp sin, ybar = ybar_amp cos, theta = theta_amp sin.
struct Seasonal2D {
  int period = 12;
  double a_amp = 1.2;
  double b_amp = 0.5;
  double ybar_amp = 0.4;
  double theta_amp = std::numbers::pi / 6.0;
  double rx = 0.3;
  double ry = 0.6;

  double a(double t) const { return a_amp * std::pow(std::cos(phase(t)), 2); }
  double b(double t) const { return b_amp * std::sin(phase(t)); }
  double ybar(double t) const { return ybar_amp * std::cos(phase(t)); }
  double theta(double t) const { return theta_amp * std::sin(phase(t)); }

private:
  double phase(double t) const { return 2.0 * std::numbers::pi * t / period; }
};

/// x_{j+1} = sum_i a_i x_{j-i+1} + noise, order r = a.size().
struct Markov2D {
  std::vector<double> a{0.4979, -0.2846, 0.1569};
  double theta = std::numbers::pi / 3.0;
  double rx = 0.3;
  double ry = 0.6;
};

struct ScenarioSpec {
  std::variant<Auto2D, AutoMulti, Seasonal2D, Markov2D> kind;
  int N = 1000;
  std::uint64_t seed = 1;
};

struct Scenario {
  TimeSeries series;
  ReducedModel truth;
  double c_star = 0.0;
};

/// The (A, P) frame rotation [[cos, -sin], [sin, cos]].
inline Matrix planar_rotation(double theta) {
  Matrix Q(2, 2);
  Q << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  return Q;
}

/// Spectral radius of the period map of the memory-r dynamics (companion form).
inline double monodromy_radius(const ReducedModel& model) {
  const int m = model.m(), r = model.r();
  const int dim = m * r;
  Matrix P = Matrix::Identity(dim, dim);
  for (int s = 0; s < model.slot_count(); ++s) {
    Matrix C = Matrix::Zero(dim, dim);
    for (int i = 0; i < r; ++i) C.block(0, i * m, m, m) = model.slot(s).A[static_cast<std::size_t>(i)];
    if (r > 1) C.block(m, 0, m * (r - 1), m * (r - 1)).setIdentity();
    P = C * P;
  }
  Eigen::EigenSolver<Matrix> es(P, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

/**
 * Draws a series from `truth` with isotropic block noise:
 *   x_{j+1} = b_{s(j)} + sum_i A_{i,s(j)} x_{j-i+1} + rx eta^x_j
 *   y_{j+1} = ybar_{s(j+1)} + ry eta^y_j
 *   z_j     = Q_{s(j)} (x_j; y_j)
 * The first r states are standard normal and carry no noise term.
 * Returns c* = (1/(N-r)) sum |rx eta^x|^2 + |ry eta^y|^2.
 */
inline Scenario simulate(const ReducedModel& truth, int N, double rx, double ry, std::uint64_t seed) {
  detail::require(rx >= 0.0 && ry >= 0.0, "simulate: noise amplitudes must be non-negative");
  detail::require(N > truth.r(), "simulate: need N > r");
  if (truth.slots().mode() != SlotIndexer::Mode::PerStep)
    detail::require(monodromy_radius(truth) < 1.0, "simulate: dynamics are unstable (spectral radius >= 1)");
  else
    detail::require(truth.slot_count() >= N, "simulate: per-step truth needs N slots");
  truth.validate(1e-9);

  const int n = truth.n(), m = truth.m(), r = truth.r();
  Rng rng(seed);
  std::normal_distribution<double> gauss;
  Matrix x(m, N), y(n - m, N);
  for (int j = 0; j < r; ++j) {
    for (int i = 0; i < m; ++i) x(i, j) = gauss(rng);
    for (int i = 0; i < n - m; ++i) y(i, j) = gauss(rng);
  }
  double noise = 0.0;
  for (int j = r - 1; j + 1 < N; ++j) {
    const auto& p = truth.slot(truth.slot_of(j));
    Vector next = p.b;
    for (int i = 1; i <= r; ++i) next.noalias() += p.A[static_cast<std::size_t>(i - 1)] * x.col(j - i + 1);
    for (int i = 0; i < m; ++i) {
      const double e = rx * gauss(rng);
      next(i) += e;
      noise += e * e;
    }
    x.col(j + 1) = next;
    const Vector& ybar = truth.slot(truth.slot_of(j + 1)).ybar;
    for (int i = 0; i < n - m; ++i) {
      const double e = ry * gauss(rng);
      y(i, j + 1) = ybar(i) + e;
      noise += e * e;
    }
  }
  Matrix Z(n, N);
  for (int j = 0; j < N; ++j) {
    const int s = truth.slot_of(j);
    Z.col(j) = truth.Qx(s) * x.col(j) + truth.Qy(s) * y.col(j);
  }
  return {TimeSeries(std::move(Z)), truth, noise / static_cast<double>(N - r)};
}

namespace detail {

inline ReducedModel planar_truth(const std::vector<double>& a, double theta) {
  ReducedModel truth(2, 1, static_cast<int>(a.size()), SlotIndexer::autonomous(), 1);
  truth.slot(0).Q = planar_rotation(theta);
  for (std::size_t i = 0; i < a.size(); ++i) truth.slot(0).A[i](0, 0) = a[i];
  return truth;
}

inline ReducedModel build_truth(const Auto2D& s, int) { return planar_truth({s.a}, s.theta); }

inline ReducedModel build_truth(const Markov2D& s, int) {
  require(!s.a.empty(), "Markov2D: need at least one coefficient");
  return planar_truth(s.a, s.theta);
}

inline ReducedModel build_truth(const AutoMulti& s, int) {
  const auto n = s.Qx.rows(), m = s.Qx.cols();
  require(s.A.rows() == m && s.A.cols() == m, "AutoMulti: A must be m x m");
  require(m >= 1 && m < n, "AutoMulti: need 1 <= m < n");
  ReducedModel truth(static_cast<int>(n), static_cast<int>(m), 1, SlotIndexer::autonomous(), 1);
  Matrix Qx = s.Qx;
  orthonormalize(Qx);
  truth.slot(0).Q = complete_basis(Qx);
  truth.slot(0).A[0] = s.A;
  return truth;
}

/// Slot s holds the parameters of time index j = s (time j + 1).
inline ReducedModel build_truth(const Seasonal2D& s, int) {
  require(s.period >= 1, "Seasonal2D: period must be positive");
  ReducedModel truth(2, 1, 1, SlotIndexer::periodic(s.period), s.period);
  for (int slot = 0; slot < s.period; ++slot) {
    const double t = slot + 1.0;
    auto& p = truth.slot(slot);
    p.Q = planar_rotation(s.theta(t));
    p.A[0](0, 0) = s.a(t);
    p.b(0) = s.b(t);
    p.ybar(0) = s.ybar(t);
  }
  return truth;
}

}  // namespace detail

inline Scenario generate(const ScenarioSpec& spec) {
  return std::visit(
      [&](const auto& kind) {
        detail::require(kind.rx >= 0.0 && kind.ry >= 0.0, "generate: noise amplitudes must be non-negative");
        return simulate(detail::build_truth(kind, spec.N), spec.N, kind.rx, kind.ry, spec.seed);
      },
      spec.kind);
}

/// The multidimensional example: n = 5, m = 2 with the published A and Qx.
inline AutoMulti published_multi_example() {
  AutoMulti s;
  s.A.resize(2, 2);
  s.A << 0.4569, 0.3237, -1.0374, 1.0378;
  s.Qx.resize(5, 2);
  s.Qx << -0.7044, 0.5754, -0.3823, -0.1555, -0.3407, -0.1798, -0.1985, 0.2477, -0.4497, -0.7423;
  return s;
}

}  // namespace pdc

#endif  // PDC_SYNTHETIC_HPP
