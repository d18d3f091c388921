// SPDX-License-Identifier: Apache-2.0

/**
 * @file fit_engine.hpp
 * Joint descent over the orthogonal basis Q and the linear predictor
 * (A_1..A_r, b, ybar). Every step re-parametrizes both subspaces at random,
 * draws a trial profile F, rotates one x-coordinate against one
 * y-coordinate by alpha*F(t) using a guarded Newton step, then solves the
 * weighted least-squares problem for the increments of the linear
 * parameters in closed form. Autonomous fits are the special case F = 1.
 */

#ifndef PDC_FIT_ENGINE_HPP
#define PDC_FIT_ENGINE_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pdc/core.hpp"
#include "pdc/pca.hpp"
#include "pdc/trialfns.hpp"

namespace pdc {

// ============================================================================
// Linear-parameter regression
// ============================================================================

/// Increments for A_1..A_r, b and ybar; applied scaled by the slot weight.
struct Increments {
  std::vector<Matrix> B;
  Vector d;
  Vector v;
};

struct RegressionOptions {
  double ridge = 0.0;      // added to the diagonal of the normal matrix
  bool fit_drift = true;   // solve for d (otherwise d = 0)
  bool fit_ybar = true;    // solve for v (otherwise v = 0)
};

/**
 * Minimizes the cost over increments (B_h, d, v) entering as
 * A_h + w B_h, b + w d, ybar + w v, where w is the per-time weight.
 * The x-part is the block system
 *   [B_1 .. B_r d] * sum_j w_j^2 phi_j phi_j' = sum_j w_j e_j phi_j',
 * phi_j = (x_j; x_{j-1}; ..; x_{j-r+1}; 1) and e_j the current residual.
 * Weights are indexed by time (length N); ybar terms use w_{j+1}.
 */
inline Increments regress_dynamics(const TimeSeries& series, const ReducedModel& model,
                                   std::span<const double> weights, const RegressionOptions& opt = {}) {
  detail::require(static_cast<int>(weights.size()) == series.N(), "regress_dynamics: weights must have length N");
  detail::require(opt.ridge >= 0.0, "regress_dynamics: ridge must be non-negative");
  const int m = model.m(), r = model.r(), ny = model.n() - model.m();
  const Coordinates c = project_series(model, series);
  const Residuals res = residuals(model, c);
  const int terms = static_cast<int>(res.ex.cols());
  const int dim = m * r + (opt.fit_drift ? 1 : 0);

  Matrix G = Matrix::Zero(dim, dim);
  Matrix R = Matrix::Zero(m, dim);
  Vector phi(dim);
  double wy2 = 0.0;
  Vector ry = Vector::Zero(ny);
  for (int col = 0; col < terms; ++col) {
    const int j = col + res.first;
    const double w = weights[static_cast<std::size_t>(j)];
    if (w != 0.0) {
      for (int h = 1; h <= r; ++h) phi.segment((h - 1) * m, m) = c.x.col(j - h + 1);
      if (opt.fit_drift) phi(dim - 1) = 1.0;
      G.selfadjointView<Eigen::Lower>().rankUpdate(phi, w * w);
      R.noalias() += w * res.ex.col(col) * phi.transpose();
    }
    const double wn = weights[static_cast<std::size_t>(j + 1)];
    wy2 += wn * wn;
    ry += wn * res.ey.col(col);
  }
  G = G.selfadjointView<Eigen::Lower>();

  Increments inc;
  inc.B.assign(static_cast<std::size_t>(r), Matrix::Zero(m, m));
  inc.d = Vector::Zero(m);
  inc.v = Vector::Zero(ny);

  const double trace = G.trace();
  if (trace > 0.0) {
    if (opt.ridge > 0.0) G.diagonal().array() += opt.ridge;
    Eigen::LDLT<Matrix> ldlt(G);
    const Vector D = ldlt.vectorD().cwiseAbs();
    const double pivot_ratio = D.maxCoeff() > 0.0 ? D.minCoeff() / D.maxCoeff() : 0.0;
    const double rcond = ldlt.info() == Eigen::Success ? std::min(ldlt.rcond(), pivot_ratio) : 0.0;
    if (!ldlt.isPositive() || !(rcond >= 1e-14))
      throw IllConditioned("regress_dynamics: singular block system (rcond = " + std::to_string(rcond) + ")");
    const Matrix theta = ldlt.solve(R.transpose()).transpose();  // m x dim
    for (int h = 0; h < r; ++h) inc.B[static_cast<std::size_t>(h)] = theta.middleCols(h * m, m);
    if (opt.fit_drift) inc.d = theta.col(dim - 1);
  }
  if (opt.fit_ybar && wy2 > 0.0) inc.v = ry / wy2;
  return inc;
}

/// Default ridge used on retry: 1e-10 * trace(X0) / m.
inline double default_ridge(const TimeSeries& series, const ReducedModel& model, std::span<const double> weights) {
  const Coordinates c = project_series(model, series);
  double tr = 0.0;
  for (int j = model.r() - 1; j + 1 < series.N(); ++j) {
    const double w = weights[static_cast<std::size_t>(j)];
    for (int h = 1; h <= model.r(); ++h) tr += w * w * c.x.col(j - h + 1).squaredNorm();
  }
  return std::max(1e-10 * tr / model.m(), 1e-300);
}

/// Gradients of the cost with respect to (B_h, d, v) at zero increments.
struct LinearGradients {
  std::vector<Matrix> dB;
  Vector dd;
  Vector dv;
};

inline LinearGradients linear_gradients(const TimeSeries& series, const ReducedModel& model,
                                        std::span<const double> weights) {
  detail::require(static_cast<int>(weights.size()) == series.N(), "linear_gradients: weights must have length N");
  const int m = model.m(), r = model.r();
  const Coordinates c = project_series(model, series);
  const Residuals res = residuals(model, c);
  LinearGradients g{std::vector<Matrix>(static_cast<std::size_t>(r), Matrix::Zero(m, m)), Vector::Zero(m),
                    Vector::Zero(model.n() - m)};
  for (int col = 0; col < res.ex.cols(); ++col) {
    const int j = col + res.first;
    const double w = weights[static_cast<std::size_t>(j)];
    for (int h = 1; h <= r; ++h) g.dB[static_cast<std::size_t>(h - 1)].noalias() -= 2.0 * w * res.ex.col(col) * c.x.col(j - h + 1).transpose();
    g.dd -= 2.0 * w * res.ex.col(col);
    g.dv -= 2.0 * weights[static_cast<std::size_t>(j + 1)] * res.ey.col(col);
  }
  return g;
}

/// A_h += w_s B_h, b += w_s d, ybar += w_s v for every slot s.
inline void apply_increments(ReducedModel& model, const Increments& inc, std::span<const double> slot_weights) {
  detail::require(static_cast<int>(slot_weights.size()) == model.slot_count(), "apply_increments: one weight per slot");
  for (int s = 0; s < model.slot_count(); ++s) {
    const double w = slot_weights[static_cast<std::size_t>(s)];
    if (w == 0.0) continue;
    auto& p = model.slot(s);
    for (int h = 0; h < model.r(); ++h) p.A[static_cast<std::size_t>(h)] += w * inc.B[static_cast<std::size_t>(h)];
    p.b += w * inc.d;
    p.ybar += w * inc.v;
  }
}

// ============================================================================
// Rotation step
// ============================================================================

struct RotationDerivatives {
  double g = 0.0;  // dc/dalpha at alpha = 0
  double H = 0.0;  // d2c/dalpha2 at alpha = 0
};

/**
 * Derivatives of the cost when every slot basis is rotated in the plane
 * of x-coordinate k and y-coordinate h (0-based) by alpha * w, i.e.
 * Q_s <- apply_plane_rotation(Q_s, k, m + h, alpha * w_s). The
 * coordinates then move as x^k <- x^k cos - y^h sin, y^h <- x^k sin + y^h cos.
 * Weights are indexed by time; `weights[j]` must equal the weight of slot(j).
 */
inline RotationDerivatives rotation_derivatives(const TimeSeries& series, const ReducedModel& model, int k, int h,
                                                std::span<const double> weights) {
  const int m = model.m(), r = model.r();
  detail::require(k >= 0 && k < m, "rotation_derivatives: k out of range");
  detail::require(h >= 0 && h < model.n() - m, "rotation_derivatives: h out of range");
  detail::require(static_cast<int>(weights.size()) == series.N(), "rotation_derivatives: weights must have length N");
  const Coordinates c = project_series(model, series);
  const Residuals res = residuals(model, c);

  auto w = [&](int j) { return weights[static_cast<std::size_t>(j)]; };
  // first and second alpha-derivatives of x^k_j and y^h_j
  auto dx = [&](int j) { return -w(j) * c.y(h, j); };
  auto d2x = [&](int j) { return -w(j) * w(j) * c.x(k, j); };
  auto dy = [&](int j) { return w(j) * c.x(k, j); };
  auto d2y = [&](int j) { return -w(j) * w(j) * c.y(h, j); };

  RotationDerivatives out;
  Vector de(m), d2e(m);
  for (int col = 0; col < res.ex.cols(); ++col) {
    const int j = col + res.first;
    const auto& p = model.slot(model.slot_of(j));
    de.setZero();
    d2e.setZero();
    de(k) = dx(j + 1);
    d2e(k) = d2x(j + 1);
    for (int i = 1; i <= r; ++i) {
      const auto Acol = p.A[static_cast<std::size_t>(i - 1)].col(k);
      de -= Acol * dx(j - i + 1);
      d2e -= Acol * d2x(j - i + 1);
    }
    const double ey = res.ey(h, col);
    const double dey = dy(j + 1), d2ey = d2y(j + 1);
    out.g += 2.0 * (res.ex.col(col).dot(de) + ey * dey);
    out.H += 2.0 * (de.squaredNorm() + res.ex.col(col).dot(d2e) + dey * dey + ey * d2ey);
  }
  return out;
}

/// Step length bounded by eps: eps / sqrt(eps^2 + g^2).
inline double descent_rate(double g, double eps_theta) { return eps_theta / std::sqrt(eps_theta * eps_theta + g * g); }

/// Newton step -g/H clamped to +-eps when H > 0, otherwise bounded descent -eps_l g.
inline double plan_rotation_step(double g, double H, double eps_theta) {
  detail::require(eps_theta > 0.0, "plan_rotation_step: eps_theta must be positive");
  if (g == 0.0) return 0.0;
  if (H > 0.0) return std::clamp(-g / H, -eps_theta, eps_theta);
  return -descent_rate(g, eps_theta) * g;
}

/// Rotates every slot basis in the (k, m+h) plane by theta * slot weight.
inline void rotate_slots(ReducedModel& model, int k, int h, double theta, std::span<const double> slot_weights) {
  for (int s = 0; s < model.slot_count(); ++s) {
    const double w = slot_weights[static_cast<std::size_t>(s)];
    if (w == 0.0 || theta == 0.0) continue;
    model.slot(s).Q = apply_plane_rotation(model.slot(s).Q, k, model.m() + h, theta * w);
  }
}

namespace detail {
inline void conjugate_ledger(CoefficientLedger& ledger, const Matrix& Rx, const Matrix& Ry) {
  for (auto& t : ledger.terms) {
    for (auto& A : t.A) A = Rx * A * Rx.transpose();
    t.b = Rx * t.b;
    t.ybar = Ry * t.ybar;
  }
}
}  // namespace detail

/**
 * x -> Rx x and y -> Ry y with fresh random orthogonal Rx, Ry shared by all
 * slots; A_h, b and ybar are conjugated so every residual keeps its norm.
 */
inline void randomize_bases(ReducedModel& model, Rng& rng) {
  const int m = model.m(), ny = model.n() - model.m();
  const Matrix Rx = random_orthogonal(m, rng);
  const Matrix Ry = random_orthogonal(ny, rng);
  for (int s = 0; s < model.slot_count(); ++s) {
    auto& p = model.slot(s);
    p.Q.leftCols(m) = (p.Q.leftCols(m) * Rx.transpose()).eval();
    p.Q.rightCols(ny) = (p.Q.rightCols(ny) * Ry.transpose()).eval();
    for (auto& A : p.A) A = Rx * A * Rx.transpose();
    p.b = Rx * p.b;
    p.ybar = Ry * p.ybar;
  }
  if (model.ledger()) detail::conjugate_ledger(*model.ledger(), Rx, Ry);
}

// ============================================================================
// Fit driver
// ============================================================================

struct FitConfig {
  int m = 1;
  int r = 1;
  int k_tot = 500;
  double eps_theta = 0.2;
  double L0 = 1.0;
  double Lf = 1.0;
  TrialMix mix;
  SlotIndexer slots = SlotIndexer::autonomous();
  std::uint64_t seed = 1;
  double ridge = 0.0;
  double stop_tol = 1e-6;
  int stop_window = 50;
  bool fit_drift = true;
  bool fit_ybar = true;
  bool randomize = true;
  /// Exogenous track used as s for scalar trials in non-periodic modes; empty means the time axis.
  std::string trial_variable;
  /// Exogenous tracks forming the argument of radial trial functions.
  std::vector<std::string> radial_tracks;
  /// Period of periodic trials when slots are not Periodic.
  double trial_period = 12.0;
  int reorthonormalize_every = 500;

  void validate(const TimeSeries& series) const {
    mix.validate();
    detail::require(m >= 1 && m < series.n(), "FitConfig: need 1 <= m < n");
    detail::require(r >= 1 && r < series.N(), "FitConfig: need 1 <= r < N");
    detail::require(k_tot >= 0, "FitConfig: k_tot must be non-negative");
    detail::require(eps_theta > 0.0 && eps_theta <= 1.5707963267948966, "FitConfig: eps_theta must lie in (0, pi/2]");
    detail::require(ridge >= 0.0, "FitConfig: ridge must be non-negative");
    detail::require(Lf > 0.0 && L0 >= Lf, "FitConfig: need L0 >= Lf > 0");
    detail::require(stop_window >= 1, "FitConfig: stop_window must be positive");
    detail::require(reorthonormalize_every >= 1, "FitConfig: reorthonormalize_every must be positive");
    for (const auto& [kind, p] : mix.weights) {
      if (p <= 0.0) continue;
      switch (slots.mode()) {
        case SlotIndexer::Mode::Autonomous:
          detail::require(kind == TrialKind::Constant, "FitConfig: autonomous slots only admit constant trials");
          break;
        case SlotIndexer::Mode::Periodic:
          detail::require(kind == TrialKind::Constant || is_periodic_kind(kind),
                          "FitConfig: periodic slots only admit constant or periodic trials");
          break;
        case SlotIndexer::Mode::PerStep:
          break;
      }
      if (kind == TrialKind::RadialGaussian) {
        detail::require(!radial_tracks.empty(), "FitConfig: radial trials need radial_tracks");
        for (const auto& t : radial_tracks) (void)series.track(t);
      }
    }
    if (!trial_variable.empty()) (void)series.track(trial_variable);
  }
};

/// One line of the step log.
struct StepRecord {
  int step = 0;
  TrialKind kind = TrialKind::Constant;
  int k = 0;
  int h = 0;
  double g = 0.0;
  double H = 0.0;
  double theta = 0.0;
  bool fallback = false;
  bool accepted = false;
  double cost = 0.0;  // normalized cost after the step
};

struct FitReport {
  std::vector<double> cost_trace;  // index 0: after initialization; then one entry per step
  std::vector<bool> accepted;      // one entry per step
  std::vector<StepRecord> steps;
  int steps_taken = 0;
  bool converged = false;
  std::uint64_t seed = 0;
  double wall_seconds = 0.0;
  double final_cost = 0.0;
  std::vector<int> unvisited_slots;
};

struct FitResult {
  ReducedModel model;
  FitReport report;
};

using FitObserver = std::function<void(const StepRecord&, const ReducedModel&)>;

/// Per-time and per-slot weights of one trial, scaled so max |w| = 1.
struct StepWeights {
  std::vector<double> time;
  std::vector<double> slot;
  double scale = 1.0;  // w = (F - mean) / scale
  double mean = 0.0;
};

namespace detail {

inline std::vector<double> scalar_trial_variable(const TimeSeries& series, const FitConfig& cfg) {
  const int N = series.N();
  std::vector<double> s(static_cast<std::size_t>(N));
  if (cfg.slots.mode() == SlotIndexer::Mode::Periodic) {
    for (int j = 0; j < N; ++j) s[static_cast<std::size_t>(j)] = j;
  } else if (cfg.trial_variable.empty()) {
    s = series.times();
  } else {
    s = series.track(cfg.trial_variable);
  }
  return s;
}

inline std::vector<Vector> radial_trial_variable(const TimeSeries& series, const FitConfig& cfg) {
  std::vector<Vector> s;
  if (cfg.radial_tracks.empty()) return s;
  const auto dims = static_cast<Eigen::Index>(cfg.radial_tracks.size());
  s.assign(static_cast<std::size_t>(series.N()), Vector(dims));
  for (Eigen::Index d = 0; d < dims; ++d) {
    const auto& track = series.track(cfg.radial_tracks[static_cast<std::size_t>(d)]);
    for (std::size_t j = 0; j < s.size(); ++j) s[j](d) = track[j];
  }
  return s;
}

}  // namespace detail

/**
 * Weights of trial F on the series. Periodic slot modes evaluate F at the
 * time index j (slot phase); other modes use the configured trial variable.
 * Returns scale 0 when F vanishes on the sample.
 */
inline StepWeights step_weights(const TrialFunction& F, const TimeSeries& series, const ReducedModel& model,
                                std::span<const double> s_scalar, std::span<const Vector> s_radial) {
  const int N = series.N();
  StepWeights out;
  std::vector<double> raw(static_cast<std::size_t>(N));
  if (F.kind == TrialKind::RadialGaussian) {
    for (int j = 0; j < N; ++j) raw[static_cast<std::size_t>(j)] = evaluate_weight(F, s_radial[static_cast<std::size_t>(j)]);
  } else {
    for (int j = 0; j < N; ++j) raw[static_cast<std::size_t>(j)] = evaluate_weight(F, s_scalar[static_cast<std::size_t>(j)]);
  }
  if (F.subtract_mean) {
    double sum = 0.0;
    for (double v : raw) sum += v;
    out.mean = sum / N;
  }
  double scale = 0.0;
  for (double v : raw) scale = std::max(scale, std::abs(v - out.mean));
  out.scale = scale;
  if (scale < 1e-14) {
    out.scale = 0.0;
    return out;
  }
  out.time.resize(static_cast<std::size_t>(N));
  for (int j = 0; j < N; ++j) out.time[static_cast<std::size_t>(j)] = (raw[static_cast<std::size_t>(j)] - out.mean) / scale;

  const int S = model.slot_count();
  out.slot.resize(static_cast<std::size_t>(S));
  switch (model.slots().mode()) {
    case SlotIndexer::Mode::Autonomous:
      out.slot[0] = out.time[0];
      break;
    case SlotIndexer::Mode::Periodic:
      for (int s = 0; s < S; ++s) out.slot[static_cast<std::size_t>(s)] = (evaluate_weight(F, static_cast<double>(s)) - out.mean) / scale;
      break;
    case SlotIndexer::Mode::PerStep:
      for (int s = 0; s < S; ++s) out.slot[static_cast<std::size_t>(s)] = s < N ? out.time[static_cast<std::size_t>(s)] : 0.0;
      break;
  }
  return out;
}

namespace detail {

inline Increments regress_with_retry(const TimeSeries& series, const ReducedModel& model, std::span<const double> w,
                                     const FitConfig& cfg) {
  RegressionOptions opt{cfg.ridge, cfg.fit_drift, cfg.fit_ybar};
  try {
    return regress_dynamics(series, model, w, opt);
  } catch (const IllConditioned& first) {
    opt.ridge = std::max(cfg.ridge, default_ridge(series, model, w));
    try {
      return regress_dynamics(series, model, w, opt);
    } catch (const IllConditioned& second) {
      throw FitFailure(std::string("ill-conditioned regression after ridge retry: ") + second.what() +
                       " (first attempt: " + first.what() + ")");
    }
  }
}

inline void record_in_ledger(ReducedModel& model, const TrialFunction& F, const StepWeights& sw, const Increments& inc) {
  auto& ledger = model.ledger();
  if (!ledger || !ledger->valid) return;
  if (!is_ledger_kind(F.kind)) {
    ledger->valid = false;
    return;
  }
  using B = CoefficientLedger::Basis;
  const int m = model.m(), ny = model.n() - model.m(), r = model.r();
  auto add = [&](CoefficientLedger::Term& t, double factor) {
    for (int h = 0; h < r; ++h) t.A[static_cast<std::size_t>(h)] += factor * inc.B[static_cast<std::size_t>(h)];
    t.b += factor * inc.d;
    t.ybar += factor * inc.v;
  };
  B basis = B::Constant;
  double period = 0.0;
  int k = 0;
  if (F.kind == TrialKind::FourierCos) basis = B::Cos;
  if (F.kind == TrialKind::FourierSin) basis = B::Sin;
  if (F.kind == TrialKind::Monomial) basis = B::Monomial;
  if (basis == B::Cos || basis == B::Sin) {
    period = F.period;
    k = F.k;
  } else if (basis == B::Monomial) {
    k = F.k;
  }
  add(ledger->term(basis, k, period, m, ny, r), 1.0 / sw.scale);
  if (sw.mean != 0.0) add(ledger->term(B::Constant, 0, 0.0, m, ny, r), -sw.mean / sw.scale);
}

}  // namespace detail

/**
 * Orthonormal basis ordered by one-step predictable variance: eigenvectors
 * of C1 C0^+ C1' with C0 = cov(z_j, z_j), C1 = cov(z_{j+1}, z_j).
 */
inline Matrix predictive_basis(const TimeSeries& series) {
  const int N = series.N();
  const Vector mean = series.values().rowwise().mean();
  const Matrix Zc = series.values().colwise() - mean;
  const Matrix Z0 = Zc.leftCols(N - 1), Z1 = Zc.rightCols(N - 1);
  const Matrix C0 = Z0 * Z0.transpose();
  const Matrix C1 = Z1 * Z0.transpose();
  const Matrix M = C1 * C0.completeOrthogonalDecomposition().pseudoInverse() * C1.transpose();
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (M + M.transpose()));
  Matrix Q = es.eigenvectors().rowwise().reverse();
  orthonormalize(Q);
  return Q;
}

/**
 * Initial model: A = 0, b = 0, ybar = mean of y, with the basis taken from
 * PCA or from predictive_basis, whichever gives the lower cost after the
 * first constant regression (PCA on ties).
 */
inline ReducedModel initial_model(const TimeSeries& series, const FitConfig& cfg) {
  const int n = series.n();
  const PcaResult pca = principal_components(series);
  auto build = [&](const Matrix& Q) {
    ReducedModel model(n, cfg.m, cfg.r, cfg.slots, cfg.slots.slot_count(series.N()));
    const Vector ybar = cfg.fit_ybar ? Vector(Q.rightCols(n - cfg.m).transpose() * pca.mean) : Vector::Zero(n - cfg.m);
    for (int s = 0; s < model.slot_count(); ++s) {
      model.slot(s).Q = Q;
      model.slot(s).ybar = ybar;
    }
    return model;
  };
  auto settled_cost = [&](const ReducedModel& model) {
    ReducedModel tmp = model;
    const std::vector<double> ones(static_cast<std::size_t>(series.N()), 1.0);
    const std::vector<double> slot_ones(static_cast<std::size_t>(tmp.slot_count()), 1.0);
    try {
      apply_increments(tmp, detail::regress_with_retry(series, tmp, ones, cfg), slot_ones);
    } catch (const FitFailure&) {
      return std::numeric_limits<double>::infinity();
    }
    return evaluate_cost(tmp, series).normalized;
  };
  ReducedModel best = build(pca.basis);
  ReducedModel alt = build(predictive_basis(series));
  if (settled_cost(alt) < settled_cost(best)) best = std::move(alt);
  return best;
}


/**
 * Fits a reduced model to `series`. Each step:
 *   1. re-parametrizes x and y by random orthogonal maps (optional);
 *   2. draws a trial F and picks k in [0,m), h in [0,n-m);
 *   3. rotates by theta = plan_rotation_step(g, H) times F, then refreshes
 *      the linear parameters by the closed-form weighted regression;
 *   4. keeps the candidate only if the cost did not increase, otherwise
 *      retries once with the bounded descent step, else skips.
 * Stops after k_tot steps or when the relative decrease over the last
 * stop_window accepted steps falls below stop_tol.
 */
inline FitResult fit(const TimeSeries& series, const FitConfig& cfg, const FitObserver& observer = {}) {
  const auto t_start = std::chrono::steady_clock::now();
  cfg.validate(series);
  Rng rng(cfg.seed);
  const int N = series.N();
  const int ny = series.n() - cfg.m;

  ReducedModel model = initial_model(series, cfg);
  if (cfg.mix.only_ledger_kinds()) model.ledger() = CoefficientLedger{};
  if (model.ledger()) {
    auto& t = model.ledger()->term(CoefficientLedger::Basis::Constant, 0, 0.0, cfg.m, ny, cfg.r);
    t.ybar = model.slot(0).ybar;
  }

  FitReport report;
  report.seed = cfg.seed;
  if (cfg.slots.mode() == SlotIndexer::Mode::Periodic)
    for (int s = N; s < cfg.slots.period(); ++s) report.unvisited_slots.push_back(s);

  const std::vector<double> s_scalar = detail::scalar_trial_variable(series, cfg);
  const std::vector<Vector> s_radial = detail::radial_trial_variable(series, cfg);

  {
    const std::vector<double> ones(static_cast<std::size_t>(N), 1.0);
    const std::vector<double> slot_ones(static_cast<std::size_t>(model.slot_count()), 1.0);
    const Increments inc = detail::regress_with_retry(series, model, ones, cfg);
    apply_increments(model, inc, slot_ones);
    if (model.ledger()) {
      StepWeights sw;
      detail::record_in_ledger(model, TrialFunction::constant(), sw, inc);
    }
  }
  double current = evaluate_cost(model, series).normalized;
  report.cost_trace.push_back(current);

  DrawContext ctx;
  ctx.k_tot = std::max(cfg.k_tot, 1);
  ctx.L0 = cfg.L0;
  ctx.Lf = cfg.Lf;
  ctx.period = cfg.slots.mode() == SlotIndexer::Mode::Periodic ? cfg.slots.period() : cfg.trial_period;
  if (!s_scalar.empty()) {
    auto [lo, hi] = std::minmax_element(s_scalar.begin(), s_scalar.end());
    ctx.s_min = *lo;
    ctx.s_max = *hi;
  }
  if (!s_radial.empty()) {
    ctx.radial_lo = s_radial.front();
    ctx.radial_hi = s_radial.front();
    for (const auto& v : s_radial) {
      ctx.radial_lo = ctx.radial_lo.cwiseMin(v);
      ctx.radial_hi = ctx.radial_hi.cwiseMax(v);
    }
  }

  std::uniform_int_distribution<int> pick_k(0, cfg.m - 1);
  std::uniform_int_distribution<int> pick_h(0, ny - 1);
  std::vector<double> accepted_costs{current};
  long rotations = 0;

  for (int step = 1; step <= cfg.k_tot; ++step) {
    if (cfg.randomize) randomize_bases(model, rng);
    ctx.step = step;
    const TrialFunction F = draw_trial(rng, cfg.mix, ctx);
    const int k = pick_k(rng);
    const int h = pick_h(rng);

    StepRecord rec;
    rec.step = step;
    rec.kind = F.kind;
    rec.k = k;
    rec.h = h;

    const StepWeights sw = step_weights(F, series, model, s_scalar, s_radial);
    if (sw.scale > 0.0) {
      const auto d = rotation_derivatives(series, model, k, h, sw.time);
      rec.g = d.g;
      rec.H = d.H;

      auto attempt = [&](double theta) -> std::pair<ReducedModel, double> {
        ReducedModel cand = model;
        rotate_slots(cand, k, h, theta, sw.slot);
        const Increments inc = detail::regress_with_retry(series, cand, sw.time, cfg);
        apply_increments(cand, inc, sw.slot);
        detail::record_in_ledger(cand, F, sw, inc);
        const double c = evaluate_cost(cand, series).normalized;
        return {std::move(cand), c};
      };

      double theta = plan_rotation_step(d.g, d.H, cfg.eps_theta);
      auto [cand, c] = attempt(theta);
      if (!(c <= current) && d.H > 0.0 && d.g != 0.0) {
        theta = -descent_rate(d.g, cfg.eps_theta) * d.g;
        rec.fallback = true;
        std::tie(cand, c) = attempt(theta);
      }
      rec.theta = theta;
      if (c <= current) {
        model = std::move(cand);
        current = c;
        rec.accepted = true;
        if (theta != 0.0 && ++rotations % cfg.reorthonormalize_every == 0)
          for (int s = 0; s < model.slot_count(); ++s) orthonormalize(model.slot(s).Q);
      }
    }
    rec.cost = current;
    report.cost_trace.push_back(current);
    report.accepted.push_back(rec.accepted);
    report.steps.push_back(rec);
    report.steps_taken = step;
    if (observer) observer(rec, model);

    if (rec.accepted) {
      accepted_costs.push_back(current);
      const auto na = accepted_costs.size();
      if (current == 0.0) {
        report.converged = true;
        break;
      }
      if (na > static_cast<std::size_t>(cfg.stop_window)) {
        const double before = accepted_costs[na - 1 - static_cast<std::size_t>(cfg.stop_window)];
        if ((before - current) / std::abs(current) < cfg.stop_tol) {
          report.converged = true;
          break;
        }
      }
    }
  }

  report.final_cost = evaluate_cost(model, series).normalized;
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return {std::move(model), std::move(report)};
}

// ============================================================================
// Dedicated planar path
// ============================================================================

/**
 * Two-channel, one-dimensional, memory-one fit written directly in terms
 * of the angle theta and the scalar a, with b = ybar = 0:
 *   a      = sum x_j x_{j+1} / sum x_j^2
 *   dc/dth = 2a sum [a x_j y_j - (x_{j+1} y_j + x_j y_{j+1})]
 *   d2c    = 2a sum [2 x_{j+1} x_j - 2 y_{j+1} y_j + a (y_j^2 - x_j^2)]
 * for the rotation x <- x cos + y sin. Uses the same step policy as fit()
 * and serves as its consistency reference.
 */
struct PlanarFit {
  double theta = 0.0;  // direction of the x-axis in the observation plane
  double a = 0.0;
  std::vector<double> cost_trace;
};

inline PlanarFit fit_planar(const TimeSeries& series, int k_tot, double eps_theta,
                            std::optional<double> theta0 = std::nullopt) {
  detail::require(series.n() == 2, "fit_planar: needs exactly two channels");
  const Matrix& Z = series.values();
  const int N = series.N();
  const PcaResult pca = principal_components(series);

  auto coords = [&](double th, Vector& x, Vector& y) {
    const double c = std::cos(th), s = std::sin(th);
    x = c * Z.row(0).transpose() + s * Z.row(1).transpose();
    y = -s * Z.row(0).transpose() + c * Z.row(1).transpose();
  };
  auto regress = [&](const Vector& x) {
    const double num = x.head(N - 1).dot(x.tail(N - 1));
    const double den = x.head(N - 1).squaredNorm();
    return den > 0.0 ? num / den : 0.0;
  };
  auto cost = [&](const Vector& x, const Vector& y, double a) {
    return ((x.tail(N - 1) - a * x.head(N - 1)).squaredNorm() + y.tail(N - 1).squaredNorm()) / (N - 1);
  };

  PlanarFit out;
  out.theta = theta0 ? *theta0 : std::atan2(pca.basis(1, 0), pca.basis(0, 0));
  Vector x, y;
  coords(out.theta, x, y);
  out.a = regress(x);
  double current = cost(x, y, out.a);
  out.cost_trace.push_back(current);

  for (int step = 1; step <= k_tot; ++step) {
    coords(out.theta, x, y);
    const double a = out.a;
    double g = 0.0, H = 0.0;
    for (int j = 0; j + 1 < N; ++j) {
      g += a * x(j) * y(j) - (x(j + 1) * y(j) + x(j) * y(j + 1));
      H += 2.0 * x(j + 1) * x(j) - 2.0 * y(j + 1) * y(j) + a * (y(j) * y(j) - x(j) * x(j));
    }
    g *= 2.0 * a;
    H *= 2.0 * a;

    auto attempt = [&](double dth, double& a_new) {
      Vector xn, yn;
      coords(out.theta + dth, xn, yn);
      a_new = regress(xn);
      return cost(xn, yn, a_new);
    };
    double dth = plan_rotation_step(g, H, eps_theta);
    double a_new = 0.0;
    double c = attempt(dth, a_new);
    if (!(c <= current) && H > 0.0 && g != 0.0) {
      dth = -descent_rate(g, eps_theta) * g;
      c = attempt(dth, a_new);
    }
    if (c <= current) {
      out.theta += dth;
      out.a = a_new;
      current = c;
    }
    out.cost_trace.push_back(current);
  }
  return out;
}

}  // namespace pdc

#endif  // PDC_FIT_ENGINE_HPP
