// SPDX-License-Identifier: Apache-2.0

/**
 * @file core.hpp
 * Domain types for principal dynamical components: observation series,
 * slot-indexed reduced models, the one-step predictive cost and the
 * plane-rotation utilities shared by every fitter.
 */

#ifndef PDC_CORE_HPP
#define PDC_CORE_HPP

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "pdc/errors.hpp"

namespace pdc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Rng = std::mt19937_64;

// ============================================================================
// TimeSeries
// ============================================================================

/**
 * n x N observation matrix (rows are channels, columns time-ordered
 * snapshots) with strictly increasing timestamps and optional exogenous
 * tracks. Immutable once built.
 */
class TimeSeries {
public:
  using Tracks = std::map<std::string, std::vector<double>>;

  explicit TimeSeries(Matrix values, std::vector<double> times = {}, Tracks exogenous = {})
      : values_(std::move(values)), times_(std::move(times)), exogenous_(std::move(exogenous)) {
    detail::require(values_.cols() >= 2, "TimeSeries: need at least two snapshots");
    detail::require(values_.rows() >= 1, "TimeSeries: need at least one channel");
    detail::require(values_.allFinite(), "TimeSeries: non-finite or missing value");
    const auto N = static_cast<std::size_t>(values_.cols());
    if (times_.empty()) {
      times_.resize(N);
      for (std::size_t j = 0; j < N; ++j) times_[j] = static_cast<double>(j + 1);
    }
    detail::require(times_.size() == N, "TimeSeries: times length differs from snapshot count");
    for (std::size_t j = 0; j < N; ++j) {
      detail::require(std::isfinite(times_[j]), "TimeSeries: non-finite time");
      if (j > 0) detail::require(times_[j] > times_[j - 1], "TimeSeries: times not strictly increasing");
    }
    for (const auto& [name, track] : exogenous_) {
      detail::require(track.size() == N, "TimeSeries: exogenous track '" + name + "' has wrong length");
      for (double v : track) detail::require(std::isfinite(v), "TimeSeries: non-finite exogenous value");
    }
  }

  int n() const { return static_cast<int>(values_.rows()); }
  int N() const { return static_cast<int>(values_.cols()); }
  const Matrix& values() const { return values_; }
  const std::vector<double>& times() const { return times_; }
  const Tracks& exogenous() const { return exogenous_; }

  const std::vector<double>& track(const std::string& name) const {
    auto it = exogenous_.find(name);
    detail::require(it != exogenous_.end(), "TimeSeries: unknown exogenous track '" + name + "'");
    return it->second;
  }

private:
  Matrix values_;
  std::vector<double> times_;
  Tracks exogenous_;
};

// ============================================================================
// SlotIndexer
// ============================================================================

/// Maps a 0-based time index to the parameter slot that governs it.
class SlotIndexer {
public:
  enum class Mode { Autonomous, Periodic, PerStep };

  static SlotIndexer autonomous() { return SlotIndexer(Mode::Autonomous, 1); }
  static SlotIndexer periodic(int period) {
    detail::require(period > 0, "SlotIndexer: period must be positive");
    return SlotIndexer(Mode::Periodic, period);
  }
  static SlotIndexer per_step() { return SlotIndexer(Mode::PerStep, 1); }

  Mode mode() const { return mode_; }
  int period() const { return period_; }

  int slot_of(int j) const {
    switch (mode_) {
      case Mode::Autonomous: return 0;
      case Mode::Periodic: return j % period_;
      case Mode::PerStep: return j;
    }
    return 0;
  }

  /// Number of stored parameter copies for a series of length N.
  int slot_count(int N) const {
    switch (mode_) {
      case Mode::Autonomous: return 1;
      case Mode::Periodic: return period_;
      case Mode::PerStep: return N;
    }
    return 1;
  }

  friend bool operator==(const SlotIndexer&, const SlotIndexer&) = default;

private:
  SlotIndexer(Mode mode, int period) : mode_(mode), period_(period) {}
  Mode mode_;
  int period_;
};

// ============================================================================
// ReducedModel
// ============================================================================

/// Parameters of one slot: Q = [Qx Qy], A_1..A_r, drift b, complement mean ybar.
struct SlotParams {
  Matrix Q;
  std::vector<Matrix> A;
  Vector b;
  Vector ybar;
};

/**
 * Closed-form record of the linear-parameter increments contributed by
 * Constant, Fourier and Monomial trial steps, so that A(s), b(s), ybar(s)
 * can be exported as finite series. Only meaningful while `valid`.
 */
struct CoefficientLedger {
  enum class Basis { Constant, Cos, Sin, Monomial };
  struct Term {
    Basis basis = Basis::Constant;
    int k = 0;
    double period = 0.0;
    std::vector<Matrix> A;
    Vector b;
    Vector ybar;
  };

  bool valid = true;
  std::vector<Term> terms;

  static double basis_value(Basis basis, int k, double period, double s) {
    constexpr double two_pi = 6.283185307179586476925286766559;
    switch (basis) {
      case Basis::Constant: return 1.0;
      case Basis::Cos: return std::cos(k * two_pi * s / period);
      case Basis::Sin: return std::sin(k * two_pi * s / period);
      case Basis::Monomial: return std::pow(s, k);
    }
    return 0.0;
  }

  Term& term(Basis basis, int k, double period, int m, int n_minus_m, int r) {
    for (auto& t : terms)
      if (t.basis == basis && t.k == k && t.period == period) return t;
    Term t;
    t.basis = basis;
    t.k = k;
    t.period = period;
    t.A.assign(static_cast<std::size_t>(r), Matrix::Zero(m, m));
    t.b = Vector::Zero(m);
    t.ybar = Vector::Zero(n_minus_m);
    terms.push_back(std::move(t));
    return terms.back();
  }
};

/**
 * Orthogonal basis, order-r linear dynamics, drift and complement mean,
 * replicated per slot. x-space dimension m, ambient dimension n.
 */
class ReducedModel {
public:
  ReducedModel(int n, int m, int r, SlotIndexer slots, int slot_count)
      : n_(n), m_(m), r_(r), slots_(slots) {
    detail::require(n >= 2, "ReducedModel: n must be at least 2");
    detail::require(m >= 1 && m < n, "ReducedModel: need 1 <= m < n");
    detail::require(r >= 1, "ReducedModel: need r >= 1");
    detail::require(slot_count >= 1, "ReducedModel: need at least one slot");
    if (slots.mode() != SlotIndexer::Mode::PerStep)
      detail::require(slot_count == slots.slot_count(0), "ReducedModel: slot count does not match indexer");
    SlotParams p;
    p.Q = Matrix::Identity(n, n);
    p.A.assign(static_cast<std::size_t>(r), Matrix::Zero(m, m));
    p.b = Vector::Zero(m);
    p.ybar = Vector::Zero(n - m);
    params_.assign(static_cast<std::size_t>(slot_count), p);
  }

  int n() const { return n_; }
  int m() const { return m_; }
  int r() const { return r_; }
  const SlotIndexer& slots() const { return slots_; }
  int slot_count() const { return static_cast<int>(params_.size()); }

  const SlotParams& slot(int s) const { return params_.at(static_cast<std::size_t>(s)); }
  SlotParams& slot(int s) { return params_.at(static_cast<std::size_t>(s)); }

  auto Qx(int s) const { return slot(s).Q.leftCols(m_); }
  auto Qy(int s) const { return slot(s).Q.rightCols(n_ - m_); }

  /// Slot governing time index j; checked against the stored slot count.
  int slot_of(int j) const {
    const int s = slots_.slot_of(j);
    detail::require(s >= 0 && s < slot_count(), "ReducedModel: time index outside stored slots");
    return s;
  }

  std::optional<CoefficientLedger>& ledger() { return ledger_; }
  const std::optional<CoefficientLedger>& ledger() const { return ledger_; }

  /// Throws unless every stored block has consistent shape and Q'Q = I within tol.
  void validate(double tol = 1e-10) const {
    for (const auto& p : params_) {
      detail::require(p.Q.rows() == n_ && p.Q.cols() == n_, "ReducedModel: Q has wrong shape");
      detail::require(static_cast<int>(p.A.size()) == r_, "ReducedModel: wrong number of A matrices");
      for (const auto& A : p.A) detail::require(A.rows() == m_ && A.cols() == m_, "ReducedModel: A has wrong shape");
      detail::require(p.b.size() == m_, "ReducedModel: b has wrong length");
      detail::require(p.ybar.size() == n_ - m_, "ReducedModel: ybar has wrong length");
      const double err = (p.Q.transpose() * p.Q - Matrix::Identity(n_, n_)).norm();
      detail::require(err <= tol, "ReducedModel: Q is not orthogonal (|Q'Q - I| = " + std::to_string(err) + ")");
    }
  }

  /// Throws unless the model can be evaluated on `series`.
  void check_compatible(const TimeSeries& series) const {
    detail::require(series.n() == n_, "model/series dimension mismatch: n differs");
    if (slots_.mode() == SlotIndexer::Mode::PerStep)
      detail::require(series.N() <= slot_count(), "per-step model has fewer slots than snapshots");
  }

private:
  int n_, m_, r_;
  SlotIndexer slots_;
  std::vector<SlotParams> params_;
  std::optional<CoefficientLedger> ledger_;
};

// ============================================================================
// Projection and prediction
// ============================================================================

/// x = Qx'z, y = Qy'z for the given slot.
inline std::pair<Vector, Vector> project_split(const ReducedModel& model, const Vector& z, int slot) {
  detail::require(z.size() == model.n(), "project_split: z has wrong dimension");
  detail::require(slot >= 0 && slot < model.slot_count(), "project_split: slot out of range");
  detail::require(z.allFinite(), "project_split: non-finite z");
  return {model.Qx(slot).transpose() * z, model.Qy(slot).transpose() * z};
}

/// Reduced coordinates of every snapshot, each projected with its own slot basis.
struct Coordinates {
  Matrix x;  // m x N
  Matrix y;  // (n-m) x N
};

inline Coordinates project_series(const ReducedModel& model, const TimeSeries& series) {
  model.check_compatible(series);
  const int N = series.N();
  Coordinates c{Matrix(model.m(), N), Matrix(model.n() - model.m(), N)};
  for (int j = 0; j < N; ++j) {
    const int s = model.slot_of(j);
    c.x.col(j).noalias() = model.Qx(s).transpose() * series.values().col(j);
    c.y.col(j).noalias() = model.Qy(s).transpose() * series.values().col(j);
  }
  return c;
}

/// b + sum_i A_i x_{j-i+1}; history is ordered oldest first, x_j last.
inline Vector predict_expectation(const ReducedModel& model, const std::vector<Vector>& history, int slot) {
  detail::require(static_cast<int>(history.size()) == model.r(), "predict_expectation: history length must equal r");
  detail::require(slot >= 0 && slot < model.slot_count(), "predict_expectation: slot out of range");
  const auto& p = model.slot(slot);
  Vector out = p.b;
  const int r = model.r();
  for (int i = 1; i <= r; ++i) {
    const Vector& xi = history[static_cast<std::size_t>(r - i)];
    detail::require(xi.size() == model.m(), "predict_expectation: history entry has wrong dimension");
    out.noalias() += p.A[static_cast<std::size_t>(i - 1)] * xi;
  }
  return out;
}

// ============================================================================
// Predictive cost
// ============================================================================

/**
 * One-step residuals for every predicted snapshot. Column c corresponds
 * to the prediction of index j+1 from j = c + r - 1.
 *   ex = x_{j+1} - b_{s(j)} - sum_i A_{i,s(j)} x_{j-i+1}
 *   ey = y_{j+1} - ybar_{s(j+1)}
 */
struct Residuals {
  Matrix ex;
  Matrix ey;
  int first = 0;  // j of the first column
};

inline Residuals residuals(const ReducedModel& model, const Coordinates& c) {
  const int N = static_cast<int>(c.x.cols());
  const int r = model.r();
  if (N <= r) throw InsufficientData("cost needs N > r (N = " + std::to_string(N) + ", r = " + std::to_string(r) + ")");
  const int terms = N - r;
  Residuals res{Matrix(model.m(), terms), Matrix(model.n() - model.m(), terms), r - 1};
  for (int col = 0; col < terms; ++col) {
    const int j = col + r - 1;
    const auto& p = model.slot(model.slot_of(j));
    Vector e = c.x.col(j + 1) - p.b;
    for (int i = 1; i <= r; ++i) e.noalias() -= p.A[static_cast<std::size_t>(i - 1)] * c.x.col(j - i + 1);
    res.ex.col(col) = e;
    res.ey.col(col) = c.y.col(j + 1) - model.slot(model.slot_of(j + 1)).ybar;
  }
  return res;
}

inline Residuals residuals(const ReducedModel& model, const TimeSeries& series) {
  return residuals(model, project_series(model, series));
}

struct Cost {
  double total = 0.0;
  double normalized = 0.0;  // total / (N - r)
};

inline Cost cost_of(const Residuals& res) {
  const double total = res.ex.squaredNorm() + res.ey.squaredNorm();
  return {total, total / static_cast<double>(res.ex.cols())};
}

/// c = sum_{j=r}^{N-1} |y_{j+1} - ybar|^2 + |x_{j+1} - x~_{j+1}|^2, and c / (N - r).
inline Cost evaluate_cost(const ReducedModel& model, const TimeSeries& series) {
  return cost_of(residuals(model, series));
}

// ============================================================================
// Orthogonal-matrix utilities
// ============================================================================

/**
 * Q * R_kl(theta) with 0-based k < l, where R_kl is the identity except
 * R(k,k) = R(l,l) = cos, R(k,l) = sin, R(l,k) = -sin. Only columns k and
 * l of Q change. Coordinates (x;y) = Q'z transform by R_kl(theta)'.
 */
inline Matrix apply_plane_rotation(const Matrix& Q, int k, int l, double theta) {
  detail::require(Q.rows() == Q.cols(), "apply_plane_rotation: Q must be square");
  detail::require(k != l, "apply_plane_rotation: k and l must differ");
  detail::require(k >= 0 && l >= 0 && k < Q.cols() && l < Q.cols(), "apply_plane_rotation: index out of range");
  detail::require(k < l, "apply_plane_rotation: need k < l");
  Matrix out = Q;
  if (theta == 0.0) return out;
  const double c = std::cos(theta), s = std::sin(theta);
  out.col(k) = c * Q.col(k) - s * Q.col(l);
  out.col(l) = s * Q.col(k) + c * Q.col(l);
  return out;
}

inline double orthogonality_error(const Matrix& Q) {
  return (Q.transpose() * Q - Matrix::Identity(Q.cols(), Q.cols())).norm();
}

/// Modified Gram-Schmidt on the columns, in place order preserved.
inline void orthonormalize(Matrix& Q) {
  for (Eigen::Index j = 0; j < Q.cols(); ++j) {
    for (Eigen::Index i = 0; i < j; ++i) Q.col(j) -= Q.col(i).dot(Q.col(j)) * Q.col(i);
    const double nrm = Q.col(j).norm();
    detail::require(nrm > 0.0, "orthonormalize: rank-deficient matrix");
    Q.col(j) /= nrm;
  }
}

/// Haar-distributed random orthogonal k x k matrix (QR of a Gaussian with sign fix).
inline Matrix random_orthogonal(int k, Rng& rng) {
  std::normal_distribution<double> gauss;
  Matrix G(k, k);
  for (int j = 0; j < k; ++j)
    for (int i = 0; i < k; ++i) G(i, j) = gauss(rng);
  Eigen::HouseholderQR<Matrix> qr(G);
  Matrix Q = qr.householderQ() * Matrix::Identity(k, k);
  const Matrix R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < k; ++i)
    if (R(i, i) < 0.0) Q.col(i) = -Q.col(i);
  return Q;
}

/// Completes an n x m column-orthonormal block to an orthogonal n x n matrix.
inline Matrix complete_basis(const Matrix& Qx) {
  const auto n = Qx.rows(), m = Qx.cols();
  detail::require(m < n, "complete_basis: need fewer columns than rows");
  Matrix M(n, m + n);
  M << Qx, Matrix::Identity(n, n);
  Eigen::HouseholderQR<Matrix> qr(M);
  Matrix full = qr.householderQ() * Matrix::Identity(n, n);
  Matrix Q(n, n);
  Q << Qx, full.rightCols(n - m);
  orthonormalize(Q);
  return Q;
}

}  // namespace pdc

#endif  // PDC_CORE_HPP
