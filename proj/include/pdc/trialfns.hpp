// SPDX-License-Identifier: Apache-2.0

/**
 * @file trialfns.hpp
 * Proposal profiles F(s) that localize each parameter update in time or
 * in exogenous variables, plus the geometric length-scale schedule and a
 * seeded sampler over a configurable mix of kinds.
 */

#ifndef PDC_TRIALFNS_HPP
#define PDC_TRIALFNS_HPP

#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pdc/core.hpp"

namespace pdc {

enum class TrialKind {
  Constant,
  TrendSigmoid,
  TrendBump,
  PeriodicSigmoid,
  PeriodicBump,
  DiscreteDelta,
  FourierCos,
  FourierSin,
  Monomial,
  RadialGaussian,
};

inline constexpr std::pair<TrialKind, std::string_view> kTrialKindNames[] = {
    {TrialKind::Constant, "constant"},
    {TrialKind::TrendSigmoid, "trend_sigmoid"},
    {TrialKind::TrendBump, "trend_bump"},
    {TrialKind::PeriodicSigmoid, "periodic_sigmoid"},
    {TrialKind::PeriodicBump, "periodic_bump"},
    {TrialKind::DiscreteDelta, "delta"},
    {TrialKind::FourierCos, "fourier_cos"},
    {TrialKind::FourierSin, "fourier_sin"},
    {TrialKind::Monomial, "monomial"},
    {TrialKind::RadialGaussian, "radial"},
};

inline std::string_view to_string(TrialKind kind) {
  for (const auto& [k, name] : kTrialKindNames)
    if (k == kind) return name;
  return "unknown";
}

inline TrialKind trial_kind_from_string(std::string_view name) {
  for (const auto& [k, n] : kTrialKindNames)
    if (n == name) return k;
  throw ContractViolation("unknown trial kind '" + std::string(name) + "'");
}

inline bool is_periodic_kind(TrialKind kind) {
  return kind == TrialKind::PeriodicSigmoid || kind == TrialKind::PeriodicBump ||
         kind == TrialKind::DiscreteDelta || kind == TrialKind::FourierCos || kind == TrialKind::FourierSin;
}

/// Whether increments from this kind can be recorded in a CoefficientLedger.
inline bool is_ledger_kind(TrialKind kind) {
  return kind == TrialKind::Constant || kind == TrialKind::FourierCos || kind == TrialKind::FourierSin ||
         kind == TrialKind::Monomial;
}

/// Kinds whose raw profile is recentred by its sample mean unless told otherwise.
inline bool default_subtract_mean(TrialKind kind) {
  switch (kind) {
    case TrialKind::TrendSigmoid:
    case TrialKind::TrendBump:
    case TrialKind::PeriodicSigmoid:
    case TrialKind::PeriodicBump:
    case TrialKind::RadialGaussian:
      return true;
    default:
      return false;
  }
}

/**
 * One member of the proposal family. Fields not used by `kind` are ignored:
 * s0/L for sigmoids and bumps, period for periodic kinds, k for Fourier
 * and monomials, index for deltas, center for radial functions.
 */
struct TrialFunction {
  TrialKind kind = TrialKind::Constant;
  double s0 = 0.0;
  double L = 1.0;
  double period = 1.0;
  int k = 0;
  int index = 0;
  Vector center;
  bool subtract_mean = false;

  static TrialFunction constant() { return {}; }
  static TrialFunction trend_sigmoid(double s0, double L, bool sub = true) {
    return make(TrialKind::TrendSigmoid, s0, L, 1.0, 0, 0, sub);
  }
  static TrialFunction trend_bump(double s0, double L, bool sub = true) {
    return make(TrialKind::TrendBump, s0, L, 1.0, 0, 0, sub);
  }
  static TrialFunction periodic_sigmoid(double s0, double L, double T, bool sub = true) {
    return make(TrialKind::PeriodicSigmoid, s0, L, T, 0, 0, sub);
  }
  static TrialFunction periodic_bump(double s0, double L, double T, bool sub = true) {
    return make(TrialKind::PeriodicBump, s0, L, T, 0, 0, sub);
  }
  static TrialFunction delta(int i, int T) { return make(TrialKind::DiscreteDelta, 0.0, 1.0, T, 0, i, false); }
  static TrialFunction fourier_cos(int k, double T, bool sub = false) {
    return make(TrialKind::FourierCos, 0.0, 1.0, T, k, 0, sub);
  }
  static TrialFunction fourier_sin(int k, double T, bool sub = false) {
    return make(TrialKind::FourierSin, 0.0, 1.0, T, k, 0, sub);
  }
  static TrialFunction monomial(int k, bool sub = false) { return make(TrialKind::Monomial, 0.0, 1.0, 1.0, k, 0, sub); }
  static TrialFunction radial(Vector center, double L, bool sub = true) {
    TrialFunction f = make(TrialKind::RadialGaussian, 0.0, L, 1.0, 0, 0, sub);
    f.center = std::move(center);
    return f;
  }

  void validate() const {
    switch (kind) {
      case TrialKind::Constant: break;
      case TrialKind::TrendSigmoid:
      case TrialKind::TrendBump:
      case TrialKind::RadialGaussian:
        detail::require(L > 0.0, "TrialFunction: L must be positive");
        break;
      case TrialKind::PeriodicSigmoid:
      case TrialKind::PeriodicBump:
        detail::require(L > 0.0, "TrialFunction: L must be positive");
        detail::require(period > 0.0, "TrialFunction: period must be positive");
        break;
      case TrialKind::DiscreteDelta:
        detail::require(period >= 1.0 && period == std::floor(period), "TrialFunction: delta period must be a positive integer");
        detail::require(index >= 0 && index < static_cast<int>(period), "TrialFunction: delta index out of range");
        break;
      case TrialKind::FourierCos:
      case TrialKind::FourierSin:
        detail::require(period > 0.0, "TrialFunction: period must be positive");
        detail::require(k >= 1, "TrialFunction: Fourier wavenumber must be >= 1");
        break;
      case TrialKind::Monomial:
        detail::require(k >= 0, "TrialFunction: monomial degree must be >= 0");
        break;
    }
  }

private:
  static TrialFunction make(TrialKind kind, double s0, double L, double T, int k, int i, bool sub) {
    TrialFunction f;
    f.kind = kind;
    f.s0 = s0;
    f.L = L;
    f.period = T;
    f.k = k;
    f.index = i;
    f.subtract_mean = sub;
    f.validate();
    return f;
  }
};

// ============================================================================
// Evaluation
// ============================================================================

/// Raw F(s) for scalar kinds (no mean subtraction).
inline double evaluate_weight(const TrialFunction& F, double s) {
  constexpr double two_pi = 6.283185307179586476925286766559;
  detail::require(F.kind != TrialKind::RadialGaussian, "evaluate_weight: radial function needs a vector argument");
  switch (F.kind) {
    case TrialKind::Constant:
      return 1.0;
    case TrialKind::TrendSigmoid: {
      const double S = s - F.s0;
      return S / std::sqrt(S * S + F.L * F.L);
    }
    case TrialKind::TrendBump: {
      const double S = s - F.s0;
      return F.L * F.L * F.L / std::pow(S * S + F.L * F.L, 1.5);
    }
    case TrialKind::PeriodicSigmoid: {
      const double S = two_pi * (s - F.s0) / F.period;
      const double h = std::sin(0.5 * S);
      return std::sin(S) / std::sqrt(4.0 * h * h + F.L * F.L);
    }
    case TrialKind::PeriodicBump: {
      const double S = two_pi * (s - F.s0) / F.period;
      const double h = std::sin(0.5 * S);
      return F.L * F.L * F.L / std::pow(4.0 * h * h + F.L * F.L, 1.5);
    }
    case TrialKind::DiscreteDelta: {
      const auto T = static_cast<long long>(F.period);
      long long phase = std::llround(s) % T;
      if (phase < 0) phase += T;
      return phase == F.index ? 1.0 : 0.0;
    }
    case TrialKind::FourierCos:
      return std::cos(F.k * two_pi * s / F.period);
    case TrialKind::FourierSin:
      return std::sin(F.k * two_pi * s / F.period);
    case TrialKind::Monomial:
      return std::pow(s, F.k);
    case TrialKind::RadialGaussian:
      break;
  }
  return 0.0;
}

/// Raw F(s) for a vector argument; only radial functions take one.
inline double evaluate_weight(const TrialFunction& F, const Vector& s) {
  detail::require(F.kind == TrialKind::RadialGaussian, "evaluate_weight: vector argument passed to scalar kind");
  detail::require(s.size() == F.center.size(), "evaluate_weight: radial argument has wrong dimension");
  const double r2 = (s - F.center).squaredNorm() / (F.L * F.L);
  return std::exp(-r2);
}

namespace detail {
inline std::vector<double> recenter(std::vector<double> w, bool subtract_mean) {
  if (subtract_mean) {
    const double mean = std::accumulate(w.begin(), w.end(), 0.0) / static_cast<double>(w.size());
    for (double& v : w) v -= mean;
  }
  return w;
}
}  // namespace detail

/// F(s_j) over a sample, minus the sample mean when F.subtract_mean.
inline std::vector<double> evaluate_weights_batch(const TrialFunction& F, std::span<const double> s) {
  detail::require(!s.empty(), "evaluate_weights_batch: empty sample");
  std::vector<double> w(s.size());
  for (std::size_t j = 0; j < s.size(); ++j) w[j] = evaluate_weight(F, s[j]);
  return detail::recenter(std::move(w), F.subtract_mean);
}

inline std::vector<double> evaluate_weights_batch(const TrialFunction& F, std::span<const Vector> s) {
  detail::require(!s.empty(), "evaluate_weights_batch: empty sample");
  std::vector<double> w(s.size());
  for (std::size_t j = 0; j < s.size(); ++j) w[j] = evaluate_weight(F, s[j]);
  return detail::recenter(std::move(w), F.subtract_mean);
}

// ============================================================================
// Length schedule and sampling
// ============================================================================

/// L = L0 (Lf/L0)^(k/k_tot): equal algorithmic time per octave of length scale.
inline double anneal_length(int k, int k_tot, double L0, double Lf) {
  detail::require(Lf > 0.0 && L0 >= Lf, "anneal_length: need L0 >= Lf > 0");
  detail::require(k_tot >= 0 && k >= 0 && k <= k_tot, "anneal_length: need 0 <= k <= k_tot");
  if (k_tot == 0) return L0;
  return L0 * std::pow(Lf / L0, static_cast<double>(k) / static_cast<double>(k_tot));
}

/// Probability of each kind per step, plus the sampling knobs shared by all kinds.
struct TrialMix {
  std::vector<std::pair<TrialKind, double>> weights{{TrialKind::Constant, 1.0}};
  int fourier_max_k = 8;
  int monomial_max_k = 3;

  /// Constant with probability p_constant, the rest split evenly over `family`.
  static TrialMix with_constant(double p_constant, const std::vector<TrialKind>& family) {
    TrialMix mix;
    mix.weights.clear();
    if (family.empty()) {
      mix.weights.push_back({TrialKind::Constant, 1.0});
      return mix;
    }
    mix.weights.push_back({TrialKind::Constant, p_constant});
    const double each = (1.0 - p_constant) / static_cast<double>(family.size());
    for (TrialKind k : family) mix.weights.push_back({k, each});
    return mix;
  }

  void validate() const {
    detail::require(!weights.empty(), "TrialMix: empty mix");
    double total = 0.0;
    for (const auto& [kind, p] : weights) {
      detail::require(p >= 0.0, "TrialMix: negative probability");
      total += p;
    }
    detail::require(std::abs(total - 1.0) < 1e-9, "TrialMix: probabilities must sum to 1");
    detail::require(fourier_max_k >= 1, "TrialMix: fourier_max_k must be >= 1");
    detail::require(monomial_max_k >= 1, "TrialMix: monomial_max_k must be >= 1");
  }

  bool only_ledger_kinds() const {
    for (const auto& [kind, p] : weights)
      if (p > 0.0 && !is_ledger_kind(kind)) return false;
    return true;
  }
};

/// Where and when a trial is drawn: schedule position, s-range, period, radial box.
struct DrawContext {
  int step = 0;
  int k_tot = 1;
  double L0 = 1.0;
  double Lf = 1.0;
  double s_min = 0.0;
  double s_max = 1.0;
  double period = 12.0;
  Vector radial_lo;
  Vector radial_hi;
};

inline TrialFunction draw_trial(Rng& rng, const TrialMix& mix, const DrawContext& ctx) {
  mix.validate();
  std::vector<double> probs;
  probs.reserve(mix.weights.size());
  for (const auto& w : mix.weights) probs.push_back(w.second);
  std::discrete_distribution<std::size_t> pick(probs.begin(), probs.end());
  const TrialKind kind = mix.weights[pick(rng)].first;

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double L = anneal_length(std::min(ctx.step, ctx.k_tot), ctx.k_tot, ctx.L0, ctx.Lf);
  const double s0_trend = ctx.s_min + (ctx.s_max - ctx.s_min) * unit(rng);
  const double s0_periodic = ctx.period * unit(rng);
  const bool sub = default_subtract_mean(kind);

  auto fourier_k = [&] {
    std::vector<double> pk(static_cast<std::size_t>(mix.fourier_max_k));
    for (int k = 1; k <= mix.fourier_max_k; ++k) pk[static_cast<std::size_t>(k - 1)] = std::ldexp(1.0, -k);
    std::discrete_distribution<int> dk(pk.begin(), pk.end());
    return dk(rng) + 1;
  };

  switch (kind) {
    case TrialKind::Constant: return TrialFunction::constant();
    case TrialKind::TrendSigmoid: return TrialFunction::trend_sigmoid(s0_trend, L, sub);
    case TrialKind::TrendBump: return TrialFunction::trend_bump(s0_trend, L, sub);
    case TrialKind::PeriodicSigmoid: return TrialFunction::periodic_sigmoid(s0_periodic, L, ctx.period, sub);
    case TrialKind::PeriodicBump: return TrialFunction::periodic_bump(s0_periodic, L, ctx.period, sub);
    case TrialKind::DiscreteDelta: {
      const int T = static_cast<int>(ctx.period);
      std::uniform_int_distribution<int> di(0, T - 1);
      return TrialFunction::delta(di(rng), T);
    }
    case TrialKind::FourierCos: return TrialFunction::fourier_cos(fourier_k(), ctx.period, sub);
    case TrialKind::FourierSin: return TrialFunction::fourier_sin(fourier_k(), ctx.period, sub);
    case TrialKind::Monomial: {
      std::uniform_int_distribution<int> dk(1, mix.monomial_max_k);
      return TrialFunction::monomial(dk(rng), sub);
    }
    case TrialKind::RadialGaussian: {
      detail::require(ctx.radial_lo.size() > 0 && ctx.radial_lo.size() == ctx.radial_hi.size(),
                      "draw_trial: radial functions need a bounding box");
      Vector c(ctx.radial_lo.size());
      for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = ctx.radial_lo(i) + (ctx.radial_hi(i) - ctx.radial_lo(i)) * unit(rng);
      return TrialFunction::radial(std::move(c), L, sub);
    }
  }
  return TrialFunction::constant();
}

}  // namespace pdc

#endif  // PDC_TRIALFNS_HPP
