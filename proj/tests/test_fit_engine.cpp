// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "support.hpp"

using namespace pdc;
using pdc::testing::gaussian_matrix;
using pdc::testing::gaussian_vector;
using pdc::testing::ones;
using pdc::testing::random_model;

namespace {

std::vector<double> uniform_weights(int N, Rng& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> w(static_cast<std::size_t>(N));
  for (double& v : w) v = u(rng);
  return w;
}

/// Total cost after rotating every slot by alpha * slot weight in the (k, m+h) plane.
double rotated_cost(const TimeSeries& series, const ReducedModel& model, int k, int h, double alpha,
                    const std::vector<double>& slot_w) {
  ReducedModel tmp = model;
  rotate_slots(tmp, k, h, alpha, slot_w);
  return evaluate_cost(tmp, series).total;
}

/// Richardson-extrapolated central differences of the rotated cost.
std::pair<double, double> fd_derivatives(const TimeSeries& series, const ReducedModel& model, int k, int h,
                                         const std::vector<double>& slot_w, double delta) {
  const double c0 = rotated_cost(series, model, k, h, 0.0, slot_w);
  auto d1 = [&](double d) {
    return (rotated_cost(series, model, k, h, d, slot_w) - rotated_cost(series, model, k, h, -d, slot_w)) / (2 * d);
  };
  auto d2 = [&](double d) {
    return (rotated_cost(series, model, k, h, d, slot_w) - 2 * c0 + rotated_cost(series, model, k, h, -d, slot_w)) / (d * d);
  };
  return {(4 * d1(delta / 2) - d1(delta)) / 3, (4 * d2(10 * delta) - d2(20 * delta)) / 3};
}

/// Time weights consistent with slot weights (weights[j] = slot_w[slot(j)]).
std::vector<double> time_weights(const ReducedModel& model, int N, const std::vector<double>& slot_w) {
  std::vector<double> w(static_cast<std::size_t>(N));
  for (int j = 0; j < N; ++j) w[static_cast<std::size_t>(j)] = slot_w[static_cast<std::size_t>(model.slot_of(j))];
  return w;
}

}  // namespace

// ---------------------------------------------------------------------------
// regress_dynamics
// ---------------------------------------------------------------------------

TEST(RegressDynamics, ClosedFormMemoryOneNoDrift) {
  Rng rng(1);
  const TimeSeries series = pdc::testing::random_series(4, 60, rng);
  ReducedModel model(4, 2, 1, SlotIndexer::autonomous(), 1);
  model.slot(0).Q = random_orthogonal(4, rng);
  const Matrix X = model.Qx(0).transpose() * series.values();
  const Matrix X0 = X.leftCols(59), X1 = X.rightCols(59);
  const Matrix expected = X1 * X0.transpose() * (X0 * X0.transpose()).inverse();
  const Increments inc = regress_dynamics(series, model, ones(60), {0.0, false, false});
  EXPECT_LT((inc.B[0] - expected).norm(), 1e-12 * expected.norm());
  EXPECT_EQ(inc.d.norm(), 0.0);
  EXPECT_EQ(inc.v.norm(), 0.0);
}

TEST(RegressDynamics, ScalarFormula) {
  Rng rng(2);
  const TimeSeries series = pdc::testing::random_series(2, 40, rng);
  ReducedModel model(2, 1, 1, SlotIndexer::autonomous(), 1);
  model.slot(0).Q = planar_rotation(0.4);
  const Eigen::RowVectorXd x = model.Qx(0).transpose() * series.values();
  const double a = x.head(39).dot(x.tail(39)) / x.head(39).squaredNorm();
  EXPECT_NEAR(regress_dynamics(series, model, ones(40), {0.0, false, false}).B[0](0, 0), a, 1e-14);
}

TEST(RegressDynamics, RecoversNoiselessOrderThree) {
  Rng rng(3);
  ReducedModel truth = random_model(5, 2, 3, SlotIndexer::autonomous(), 1, rng, 0.25);
  const Scenario sc = simulate(truth, 300, 0.0, 0.0, 9);
  ReducedModel start = truth;
  for (auto& A : start.slot(0).A) A.setZero();
  start.slot(0).b.setZero();
  start.slot(0).ybar.setZero();
  const Increments inc = regress_dynamics(sc.series, start, ones(300));
  for (int i = 0; i < 3; ++i) EXPECT_LT((inc.B[static_cast<std::size_t>(i)] - truth.slot(0).A[static_cast<std::size_t>(i)]).norm(), 1e-8);
  EXPECT_LT((inc.d - truth.slot(0).b).norm(), 1e-8);
}

TEST(RegressDynamics, MatchesDenseNormalEquations) {
  Rng rng(4);
  const int n = 4, m = 2, r = 2, N = 9;
  for (int trial = 0; trial < 5; ++trial) {
    const TimeSeries series = pdc::testing::random_series(n, N, rng);
    const ReducedModel model = random_model(n, m, r, SlotIndexer::autonomous(), 1, rng);
    const std::vector<double> w = uniform_weights(N, rng, 0.2, 1.0);

    // unknowns: B_1 (m*m), B_2 (m*m), d (m), column-major per block, plus v (n-m)
    const int dim_x = m * r + 1;
    const int unknowns = m * dim_x + (n - m);
    Matrix D = Matrix::Zero((N - r) * n, unknowns);
    Vector e = Vector::Zero((N - r) * n);
    int row = 0;
    for (int j = r - 1; j + 1 < N; ++j) {
      const Vector xj1 = model.Qx(0).transpose() * series.values().col(j + 1);
      const Vector yj1 = model.Qy(0).transpose() * series.values().col(j + 1);
      Vector phi(dim_x);
      for (int h = 1; h <= r; ++h) phi.segment((h - 1) * m, m) = model.Qx(0).transpose() * series.values().col(j - h + 1);
      phi(dim_x - 1) = 1.0;
      Vector pred = model.slot(0).b;
      for (int h = 0; h < r; ++h) pred += model.slot(0).A[static_cast<std::size_t>(h)] * phi.segment(h * m, m);
      for (int i = 0; i < m; ++i, ++row) {
        e(row) = xj1(i) - pred(i);
        for (int c = 0; c < dim_x; ++c) D(row, c * m + i) = w[static_cast<std::size_t>(j)] * phi(c);
      }
      for (int i = 0; i < n - m; ++i, ++row) {
        e(row) = yj1(i) - model.slot(0).ybar(i);
        D(row, m * dim_x + i) = w[static_cast<std::size_t>(j + 1)];
      }
    }
    const Vector sol = (D.transpose() * D).ldlt().solve(D.transpose() * e);
    const Increments inc = regress_dynamics(series, model, w);
    for (int h = 0; h < r; ++h)
      for (int c = 0; c < m; ++c)
        for (int i = 0; i < m; ++i) EXPECT_NEAR(inc.B[static_cast<std::size_t>(h)](i, c), sol((h * m + c) * m + i), 1e-9);
    for (int i = 0; i < m; ++i) EXPECT_NEAR(inc.d(i), sol(m * r * m + i), 1e-9);
    for (int i = 0; i < n - m; ++i) EXPECT_NEAR(inc.v(i), sol(m * dim_x + i), 1e-9);
  }
}

TEST(RegressDynamics, GradientsVanishAfterUpdate) {
  Rng rng(5);
  for (int r = 1; r <= 3; ++r) {
    const int N = 30;
    const TimeSeries series = pdc::testing::random_series(5, N, rng);
    ReducedModel model = random_model(5, 2, r, SlotIndexer::per_step(), N, rng);
    const std::vector<double> w = uniform_weights(N, rng);
    apply_increments(model, regress_dynamics(series, model, w), w);
    const LinearGradients g = linear_gradients(series, model, w);
    const double scale = 1.0 + evaluate_cost(model, series).total;
    for (const auto& dB : g.dB) EXPECT_LT(dB.norm(), 1e-8 * scale);
    EXPECT_LT(g.dd.norm(), 1e-8 * scale);
    EXPECT_LT(g.dv.norm(), 1e-8 * scale);
  }
}

TEST(RegressDynamics, LocalMinimumProbe) {
  Rng rng(6);
  const TimeSeries series = pdc::testing::random_series(3, 50, rng);
  ReducedModel model = random_model(3, 2, 2, SlotIndexer::autonomous(), 1, rng);
  apply_increments(model, regress_dynamics(series, model, ones(50)), std::vector<double>{1.0});
  const double base = evaluate_cost(model, series).total;
  for (int h = 0; h < 2; ++h)
    for (int i = 0; i < 2; ++i)
      for (int c = 0; c < 2; ++c)
        for (double step : {1e-4, -1e-4}) {
          ReducedModel p = model;
          p.slot(0).A[static_cast<std::size_t>(h)](i, c) += step;
          EXPECT_GE(evaluate_cost(p, series).total, base);
        }
}

TEST(RegressDynamics, SingularSystemAndRidgeRetry) {
  // x constant in time makes phi = (x, 1) collinear
  Matrix Z(2, 20);
  for (int j = 0; j < 20; ++j) Z.col(j) << 1.0, 0.1 * std::sin(j);
  const TimeSeries series(Z);
  ReducedModel model(2, 1, 1, SlotIndexer::autonomous(), 1);
  EXPECT_THROW(regress_dynamics(series, model, ones(20)), IllConditioned);
  FitConfig cfg;
  EXPECT_NO_THROW(detail::regress_with_retry(series, model, ones(20), cfg));
  EXPECT_NO_THROW(fit(series, cfg));
}

// ---------------------------------------------------------------------------
// rotation_derivatives / plan_rotation_step
// ---------------------------------------------------------------------------

TEST(RotationDerivatives, ZeroDynamicsGivesZeroGradient) {
  Rng rng(7);
  const TimeSeries series = pdc::testing::random_series(4, 25, rng);
  ReducedModel model(4, 2, 1, SlotIndexer::autonomous(), 1);
  model.slot(0).Q = random_orthogonal(4, rng);
  for (int k = 0; k < 2; ++k)
    for (int h = 0; h < 2; ++h) EXPECT_NEAR(rotation_derivatives(series, model, k, h, ones(25)).g, 0.0, 1e-12);
}

TEST(RotationDerivatives, NoiselessOptimumIsStationary) {
  const Scenario sc = generate(ScenarioSpec{Auto2D{0.6, std::numbers::pi / 3, 0.0, 0.0}, 500, 3});
  EXPECT_NEAR(rotation_derivatives(sc.series, sc.truth, 0, 0, ones(500)).g, 0.0, 1e-8);
}

TEST(RotationDerivatives, MatchFiniteDifferences) {
  Rng rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    const int r = 1 + trial % 3;
    const int n = 3 + trial % 3, m = 1 + trial % 2, N = 25;
    const TimeSeries series = pdc::testing::random_series(n, N, rng);
    const int mode = trial % 3;
    const ReducedModel model = mode == 0   ? random_model(n, m, r, SlotIndexer::autonomous(), 1, rng)
                               : mode == 1 ? random_model(n, m, r, SlotIndexer::periodic(4), 4, rng)
                                           : random_model(n, m, r, SlotIndexer::per_step(), N, rng);
    const std::vector<double> slot_w = mode == 0 ? std::vector<double>{1.0} : uniform_weights(model.slot_count(), rng);
    const std::vector<double> w = time_weights(model, N, slot_w);
    std::uniform_int_distribution<int> pk(0, m - 1), ph(0, n - m - 1);
    const int k = pk(rng), h = ph(rng);
    const auto d = rotation_derivatives(series, model, k, h, w);
    const auto [g_fd, H_fd] = fd_derivatives(series, model, k, h, slot_w, 1e-5);
    const double c0 = evaluate_cost(model, series).total;
    EXPECT_LT(std::abs(d.g - g_fd) / std::max({std::abs(d.g), std::abs(g_fd), 1e-3 * c0}), 1e-6) << "trial " << trial;
    EXPECT_LT(std::abs(d.H - H_fd) / std::max({std::abs(d.H), std::abs(H_fd), 1e-3 * c0}), 1e-4) << "trial " << trial;
  }
}

TEST(PlanRotationStep, Examples) {
  EXPECT_EQ(plan_rotation_step(0.0, 5.0, 0.3), 0.0);
  EXPECT_EQ(plan_rotation_step(0.0, -5.0, 0.3), 0.0);
  EXPECT_DOUBLE_EQ(plan_rotation_step(1.0, 2.0, 1.0), -0.5);
  EXPECT_NEAR(plan_rotation_step(1.0, -1.0, 0.1), -0.1 / std::sqrt(1.01), 1e-15);
  EXPECT_DOUBLE_EQ(plan_rotation_step(-10.0, 1.0, 0.2), 0.2);
  EXPECT_THROW(plan_rotation_step(1.0, 1.0, 0.0), ContractViolation);
}

TEST(PlanRotationStep, AlwaysBounded) {
  Rng rng(9);
  std::normal_distribution<double> g(0.0, 100.0);
  for (int i = 0; i < 10000; ++i) {
    const double eps = 0.01 + 0.5 * std::abs(g(rng)) / 100.0;
    ASSERT_LE(std::abs(plan_rotation_step(g(rng), g(rng), eps)), eps + 1e-15);
  }
}

// ---------------------------------------------------------------------------
// randomize_bases
// ---------------------------------------------------------------------------

TEST(RandomizeBases, ScalarXIsSignFlip) {
  Rng rng(10);
  const Scenario sc = generate(ScenarioSpec{Auto2D{}, 200, 1});
  ReducedModel model = sc.truth;
  const double before = evaluate_cost(model, sc.series).total;
  randomize_bases(model, rng);
  EXPECT_NEAR(std::abs(model.Qx(0).col(0).dot(sc.truth.Qx(0).col(0))), 1.0, 1e-15);
  EXPECT_NEAR(evaluate_cost(model, sc.series).total, before, 1e-12 * before);
}

TEST(RandomizeBases, CostAndOrthogonalityPreserved) {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const TimeSeries series = pdc::testing::random_series(6, 30, rng);
    ReducedModel model = random_model(6, 3, 2, SlotIndexer::periodic(5), 5, rng);
    const double before = evaluate_cost(model, series).total;
    for (int i = 0; i < 50; ++i) randomize_bases(model, rng);
    EXPECT_NEAR(evaluate_cost(model, series).total, before, 1e-9 * before);
    for (int s = 0; s < 5; ++s) EXPECT_LT(orthogonality_error(model.slot(s).Q), 1e-10);
  }
}

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

TEST(Fit, PlanarRecovery) {
  const Scenario sc = generate(ScenarioSpec{Auto2D{}, 1000, 42});
  FitConfig cfg;
  cfg.seed = 42;
  const FitResult res = fit(sc.series, cfg);
  const PlanarCurves c = align_planar(sc.truth, res.model);
  EXPECT_NEAR(c.a[0], 0.6, 0.05);
  EXPECT_NEAR(angle_distance(canonical_angle(res.model.Qx(0).col(0)), std::numbers::pi / 3), 0.0, 0.05);
  EXPECT_NEAR(res.report.final_cost, 0.45, 0.05);
  EXPECT_LE(res.report.steps_taken, 500);
}

TEST(Fit, MultidimensionalRecovery) {
  const Scenario sc = generate(ScenarioSpec{published_multi_example(), 1000, 42});
  FitConfig cfg;
  cfg.m = 2;
  cfg.k_tot = 3000;
  cfg.seed = 42;
  const FitResult res = fit(sc.series, cfg);
  const SubspaceComparison cmp = compare_models(sc.truth, res.model);
  EXPECT_LT(cmp.e_Q, 0.1);
  EXPECT_LT(cmp.e_A, 0.1);
  EXPECT_NEAR(res.report.final_cost, 1.26, 0.1);
}

TEST(Fit, AcceptedStepsAreMonotone) {
  const Scenario sc = generate(ScenarioSpec{Markov2D{}, 400, 5});
  FitConfig cfg;
  cfg.r = 3;
  cfg.k_tot = 300;
  cfg.seed = 5;
  const FitResult res = fit(sc.series, cfg);
  ASSERT_EQ(res.report.cost_trace.size(), res.report.steps.size() + 1);
  for (std::size_t i = 1; i < res.report.cost_trace.size(); ++i) EXPECT_LE(res.report.cost_trace[i], res.report.cost_trace[i - 1]);
  EXPECT_EQ(res.report.final_cost, res.report.cost_trace.back());
}

TEST(Fit, DeterministicGivenSeed) {
  const Scenario sc = generate(ScenarioSpec{published_multi_example(), 300, 8});
  FitConfig cfg;
  cfg.m = 2;
  cfg.k_tot = 200;
  cfg.seed = 99;
  const FitResult a = fit(sc.series, cfg), b = fit(sc.series, cfg);
  EXPECT_EQ(a.report.cost_trace, b.report.cost_trace);
  EXPECT_EQ(a.model.slot(0).Q, b.model.slot(0).Q);
  EXPECT_EQ(a.model.slot(0).A[0], b.model.slot(0).A[0]);
}

TEST(Fit, ConsistentWithPlanarPath) {
  const Scenario sc = generate(ScenarioSpec{Auto2D{}, 1000, 17});
  FitConfig cfg;
  cfg.seed = 17;
  cfg.fit_drift = false;
  cfg.fit_ybar = false;
  cfg.randomize = false;
  cfg.stop_tol = 0.0;
  cfg.k_tot = 60;
  const ReducedModel start = initial_model(sc.series, cfg);
  const double theta0 = std::atan2(start.Qx(0)(1, 0), start.Qx(0)(0, 0));
  const FitResult engine = fit(sc.series, cfg);
  const PlanarFit planar = fit_planar(sc.series, 60, cfg.eps_theta, theta0);
  ASSERT_EQ(engine.report.cost_trace.size(), planar.cost_trace.size());
  for (std::size_t i = 0; i < planar.cost_trace.size(); ++i)
    EXPECT_NEAR(engine.report.cost_trace[i], planar.cost_trace[i], 1e-10) << "step " << i;
  EXPECT_NEAR(angle_distance(canonical_angle(engine.model.Qx(0).col(0)), std::fmod(planar.theta + 8 * std::numbers::pi, std::numbers::pi)), 0.0, 1e-8);
  EXPECT_NEAR(engine.model.slot(0).A[0](0, 0), planar.a, 1e-8);
}

TEST(Fit, DominatesFixedPcaSubspace) {
  Rng rng(12);
  for (int trial = 0; trial < 3; ++trial) {
    ReducedModel truth = random_model(4, 2, 1, SlotIndexer::autonomous(), 1, rng, 0.4);
    const Scenario sc = simulate(truth, 300, 0.4, 0.5, 100 + trial);
    FitConfig cfg;
    cfg.m = 2;
    cfg.k_tot = 200;
    cfg.seed = trial;
    ReducedModel pca_model(4, 2, 1, SlotIndexer::autonomous(), 1);
    const PcaResult p = principal_components(sc.series);
    pca_model.slot(0).Q = p.basis;
    apply_increments(pca_model, regress_dynamics(sc.series, pca_model, ones(300)), std::vector<double>{1.0});
    EXPECT_LE(fit(sc.series, cfg).report.final_cost, evaluate_cost(pca_model, sc.series).normalized + 1e-9);
  }
}

TEST(Fit, LedgerReconstructsPeriodicSlots) {
  const Scenario sc = generate(ScenarioSpec{Seasonal2D{}, 360, 3});
  FitConfig cfg;
  cfg.slots = SlotIndexer::periodic(12);
  cfg.mix = TrialMix::with_constant(0.4, {TrialKind::FourierCos, TrialKind::FourierSin});
  cfg.mix.fourier_max_k = 4;
  cfg.k_tot = 150;
  cfg.seed = 3;
  const FitResult res = fit(sc.series, cfg);
  ASSERT_TRUE(res.model.ledger().has_value());
  const CoefficientLedger& L = *res.model.ledger();
  ASSERT_TRUE(L.valid);
  EXPECT_GT(L.terms.size(), 1u);
  for (int s = 0; s < 12; ++s) {
    Matrix A = Matrix::Zero(1, 1);
    Vector b = Vector::Zero(1), ybar = Vector::Zero(1);
    for (const auto& t : L.terms) {
      const double f = CoefficientLedger::basis_value(t.basis, t.k, t.period, s);
      A += f * t.A[0];
      b += f * t.b;
      ybar += f * t.ybar;
    }
    EXPECT_NEAR(A(0, 0), res.model.slot(s).A[0](0, 0), 1e-10);
    EXPECT_NEAR(b(0), res.model.slot(s).b(0), 1e-10);
    EXPECT_NEAR(ybar(0), res.model.slot(s).ybar(0), 1e-10);
  }
}

TEST(Fit, LedgerReconstructsMonomialTrend) {
  Rng rng(13);
  const int N = 80;
  Matrix Z = gaussian_matrix(3, N, rng, 0.5);
  std::vector<double> times(N);
  for (int j = 0; j < N; ++j) {
    times[static_cast<std::size_t>(j)] = j / static_cast<double>(N);
    Z(0, j) += 2.0 * times[static_cast<std::size_t>(j)];
  }
  const TimeSeries series(Z, times);
  FitConfig cfg;
  cfg.slots = SlotIndexer::per_step();
  cfg.mix = TrialMix::with_constant(0.5, {TrialKind::Monomial});
  cfg.k_tot = 40;
  cfg.seed = 13;
  const FitResult res = fit(series, cfg);
  ASSERT_TRUE(res.model.ledger() && res.model.ledger()->valid);
  for (int j = 0; j < N; j += 7) {
    Vector b = Vector::Zero(1);
    for (const auto& t : res.model.ledger()->terms) b += CoefficientLedger::basis_value(t.basis, t.k, t.period, times[static_cast<std::size_t>(j)]) * t.b;
    EXPECT_NEAR(b(0), res.model.slot(j).b(0), 1e-10);
  }
}

TEST(Fit, NoLedgerForNonLedgerKinds) {
  const Scenario sc = generate(ScenarioSpec{Seasonal2D{}, 120, 3});
  FitConfig cfg;
  cfg.slots = SlotIndexer::periodic(12);
  cfg.mix = TrialMix::with_constant(0.5, {TrialKind::PeriodicSigmoid});
  cfg.k_tot = 10;
  EXPECT_FALSE(fit(sc.series, cfg).model.ledger().has_value());
}

TEST(Fit, FlagsUnvisitedSlots) {
  Rng rng(14);
  const TimeSeries series = pdc::testing::random_series(3, 8, rng);
  FitConfig cfg;
  cfg.slots = SlotIndexer::periodic(12);
  cfg.k_tot = 5;
  const FitResult res = fit(series, cfg);
  EXPECT_EQ(res.report.unvisited_slots, (std::vector<int>{8, 9, 10, 11}));
}

TEST(Fit, ConfigValidation) {
  Rng rng(15);
  const TimeSeries series = pdc::testing::random_series(3, 20, rng);
  FitConfig cfg;
  cfg.m = 3;
  EXPECT_THROW(fit(series, cfg), ContractViolation);
  cfg = FitConfig{};
  cfg.r = 20;
  EXPECT_THROW(fit(series, cfg), ContractViolation);
  cfg = FitConfig{};
  cfg.eps_theta = 2.0;
  EXPECT_THROW(fit(series, cfg), ContractViolation);
  cfg = FitConfig{};
  cfg.mix = TrialMix::with_constant(0.5, {TrialKind::PeriodicBump});
  EXPECT_THROW(fit(series, cfg), ContractViolation);
  cfg.slots = SlotIndexer::per_step();
  cfg.mix = TrialMix::with_constant(0.5, {TrialKind::RadialGaussian});
  EXPECT_THROW(fit(series, cfg), ContractViolation);
  cfg.mix = TrialMix{};
  cfg.trial_variable = "nope";
  EXPECT_THROW(fit(series, cfg), ContractViolation);
}

TEST(Fit, RadialTrialsOnExogenousTracks) {
  Rng rng(16);
  const int N = 120;
  std::vector<double> s1(N), s2(N);
  Matrix Z = gaussian_matrix(3, N, rng, 0.3);
  for (int j = 0; j < N; ++j) {
    s1[static_cast<std::size_t>(j)] = std::sin(0.1 * j);
    s2[static_cast<std::size_t>(j)] = std::cos(0.07 * j);
    Z(0, j) += s1[static_cast<std::size_t>(j)];
  }
  const TimeSeries series(Z, {}, {{"u", s1}, {"v", s2}});
  FitConfig cfg;
  cfg.slots = SlotIndexer::per_step();
  cfg.mix = TrialMix::with_constant(0.5, {TrialKind::RadialGaussian});
  cfg.radial_tracks = {"u", "v"};
  cfg.L0 = 1.0;
  cfg.Lf = 0.3;
  cfg.k_tot = 60;
  const FitResult res = fit(series, cfg);
  EXPECT_LE(res.report.final_cost, res.report.cost_trace.front());
  for (int s = 0; s < N; s += 13) EXPECT_LT(orthogonality_error(res.model.slot(s).Q), 1e-9);
}
