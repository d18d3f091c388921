// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "support.hpp"

using namespace pdc;
using pdc::testing::gaussian_matrix;

namespace {

/// |Z - P Z|_F^2 for the projector onto the columns of an orthonormal U (Z centered).
double reconstruction_error(const Matrix& Zc, const Matrix& U) {
  return (Zc - U * (U.transpose() * Zc)).squaredNorm();
}

}  // namespace

TEST(PrincipalComponents, RankOneLine) {
  Vector dir(3);
  dir << 1.0, 2.0, -2.0;
  dir.normalize();
  Matrix Z(3, 40);
  for (int j = 0; j < 40; ++j) Z.col(j) = (0.3 * j - 4.0) * dir + Vector::Constant(3, 5.0);
  const PcaResult p = principal_components(TimeSeries(Z));
  EXPECT_LT(p.singular_values.tail(2).norm(), 1e-10);
  EXPECT_NEAR(std::abs(p.basis.col(0).dot(dir)), 1.0, 1e-12);
  EXPECT_LT((p.mean - Vector::Constant(3, 5.0) - (0.3 * 19.5 - 4.0) * dir).norm(), 1e-12);
}

TEST(PrincipalComponents, Invariants) {
  Rng rng(3);
  const TimeSeries s(gaussian_matrix(4, 30, rng));
  const PcaResult p = principal_components(s);
  EXPECT_LT(orthogonality_error(p.basis), 1e-10);
  for (int i = 1; i < 4; ++i) EXPECT_LE(p.singular_values(i), p.singular_values(i - 1));
  const Matrix Zc = s.values().colwise() - p.mean;
  EXPECT_NEAR(p.singular_values.squaredNorm(), Zc.squaredNorm(), 1e-10 * Zc.squaredNorm());
}

TEST(PrincipalComponents, FewerSnapshotsThanChannels) {
  Rng rng(4);
  const PcaResult p = principal_components(TimeSeries(gaussian_matrix(6, 3, rng)));
  EXPECT_EQ(p.basis.rows(), 6);
  EXPECT_EQ(p.basis.cols(), 6);
  EXPECT_EQ(p.singular_values.size(), 6);
  EXPECT_LT(p.singular_values.tail(4).norm(), 1e-10);  // centered rank <= N - 1
}

TEST(PrincipalComponents, PlanarDataLeadingComponentIsNotDynamical) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Scenario sc = generate(ScenarioSpec{Auto2D{}, 1000, seed});
    const PcaResult p = principal_components(sc.series);
    FitConfig cfg;
    cfg.seed = seed;
    const FitResult f = fit(sc.series, cfg);
    const double angle = std::acos(std::min(1.0, std::abs(p.basis.col(0).dot(f.model.Qx(0).col(0)))));
    EXPECT_GT(angle, std::numbers::pi / 2 - 5.0 * std::numbers::pi / 180.0) << "seed " << seed;
  }
}

TEST(PrincipalComponents, EckartYoungReconstruction) {
  Rng rng(50);
  const TimeSeries s(gaussian_matrix(4, 50, rng));
  const PcaResult p = principal_components(s);
  const Matrix Zc = s.values().colwise() - p.mean;
  for (int m = 0; m <= 4; ++m) {
    const double err = reconstruction_error(Zc, p.basis.leftCols(m));
    EXPECT_NEAR(err / s.N(), spectrum_tail(p, m, s.N()), 1e-9) << "m=" << m;
  }
}

TEST(PrincipalComponents, RotationInvariance) {
  Rng rng(8);
  const Matrix Z = gaussian_matrix(5, 25, rng);
  const Matrix R = random_orthogonal(5, rng);
  const PcaResult a = principal_components(TimeSeries(Z));
  const PcaResult b = principal_components(TimeSeries(R * Z));
  EXPECT_LT((a.singular_values - b.singular_values).norm(), 1e-9);
}

TEST(SpectrumTail, Examples) {
  Rng rng(13);
  const TimeSeries s(gaussian_matrix(3, 20, rng));
  const PcaResult p = principal_components(s);
  EXPECT_EQ(spectrum_tail(p, 3, 20), 0.0);
  const Matrix Zc = s.values().colwise() - p.mean;
  EXPECT_NEAR(spectrum_tail(p, 0, 20), Zc.squaredNorm() / 20.0, 1e-12);
  EXPECT_THROW(spectrum_tail(p, 4, 20), ContractViolation);
  EXPECT_THROW(spectrum_tail(p, -1, 20), ContractViolation);
}

TEST(SpectrumTail, RankTwoData) {
  Rng rng(17);
  const Matrix Z = gaussian_matrix(5, 2, rng) * gaussian_matrix(2, 40, rng);
  const PcaResult p = principal_components(TimeSeries(Z));
  EXPECT_NEAR(spectrum_tail(p, 2, 40), 0.0, 1e-10);
}

TEST(SpectrumTail, NonIncreasingInM) {
  Rng rng(21);
  const PcaResult p = principal_components(TimeSeries(gaussian_matrix(6, 30, rng)));
  for (int m = 1; m <= 6; ++m) EXPECT_LE(spectrum_tail(p, m, 30), spectrum_tail(p, m - 1, 30));
}

TEST(SpectrumTail, NoRandomSubspaceBeatsIt) {
  Rng rng(33);
  const TimeSeries s(gaussian_matrix(4, 15, rng));
  const PcaResult p = principal_components(s);
  const Matrix Zc = s.values().colwise() - p.mean;
  for (int m = 1; m <= 3; ++m) {
    const double best = spectrum_tail(p, m, s.N());
    for (int trial = 0; trial < 1000; ++trial) {
      Matrix U = gaussian_matrix(4, m, rng);
      orthonormalize(U);
      ASSERT_GE(reconstruction_error(Zc, U) / s.N(), best - 1e-12);
    }
  }
}
