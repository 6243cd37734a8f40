#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "impulsecert/errors.hpp"
#include "impulsecert/system.hpp"
#include "properties.hpp"
#include "reference_systems.hpp"

using namespace impulsecert;
using namespace impulsecert::testing;

TEST(CouplingEval, SinSquaredVanishesAtZero) {
  const Case k = sin2_scalar();
  EXPECT_NEAR(coupling_eval(k.sys.A12(), 0.0)(0, 0), 0.0, 1e-16);
  // −0.2 sin²(2πt/θ) at t = θ/4 is −0.2.
  EXPECT_NEAR(coupling_eval(k.sys.A12(), 0.09 / 4)(0, 0), -0.2, 1e-15);
}

TEST(CouplingEval, Periodicity) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (const Case& k : {sin2_scalar(), unstable_block_periodic(), rotation_periodic()}) {
    for (int i = 0; i < 50; ++i) {
      const double t = u(rng);
      EXPECT_LT((coupling_eval(k.sys.A12(), t) - coupling_eval(k.sys.A12(), t + k.sys.theta()))
                    .cwiseAbs()
                    .maxCoeff(),
                1e-12);
    }
  }
}

TEST(CouplingEval, RotationQuarterPeriod) {
  const Case k = rotation_periodic();
  const Matrix want = 0.2 * rot90();
  EXPECT_LT((coupling_eval(k.sys.A12(), k.sys.theta() / 4) - want).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(CouplingIntegral, ZeroMeanOverPeriod) {
  const Case k = zero_mean_scalar();
  EXPECT_NEAR(coupling_integral(k.sys.A12(), 0.0, 0.5)(0, 0), 0.0, 1e-16);
  EXPECT_LT(coupling_integral(rotation_periodic().sys.A21(), 0.2, 0.7).norm(), 1e-16);
}

TEST(CouplingIntegral, SinSquaredOverPeriod) {
  const Case k = sin2_scalar();
  EXPECT_NEAR(coupling_integral(k.sys.A12(), 0.0, 0.09)(0, 0), -0.1 * 0.09, 1e-16);
  // Antiderivative of −0.2 sin²(ωt): −0.1 t + 0.1 sin(2ωt)/(2ω).
  const double w = 2 * std::numbers::pi / 0.09, a = 0.01, b = 0.05;
  const auto F = [&](double t) { return -0.1 * t + 0.1 * std::sin(2 * w * t) / (2 * w); };
  EXPECT_NEAR(coupling_integral(k.sys.A12(), a, b)(0, 0), F(b) - F(a), 1e-16);
}

TEST(CouplingIntegral, ConstantCoupling) {
  const TrigMatrixPolynomial p(1.0, mat({{1, 2}, {3, 4}}));
  EXPECT_LT((coupling_integral(p, 0.3, 1.8) - 1.5 * mat({{1, 2}, {3, 4}})).norm(), 1e-14);
}

TEST(CouplingIntegral, Additivity) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  const Case src = unstable_block_periodic();
  const auto& p = src.sys.A21();
  for (int i = 0; i < 100; ++i) {
    double x[3] = {u(rng), u(rng), u(rng)};
    std::sort(x, x + 3);
    const Matrix lhs = coupling_integral(p, x[0], x[1]) + coupling_integral(p, x[1], x[2]);
    EXPECT_LT((lhs - coupling_integral(p, x[0], x[2])).cwiseAbs().maxCoeff(), 1e-12);
  }
  EXPECT_THROW(coupling_integral(p, 1.0, 0.0), ContractError);
}

TEST(TrigPolynomial, DerivativeMatchesFiniteDifference) {
  const Case src = rotation_periodic();
  const auto& p = src.sys.A12();
  const auto dp = p.derivative();
  for (double t : {0.0, 0.11, 0.37}) {
    const double e = 1e-6;
    const Matrix fd = (p(t + e) - p(t - e)) / (2 * e);
    EXPECT_LT((dp(t) - fd).cwiseAbs().maxCoeff(), 1e-7);
  }
}

TEST(TrigPolynomial, GramProductMatchesPointwise) {
  const Case src = unstable_block_periodic();
  const auto& p = src.sys.A12();
  const auto g = p.transpose_times_self();
  for (double t : {0.0, 0.03, 0.12, 0.19}) {
    const Matrix F = p(t);
    EXPECT_LT((g(t) - F.transpose() * F).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(TrigPolynomial, RejectsBadHarmonics) {
  EXPECT_THROW(TrigMatrixPolynomial(1.0, eye(2), {{0, eye(2)}}), ValidationError);
  EXPECT_THROW(TrigMatrixPolynomial(1.0, eye(2), {{1, eye(3)}}), DimensionError);
  EXPECT_THROW(TrigMatrixPolynomial(-1.0, eye(2)), ValidationError);
}

TEST(IntervalBounds, ConstantCoupling) {
  const Matrix C = mat({{0.3, -0.4}});
  const CoupledSystem sys =
      CoupledSystem::periodic(mat({{-1}}), eye(2, -1), TrigMatrixPolynomial(1.0, C),
                              TrigMatrixPolynomial(1.0, Matrix::Zero(2, 1)),
                              Block2x2(eye(1), Matrix::Zero(1, 2), Matrix::Zero(2, 1), eye(2)),
                              1.0);
  const IntervalBoundTable tb = interval_bounds(sys, 4);
  for (int m = 0; m < 4; ++m) {
    EXPECT_NEAR(tb.gamma12[m], 0.5, 1e-15);
    EXPECT_EQ(tb.gamma21[m], 0.0);
    EXPECT_EQ(tb.lip12[m], 0.0);
  }
}

TEST(IntervalBounds, SinSquaredSinglePeriod) {
  const IntervalBoundTable tb = interval_bounds(sin2_scalar().sys, 1);
  EXPECT_NEAR(tb.gamma12[0], 0.2, 1e-11);
  EXPECT_NEAR(tb.gamma21[0], 0.2, 1e-11);
  EXPECT_GE(tb.gamma12[0], 0.2);
}

TEST(IntervalBounds, ClassBoundsOverride) {
  const IntervalBoundTable tb = interval_bounds(zero_mean_scalar(true).sys, 1);
  EXPECT_EQ(tb.gamma12[0], 0.15);
  EXPECT_EQ(tb.gamma21[0], 0.2);
}

TEST(IntervalBounds, ClassBoundsBelowSupNormRejected) {
  const Case k = zero_mean_scalar();
  EXPECT_THROW(CoupledSystem(k.sys.A11(), k.sys.A22(), k.sys.A12(), k.sys.A21(), k.sys.B(),
                             0.5, {0.5, 0.5}, CouplingBounds{0.1, 0.2}),
               ValidationError);
}

TEST(IntervalBounds, IndicesWrapPeriodically) {
  const IntervalBoundTable tb = interval_bounds(unstable_block_periodic().sys, 5);
  EXPECT_EQ(tb.g12(7), tb.gamma12[2]);
  EXPECT_EQ(tb.g21(-1), tb.gamma21[4]);
  EXPECT_EQ(IntervalBoundTable::wrap(-6, 5), 4);
}

TEST(IntervalBounds, UniformPolicyTakesPeriodMaximum) {
  const CoupledSystem sys = unstable_block_periodic().sys;
  const IntervalBoundTable per = interval_bounds(sys, 10);
  const IntervalBoundTable uni = interval_bounds(sys, 10, GammaPolicy::Uniform);
  const double mx = *std::max_element(per.gamma12.begin(), per.gamma12.end());
  for (int m = 0; m < 10; ++m) EXPECT_EQ(uni.gamma12[m], mx);
  EXPECT_NEAR(mx, 2.0, 1e-11);
}

TEST(IntervalBounds, SoundnessAndLipschitzSampled) {
  std::mt19937_64 rng(9);
  for (int s = 0; s < 6; ++s) {
    const Case k = random_system(100 + s);
    const int N = 3 + s;
    const IntervalBoundTable tb = interval_bounds(k.sys, N);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int m = 0; m < N; ++m) {
      const double a = m * tb.h;
      for (int i = 0; i < 10000; ++i) {
        const double t = a + tb.h * (1.0 - u(rng));
        EXPECT_LE(spectral_norm(k.sys.A12()(t)), tb.gamma12[m] + 1e-12);
        EXPECT_LE(spectral_norm(k.sys.A21()(t)), tb.gamma21[m] + 1e-12);
        if (i % 50 == 0) {
          EXPECT_LE(spectral_norm(k.sys.A12()(t) - k.sys.A12()(a)), tb.lip12[m] * tb.h + 1e-12);
          EXPECT_LE(spectral_norm(k.sys.A21()(t) - k.sys.A21()(a)), tb.lip21[m] * tb.h + 1e-12);
        }
      }
    }
  }
}

TEST(BlockAAt, Examples) {
  const Case s = sin2_scalar();
  EXPECT_LT((block_A_at(s.sys, 0.0) - mat({{0.01, 0}, {0.2, -0.1}})).norm(), 1e-15);
  const Case u = unstable_block_periodic();
  Matrix d = Matrix::Zero(4, 4);
  d.topLeftCorner(2, 2) = u.sys.A11();
  d.bottomRightCorner(2, 2) = u.sys.A22();
  EXPECT_LT((block_A_at(u.sys, 0.0) - d).norm(), 1e-15);

  const Case r = rotation_dwell();
  const Matrix A0 = block_A_at(r.sys, 0.0);
  EXPECT_LT((A0.topRightCorner(2, 2) - eye(2, 0.05)).norm(), 1e-15);
  EXPECT_LT((A0.bottomLeftCorner(2, 2) - eye(2, 0.05)).norm(), 1e-15);
  EXPECT_LT((block_A_at(r.sys, 0.3) - block_A_at(r.sys, 1.3)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(CoupledSystem, PeriodMismatchRejected) {
  const Case k = zero_mean_scalar();
  EXPECT_THROW(CoupledSystem::periodic(k.sys.A11(), k.sys.A22(), k.sys.A12(),
                                       TrigMatrixPolynomial(0.6, mat({{0}})), k.sys.B(), 0.5),
               ValidationError);
}

TEST(CoupledSystem, ShapeChecks) {
  const Case k = zero_mean_scalar();
  EXPECT_THROW(CoupledSystem::periodic(eye(2), k.sys.A22(), k.sys.A12(), k.sys.A21(),
                                       k.sys.B(), 0.5),
               DimensionError);
  EXPECT_THROW(CoupledSystem(k.sys.A11(), k.sys.A22(), k.sys.A12(), k.sys.A21(), k.sys.B(),
                             0.5, {0.6, 0.4}),
               ValidationError);
}

TEST(CoupledSystem, WithThetaRescalesTimeAxis) {
  const Case k = rotation_dwell();
  const CoupledSystem s2 = k.sys.with_theta(2.0);
  EXPECT_EQ(s2.theta(), 2.0);
  EXPECT_NEAR(s2.dwell().theta1, 1.6, 1e-15);
  EXPECT_LT((s2.A12()(0.6) - k.sys.A12()(0.3)).norm(), 1e-14);
  EXPECT_FALSE(s2 == k.sys);
  EXPECT_TRUE(k.sys.with_theta(1.0) == k.sys);
}
