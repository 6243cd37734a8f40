#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "impulsecert/errors.hpp"
#include "impulsecert/periodic.hpp"
#include "impulsecert/simulator.hpp"
#include "properties.hpp"
#include "reference_systems.hpp"

using namespace impulsecert;
using namespace impulsecert::testing;

namespace {

CertifyOptions uniform() {
  CertifyOptions o;
  o.gamma_policy = GammaPolicy::Uniform;
  return o;
}

double max_abs(const Matrix& A) { return A.cwiseAbs().maxCoeff(); }

// Two decoupled Hurwitz blocks, contractive jumps, P0 from the Lyapunov equations.
Case decoupled() {
  const double th = 0.7;
  const Matrix A11 = mat({{-0.5, 0.3}, {0, -0.8}}), A22 = mat({{-0.2}});
  const Block2x2 B(eye(2, 0.9), Matrix::Zero(2, 1), Matrix::Zero(1, 2), mat({{1.05}}));
  const CoupledSystem sys = CoupledSystem::periodic(
      A11, A22, TrigMatrixPolynomial(th, Matrix::Zero(2, 1)),
      TrigMatrixPolynomial(th, Matrix::Zero(1, 2)), B, th);
  return {sys, default_P0(sys)};
}

}  // namespace

TEST(RecursionStep, DecoupledIsCongruence) {
  const Case k = decoupled();
  const double h = 0.1;
  Block2x2 P0 = k.P0;
  P0.b12 = mat({{0.1}, {-0.2}});
  P0.b21 = P0.b12.transpose();
  const Block2x2 P1 = recursion_step(P0, k.sys, 3, h);
  const Matrix E1 = mat_exp(k.sys.A11(), -h), E2 = mat_exp(k.sys.A22(), -h);
  EXPECT_LT(max_abs(P1.b11 - E1.transpose() * P0.b11 * E1), 1e-14);
  EXPECT_LT(max_abs(P1.b22 - E2.transpose() * P0.b22 * E2), 1e-14);
  EXPECT_LT(max_abs(P1.b12 - E1.transpose() * P0.b12 * E2), 1e-14);
  EXPECT_EQ(P1.b21, P1.b12.transpose());
}

TEST(RecursionStep, SinSquaredSingleStep) {
  const Case k = sin2_scalar();
  const Matrix P1 = recursion_step(k.P0, k.sys, 0, 0.09).assemble();
  EXPECT_LT(max_abs(P1 - mat({{18.0934, -7.0025}, {-7.0025, 12.0897}})), 5e-3);
}

TEST(BuildTable, RotationAfterThreeSteps) {
  const Case k = rotation_periodic();
  const LyapunovTable t = build_table(k.sys, k.P0, 3);
  ASSERT_EQ(t.P.size(), 4u);
  const Matrix P3 = t.P[3].assemble();
  EXPECT_NEAR(P3(0, 0), 2.7172, 5e-4);
  EXPECT_NEAR(P3(1, 1), 2.7172, 5e-4);
  EXPECT_NEAR(P3(2, 2), 0.902, 5e-4);
  EXPECT_NEAR(P3(3, 3), 0.902, 5e-4);
  // Corners: frozen oracle value, and the displayed −0.0207 at display tolerance.
  EXPECT_NEAR(P3(0, 3), -0.0223216, 1e-6);
  EXPECT_NEAR(P3(1, 2), 0.0223216, 1e-6);
  EXPECT_NEAR(P3(0, 3), -0.0207, 5e-3);
  EXPECT_NEAR(P3(1, 2), 0.0207, 5e-3);
}

TEST(EvalP, NodesAreTableEntries) {
  const Case k = unstable_block_periodic();
  const LyapunovTable t = build_table(k.sys, k.P0, 8);
  for (int m = 0; m < 8; ++m) {
    EXPECT_EQ(eval_P((m + 1) * t.h, t, k.sys).assemble(), t.P[m + 1].assemble());
    const Matrix right = eval_P(m * t.h + 1e-10, t, k.sys).assemble();
    EXPECT_LT(max_abs(right - t.P[m].assemble()), 1e-7);
  }
}

TEST(EvalP, DomainChecked) {
  const Case k = sin2_scalar();
  const LyapunovTable t = build_table(k.sys, k.P0, 2);
  EXPECT_THROW(eval_P(0.0, t, k.sys), DomainError);
  EXPECT_THROW(eval_P(0.1, t, k.sys), DomainError);
}

// One recursion step has O(h²) local error against the exact ODE.
TEST(EvalP, SingleStepLocalErrorSecondOrder) {
  const Case k = rotation_periodic();
  std::vector<double> err;
  for (int N : {8, 16, 32, 64}) {
    const double h = k.sys.theta() / N;
    const Matrix got = recursion_step(k.P0, k.sys, 0, h).assemble();
    err.push_back(max_abs(got - exact_P_ode(k.sys, k.P0, h).assemble()));
  }
  for (std::size_t i = 0; i + 1 < err.size(); ++i) EXPECT_GT(err[i] / err[i + 1], 3.0) << i;
}

// Accumulated over a fixed time the error is first order.
TEST(EvalP, ConvergesToExactOde) {
  const Case k = rotation_periodic();
  const double t = 0.31;
  const Matrix ref = exact_P_ode(k.sys, k.P0, t).assemble();
  std::vector<double> err;
  for (int N : {4, 8, 16, 32}) {
    const LyapunovTable tb = build_table(k.sys, k.P0, N);
    err.push_back(max_abs(eval_P(t, tb, k.sys).assemble() - ref));
  }
  for (std::size_t i = 0; i + 1 < err.size(); ++i) EXPECT_LT(err[i + 1], err[i]);
  EXPECT_GT(err[2] / err[3], 1.5);
}

TEST(Sandwich, NoCouplingGivesEqualPair) {
  const Case k = unstable_block_periodic();
  const SandwichPair s = sandwich(k.P0, 0.0, 0.0, 0.1);
  EXPECT_EQ(s.Pi.assemble(), k.P0.assemble());
  EXPECT_EQ(s.Xi.assemble(), k.P0.assemble());
}

TEST(Sandwich, ReferenceLowerMatrices) {
  const Case a = sin2_scalar();
  EXPECT_LT(max_abs(sandwich(a.P0, 0.2, 0.2, 0.09).Pi.assemble() -
                    mat({{17.208, -7}, {-7, 11.208}})),
            1e-12);
  const Case b = zero_mean_scalar();
  EXPECT_LT(max_abs(sandwich(b.P0, 0.15, 0.2, 0.5).Pi.assemble() - mat({{1.8125, 0}, {0, 4.3125}})),
            1e-12);
}

TEST(ThetaM, ZeroCouplingIsZero) {
  const Case k = unstable_block_periodic();
  const ThetaInputs in = theta_inputs(k.P0, 0.0, 0.0, spectral_norm(k.sys.A11()),
                                      spectral_norm(k.sys.A22()), make_envelopes(k.sys, 0.1));
  EXPECT_EQ(theta_m(in, 0.1), 0.0);
}

TEST(ThetaM, SecondOrderSmallness) {
  const Case k = rotation_periodic();
  const ThetaInputs in = theta_inputs(k.P0, 0.2, 0.1, 1.0, 0.1, make_envelopes(k.sys, 0.1));
  std::vector<double> ratio;
  for (double h : {1e-2, 1e-3, 1e-4, 1e-5}) ratio.push_back(theta_m(in, h) / (h * h));
  for (double r : ratio) {
    EXPECT_GT(r, 0.0);
    EXPECT_LT(r, 2.0 * ratio.front());
  }
  EXPECT_NEAR(ratio[3], ratio[2], 1e-3 * ratio[2]);
}

TEST(ThetaInputs, SinSquaredStepValues) {
  const Case k = sin2_scalar();
  const CertificateReport r = certify_periodic(k.sys, k.P0, 1, uniform());
  const ThetaInputs& in = r.steps.at(0).inputs;
  EXPECT_NEAR(in.eta11, 26.3132, 0.02 * 26.3132);
  EXPECT_NEAR(in.eta22, 20.8924, 0.02 * 20.8924);
  EXPECT_NEAR(in.eta12, 7.1037, 0.02 * 7.1037);
  EXPECT_NEAR(in.eta21, 7.1036, 0.02 * 7.1036);
  EXPECT_NEAR(in.alpha11, 0.5263, 0.02 * 0.5263);
  EXPECT_NEAR(in.alpha12, 0.0526, 0.02 * 0.0526);
  EXPECT_NEAR(in.alpha21, 0.0418, 0.02 * 0.0418);
  EXPECT_NEAR(in.alpha22, 0.4178, 0.02 * 0.4178);
}

// Frozen values from the independent numpy/scipy oracle (Θ by adaptive quadrature).
TEST(CertifyPeriodic, SinSquaredSingleStep) {
  const Case k = sin2_scalar();
  const CertificateReport r = certify_periodic(k.sys, k.P0, 1, uniform());
  EXPECT_NEAR(r.Q, -4.27951e-5, 1e-3 * 4.27951e-5);
  EXPECT_EQ(r.verdict, Verdict::StableCertified);
}

TEST(CertifyPeriodic, UnstableBlockFiftySteps) {
  const Case k = unstable_block_periodic();
  const CertificateReport r = certify_periodic(k.sys, k.P0, 50, uniform());
  EXPECT_NEAR(r.min_lambda_pi, 7.03223, 1e-4);
  EXPECT_NEAR(r.Q, -0.046185, 1e-5);
  EXPECT_EQ(r.verdict, Verdict::StableCertified);
  EXPECT_EQ(r.steps.size(), 50u);
  EXPECT_FALSE(r.failing_index.has_value());
}

TEST(CertifyPeriodic, RotationThreeSteps) {
  const Case k = rotation_periodic();
  const CertificateReport r = certify_periodic(k.sys, k.P0, 3, uniform());
  EXPECT_NEAR(r.min_lambda_pi, 0.850075, 1e-5);
  EXPECT_NEAR(r.Q, -0.114029, 1e-5);
  EXPECT_EQ(r.verdict, Verdict::StableCertified);
}

TEST(CertifyPeriodic, DecoupledReducesToJumpTerm) {
  const Case k = decoupled();
  const CertificateReport r = certify_periodic(k.sys, k.P0, 5);
  const Matrix A = block_A_at(k.sys, 0.0);
  const Matrix E = mat_exp(A, -k.sys.theta());
  const Matrix P0 = k.P0.assemble(), B = k.sys.B().assemble();
  const Matrix PN = E.transpose() * P0 * E;
  const double want = std::log(gen_sym_eig_max(B.transpose() * P0 * B, PN));
  EXPECT_EQ(r.theta_sum, 0.0);
  EXPECT_NEAR(r.Q, want, 1e-12);
  EXPECT_LT(r.Q, 0.0);
  EXPECT_EQ(r.verdict, Verdict::StableCertified);
}

TEST(CertifyPeriodic, FailingPiIsInconclusive) {
  const Case k = unstable_block_periodic();
  // Large cross term with small λmin: the sandwich subtraction dominates.
  const Block2x2 P0 = Block2x2::symmetric(eye(2), eye(2, 0.9), eye(2));
  const CertificateReport r = certify_periodic(k.sys, P0, 2, uniform());
  ASSERT_TRUE(r.failing_index.has_value());
  EXPECT_EQ(*r.failing_index, 0);
  EXPECT_TRUE(std::isnan(r.Q));
  EXPECT_EQ(r.verdict, Verdict::Inconclusive);
}

TEST(CertifyPeriodic, InputChecks) {
  const Case k = sin2_scalar();
  EXPECT_THROW(certify_periodic(k.sys, Block2x2::symmetric(mat({{1}}), mat({{2}}), mat({{1}})), 1),
               InputError);
  EXPECT_THROW(certify_periodic(k.sys, k.P0, 0), ParameterError);
  EXPECT_THROW(certify_periodic(rotation_dwell().sys, rotation_dwell().P0, 4), PreconditionError);
}

TEST(DefaultP0, LyapunovForHurwitzBlocks) {
  const Block2x2 a = default_P0(zero_mean_scalar().sys);
  EXPECT_NEAR(a.b11(0, 0), 2.5, 1e-14);
  EXPECT_NEAR(a.b22(0, 0), 5.0, 1e-14);
  EXPECT_EQ(a.b12(0, 0), 0.0);
  const Block2x2 b = default_P0(unstable_block_periodic().sys);
  EXPECT_EQ(b.b11, eye(2));
}

TEST(LyapunovValue, Examples) {
  const Block2x2 I = Block2x2::symmetric(eye(2), Matrix::Zero(2, 1), eye(1));
  Vector x1(2), x2(1);
  x1 << 3, -1;
  x2 << 2;
  EXPECT_NEAR(lyapunov_value(I, x1, x2), 14.0, 1e-15);
  EXPECT_EQ(lyapunov_value(I, Vector::Zero(2), Vector::Zero(1)), 0.0);
  EXPECT_THROW(lyapunov_value(I, x2, x1), DimensionError);
}

TEST(PeriodicProperties, SandwichOnRandomStates) {
  for (const auto& [k, N] : {std::pair{rotation_periodic(), 3}, std::pair{sin2_scalar(), 1}}) {
    const PropertyResult r = sandwich_periodic(k, N, 300, 77);
    EXPECT_TRUE(r.ok) << r.detail;
  }
}

TEST(PeriodicProperties, IntervalDecay) {
  const PropertyResult r = interval_decay(rotation_periodic(), 3, 200, 78);
  EXPECT_TRUE(r.ok) << r.detail;
}
