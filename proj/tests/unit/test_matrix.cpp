#include <gtest/gtest.h>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "impulsecert/errors.hpp"
#include "impulsecert/matrix.hpp"
#include "properties.hpp"
#include "reference_systems.hpp"

using namespace impulsecert;
using namespace impulsecert::testing;

namespace {

using big = boost::multiprecision::cpp_bin_float_50;

// e^{tA} as a 300-term Taylor sum in 50-digit arithmetic.
Matrix taylor_exp(const Matrix& A, double t) {
  const Index n = A.rows();
  std::vector<big> a(n * n), term(n * n), sum(n * n), next(n * n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      a[i * n + j] = big(A(i, j)) * big(t);
      term[i * n + j] = sum[i * n + j] = (i == j) ? 1 : 0;
    }
  for (int k = 1; k <= 300; ++k) {
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) {
        big s = 0;
        for (Index l = 0; l < n; ++l) s += term[i * n + l] * a[l * n + j];
        next[i * n + j] = s / k;
      }
    term.swap(next);
    for (Index i = 0; i < n * n; ++i) sum[i] += term[i];
  }
  Matrix out(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) out(i, j) = static_cast<double>(sum[i * n + j]);
  return out;
}

double rel_err(const Matrix& got, const Matrix& want) {
  return (got - want).norm() / std::max(want.norm(), 1e-300);
}

}  // namespace

TEST(MatExp, ZeroMatrixGivesIdentity) {
  EXPECT_LT((mat_exp(Matrix::Zero(2, 2), 5.0) - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(MatExp, DiagonalCase) {
  const Matrix E = mat_exp(mat({{-1, 0}, {0, 0.1}}), 1.0);
  EXPECT_NEAR(E(0, 0), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(E(1, 1), std::exp(0.1), 1e-15);
  EXPECT_EQ(E(0, 1), 0.0);
  EXPECT_EQ(E(1, 0), 0.0);
}

TEST(MatExp, RotationAgainstSeriesOracle) {
  const Matrix A = mat({{0, 1}, {-1, 0}});
  const double t = std::numbers::pi / 2;
  const Matrix E = mat_exp(A, t);
  EXPECT_LT((E - taylor_exp(A, t)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((E - mat({{0, 1}, {-1, 0}})).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(MatExp, RandomCorpusWithinRelativeTolerance) {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> tdist(-2.0, 2.0);
  for (int trial = 0; trial < 30; ++trial) {
    const Index n = 1 + trial % 5;
    Matrix A = random_matrix(rng, n, n, 1.0);
    A *= (0.1 + 4.9 * (trial % 7) / 6.0) / std::max(spectral_norm(A), 1e-12);
    const double t = tdist(rng);
    EXPECT_LT(rel_err(mat_exp(A, t), taylor_exp(A, t)), 1e-12) << "trial " << trial;
  }
}

TEST(MatExp, NonSquareThrows) {
  EXPECT_THROW(mat_exp(Matrix::Zero(2, 3), 1.0), DimensionError);
}

TEST(MatExp, SemigroupAndInverse) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (int trial = 0; trial < 40; ++trial) {
    const Index n = 2 + trial % 4;
    Matrix A = random_matrix(rng, n, n, 1.0);
    A *= 5.0 * u(rng) / 2.0 / std::max(spectral_norm(A), 1e-12);
    const double s = u(rng), t = u(rng);
    const Matrix lhs = mat_exp(A, s + t), rhs = mat_exp(A, s) * mat_exp(A, t);
    EXPECT_LT((lhs - rhs).norm() / lhs.norm(), 1e-10);
    EXPECT_LT((mat_exp(A, t) * mat_exp(A, -t) - Matrix::Identity(n, n)).norm(), 1e-10);
  }
}

TEST(SpectralNorm, Examples) {
  EXPECT_EQ(spectral_norm(Matrix::Zero(3, 3)), 0.0);
  EXPECT_NEAR(spectral_norm(mat({{3, 0}, {0, -4}})), 4.0, 1e-14);
  for (double phi : {0.0, 0.3, 1.7, -2.2}) {
    const Matrix R = 0.2 * mat({{std::cos(phi), -std::sin(phi)}, {std::sin(phi), std::cos(phi)}});
    EXPECT_NEAR(spectral_norm(R), 0.2, 1e-15);
  }
}

TEST(SpectralNorm, Submultiplicative) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix A = random_matrix(rng, 3, 4, 2.0), B = random_matrix(rng, 4, 2, 2.0);
    EXPECT_LE(spectral_norm(A * B), spectral_norm(A) * spectral_norm(B) * (1 + 1e-14));
  }
}

TEST(SpectralRadius, Examples) {
  EXPECT_NEAR(spectral_radius(Matrix::Identity(4, 4)), 1.0, 1e-15);
  EXPECT_NEAR(spectral_radius(rot90()), 1.0, 1e-15);
  EXPECT_NEAR(spectral_radius(mat({{0, 1}, {0, 0}})), 0.0, 1e-15);
}

// Frozen from numpy.linalg.eigvals on the two rotation-coupling impulse matrices.
TEST(SpectralRadius, RotationImpulseMatrices) {
  EXPECT_NEAR(spectral_radius(rotation_periodic().sys.B().assemble()), 1.474635255, 1e-8);
  EXPECT_NEAR(spectral_radius(rotation_dwell().sys.B().assemble()), 1.472162477, 1e-8);
}

TEST(SymEigRange, Examples) {
  const EigRange d = sym_eig_range(mat({{1, 0, 0}, {0, 2, 0}, {0, 0, 3}}));
  EXPECT_NEAR(d.min, 1.0, 1e-15);
  EXPECT_NEAR(d.max, 3.0, 1e-15);

  // 2×2 closed form: 14.208 ± sqrt(9 + 49).
  const EigRange p = sym_eig_range(mat({{17.208, -7}, {-7, 11.208}}));
  EXPECT_NEAR(p.min, 14.208 - std::sqrt(58.0), 1e-12);
  EXPECT_NEAR(p.max, 14.208 + std::sqrt(58.0), 1e-12);

  const EigRange q = sym_eig_range(mat({{1.8125, 0}, {0, 4.3125}}));
  EXPECT_EQ(q.min, 1.8125);
  EXPECT_EQ(q.max, 4.3125);
}

TEST(SymEigRange, AsymmetryBeyondToleranceThrows) {
  EXPECT_THROW(sym_eig_range(mat({{1, 0.1}, {0, 1}})), ContractError);
  EXPECT_NO_THROW(sym_eig_range(mat({{1, 1e-12}, {0, 1}})));
}

TEST(SymEigenvalues, JacobiMatchesSelfAdjointSolver) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const Index n = 1 + trial % 12;
    const Matrix R = random_matrix(rng, n, n, 3.0);
    const Matrix S = R + R.transpose();
    const Vector got = sym_eigenvalues(S);
    const Vector want = Eigen::SelfAdjointEigenSolver<Matrix>(S).eigenvalues();
    EXPECT_LT((got - want).cwiseAbs().maxCoeff(), 1e-12 * std::max(1.0, want.cwiseAbs().maxCoeff()));
  }
}

TEST(GenSymEigMax, Examples) {
  const Matrix P = mat({{4, 1}, {1, 3}});
  EXPECT_NEAR(gen_sym_eig_max(P, P), 1.0, 1e-14);
  EXPECT_NEAR(gen_sym_eig_max(eye(3, 2.0), eye(3)), 2.0, 1e-15);
}

TEST(GenSymEigMax, NonPositiveDefiniteNamesEigenvalue) {
  try {
    gen_sym_eig_max(eye(2), mat({{1, 0}, {0, -0.5}}));
    FAIL() << "expected DefinitenessError";
  } catch (const DefinitenessError& e) {
    EXPECT_NEAR(e.eigenvalue(), -0.5, 1e-14);
  }
}

TEST(GenSymEigMax, MatchesSymmetricSquareRootCongruence) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    const Index n = 1 + trial % 6;
    const Matrix R = random_matrix(rng, n, n, 1.0), T = random_matrix(rng, n, n, 1.0);
    const Matrix P = R * R.transpose() + 0.1 * Matrix::Identity(n, n);
    const Matrix S = T + T.transpose();
    Eigen::SelfAdjointEigenSolver<Matrix> es(P);
    const Matrix Pis = es.operatorInverseSqrt();
    const double want =
        Eigen::SelfAdjointEigenSolver<Matrix>(Pis * S * Pis).eigenvalues().maxCoeff();
    EXPECT_NEAR(gen_sym_eig_max(S, P), want, 1e-10 * std::max(1.0, std::abs(want)));
  }
}

TEST(SolveLyapunov, Examples) {
  EXPECT_LT((solve_lyapunov(eye(2, -1), eye(2, 2)) - eye(2)).norm(), 1e-14);
  EXPECT_NEAR(solve_lyapunov(mat({{-0.2}}), mat({{1}}))(0, 0), 2.5, 1e-14);
  EXPECT_NEAR(solve_lyapunov(mat({{-0.1}}), mat({{1}}))(0, 0), 5.0, 1e-14);
}

TEST(SolveLyapunov, RandomResidual) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    Matrix A = random_matrix(rng, 3, 3, 1.0);
    A -= (spectral_norm(A) + 0.1) * Matrix::Identity(3, 3);  // Hurwitz
    const Matrix R = random_matrix(rng, 3, 3, 1.0);
    const Matrix Q = R * R.transpose() + 0.5 * Matrix::Identity(3, 3);
    const Matrix P = solve_lyapunov(A, Q);
    EXPECT_LE((A.transpose() * P + P * A + Q).norm(), 1e-10 * spectral_norm(Q));
    EXPECT_GT(sym_eig_range(P).min, 0.0);
  }
}

TEST(SolveLyapunov, NotHurwitzThrows) {
  EXPECT_THROW(solve_lyapunov(mat({{0.1, 0}, {0, -1}}), eye(2)), NoUniqueSolutionError);
}

TEST(Block2x2, SplitAssembleRoundTrip) {
  std::mt19937_64 rng(2);
  const Matrix M = random_matrix(rng, 5, 5, 1.0);
  const Block2x2 b = Block2x2::split(M, 2);
  EXPECT_EQ(b.n1(), 2);
  EXPECT_EQ(b.n2(), 3);
  EXPECT_EQ(b.assemble(), M);
  EXPECT_THROW(Block2x2(eye(2), Matrix::Zero(2, 2), Matrix::Zero(3, 2), eye(2)), DimensionError);
}
