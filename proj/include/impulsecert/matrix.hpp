#pragma once

#include <Eigen/Dense>

namespace impulsecert {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Two-by-two block partition of a square matrix with diagonal blocks of
/// sizes n1 and n2.
struct Block2x2 {
  Matrix b11, b12, b21, b22;

  Block2x2() = default;
  Block2x2(Matrix b11, Matrix b12, Matrix b21, Matrix b22);

  /// Symmetric partition with b21 = b12ᵀ.
  static Block2x2 symmetric(Matrix p11, Matrix p12, Matrix p22);
  static Block2x2 split(const Matrix& full, Index n1);

  Index n1() const { return b11.rows(); }
  Index n2() const { return b22.rows(); }
  Matrix assemble() const;
};

void require_finite(const Matrix& A, const char* what);
void require_square(const Matrix& A, const char* what);

Matrix symmetrize(const Matrix& S);

/// e^{tA} by Padé-13 scaling and squaring.
Matrix mat_exp(const Matrix& A, double t = 1.0);

double spectral_norm(const Matrix& A);
double spectral_radius(const Matrix& A);

/// Ascending eigenvalues of (S + Sᵀ)/2 by cyclic Jacobi.
Vector sym_eigenvalues(const Matrix& S);

struct EigRange {
  double min;
  double max;
};

/// Throws ContractError when S is asymmetric beyond 1e-10 (relative to its
/// largest entry, floored at 1).
EigRange sym_eig_range(const Matrix& S);

/// λ_max(P⁻¹S) via the Cholesky congruence L⁻¹ S L⁻ᵀ.
double gen_sym_eig_max(const Matrix& S, const Matrix& P);

/// Solves AᵀP + PA = -Q for Hurwitz A.
Matrix solve_lyapunov(const Matrix& A, const Matrix& Q);

}  // namespace impulsecert
