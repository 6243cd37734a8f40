#include "impulsecert/matrix.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "impulsecert/errors.hpp"

namespace impulsecert {

namespace {

constexpr double kSymmetryTol = 1e-10;

std::string shape(const Matrix& A) {
  std::ostringstream os;
  os << A.rows() << "x" << A.cols();
  return os.str();
}

void require_symmetric(const Matrix& S, const char* what) {
  require_square(S, what);
  const double scale = std::max(1.0, S.cwiseAbs().maxCoeff());
  const double asym = (S - S.transpose()).cwiseAbs().maxCoeff();
  if (asym > kSymmetryTol * scale) {
    std::ostringstream os;
    os << what << ": matrix is not symmetric (max |S - S^T| = " << asym << ")";
    throw ContractError(os.str());
  }
}

}  // namespace

Block2x2::Block2x2(Matrix b11_, Matrix b12_, Matrix b21_, Matrix b22_)
    : b11(std::move(b11_)),
      b12(std::move(b12_)),
      b21(std::move(b21_)),
      b22(std::move(b22_)) {
  const Index n1 = b11.rows(), n2 = b22.rows();
  if (b11.cols() != n1 || b22.cols() != n2 || b12.rows() != n1 ||
      b12.cols() != n2 || b21.rows() != n2 || b21.cols() != n1) {
    throw DimensionError("Block2x2: inconsistent block shapes " + shape(b11) +
                         ", " + shape(b12) + ", " + shape(b21) + ", " +
                         shape(b22));
  }
}

Block2x2 Block2x2::symmetric(Matrix p11, Matrix p12, Matrix p22) {
  Matrix p21 = p12.transpose();
  return Block2x2(std::move(p11), std::move(p12), std::move(p21),
                  std::move(p22));
}

Block2x2 Block2x2::split(const Matrix& full, Index n1) {
  require_square(full, "Block2x2::split");
  const Index n = full.rows();
  if (n1 <= 0 || n1 >= n) {
    throw DimensionError("Block2x2::split: n1 out of range");
  }
  const Index n2 = n - n1;
  return Block2x2(full.topLeftCorner(n1, n1), full.topRightCorner(n1, n2),
                  full.bottomLeftCorner(n2, n1), full.bottomRightCorner(n2, n2));
}

Matrix Block2x2::assemble() const {
  const Index a = n1(), b = n2();
  Matrix out(a + b, a + b);
  out.topLeftCorner(a, a) = b11;
  out.topRightCorner(a, b) = b12;
  out.bottomLeftCorner(b, a) = b21;
  out.bottomRightCorner(b, b) = b22;
  return out;
}

void require_finite(const Matrix& A, const char* what) {
  if (!A.allFinite()) {
    throw ContractError(std::string(what) + ": non-finite entry");
  }
}

void require_square(const Matrix& A, const char* what) {
  if (A.rows() != A.cols() || A.rows() == 0) {
    throw DimensionError(std::string(what) + ": expected a non-empty square matrix, got " +
                         shape(A));
  }
}

Matrix symmetrize(const Matrix& S) { return 0.5 * (S + S.transpose()); }

Matrix mat_exp(const Matrix& A, double t) {
  require_square(A, "mat_exp");
  require_finite(A, "mat_exp");
  if (!std::isfinite(t)) throw ContractError("mat_exp: non-finite t");
  if (t == 0.0) return Matrix::Identity(A.rows(), A.cols());

  // Higham (2005) degree-13 Padé coefficients and its theta_13.
  static constexpr std::array<double, 14> b = {
      64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
      1187353796428800.0,  129060195264000.0,   10559470521600.0,
      670442572800.0,      33522128640.0,       1323241920.0,
      40840800.0,          960960.0,            16380.0,
      182.0,               1.0};
  constexpr double theta13 = 5.371920351148152;

  const Index n = A.rows();
  Matrix X = t * A;
  const double norm1 = X.cwiseAbs().colwise().sum().maxCoeff();
  int s = 0;
  if (norm1 > theta13) {
    s = static_cast<int>(std::ceil(std::log2(norm1 / theta13)));
    X /= std::ldexp(1.0, s);
  }

  const Matrix I = Matrix::Identity(n, n);
  const Matrix X2 = X * X;
  const Matrix X4 = X2 * X2;
  const Matrix X6 = X4 * X2;
  const Matrix U =
      X * (X6 * (b[13] * X6 + b[11] * X4 + b[9] * X2) + b[7] * X6 +
           b[5] * X4 + b[3] * X2 + b[1] * I);
  const Matrix V = X6 * (b[12] * X6 + b[10] * X4 + b[8] * X2) + b[6] * X6 +
                   b[4] * X4 + b[2] * X2 + b[0] * I;
  Matrix R = (V - U).partialPivLu().solve(V + U);
  for (int k = 0; k < s; ++k) R = R * R;
  return R;
}

Vector sym_eigenvalues(const Matrix& S) {
  require_square(S, "sym_eigenvalues");
  require_finite(S, "sym_eigenvalues");
  Matrix a = symmetrize(S);
  const Index n = a.rows();
  const double frob = a.norm();
  if (frob == 0.0) return Vector::Zero(n);

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Index p = 0; p < n; ++p)
      for (Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(off) <= 1e-15 * frob) break;

    for (Index p = 0; p < n - 1; ++p) {
      for (Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double tt = (tau >= 0.0 ? 1.0 : -1.0) /
                          (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + tt * tt);
        const double sn = tt * c;
        for (Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - sn * akq;
          a(k, q) = sn * akp + c * akq;
        }
        for (Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - sn * aqk;
          a(q, k) = sn * apk + c * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
      }
    }
  }

  Vector ev = a.diagonal();
  std::sort(ev.data(), ev.data() + n);
  return ev;
}

EigRange sym_eig_range(const Matrix& S) {
  require_symmetric(S, "sym_eig_range");
  const Vector ev = sym_eigenvalues(S);
  return {ev(0), ev(ev.size() - 1)};
}

double spectral_norm(const Matrix& A) {
  require_finite(A, "spectral_norm");
  if (A.size() == 0) return 0.0;
  const Matrix G = A.cols() <= A.rows() ? Matrix(A.transpose() * A)
                                        : Matrix(A * A.transpose());
  const Vector ev = sym_eigenvalues(G);
  return std::sqrt(std::max(0.0, ev(ev.size() - 1)));
}

double spectral_radius(const Matrix& A) {
  require_square(A, "spectral_radius");
  require_finite(A, "spectral_radius");
  Eigen::EigenSolver<Matrix> es;
  es.setMaxIterations(2000);
  es.compute(A, false);
  if (es.info() != Eigen::Success) {
    std::ostringstream os;
    os << "spectral_radius: real Schur iteration did not converge within 2000 "
          "iterations (size "
       << A.rows() << ", Frobenius norm " << A.norm() << ")";
    throw NumericError(os.str());
  }
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double gen_sym_eig_max(const Matrix& S, const Matrix& P) {
  require_symmetric(S, "gen_sym_eig_max(S)");
  require_symmetric(P, "gen_sym_eig_max(P)");
  if (S.rows() != P.rows()) {
    throw DimensionError("gen_sym_eig_max: S is " + shape(S) + ", P is " +
                         shape(P));
  }
  const Matrix Ps = symmetrize(P);
  Eigen::LLT<Matrix> llt(Ps);
  bool ok = llt.info() == Eigen::Success;
  if (ok) {
    const Matrix L = llt.matrixL();
    ok = (L.diagonal().array() > 0.0).all();
  }
  if (!ok) {
    const double lmin = sym_eigenvalues(Ps)(0);
    std::ostringstream os;
    os << "gen_sym_eig_max: P is not positive definite (lambda_min = " << lmin
       << ")";
    throw DefinitenessError(os.str(), lmin);
  }
  // C = L⁻¹ S L⁻ᵀ
  const Matrix LiS = llt.matrixL().solve(symmetrize(S));
  const Matrix C = llt.matrixL().solve(Matrix(LiS.transpose()));
  const Vector ev = sym_eigenvalues(C);
  return ev(ev.size() - 1);
}

Matrix solve_lyapunov(const Matrix& A, const Matrix& Q) {
  require_square(A, "solve_lyapunov(A)");
  require_symmetric(Q, "solve_lyapunov(Q)");
  require_finite(A, "solve_lyapunov(A)");
  if (A.rows() != Q.rows()) {
    throw DimensionError("solve_lyapunov: A is " + shape(A) + ", Q is " +
                         shape(Q));
  }
  Eigen::EigenSolver<Matrix> es;
  es.setMaxIterations(2000);
  es.compute(A, false);
  if (es.info() != Eigen::Success) {
    throw NumericError("solve_lyapunov: eigenvalue iteration failed");
  }
  const double beta = es.eigenvalues().real().maxCoeff();
  if (!(beta < 0.0)) {
    std::ostringstream os;
    os << "solve_lyapunov: A is not Hurwitz (max Re lambda = " << beta << ")";
    throw NoUniqueSolutionError(os.str());
  }

  const Index n = A.rows();
  const Matrix I = Matrix::Identity(n, n);
  const Matrix At = A.transpose();
  // Column-major vec: vec(AᵀP) = (I ⊗ Aᵀ) vec P, vec(PA) = (Aᵀ ⊗ I) vec P.
  Matrix K = Matrix::Zero(n * n, n * n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      K.block(i * n, i * n, n, n).noalias() += (i == j ? 1.0 : 0.0) * At;
      K.block(i * n, j * n, n, n).noalias() += At(i, j) * I;
    }
  }
  const Matrix Qs = symmetrize(Q);
  const Eigen::PartialPivLU<Matrix> lu(K);
  const Vector rhs = -Eigen::Map<const Vector>(Qs.data(), n * n);
  Vector p = lu.solve(rhs);

  auto residual = [&](const Vector& v) {
    const Matrix P = Eigen::Map<const Matrix>(v.data(), n, n);
    return Matrix(At * P + P * A + Qs);
  };
  const double qn = std::max(spectral_norm(Qs), 1e-300);
  const Matrix R = residual(p);
  if (spectral_norm(R) > 1e-10 * qn) {
    p -= lu.solve(Eigen::Map<const Vector>(R.data(), n * n));
  }
  Matrix P = symmetrize(Eigen::Map<const Matrix>(p.data(), n, n));
  const double res = spectral_norm(At * P + P * A + Qs);
  if (res > 1e-10 * qn) {
    std::ostringstream os;
    os << "solve_lyapunov: residual " << res << " exceeds 1e-10*||Q||";
    throw NumericError(os.str());
  }
  return P;
}

}  // namespace impulsecert
