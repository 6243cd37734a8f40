#pragma once

#include <optional>
#include <vector>

#include "impulsecert/matrix.hpp"

namespace impulsecert {

struct Harmonic {
  int k;
  Matrix coeff;
};

/// C0 + Σ C_k cos(2πkt/θ) + Σ S_k sin(2πkt/θ).
class TrigMatrixPolynomial {
 public:
  TrigMatrixPolynomial(double period, Matrix constant,
                       std::vector<Harmonic> cos_terms = {},
                       std::vector<Harmonic> sin_terms = {});

  double period() const { return period_; }
  Index rows() const { return constant_.rows(); }
  Index cols() const { return constant_.cols(); }
  const Matrix& constant_term() const { return constant_; }
  const std::vector<Harmonic>& cos_terms() const { return cos_; }
  const std::vector<Harmonic>& sin_terms() const { return sin_; }

  Matrix operator()(double t) const;
  Matrix integral(double a, double b) const;
  TrigMatrixPolynomial derivative() const;
  TrigMatrixPolynomial transpose_times_self() const;  // FᵀF

  /// Σ (2πk/θ)^order (‖C_k‖ + ‖S_k‖), a bound on sup‖F^{(order)}‖.
  double derivative_norm_bound(int order) const;

  bool operator==(const TrigMatrixPolynomial& other) const;

 private:
  double period_;
  Matrix constant_;
  std::vector<Harmonic> cos_;
  std::vector<Harmonic> sin_;
};

Matrix coupling_eval(const TrigMatrixPolynomial& p, double t);
Matrix coupling_integral(const TrigMatrixPolynomial& p, double a, double b);

/// Sound upper bound on sup_{s∈[a,b]} ‖F(s)‖, within about 1e-12 relative of
/// the true supremum.
double sup_norm_bound(const TrigMatrixPolynomial& F, double a, double b);

struct DwellBounds {
  double theta1;
  double theta2;
};

/// Norm bounds for couplings known only as a class (‖A_ij‖ ≤ γ_ij).
struct CouplingBounds {
  double gamma12;
  double gamma21;
};

class CoupledSystem {
 public:
  CoupledSystem(Matrix A11, Matrix A22, TrigMatrixPolynomial A12,
                TrigMatrixPolynomial A21, Block2x2 B, double theta,
                DwellBounds dwell,
                std::optional<CouplingBounds> coupling_bounds = std::nullopt);

  /// Constant dwell time equal to the period.
  static CoupledSystem periodic(Matrix A11, Matrix A22,
                                TrigMatrixPolynomial A12,
                                TrigMatrixPolynomial A21, Block2x2 B,
                                double theta);

  const Matrix& A11() const { return A11_; }
  const Matrix& A22() const { return A22_; }
  const TrigMatrixPolynomial& A12() const { return A12_; }
  const TrigMatrixPolynomial& A21() const { return A21_; }
  const Block2x2& B() const { return B_; }
  double theta() const { return theta_; }
  const DwellBounds& dwell() const { return dwell_; }
  const std::optional<CouplingBounds>& coupling_bounds() const {
    return coupling_bounds_;
  }
  Index n1() const { return A11_.rows(); }
  Index n2() const { return A22_.rows(); }
  Index n() const { return n1() + n2(); }
  bool is_periodic() const;

  /// Copy with a different period, rescaling the couplings' time axis.
  CoupledSystem with_theta(double theta) const;

  bool operator==(const CoupledSystem& other) const;

 private:
  Matrix A11_, A22_;
  TrigMatrixPolynomial A12_, A21_;
  Block2x2 B_;
  double theta_;
  DwellBounds dwell_;
  std::optional<CouplingBounds> coupling_bounds_;
};

/// Block matrix A(t) with couplings frozen at t.
Matrix block_A_at(const CoupledSystem& sys, double t);

enum class GammaPolicy {
  PerInterval,  // γ^(m), l^(m) bound each interval separately
  Uniform,      // one bound over the whole period for every m
};

struct IntervalBoundTable {
  int N;
  double h;
  std::vector<double> gamma12, gamma21, lip12, lip21;

  static int wrap(long m, int N) {
    const long r = m % N;
    return static_cast<int>(r < 0 ? r + N : r);
  }
  double g12(long m) const { return gamma12[wrap(m, N)]; }
  double g21(long m) const { return gamma21[wrap(m, N)]; }
  double l12(long m) const { return lip12[wrap(m, N)]; }
  double l21(long m) const { return lip21[wrap(m, N)]; }
};

/// γ_ij^(m) ≥ sup‖A_ij‖ and l_ij^(m) ≥ sup‖A_ij'‖ on (mh, (m+1)h].
/// Class bounds, when present, replace γ after being checked against the
/// representative couplings.
IntervalBoundTable interval_bounds(const CoupledSystem& sys, int N,
                                   GammaPolicy policy = GammaPolicy::PerInterval);

}  // namespace impulsecert
