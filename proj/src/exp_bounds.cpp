#include "impulsecert/exp_bounds.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "impulsecert/errors.hpp"

namespace impulsecert {

double phi1(double x) {
  if (std::abs(x) < 1e-6) return 1.0 + x / 2.0 + x * x / 6.0;
  return std::expm1(x) / x;
}

double phi2(double x) {
  if (std::abs(x) < 0.1) {
    // Σ x^k/(k+2)!, 12 terms reach full precision for |x| < 0.1.
    double term = 0.5, sum = 0.0;
    for (int k = 0; k < 12; ++k) {
      sum += term;
      term *= x / static_cast<double>(k + 3);
    }
    return sum;
  }
  return (std::expm1(x) - x) / (x * x);
}

GilData gil_data(const Matrix& A) {
  require_square(A, "gil_data");
  require_finite(A, "gil_data");
  Eigen::EigenSolver<Matrix> es;
  es.setMaxIterations(2000);
  es.compute(A, false);
  if (es.info() != Eigen::Success) {
    throw NumericError("gil_data: eigenvalue iteration did not converge");
  }
  const double beta = es.eigenvalues().real().maxCoeff();
  const double trAAt = (A.array() * A.array()).sum();
  const double trA2 = (A.array() * A.transpose().array()).sum();
  double g2 = trAAt - std::abs(trA2);
  if (g2 <= 64.0 * std::numeric_limits<double>::epsilon() * trAAt) g2 = 0.0;
  return {beta, std::sqrt(g2), static_cast<int>(A.rows())};
}

namespace {

double gil_profile(double t, double eps, double g, int n) {
  // e^{-εt} Σ_{k<n} g^k t^k / (k!)^{3/2}
  double sum = 0.0, term = 1.0, fact = 1.0;
  for (int k = 0; k < n; ++k) {
    if (k > 0) {
      term *= g * t;
      fact *= k;
    }
    sum += term / std::pow(fact, 1.5);
  }
  return std::exp(-eps * t) * sum;
}

double gil_sup(double eps, double g, int n) {
  const double tmax = 10.0 * (n - 1) / eps;
  constexpr int kScan = 10000;
  const double dt = tmax / kScan;
  int best = 0;
  double fbest = gil_profile(0.0, eps, g, n);
  for (int i = 1; i <= kScan; ++i) {
    const double f = gil_profile(i * dt, eps, g, n);
    if (f > fbest) {
      fbest = f;
      best = i;
    }
  }
  // Golden-section refinement on the bracket around the best sample.
  double lo = std::max(0, best - 1) * dt, hi = std::min(kScan, best + 1) * dt;
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - r * (hi - lo), x2 = lo + r * (hi - lo);
  double f1 = gil_profile(x1, eps, g, n), f2 = gil_profile(x2, eps, g, n);
  for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max(1.0, hi); ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + r * (hi - lo);
      f2 = gil_profile(x2, eps, g, n);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - r * (hi - lo);
      f1 = gil_profile(x1, eps, g, n);
    }
  }
  fbest = std::max({fbest, f1, f2});
  return fbest * (1.0 + 1e-9);
}

}  // namespace

DecayEnvelope envelope(const Matrix& A, double eps, Direction direction) {
  const Matrix S = direction == Direction::Forward ? A : Matrix(-A);
  const GilData gd = gil_data(S);
  if (gd.g == 0.0) return {1.0, gd.beta, direction};
  if (!(eps > 0.0) || !std::isfinite(eps)) {
    std::ostringstream os;
    os << "envelope: eps must be positive for a non-normal matrix (got " << eps
       << ")";
    throw ParameterError(os.str());
  }
  return {gil_sup(eps, gd.g, gd.n), gd.beta + eps, direction};
}

DecayEnvelope auto_envelope(const Matrix& A, Direction direction,
                            double h_ref) {
  const Matrix S = direction == Direction::Forward ? A : Matrix(-A);
  const GilData gd = gil_data(S);
  if (gd.g == 0.0) return {1.0, gd.beta, direction};
  const double scale = std::max(1.0, spectral_norm(A));
  static constexpr std::array<double, 6> grid = {0.01, 0.05, 0.1,
                                                 0.25, 0.5,  1.0};
  DecayEnvelope best;
  double best_val = std::numeric_limits<double>::infinity();
  for (const double f : grid) {
    const double eps = f * scale;
    const DecayEnvelope e{gil_sup(eps, gd.g, gd.n), gd.beta + eps, direction};
    const double v = e.M * std::exp(e.mu * h_ref);
    if (v < best_val) {
      best_val = v;
      best = e;
    }
  }
  return best;
}

double exp_diff_bound(const DecayEnvelope& env, double normA, double t) {
  if (!(t >= 0.0)) throw DomainError("exp_diff_bound: t must be >= 0");
  if (std::abs(env.mu) < 1e-8) return normA * env.M * t;
  return normA * env.M * std::expm1(env.mu * t) / env.mu;
}

}  // namespace impulsecert
