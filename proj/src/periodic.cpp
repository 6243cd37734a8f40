#include "impulsecert/periodic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "impulsecert/errors.hpp"

namespace impulsecert {

const char* to_string(Verdict v) {
  return v == Verdict::StableCertified ? "stable-certified" : "inconclusive";
}

namespace {

bool hurwitz(const Matrix& A) {
  Eigen::EigenSolver<Matrix> es(A, false);
  return es.info() == Eigen::Success && es.eigenvalues().real().maxCoeff() < 0.0;
}

// ∫_0^h e^{δs} (e^{μs} - 1)/μ ds
double integral_I1(double mu, double delta, double h) {
  if (std::abs(mu * h) >= 0.1) {
    return h * (phi1((mu + delta) * h) - phi1(delta * h)) / mu;
  }
  // Integrand s e^{δs} φ1(μs), composite 8-point Gauss-Legendre.
  static constexpr std::array<double, 4> x = {
      0.1834346424956498, 0.5255324099163290, 0.7966664774136267,
      0.9602898564975363};
  static constexpr std::array<double, 4> w = {
      0.3626837833783620, 0.3137066458778873, 0.2223810344533745,
      0.1012285362903763};
  const int panels = std::max(
      1, static_cast<int>(std::ceil((std::abs(mu) + std::abs(delta)) * h / 0.5)));
  const double width = h / panels;
  auto f = [&](double s) { return s * std::exp(delta * s) * phi1(mu * s); };
  double sum = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double c = (p + 0.5) * width, r = 0.5 * width;
    for (std::size_t i = 0; i < x.size(); ++i) {
      sum += w[i] * r * (f(c - r * x[i]) + f(c + r * x[i]));
    }
  }
  return sum;
}

// ∫_0^1 u e^{yu} du
double psi(double y) { return std::exp(y) * phi2(-y); }

Block2x2 propagate(const Block2x2& P, const Matrix& E1, const Matrix& E2,
                   const Matrix& I12, const Matrix& I21) {
  const Matrix& P11 = P.b11;
  const Matrix& P12 = P.b12;
  const Matrix P21 = P.b12.transpose();
  const Matrix& P22 = P.b22;
  Matrix n11 = E1.transpose() * (P11 - (P12 * I21 + I21.transpose() * P21)) * E1;
  Matrix n22 = E2.transpose() * (P22 - (I12.transpose() * P12 + P21 * I12)) * E2;
  Matrix n12 = E1.transpose() * (P12 - (P11 * I12 + I21.transpose() * P22)) * E2;
  return Block2x2::symmetric(symmetrize(n11), std::move(n12), symmetrize(n22));
}

}  // namespace

void require_spd(const Block2x2& P0, const char* what) {
  const Matrix P = P0.assemble();
  if (!P.allFinite()) throw InputError(std::string(what) + ": non-finite entry");
  const double scale = std::max(1.0, P.cwiseAbs().maxCoeff());
  if ((P - P.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw InputError(std::string(what) + ": not symmetric");
  }
  const double lmin = sym_eigenvalues(P)(0);
  if (!(lmin > 0.0)) {
    std::ostringstream os;
    os << what << ": not positive definite (lambda_min = " << lmin << ")";
    throw InputError(os.str());
  }
}

EnvelopeSet make_envelopes(const CoupledSystem& sys, double h_ref,
                           std::optional<double> eps) {
  auto env = [&](const Matrix& A, Direction d) {
    return eps ? envelope(A, *eps, d) : auto_envelope(A, d, h_ref);
  };
  return {env(sys.A11(), Direction::Forward), env(sys.A22(), Direction::Forward),
          env(sys.A11(), Direction::Backward),
          env(sys.A22(), Direction::Backward)};
}

Block2x2 default_P0(const CoupledSystem& sys) {
  auto block = [](const Matrix& A) {
    const Index n = A.rows();
    return hurwitz(A) ? solve_lyapunov(A, Matrix::Identity(n, n))
                      : Matrix(Matrix::Identity(n, n));
  };
  return Block2x2::symmetric(block(sys.A11()),
                             Matrix::Zero(sys.n1(), sys.n2()),
                             block(sys.A22()));
}

Block2x2 recursion_step(const Block2x2& P, const Matrix& E1, const Matrix& E2,
                        const Matrix& I12, const Matrix& I21) {
  return propagate(P, E1, E2, I12, I21);
}

Block2x2 recursion_step(const Block2x2& P, const CoupledSystem& sys, long m,
                        double h) {
  if (!(h > 0.0)) throw ParameterError("recursion_step: h must be positive");
  const double a = static_cast<double>(m) * h, b = a + h;
  return propagate(P, mat_exp(sys.A11(), -h), mat_exp(sys.A22(), -h),
                   sys.A12().integral(a, b), sys.A21().integral(a, b));
}

LyapunovTable build_table(const CoupledSystem& sys, const Block2x2& P0, int N) {
  if (N < 1) throw ParameterError("build_table: N must be >= 1");
  LyapunovTable t;
  t.N = N;
  t.h = sys.theta() / N;
  const Matrix E1 = mat_exp(sys.A11(), -t.h), E2 = mat_exp(sys.A22(), -t.h);
  t.P.reserve(N + 1);
  t.P.push_back(Block2x2::symmetric(symmetrize(P0.b11), P0.b12,
                                    symmetrize(P0.b22)));
  for (int m = 0; m < N; ++m) {
    const double a = m * t.h, b = (m + 1) * t.h;
    t.P.push_back(propagate(t.P.back(), E1, E2, sys.A12().integral(a, b),
                            sys.A21().integral(a, b)));
  }
  return t;
}

Block2x2 eval_P(double t, const LyapunovTable& table, const CoupledSystem& sys) {
  const double theta = sys.theta();
  if (!(t > 0.0) || t > theta * (1.0 + 1e-14)) {
    throw DomainError("eval_P: t must lie in (0, theta]");
  }
  const double h = table.h;
  int m = static_cast<int>(std::ceil(t / h)) - 1;
  m = std::clamp(m, 0, table.N - 1);
  const double end = (m + 1) * h;
  if (std::abs(t - end) <= 1e-12 * theta) return table.P[m + 1];
  const double start = m * h, tau = t - start;
  return propagate(table.P[m], mat_exp(sys.A11(), -tau),
                   mat_exp(sys.A22(), -tau), sys.A12().integral(start, t),
                   sys.A21().integral(start, t));
}

SandwichPair sandwich(const Block2x2& P, double g12, double g21, double h) {
  const double p11 = spectral_norm(P.b11), p12 = spectral_norm(P.b12),
               p22 = spectral_norm(P.b22);
  const double common = g12 * p11 + g21 * p22;
  const double d1 = h * (2.0 * g21 * p12 + common);
  const double d2 = h * (2.0 * g12 * p12 + common);
  const Matrix I1 = Matrix::Identity(P.n1(), P.n1());
  const Matrix I2 = Matrix::Identity(P.n2(), P.n2());
  return {Block2x2::symmetric(P.b11 - d1 * I1, P.b12, P.b22 - d2 * I2),
          Block2x2::symmetric(P.b11 + d1 * I1, P.b12, P.b22 + d2 * I2)};
}

ThetaInputs theta_inputs(const Block2x2& P, double g12, double g21,
                         double normA11, double normA22,
                         const EnvelopeSet& env) {
  const double p11 = spectral_norm(P.b11), p12 = spectral_norm(P.b12),
               p22 = spectral_norm(P.b22);
  ThetaInputs in;
  in.gamma12 = g12;
  in.gamma21 = g21;
  in.env = env;
  in.eta11 = std::hypot(p11, p12) + p12;
  in.eta22 = std::hypot(p22, p12) + p12;
  const double s = p11 * g12 + p22 * g21;
  in.eta12 = 0.5 * (s + std::sqrt(s * s + 16.0 * g21 * g21 * p12 * p12));
  in.eta21 = 0.5 * (s + std::sqrt(s * s + 16.0 * g12 * g12 * p12 * p12));
  const double M1 = env.fwd1.M, M2 = env.fwd2.M, N1 = env.bwd1.M,
               N2 = env.bwd2.M;
  in.alpha11 = g12 * normA22 * N1 * M2 * in.eta11;
  in.alpha12 = g12 * normA11 * N1 * in.eta11;
  in.alpha21 = g21 * normA11 * N2 * M1 * in.eta22;
  in.alpha22 = g21 * normA22 * N2 * in.eta22;
  return in;
}

double theta_m(const ThetaInputs& in, double h) {
  if (!(h > 0.0)) throw ParameterError("theta_m: h must be positive");
  const double mu1 = in.env.fwd1.mu, mu2 = in.env.fwd2.mu;
  const double d1 = in.env.bwd1.mu, d2 = in.env.bwd2.mu;
  const double M1 = in.env.fwd1.M, M2 = in.env.fwd2.M;
  const double N1 = in.env.bwd1.M, N2 = in.env.bwd2.M;
  const double h2 = h * h;
  double t = 0.0;
  t += in.alpha11 * integral_I1(mu2, d1, h);
  t += in.alpha12 * h2 * phi2(d1 * h);
  t += in.alpha21 * integral_I1(mu1, d2, h);
  t += in.alpha22 * h2 * phi2(d2 * h);
  t += 2.0 * in.gamma12 * in.eta12 * N1 * M2 * h2 * psi((mu2 + d1) * h);
  t += 2.0 * in.gamma21 * in.eta21 * N2 * M1 * h2 * psi((mu1 + d2) * h);
  return std::max(t, 0.0);
}

double lyapunov_value(const Block2x2& P, const Vector& x1, const Vector& x2) {
  if (x1.size() != P.n1() || x2.size() != P.n2()) {
    throw DimensionError("lyapunov_value: state size does not match blocks");
  }
  return x1.dot(P.b11 * x1) + 2.0 * x1.dot(P.b12 * x2) + x2.dot(P.b22 * x2);
}

double lyapunov_value(double t, const Vector& x1, const Vector& x2,
                      const LyapunovTable& table, const CoupledSystem& sys) {
  return lyapunov_value(eval_P(t, table, sys), x1, x2);
}

CertificateReport certify_periodic(const CoupledSystem& sys,
                                   const Block2x2& P0, int N,
                                   const CertifyOptions& options) {
  if (N < 1) throw ParameterError("certify_periodic: N must be >= 1");
  if (!sys.is_periodic()) {
    throw PreconditionError(
        "certify_periodic: requires constant dwell time equal to theta");
  }
  if (P0.n1() != sys.n1() || P0.n2() != sys.n2()) {
    throw DimensionError("certify_periodic: P0 blocks do not match the system");
  }
  require_spd(P0, "certify_periodic(P0)");

  CertificateReport r;
  r.N = N;
  r.h = sys.theta() / N;
  const IntervalBoundTable bounds = interval_bounds(sys, N, options.gamma_policy);
  r.envelopes = options.envelopes ? *options.envelopes
                                  : make_envelopes(sys, r.h, options.eps);
  r.table = build_table(sys, P0, N);
  const double nA11 = spectral_norm(sys.A11()), nA22 = spectral_norm(sys.A22());

  r.min_lambda_pi = std::numeric_limits<double>::infinity();
  for (int m = 0; m < N; ++m) {
    const Block2x2& P = r.table.P[m];
    const SandwichPair sw = sandwich(P, bounds.g12(m), bounds.g21(m), r.h);
    StepRecord st;
    st.m = m;
    st.lambda_min_pi = sym_eig_range(sw.Pi.assemble()).min;
    st.lambda_max_xi = sym_eig_range(sw.Xi.assemble()).max;
    st.inputs = theta_inputs(P, bounds.g12(m), bounds.g21(m), nA11, nA22,
                             r.envelopes);
    st.theta = theta_m(st.inputs, r.h);
    r.min_lambda_pi = std::min(r.min_lambda_pi, st.lambda_min_pi);
    if (!(st.lambda_min_pi > 0.0) && !r.failing_index) r.failing_index = m;
    if (st.lambda_min_pi > 0.0) r.theta_sum += st.theta / st.lambda_min_pi;
    r.steps.push_back(st);
  }

  const Matrix B = sys.B().assemble();
  const Matrix S = symmetrize(B.transpose() * P0.assemble() * B);
  const Matrix PN = r.table.P[N].assemble();
  if (r.failing_index) {
    r.Q = std::numeric_limits<double>::quiet_NaN();
    r.verdict = Verdict::Inconclusive;
    r.notes.push_back("Pi_m is not positive definite at m = " +
                      std::to_string(*r.failing_index));
    try {
      r.jump_term = std::log(gen_sym_eig_max(S, PN));
    } catch (const DefinitenessError&) {
      r.jump_term = std::numeric_limits<double>::quiet_NaN();
    }
    return r;
  }
  try {
    r.jump_term = std::log(gen_sym_eig_max(S, PN));
  } catch (const DefinitenessError& e) {
    r.jump_term = std::numeric_limits<double>::quiet_NaN();
    r.Q = std::numeric_limits<double>::quiet_NaN();
    r.verdict = Verdict::Inconclusive;
    r.notes.push_back(std::string("P_N is not positive definite: ") + e.what());
    return r;
  }
  r.Q = r.theta_sum + r.jump_term;
  r.verdict = r.Q <= -1e-12 ? Verdict::StableCertified : Verdict::Inconclusive;
  return r;
}

}  // namespace impulsecert
