#include "impulsecert/smallgain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "impulsecert/errors.hpp"

namespace impulsecert {

namespace {

constexpr double kStrictMargin = 1e-12;

Matrix block_diag(const Matrix& a, const Matrix& b) {
  return Block2x2::symmetric(a, Matrix::Zero(a.rows(), b.cols()), b).assemble();
}

Matrix exp_diag(const CoupledSystem& sys, double theta) {
  return block_diag(mat_exp(sys.A11(), theta), mat_exp(sys.A22(), theta));
}

bool zero_mean(const TrigMatrixPolynomial& p) {
  double scale = spectral_norm(p.constant_term());
  for (const auto& h : p.cos_terms()) scale += spectral_norm(h.coeff);
  for (const auto& h : p.sin_terms()) scale += spectral_norm(h.coeff);
  return spectral_norm(p.constant_term()) <= 1e-12 * std::max(1.0, scale);
}

}  // namespace

AveragedSystem averaged(const CoupledSystem& sys) {
  return {sys.A12().constant_term(), sys.A21().constant_term()};
}

SmallGainData make_small_gain_data(const CoupledSystem& sys, const Matrix& Q1,
                                   const Matrix& Q2) {
  SmallGainData d;
  d.Q1 = symmetrize(Q1);
  d.Q2 = symmetrize(Q2);
  d.P11 = solve_lyapunov(sys.A11(), d.Q1);
  d.P22 = solve_lyapunov(sys.A22(), d.Q2);
  if (const auto& cb = sys.coupling_bounds()) {
    d.gamma12 = cb->gamma12;
    d.gamma21 = cb->gamma21;
  } else {
    d.gamma12 = sup_norm_bound(sys.A12(), 0.0, sys.theta());
    d.gamma21 = sup_norm_bound(sys.A21(), 0.0, sys.theta());
  }
  return d;
}

bool lmi_feasible(const CoupledSystem& sys, const Block2x2& P0) {
  const Matrix P = P0.assemble();
  if (P.rows() != sys.n()) {
    throw DimensionError("lmi_feasible: P0 size does not match the system");
  }
  if (sym_eig_range(P).min <= kStrictMargin) return false;
  const AveragedSystem av = averaged(sys);
  const Matrix Ahat =
      Block2x2(Matrix::Zero(sys.n1(), sys.n1()), av.Ahat12, av.Ahat21,
               Matrix::Zero(sys.n2(), sys.n2()))
          .assemble();
  const double theta = sys.theta();
  const Matrix E = exp_diag(sys, theta);
  const Matrix B = sys.B().assemble();
  const Matrix lhs = P - theta * (Ahat.transpose() * P + P * Ahat) -
                     E.transpose() * B.transpose() * P * B * E;
  return sym_eig_range(symmetrize(lhs)).min > kStrictMargin;
}

CertificateReport prop61_certify(const CoupledSystem& sys, const Block2x2& P0,
                                 const CertifyOptions& options) {
  // One step over the whole period: the exact coupling integral over [0, θ]
  // is θ times the average.
  CertificateReport r = certify_periodic(sys, P0, 1, options);
  r.notes.push_back("single step h = theta with averaged couplings");
  return r;
}

Prop62Report prop62_certify(const SmallGainData& data, const CoupledSystem& sys,
                            double theta) {
  if (!zero_mean(sys.A12()) || !zero_mean(sys.A21())) {
    throw PreconditionError("prop62_certify: couplings must have zero mean");
  }
  if (!(theta > 0.0)) throw ParameterError("prop62_certify: theta must be positive");
  Prop62Report r;
  r.theta = theta;

  const Matrix P = block_diag(data.P11, data.P22);
  const Matrix E = exp_diag(sys, theta);
  const Matrix B = sys.B().assemble();
  r.lambda_max_phi =
      gen_sym_eig_max(symmetrize(E.transpose() * B.transpose() * P * B * E), P);
  r.rhs = -std::log(r.lambda_max_phi);

  const double l11 = sym_eig_range(data.P11).min, l22 = sym_eig_range(data.P22).min;
  r.rho = data.gamma12 * spectral_norm(data.P11) + data.gamma21 * spectral_norm(data.P22);
  r.theta_limit = r.rho > 0.0 ? std::min(l11, l22) / r.rho
                              : std::numeric_limits<double>::infinity();

  const CoupledSystem at = sys.with_theta(theta);
  const EnvelopeSet env = make_envelopes(at, theta);
  const Block2x2 P0 = Block2x2::symmetric(
      data.P11, Matrix::Zero(data.P11.rows(), data.P22.cols()), data.P22);
  const ThetaInputs in = theta_inputs(P0, data.gamma12, data.gamma21,
                                      spectral_norm(sys.A11()),
                                      spectral_norm(sys.A22()), env);
  r.theta0 = theta_m(in, theta);
  const double denom = std::min(l11, l22) - theta * r.rho;
  r.lhs = denom > 0.0 ? r.theta0 / denom : std::numeric_limits<double>::infinity();

  if (!(r.lambda_max_phi < 1.0)) {
    r.notes.push_back("r_sigma(Phi) >= 1: precondition not met");
    r.verdict = Verdict::Inconclusive;
    return r;
  }
  const bool ok = theta < r.theta_limit && r.lhs < r.rhs;
  if (!(theta < r.theta_limit)) r.notes.push_back("theta exceeds min lambda_min(P_ii)/rho");
  else if (!(r.lhs < r.rhs)) r.notes.push_back("Theta_0 term exceeds -ln lambda_max(Phi)");
  r.verdict = ok ? Verdict::StableCertified : Verdict::Inconclusive;
  return r;
}

double small_gain_bound(const SmallGainData& data) {
  const double a = 1.0 / gen_sym_eig_max(data.P11, data.Q1);  // λ_min(P11⁻¹Q1)
  const double b = 1.0 / gen_sym_eig_max(data.P22, data.Q2);
  return 0.25 * a * b;
}

bool small_gain_check(const SmallGainData& data) {
  return data.gamma12 * data.gamma21 < small_gain_bound(data);
}

ThetaStarResult theta_star(const SmallGainData& data, const CoupledSystem& sys,
                           double cap) {
  if (!(cap > 0.0)) throw ParameterError("theta_star: cap must be positive");
  auto pass = [&](double th) {
    return prop62_certify(data, sys, th).verdict == Verdict::StableCertified;
  };
  ThetaStarResult res;
  constexpr int kScan = 200;
  int first_fail = -1;
  for (int i = 1; i <= kScan; ++i) {
    const bool ok = pass(cap * i / kScan);
    if (!ok && first_fail < 0) first_fail = i;
    if (ok && first_fail >= 0) res.monotone = false;
  }
  if (first_fail < 0) {
    res.theta_star = cap;
    return res;
  }
  if (!res.monotone) {
    res.notes.push_back(
        "non-monotone: some theta passes after a failure; returning the "
        "largest verified prefix");
  }
  double lo = cap * (first_fail - 1) / kScan, hi = cap * first_fail / kScan;
  while (hi - lo > 1e-6) {
    const double mid = 0.5 * (lo + hi);
    if (pass(mid)) lo = mid;
    else hi = mid;
  }
  res.theta_star = lo;
  return res;
}

}  // namespace impulsecert
