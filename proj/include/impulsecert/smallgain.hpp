#pragma once

#include <string>
#include <vector>

#include "impulsecert/periodic.hpp"

namespace impulsecert {

/// Period averages of the couplings (their constant coefficients).
struct AveragedSystem {
  Matrix Ahat12;
  Matrix Ahat21;
};

AveragedSystem averaged(const CoupledSystem& sys);

/// Subsystem Lyapunov data: A_iiᵀP_ii + P_iiA_ii = -Q_i, plus coupling gains.
struct SmallGainData {
  Matrix P11, P22, Q1, Q2;
  double gamma12 = 0.0;
  double gamma21 = 0.0;
};

/// Solves both Lyapunov equations; γ are the couplings' sup norms over the
/// period (or the system's class bounds).
SmallGainData make_small_gain_data(const CoupledSystem& sys, const Matrix& Q1,
                                   const Matrix& Q2);

/// P0 ≻ 0 and P0 - θ(ÂᵀP0 + P0Â) - EᵀBᵀP0BE ≻ 0, E = diag(e^{θA11}, e^{θA22}),
/// both with eigenvalue margin 1e-12.
bool lmi_feasible(const CoupledSystem& sys, const Block2x2& P0);

/// Single-step certificate with averaged couplings over the whole period.
CertificateReport prop61_certify(const CoupledSystem& sys, const Block2x2& P0,
                                 const CertifyOptions& options = {});

struct Prop62Report {
  Verdict verdict = Verdict::Inconclusive;
  double theta = 0.0;
  double rho = 0.0;            // γ12‖P11‖ + γ21‖P22‖
  double theta_limit = 0.0;    // min(λ_min(P11), λ_min(P22))/ρ
  double theta0 = 0.0;         // Θ_0(θ)
  double lhs = 0.0;            // Θ_0(θ)/min(λ_min(P_ii) - θρ)
  double lambda_max_phi = 0.0; // λ_max(Φ) = r_σ(Φ)
  double rhs = 0.0;            // -ln λ_max(Φ)
  std::vector<std::string> notes;
};

/// Zero-mean couplings required; throws PreconditionError otherwise.
Prop62Report prop62_certify(const SmallGainData& data, const CoupledSystem& sys,
                            double theta);

/// γ12 γ21 < ¼ λ_min(P11⁻¹Q1) λ_min(P22⁻¹Q2), strict.
bool small_gain_check(const SmallGainData& data);
double small_gain_bound(const SmallGainData& data);

struct ThetaStarResult {
  double theta_star = 0.0;
  bool monotone = true;
  std::vector<std::string> notes;
};

/// Largest θ ∈ (0, cap] passing prop62_certify: 200-point scan, then
/// bisection to 1e-6 on the first pass/fail transition.
ThetaStarResult theta_star(const SmallGainData& data, const CoupledSystem& sys,
                           double cap = 10.0);

}  // namespace impulsecert
