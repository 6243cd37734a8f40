#pragma once

#include <optional>
#include <string>
#include <vector>

#include "impulsecert/exp_bounds.hpp"
#include "impulsecert/matrix.hpp"
#include "impulsecert/system.hpp"

namespace impulsecert {

enum class Verdict { StableCertified, Inconclusive };

const char* to_string(Verdict v);

/// P_0 … P_N of the periodic construction.
struct LyapunovTable {
  int N = 0;
  double h = 0.0;
  std::vector<Block2x2> P;
};

struct SandwichPair {
  Block2x2 Pi;
  Block2x2 Xi;
};

/// (M1, μ1), (M2, μ2) bound e^{sA_ii}; (N1, δ1), (N2, δ2) bound e^{-sA_ii}.
struct EnvelopeSet {
  DecayEnvelope fwd1, fwd2, bwd1, bwd2;
};

struct ThetaInputs {
  double eta11 = 0, eta22 = 0, eta12 = 0, eta21 = 0;
  double alpha11 = 0, alpha12 = 0, alpha21 = 0, alpha22 = 0;
  double gamma12 = 0, gamma21 = 0;
  EnvelopeSet env;
};

struct CertifyOptions {
  GammaPolicy gamma_policy = GammaPolicy::PerInterval;
  std::optional<double> eps;             // fixed ε for non-normal blocks
  std::optional<EnvelopeSet> envelopes;  // overrides both of the above
};

struct StepRecord {
  int m;
  double lambda_min_pi;
  double lambda_max_xi;
  double theta;
  ThetaInputs inputs;
};

struct CertificateReport {
  Verdict verdict = Verdict::Inconclusive;
  double Q = 0.0;  // NaN when some Π_m is not positive definite
  double theta_sum = 0.0;
  double jump_term = 0.0;
  double min_lambda_pi = 0.0;
  int N = 0;
  double h = 0.0;
  std::optional<int> failing_index;
  std::vector<StepRecord> steps;
  EnvelopeSet envelopes;
  LyapunovTable table;
  std::vector<std::string> notes;
};

EnvelopeSet make_envelopes(const CoupledSystem& sys, double h_ref,
                           std::optional<double> eps = std::nullopt);

/// Block-diagonal P0: Lyapunov solutions with Q = I for Hurwitz blocks,
/// identity otherwise.
Block2x2 default_P0(const CoupledSystem& sys);

/// One step of the recursion with precomputed E_i = e^{-A_ii h} and the
/// exact coupling integrals I12, I21 over the step.
Block2x2 recursion_step(const Block2x2& P, const Matrix& E1, const Matrix& E2,
                        const Matrix& I12, const Matrix& I21);

/// Step over (mh, (m+1)h] of the system's own time axis.
Block2x2 recursion_step(const Block2x2& P, const CoupledSystem& sys, long m,
                        double h);

LyapunovTable build_table(const CoupledSystem& sys, const Block2x2& P0, int N);

/// Continuous interpolant on (0, θ]; equals P_{m+1} at t = (m+1)h.
Block2x2 eval_P(double t, const LyapunovTable& table, const CoupledSystem& sys);

SandwichPair sandwich(const Block2x2& P, double gamma12, double gamma21,
                      double h);

ThetaInputs theta_inputs(const Block2x2& P, double gamma12, double gamma21,
                         double normA11, double normA22,
                         const EnvelopeSet& env);

double theta_m(const ThetaInputs& in, double h);

double lyapunov_value(const Block2x2& P, const Vector& x1, const Vector& x2);
double lyapunov_value(double t, const Vector& x1, const Vector& x2,
                      const LyapunovTable& table, const CoupledSystem& sys);

void require_spd(const Block2x2& P0, const char* what);

CertificateReport certify_periodic(const CoupledSystem& sys,
                                   const Block2x2& P0, int N,
                                   const CertifyOptions& options = {});

}  // namespace impulsecert
