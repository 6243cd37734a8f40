#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "impulsecert/periodic.hpp"

namespace impulsecert {

struct DwellIndexBounds {
  int N3;
  int N4;
};

/// N3 = -floor((2h - θ1)/h), N4 = floor(θ2/h) with h = θ/N. Quotients within
/// 1e-9 of an integer are snapped to it before flooring.
DwellIndexBounds index_bounds(double theta1, double theta2, int N, double theta);

/// P[l][m] for l = 0…N-1, m = 0…N4; column l integrates the couplings over
/// ((m+l)h, (m+l+1)h].
struct LyapunovGrid {
  int N = 0;
  int max_steps = 0;  // N4
  double h = 0.0;
  std::vector<std::vector<Block2x2>> P;

  const Block2x2& at(int m, int l) const { return P[l][m]; }
};

LyapunovGrid build_grid(const CoupledSystem& sys, const Block2x2& P0, int N);

/// λ_max^+(P⁻¹(AᵀP + PA + 2h𝔩‖P‖I)).
double rate_term(const Block2x2& P, const Matrix& Afrozen, double lip_norm,
                 double h);

struct QEntry {
  int l = 0;
  int M = 0;
  double Q = 0.0;  // NaN when a Π in the window is not positive definite
  double rate_start = 0.0;
  double rate_end = 0.0;
  double theta_sum = 0.0;
  double jump = 0.0;
};

/// Q_M^(l) for one pair; bounds and envelopes as certify_aperiodic uses them.
QEntry q_value(const LyapunovGrid& grid, const CoupledSystem& sys, int l,
               int M, const CertifyOptions& options = {});

struct AperiodicReport {
  Verdict verdict = Verdict::Inconclusive;
  int N = 0;
  double h = 0.0;
  DwellIndexBounds indices{0, 0};
  int M_lo = 0;  // effective lower end of the M window (N3 clamped at 0)
  std::optional<QEntry> worst;
  std::vector<QEntry> q_table;
  std::vector<std::vector<double>> lambda_min_pi;  // [l][m], m = 0…N4
  double min_lambda_pi = 0.0;                      // over m ≤ N4
  double min_lambda_pi_q_window = 0.0;             // over m ≤ N4 - 1
  std::optional<std::pair<int, int>> failing;      // first (l, m) with Π not ≻ 0
  EnvelopeSet envelopes;
  std::vector<std::string> notes;
};

AperiodicReport certify_aperiodic(const CoupledSystem& sys, const Block2x2& P0,
                                  int N, const CertifyOptions& options = {});

/// Impulse-time bookkeeping used by the diagnostic interpolant.
struct ImpulseIndices {
  double tau_tilde;  // τ_k reduced modulo θ
  int l_k;           // floor(τ̃_k/h) + 1
  int d_k;           // floor(τ_k/h) + 1
  int kappa_k;       // floor(τ_{k+1}/h)
};

ImpulseIndices impulse_indices(double tau_k, double tau_next, double theta,
                               int N);

/// Piecewise interpolant on (τ_k, τ_{k+1}]: P0 up to d_k h, propagated grid
/// entries of column l_k mod N in between, frozen after ϰ_k h. Intervals are
/// right-closed, so a node value is the left limit.
Block2x2 eval_P_aperiodic(double t, double tau_k, double tau_next,
                          const LyapunovGrid& grid, const CoupledSystem& sys);

}  // namespace impulsecert
