#pragma once

#include "impulsecert/matrix.hpp"

namespace impulsecert {

enum class Direction { Forward, Backward };

/// ‖e^{sA}‖ ≤ M e^{μs} (forward) or ‖e^{-sA}‖ ≤ M e^{μs} (backward), s ≥ 0.
struct DecayEnvelope {
  double M = 1.0;
  double mu = 0.0;
  Direction direction = Direction::Forward;
};

struct GilData {
  double beta;  // max Re λ(A)
  double g;     // sqrt(tr(AAᵀ) - |tr A²|), clamped at 0
  int n;
};

GilData gil_data(const Matrix& A);

/// Gil-type envelope with μ = β + ε. Normal matrices (g = 0) give (1, β).
DecayEnvelope envelope(const Matrix& A, double eps, Direction direction);

/// Picks ε from a fixed grid scaled by max(1, ‖A‖), minimizing M e^{μ h_ref}.
DecayEnvelope auto_envelope(const Matrix& A, Direction direction,
                            double h_ref);

/// Bound on ‖e^{tA} - I‖ from an envelope: ‖A‖ M (e^{μt} - 1)/μ.
double exp_diff_bound(const DecayEnvelope& env, double normA, double t);

/// (e^x - 1)/x and (e^x - 1 - x)/x², accurate near 0.
double phi1(double x);
double phi2(double x);

}  // namespace impulsecert
