#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "impulsecert/system.hpp"

namespace impulsecert {

/// Impulses at τ_k = τ_0 + T_1 + … + T_k, k ≥ 1. The state given at τ_0 is
/// the post-impulse value there.
struct DwellSequence {
  double tau0 = 0.0;
  std::vector<double> dwell_times;

  std::vector<double> impulse_times() const;
};

/// Uniform draws on [θ1, θ2] from a seeded mt19937_64.
DwellSequence random_dwell(const CoupledSystem& sys, std::size_t count,
                           std::uint64_t seed, double tau0 = 0.0);

enum class Side { LeftLimit, RightLimit };

const char* to_string(Side s);

struct Sample {
  double t;
  Vector x;
  Side side;
};

struct Trajectory {
  std::vector<Sample> samples;
  /// Indices into samples of x(τ_k + 0), starting with τ_0.
  std::vector<std::size_t> epochs;
};

/// Step cap for the fixed-step integrators, θ/2048.
double max_step(const CoupledSystem& sys);

/// Φ(t1, t0) for dX/dt = A(t)X, classical RK4.
Matrix transition_matrix(const CoupledSystem& sys, double t0, double t1);

/// r_σ(B Φ(θ, 0)).
double monodromy_spectral_radius(const CoupledSystem& sys);

/// Interior points carry the left limit (the solution is left-continuous);
/// each impulse contributes a left and a right sample.
Trajectory integrate_trajectory(const CoupledSystem& sys,
                                const DwellSequence& dwell, const Vector& x0,
                                double horizon, int interior_samples = 0);

/// dP/dt = -(AᵀP + PA) from P(0) = P0.
Block2x2 exact_P_ode(const CoupledSystem& sys, const Block2x2& P0, double t);

struct DecayFit {
  double C;
  double rho;
};

/// Least-squares fit of log‖x(τ_k + 0)‖ against k.
DecayFit empirical_decay(const Trajectory& traj);

/// Columns t, side, x_1 … x_n.
void write_csv(const Trajectory& traj, std::ostream& os);

}  // namespace impulsecert
