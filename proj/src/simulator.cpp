#include "impulsecert/simulator.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>

#include "impulsecert/errors.hpp"

namespace impulsecert {

namespace {

int step_count(const CoupledSystem& sys, double span) {
  return std::max(1, static_cast<int>(std::ceil(span / max_step(sys) - 1e-9)));
}

// One RK4 step of y' = f(t, y).
template <typename F, typename Y>
Y rk4(const F& f, double t, const Y& y, double dt) {
  const Y k1 = f(t, y);
  const Y k2 = f(t + 0.5 * dt, Y(y + 0.5 * dt * k1));
  const Y k3 = f(t + 0.5 * dt, Y(y + 0.5 * dt * k2));
  const Y k4 = f(t + dt, Y(y + dt * k3));
  return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Fills A(t) in place; the diagonal blocks are written once.
class FrozenA {
 public:
  explicit FrozenA(const CoupledSystem& sys) : sys_(sys) {}

  Matrix blank() const {
    Matrix A = Matrix::Zero(sys_.n(), sys_.n());
    A.topLeftCorner(sys_.n1(), sys_.n1()) = sys_.A11();
    A.bottomRightCorner(sys_.n2(), sys_.n2()) = sys_.A22();
    return A;
  }

  void eval(double t, Matrix& A) const {
    fill(sys_.A12(), t, A.topRightCorner(sys_.n1(), sys_.n2()));
    fill(sys_.A21(), t, A.bottomLeftCorner(sys_.n2(), sys_.n1()));
  }

 private:
  template <typename Block>
  static void fill(const TrigMatrixPolynomial& p, double t, Block&& out) {
    const double q = t / p.period();
    const double u = q - std::floor(q);
    constexpr double kTwoPi = 6.283185307179586476925286766559;
    out = p.constant_term();
    for (const auto& h : p.cos_terms()) out += std::cos(kTwoPi * h.k * u) * h.coeff;
    for (const auto& h : p.sin_terms()) out += std::sin(kTwoPi * h.k * u) * h.coeff;
  }

  const CoupledSystem& sys_;
};

// Classical RK4 for Y' = A(t)Y, reusing A at shared stage times.
template <typename Y>
Y integrate_linear(const CoupledSystem& sys, double t0, double t1, Y y) {
  if (t1 <= t0) return y;
  const int n = step_count(sys, t1 - t0);
  const double dt = (t1 - t0) / n;
  const FrozenA frozen(sys);
  Matrix a0 = frozen.blank(), am = a0, a1 = a0;
  frozen.eval(t0, a0);
  Y k1, k2, k3, k4, tmp;
  for (int i = 0; i < n; ++i) {
    const double t = t0 + i * dt;
    frozen.eval(t + 0.5 * dt, am);
    frozen.eval(t0 + (i + 1) * dt, a1);
    k1.noalias() = a0 * y;
    tmp = y + (0.5 * dt) * k1;
    k2.noalias() = am * tmp;
    tmp = y + (0.5 * dt) * k2;
    k3.noalias() = am * tmp;
    tmp = y + dt * k3;
    k4.noalias() = a1 * tmp;
    y += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    std::swap(a0, a1);
  }
  return y;
}

Vector flow(const CoupledSystem& sys, double t0, double t1, Vector x) {
  return integrate_linear(sys, t0, t1, std::move(x));
}

}  // namespace

std::vector<double> DwellSequence::impulse_times() const {
  std::vector<double> out;
  double t = tau0;
  for (const double T : dwell_times) {
    t += T;
    out.push_back(t);
  }
  return out;
}

DwellSequence random_dwell(const CoupledSystem& sys, std::size_t count,
                           std::uint64_t seed, double tau0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(sys.dwell().theta1,
                                              sys.dwell().theta2);
  DwellSequence d;
  d.tau0 = tau0;
  for (std::size_t i = 0; i < count; ++i) d.dwell_times.push_back(dist(rng));
  return d;
}

const char* to_string(Side s) {
  return s == Side::LeftLimit ? "left" : "right";
}

double max_step(const CoupledSystem& sys) { return sys.theta() / 2048.0; }

Matrix transition_matrix(const CoupledSystem& sys, double t0, double t1) {
  if (t1 < t0) throw ContractError("transition_matrix: requires t0 <= t1");
  return integrate_linear(sys, t0, t1, Matrix(Matrix::Identity(sys.n(), sys.n())));
}

double monodromy_spectral_radius(const CoupledSystem& sys) {
  return spectral_radius(sys.B().assemble() * transition_matrix(sys, 0.0, sys.theta()));
}

Trajectory integrate_trajectory(const CoupledSystem& sys,
                                const DwellSequence& dwell, const Vector& x0,
                                double horizon, int interior_samples) {
  if (x0.size() != sys.n()) throw DimensionError("integrate_trajectory: x0 size");
  if (!(horizon >= 0.0) || !std::isfinite(horizon)) {
    throw ContractError("integrate_trajectory: horizon must be finite and >= 0");
  }
  if (interior_samples < 0) {
    throw ContractError("integrate_trajectory: interior_samples must be >= 0");
  }
  const double end = dwell.tau0 + horizon;
  const std::vector<double> taus = dwell.impulse_times();
  if (horizon > 0.0 && (taus.empty() || taus.back() < end)) {
    throw ContractError("integrate_trajectory: dwell sequence does not cover the horizon");
  }
  const Matrix B = sys.B().assemble();
  Trajectory tr;
  Vector x = x0;
  double t = dwell.tau0;
  tr.samples.push_back({t, x, Side::RightLimit});
  tr.epochs.push_back(0);
  auto advance = [&](double target) {
    const int pieces = interior_samples + 1;
    const double t_start = t;
    for (int p = 1; p <= pieces; ++p) {
      const double tp = p == pieces ? target : t_start + (target - t_start) * p / pieces;
      x = flow(sys, t, tp, x);
      t = tp;
      if (p < pieces) tr.samples.push_back({t, x, Side::LeftLimit});
    }
  };
  for (const double tau : taus) {
    if (tau > end) break;
    advance(tau);
    tr.samples.push_back({t, x, Side::LeftLimit});
    x = B * x;
    tr.samples.push_back({t, x, Side::RightLimit});
    tr.epochs.push_back(tr.samples.size() - 1);
  }
  if (t < end) {
    advance(end);
    tr.samples.push_back({t, x, Side::LeftLimit});
  }
  return tr;
}

Block2x2 exact_P_ode(const CoupledSystem& sys, const Block2x2& P0, double t) {
  if (!(t >= 0.0) || t > sys.theta() * (1.0 + 1e-14)) {
    throw DomainError("exact_P_ode: t must lie in [0, theta]");
  }
  Matrix P = P0.assemble();
  if (t > 0.0) {
    const int n = step_count(sys, t);
    const double dt = t / n;
    auto f = [&](double s, const Matrix& Y) {
      const Matrix A = block_A_at(sys, s);
      return Matrix(-(A.transpose() * Y + Y * A));
    };
    for (int i = 0; i < n; ++i) P = rk4(f, i * dt, P, dt);
  }
  return Block2x2::split(symmetrize(P), sys.n1());
}

DecayFit empirical_decay(const Trajectory& traj) {
  const std::size_t K = traj.epochs.size();
  if (K < 10) throw ContractError("empirical_decay: need at least 10 impulse epochs");
  double sk = 0, sy = 0, skk = 0, sky = 0;
  for (std::size_t k = 0; k < K; ++k) {
    const double nrm = traj.samples[traj.epochs[k]].x.norm();
    if (!(nrm > 0.0) || !std::isfinite(nrm)) {
      throw NumericError("empirical_decay: zero or non-finite state, fit undefined");
    }
    const double y = std::log(nrm);
    sk += k;
    sy += y;
    skk += static_cast<double>(k) * k;
    sky += k * y;
  }
  const double n = static_cast<double>(K);
  const double slope = (n * sky - sk * sy) / (n * skk - sk * sk);
  const double icpt = (sy - slope * sk) / n;
  return {std::exp(icpt), std::exp(slope)};
}

void write_csv(const Trajectory& traj, std::ostream& os) {
  const Index n = traj.samples.empty() ? 0 : traj.samples.front().x.size();
  os << "t,side";
  for (Index i = 1; i <= n; ++i) os << ",x_" << i;
  os << "\n";
  char buf[32];
  for (const Sample& s : traj.samples) {
    std::snprintf(buf, sizeof buf, "%.12e", s.t);
    os << buf << "," << to_string(s.side);
    for (Index i = 0; i < s.x.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.12e", s.x(i));
      os << "," << buf;
    }
    os << "\n";
  }
}

}  // namespace impulsecert
