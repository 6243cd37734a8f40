#include "impulsecert/aperiodic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "impulsecert/errors.hpp"
#include "impulsecert/parallel.hpp"

namespace impulsecert {

namespace {

constexpr double kSnap = 1e-9;

long snapped_floor(double x) {
  const double r = std::round(x);
  if (std::abs(x - r) <= kSnap * std::max(1.0, std::abs(x))) return static_cast<long>(r);
  return static_cast<long>(std::floor(x));
}

long snapped_ceil(double x) {
  const double r = std::round(x);
  if (std::abs(x - r) <= kSnap * std::max(1.0, std::abs(x))) return static_cast<long>(r);
  return static_cast<long>(std::ceil(x));
}

int wrap(long k, int N) { return IntervalBoundTable::wrap(k, N); }

// Per-interval exact coupling integrals over (kh, (k+1)h], k = 0…N-1.
struct StepIntegrals {
  std::vector<Matrix> I12, I21;
};

StepIntegrals step_integrals(const CoupledSystem& sys, int N, double h) {
  StepIntegrals s;
  for (int k = 0; k < N; ++k) {
    s.I12.push_back(sys.A12().integral(k * h, (k + 1) * h));
    s.I21.push_back(sys.A21().integral(k * h, (k + 1) * h));
  }
  return s;
}

struct Column {
  std::vector<double> lambda_min;  // m = 0…N4
  std::vector<double> theta;       // m = 0…N4-1
};

struct Context {
  const CoupledSystem& sys;
  const LyapunovGrid& grid;
  IntervalBoundTable bounds;
  EnvelopeSet env;
  double nA11, nA22;
  Matrix S;  // BᵀP0B

  Context(const CoupledSystem& s, const LyapunovGrid& g,
          const CertifyOptions& options)
      : sys(s),
        grid(g),
        bounds(interval_bounds(s, g.N, options.gamma_policy)),
        env(options.envelopes ? *options.envelopes
                              : make_envelopes(s, g.h, options.eps)),
        nA11(spectral_norm(s.A11())),
        nA22(spectral_norm(s.A22())) {
    const Matrix B = s.B().assemble();
    S = symmetrize(B.transpose() * g.P[0][0].assemble() * B);
  }

  Matrix frozen(long k) const {
    return block_A_at(sys, wrap(k, grid.N) * grid.h);
  }
  double lip(long k) const { return std::hypot(bounds.l12(k), bounds.l21(k)); }

  Column column(int l) const {
    Column c;
    const int N4 = grid.max_steps;
    for (int m = 0; m <= N4; ++m) {
      const Block2x2& P = grid.at(m, l);
      const double g12 = bounds.g12(m + l), g21 = bounds.g21(m + l);
      const SandwichPair sw = sandwich(P, g12, g21, grid.h);
      c.lambda_min.push_back(sym_eig_range(sw.Pi.assemble()).min);
      if (m < N4) {
        c.theta.push_back(
            theta_m(theta_inputs(P, g12, g21, nA11, nA22, env), grid.h));
      }
    }
    return c;
  }

  QEntry q(const Column& c, int l, int M) const {
    QEntry e;
    e.l = l;
    e.M = M;
    const double h = grid.h;
    bool ok = true;
    for (int m = 0; m < M; ++m) {
      if (!(c.lambda_min[m] > 0.0)) {
        ok = false;
        break;
      }
      e.theta_sum += c.theta[m] / c.lambda_min[m];
    }
    try {
      e.rate_start = rate_term(grid.at(0, l), frozen(l - 1), lip(l - 1), h);
      e.rate_end = rate_term(grid.at(M, l), frozen(l + M), lip(l + M), h);
      e.jump = std::log(gen_sym_eig_max(S, grid.at(M, l).assemble()));
    } catch (const DefinitenessError&) {
      ok = false;
      e.jump = std::numeric_limits<double>::quiet_NaN();
    }
    e.Q = ok ? h * e.rate_start + h * e.rate_end + e.theta_sum + e.jump
             : std::numeric_limits<double>::quiet_NaN();
    return e;
  }
};

}  // namespace

DwellIndexBounds index_bounds(double theta1, double theta2, int N,
                              double theta) {
  if (N < 2) throw ParameterError("index_bounds: N must be >= 2");
  if (!(theta1 > 0.0) || !(theta1 <= theta2) || !(theta > 0.0)) {
    throw ParameterError("index_bounds: need 0 < theta1 <= theta2, theta > 0");
  }
  const double h = theta / N;
  const int N3 = static_cast<int>(-snapped_floor((2.0 * h - theta1) / h));
  const int N4 = static_cast<int>(snapped_floor(theta2 / h));
  return {N3, N4};
}

LyapunovGrid build_grid(const CoupledSystem& sys, const Block2x2& P0, int N) {
  const DwellIndexBounds idx =
      index_bounds(sys.dwell().theta1, sys.dwell().theta2, N, sys.theta());
  LyapunovGrid g;
  g.N = N;
  g.max_steps = idx.N4;
  g.h = sys.theta() / N;
  const Matrix E1 = mat_exp(sys.A11(), -g.h), E2 = mat_exp(sys.A22(), -g.h);
  const StepIntegrals I = step_integrals(sys, N, g.h);
  const Block2x2 start =
      Block2x2::symmetric(symmetrize(P0.b11), P0.b12, symmetrize(P0.b22));
  g.P.assign(N, {});
  parallel_for(static_cast<std::size_t>(N), [&](std::size_t li) {
    const int l = static_cast<int>(li);
    auto& col = g.P[l];
    col.reserve(idx.N4 + 1);
    col.push_back(start);
    for (int m = 0; m < idx.N4; ++m) {
      const int k = wrap(m + l, N);
      col.push_back(recursion_step(col.back(), E1, E2, I.I12[k], I.I21[k]));
    }
  });
  return g;
}

double rate_term(const Block2x2& P, const Matrix& Afrozen, double lip_norm,
                 double h) {
  const Matrix Pf = P.assemble();
  if (Afrozen.rows() != Pf.rows() || Afrozen.cols() != Pf.cols()) {
    throw DimensionError("rate_term: A and P sizes differ");
  }
  const Index n = Pf.rows();
  const Matrix S = Afrozen.transpose() * Pf + Pf * Afrozen +
                   (2.0 * h * lip_norm * spectral_norm(Pf)) * Matrix::Identity(n, n);
  return std::max(gen_sym_eig_max(symmetrize(S), Pf), 0.0);
}

QEntry q_value(const LyapunovGrid& grid, const CoupledSystem& sys, int l,
               int M, const CertifyOptions& options) {
  if (l < 0 || l >= grid.N) throw ParameterError("q_value: l out of range");
  if (M < 0 || M >= grid.max_steps + 1) {
    throw ParameterError("q_value: M out of range");
  }
  const Context ctx(sys, grid, options);
  return ctx.q(ctx.column(l), l, M);
}

AperiodicReport certify_aperiodic(const CoupledSystem& sys, const Block2x2& P0,
                                  int N, const CertifyOptions& options) {
  if (P0.n1() != sys.n1() || P0.n2() != sys.n2()) {
    throw DimensionError("certify_aperiodic: P0 blocks do not match the system");
  }
  require_spd(P0, "certify_aperiodic(P0)");
  AperiodicReport r;
  r.N = N;
  r.h = sys.theta() / N;
  r.indices = index_bounds(sys.dwell().theta1, sys.dwell().theta2, N, sys.theta());
  const LyapunovGrid grid = build_grid(sys, P0, N);
  const Context ctx(sys, grid, options);
  r.envelopes = ctx.env;

  const int N4 = r.indices.N4;
  r.M_lo = std::max(r.indices.N3, 0);
  if (r.indices.N3 < 0) {
    r.notes.push_back("N3 < 0; the M window starts at 0");
  }
  std::vector<Column> cols(N);
  std::vector<std::vector<QEntry>> per_l(N);
  parallel_for(static_cast<std::size_t>(N), [&](std::size_t li) {
    const int l = static_cast<int>(li);
    cols[l] = ctx.column(l);
    for (int M = r.M_lo; M <= N4 - 1; ++M) per_l[l].push_back(ctx.q(cols[l], l, M));
  });

  r.min_lambda_pi = std::numeric_limits<double>::infinity();
  r.min_lambda_pi_q_window = std::numeric_limits<double>::infinity();
  for (int l = 0; l < N; ++l) {
    r.lambda_min_pi.push_back(cols[l].lambda_min);
    for (int m = 0; m <= N4; ++m) {
      const double v = cols[l].lambda_min[m];
      r.min_lambda_pi = std::min(r.min_lambda_pi, v);
      if (m <= N4 - 1) r.min_lambda_pi_q_window = std::min(r.min_lambda_pi_q_window, v);
      if (!(v > 0.0) && !r.failing) r.failing = std::make_pair(l, m);
    }
  }
  bool all_valid = true;
  for (int l = 0; l < N; ++l) {
    for (const QEntry& e : per_l[l]) {
      r.q_table.push_back(e);
      if (std::isnan(e.Q)) {
        all_valid = false;
        continue;
      }
      if (!r.worst || e.Q > r.worst->Q) r.worst = e;
    }
  }
  if (r.q_table.empty()) {
    r.notes.push_back("empty (l, M) window: N3 > N4 - 1");
    all_valid = false;
  }
  r.notes.push_back(
      "Pi positivity enforced for m = 0..N4; min_lambda_pi_q_window covers "
      "m = 0..N4-1");
  if (r.failing) {
    std::ostringstream os;
    os << "Pi not positive definite at (l, m) = (" << r.failing->first << ", "
       << r.failing->second << ")";
    r.notes.push_back(os.str());
  }
  const bool q_ok = all_valid && r.worst && r.worst->Q <= -1e-12;
  r.verdict = (!r.failing && q_ok) ? Verdict::StableCertified : Verdict::Inconclusive;
  return r;
}

ImpulseIndices impulse_indices(double tau_k, double tau_next, double theta,
                               int N) {
  if (!(tau_next > tau_k)) throw ContractError("impulse_indices: need tau_k < tau_next");
  const double h = theta / N;
  ImpulseIndices ix;
  ix.tau_tilde = tau_k - static_cast<double>(snapped_floor(tau_k / theta)) * theta;
  ix.l_k = static_cast<int>(snapped_floor(ix.tau_tilde / h)) + 1;
  ix.d_k = static_cast<int>(snapped_floor(tau_k / h)) + 1;
  ix.kappa_k = static_cast<int>(snapped_floor(tau_next / h));
  return ix;
}

Block2x2 eval_P_aperiodic(double t, double tau_k, double tau_next,
                          const LyapunovGrid& grid, const CoupledSystem& sys) {
  if (!(t > tau_k) || t > tau_next) {
    throw DomainError("eval_P_aperiodic: t must lie in (tau_k, tau_next]");
  }
  const ImpulseIndices ix = impulse_indices(tau_k, tau_next, sys.theta(), grid.N);
  const double h = grid.h;
  const int l = wrap(ix.l_k, grid.N);
  const int last = ix.kappa_k - ix.d_k;
  if (last > grid.max_steps) {
    throw ContractError("eval_P_aperiodic: dwell exceeds the grid's N4");
  }
  if (t <= ix.d_k * h || last < 0) return grid.at(0, l);
  if (t > ix.kappa_k * h) return grid.at(last, l);
  const long node = snapped_ceil(t / h);  // t ∈ ((node-1)h, node h]
  const int m = static_cast<int>(node - 1 - ix.d_k);
  const double start = (m + ix.d_k) * h, tau = t - start;
  return recursion_step(grid.at(m, l), mat_exp(sys.A11(), -tau),
                        mat_exp(sys.A22(), -tau), sys.A12().integral(start, t),
                        sys.A21().integral(start, t));
}

}  // namespace impulsecert
