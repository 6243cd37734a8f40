#include "impulsecert/system.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <queue>
#include <sstream>

#include "impulsecert/errors.hpp"

namespace impulsecert {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_harmonics(const std::vector<Harmonic>& terms, const Matrix& c0,
                     const char* kind) {
  for (const auto& h : terms) {
    if (h.k < 1) {
      throw ValidationError(std::string("TrigMatrixPolynomial: ") + kind +
                            " harmonic index must be >= 1");
    }
    if (h.coeff.rows() != c0.rows() || h.coeff.cols() != c0.cols()) {
      throw DimensionError(std::string("TrigMatrixPolynomial: ") + kind +
                           " coefficient shape differs from the constant term");
    }
    require_finite(h.coeff, "TrigMatrixPolynomial");
  }
}

// Fractional phase t/θ reduced to [0, 1) so that t and t + θ evaluate alike.
double phase(double t, double period) {
  const double u = t / period;
  return u - std::floor(u);
}

}  // namespace

TrigMatrixPolynomial::TrigMatrixPolynomial(double period, Matrix constant,
                                           std::vector<Harmonic> cos_terms,
                                           std::vector<Harmonic> sin_terms)
    : period_(period),
      constant_(std::move(constant)),
      cos_(std::move(cos_terms)),
      sin_(std::move(sin_terms)) {
  if (!(period_ > 0.0) || !std::isfinite(period_)) {
    throw ValidationError("TrigMatrixPolynomial: period must be positive");
  }
  if (constant_.size() == 0) {
    throw DimensionError("TrigMatrixPolynomial: empty constant term");
  }
  require_finite(constant_, "TrigMatrixPolynomial");
  check_harmonics(cos_, constant_, "cos");
  check_harmonics(sin_, constant_, "sin");
}

Matrix TrigMatrixPolynomial::operator()(double t) const {
  const double u = phase(t, period_);
  Matrix out = constant_;
  for (const auto& h : cos_) out += std::cos(kTwoPi * h.k * u) * h.coeff;
  for (const auto& h : sin_) out += std::sin(kTwoPi * h.k * u) * h.coeff;
  return out;
}

Matrix TrigMatrixPolynomial::integral(double a, double b) const {
  Matrix out = (b - a) * constant_;
  // sin ωb - sin ωa = 2 cos(ω·mid) sin(ω·half), cos ωb - cos ωa =
  // -2 sin(ω·mid) sin(ω·half); avoids cancellation on short intervals.
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  for (const auto& h : cos_) {
    const double w = kTwoPi * h.k / period_;
    out += (2.0 * std::cos(w * mid) * std::sin(w * half) / w) * h.coeff;
  }
  for (const auto& h : sin_) {
    const double w = kTwoPi * h.k / period_;
    out += (2.0 * std::sin(w * mid) * std::sin(w * half) / w) * h.coeff;
  }
  return out;
}

TrigMatrixPolynomial TrigMatrixPolynomial::derivative() const {
  std::vector<Harmonic> c, s;
  for (const auto& h : sin_) c.push_back({h.k, (kTwoPi * h.k / period_) * h.coeff});
  for (const auto& h : cos_) s.push_back({h.k, (-kTwoPi * h.k / period_) * h.coeff});
  return TrigMatrixPolynomial(period_, Matrix::Zero(rows(), cols()),
                              std::move(c), std::move(s));
}

TrigMatrixPolynomial TrigMatrixPolynomial::transpose_times_self() const {
  // Dense harmonic form: X_k cos(kωt) + Y_k sin(kωt), k ≥ 0, X_0 = C0.
  std::map<int, Matrix> X, Y;
  const Index c = cols();
  X[0] = constant_;
  for (const auto& h : cos_) {
    auto [it, fresh] = X.try_emplace(h.k, Matrix::Zero(rows(), c));
    it->second += h.coeff;
  }
  for (const auto& h : sin_) {
    auto [it, fresh] = Y.try_emplace(h.k, Matrix::Zero(rows(), c));
    it->second += h.coeff;
  }
  std::map<int, Matrix> GC, GS;
  auto add = [&](std::map<int, Matrix>& m, int k, const Matrix& v) {
    auto [it, fresh] = m.try_emplace(k, Matrix::Zero(c, c));
    it->second += v;
  };
  // cos(j-k) terms with negative index fold by parity.
  auto add_cos = [&](int k, const Matrix& v) { add(GC, std::abs(k), v); };
  auto add_sin = [&](int k, const Matrix& v) {
    if (k > 0) add(GS, k, v);
    else if (k < 0) add(GS, -k, -v);
  };
  for (const auto& [j, Xj] : X) {
    for (const auto& [k, Xk] : X) {
      const Matrix p = 0.5 * Xj.transpose() * Xk;  // cos j cos k
      add_cos(j - k, p);
      add_cos(j + k, p);
    }
    for (const auto& [k, Yk] : Y) {
      const Matrix p = 0.5 * Xj.transpose() * Yk;  // cos j sin k
      add_sin(j + k, p);
      add_sin(k - j, p);
    }
  }
  for (const auto& [j, Yj] : Y) {
    for (const auto& [k, Xk] : X) {
      const Matrix p = 0.5 * Yj.transpose() * Xk;  // sin j cos k
      add_sin(j + k, p);
      add_sin(j - k, p);
    }
    for (const auto& [k, Yk] : Y) {
      const Matrix p = 0.5 * Yj.transpose() * Yk;  // sin j sin k
      add_cos(j - k, p);
      add_cos(j + k, -p);
    }
  }
  Matrix c0 = Matrix::Zero(c, c);
  std::vector<Harmonic> cs, ss;
  for (auto& [k, m] : GC) {
    if (k == 0) c0 = m;
    else cs.push_back({k, m});
  }
  for (auto& [k, m] : GS) ss.push_back({k, m});
  return TrigMatrixPolynomial(period_, c0, std::move(cs), std::move(ss));
}

double TrigMatrixPolynomial::derivative_norm_bound(int order) const {
  double L = 0.0;
  for (const auto& h : cos_)
    L += std::pow(kTwoPi * h.k / period_, order) * spectral_norm(h.coeff);
  for (const auto& h : sin_)
    L += std::pow(kTwoPi * h.k / period_, order) * spectral_norm(h.coeff);
  return L;
}

bool TrigMatrixPolynomial::operator==(const TrigMatrixPolynomial& o) const {
  auto same = [](const std::vector<Harmonic>& a, const std::vector<Harmonic>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (a[i].k != b[i].k || a[i].coeff != b[i].coeff) return false;
    return true;
  };
  return period_ == o.period_ && constant_ == o.constant_ &&
         same(cos_, o.cos_) && same(sin_, o.sin_);
}

Matrix coupling_eval(const TrigMatrixPolynomial& p, double t) { return p(t); }

Matrix coupling_integral(const TrigMatrixPolynomial& p, double a, double b) {
  if (a > b) throw ContractError("coupling_integral: requires a <= b");
  return p.integral(a, b);
}

double sup_norm_bound(const TrigMatrixPolynomial& F, double a, double b) {
  if (!(a <= b)) throw ContractError("sup_norm_bound: requires a <= b");
  // Work with G = FᵀF: λ_max is convex, so on a cell [c, d]
  //   λ_max(G(s)) ≤ max(λ_max(G(c)), λ_max(G(d))) + ‖G''‖∞ (d-c)²/8.
  const TrigMatrixPolynomial G = F.transpose_times_self();
  const double L2 = G.derivative_norm_bound(2);
  auto value = [&](double s) {
    const double nrm = spectral_norm(F(s));
    return nrm * nrm;
  };

  struct Cell {
    double lo, hi, flo, fhi, ub;
    bool operator<(const Cell& o) const { return ub < o.ub; }
  };
  auto make = [&](double lo, double hi, double flo, double fhi) {
    const double w = hi - lo;
    return Cell{lo, hi, flo, fhi, std::max(flo, fhi) + L2 * w * w / 8.0};
  };

  constexpr int kInitial = 256;
  constexpr int kMaxSplits = 200000;
  std::priority_queue<Cell> heap;
  double lb = 0.0;
  std::vector<double> f(kInitial + 1);
  for (int i = 0; i <= kInitial; ++i) {
    f[i] = value(a + (b - a) * i / kInitial);
    lb = std::max(lb, f[i]);
  }
  for (int i = 0; i < kInitial; ++i) {
    heap.push(make(a + (b - a) * i / kInitial, a + (b - a) * (i + 1) / kInitial,
                   f[i], f[i + 1]));
  }
  for (int it = 0; it < kMaxSplits; ++it) {
    const Cell top = heap.top();
    const double tol = 1e-26 + 2e-12 * lb;  // squared-norm scale
    if (top.ub <= lb + tol) break;
    heap.pop();
    const double mid = 0.5 * (top.lo + top.hi);
    const double fm = value(mid);
    lb = std::max(lb, fm);
    heap.push(make(top.lo, mid, top.flo, fm));
    heap.push(make(mid, top.hi, fm, top.fhi));
  }
  const double ub2 = heap.top().ub;
  // Small relative pad absorbs rounding in the norm evaluations.
  return std::sqrt(std::max(ub2, 0.0)) * (1.0 + 4e-16);
}

CoupledSystem::CoupledSystem(Matrix A11, Matrix A22, TrigMatrixPolynomial A12,
                             TrigMatrixPolynomial A21, Block2x2 B, double theta,
                             DwellBounds dwell,
                             std::optional<CouplingBounds> coupling_bounds)
    : A11_(std::move(A11)),
      A22_(std::move(A22)),
      A12_(std::move(A12)),
      A21_(std::move(A21)),
      B_(std::move(B)),
      theta_(theta),
      dwell_(dwell),
      coupling_bounds_(coupling_bounds) {
  require_square(A11_, "CoupledSystem(A11)");
  require_square(A22_, "CoupledSystem(A22)");
  require_finite(A11_, "CoupledSystem(A11)");
  require_finite(A22_, "CoupledSystem(A22)");
  const Index n1 = A11_.rows(), n2 = A22_.rows();
  if (A12_.rows() != n1 || A12_.cols() != n2) {
    throw DimensionError("CoupledSystem: A12 must be n1 x n2");
  }
  if (A21_.rows() != n2 || A21_.cols() != n1) {
    throw DimensionError("CoupledSystem: A21 must be n2 x n1");
  }
  if (B_.n1() != n1 || B_.n2() != n2) {
    throw DimensionError("CoupledSystem: B blocks do not match n1, n2");
  }
  require_finite(B_.assemble(), "CoupledSystem(B)");
  if (!(theta_ > 0.0) || !std::isfinite(theta_)) {
    throw ValidationError("CoupledSystem: theta must be positive");
  }
  if (!(dwell_.theta1 > 0.0) || !(dwell_.theta1 <= dwell_.theta2) ||
      !std::isfinite(dwell_.theta2)) {
    throw ValidationError("CoupledSystem: dwell bounds need 0 < theta1 <= theta2");
  }
  auto period_ok = [&](const TrigMatrixPolynomial& p) {
    return std::abs(p.period() - theta_) <= 1e-12 * theta_;
  };
  if (!period_ok(A12_) || !period_ok(A21_)) {
    std::ostringstream os;
    os << "CoupledSystem: coupling period (" << A12_.period() << ", "
       << A21_.period() << ") differs from theta = " << theta_;
    throw ValidationError(os.str());
  }
  if (coupling_bounds_) {
    const double g12 = sup_norm_bound(A12_, 0.0, theta_);
    const double g21 = sup_norm_bound(A21_, 0.0, theta_);
    const auto& cb = *coupling_bounds_;
    if (!(cb.gamma12 >= 0.0) || !(cb.gamma21 >= 0.0)) {
      throw ValidationError("CoupledSystem: coupling bounds must be >= 0");
    }
    if (cb.gamma12 < g12 * (1.0 - 1e-12) || cb.gamma21 < g21 * (1.0 - 1e-12)) {
      std::ostringstream os;
      os << "CoupledSystem: coupling bounds (" << cb.gamma12 << ", "
         << cb.gamma21 << ") are below the couplings' sup norms (" << g12
         << ", " << g21 << ")";
      throw ValidationError(os.str());
    }
  }
}

CoupledSystem CoupledSystem::periodic(Matrix A11, Matrix A22,
                                      TrigMatrixPolynomial A12,
                                      TrigMatrixPolynomial A21, Block2x2 B,
                                      double theta) {
  return CoupledSystem(std::move(A11), std::move(A22), std::move(A12),
                       std::move(A21), std::move(B), theta, {theta, theta});
}

bool CoupledSystem::is_periodic() const {
  return dwell_.theta1 == theta_ && dwell_.theta2 == theta_;
}

CoupledSystem CoupledSystem::with_theta(double theta) const {
  auto rescale = [&](const TrigMatrixPolynomial& p) {
    return TrigMatrixPolynomial(theta, p.constant_term(), p.cos_terms(),
                                p.sin_terms());
  };
  const double f = theta / theta_;
  return CoupledSystem(A11_, A22_, rescale(A12_), rescale(A21_), B_, theta,
                       {dwell_.theta1 * f, dwell_.theta2 * f}, coupling_bounds_);
}

bool CoupledSystem::operator==(const CoupledSystem& o) const {
  auto same_cb = [](const std::optional<CouplingBounds>& a,
                    const std::optional<CouplingBounds>& b) {
    if (a.has_value() != b.has_value()) return false;
    return !a || (a->gamma12 == b->gamma12 && a->gamma21 == b->gamma21);
  };
  return A11_ == o.A11_ && A22_ == o.A22_ && A12_ == o.A12_ && A21_ == o.A21_ &&
         B_.assemble() == o.B_.assemble() && theta_ == o.theta_ &&
         dwell_.theta1 == o.dwell_.theta1 && dwell_.theta2 == o.dwell_.theta2 &&
         same_cb(coupling_bounds_, o.coupling_bounds_);
}

Matrix block_A_at(const CoupledSystem& sys, double t) {
  return Block2x2(sys.A11(), sys.A12()(t), sys.A21()(t), sys.A22()).assemble();
}

IntervalBoundTable interval_bounds(const CoupledSystem& sys, int N,
                                   GammaPolicy policy) {
  if (N < 1) throw ParameterError("interval_bounds: N must be >= 1");
  IntervalBoundTable tb;
  tb.N = N;
  tb.h = sys.theta() / N;
  const auto d12 = sys.A12().derivative();
  const auto d21 = sys.A21().derivative();
  for (int m = 0; m < N; ++m) {
    const double a = m * tb.h, b = (m + 1) * tb.h;
    tb.gamma12.push_back(sup_norm_bound(sys.A12(), a, b));
    tb.gamma21.push_back(sup_norm_bound(sys.A21(), a, b));
    tb.lip12.push_back(sup_norm_bound(d12, a, b));
    tb.lip21.push_back(sup_norm_bound(d21, a, b));
  }
  if (const auto& cb = sys.coupling_bounds()) {
    std::fill(tb.gamma12.begin(), tb.gamma12.end(), cb->gamma12);
    std::fill(tb.gamma21.begin(), tb.gamma21.end(), cb->gamma21);
  }
  if (policy == GammaPolicy::Uniform) {
    for (auto* v : {&tb.gamma12, &tb.gamma21, &tb.lip12, &tb.lip21}) {
      const double mx = *std::max_element(v->begin(), v->end());
      std::fill(v->begin(), v->end(), mx);
    }
  }
  return tb;
}

}  // namespace impulsecert
