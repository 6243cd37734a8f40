#include "impulsecert/cli.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <random>

#include "impulsecert/errors.hpp"
#include "impulsecert/io.hpp"

namespace impulsecert {

namespace {

constexpr const char* kNames[] = {"certify-periodic", "certify-aperiodic", "smallgain",
                                  "simulate", "sweep"};

struct Outcome {
  std::string report;
  int code;
};

int verdict_code(Verdict v) {
  return v == Verdict::StableCertified ? kExitStable : kExitInconclusive;
}

Block2x2 resolve_P0(const SystemDocument& doc) {
  return doc.P0 ? *doc.P0 : default_P0(doc.system);
}

CertifyOptions options_of(const RunConfig& c) {
  CertifyOptions o;
  o.gamma_policy = c.gamma_policy;
  o.eps = c.eps;
  return o;
}

Outcome certify_periodic_cmd(const RunConfig& c, const SystemDocument& doc) {
  if (c.N < 1) throw InputError("--N must be >= 1");
  const CertificateReport r =
      certify_periodic(doc.system, resolve_P0(doc), c.N, options_of(c));
  return {report_json(r), verdict_code(r.verdict)};
}

Outcome certify_aperiodic_cmd(const RunConfig& c, const SystemDocument& doc) {
  if (c.N < 2) throw InputError("--N must be >= 2 for certify-aperiodic");
  const AperiodicReport r =
      certify_aperiodic(doc.system, resolve_P0(doc), c.N, options_of(c));
  return {report_json(r), verdict_code(r.verdict)};
}

Outcome smallgain_cmd(const RunConfig& c, const SystemDocument& doc) {
  const CoupledSystem& sys = doc.system;
  if (!sys.is_periodic()) {
    throw PreconditionError("smallgain requires a periodic system (dwell = [theta, theta])");
  }
  SmallGainSummary s;
  try {
    s.data = make_small_gain_data(sys, Matrix::Identity(sys.n1(), sys.n1()),
                                  Matrix::Identity(sys.n2(), sys.n2()));
  } catch (const NoUniqueSolutionError&) {
    s.notes.push_back("a diagonal block is not Hurwitz; small-gain and averaging "
                      "certificates do not apply");
  }
  Block2x2 P0 = doc.P0 ? *doc.P0
              : s.data ? Block2x2::symmetric(s.data->P11,
                                             Matrix::Zero(sys.n1(), sys.n2()),
                                             s.data->P22)
                       : default_P0(sys);
  s.lmi_feasible = lmi_feasible(sys, P0);
  s.prop61 = prop61_certify(sys, P0, options_of(c));
  bool stable = s.prop61.verdict == Verdict::StableCertified;
  if (s.data) {
    s.small_gain = small_gain_check(*s.data);
    stable = stable || *s.small_gain;
    try {
      s.prop62 = prop62_certify(*s.data, sys, sys.theta());
      stable = stable || s.prop62->verdict == Verdict::StableCertified;
      s.theta_star = theta_star(*s.data, sys);
    } catch (const PreconditionError& e) {
      s.notes.push_back(e.what());
    }
  }
  return {report_json(s), stable ? kExitStable : kExitInconclusive};
}

Outcome simulate_cmd(const RunConfig& c, const SystemDocument& doc) {
  const CoupledSystem& sys = doc.system;
  const double horizon = c.horizon ? *c.horizon : 100.0 * sys.dwell().theta2;
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw InputError("--horizon must be positive and finite");
  }
  const auto count =
      static_cast<std::size_t>(std::ceil(horizon / sys.dwell().theta1)) + 1;
  const DwellSequence dwell = random_dwell(sys, count, c.seed);

  // Seeded initial state on the unit sphere.
  std::mt19937_64 rng(c.seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> gauss;
  Vector x0(sys.n());
  for (Index i = 0; i < x0.size(); ++i) x0(i) = gauss(rng);
  x0 /= x0.norm();

  const Trajectory traj = integrate_trajectory(sys, dwell, x0, horizon, 8);
  if (c.csv) {
    std::ofstream csv(*c.csv);
    if (!csv) throw InputError("cannot open CSV path: " + c.csv->string());
    write_csv(traj, csv);
    if (!csv) throw Error("failed writing CSV: " + c.csv->string());
  }
  SimulationSummary s;
  s.seed = c.seed;
  s.horizon = horizon;
  s.epochs = traj.epochs.size();
  bool ok = false;
  if (traj.epochs.size() >= 10) {
    try {
      s.decay = empirical_decay(traj);
      ok = s.decay->rho < 1.0;
    } catch (const NumericError& e) {
      s.notes.push_back(e.what());
    }
  } else {
    s.notes.push_back("fewer than 10 impulse epochs; no decay fit");
  }
  if (sys.is_periodic()) {
    s.monodromy_radius = monodromy_spectral_radius(sys);
    ok = ok && *s.monodromy_radius < 1.0;
  }
  return {report_json(s), ok ? kExitStable : kExitInconclusive};
}

Outcome sweep_cmd(const RunConfig& c, const SystemDocument& doc) {
  const CoupledSystem& sys = doc.system;
  const bool periodic = sys.is_periodic();
  const int start = c.N;
  if (start < (periodic ? 1 : 2)) throw InputError("--N too small for sweep");
  if (c.sweep_max_N < start) throw InputError("--sweep-max-N must be >= --N");
  const Block2x2 P0 = resolve_P0(doc);
  SweepSummary s;
  s.mode = periodic ? "periodic" : "aperiodic";
  int streak = 0;
  for (long N = start; N <= c.sweep_max_N; N *= 2) {
    const int n = static_cast<int>(N);
    SweepEntry e{n, Verdict::Inconclusive, 0.0};
    if (periodic) {
      const CertificateReport r = certify_periodic(sys, P0, n, options_of(c));
      e.verdict = r.verdict;
      e.Q = r.Q;
    } else {
      const AperiodicReport r = certify_aperiodic(sys, P0, n, options_of(c));
      e.verdict = r.verdict;
      e.Q = r.worst ? r.worst->Q : std::nan("");
    }
    s.entries.push_back(e);
    streak = e.verdict == Verdict::StableCertified ? streak + 1 : 0;
    if (streak >= 2) {
      s.stabilized = true;
      break;
    }
  }
  return {report_json(s), s.stabilized ? kExitStable : kExitInconclusive};
}

void deliver(const RunConfig& c, const std::string& text, std::ostream& out) {
  if (c.out) emit_report(text, *c.out);
  else out << text;
}

}  // namespace

Command parse_command(const std::string& name) {
  for (int i = 0; i < 5; ++i) {
    if (name == kNames[i]) return static_cast<Command>(i);
  }
  throw InputError("unknown command: " + name);
}

const char* to_string(Command c) { return kNames[static_cast<int>(c)]; }

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  Outcome result;
  try {
    if (config.system_path.empty()) throw InputError("--system is required");
    if (!std::filesystem::exists(config.system_path)) {
      throw InputError("system file not found: " + config.system_path.string());
    }
    const SystemDocument doc = load_system_file(config.system_path);
    switch (config.command) {
      case Command::CertifyPeriodic: result = certify_periodic_cmd(config, doc); break;
      case Command::CertifyAperiodic: result = certify_aperiodic_cmd(config, doc); break;
      case Command::SmallGain: result = smallgain_cmd(config, doc); break;
      case Command::Simulate: result = simulate_cmd(config, doc); break;
      case Command::Sweep: result = sweep_cmd(config, doc); break;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    result = {error_report_json(to_string(config.command), e.what()), kExitInputError};
  }
  try {
    deliver(config, result.report, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  return result.code;
}

}  // namespace impulsecert
