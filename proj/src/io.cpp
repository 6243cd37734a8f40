#include "impulsecert/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "impulsecert/errors.hpp"

namespace impulsecert {

using json = nlohmann::json;

namespace {

// ---- parsing --------------------------------------------------------------

void only_keys(const json& j, const std::string& path,
               const std::set<std::string>& allowed) {
  for (const auto& [k, v] : j.items()) {
    if (!allowed.count(k)) throw SchemaError(path + "." + k, "unknown key");
  }
}

const json& require(const json& j, const std::string& path, const char* key) {
  if (!j.contains(key)) throw SchemaError(path + "." + key, "missing required key");
  return j.at(key);
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) throw SchemaError(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw SchemaError(path, "non-finite number");
  return v;
}

Matrix matrix(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) {
    throw SchemaError(path, "expected a non-empty array of rows");
  }
  const std::size_t rows = j.size();
  std::size_t cols = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    const std::string rp = path + "[" + std::to_string(r) + "]";
    if (!j[r].is_array() || j[r].empty()) throw SchemaError(rp, "expected a non-empty row");
    if (r == 0) cols = j[r].size();
    if (j[r].size() != cols) throw SchemaError(rp, "ragged matrix row");
  }
  Matrix M(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      M(r, c) = number(j[r][c], path + "[" + std::to_string(r) + "][" +
                                    std::to_string(c) + "]");
  return M;
}

std::vector<Harmonic> harmonics(const json& j, const std::string& path) {
  if (!j.is_array()) throw SchemaError(path, "expected an array of harmonics");
  std::vector<Harmonic> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    if (!j[i].is_object()) throw SchemaError(p, "expected an object");
    only_keys(j[i], p, {"k", "coeff"});
    const json& k = require(j[i], p, "k");
    if (!k.is_number_integer() || k.get<long>() < 1) {
      throw SchemaError(p + ".k", "expected a positive integer");
    }
    out.push_back({k.get<int>(), matrix(require(j[i], p, "coeff"), p + ".coeff")});
  }
  return out;
}

TrigMatrixPolynomial trig(const json& j, const std::string& path, double theta) {
  if (!j.is_object()) throw SchemaError(path, "expected an object");
  only_keys(j, path, {"constant", "cos", "sin", "period"});
  double period = theta;
  if (j.contains("period")) period = number(j.at("period"), path + ".period");
  Matrix c0 = matrix(require(j, path, "constant"), path + ".constant");
  std::vector<Harmonic> cs, ss;
  if (j.contains("cos")) cs = harmonics(j.at("cos"), path + ".cos");
  if (j.contains("sin")) ss = harmonics(j.at("sin"), path + ".sin");
  for (const auto* list : {&cs, &ss}) {
    for (const auto& h : *list) {
      if (h.coeff.rows() != c0.rows() || h.coeff.cols() != c0.cols()) {
        throw DimensionError(path + ": harmonic coefficient shape differs from constant");
      }
    }
  }
  return TrigMatrixPolynomial(period, std::move(c0), std::move(cs), std::move(ss));
}

// ---- emitting -------------------------------------------------------------

void canonical(const json& j, std::string& out) {
  char buf[40];
  switch (j.type()) {
    case json::value_t::object: {
      out += '{';
      bool first = true;
      for (const auto& [k, v] : j.items()) {  // std::map keeps keys sorted
        if (!first) out += ',';
        first = false;
        out += json(k).dump();
        out += ':';
        canonical(v, out);
      }
      out += '}';
      break;
    }
    case json::value_t::array: {
      out += '[';
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ',';
        canonical(j[i], out);
      }
      out += ']';
      break;
    }
    case json::value_t::number_float: {
      const double v = j.get<double>();
      if (!std::isfinite(v)) {
        out += "null";
      } else {
        std::snprintf(buf, sizeof buf, "%.12e", v);
        out += buf;
      }
      break;
    }
    default:
      out += j.dump();
  }
}

std::string dump_canonical(const json& j) {
  std::string out;
  canonical(j, out);
  out += '\n';
  return out;
}

json matrix_json(const Matrix& M) {
  json rows = json::array();
  for (Index r = 0; r < M.rows(); ++r) {
    json row = json::array();
    for (Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
    rows.push_back(row);
  }
  return rows;
}

json trig_json(const TrigMatrixPolynomial& p) {
  json j;
  j["constant"] = matrix_json(p.constant_term());
  auto list = [](const std::vector<Harmonic>& hs) {
    json a = json::array();
    for (const auto& h : hs) a.push_back({{"k", h.k}, {"coeff", matrix_json(h.coeff)}});
    return a;
  };
  if (!p.cos_terms().empty()) j["cos"] = list(p.cos_terms());
  if (!p.sin_terms().empty()) j["sin"] = list(p.sin_terms());
  return j;
}

json envelope_json(const DecayEnvelope& e) { return {{"M", e.M}, {"mu", e.mu}}; }

json envelopes_json(const EnvelopeSet& e) {
  return {{"M1_mu1", envelope_json(e.fwd1)},
          {"M2_mu2", envelope_json(e.fwd2)},
          {"N1_delta1", envelope_json(e.bwd1)},
          {"N2_delta2", envelope_json(e.bwd2)}};
}

json notes_json(const std::vector<std::string>& notes) {
  json a = json::array();
  for (const auto& n : notes) a.push_back(n);
  return a;
}

json certificate_json(const CertificateReport& r) {
  json steps = json::array();
  for (const StepRecord& s : r.steps) {
    const ThetaInputs& in = s.inputs;
    steps.push_back({{"m", s.m},
                     {"lambdaMinPi", s.lambda_min_pi},
                     {"lambdaMaxXi", s.lambda_max_xi},
                     {"theta", s.theta},
                     {"gamma12", in.gamma12},
                     {"gamma21", in.gamma21},
                     {"eta11", in.eta11},
                     {"eta22", in.eta22},
                     {"eta12", in.eta12},
                     {"eta21", in.eta21},
                     {"alpha11", in.alpha11},
                     {"alpha12", in.alpha12},
                     {"alpha21", in.alpha21},
                     {"alpha22", in.alpha22}});
  }
  json j = {{"verdict", to_string(r.verdict)},
            {"Q", r.Q},
            {"thetaSum", r.theta_sum},
            {"jumpTerm", r.jump_term},
            {"minLambdaPi", r.min_lambda_pi},
            {"N", r.N},
            {"h", r.h},
            {"failingIndex", r.failing_index ? json(*r.failing_index) : json(nullptr)},
            {"steps", steps},
            {"envelopes", envelopes_json(r.envelopes)},
            {"PN", r.table.P.empty() ? json(nullptr) : matrix_json(r.table.P.back().assemble())},
            {"notes", notes_json(r.notes)}};
  return j;
}

json qentry_json(const QEntry& e) {
  return {{"l", e.l},           {"M", e.M},
          {"Q", e.Q},           {"rateStart", e.rate_start},
          {"rateEnd", e.rate_end}, {"thetaSum", e.theta_sum},
          {"jump", e.jump}};
}

json prop62_json(const Prop62Report& p) {
  return {{"verdict", to_string(p.verdict)},
          {"theta", p.theta},
          {"rho", p.rho},
          {"thetaLimit", p.theta_limit},
          {"theta0", p.theta0},
          {"lhs", p.lhs},
          {"rhs", p.rhs},
          {"lambdaMaxPhi", p.lambda_max_phi},
          {"notes", notes_json(p.notes)}};
}

}  // namespace

SystemDocument parse_system_document(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError("$", std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw SchemaError("$", "expected an object");
  only_keys(j, "$", {"theta", "dwell", "A11", "A22", "A12", "A21", "B", "P0",
                     "couplingBounds", "description"});
  const double theta = number(require(j, "$", "theta"), "$.theta");
  DwellBounds dwell{theta, theta};
  if (j.contains("dwell")) {
    const json& d = j.at("dwell");
    if (!d.is_array() || d.size() != 2) throw SchemaError("$.dwell", "expected [theta1, theta2]");
    dwell = {number(d[0], "$.dwell[0]"), number(d[1], "$.dwell[1]")};
  }
  Matrix A11 = matrix(require(j, "$", "A11"), "$.A11");
  Matrix A22 = matrix(require(j, "$", "A22"), "$.A22");
  TrigMatrixPolynomial A12 = trig(require(j, "$", "A12"), "$.A12", theta);
  TrigMatrixPolynomial A21 = trig(require(j, "$", "A21"), "$.A21", theta);
  const json& Bj = require(j, "$", "B");
  if (!Bj.is_object()) throw SchemaError("$.B", "expected an object");
  only_keys(Bj, "$.B", {"B11", "B12", "B21", "B22"});
  Block2x2 B(matrix(require(Bj, "$.B", "B11"), "$.B.B11"),
             matrix(require(Bj, "$.B", "B12"), "$.B.B12"),
             matrix(require(Bj, "$.B", "B21"), "$.B.B21"),
             matrix(require(Bj, "$.B", "B22"), "$.B.B22"));
  std::optional<CouplingBounds> cb;
  if (j.contains("couplingBounds")) {
    const json& c = j.at("couplingBounds");
    if (!c.is_object()) throw SchemaError("$.couplingBounds", "expected an object");
    only_keys(c, "$.couplingBounds", {"gamma12", "gamma21"});
    cb = CouplingBounds{
        number(require(c, "$.couplingBounds", "gamma12"), "$.couplingBounds.gamma12"),
        number(require(c, "$.couplingBounds", "gamma21"), "$.couplingBounds.gamma21")};
  }
  SystemDocument doc{CoupledSystem(std::move(A11), std::move(A22), std::move(A12),
                                   std::move(A21), std::move(B), theta, dwell, cb),
                     std::nullopt};
  if (j.contains("P0")) {
    const json& p = j.at("P0");
    if (p.is_string()) {
      if (p.get<std::string>() != "auto") throw SchemaError("$.P0", "expected \"auto\" or an object");
    } else if (p.is_object()) {
      only_keys(p, "$.P0", {"P11", "P12", "P22"});
      Matrix P11 = matrix(require(p, "$.P0", "P11"), "$.P0.P11");
      Matrix P22 = matrix(require(p, "$.P0", "P22"), "$.P0.P22");
      Matrix P12 = p.contains("P12") ? matrix(p.at("P12"), "$.P0.P12")
                                     : Matrix(Matrix::Zero(P11.rows(), P22.cols()));
      Block2x2 P0 = Block2x2::symmetric(std::move(P11), std::move(P12), std::move(P22));
      if (P0.n1() != doc.system.n1() || P0.n2() != doc.system.n2()) {
        throw DimensionError("$.P0: block sizes do not match the system");
      }
      doc.P0 = std::move(P0);
    } else {
      throw SchemaError("$.P0", "expected \"auto\" or an object");
    }
  }
  return doc;
}

CoupledSystem parse_system(const std::string& text) {
  return parse_system_document(text).system;
}

SystemDocument load_system_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open system file: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_system_document(ss.str());
}

std::string serialize_system(const CoupledSystem& sys,
                             const std::optional<Block2x2>& P0) {
  json j;
  j["theta"] = sys.theta();
  j["dwell"] = {sys.dwell().theta1, sys.dwell().theta2};
  j["A11"] = matrix_json(sys.A11());
  j["A22"] = matrix_json(sys.A22());
  j["A12"] = trig_json(sys.A12());
  j["A21"] = trig_json(sys.A21());
  if (sys.A12().period() != sys.theta()) j["A12"]["period"] = sys.A12().period();
  if (sys.A21().period() != sys.theta()) j["A21"]["period"] = sys.A21().period();
  j["B"] = {{"B11", matrix_json(sys.B().b11)},
            {"B12", matrix_json(sys.B().b12)},
            {"B21", matrix_json(sys.B().b21)},
            {"B22", matrix_json(sys.B().b22)}};
  if (const auto& cb = sys.coupling_bounds()) {
    j["couplingBounds"] = {{"gamma12", cb->gamma12}, {"gamma21", cb->gamma21}};
  }
  if (P0) {
    j["P0"] = {{"P11", matrix_json(P0->b11)},
               {"P12", matrix_json(P0->b12)},
               {"P22", matrix_json(P0->b22)}};
  }
  return j.dump(2) + "\n";
}

std::string report_json(const CertificateReport& r, const std::string& kind) {
  json j = certificate_json(r);
  j["kind"] = kind;
  return dump_canonical(j);
}

std::string report_json(const AperiodicReport& r) {
  json q = json::array();
  for (const QEntry& e : r.q_table) q.push_back(qentry_json(e));
  json lam = json::array();
  for (const auto& col : r.lambda_min_pi) lam.push_back(col);
  json j = {{"kind", "certify-aperiodic"},
            {"verdict", to_string(r.verdict)},
            {"N", r.N},
            {"h", r.h},
            {"N3", r.indices.N3},
            {"N4", r.indices.N4},
            {"Mlo", r.M_lo},
            {"worst", r.worst ? qentry_json(*r.worst) : json(nullptr)},
            {"qTable", q},
            {"lambdaMinPi", lam},
            {"minLambdaPi", r.min_lambda_pi},
            {"minLambdaPiQWindow", r.min_lambda_pi_q_window},
            {"failing", r.failing ? json({r.failing->first, r.failing->second})
                                  : json(nullptr)},
            {"envelopes", envelopes_json(r.envelopes)},
            {"notes", notes_json(r.notes)}};
  return dump_canonical(j);
}

std::string report_json(const SmallGainSummary& s) {
  json j = {{"kind", "smallgain"},
            {"lmiFeasible", s.lmi_feasible},
            {"prop61", certificate_json(s.prop61)},
            {"notes", notes_json(s.notes)}};
  j["smallGain"] = s.small_gain ? json(*s.small_gain) : json(nullptr);
  if (s.data) {
    j["smallGainProduct"] = s.data->gamma12 * s.data->gamma21;
    j["smallGainBound"] = small_gain_bound(*s.data);
    j["gamma12"] = s.data->gamma12;
    j["gamma21"] = s.data->gamma21;
  }
  j["prop62"] = s.prop62 ? prop62_json(*s.prop62) : json(nullptr);
  if (s.theta_star) {
    j["thetaStar"] = {{"value", s.theta_star->theta_star},
                      {"monotone", s.theta_star->monotone},
                      {"notes", notes_json(s.theta_star->notes)}};
  } else {
    j["thetaStar"] = nullptr;
  }
  return dump_canonical(j);
}

std::string report_json(const SimulationSummary& s) {
  json j = {{"kind", "simulate"},
            {"seed", s.seed},
            {"horizon", s.horizon},
            {"epochs", s.epochs},
            {"notes", notes_json(s.notes)}};
  j["decay"] = s.decay ? json({{"C", s.decay->C}, {"rho", s.decay->rho}}) : json(nullptr);
  j["monodromyRadius"] = s.monodromy_radius ? json(*s.monodromy_radius) : json(nullptr);
  return dump_canonical(j);
}

std::string report_json(const SweepSummary& s) {
  json e = json::array();
  for (const SweepEntry& x : s.entries) {
    e.push_back({{"N", x.N}, {"verdict", to_string(x.verdict)}, {"Q", x.Q}});
  }
  return dump_canonical({{"kind", "sweep"},
                         {"mode", s.mode},
                         {"entries", e},
                         {"stabilized", s.stabilized}});
}

std::string error_report_json(const std::string& command, const std::string& message) {
  return dump_canonical({{"kind", command}, {"error", message}});
}

void emit_report(const std::string& text, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open report path for writing: " + path.string());
  out << text;
  out.flush();
  if (!out) throw Error("failed writing report: " + path.string());
}

}  // namespace impulsecert
