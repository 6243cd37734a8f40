#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>

#include "impulsecert/errors.hpp"
#include "impulsecert/io.hpp"

namespace py = pybind11;
using namespace impulsecert;

namespace {

struct PySystem {
  CoupledSystem sys;
  std::optional<Block2x2> P0;
};

GammaPolicy policy_of(const std::string& name) {
  if (name == "uniform") return GammaPolicy::Uniform;
  if (name == "per-interval") return GammaPolicy::PerInterval;
  throw ParameterError("gamma_policy must be 'uniform' or 'per-interval', got '" + name + "'");
}

CertifyOptions options(const std::string& policy, std::optional<double> eps) {
  CertifyOptions o;
  o.gamma_policy = policy_of(policy);
  o.eps = eps;
  return o;
}

// Explicit P0 wins, then the one from the system file, then the default.
Block2x2 resolve_P0(const PySystem& s, const std::optional<Matrix>& P0) {
  if (P0) {
    if (P0->rows() != s.sys.n() || P0->cols() != s.sys.n())
      throw DimensionError("P0 must be " + std::to_string(s.sys.n()) + "x" +
                           std::to_string(s.sys.n()));
    return Block2x2::split(*P0, s.sys.n1());
  }
  return s.P0 ? *s.P0 : default_P0(s.sys);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Lyapunov-based stability certificates for impulsive coupled systems";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InputError>(m, "InputError", base.ptr());
  py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<DimensionError>(m, "DimensionError", base.ptr());
  py::register_exception<PreconditionError>(m, "PreconditionError", base.ptr());
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<NumericError>(m, "NumericError", base.ptr());

  py::class_<PySystem>(m, "System")
      .def_static("from_json",
                  [](const std::string& text) {
                    SystemDocument d = parse_system_document(text);
                    return PySystem{std::move(d.system), std::move(d.P0)};
                  })
      .def_static("load",
                  [](const std::string& path) {
                    SystemDocument d = load_system_file(path);
                    return PySystem{std::move(d.system), std::move(d.P0)};
                  })
      .def("to_json", [](const PySystem& s) { return serialize_system(s.sys, s.P0); })
      .def_property_readonly("theta", [](const PySystem& s) { return s.sys.theta(); })
      .def_property_readonly("n1", [](const PySystem& s) { return s.sys.n1(); })
      .def_property_readonly("n2", [](const PySystem& s) { return s.sys.n2(); })
      .def_property_readonly("dwell",
                             [](const PySystem& s) {
                               return py::make_tuple(s.sys.dwell().theta1, s.sys.dwell().theta2);
                             })
      .def_property_readonly("is_periodic", [](const PySystem& s) { return s.sys.is_periodic(); })
      .def_property_readonly("B", [](const PySystem& s) { return s.sys.B().assemble(); })
      .def_property_readonly("P0",
                             [](const PySystem& s) -> std::optional<Matrix> {
                               if (!s.P0) return std::nullopt;
                               return s.P0->assemble();
                             })
      .def("A", [](const PySystem& s, double t) { return block_A_at(s.sys, t); }, py::arg("t"))
      .def("default_P0", [](const PySystem& s) { return default_P0(s.sys).assemble(); })
      .def("with_theta",
           [](const PySystem& s, double theta) { return PySystem{s.sys.with_theta(theta), s.P0}; },
           py::arg("theta"))
      .def("__eq__", [](const PySystem& a, const PySystem& b) { return a.sys == b.sys; });

  m.def(
      "certify_periodic_json",
      [](const PySystem& s, int N, std::optional<Matrix> P0, const std::string& policy,
         std::optional<double> eps) {
        return report_json(certify_periodic(s.sys, resolve_P0(s, P0), N, options(policy, eps)));
      },
      py::arg("system"), py::arg("N"), py::arg("P0") = py::none(),
      py::arg("gamma_policy") = "uniform", py::arg("eps") = py::none());

  m.def(
      "certify_aperiodic_json",
      [](const PySystem& s, int N, std::optional<Matrix> P0, const std::string& policy,
         std::optional<double> eps) {
        return report_json(certify_aperiodic(s.sys, resolve_P0(s, P0), N, options(policy, eps)));
      },
      py::arg("system"), py::arg("N"), py::arg("P0") = py::none(),
      py::arg("gamma_policy") = "uniform", py::arg("eps") = py::none());

  m.def(
      "averaged_certify_json",
      [](const PySystem& s, std::optional<Matrix> P0) {
        return report_json(prop61_certify(s.sys, resolve_P0(s, P0)), "averaged");
      },
      py::arg("system"), py::arg("P0") = py::none());

  py::class_<SmallGainData>(m, "SmallGainData")
      .def_readonly("P11", &SmallGainData::P11)
      .def_readonly("P22", &SmallGainData::P22)
      .def_readonly("gamma12", &SmallGainData::gamma12)
      .def_readonly("gamma21", &SmallGainData::gamma21)
      .def("passes", [](const SmallGainData& d) { return small_gain_check(d); })
      .def("bound", [](const SmallGainData& d) { return small_gain_bound(d); });

  m.def(
      "small_gain_data",
      [](const PySystem& s, std::optional<Matrix> Q1, std::optional<Matrix> Q2) {
        return make_small_gain_data(s.sys, Q1 ? *Q1 : Matrix::Identity(s.sys.n1(), s.sys.n1()),
                                    Q2 ? *Q2 : Matrix::Identity(s.sys.n2(), s.sys.n2()));
      },
      py::arg("system"), py::arg("Q1") = py::none(), py::arg("Q2") = py::none());

  m.def(
      "prop62",
      [](const SmallGainData& d, const PySystem& s, std::optional<double> theta) {
        const Prop62Report r = prop62_certify(d, s.sys, theta ? *theta : s.sys.theta());
        py::dict out;
        out["stable"] = r.verdict == Verdict::StableCertified;
        out["theta"] = r.theta;
        out["lhs"] = r.lhs;
        out["rhs"] = r.rhs;
        out["lambda_max_phi"] = r.lambda_max_phi;
        out["theta_limit"] = r.theta_limit;
        return out;
      },
      py::arg("data"), py::arg("system"), py::arg("theta") = py::none());

  m.def(
      "theta_star",
      [](const SmallGainData& d, const PySystem& s, double cap) {
        return theta_star(d, s.sys, cap).theta_star;
      },
      py::arg("data"), py::arg("system"), py::arg("cap") = 10.0);

  m.def("monodromy_radius", [](const PySystem& s) { return monodromy_spectral_radius(s.sys); });

  m.def(
      "transition_matrix",
      [](const PySystem& s, double t0, double t1) { return transition_matrix(s.sys, t0, t1); },
      py::arg("system"), py::arg("t0"), py::arg("t1"));

  m.def(
      "random_dwell",
      [](const PySystem& s, std::size_t count, std::uint64_t seed) {
        return random_dwell(s.sys, count, seed).dwell_times;
      },
      py::arg("system"), py::arg("count"), py::arg("seed"));

  // Returns (t, x, left_limit, epochs); x has one row per sample.
  m.def(
      "simulate",
      [](const PySystem& s, const std::vector<double>& dwell_times, const Vector& x0,
         double horizon, int interior_samples) {
        DwellSequence d;
        d.dwell_times = dwell_times;
        const Trajectory tr = integrate_trajectory(s.sys, d, x0, horizon, interior_samples);
        const auto n = static_cast<Index>(tr.samples.size());
        Vector t(n);
        Matrix X(n, s.sys.n());
        std::vector<bool> left(tr.samples.size());
        for (Index i = 0; i < n; ++i) {
          t(i) = tr.samples[i].t;
          X.row(i) = tr.samples[i].x.transpose();
          left[i] = tr.samples[i].side == Side::LeftLimit;
        }
        return py::make_tuple(t, X, left, tr.epochs);
      },
      py::arg("system"), py::arg("dwell_times"), py::arg("x0"), py::arg("horizon"),
      py::arg("interior_samples") = 0);

  m.def(
      "decay_fit",
      [](const PySystem& s, const std::vector<double>& dwell_times, const Vector& x0,
         double horizon) {
        DwellSequence d;
        d.dwell_times = dwell_times;
        const DecayFit f = empirical_decay(integrate_trajectory(s.sys, d, x0, horizon));
        return py::make_tuple(f.C, f.rho);
      },
      py::arg("system"), py::arg("dwell_times"), py::arg("x0"), py::arg("horizon"));
}
