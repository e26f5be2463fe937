#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "jointrdf/canonical.hpp"
#include "jointrdf/error.hpp"
#include "jointrdf/model.hpp"
#include "jointrdf/realization.hpp"
#include "jointrdf/sim.hpp"
#include "jointrdf/solver.hpp"

namespace py = pybind11;
using namespace jointrdf;

namespace {

ErrorCovariance as_error(const GaussianPairSource& src, const Matrix& sigma) {
  return {sigma, src.p1(), src.p2()};
}

}  // namespace

PYBIND11_MODULE(_jointrdf, m) {
  m.doc() = "Joint rate-distortion function of a pair of Gaussian vector sources";

  py::register_exception<Error>(m, "Error", PyExc_ValueError);

  py::enum_<ErrorKind>(m, "ErrorKind")
      .value("InvalidInput", ErrorKind::InvalidInput)
      .value("Singular", ErrorKind::Singular)
      .value("Infeasible", ErrorKind::Infeasible)
      .value("Numerical", ErrorKind::Numerical);

  py::class_<GaussianPairSource>(m, "GaussianPairSource")
      .def(py::init<const Matrix&, int, int>(), py::arg("q"), py::arg("p1"), py::arg("p2"))
      .def_property_readonly("q", &GaussianPairSource::q)
      .def_property_readonly("p1", &GaussianPairSource::p1)
      .def_property_readonly("p2", &GaussianPairSource::p2)
      .def_property_readonly("q11", &GaussianPairSource::q11)
      .def_property_readonly("q22", &GaussianPairSource::q22)
      .def_property_readonly("q12", &GaussianPairSource::q12)
      .def_property_readonly("positive_definite", &GaussianPairSource::positive_definite);

  py::class_<DistortionPair>(m, "DistortionPair")
      .def(py::init<double, double>(), py::arg("d1"), py::arg("d2"))
      .def(py::init([](const py::tuple& t) {
        if (t.size() != 2) throw Error(ErrorKind::InvalidInput, "distortion tuple must have two entries");
        return DistortionPair(t[0].cast<double>(), t[1].cast<double>());
      }))
      .def_readonly("d1", &DistortionPair::d1)
      .def_readonly("d2", &DistortionPair::d2);
  py::implicitly_convertible<py::tuple, DistortionPair>();

  py::enum_<Branch>(m, "Branch")
      .value("ClosedFormInteriorD", Branch::ClosedFormInteriorD)
      .value("InteriorPoint", Branch::InteriorPoint)
      .value("ZeroRate", Branch::ZeroRate)
      .value("Infeasible", Branch::Infeasible);

  py::class_<SolverConfig>(m, "SolverConfig")
      .def(py::init<>())
      .def_readwrite("gap_tol", &SolverConfig::gap_tol)
      .def_readwrite("newton_tol", &SolverConfig::newton_tol)
      .def_readwrite("region_tol", &SolverConfig::region_tol)
      .def_readwrite("boundary_snap_tol", &SolverConfig::boundary_snap_tol)
      .def_readwrite("force_interior_point", &SolverConfig::force_interior_point);

  py::class_<KktCertificate>(m, "KktCertificate")
      .def_readonly("lambda1", &KktCertificate::lambda1)
      .def_readonly("lambda2", &KktCertificate::lambda2)
      .def_readonly("theta", &KktCertificate::theta)
      .def_readonly("stationarity_residual", &KktCertificate::stationarity_residual)
      .def_readonly("slackness_residuals", &KktCertificate::slackness_residuals)
      .def_readonly("dual_feasible", &KktCertificate::dual_feasible);

  py::class_<SolveReport>(m, "SolveReport")
      .def_readonly("rate_nats", &SolveReport::rate_nats)
      .def_property_readonly("sigma", [](const SolveReport& r) { return r.sigma.sigma(); })
      .def_readonly("certificate", &SolveReport::certificate)
      .def_readonly("branch", &SolveReport::branch)
      .def_readonly("in_region_d", &SolveReport::in_region_d)
      .def_readonly("gray_bound_nats", &SolveReport::gray_bound_nats)
      .def_readonly("iterations", &SolveReport::iterations)
      .def_property_readonly("wall_time", [](const SolveReport& r) { return r.wall_time.count(); });

  m.def("solve", &solve, py::arg("source"), py::arg("distortion"), py::arg("config") = SolverConfig{},
        "Joint RDF in nats and the optimal error covariance.");
  m.def("in_region_d", &in_region_d, py::arg("source"), py::arg("distortion"), py::arg("tol") = 1e-9);
  m.def("closed_form_candidate", [](const GaussianPairSource& s, const DistortionPair& d) {
    return closed_form_candidate(s, d).sigma();
  });
  m.def("rate_of", [](const GaussianPairSource& s, const Matrix& sigma) { return rate_of(s, as_error(s, sigma)); },
        py::arg("source"), py::arg("sigma"));
  m.def("gray_lower_bound", &gray_lower_bound, py::arg("source"), py::arg("distortion"));
  m.def("mutual_information", &mutual_information, py::arg("source"));
  m.def("marginal_rdf", &marginal_rdf, py::arg("cov"), py::arg("delta"));

  py::class_<CanonicalForm>(m, "CanonicalForm")
      .def_readonly("s1", &CanonicalForm::s1)
      .def_readonly("s2", &CanonicalForm::s2)
      .def_readonly("d4", &CanonicalForm::d4_vals)
      .def_readonly("singular_values", &CanonicalForm::singular_values)
      .def_property_readonly("partition", [](const CanonicalForm& c) { return c.partition.as_array(); })
      .def_readonly("q_cvf", &CanonicalForm::q_cvf);
  m.def("to_canonical_form", [](const GaussianPairSource& s) { return to_canonical_form(s); }, py::arg("source"));
  m.def("determinant_identity_residual", &determinant_identity_residual);
  m.def("cvf_objective", &cvf_objective, py::arg("source_form"), py::arg("error_form"));
  m.def("error_canonical_form", [](const GaussianPairSource& s, const Matrix& sigma) {
    return to_canonical_form(sigma, s.p1(), s.p2());
  });

  py::class_<TestChannelRealization>(m, "TestChannelRealization")
      .def_readonly("h", &TestChannelRealization::h)
      .def_readonly("qv", &TestChannelRealization::qv);
  py::class_<Condition1Report>(m, "Condition1Report")
      .def_readonly("deviation", &Condition1Report::deviation)
      .def_readonly("passed", &Condition1Report::pass)
      .def_readonly("rank", &Condition1Report::rank)
      .def_readonly("full_rank", &Condition1Report::full_rank);
  m.def("realize", [](const GaussianPairSource& s, const Matrix& sigma) { return realize(s, as_error(s, sigma)); },
        py::arg("source"), py::arg("sigma"));
  m.def("verify_condition1", &verify_condition1, py::arg("realization"), py::arg("tol") = 1e-8);
  m.def("conditional_mean_map", &conditional_mean_map);

  py::class_<DistortionCheck>(m, "DistortionCheck")
      .def_readonly("d_hat1", &DistortionCheck::d_hat1)
      .def_readonly("d_hat2", &DistortionCheck::d_hat2)
      .def_readonly("passed", &DistortionCheck::pass);
  m.def(
      "simulate_distortion",
      [](const TestChannelRealization& r, const DistortionPair& d, long n, std::uint64_t seed) {
        py::gil_scoped_release release;
        const auto batch = push_channel(sample_source(r.source, n, seed), r, seed + 1);
        return check_distortion(batch, d);
      },
      py::arg("realization"), py::arg("distortion"), py::arg("n"), py::arg("seed") = 1);
}
