#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lorhol/cli.hpp"
#include "lorhol/holonomy.hpp"
#include "lorhol/structures.hpp"
#include "lorhol/transport.hpp"

namespace py = pybind11;
using namespace lorhol;

namespace {

std::string run_command(const std::string& command, const std::string& config, std::uint64_t seed) {
  const cli::Config cfg = cli::Config::from_string(config);
  cli::CommandResult r;
  if (command == "check") r = cli::cmd_check(cfg, seed);
  else if (command == "holonomy") r = cli::cmd_holonomy(cfg, seed);
  else if (command == "geodesic") r = cli::cmd_geodesic(cfg, seed);
  else if (command == "structure") r = cli::cmd_structure(cfg, seed);
  else if (command == "complete") r = cli::cmd_complete(cfg, seed);
  else throw ValidationError("unknown command '" + command + "'");
  r.report["exit_code"] = r.exit_code;
  return r.report.dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ArithmeticError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  py::class_<ScalarField>(m, "ScalarField")
      .def(py::init([](const std::string& src, int n) { return parse_expression(src, n); }), py::arg("src"),
           py::arg("n"))
      .def("__call__", [](const ScalarField& f, const Point& p) { return f.eval(p); })
      .def("gradient", [](const ScalarField& f, const Point& p) { return f.jet(p, 1).gradient; })
      .def("hessian", [](const ScalarField& f, const Point& p) { return f.jet(p, 2).hessian; })
      .def("depends_on", &ScalarField::depends_on)
      .def("__str__", &ScalarField::to_string)
      .def_property_readonly("screen_dim", &ScalarField::screen_dim);

  py::class_<MetricChart>(m, "MetricChart")
      .def_property_readonly("dim", &MetricChart::dim)
      .def_property_readonly("screen_dim", &MetricChart::screen_dim)
      .def_property_readonly("is_walker", &MetricChart::is_walker)
      .def("metric", &MetricChart::metric_at)
      .def("inverse", &MetricChart::inverse_at)
      .def("signature", &MetricChart::signature_at)
      .def("christoffel", &MetricChart::christoffel)
      .def("xi_curvature", &MetricChart::xi_curvature)
      .def("riemann",
           [](const MetricChart& M, const Point& p, const Vector& u, const Vector& v) {
             return M.riemann(p).endomorphism(u, v);
           })
      .def("domain", [](const MetricChart& M) { return std::make_pair(M.domain().lo, M.domain().hi); });

  m.def(
      "walker",
      [](int n, const std::string& f, const std::vector<std::string>& u, const std::vector<std::vector<std::string>>& gbase) {
        std::vector<ScalarField> uf;
        for (const auto& s : u) uf.push_back(parse_expression(s, n));
        if (uf.empty()) uf.assign(n, ScalarField(n));
        std::vector<std::vector<ScalarField>> g(n, std::vector<ScalarField>(n, ScalarField(n)));
        for (int a = 0; a < n; ++a) g[a][a] = ScalarField::constant(n, 1.0);
        for (std::size_t a = 0; a < gbase.size(); ++a)
          for (std::size_t b = 0; b < gbase[a].size(); ++b) g[a][b] = parse_expression(gbase[a][b], n);
        return assemble_walker(n, parse_expression(f, n), uf, g);
      },
      py::arg("n"), py::arg("f"), py::arg("u") = std::vector<std::string>{},
      py::arg("gbase") = std::vector<std::vector<std::string>>{});

  m.def(
      "demo",
      [](const std::string& name) {
        const Construction c = demo(name);
        return std::make_pair(c.chart, c.base_point);
      },
      py::arg("name"));
  m.def("demo_names", &demo_names);

  m.def(
      "holonomy",
      [](const MetricChart& M, const Point& p, std::uint64_t seed) {
        SamplingStrategy st;
        st.seed = seed;
        const HolonomyReport h = holonomy_report(M, p, st);
        py::dict d;
        d["dim"] = h.dim;
        d["label"] = to_string(h.label, h.ell);
        d["g_dim"] = h.screen_algebra_dim;
        d["in_stabilizer"] = h.in_stabilizer;
        d["basis"] = h.basis;
        d["singular_values"] = h.singular_values;
        return d;
      },
      py::arg("chart"), py::arg("base"), py::arg("seed") = 0);

  m.def(
      "geodesic",
      [](const MetricChart& M, const Point& x0, const Vector& v0, double t_end, double tol, double output_dt) {
        GeodesicOptions o;
        o.t_end = t_end;
        o.tol = tol;
        o.output_dt = output_dt;
        const Trajectory tr = geodesic(M, {x0, v0}, o);
        py::dict d;
        d["t"] = tr.t;
        d["position"] = tr.position;
        d["velocity"] = tr.velocity;
        d["energy_drift"] = tr.diagnostics.max_energy_drift;
        d["termination"] = to_string(tr.diagnostics.termination);
        return d;
      },
      py::arg("chart"), py::arg("x0"), py::arg("v0"), py::arg("t_end"), py::arg("tol") = 1e-10,
      py::arg("output_dt") = 0.0);

  m.def("dual_lefschetz", &dual_lefschetz, py::arg("psi"), py::arg("J"), py::arg("G"));
  m.def("one_one_residual", &one_one_residual, py::arg("psi"), py::arg("J"));
  m.def("check_hyperkahler", &check_hyperkahler, py::arg("psi"), py::arg("J1"), py::arg("J2"));
  m.def(
      "g2_condition", [](const Matrix& psi) { return g2_condition(psi, standard_g2_form(), Matrix::Identity(7, 7)); },
      py::arg("psi"));
  m.def(
      "spin7_condition",
      [](const Matrix& psi) { return spin7_condition(psi, standard_spin7_form(), Matrix::Identity(8, 8)); },
      py::arg("psi"));
  m.def("screen_twist", &screen_twist, py::arg("chart"), py::arg("point"));

  m.def("run_command", &run_command, py::arg("command"), py::arg("config"), py::arg("seed") = 0);
  m.def("demo_config", &cli::demo_config, py::arg("name"));
  m.attr("__version__") = LORHOL_VERSION;
}
