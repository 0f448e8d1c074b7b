// Python bindings for the moment library. Heavy work releases the GIL.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "spde/cli.hpp"
#include "spde/diagrams.hpp"
#include "spde/errors.hpp"
#include "spde/model.hpp"
#include "spde/moments.hpp"
#include "spde/simulate.hpp"
#include "spde/specialfn.hpp"

namespace py = pybind11;
using namespace spde;

namespace {

py::dict curve_dict(const MomentCurve& c) {
  py::dict d;
  d["t"] = c.t_grid;
  d["value"] = c.values;
  d["stderr"] = c.stderr_values;
  d["method"] = to_string(c.method);
  return d;
}

Partition partition_of(const std::vector<int>& n) { return Partition{n}; }

}  // namespace

PYBIND11_MODULE(spdemoments, m) {
  m.doc() = "Second and p-th moments of fractional stochastic heat and wave equations";

  // Base first: pybind11 tries translators newest first, so subclasses win.
  static py::exception<Error> base(m, "SpdeError");
  py::register_exception<DomainError>(m, "DomainError", base);
  py::register_exception<PoleError>(m, "PoleError", base);
  py::register_exception<DalangViolated>(m, "DalangViolated", base);
  py::register_exception<TooLarge>(m, "TooLarge", base);
  py::register_exception<NotBalanced>(m, "NotBalanced", base);
  py::register_exception<GeometryViolation>(m, "GeometryViolation", base);
  py::register_exception<ConvergenceFailure>(m, "ConvergenceFailure", base);
  py::register_exception<StepTooCoarse>(m, "StepTooCoarse", base);
  py::register_exception<StabilityViolated>(m, "StabilityViolated", base);
  py::register_exception<InsufficientDomain>(m, "InsufficientDomain", base);

  py::class_<ModelParams>(m, "ModelParams")
      .def(py::init([](double alpha, double beta, double gamma_, double lambda, double nu, int dim, double u0,
                       double u1) {
             return ModelParams{alpha, beta, gamma_, lambda, nu, dim, u0, u1};
           }),
           py::kw_only(), py::arg("alpha") = 2.0, py::arg("beta") = 1.0, py::arg("gamma") = 0.0,
           py::arg("lam") = 1.0, py::arg("nu") = 1.0, py::arg("dim") = 1, py::arg("u0") = 1.0, py::arg("u1") = 0.0)
      .def_readwrite("alpha", &ModelParams::alpha)
      .def_readwrite("beta", &ModelParams::beta)
      .def_readwrite("gamma", &ModelParams::gamma)
      .def_readwrite("lam", &ModelParams::lambda)
      .def_readwrite("nu", &ModelParams::nu)
      .def_readwrite("dim", &ModelParams::dim)
      .def_readwrite("u0", &ModelParams::u0)
      .def_readwrite("u1", &ModelParams::u1)
      .def("to_kv", &to_kv)
      .def_static("from_kv", [](const std::string& s) { return from_kv(s); })
      .def("__eq__", [](const ModelParams& a, const ModelParams& b) { return a == b; })
      .def("__repr__", [](const ModelParams& p) {
        std::string out = "ModelParams(";
        bool first = true;
        for (const auto& [k, v] : to_map(p)) {
          out += (first ? "" : ", ") + (k == "lambda" ? std::string("lam") : k) + "=" + format_number(v);
          first = false;
        }
        return out + ")";
      });

  // specialfn
  m.def("gamma", &spde::gamma, py::arg("x"));
  m.def("rgamma", &rgamma, py::arg("x"));
  m.def("log_gamma", &log_gamma, py::arg("x"));
  m.def("mittag_leffler", &mittag_leffler, py::arg("a"), py::arg("b"), py::arg("z"));
  m.def("ml_log", &ml_log, py::arg("a"), py::arg("b"), py::arg("z"));
  m.def("frac_int_power", &frac_int_power, py::arg("order"), py::arg("beta"), py::arg("x"));
  m.def("sin_power_integral", &sin_power_integral, py::arg("alpha"), py::arg("b") = 1.0);

  // model
  m.def("validate", &validate, py::arg("p"));
  m.def("dalang_satisfied", &dalang_satisfied, py::arg("p"));
  m.def("dalang_bound", &dalang_bound, py::arg("p"));
  m.def("theta", &theta, py::arg("p"));
  m.def("big_theta", &big_theta, py::arg("p"), py::call_guard<py::gil_scoped_release>());
  m.def("big_theta_unchecked", &big_theta_unchecked, py::arg("p"), py::call_guard<py::gil_scoped_release>());
  m.def("kernel_ft", &kernel_ft, py::arg("p"), py::arg("t"), py::arg("r"));
  m.def("t_hat", &t_hat, py::arg("p"), py::arg("t"));
  m.def("t_p", &t_p, py::arg("p"), py::arg("t"), py::arg("pp"));
  m.def("derived_constants", [](const ModelParams& p) {
    const DerivedConstants c = derived_constants(p);
    py::dict d;
    d["theta"] = c.theta;
    d["big_theta"] = c.big_theta;
    d["lyapunov_base"] = c.lyapunov_base;
    return d;
  });

  // moments
  m.def("second_moment", &second_moment, py::arg("p"), py::arg("t"));
  m.def("log_second_moment", &log_second_moment, py::arg("p"), py::arg("t"));
  m.def("second_lyapunov", &second_lyapunov, py::arg("p"));
  m.def("pth_moment_upper", &pth_moment_upper, py::arg("p"), py::arg("t"), py::arg("pp"));
  m.def("pth_lyapunov_upper", &pth_lyapunov_upper, py::arg("p"), py::arg("pp"));
  m.def("resolvent_second_moment", &resolvent_second_moment, py::arg("p"), py::arg("t"));
  m.def(
      "volterra_second_moment",
      [](const ModelParams& p, const std::vector<double>& t, int min_steps, double rel_tol) {
        VolterraOptions o;
        o.min_steps = min_steps;
        o.rel_tol = rel_tol;
        MomentCurve c;
        {
          py::gil_scoped_release nogil;
          c = volterra_second_moment(p, t, o);
        }
        return curve_dict(c);
      },
      py::arg("p"), py::arg("t"), py::arg("min_steps") = VolterraOptions{}.min_steps,
      py::arg("rel_tol") = VolterraOptions{}.rel_tol);

  // diagrams
  m.def("count_admissible", [](const std::vector<int>& n) { return enumerate_admissible(partition_of(n)).size(); });
  m.def("is_balanced_partition",
        [](const std::vector<int>& n, int p, int mm) { return is_balanced_partition(partition_of(n), p, mm); });
  m.def("count_balanced",
        [](const std::vector<int>& n, int p, int mm) { return count_balanced(partition_of(n), p, mm); });
  m.def("count_lower_bound", &count_lower_bound, py::arg("p"), py::arg("m"));
  m.def("crossing_vanishes", [](const std::string& text) { return crossing_vanishes(diagram_from_text(text)); });
  m.def("chaos_term", &chaos_term, py::arg("p"), py::arg("t"), py::arg("k"));

  // simulate
  m.def(
      "simulate",
      [](const ModelParams& p, const std::string& family, const std::vector<double>& probes, double dx, double dt,
         double L, std::uint64_t paths, std::uint64_t seed) {
        SimConfig c;
        c.dx = dx;
        c.dt = dt;
        c.domain_half_width = L;
        c.n_paths = paths;
        c.seed = seed;
        c.t_end = probes.empty() ? 0.0 : probes.back();
        if (family != "she" && family != "swe") throw DomainError("family must be she or swe");
        MomentCurve out;
        {
          py::gil_scoped_release nogil;
          out = family == "she" ? simulate_she(p, c, probes) : simulate_swe(p, c, probes);
        }
        return curve_dict(out);
      },
      py::arg("p"), py::arg("family"), py::arg("t"), py::arg("dx"), py::arg("dt"), py::arg("L") = SimConfig{}.domain_half_width,
      py::arg("paths") = SimConfig{}.n_paths, py::arg("seed") = SimConfig{}.seed);

  m.def(
      "figure_data",
      [](const std::string& family, const ModelParams& base, const std::string& grid) {
        std::vector<cli::FigureRow> rows;
        {
          py::gil_scoped_release nogil;
          rows = cli::figure_data(family, base, grid);
        }
        py::list out;
        for (const auto& r : rows) out.append(py::make_tuple(r.series, r.x, r.y));
        return out;
      },
      py::arg("family"), py::arg("base") = ModelParams{}, py::arg("alpha_grid") = "1.05:5:0.05");
}
