#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "srde/convolution_lab.hpp"
#include "srde/errors.hpp"
#include "srde/harness.hpp"
#include "srde/ode_oracle.hpp"
#include "srde/rng.hpp"
#include "srde/sde_sim.hpp"
#include "srde/spde_solver.hpp"
#include "srde/spectral_core.hpp"

#ifndef SRDE_VERSION
#define SRDE_VERSION "unknown"
#endif

namespace py = pybind11;
using namespace srde;

namespace {

py::dict report_dict(const AssumptionReport& r) {
  py::dict d;
  d["eta"] = r.eta;
  d["eta_ok"] = r.eta_ok;
  d["lambda_sum"] = r.lambda_sum.value;
  d["lambda_sum_diverges"] = r.lambda_sum.diverges;
  d["alpha_sum"] = r.alpha_sum.value;
  d["alpha_sum_diverges"] = r.alpha_sum.diverges;
  d["gamma_threshold"] = r.gamma_threshold;
  d["gamma_beta_ok"] = r.gamma_beta_ok;
  d["within_hypotheses"] = r.within_hypotheses;
  d["drift_dissipative"] = r.drift_dissipative;
  d["all_ok"] = r.all_ok();
  d["diagnostics"] = r.diagnostics;
  return d;
}

py::dict classes_dict(const CellClass& c) {
  py::dict d;
  d["below_ito"] = c.below_ito;
  d["below_theorem"] = c.below_theorem;
  d["below_combined"] = c.below_combined;
  d["boundary_ito"] = c.boundary_ito;
  d["boundary_theorem"] = c.boundary_theorem;
  d["boundary_combined"] = c.boundary_combined;
  return d;
}

}  // namespace

PYBIND11_MODULE(_srde, m) {
  m.doc() = "Spectral Galerkin simulation of stochastic reaction-diffusion equations.";
  m.attr("__version__") = SRDE_VERSION;

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<AssumptionViolation>(m, "AssumptionViolation", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  py::class_<RunConfig>(m, "RunConfig")
      .def(py::init<>())
      .def_static("from_text", &parse_config, py::arg("text"))
      .def_static("load", &load_config, py::arg("path"))
      .def("to_text", [](const RunConfig& c) { return format_config(c); })
      .def("save", [](const RunConfig& c, const std::string& path) { save_config(c, path); }, py::arg("path"))
      .def("digest", &RunConfig::digest)
      .def("__eq__", [](const RunConfig& a, const RunConfig& b) { return a == b; })
      .def("__repr__", [](const RunConfig& c) { return "<RunConfig digest=" + std::to_string(c.digest()) + ">"; });
  m.def("config_keys", &config_keys);

  m.def("exact_solution", &exact_solution, py::arg("phi0"), py::arg("beta"), py::arg("t"));
  m.def("decay_envelope", &decay_envelope, py::arg("u0_sup"), py::arg("beta"), py::arg("k1"), py::arg("t"));
  m.def("uniform_bound", &uniform_bound, py::arg("beta"), py::arg("k1"), py::arg("t"));
  m.def("beta_constant", &beta_constant, py::arg("alpha"), py::arg("eta"));
  m.def(
      "wilson_interval",
      [](std::size_t k, std::size_t n) {
        const auto w = wilson_interval(k, n);
        return py::make_tuple(w.lo, w.hi);
      },
      py::arg("successes"), py::arg("trials"));
  m.def(
      "classify_cell",
      [](double beta, double gamma, double eta) { return classes_dict(classify_cell(beta, gamma, eta)); },
      py::arg("beta"), py::arg("gamma"), py::arg("eta"));

  m.def(
      "check",
      [](const RunConfig& c) {
        AssumptionReport r;
        {
          py::gil_scoped_release release;
          const auto basis = dirichlet_interval_basis(c.domain_length, c.solver.num_modes, c.solver.grid_size);
          r = check_assumptions(basis, c.spectrum(), c.model);
        }
        return report_dict(r);
      },
      py::arg("config"), "Evaluate the structural assumptions for a configuration.");

  m.def(
      "sde_moment",
      [](const RunConfig& c) {
        MomentEstimate est;
        {
          py::gil_scoped_release release;
          est = moment_estimate(c.sde_config(), c.sde_trials, c.master_seed, c.workers);
        }
        py::dict d;
        d["mean"] = est.mean;
        d["standard_error"] = est.standard_error;
        d["trials"] = est.trials;
        d["exits"] = est.exits;
        d["nonfinite"] = est.nonfinite;
        return d;
      },
      py::arg("config"), "Monte Carlo estimate of E|X(T ^ tau_R)|^2.");

  m.def(
      "simulate",
      [](const RunConfig& c, std::uint64_t seed) {
        TrajectoryRecord rec;
        {
          py::gil_scoped_release release;
          const auto problem = c.problem();
          rec = simulate_spde(sine_profile(problem.basis, c.u0_amplitude), problem, seed);
        }
        py::list crossings;
        for (const auto& x : rec.crossings)
          crossings.append(py::make_tuple(x.time, to_string(x.direction), x.level_index, x.level));
        py::dict d;
        d["times"] = rec.times;
        d["sup_norms"] = rec.sup_norms;
        d["level_indices"] = rec.level_indices;
        d["crossings"] = crossings;
        d["verdict"] = to_string(rec.verdict);
        d["verdict_time"] = rec.verdict_time;
        d["digest"] = rec.digest();
        return d;
      },
      py::arg("config"), py::arg("seed"), "One trajectory from u0 = u0_amplitude * sin(pi x / L).");

  m.def(
      "sweep",
      [](const RunConfig& c, const std::string& results_path, bool resume) {
        ExplosionMap map;
        {
          py::gil_scoped_release release;
          SweepOptions options;
          options.results_path = results_path;
          options.resume = resume;
          map = run_sweep(c.sweep_spec(), options);
        }
        py::list cells;
        for (const auto& cell : map.cells) {
          py::dict d;
          d["beta"] = cell.beta;
          d["gamma"] = cell.gamma;
          d["trials"] = cell.trials;
          d["explosions"] = cell.explosions;
          d["wilson"] = py::make_tuple(cell.wilson_lo, cell.wilson_hi);
          d["mean_blowup_time"] = cell.mean_blowup_time;
          d["classes"] = classes_dict(cell.classes);
          cells.append(d);
        }
        return cells;
      },
      py::arg("config"), py::arg("results_path") = "", py::arg("resume") = false,
      "Explosion frequencies over the (beta, gamma) grid.");

  m.def(
      "moment_bound",
      [](const RunConfig& c, std::vector<double> sup_path) {
        MomentBoundReport r;
        {
          py::gil_scoped_release release;
          const auto basis = dirichlet_interval_basis(c.domain_length, c.solver.num_modes, c.solver.grid_size);
          r = moment_bound_check(c.convolution_config(), c.model, c.spectrum(), basis, sup_path, c.conv_trials,
                                 c.master_seed, c.workers, c.conv_points);
        }
        py::dict d;
        d["times"] = r.times;
        d["lhs"] = r.lhs;
        d["lhs_exact"] = r.lhs_exact;
        d["rhs"] = r.rhs;
        d["ratio"] = r.ratio;
        d["log_slope"] = r.log_slope;
        return d;
      },
      py::arg("config"), py::arg("sup_path"),
      "L^p moment of the stopped Z_alpha against its bound; sup_path has one entry per conv_dt step.");
}
