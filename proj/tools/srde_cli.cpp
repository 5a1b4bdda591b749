#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
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

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace srde;

namespace {

enum Exit { ok = 0, config_error = 2, assumption_failure = 3, io_error = 4 };

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  std::string out = ".";
  bool strict = false;
};

std::string hex(std::uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

RunConfig load(const Globals& g) {
  RunConfig c = g.config_path.empty() ? RunConfig{} : load_config(g.config_path);
  if (g.seed) c.master_seed = *g.seed;
  if (g.workers) {
    if (*g.workers == 0) throw ConfigError("workers", "must be positive");
    c.workers = *g.workers;
  }
  return c;
}

fs::path out_file(const Globals& g, const std::string& name) {
  std::error_code ec;
  fs::create_directories(g.out, ec);
  if (ec) throw IoError("cannot create output directory " + g.out, "");
  return fs::path(g.out) / name;
}

json header(const std::string& command, const RunConfig& c) {
  return json{{"command", command}, {"version", SRDE_VERSION}, {"config_digest", hex(c.digest())}};
}

void emit(const Globals& g, const std::string& name, const json& doc) {
  const auto path = out_file(g, name);
  std::ofstream f(path);
  f << doc.dump(2) << '\n';
  if (!f) throw IoError("cannot write " + path.string(), "");
  std::cout << doc.dump(2) << '\n';
}

json series_json(const SeriesCheck& s) {
  return json{{"value", number(s.value)},           {"partial_sum", number(s.partial_sum)},
              {"half_sum", number(s.half_sum)},     {"tail_estimate", number(s.tail_estimate)},
              {"decay_exponent", number(s.decay_exponent)}, {"terms", s.terms},
              {"diverges", s.diverges}};
}

AssumptionReport report_for(const RunConfig& c) {
  const auto basis = dirichlet_interval_basis(c.domain_length, c.solver.num_modes, c.solver.grid_size);
  return check_assumptions(basis, c.spectrum(), c.model);
}

json report_json(const AssumptionReport& r) {
  return json{{"eta", number(r.eta)},
              {"eta_ok", r.eta_ok},
              {"lambda_sum", series_json(r.lambda_sum)},
              {"alpha_sum", series_json(r.alpha_sum)},
              {"gamma_threshold", number(r.gamma_threshold)},
              {"gamma_beta_ok", r.gamma_beta_ok},
              {"within_hypotheses", r.within_hypotheses},
              {"drift_dissipative", r.drift_dissipative},
              {"all_ok", r.all_ok()},
              {"diagnostics", r.diagnostics}};
}

// Under --strict every subcommand refuses to run outside the hypotheses.
int strict_gate(const Globals& g, const RunConfig& c) {
  if (!g.strict) return ok;
  const auto r = report_for(c);
  if (r.all_ok()) return ok;
  for (const auto& d : r.diagnostics) std::cerr << "assumption: " << d << '\n';
  return assumption_failure;
}

int cmd_check(const Globals& g) {
  const RunConfig c = load(g);
  const auto r = report_for(c);
  json doc = header("check", c);
  doc["report"] = report_json(r);
  emit(g, "check.json", doc);
  return g.strict && !r.all_ok() ? assumption_failure : ok;
}

int cmd_ode(const Globals& g, const std::vector<double>& phi0s, double t_max, std::size_t points) {
  const RunConfig c = load(g);
  if (int code = strict_gate(g, c)) return code;
  if (!(t_max > 0.0) || points < 2) throw ConfigError("ode", "needs t-max > 0 and at least two points");
  const auto path = out_file(g, "ode.csv");
  std::ofstream f(path);
  f << "t,phi0,phi,envelope\n";
  f.precision(17);
  for (double phi0 : phi0s)
    for (std::size_t i = 0; i < points; ++i) {
      const double t = t_max * static_cast<double>(i) / static_cast<double>(points - 1);
      f << t << ',' << phi0 << ',' << exact_solution(phi0, c.model.beta, t) << ','
        << decay_envelope(std::fabs(phi0), c.model.beta, c.model.k1, t) << '\n';
    }
  if (!f) throw IoError("cannot write " + path.string(), "");
  json doc = header("ode", c);
  doc["beta"] = c.model.beta;
  doc["rows"] = phi0s.size() * points;
  doc["table"] = path.string();
  emit(g, "ode.json", doc);
  return ok;
}

int cmd_sde(const Globals& g) {
  const RunConfig c = load(g);
  if (int code = strict_gate(g, c)) return code;
  const SdeConfig sde = c.sde_config();
  std::vector<SdePath> paths;
  const auto est = moment_estimate(sde, c.sde_trials, c.master_seed, c.workers, &paths);
  const auto csv = out_file(g, "sde_trials.csv");
  write_sde_trials_csv(csv.string(), paths);
  json doc = header("sde", c);
  doc["ito_condition"] = ito_condition(sde.beta, sde.gamma);
  doc["mean_norm_sq"] = number(est.mean);
  doc["standard_error"] = number(est.standard_error);
  doc["trials"] = est.trials;
  doc["exits"] = est.exits;
  doc["nonfinite"] = est.nonfinite;
  doc["trials_csv"] = csv.string();
  emit(g, "sde.json", doc);
  return ok;
}

int cmd_simulate(const Globals& g) {
  const RunConfig c = load(g);
  if (int code = strict_gate(g, c)) return code;
  const auto problem = c.problem();
  const auto u0 = sine_profile(problem.basis, c.u0_amplitude);
  const std::uint64_t seed = derive_seed(c.master_seed, 0);
  const auto rec = simulate_spde(u0, problem, seed);
  const auto series = out_file(g, "series.csv");
  const auto ladder = out_file(g, "ladder.csv");
  write_series_csv(series.string(), rec);
  write_ladder_csv(ladder.string(), rec);
  json doc = header("simulate", c);
  doc["seed"] = seed;
  doc["verdict"] = to_string(rec.verdict);
  doc["verdict_time"] = number(rec.verdict_time);
  doc["final_sup_norm"] = rec.sup_norms.empty() ? json(nullptr) : number(rec.sup_norms.back());
  doc["crossings"] = rec.crossings.size();
  doc["record_digest"] = hex(rec.digest());
  doc["wall_seconds"] = rec.wall_seconds;
  doc["series_csv"] = series.string();
  doc["ladder_csv"] = ladder.string();
  emit(g, "simulate.json", doc);
  return ok;
}

int cmd_sweep(const Globals& g, bool resume) {
  const RunConfig c = load(g);
  if (int code = strict_gate(g, c)) return code;
  const auto spec = c.sweep_spec();
  const auto results = out_file(g, "results.csv");
  SweepOptions options;
  options.results_path = results.string();
  options.resume = resume;
  const std::size_t total = spec.beta_values.size() * spec.gamma_values.size();
  options.on_cell = [total](std::size_t done) { std::cerr << "cell " << done << "/" << total << '\n'; };
  const auto map = run_sweep(spec, options);
  json cells = json::array();
  for (const auto& cell : map.cells)
    cells.push_back(json{{"beta", cell.beta},
                         {"gamma", cell.gamma},
                         {"explosions", cell.explosions},
                         {"trials", cell.trials},
                         {"wilson", {cell.wilson_lo, cell.wilson_hi}},
                         {"mean_blowup_time", number(cell.mean_blowup_time)},
                         {"below", {cell.classes.below_ito, cell.classes.below_theorem, cell.classes.below_combined}},
                         {"boundary",
                          {cell.classes.boundary_ito, cell.classes.boundary_theorem, cell.classes.boundary_combined}}});
  json doc = header("sweep", c);
  doc["eta"] = map.eta;
  doc["sweep_digest"] = hex(spec.digest());
  doc["results_csv"] = results.string();
  doc["results_digest"] = hex(file_digest(results.string()));
  doc["cells"] = cells;
  emit(g, "sweep.json", doc);
  return ok;
}

int cmd_convolution(const Globals& g) {
  const RunConfig c = load(g);
  if (int code = strict_gate(g, c)) return code;
  const auto spectrum = c.spectrum();
  const double eta = compute_eta(spectrum);
  const ConvolutionConfig conv = c.convolution_config();
  try {
    conv.validate(eta);
  } catch (const std::invalid_argument& e) {
    const std::string what = e.what();
    const std::string key = what.rfind("zeta", 0) == 0 ? "zeta" : what.rfind("p ", 0) == 0 ? "p" : "alpha";
    throw ConfigError(key, what);
  }

  // Drive sigma with the sup-norm of one trajectory on the convolution grid.
  RunConfig driven = c;
  driven.solver.dt = c.conv_dt;
  driven.solver.horizon = c.conv_horizon;
  driven.solver.record_every = 1;
  const auto problem = driven.problem();
  const auto rec = simulate_spde(sine_profile(problem.basis, c.u0_amplitude), problem, derive_seed(c.master_seed, 0));
  std::vector<double> sup_path(conv.num_steps());
  for (std::size_t m = 0; m < sup_path.size(); ++m)
    sup_path[m] = rec.sup_norms[std::min(m, rec.sup_norms.size() - 1)];

  const auto report =
      moment_bound_check(conv, c.model, spectrum, problem.basis, sup_path, c.conv_trials, c.master_seed, c.workers,
                         c.conv_points);
  const auto csv = out_file(g, "moment_report.csv");
  write_moment_report_csv(csv.string(), report);

  const double sigma_scale = sigma_eval(c.model, 0.0);
  const auto fit = sup_moment_scaling(conv, sigma_scale, spectrum, problem.basis, c.conv_horizons, c.conv_trials,
                                      derive_seed(c.master_seed, 1), c.workers);

  json doc = header("convolution", c);
  doc["eta"] = eta;
  doc["beta_constant"] = beta_constant(conv.alpha, eta);
  doc["driver_verdict"] = to_string(rec.verdict);
  doc["moment_report_csv"] = csv.string();
  doc["moment_log_slope"] = number(report.log_slope);
  doc["scaling"] = json{{"sigma", sigma_scale},
                        {"horizons", fit.horizons},
                        {"moments", fit.moments},
                        {"standard_errors", fit.standard_errors},
                        {"slope", number(fit.slope)},
                        {"slope_standard_error", number(fit.slope_standard_error)},
                        {"ci", {number(fit.ci_lo), number(fit.ci_hi)}},
                        {"bound_slope", fit.bound_slope},
                        {"consistent", fit.consistent()},
                        {"trials", fit.trials}};
  emit(g, "convolution.json", doc);
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic reaction-diffusion experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", SRDE_VERSION);
  Globals g;
  std::uint64_t seed = 0;
  unsigned workers = 0;
  app.add_option("--config", g.config_path, "flat key = value configuration file")->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", seed, "master seed (overrides master_seed)");
  auto* workers_opt = app.add_option("--workers", workers, "worker threads")->envname("SRDE_WORKERS");
  app.add_option("--out", g.out, "output directory");
  app.add_flag("--strict", g.strict, "exit 3 when the assumption check fails");

  auto* check = app.add_subcommand("check", "evaluate the structural assumptions");
  auto* ode = app.add_subcommand("ode", "tabulate the closed-form ODE solution and envelope");
  std::vector<double> phi0s{1.0, 100.0};
  double t_max = 10.0;
  std::size_t points = 101;
  ode->add_option("--phi0", phi0s, "initial values")->delimiter(',');
  ode->add_option("--t-max", t_max, "last time");
  ode->add_option("--points", points, "rows per initial value");
  auto* sde = app.add_subcommand("sde", "Monte Carlo second moment of the finite-dimensional SDE");
  auto* simulate = app.add_subcommand("simulate", "one SPDE trajectory with its sup-norm ladder");
  auto* sweep = app.add_subcommand("sweep", "explosion frequencies over the (beta, gamma) grid");
  bool resume = false;
  sweep->add_flag("--resume", resume, "keep completed cells of an earlier run");
  auto* convolution = app.add_subcommand("convolution", "stochastic convolution moment experiments");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return config_error;
  }
  if (*seed_opt) g.seed = seed;
  if (*workers_opt) g.workers = workers;

  try {
    if (*check) return cmd_check(g);
    if (*ode) return cmd_ode(g, phi0s, t_max, points);
    if (*sde) return cmd_sde(g);
    if (*simulate) return cmd_simulate(g);
    if (*sweep) return cmd_sweep(g, resume);
    if (*convolution) return cmd_convolution(g);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return config_error;
  } catch (const AssumptionViolation& e) {
    std::cerr << "assumption violated: " << e.what() << '\n';
    return g.strict ? assumption_failure : config_error;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what();
    if (!e.resume_token().empty()) std::cerr << " (resume from " << e.resume_token() << ")";
    std::cerr << '\n';
    return io_error;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return config_error;
  }
  return ok;
}
