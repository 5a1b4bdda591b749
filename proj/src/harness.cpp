#include "srde/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "srde/errors.hpp"
#include "srde/parallel.hpp"
#include "srde/rng.hpp"

namespace srde {

// ---------------------------------------------------------------------------
// Statistics and classification

Interval wilson_interval(std::size_t successes, std::size_t trials, double z) {
  if (trials == 0) throw std::invalid_argument("wilson_interval needs at least one trial");
  if (successes > trials) throw std::invalid_argument("successes exceed trials");
  const double n = static_cast<double>(trials);
  const double phat = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (phat + z2 / (2.0 * n)) / denom;
  const double half = z / denom * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n));
  Interval out{std::max(0.0, center - half), std::min(1.0, center + half)};
  if (successes == 0) out.lo = 0.0;
  if (successes == trials) out.hi = 1.0;
  return out;
}

double ito_threshold(double beta) { return (beta + 1.0) / 2.0; }
double theorem_threshold(double beta, double eta) { return 1.0 + (1.0 - eta) * (beta - 1.0) / 2.0; }
double combined_threshold(double beta) { return std::max(1.5, (3.0 + beta) / 4.0); }

namespace {

void compare(double gamma, double threshold, bool& below, bool& boundary) {
  boundary = std::fabs(gamma - threshold) <= 1e-12 * std::max(1.0, std::fabs(threshold));
  below = !boundary && gamma < threshold;
}

}  // namespace

CellClass classify_cell(double beta, double gamma, double eta) {
  if (!(beta > 1.0)) throw std::invalid_argument("classify_cell requires beta > 1");
  CellClass c;
  compare(gamma, ito_threshold(beta), c.below_ito, c.boundary_ito);
  compare(gamma, theorem_threshold(beta, eta), c.below_theorem, c.boundary_theorem);
  compare(gamma, combined_threshold(beta), c.below_combined, c.boundary_combined);
  return c;
}

// ---------------------------------------------------------------------------
// Explosion estimates

ExplosionEstimate estimate_explosion_probability(const SpdeProblem& problem, std::span<const double> u0,
                                                 std::size_t trials, std::uint64_t master_seed, unsigned workers,
                                                 std::vector<TrajectoryRecord>* records) {
  if (trials == 0) throw std::invalid_argument("trials must be positive");
  problem.validate();
  std::vector<TrajectoryRecord> results(trials);
  parallel_for(trials, workers, [&](std::size_t i) {
    results[i] = simulate_spde(u0, problem, derive_seed(master_seed, i));
  });
  ExplosionEstimate est;
  est.trials = trials;
  double time_sum = 0.0;
  for (const auto& r : results) {
    if (r.exploded()) {
      ++est.explosions;
      time_sum += r.verdict_time;
    }
  }
  est.interval = wilson_interval(est.explosions, trials);
  est.mean_blowup_time = est.explosions > 0 ? time_sum / static_cast<double>(est.explosions) : NAN;
  if (records) *records = std::move(results);
  return est;
}

void SweepSpec::validate() const {
  if (trials == 0) throw std::invalid_argument("trials must be positive");
  if (beta_values.empty() || gamma_values.empty()) throw std::invalid_argument("beta and gamma values must be nonempty");
  if (!std::is_sorted(beta_values.begin(), beta_values.end()) ||
      std::adjacent_find(beta_values.begin(), beta_values.end()) != beta_values.end())
    throw std::invalid_argument("beta_values must be strictly increasing");
  if (!std::is_sorted(gamma_values.begin(), gamma_values.end()) ||
      std::adjacent_find(gamma_values.begin(), gamma_values.end()) != gamma_values.end())
    throw std::invalid_argument("gamma_values must be strictly increasing");
  for (double b : beta_values)
    if (!(b > 1.0)) throw std::invalid_argument("beta_values must exceed 1");
  for (double g : gamma_values)
    if (!(g >= 0.0)) throw std::invalid_argument("gamma_values must be nonnegative");
  model.validate();
  solver.validate(model);
  if (!(domain_length > 0.0)) throw std::invalid_argument("domain_length must be positive");
  if (!std::isfinite(u0_amplitude)) throw std::invalid_argument("u0_amplitude must be finite");
}

std::uint64_t SweepSpec::digest() const {
  Digest d;
  for (double b : beta_values) d.value(b);
  d.value(-1.0);
  for (double g : gamma_values) d.value(g);
  d.value(trials).value(domain_length).value(u0_amplitude).value(master_seed);
  ModelSpec m = model;
  m.beta = 2.0;
  m.gamma = 1.0;
  d.value(make_problem(m, spectrum, domain_length, solver).digest());
  return d.get();
}

namespace {

bool same_double(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_row(const ExplosionCell& c) {
  auto b = [](bool v) { return v ? "true" : "false"; };
  std::ostringstream out;
  out << format_double(c.beta) << ',' << format_double(c.gamma) << ',' << c.trials << ',' << c.explosions << ','
      << format_double(c.wilson_lo) << ',' << format_double(c.wilson_hi) << ','
      << format_double(c.mean_blowup_time) << ',' << b(c.classes.below_ito) << ','
      << b(c.classes.below_theorem) << ',' << b(c.classes.below_combined);
  return out.str();
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) parts.push_back(item);
  if (!text.empty() && text.back() == sep) parts.emplace_back();
  return parts;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& text, double& out) {
  const std::string t = trim(text);
  if (t.empty()) return false;
  const char* first = t.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, t.data() + t.size(), out);
  return ec == std::errc() && ptr == t.data() + t.size();
}

template <typename Int>
bool parse_unsigned(const std::string& text, Int& out) {
  const std::string t = trim(text);
  if (t.empty() || t[0] == '-') return false;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  return ec == std::errc() && ptr == t.data() + t.size();
}

bool parse_bool(const std::string& text, bool& out) {
  const std::string t = trim(text);
  if (t == "true" || t == "1") {
    out = true;
    return true;
  }
  if (t == "false" || t == "0") {
    out = false;
    return true;
  }
  return false;
}

std::optional<ExplosionCell> parse_row(const std::string& line, double eta) {
  const auto f = split(line, ',');
  if (f.size() != 10) return std::nullopt;
  ExplosionCell c;
  if (!parse_double(f[0], c.beta) || !parse_double(f[1], c.gamma) || !parse_unsigned(f[2], c.trials) ||
      !parse_unsigned(f[3], c.explosions) || !parse_double(f[4], c.wilson_lo) ||
      !parse_double(f[5], c.wilson_hi) || !parse_double(f[6], c.mean_blowup_time) ||
      !parse_bool(f[7], c.classes.below_ito) || !parse_bool(f[8], c.classes.below_theorem) ||
      !parse_bool(f[9], c.classes.below_combined))
    return std::nullopt;
  if (c.beta > 1.0) {
    const CellClass k = classify_cell(c.beta, c.gamma, eta);
    c.classes.boundary_ito = k.boundary_ito;
    c.classes.boundary_theorem = k.boundary_theorem;
    c.classes.boundary_combined = k.boundary_combined;
  }
  return c;
}

// Complete, well-formed data rows; stops at the first torn or malformed line.
std::vector<ExplosionCell> read_rows(const std::string& path, double eta, bool strict) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path, "");
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::vector<ExplosionCell> rows;
  std::size_t pos = 0;
  bool header = true;
  while (pos < content.size()) {
    const auto end = content.find('\n', pos);
    if (end == std::string::npos) {
      if (strict) throw IoError("truncated line in " + path, "");
      break;
    }
    const std::string line = trim(content.substr(pos, end - pos));
    pos = end + 1;
    if (header) {
      if (line != results_header) throw IoError("unexpected header in " + path, "");
      header = false;
      continue;
    }
    if (line.empty()) continue;
    auto row = parse_row(line, eta);
    if (!row) {
      if (strict) throw IoError("malformed row in " + path + ": " + line, "");
      break;
    }
    rows.push_back(*row);
  }
  if (header && strict) throw IoError("missing header in " + path, "");
  return rows;
}

}  // namespace

bool ExplosionCell::same_as(const ExplosionCell& o) const noexcept {
  return beta == o.beta && gamma == o.gamma && trials == o.trials && explosions == o.explosions &&
         wilson_lo == o.wilson_lo && wilson_hi == o.wilson_hi && same_double(mean_blowup_time, o.mean_blowup_time) &&
         classes == o.classes;
}

bool ExplosionMap::same_as(const ExplosionMap& o) const noexcept {
  if (eta != o.eta || cells.size() != o.cells.size()) return false;
  for (std::size_t i = 0; i < cells.size(); ++i)
    if (!cells[i].same_as(o.cells[i])) return false;
  return true;
}

ExplosionMap run_sweep(const SweepSpec& spec, const SweepOptions& options) {
  spec.validate();
  ExplosionMap map;
  map.eta = compute_eta(spec.spectrum);
  const std::size_t total = spec.beta_values.size() * spec.gamma_values.size();
  const std::string digest_text = std::to_string(spec.digest());

  std::ofstream out;
  std::size_t done = 0;
  if (!options.results_path.empty()) {
    const std::string& path = options.results_path;
    const std::string sidecar = path + ".digest";
    if (options.resume && std::filesystem::exists(path)) {
      std::ifstream d(sidecar);
      std::string stored;
      std::getline(d, stored);
      if (trim(stored) != digest_text)
        throw ConfigError("results", "existing " + path + " belongs to a different sweep");
      map.cells = read_rows(path, map.eta, false);
      if (map.cells.size() > total) throw ConfigError("results", path + " has more cells than the sweep");
      for (std::size_t c = 0; c < map.cells.size(); ++c) {
        const double b = spec.beta_values[c / spec.gamma_values.size()];
        const double g = spec.gamma_values[c % spec.gamma_values.size()];
        if (map.cells[c].beta != b || map.cells[c].gamma != g || map.cells[c].trials != spec.trials)
          throw ConfigError("results", path + " does not match the sweep grid");
      }
      done = map.cells.size();
    }
    // Rewrite the surviving prefix so a torn last line cannot linger.
    out.open(path, std::ios::trunc);
    if (!out) throw IoError("cannot write " + path, "cell=" + std::to_string(done));
    out << results_header << '\n';
    for (const auto& c : map.cells) out << format_row(c) << '\n';
    out.flush();
    std::ofstream d(sidecar, std::ios::trunc);
    d << digest_text << '\n';
    if (!out || !d) throw IoError("cannot write " + path, "cell=" + std::to_string(done));
  }

  const std::vector<double> base_u0 = [&] {
    const auto basis = dirichlet_interval_basis(spec.domain_length, spec.solver.num_modes, spec.solver.grid_size);
    return sine_profile(basis, spec.u0_amplitude);
  }();

  for (std::size_t c = done; c < total; ++c) {
    ExplosionCell cell;
    cell.beta = spec.beta_values[c / spec.gamma_values.size()];
    cell.gamma = spec.gamma_values[c % spec.gamma_values.size()];
    ModelSpec model = spec.model;
    model.beta = cell.beta;
    model.gamma = cell.gamma;
    const SpdeProblem problem = make_problem(model, spec.spectrum, spec.domain_length, spec.solver);
    const auto est = estimate_explosion_probability(problem, base_u0, spec.trials, spec.master_seed, spec.workers);
    cell.trials = est.trials;
    cell.explosions = est.explosions;
    cell.wilson_lo = est.interval.lo;
    cell.wilson_hi = est.interval.hi;
    cell.mean_blowup_time = est.mean_blowup_time;
    cell.classes = classify_cell(cell.beta, cell.gamma, map.eta);
    map.cells.push_back(cell);
    if (out.is_open()) {
      out << format_row(cell) << '\n';
      out.flush();
      if (!out) throw IoError("write failed for " + options.results_path, "cell=" + std::to_string(c));
    }
    if (options.on_cell) options.on_cell(c + 1);
  }
  return map;
}

void persist_results(const ExplosionMap& map, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path, "");
  out << results_header << '\n';
  for (const auto& c : map.cells) out << format_row(c) << '\n';
  if (!out) throw IoError("write failed for " + path, "");
}

ExplosionMap load_results(const std::string& path, double eta) {
  ExplosionMap map;
  map.eta = eta;
  map.cells = read_rows(path, eta, true);
  return map;
}

std::uint64_t file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path, "");
  Digest d;
  char buf[4096];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) d.bytes(buf, static_cast<std::size_t>(in.gcount()));
  return d.get();
}

// ---------------------------------------------------------------------------
// Run configuration

NoiseSpectrum RunConfig::spectrum() const {
  if (lambdas == "white") {
    if (!std::isinf(rho)) throw ConfigError("rho", "white noise needs rho = inf");
    return NoiseSpectrum::white(theta);
  }
  if (lambdas == "power-law") return NoiseSpectrum::power_law(lambda_decay, rho, theta);
  if (lambdas.rfind("csv:", 0) == 0) return load_spectrum_csv(lambdas.substr(4), rho, theta);
  throw ConfigError("lambdas", "expected white, power-law or csv:<path>, got '" + lambdas + "'");
}

SdeConfig RunConfig::sde_config() const {
  SdeConfig c;
  c.dimension = dimension;
  c.beta = model.beta;
  c.gamma = model.gamma;
  c.x0 = x0;
  c.dt = sde_dt;
  c.horizon = sde_horizon;
  c.exit_radius = exit_radius;
  c.scheme = sde_scheme;
  c.drift = model.drift;
  c.diffusion_scale = sde_diffusion_scale;
  return c;
}

SweepSpec RunConfig::sweep_spec() const {
  SweepSpec s;
  s.beta_values = beta_values;
  s.gamma_values = gamma_values;
  s.trials = trials;
  s.model = model;
  s.spectrum = spectrum();
  s.solver = solver;
  s.domain_length = domain_length;
  s.u0_amplitude = u0_amplitude;
  s.master_seed = master_seed;
  s.workers = workers;
  return s;
}

ConvolutionConfig RunConfig::convolution_config() const {
  ConvolutionConfig c;
  c.alpha = alpha;
  c.zeta = zeta;
  c.p = p;
  c.dt = conv_dt;
  c.horizon = conv_horizon;
  c.noise_modes = solver.noise_modes;
  c.rule = conv_rule;
  return c;
}

SpdeProblem RunConfig::problem() const { return make_problem(model, spectrum(), domain_length, solver); }

namespace {

struct Field {
  std::string key;
  std::string type;
  std::function<bool(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename T>
Field real_field(const std::string& key, T RunConfig::*member) {
  return {key, "real", [member](RunConfig& c, const std::string& v) { return parse_double(v, c.*member); },
          [member](const RunConfig& c) { return format_double(c.*member); }};
}

template <typename Sub>
Field nested_real(const std::string& key, Sub RunConfig::*outer, double Sub::*inner) {
  return {key, "real",
          [outer, inner](RunConfig& c, const std::string& v) { return parse_double(v, (c.*outer).*inner); },
          [outer, inner](const RunConfig& c) { return format_double((c.*outer).*inner); }};
}

template <typename Int>
Field count_field(const std::string& key, Int RunConfig::*member) {
  return {key, "nonnegative integer",
          [member](RunConfig& c, const std::string& v) { return parse_unsigned(v, c.*member); },
          [member](const RunConfig& c) { return std::to_string(c.*member); }};
}

Field solver_count(const std::string& key, std::size_t SolverConfig::*member) {
  return {key, "nonnegative integer",
          [member](RunConfig& c, const std::string& v) { return parse_unsigned(v, c.solver.*member); },
          [member](const RunConfig& c) { return std::to_string(c.solver.*member); }};
}

Field list_field(const std::string& key, std::vector<double> RunConfig::*member) {
  return {key, "comma-separated reals",
          [member](RunConfig& c, const std::string& v) {
            std::vector<double> values;
            for (const auto& item : split(v, ',')) {
              double x = 0.0;
              if (!parse_double(item, x)) return false;
              values.push_back(x);
            }
            if (values.empty()) return false;
            c.*member = std::move(values);
            return true;
          },
          [member](const RunConfig& c) {
            std::string s;
            for (std::size_t i = 0; i < (c.*member).size(); ++i) s += (i ? "," : "") + format_double((c.*member)[i]);
            return s;
          }};
}

template <typename Enum>
Field enum_field(const std::string& key, const std::string& type, Enum RunConfig::*member,
                 Enum (*parse)(const std::string&), std::string (*print)(Enum)) {
  return {key, type,
          [member, parse](RunConfig& c, const std::string& v) {
            try {
              c.*member = parse(trim(v));
              return true;
            } catch (const std::invalid_argument&) {
              return false;
            }
          },
          [member, print](const RunConfig& c) { return print(c.*member); }};
}

template <typename Enum, typename Sub>
Field nested_enum(const std::string& key, const std::string& type, Sub RunConfig::*outer, Enum Sub::*inner,
                  Enum (*parse)(const std::string&), std::string (*print)(Enum)) {
  return {key, type,
          [outer, inner, parse](RunConfig& c, const std::string& v) {
            try {
              (c.*outer).*inner = parse(trim(v));
              return true;
            } catch (const std::invalid_argument&) {
              return false;
            }
          },
          [outer, inner, print](const RunConfig& c) { return print((c.*outer).*inner); }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    f.push_back(real_field("domain_length", &RunConfig::domain_length));
    f.push_back(nested_real("beta", &RunConfig::model, &ModelSpec::beta));
    f.push_back(nested_real("gamma", &RunConfig::model, &ModelSpec::gamma));
    f.push_back(nested_real("k1", &RunConfig::model, &ModelSpec::k1));
    f.push_back(nested_real("k2", &RunConfig::model, &ModelSpec::k2));
    f.push_back(nested_real("c0", &RunConfig::model, &ModelSpec::c0));
    f.push_back(nested_enum("drift", "power_dissipative|zero", &RunConfig::model, &ModelSpec::drift,
                            &parse_drift_kind, static_cast<std::string (*)(DriftKind)>(&to_string)));
    f.push_back(nested_enum("diffusion", "polynomial|additive", &RunConfig::model, &ModelSpec::diffusion,
                            &parse_diffusion_kind, static_cast<std::string (*)(DiffusionKind)>(&to_string)));
    f.push_back({"lambdas", "white|power-law|csv:<path>",
                 [](RunConfig& c, const std::string& v) {
                   c.lambdas = trim(v);
                   return c.lambdas == "white" || c.lambdas == "power-law" ||
                          (c.lambdas.rfind("csv:", 0) == 0 && c.lambdas.size() > 4);
                 },
                 [](const RunConfig& c) { return c.lambdas; }});
    f.push_back(real_field("lambda_decay", &RunConfig::lambda_decay));
    f.push_back(real_field("rho", &RunConfig::rho));
    f.push_back(real_field("theta", &RunConfig::theta));
    f.push_back(solver_count("num_modes", &SolverConfig::num_modes));
    f.push_back(solver_count("grid_size", &SolverConfig::grid_size));
    f.push_back(solver_count("noise_modes", &SolverConfig::noise_modes));
    f.push_back(nested_real("dt", &RunConfig::solver, &SolverConfig::dt));
    f.push_back(nested_real("horizon", &RunConfig::solver, &SolverConfig::horizon));
    f.push_back(nested_real("explosion_threshold", &RunConfig::solver, &SolverConfig::explosion_threshold));
    f.push_back(nested_enum("scheme", "exponential_tamed|semi_implicit_split", &RunConfig::solver,
                            &SolverConfig::scheme, &parse_spde_scheme,
                            static_cast<std::string (*)(SpdeScheme)>(&to_string)));
    f.push_back({"ladder_enabled", "bool",
                 [](RunConfig& c, const std::string& v) { return parse_bool(v, c.solver.ladder_enabled); },
                 [](const RunConfig& c) { return std::string(c.solver.ladder_enabled ? "true" : "false"); }});
    f.push_back(solver_count("record_every", &SolverConfig::record_every));
    f.push_back(real_field("u0_amplitude", &RunConfig::u0_amplitude));
    f.push_back(count_field("dimension", &RunConfig::dimension));
    f.push_back(list_field("x0", &RunConfig::x0));
    f.push_back(real_field("sde_dt", &RunConfig::sde_dt));
    f.push_back(real_field("sde_horizon", &RunConfig::sde_horizon));
    f.push_back(real_field("exit_radius", &RunConfig::exit_radius));
    f.push_back(enum_field("sde_scheme", "euler_maruyama|tamed_euler", &RunConfig::sde_scheme, &parse_sde_scheme,
                           static_cast<std::string (*)(SdeScheme)>(&to_string)));
    f.push_back(real_field("sde_diffusion_scale", &RunConfig::sde_diffusion_scale));
    f.push_back(count_field("sde_trials", &RunConfig::sde_trials));
    f.push_back(list_field("beta_values", &RunConfig::beta_values));
    f.push_back(list_field("gamma_values", &RunConfig::gamma_values));
    f.push_back(count_field("trials", &RunConfig::trials));
    f.push_back(count_field("master_seed", &RunConfig::master_seed));
    f.push_back(count_field("workers", &RunConfig::workers));
    f.push_back(real_field("alpha", &RunConfig::alpha));
    f.push_back(real_field("zeta", &RunConfig::zeta));
    f.push_back(real_field("p", &RunConfig::p));
    f.push_back(real_field("conv_dt", &RunConfig::conv_dt));
    f.push_back(real_field("conv_horizon", &RunConfig::conv_horizon));
    f.push_back(enum_field("conv_rule", "cell_average|left_endpoint", &RunConfig::conv_rule, &parse_z_alpha_rule,
                           static_cast<std::string (*)(ZAlphaRule)>(&to_string)));
    f.push_back(count_field("conv_trials", &RunConfig::conv_trials));
    f.push_back(count_field("conv_points", &RunConfig::conv_points));
    f.push_back(list_field("conv_horizons", &RunConfig::conv_horizons));
    return f;
  }();
  return table;
}

// Key named at the start of a validation message, if it is a config key.
std::string key_of(const std::string& message, const std::string& fallback) {
  const std::string first = message.substr(0, message.find(' '));
  const auto& keys = config_keys();
  return std::find(keys.begin(), keys.end(), first) != keys.end() ? first : fallback;
}

void require(bool ok, const std::string& key, const std::string& message) {
  if (!ok) throw ConfigError(key, message);
}

void validate_config(const RunConfig& c) {
  require(c.domain_length > 0.0 && std::isfinite(c.domain_length), "domain_length", "must be positive");
  try {
    c.model.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(key_of(e.what(), "beta"), e.what());
  }
  try {
    c.solver.validate(c.model);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(key_of(e.what(), "dt"), e.what());
  }
  require(c.lambda_decay > 0.0, "lambda_decay", "must be positive");
  require(c.rho > 2.0, "rho", "must exceed 2");
  require(c.theta > 0.0 && c.theta <= 1.0, "theta", "must lie in (0, 1]");
  require(std::isfinite(c.u0_amplitude), "u0_amplitude", "must be finite");
  require(c.dimension > 0, "dimension", "must be positive");
  require(c.x0.size() == c.dimension, "x0", "needs `dimension` entries");
  require(c.sde_dt > 0.0, "sde_dt", "must be positive");
  require(c.sde_horizon > c.sde_dt, "sde_horizon", "must exceed sde_dt");
  double norm = 0.0;
  for (double v : c.x0) norm += v * v;
  require(c.exit_radius > std::sqrt(norm), "exit_radius", "must exceed |x0|");
  require(c.sde_diffusion_scale >= 0.0, "sde_diffusion_scale", "must be nonnegative");
  require(c.sde_trials >= 2, "sde_trials", "must be at least 2");
  auto increasing = [](const std::vector<double>& v) {
    return std::adjacent_find(v.begin(), v.end(), [](double a, double b) { return !(a < b); }) == v.end();
  };
  require(increasing(c.beta_values), "beta_values", "must be strictly increasing");
  require(c.beta_values.front() > 1.0, "beta_values", "must exceed 1");
  require(increasing(c.gamma_values), "gamma_values", "must be strictly increasing");
  require(c.gamma_values.front() >= 0.0, "gamma_values", "must be nonnegative");
  require(c.trials >= 1, "trials", "must be positive");
  require(c.workers >= 1, "workers", "must be positive");
  require(c.conv_dt > 0.0, "conv_dt", "must be positive");
  require(c.conv_horizon >= c.conv_dt, "conv_horizon", "must be at least conv_dt");
  require(c.conv_trials >= 100, "conv_trials", "must be at least 100");
  require(c.conv_points >= 1, "conv_points", "must be positive");
  require(c.conv_horizons.size() >= 4 && increasing(c.conv_horizons) && c.conv_horizons.front() > 0.0,
          "conv_horizons", "needs at least four increasing positive values");
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& f : fields()) k.push_back(f.key);
    return k;
  }();
  return keys;
}

std::uint64_t RunConfig::digest() const {
  Digest d;
  d.bytes(format_config(*this).data(), format_config(*this).size());
  return d.get();
}

RunConfig parse_config(const std::string& text) {
  RunConfig config;
  std::map<std::string, std::size_t> seen;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(trim(line), "line " + std::to_string(line_no) + " is not of the form key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto& table = fields();
    const auto it = std::find_if(table.begin(), table.end(), [&](const Field& f) { return f.key == key; });
    if (it == table.end()) throw ConfigError(key, "unknown key");
    if (seen.count(key)) throw ConfigError(key, "duplicate key (first on line " + std::to_string(seen[key]) + ")");
    seen[key] = line_no;
    if (!it->set(config, value)) throw ConfigError(key, "expected " + it->type + ", got '" + value + "'");
  }
  validate_config(config);
  return config;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path, "");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string format_config(const RunConfig& config) {
  std::string out;
  for (const auto& f : fields()) out += f.key + " = " + f.get(config) + "\n";
  return out;
}

void save_config(const RunConfig& config, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path, "");
  out << format_config(config);
  if (!out) throw IoError("write failed for " + path, "");
}

}  // namespace srde
