#include "srde/spde_solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <stdexcept>

#include "srde/errors.hpp"

namespace srde {

std::string to_string(SpdeScheme scheme) {
  return scheme == SpdeScheme::exponential_tamed ? "exponential_tamed" : "semi_implicit_split";
}

SpdeScheme parse_spde_scheme(const std::string& text) {
  if (text == "exponential_tamed") return SpdeScheme::exponential_tamed;
  if (text == "semi_implicit_split") return SpdeScheme::semi_implicit_split;
  throw std::invalid_argument("unknown SPDE scheme '" + text + "'");
}

std::string to_string(LadderDirection d) {
  switch (d) {
    case LadderDirection::entry:
      return "entry";
    case LadderDirection::up:
      return "up";
    case LadderDirection::down:
      return "down";
  }
  return "?";
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::survived_to_T:
      return "survived_to_T";
    case Verdict::exploded_at_t:
      return "exploded_at_t";
    case Verdict::nonfinite_at_t:
      return "nonfinite_at_t";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Configuration

void SolverConfig::validate(const ModelSpec& model) const {
  if (num_modes == 0) throw std::invalid_argument("num_modes must be positive");
  if (grid_size < 4 * num_modes) throw std::invalid_argument("grid_size must be >= 4 * num_modes");
  if (noise_modes == 0 || noise_modes > num_modes)
    throw std::invalid_argument("noise_modes must lie in [1, num_modes]");
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (!(horizon >= dt)) throw std::invalid_argument("horizon must be at least dt");
  if (!(explosion_threshold > 9.0 * model.c0))
    throw std::invalid_argument("explosion_threshold must exceed 9 c0");
  if (record_every == 0) throw std::invalid_argument("record_every must be positive");
}

std::size_t SolverConfig::num_steps() const {
  return static_cast<std::size_t>(std::llround(horizon / dt));
}

std::uint64_t SolverConfig::digest() const {
  Digest d;
  d.value(num_modes).value(grid_size).value(noise_modes).value(dt).value(horizon);
  d.value(explosion_threshold).value(static_cast<int>(scheme)).value(ladder_enabled).value(record_every);
  return d.get();
}

void SpdeProblem::validate() const {
  model.validate();
  config.validate(model);
  if (basis.kind() != SpectralBasis::Kind::dirichlet_interval)
    throw std::invalid_argument("the solver needs the interval basis");
  if (basis.num_modes() != config.num_modes || basis.grid_size() != config.grid_size)
    throw std::invalid_argument("basis does not match solver configuration");
  compute_eta(spectrum);
}

std::uint64_t SpdeProblem::digest() const {
  Digest d;
  d.value(model.beta).value(model.gamma).value(model.k1).value(model.k2).value(model.c0);
  d.value(static_cast<int>(model.drift)).value(static_cast<int>(model.diffusion));
  d.value(static_cast<int>(spectrum.kind)).value(spectrum.decay).value(spectrum.rho).value(spectrum.theta);
  for (double v : spectrum.table) d.value(v);
  d.value(basis.domain_length());
  d.value(config.digest());
  return d.get();
}

SpdeProblem make_problem(const ModelSpec& model, const NoiseSpectrum& spectrum, double domain_length,
                         const SolverConfig& config) {
  SpdeProblem problem{model, spectrum,
                      dirichlet_interval_basis(domain_length, config.num_modes, config.grid_size), config};
  problem.validate();
  return problem;
}

// ---------------------------------------------------------------------------
// Fields and noise

namespace {

double sup_abs(std::span<const double> v, bool& finite) {
  double s = 0.0;
  finite = true;
  for (double x : v) {
    if (!std::isfinite(x)) {
      finite = false;
      return INFINITY;
    }
    s = std::max(s, std::fabs(x));
  }
  return s;
}

void synchronize(const SpectralBasis& basis, FieldState& state) {
  state.grid_values.resize(basis.grid_size());
  inverse_transform_into(basis, state.coeffs, state.grid_values);
  state.sup_norm = sup_abs(state.grid_values, state.finite);
}

}  // namespace

FieldState make_field_state(const SpectralBasis& basis, std::span<const double> u0) {
  FieldState state;
  state.coeffs = forward_transform(basis, u0);
  synchronize(basis, state);
  return state;
}

std::vector<double> sine_profile(const SpectralBasis& basis, double amplitude) {
  std::vector<double> u(basis.grid_size());
  const auto x = basis.grid_points();
  const double wave = std::numbers::pi / basis.domain_length();
  for (std::size_t m = 0; m < u.size(); ++m) u[m] = amplitude * std::sin(wave * x[m]);
  return u;
}

std::vector<double> noise_coefficients(const NoiseSpectrum& spectrum, std::size_t noise_modes, double dt,
                                       const CounterNormal& stream, std::uint64_t step) {
  std::vector<double> c(noise_modes);
  const double sqrt_dt = std::sqrt(dt);
  for (std::size_t j = 0; j < noise_modes; ++j) {
    const double lambda = spectrum.lambda(j + 1);
    c[j] = lambda == 0.0 ? 0.0 : lambda * sqrt_dt * stream(step, j);
  }
  return c;
}

std::vector<double> noise_increment(const NoiseSpectrum& spectrum, const SpectralBasis& basis,
                                    std::size_t noise_modes, double dt, const CounterNormal& stream,
                                    std::uint64_t step) {
  if (noise_modes > basis.num_modes()) throw std::invalid_argument("noise_modes exceeds num_modes");
  return inverse_transform(basis, noise_coefficients(spectrum, noise_modes, dt, stream, step));
}

// ---------------------------------------------------------------------------
// Stepping

namespace {

// Reusable buffers for repeated steps of one trajectory.
class Stepper {
 public:
  Stepper(const ModelSpec& model, const NoiseSpectrum& spectrum, const SpectralBasis& basis,
          const SolverConfig& config)
      : model_(model), spectrum_(spectrum), basis_(basis), config_(config),
        work_(basis.grid_size()), noise_(basis.grid_size()), projected_(basis.num_modes()),
        decay_(basis.num_modes()), noise_scale_(config.noise_modes) {
    for (std::size_t k = 0; k < decay_.size(); ++k) decay_[k] = std::exp(-basis.eigenvalues()[k] * config.dt);
    const double sqrt_dt = std::sqrt(config.dt);
    for (std::size_t j = 0; j < noise_scale_.size(); ++j) noise_scale_[j] = spectrum.lambda(j + 1) * sqrt_dt;
    noise_on_ = model.k2 != 0.0 &&
                std::any_of(noise_scale_.begin(), noise_scale_.end(), [](double v) { return v != 0.0; });
  }

  void step(FieldState& state, const CounterNormal& stream) {
    const std::size_t grid = basis_.grid_size();
    const std::size_t modes = basis_.num_modes();
    const double dt = config_.dt;
    const auto& u = state.grid_values;

    if (noise_on_) draw_noise(stream, state.step);

    if (config_.scheme == SpdeScheme::semi_implicit_split) {
      for (std::size_t m = 0; m < grid; ++m) work_[m] = drift_flow(model_, u[m], dt);
      forward_transform_into(basis_, work_, state.coeffs);
      for (std::size_t k = 0; k < modes; ++k) state.coeffs[k] *= decay_[k];
      if (noise_on_) {
        for (std::size_t m = 0; m < grid; ++m) work_[m] = sigma_eval(model_, work_[m]) * noise_[m];
        forward_transform_into(basis_, work_, projected_);
        for (std::size_t k = 0; k < modes; ++k) state.coeffs[k] += projected_[k];
      }
    } else {
      for (std::size_t m = 0; m < grid; ++m) {
        const double f = drift_eval(model_, u[m]);
        double b = u[m] + dt * f / (1.0 + dt * std::fabs(f));
        if (noise_on_) b += sigma_eval(model_, u[m]) * noise_[m];
        work_[m] = b;
      }
      forward_transform_into(basis_, work_, state.coeffs);
      for (std::size_t k = 0; k < modes; ++k) state.coeffs[k] *= decay_[k];
    }

    state.step += 1;
    state.time = static_cast<double>(state.step) * dt;
    inverse_transform_into(basis_, state.coeffs, state.grid_values);
    state.sup_norm = sup_abs(state.grid_values, state.finite);
  }

 private:
  void draw_noise(const CounterNormal& stream, std::uint64_t step) {
    std::fill(noise_.begin(), noise_.end(), 0.0);
    for (std::size_t j = 0; j < noise_scale_.size(); ++j) {
      if (noise_scale_[j] == 0.0) continue;
      const double c = noise_scale_[j] * stream(step, j);
      const auto row = basis_.mode_row(j);
      for (std::size_t m = 0; m < row.size(); ++m) noise_[m] += c * row[m];
    }
  }

  const ModelSpec& model_;
  const NoiseSpectrum& spectrum_;
  const SpectralBasis& basis_;
  const SolverConfig& config_;
  std::vector<double> work_;
  std::vector<double> noise_;
  std::vector<double> projected_;
  std::vector<double> decay_;
  std::vector<double> noise_scale_;
  bool noise_on_ = false;
};

}  // namespace

FieldState spde_step(const FieldState& state, const ModelSpec& model, const NoiseSpectrum& spectrum,
                     const SpectralBasis& basis, const SolverConfig& config, const CounterNormal& stream) {
  if (state.coeffs.size() != basis.num_modes() || state.grid_values.size() != basis.grid_size())
    throw std::invalid_argument("field state does not match the basis");
  if (config.noise_modes > basis.num_modes()) throw std::invalid_argument("noise_modes exceeds num_modes");
  FieldState next = state;
  Stepper stepper(model, spectrum, basis, config);
  stepper.step(next, stream);
  return next;
}

// ---------------------------------------------------------------------------
// Ladder

LadderState::LadderState(double c0) : c0_(c0) {
  if (!(c0 > 0.0)) throw std::invalid_argument("c0 must be positive");
}

double LadderState::level(int n) const { return std::pow(3.0, n) * c0_; }

void LadderState::record(double t, LadderDirection d, int n) {
  crossings_.push_back({t, d, n, level(n)});
  anchor_ = n;
}

void LadderState::update(double sup_norm, double t) {
  if (last_time_ && t < *last_time_) throw ContractViolation("ladder times must be nondecreasing");
  if (!(sup_norm >= 0.0)) throw std::invalid_argument("sup-norm must be nonnegative");
  last_time_ = t;
  const double s = sup_norm;

  if (!anchor_) {
    if (!last_value_) {
      // First sample: anchored only if it sits exactly on a level.
      for (int n = 1; level(n) <= s; ++n) {
        if (level(n) == s) record(t, LadderDirection::entry, n);
      }
    } else {
      const double prev = *last_value_;
      if (s > prev) {
        int n = 1;
        while (level(n) <= prev) ++n;  // smallest level above prev
        if (level(n) <= s) record(t, LadderDirection::entry, n);
      } else if (s < prev) {
        int n = 0;
        while (level(n + 1) < prev) ++n;  // largest level below prev is n (if n >= 1)
        if (n >= 1 && level(n) >= s) record(t, LadderDirection::entry, n);
      }
    }
    last_value_ = s;
    if (!anchor_) return;
  }
  last_value_ = s;

  for (;;) {
    const int n = *anchor_;
    if (s >= level(n + 1)) {
      record(t, LadderDirection::up, n + 1);
    } else if (n >= 2 && s <= level(n - 1)) {
      record(t, LadderDirection::down, n - 1);
    } else {
      break;
    }
  }
}

LadderState ladder_update(LadderState ladder, double sup_norm, double t) {
  ladder.update(sup_norm, t);
  return ladder;
}

// ---------------------------------------------------------------------------
// Trajectories

std::uint64_t TrajectoryRecord::digest() const {
  Digest d;
  d.value(seed).value(config_digest);
  for (double v : times) d.value(v);
  for (double v : sup_norms) d.value(v);
  for (int v : level_indices) d.value(v);
  for (const auto& c : crossings) d.value(c.time).value(static_cast<int>(c.direction)).value(c.level_index);
  d.value(static_cast<int>(verdict)).value(verdict_time);
  return d.get();
}

TrajectoryRecord simulate_spde(std::span<const double> u0, const SpdeProblem& problem, std::uint64_t seed) {
  problem.validate();
  const auto& config = problem.config;
  if (u0.size() != problem.basis.grid_size()) throw std::invalid_argument("u0 does not match the grid");
  if (!std::all_of(u0.begin(), u0.end(), [](double v) { return std::isfinite(v); }))
    throw std::invalid_argument("u0 must be finite");

  const auto start = std::chrono::steady_clock::now();
  TrajectoryRecord rec;
  rec.seed = seed;
  rec.config_digest = problem.digest();

  const CounterNormal stream(seed);
  Stepper stepper(problem.model, problem.spectrum, problem.basis, config);
  FieldState state = make_field_state(problem.basis, u0);
  LadderState ladder(problem.model.c0);

  auto observe = [&](bool keep) {
    if (config.ladder_enabled && state.finite) ladder.update(state.sup_norm, state.time);
    if (keep) {
      rec.times.push_back(state.time);
      rec.sup_norms.push_back(state.sup_norm);
      rec.level_indices.push_back(ladder.level_index());
    }
  };

  observe(true);
  const std::size_t n = config.num_steps();
  rec.verdict = Verdict::survived_to_T;
  rec.verdict_time = static_cast<double>(n) * config.dt;
  if (state.sup_norm >= config.explosion_threshold) {
    rec.verdict = Verdict::exploded_at_t;
    rec.verdict_time = 0.0;
  }
  for (std::size_t i = 0; i < n && rec.verdict == Verdict::survived_to_T; ++i) {
    stepper.step(state, stream);
    const bool stop = !state.finite || state.sup_norm >= config.explosion_threshold;
    const bool last = stop || i + 1 == n;
    observe(last || (i + 1) % config.record_every == 0);
    if (!state.finite) {
      rec.verdict = Verdict::nonfinite_at_t;
      rec.verdict_time = state.time;
    } else if (stop) {
      rec.verdict = Verdict::exploded_at_t;
      rec.verdict_time = state.time;
    }
  }
  rec.crossings = ladder.crossings();
  rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

void write_series_csv(const std::string& path, const TrajectoryRecord& record) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path, "");
  out << "t,sup_norm,level_index\n" << std::setprecision(17);
  for (std::size_t i = 0; i < record.times.size(); ++i)
    out << record.times[i] << ',' << record.sup_norms[i] << ',' << record.level_indices[i] << '\n';
  if (!out) throw IoError("write failed for " + path, "");
}

void write_ladder_csv(const std::string& path, const TrajectoryRecord& record) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path, "");
  out << "t,direction,level_index,level\n" << std::setprecision(17);
  for (const auto& c : record.crossings)
    out << c.time << ',' << to_string(c.direction) << ',' << c.level_index << ',' << c.level << '\n';
  if (!out) throw IoError("write failed for " + path, "");
}

}  // namespace srde
