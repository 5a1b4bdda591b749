#include "srde/sde_sim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <stdexcept>

#include "srde/errors.hpp"
#include "srde/parallel.hpp"
#include "srde/rng.hpp"

namespace srde {

std::string to_string(SdeScheme scheme) {
  return scheme == SdeScheme::euler_maruyama ? "euler_maruyama" : "tamed_euler";
}

SdeScheme parse_sde_scheme(const std::string& text) {
  if (text == "euler_maruyama") return SdeScheme::euler_maruyama;
  if (text == "tamed_euler") return SdeScheme::tamed_euler;
  throw std::invalid_argument("unknown SDE scheme '" + text + "'");
}

std::string to_string(SdeStop reason) {
  switch (reason) {
    case SdeStop::horizon:
      return "horizon";
    case SdeStop::exit:
      return "exit";
    case SdeStop::nonfinite:
      return "nonfinite";
  }
  return "?";
}

namespace {

double euclidean_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

void SdeConfig::validate() const {
  if (dimension == 0) throw std::invalid_argument("dimension must be positive");
  if (x0.size() != dimension) throw std::invalid_argument("x0 must have `dimension` entries");
  if (!(beta >= 0.0) || !(gamma >= 0.0)) throw std::invalid_argument("beta and gamma must be nonnegative");
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (!(horizon > dt)) throw std::invalid_argument("horizon must exceed dt");
  if (!(exit_radius > euclidean_norm(x0))) throw std::invalid_argument("exit radius must exceed |x0|");
  if (!(diffusion_scale >= 0.0)) throw std::invalid_argument("diffusion scale must be nonnegative");
}

std::size_t SdeConfig::num_steps() const {
  return static_cast<std::size_t>(std::llround(horizon / dt));
}

bool ito_condition(double beta, double gamma) noexcept { return gamma < (beta + 1.0) / 2.0; }

void sde_step_in_place(std::span<double> state, const SdeConfig& config,
                       std::span<const double> increment) {
  if (state.size() != increment.size()) throw std::invalid_argument("state/increment size mismatch");
  const double norm = euclidean_norm(state);
  const double diffusion = config.diffusion_scale * std::pow(1.0 + norm, config.gamma);
  double drift_factor = 0.0;  // drift = drift_factor * X
  if (config.drift == DriftKind::power_dissipative && norm > 0.0) {
    drift_factor = -std::pow(norm, config.beta - 1.0);
    if (config.scheme == SdeScheme::tamed_euler) {
      // |f(X)| = |X|^beta
      drift_factor /= 1.0 + config.dt * std::pow(norm, config.beta);
    }
  }
  for (std::size_t i = 0; i < state.size(); ++i) {
    state[i] += config.dt * drift_factor * state[i] + diffusion * increment[i];
  }
}

std::vector<double> sde_step(std::span<const double> state, const SdeConfig& config,
                             std::span<const double> increment) {
  std::vector<double> next(state.begin(), state.end());
  sde_step_in_place(next, config, increment);
  return next;
}

SdePath simulate_sde_path(const SdeConfig& config, std::uint64_t seed, const IncrementTransform& transform) {
  config.validate();
  const CounterNormal normal(seed);
  const std::size_t n = config.num_steps();
  const double sqrt_dt = std::sqrt(config.dt);

  SdePath path;
  path.seed = seed;
  std::vector<double> x = config.x0;
  std::vector<double> dB(config.dimension);
  path.reason = SdeStop::horizon;
  path.exit_time = static_cast<double>(n) * config.dt;
  path.steps = n;

  for (std::size_t step = 0; step < n; ++step) {
    for (std::size_t i = 0; i < config.dimension; ++i) dB[i] = sqrt_dt * normal(step, i);
    if (transform) transform(dB);
    sde_step_in_place(x, config, dB);
    const double norm = euclidean_norm(x);
    if (!std::isfinite(norm)) {
      path.reason = SdeStop::nonfinite;
    } else if (norm > config.exit_radius) {
      path.reason = SdeStop::exit;
    } else {
      continue;
    }
    path.exit_time = static_cast<double>(step + 1) * config.dt;
    path.steps = step + 1;
    break;
  }
  path.final_state = x;
  path.final_norm_sq = path.reason == SdeStop::nonfinite
                           ? config.exit_radius * config.exit_radius
                           : std::inner_product(x.begin(), x.end(), x.begin(), 0.0);
  return path;
}

MomentEstimate moment_estimate(const SdeConfig& config, std::size_t num_trials, std::uint64_t seed,
                               unsigned workers, std::vector<SdePath>* paths) {
  if (num_trials < 2) throw std::invalid_argument("moment estimate needs at least two trials");
  config.validate();
  std::vector<SdePath> results(num_trials);
  parallel_for(num_trials, workers, [&](std::size_t i) {
    results[i] = simulate_sde_path(config, derive_seed(seed, i));
  });

  MomentEstimate est;
  est.trials = num_trials;
  double sum = 0.0;
  for (const auto& p : results) {
    sum += p.final_norm_sq;
    est.exits += p.reason == SdeStop::exit ? 1 : 0;
    est.nonfinite += p.reason == SdeStop::nonfinite ? 1 : 0;
  }
  est.mean = sum / static_cast<double>(num_trials);
  double ss = 0.0;
  for (const auto& p : results) ss += (p.final_norm_sq - est.mean) * (p.final_norm_sq - est.mean);
  const double variance = ss / static_cast<double>(num_trials - 1);
  est.standard_error = std::sqrt(variance / static_cast<double>(num_trials));
  if (paths) *paths = std::move(results);
  return est;
}

void write_sde_trials_csv(const std::string& path, std::span<const SdePath> paths) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path, "");
  out << "trial,seed,exit_time,exit_reason,final_norm_sq\n" << std::setprecision(17);
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const auto& p = paths[i];
    out << i << ',' << p.seed << ',' << p.exit_time << ',' << to_string(p.reason) << ','
        << p.final_norm_sq << '\n';
  }
  if (!out) throw IoError("write failed for " + path, "");
}

}  // namespace srde
