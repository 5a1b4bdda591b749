#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "srde/model.hpp"

namespace srde {

enum class SdeScheme { euler_maruyama, tamed_euler };

std::string to_string(SdeScheme scheme);
SdeScheme parse_sde_scheme(const std::string& text);

/// dX = -|X|^(beta-1) X dt + s (1 + |X|)^gamma dB in R^d, stopped on leaving
/// the ball of radius exit_radius.
struct SdeConfig {
  std::size_t dimension = 1;
  double beta = 3.0;
  double gamma = 1.5;
  std::vector<double> x0 = {0.0};
  double dt = 1e-3;
  double horizon = 1.0;
  double exit_radius = 1e6;
  SdeScheme scheme = SdeScheme::tamed_euler;
  DriftKind drift = DriftKind::power_dissipative;
  double diffusion_scale = 1.0;  ///< s; zero gives the deterministic ODE

  void validate() const;
  [[nodiscard]] std::size_t num_steps() const;
};

/// Strict Ito-formula condition gamma < (beta + 1) / 2.
bool ito_condition(double beta, double gamma) noexcept;

/// One step from `state`; `increment` is sqrt(dt) times a standard normal vector.
/// Non-finite inputs propagate to a non-finite output.
std::vector<double> sde_step(std::span<const double> state, const SdeConfig& config,
                             std::span<const double> increment);
void sde_step_in_place(std::span<double> state, const SdeConfig& config,
                       std::span<const double> increment);

enum class SdeStop { horizon, exit, nonfinite };
std::string to_string(SdeStop reason);

struct SdePath {
  std::uint64_t seed = 0;
  double exit_time = 0.0;  ///< min(tau_R, T) on the step grid
  SdeStop reason = SdeStop::horizon;
  std::vector<double> final_state;
  double final_norm_sq = 0.0;  ///< |X(T ^ tau_R)|^2; R^2 for non-finite exits
  std::size_t steps = 0;
};

/// Optional map applied to every Gaussian increment before use (e.g. a fixed rotation).
using IncrementTransform = std::function<void(std::span<double>)>;

/// Deterministic in (config, seed). Exit detection is post-step.
SdePath simulate_sde_path(const SdeConfig& config, std::uint64_t seed,
                          const IncrementTransform& transform = {});

struct MomentEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
  std::size_t trials = 0;
  std::size_t exits = 0;
  std::size_t nonfinite = 0;
};

/// Monte Carlo estimate of E|X(T ^ tau_R)|^2 over trials seeded derive_seed(seed, i).
MomentEstimate moment_estimate(const SdeConfig& config, std::size_t num_trials, std::uint64_t seed,
                               unsigned workers = 1, std::vector<SdePath>* paths = nullptr);

/// CSV rows "trial,seed,exit_time,exit_reason,final_norm_sq".
void write_sde_trials_csv(const std::string& path, std::span<const SdePath> paths);

}  // namespace srde
