#pragma once

#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "srde/convolution_lab.hpp"
#include "srde/model.hpp"
#include "srde/sde_sim.hpp"
#include "srde/spde_solver.hpp"
#include "srde/spectral_core.hpp"

namespace srde {

// ---------------------------------------------------------------------------
// Statistics and classification

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

/// Wilson score interval for k successes in n trials (z = 1.96 by default).
Interval wilson_interval(std::size_t successes, std::size_t trials, double z = 1.959963984540054);

struct CellClass {
  bool below_ito = false;       ///< gamma < (beta + 1)/2
  bool below_theorem = false;   ///< gamma < 1 + (1 - eta)(beta - 1)/2
  bool below_combined = false;  ///< gamma < max{3/2, (3 + beta)/4}
  bool boundary_ito = false;    ///< gamma sits on the line (classified false)
  bool boundary_theorem = false;
  bool boundary_combined = false;

  friend bool operator==(const CellClass&, const CellClass&) = default;
};

double ito_threshold(double beta);
double theorem_threshold(double beta, double eta);
double combined_threshold(double beta);

/// Strict comparisons against the three lines. A gamma within 1e-12
/// (relative) of a line counts as on the line. Requires beta > 1.
CellClass classify_cell(double beta, double gamma, double eta);

// ---------------------------------------------------------------------------
// Explosion estimates

struct ExplosionEstimate {
  std::size_t trials = 0;
  std::size_t explosions = 0;
  Interval interval;
  double mean_blowup_time = 0.0;  ///< NaN when nothing exploded
};

/// Trial i runs simulate_spde with seed derive_seed(master_seed, i). The result
/// does not depend on `workers`.
ExplosionEstimate estimate_explosion_probability(const SpdeProblem& problem, std::span<const double> u0,
                                                 std::size_t trials, std::uint64_t master_seed,
                                                 unsigned workers = 1,
                                                 std::vector<TrajectoryRecord>* records = nullptr);

struct SweepSpec {
  std::vector<double> beta_values;
  std::vector<double> gamma_values;
  std::size_t trials = 200;
  ModelSpec model;  ///< beta and gamma are overwritten per cell
  NoiseSpectrum spectrum;
  SolverConfig solver;
  double domain_length = std::numbers::pi;
  double u0_amplitude = 5.0;  ///< u0 = A sin(pi x / L)
  std::uint64_t master_seed = 1;
  unsigned workers = 1;

  /// Throws std::invalid_argument.
  void validate() const;
  /// Everything that influences the results (not the worker count).
  [[nodiscard]] std::uint64_t digest() const;
};

struct ExplosionCell {
  double beta = 0.0;
  double gamma = 0.0;
  std::size_t trials = 0;
  std::size_t explosions = 0;
  double wilson_lo = 0.0;
  double wilson_hi = 1.0;
  double mean_blowup_time = 0.0;
  CellClass classes;

  /// Bitwise comparison that treats NaN mean times as equal.
  [[nodiscard]] bool same_as(const ExplosionCell& other) const noexcept;
};

struct ExplosionMap {
  double eta = 0.0;
  std::vector<ExplosionCell> cells;  ///< row-major over (beta, gamma)

  [[nodiscard]] bool same_as(const ExplosionMap& other) const noexcept;
};

struct SweepOptions {
  std::string results_path;  ///< empty: no persistence
  bool resume = false;       ///< keep completed cells found in results_path
  /// Called after each cell has been persisted, with the number of completed cells.
  std::function<void(std::size_t)> on_cell;
};

/// Cell (i, j) uses the trial seeds derive_seed(master_seed, t), shared across
/// cells. Rows are appended and flushed one cell at a time by the calling
/// thread; trials inside a cell run on the worker pool. On an I/O failure the
/// rows already written are kept and IoError carries the resume token
/// "cell=<index>".
ExplosionMap run_sweep(const SweepSpec& spec, const SweepOptions& options = {});

inline constexpr const char* results_header =
    "beta,gamma,trials,explosions,wilson_lo,wilson_hi,mean_blowup_time,below_ito,below_theorem,below_combined";

void persist_results(const ExplosionMap& map, const std::string& path);
/// Reads a results CSV; classification booleans come from the file, the
/// boundary flags are recomputed from `eta`.
ExplosionMap load_results(const std::string& path, double eta);
/// 64-bit FNV-1a of the file contents.
std::uint64_t file_digest(const std::string& path);

// ---------------------------------------------------------------------------
// Run configuration

/// Every setting the command line can use. The text form is flat
/// `key = value` lines; `#` starts a comment.
struct RunConfig {
  double domain_length = std::numbers::pi;
  ModelSpec model;
  std::string lambdas = "white";  ///< white | power-law | csv:<path>
  double lambda_decay = 2.0;
  double rho = NoiseSpectrum::rho_infinity;
  double theta = 0.6;
  SolverConfig solver;
  double u0_amplitude = 5.0;

  std::size_t dimension = 1;
  std::vector<double> x0 = {0.0};
  double sde_dt = 1e-3;
  double sde_horizon = 1.0;
  double exit_radius = 1e6;
  SdeScheme sde_scheme = SdeScheme::tamed_euler;
  double sde_diffusion_scale = 1.0;
  std::size_t sde_trials = 1000;

  std::vector<double> beta_values = {2.0, 3.0, 5.0};
  std::vector<double> gamma_values = {1.2, 1.5, 2.0};
  std::size_t trials = 200;
  std::uint64_t master_seed = 1;
  unsigned workers = 1;

  double alpha = 0.15;
  double zeta = 0.1;
  double p = 12.0;
  double conv_dt = 1e-3;
  double conv_horizon = 1.0;
  ZAlphaRule conv_rule = ZAlphaRule::cell_average;
  std::size_t conv_trials = 200;
  std::size_t conv_points = 10;
  std::vector<double> conv_horizons = {1.0, 2.0, 4.0, 8.0};

  [[nodiscard]] NoiseSpectrum spectrum() const;
  [[nodiscard]] SdeConfig sde_config() const;
  [[nodiscard]] SweepSpec sweep_spec() const;
  [[nodiscard]] ConvolutionConfig convolution_config() const;
  [[nodiscard]] SpdeProblem problem() const;
  [[nodiscard]] std::uint64_t digest() const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Names of all accepted keys, in file order.
const std::vector<std::string>& config_keys();

/// Throws ConfigError naming the key for unknown keys, duplicates, bad types
/// and values that fail validation.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
std::string format_config(const RunConfig& config);
void save_config(const RunConfig& config, const std::string& path);

}  // namespace srde
