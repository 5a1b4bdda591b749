#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "srde/model.hpp"
#include "srde/rng.hpp"
#include "srde/spectral_core.hpp"

namespace srde {

enum class SpdeScheme { exponential_tamed, semi_implicit_split };

std::string to_string(SpdeScheme scheme);
SpdeScheme parse_spde_scheme(const std::string& text);

struct SolverConfig {
  std::size_t num_modes = 32;
  std::size_t grid_size = 128;
  std::size_t noise_modes = 32;
  double dt = 1e-3;
  double horizon = 1.0;
  double explosion_threshold = 1e6;  ///< sup-norm level declared exploded
  SpdeScheme scheme = SpdeScheme::semi_implicit_split;
  bool ladder_enabled = true;
  std::size_t record_every = 1;  ///< series decimation; the last step is always kept

  /// Throws std::invalid_argument. Needs the model for the 9 c0 floor on the threshold.
  void validate(const ModelSpec& model) const;
  [[nodiscard]] std::size_t num_steps() const;
  [[nodiscard]] std::uint64_t digest() const;

  friend bool operator==(const SolverConfig&, const SolverConfig&) = default;
};

/// One synchronized snapshot: grid_values == inverse_transform(coeffs).
struct FieldState {
  double time = 0.0;
  std::uint64_t step = 0;  ///< index of the next noise increment to draw
  std::vector<double> coeffs;
  std::vector<double> grid_values;
  double sup_norm = 0.0;
  bool finite = true;
};

/// Projects grid values onto the basis and resynchronizes the grid.
FieldState make_field_state(const SpectralBasis& basis, std::span<const double> u0);

/// Shorthand for A sin(pi x / L) sampled on the basis grid.
std::vector<double> sine_profile(const SpectralBasis& basis, double amplitude);

/// lambda_j sqrt(dt) xi_{step,j} for j <= J; the coefficients of the noise increment.
std::vector<double> noise_coefficients(const NoiseSpectrum& spectrum, std::size_t noise_modes,
                                       double dt, const CounterNormal& stream, std::uint64_t step);

/// Grid values of sum_{j<=J} lambda_j sqrt(dt) xi_j e_j.
std::vector<double> noise_increment(const NoiseSpectrum& spectrum, const SpectralBasis& basis,
                                    std::size_t noise_modes, double dt, const CounterNormal& stream,
                                    std::uint64_t step);

/// Advances one step of size config.dt using noise draws (stream, state.step).
///
/// semi_implicit_split:  v = exact pointwise drift flow of u over dt,
///                       u' = S(dt) v + P_N[sigma(v) dW]
/// exponential_tamed:    u' = S(dt) P_N[u + dt f/(1 + dt|f|) + sigma(u) dW]
///
/// The noise enters after the semigroup in the split scheme, which makes the
/// drift-free step coincide with the left-point stochastic convolution.
FieldState spde_step(const FieldState& state, const ModelSpec& model, const NoiseSpectrum& spectrum,
                     const SpectralBasis& basis, const SolverConfig& config, const CounterNormal& stream);

// ---------------------------------------------------------------------------
// Tripling ladder

enum class LadderDirection { entry, up, down };
std::string to_string(LadderDirection d);

struct LadderCrossing {
  double time = 0.0;
  LadderDirection direction = LadderDirection::entry;
  int level_index = 0;  ///< level value is 3^level_index * c0
  double level = 0.0;

  friend bool operator==(const LadderCrossing&, const LadderCrossing&) = default;
};

/// Crossing times of the sup-norm through the levels 3^n c0, n >= 1.
///
/// Before the first crossing the ladder is unanchored. Once anchored at level
/// n >= 2 the next record is the first reach of level n+1 or n-1; anchored at
/// n = 1 only the reach of level 2 counts. A sample that jumps several levels
/// produces one record per level, all stamped with the sample time.
class LadderState {
 public:
  explicit LadderState(double c0);

  void update(double sup_norm, double t);

  [[nodiscard]] double c0() const noexcept { return c0_; }
  [[nodiscard]] bool anchored() const noexcept { return anchor_.has_value(); }
  /// Current anchor n, 0 while unanchored.
  [[nodiscard]] int level_index() const noexcept { return anchor_.value_or(0); }
  [[nodiscard]] const std::vector<LadderCrossing>& crossings() const noexcept { return crossings_; }

 private:
  [[nodiscard]] double level(int n) const;
  void record(double t, LadderDirection d, int n);

  double c0_;
  std::optional<int> anchor_;
  std::optional<double> last_time_;
  std::optional<double> last_value_;
  std::vector<LadderCrossing> crossings_;
};

/// Functional form of LadderState::update. Throws ContractViolation if t decreases.
LadderState ladder_update(LadderState ladder, double sup_norm, double t);

// ---------------------------------------------------------------------------
// Trajectories

enum class Verdict { survived_to_T, exploded_at_t, nonfinite_at_t };
std::string to_string(Verdict v);

struct TrajectoryRecord {
  std::uint64_t seed = 0;
  std::uint64_t config_digest = 0;
  std::vector<double> times;
  std::vector<double> sup_norms;
  std::vector<int> level_indices;
  std::vector<LadderCrossing> crossings;
  Verdict verdict = Verdict::survived_to_T;
  double verdict_time = 0.0;
  double wall_seconds = 0.0;

  [[nodiscard]] bool exploded() const noexcept { return verdict != Verdict::survived_to_T; }
  /// 64-bit FNV-1a over everything except the wall-clock duration.
  [[nodiscard]] std::uint64_t digest() const;
};

/// Problem definition shared by every trajectory of an experiment.
struct SpdeProblem {
  ModelSpec model;
  NoiseSpectrum spectrum;
  SpectralBasis basis;
  SolverConfig config;

  void validate() const;
  [[nodiscard]] std::uint64_t digest() const;
};

SpdeProblem make_problem(const ModelSpec& model, const NoiseSpectrum& spectrum,
                         double domain_length, const SolverConfig& config);

/// Steps until the horizon, sup_norm >= threshold, or a non-finite value.
TrajectoryRecord simulate_spde(std::span<const double> u0, const SpdeProblem& problem, std::uint64_t seed);

/// CSV "t,sup_norm,level_index".
void write_series_csv(const std::string& path, const TrajectoryRecord& record);
/// CSV "t,direction,level_index,level".
void write_ladder_csv(const std::string& path, const TrajectoryRecord& record);

}  // namespace srde
