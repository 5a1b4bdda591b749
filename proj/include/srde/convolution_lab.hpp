#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "srde/model.hpp"
#include "srde/rng.hpp"
#include "srde/spectral_core.hpp"

namespace srde {

/// sigma(u(t_m)) sampled at the left end of every step m = 0..steps-1.
///
/// A spatially constant path (scalar per step) is the common case for the
/// moment experiments; full grid fields cover state-dependent coefficients.
class SigmaPath {
 public:
  static SigmaPath constant(double value, std::size_t steps);
  static SigmaPath scalar_series(std::vector<double> values);
  /// fields[m] holds grid values at step m; all rows must have equal length.
  static SigmaPath fields(std::vector<std::vector<double>> fields);

  [[nodiscard]] std::size_t steps() const noexcept { return steps_; }
  [[nodiscard]] bool is_field() const noexcept { return !fields_.empty(); }
  /// Scalar value at step m (scalar paths only).
  [[nodiscard]] double scalar(std::size_t m) const;
  [[nodiscard]] std::span<const double> field(std::size_t m) const;
  [[nodiscard]] bool is_zero() const noexcept;

 private:
  std::size_t steps_ = 0;
  std::vector<double> scalars_;
  std::vector<std::vector<double>> fields_;
};

/// Coefficient-space path on the uniform grid t_n = n dt, n = 0..steps.
struct CoefficientPath {
  double dt = 0.0;
  std::vector<std::vector<double>> coeffs;  ///< coeffs[n][k], k < num_modes

  [[nodiscard]] std::size_t steps() const noexcept { return coeffs.empty() ? 0 : coeffs.size() - 1; }
  [[nodiscard]] double time(std::size_t n) const noexcept { return static_cast<double>(n) * dt; }
};

/// How the (t_n - s)^-alpha weight of Z_alpha is applied on each step.
enum class ZAlphaRule {
  cell_average,   ///< exact average of (t_n - s)^-alpha over [t_m, t_{m+1}]
  left_endpoint,  ///< (t_n - t_m)^-alpha
};
std::string to_string(ZAlphaRule rule);
ZAlphaRule parse_z_alpha_rule(const std::string& text);

struct ConvolutionConfig {
  double alpha = 0.2;
  double zeta = 0.2;
  double p = 12.0;
  double dt = 1e-3;
  double horizon = 1.0;
  std::size_t noise_modes = 32;
  ZAlphaRule rule = ZAlphaRule::cell_average;

  /// Strict window 0 < alpha < (1-eta)/2, 0 < zeta < 2 alpha, p >= 2,
  /// p > max{1/zeta, 1/(alpha - zeta/2)} (one space dimension).
  /// Throws std::invalid_argument.
  void validate(double eta) const;
  [[nodiscard]] std::size_t num_steps() const;

  friend bool operator==(const ConvolutionConfig&, const ConvolutionConfig&) = default;
};

/// Coefficients of sigma_m * dW_m for step m, length basis.num_modes().
void increment_coefficients(const SigmaPath& sigma, const SpectralBasis& basis,
                            const NoiseSpectrum& spectrum, std::size_t noise_modes, double dt,
                            const CounterNormal& stream, std::size_t m, std::span<double> out);

/// Z(t_n) = sum_{m<n} S(t_n - t_{m+1}) [sigma_m dW_m], coefficient space.
CoefficientPath stochastic_convolution_direct(const SigmaPath& sigma, const SpectralBasis& basis,
                                              const NoiseSpectrum& spectrum, std::size_t noise_modes,
                                              double dt, const CounterNormal& stream);

/// Z_alpha(t_n) = sum_{m<n} w_{n,m} S(t_n - t_{m+1}) [sigma_m 1{m < cutoff} dW_m].
///
/// `cutoff` has one entry per step (1 while s <= tau); empty means all ones.
/// Throws std::invalid_argument unless 0 < alpha < (1 - eta)/2.
CoefficientPath z_alpha_path(const SigmaPath& sigma, const SpectralBasis& basis,
                             const NoiseSpectrum& spectrum, std::size_t noise_modes, double alpha,
                             double dt, const CounterNormal& stream, std::span<const std::uint8_t> cutoff = {},
                             ZAlphaRule rule = ZAlphaRule::cell_average);

/// Weight applied to an increment `lag` = n - m - 1 steps behind t_n.
double z_alpha_weight(double alpha, double dt, std::size_t lag, ZAlphaRule rule);

/// (sin(pi alpha)/pi) int_0^t (t-s)^(alpha-1) S(t-s) Z_alpha(s) ds on the grid.
///
/// Z_alpha is taken piecewise linear in time; each cell's weakly singular
/// integral against r^(alpha-1) e^(-a r) is evaluated exactly with incomplete
/// gamma functions.
CoefficientPath factorization_reconstruct(const CoefficientPath& z_alpha, const SpectralBasis& basis,
                                          double alpha);

/// pi / sin(pi (2 alpha + eta)). Throws std::invalid_argument unless 0 < 2 alpha + eta < 1.
double beta_constant(double alpha, double eta);

/// Relative L-infinity distance max_{n,x} |a - b| / max_{n,x} |b| on the grid.
double relative_sup_error(const CoefficientPath& a, const CoefficientPath& b, const SpectralBasis& basis);

struct MomentBoundReport {
  std::vector<double> times;
  std::vector<double> lhs;                 ///< Monte Carlo E|Z_alpha(t)|^p_{L^p}
  std::vector<double> lhs_standard_error;
  std::vector<double> lhs_exact;           ///< Gaussian closed form for the given sigma path
  std::vector<double> rhs;                 ///< (int_0^t (t-s)^(-eta-2 alpha) |sigma|^2 ds)^(p/2)
  std::vector<double> ratio;               ///< lhs / rhs (0 where rhs is 0)
  double log_slope = 0.0;                  ///< least-squares slope of log ratio against log t
  std::size_t trials = 0;
};

/// `sup_path[m]` is sup_x |u(t_m)|; the driving coefficient is the spatially
/// constant sigma(sup_path[m]). Reports at `points` equally spaced times.
/// Checks the alpha window and p >= 2 (zeta is not used here). Throws
/// std::invalid_argument when trials < 100.
MomentBoundReport moment_bound_check(const ConvolutionConfig& config, const ModelSpec& model,
                                     const NoiseSpectrum& spectrum, const SpectralBasis& basis,
                                     std::span<const double> sup_path, std::size_t trials,
                                     std::uint64_t seed, unsigned workers = 1, std::size_t points = 10);

struct ScalingFit {
  std::vector<double> horizons;
  std::vector<double> moments;          ///< E sup_{[0,t]} sup_x |Z|^p
  std::vector<double> standard_errors;
  double slope = 0.0;
  double slope_standard_error = 0.0;
  double ci_lo = 0.0;                   ///< 95% interval for the slope
  double ci_hi = 0.0;
  double bound_slope = 0.0;             ///< p (alpha - zeta/2)
  std::size_t trials = 0;

  /// Empirical slope does not exceed the bound beyond its interval.
  [[nodiscard]] bool consistent() const noexcept { return ci_lo <= bound_slope; }
};

/// sigma = sigma_scale constant. `horizons` must be an increasing geometric
/// ladder of at least four values on the config.dt grid. Each trial runs one
/// path to the last horizon and records the running sup at every horizon.
ScalingFit sup_moment_scaling(const ConvolutionConfig& config, double sigma_scale,
                              const NoiseSpectrum& spectrum, const SpectralBasis& basis,
                              std::span<const double> horizons, std::size_t trials, std::uint64_t seed,
                              unsigned workers = 1);

/// CSV "t,lhs,rhs,ratio".
void write_moment_report_csv(const std::string& path, const MomentBoundReport& report);

}  // namespace srde
