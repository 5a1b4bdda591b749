#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace srde {

struct ModelSpec;

/// Eigenpairs (alpha_k, e_k) of a self-adjoint Dirichlet operator, A e_k = -alpha_k e_k.
///
/// Two flavours exist. The interval basis on (0, L) has closed forms for every
/// mode and carries a uniform collocation grid used by the transforms. A
/// tabulated basis holds user-supplied eigenvalues and eigenfunction sup-norms
/// for a general domain; it supports assumption checking only.
class SpectralBasis {
 public:
  enum class Kind { dirichlet_interval, tabulated };

  static SpectralBasis tabulated(std::vector<double> eigenvalues,
                                 std::vector<double> sup_norms);

  [[nodiscard]] Kind kind() const noexcept { return kind_; }
  [[nodiscard]] double domain_length() const noexcept { return length_; }
  [[nodiscard]] std::size_t num_modes() const noexcept { return eigenvalues_.size(); }
  [[nodiscard]] std::size_t grid_size() const noexcept { return grid_.size(); }
  [[nodiscard]] double grid_spacing() const noexcept { return spacing_; }

  [[nodiscard]] std::span<const double> eigenvalues() const noexcept { return eigenvalues_; }
  [[nodiscard]] std::span<const double> eigenfunction_sup_norms() const noexcept { return sup_norms_; }
  [[nodiscard]] std::span<const double> grid_points() const noexcept { return grid_; }

  /// alpha_k for 1-based k. Beyond num_modes only the interval basis can answer.
  [[nodiscard]] double eigenvalue(std::size_t k) const;
  [[nodiscard]] double sup_norm(std::size_t k) const;
  /// e_k(x), interval basis only.
  [[nodiscard]] double eigenfunction(std::size_t k, double x) const;

  /// Number of modes for which eigenvalue()/sup_norm() are defined.
  [[nodiscard]] std::size_t available_modes() const noexcept;

  /// e_k(x_m) for k < num_modes (0-based row), m < grid_size; row-major.
  [[nodiscard]] std::span<const double> mode_row(std::size_t k) const noexcept {
    return {table_.data() + k * grid_.size(), grid_.size()};
  }

 private:
  friend SpectralBasis dirichlet_interval_basis(double, std::size_t, std::size_t);

  Kind kind_ = Kind::dirichlet_interval;
  double length_ = 0.0;
  double spacing_ = 0.0;
  std::vector<double> eigenvalues_;
  std::vector<double> sup_norms_;
  std::vector<double> grid_;
  std::vector<double> table_;
};

/// Sine eigenbasis of d^2/dx^2 on (0, length) with grid x_m = m*length/(grid_size+1).
SpectralBasis dirichlet_interval_basis(double length, std::size_t num_modes,
                                       std::size_t grid_size);

/// Coefficients multiplied by exp(-alpha_k t).
std::vector<double> semigroup_apply(const SpectralBasis& basis, double t,
                                    std::span<const double> coeffs);
void semigroup_apply_in_place(const SpectralBasis& basis, double t, std::span<double> coeffs);

/// Truncated kernel K(t,x,y) = sum_{k<=truncation} exp(-alpha_k t) e_k(x) e_k(y).
double heat_kernel(const SpectralBasis& basis, double t, double x, double y,
                   std::size_t truncation);

/// Rectangle-rule projection onto the first num_modes eigenfunctions.
std::vector<double> forward_transform(const SpectralBasis& basis,
                                      std::span<const double> grid_values);
/// Evaluation of a coefficient vector (length <= num_modes) on the grid.
std::vector<double> inverse_transform(const SpectralBasis& basis, std::span<const double> coeffs);

void forward_transform_into(const SpectralBasis& basis, std::span<const double> grid_values,
                            std::span<double> coeffs);
void inverse_transform_into(const SpectralBasis& basis, std::span<const double> coeffs,
                            std::span<double> grid_values);

/// Noise coefficients lambda_j in W = sum_j lambda_j e_j B_j.
struct NoiseSpectrum {
  enum class Kind { white, power_law, tabulated };

  static constexpr double rho_infinity = std::numeric_limits<double>::infinity();

  Kind kind = Kind::white;
  double decay = 0.0;           ///< power_law exponent: lambda_j = j^-decay
  std::vector<double> table;    ///< tabulated lambda_1..lambda_n; zero beyond
  double rho = rho_infinity;
  double theta = 0.6;

  static NoiseSpectrum white(double theta);
  static NoiseSpectrum power_law(double decay, double rho, double theta);
  static NoiseSpectrum tabulated(std::vector<double> lambdas, double rho, double theta);

  /// lambda_j, 1-based.
  [[nodiscard]] double lambda(std::size_t j) const;
  /// Largest j with a possibly nonzero lambda_j, or 0 when unbounded.
  [[nodiscard]] std::size_t finite_rank() const noexcept;
  [[nodiscard]] bool rho_is_infinite() const noexcept { return rho == rho_infinity; }
  [[nodiscard]] std::string kind_name() const;

  friend bool operator==(const NoiseSpectrum&, const NoiseSpectrum&) = default;
};

/// Two-column CSV "index,lambda" with optional header line.
NoiseSpectrum load_spectrum_csv(const std::string& path, double rho, double theta);

/// theta (rho - 2) / rho, with the rho = infinity limit theta.
/// Throws AssumptionViolation (carrying the value) when the result is >= 1.
double compute_eta(const NoiseSpectrum& spectrum);

struct SeriesCheck {
  double value = 0.0;         ///< reported quantity (see AssumptionReport)
  double partial_sum = 0.0;   ///< sum over the first `terms` terms
  double half_sum = 0.0;      ///< sum over the first terms/2 terms
  double tail_estimate = 0.0; ///< integral tail from the fitted decay exponent
  double decay_exponent = 0.0;
  std::size_t terms = 0;
  bool diverges = false;
};

struct AssumptionReport {
  double eta = 0.0;
  bool eta_ok = false;
  SeriesCheck lambda_sum;   ///< (sum lambda^rho |e|^2)^(2/rho), or sup lambda at rho = infinity
  SeriesCheck alpha_sum;    ///< sum alpha^-theta |e|^2
  double gamma_threshold = 0.0;
  bool gamma_beta_ok = false;
  bool within_hypotheses = false;  ///< beta > 1 and gamma > 1
  bool drift_dissipative = false;
  std::vector<std::string> diagnostics;

  [[nodiscard]] bool all_ok() const noexcept {
    return eta_ok && !lambda_sum.diverges && !alpha_sum.diverges && gamma_beta_ok &&
           within_hypotheses && drift_dissipative;
  }
};

/// Evaluates the summability, eta and growth-balance conditions. Never throws
/// on a failed condition; every failure is recorded in `diagnostics`.
AssumptionReport check_assumptions(const SpectralBasis& basis, const NoiseSpectrum& spectrum,
                                   const ModelSpec& model, std::size_t tail_terms = 100000);

}  // namespace srde
