#pragma once

#include <span>
#include <string>

namespace srde {

enum class DriftKind { power_dissipative, zero };
enum class DiffusionKind { polynomial, additive };

std::string to_string(DriftKind kind);
std::string to_string(DiffusionKind kind);
DriftKind parse_drift_kind(const std::string& text);
DiffusionKind parse_diffusion_kind(const std::string& text);

/// Reaction term f and noise coefficient sigma of the SRDE.
///
/// power_dissipative: f(u) = -k1 |u|^(beta-1) u
/// polynomial:        sigma(u) = k2 (1 + |u|^gamma)
/// additive:          sigma(u) = k2
///
/// k2 = 0 switches the noise off. gamma in [0, 1] is accepted for diagnostic
/// runs; the assumption checker flags it as outside the theorem's hypotheses.
struct ModelSpec {
  double beta = 3.0;
  double gamma = 1.5;
  double k1 = 1.0;
  double k2 = 1.0;
  double c0 = 1.0;
  DriftKind drift = DriftKind::power_dissipative;
  DiffusionKind diffusion = DiffusionKind::polynomial;

  /// Throws std::invalid_argument naming the first bad field.
  void validate() const;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

double drift_eval(const ModelSpec& model, double u) noexcept;
double sigma_eval(const ModelSpec& model, double u) noexcept;

/// Exact time-`t` flow of du/dt = f(u) for the built-in drifts.
double drift_flow(const ModelSpec& model, double u, double t) noexcept;

/// max over samples with |u| > c0 of f(u) sgn(u) + k1 |u|^beta.
/// Nonpositive means the sampled dissipativity check passes; -infinity when no
/// sample lies outside [-c0, c0].
double dissipativity_margin(const ModelSpec& model, std::span<const double> samples);

}  // namespace srde
