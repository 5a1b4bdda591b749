#include "srde/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "srde/ode_oracle.hpp"

namespace srde {

std::string to_string(DriftKind kind) {
  return kind == DriftKind::power_dissipative ? "power_dissipative" : "zero";
}

std::string to_string(DiffusionKind kind) {
  return kind == DiffusionKind::polynomial ? "polynomial" : "additive";
}

DriftKind parse_drift_kind(const std::string& text) {
  if (text == "power_dissipative") return DriftKind::power_dissipative;
  if (text == "zero") return DriftKind::zero;
  throw std::invalid_argument("unknown drift kind '" + text + "'");
}

DiffusionKind parse_diffusion_kind(const std::string& text) {
  if (text == "polynomial") return DiffusionKind::polynomial;
  if (text == "additive") return DiffusionKind::additive;
  throw std::invalid_argument("unknown diffusion kind '" + text + "'");
}

void ModelSpec::validate() const {
  if (!(beta > 1.0)) throw std::invalid_argument("beta must exceed 1");
  if (!(gamma >= 0.0)) throw std::invalid_argument("gamma must be nonnegative");
  if (!(k1 > 0.0)) throw std::invalid_argument("k1 must be positive");
  if (!(k2 >= 0.0)) throw std::invalid_argument("k2 must be nonnegative");
  if (!(c0 > 0.0)) throw std::invalid_argument("c0 must be positive");
}

double drift_eval(const ModelSpec& model, double u) noexcept {
  if (model.drift == DriftKind::zero) return 0.0;
  return -model.k1 * std::pow(std::fabs(u), model.beta - 1.0) * u;
}

double sigma_eval(const ModelSpec& model, double u) noexcept {
  if (model.diffusion == DiffusionKind::additive) return model.k2;
  return model.k2 * (1.0 + std::pow(std::fabs(u), model.gamma));
}

double drift_flow(const ModelSpec& model, double u, double t) noexcept {
  if (model.drift == DriftKind::zero || u == 0.0 || !std::isfinite(u)) return u;
  // du/dt = -k1 |u|^(beta-1) u is the unit-rate equation run for time k1 t.
  const double m = model.beta - 1.0;
  return std::copysign(std::pow(std::pow(std::fabs(u), -m) + m * model.k1 * t, -1.0 / m), u);
}

double dissipativity_margin(const ModelSpec& model, std::span<const double> samples) {
  double worst = -std::numeric_limits<double>::infinity();
  for (double u : samples) {
    if (!(std::fabs(u) > model.c0)) continue;
    const double sgn = u > 0.0 ? 1.0 : -1.0;
    const double margin = drift_eval(model, u) * sgn + model.k1 * std::pow(std::fabs(u), model.beta);
    worst = std::max(worst, margin);
  }
  return worst;
}

}  // namespace srde
