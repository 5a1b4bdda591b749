#include "srde/ode_oracle.hpp"

#include <cmath>
#include <stdexcept>

namespace srde {

namespace {

void require_superlinear(double beta) {
  if (!(beta > 1.0)) throw std::invalid_argument("beta must exceed 1");
}

}  // namespace

double exact_solution(double phi0, double beta, double t) {
  require_superlinear(beta);
  if (!(t >= 0.0)) throw std::invalid_argument("t must be nonnegative");
  if (phi0 == 0.0) return 0.0;
  const double m = beta - 1.0;
  const double magnitude = std::pow(std::pow(std::fabs(phi0), -m) + m * t, -1.0 / m);
  return std::copysign(magnitude, phi0);
}

double decay_envelope(double u0_sup, double beta, double k1, double t) {
  require_superlinear(beta);
  if (!(u0_sup > 0.0)) throw std::invalid_argument("u0_sup must be positive");
  if (!(k1 > 0.0)) throw std::invalid_argument("k1 must be positive");
  if (!(t >= 0.0)) throw std::invalid_argument("t must be nonnegative");
  const double m = beta - 1.0;
  const double rate = k1 / (std::pow(2.0, beta) * m);
  const double base = std::pow(u0_sup, -m) + rate * t;  // pow(inf, -m) == 0
  return 1.5 * std::pow(base, -1.0 / m);
}

double uniform_bound(double beta, double k1, double t) {
  if (!(t > 0.0)) throw std::invalid_argument("uniform bound diverges at t = 0");
  return decay_envelope(INFINITY, beta, k1, t);
}

}  // namespace srde
