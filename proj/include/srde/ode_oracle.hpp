#pragma once

namespace srde {

/// Closed-form solution of dphi/dt = -|phi|^(beta-1) phi.
///
///   phi(t) = sgn(phi0) (|phi0|^-(beta-1) + (beta-1) t)^(-1/(beta-1))
///
/// phi0 = 0 is the fixed point and maps to 0. Throws std::invalid_argument for
/// beta <= 1 or t < 0.
double exact_solution(double phi0, double beta, double t);

/// Sup-norm decay envelope for the mild solution while the stochastic
/// convolution stays below a third of the solution:
///
///   (3/2) (u0^-(beta-1) + k1 t / (2^beta (beta-1)))^(-1/(beta-1))
///
/// u0_sup = +infinity is allowed and gives uniform_bound().
double decay_envelope(double u0_sup, double beta, double k1, double t);

/// Initial-data independent limit of decay_envelope as u0_sup -> infinity.
/// Requires t > 0.
double uniform_bound(double beta, double k1, double t);

}  // namespace srde
