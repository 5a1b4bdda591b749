#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "oracles.hpp"
#include "srde/model.hpp"
#include "srde/ode_oracle.hpp"

using namespace srde;

TEST_CASE("drift and diffusion values") {
  ModelSpec m;
  m.beta = 3;
  CHECK(drift_eval(m, 2.0) == -8.0);
  CHECK(drift_eval(m, 0.0) == 0.0);
  m.gamma = 2;
  CHECK(sigma_eval(m, -3.0) == 10.0);
  CHECK(sigma_eval(m, 0.0) == 1.0);
  m.diffusion = DiffusionKind::additive;
  m.k2 = 0.5;
  CHECK(sigma_eval(m, 123.0) == 0.5);
  m.drift = DriftKind::zero;
  CHECK(drift_eval(m, 5.0) == 0.0);
  CHECK(drift_eval(m, 0.0) == 0.0);
}

TEST_CASE("symmetry and monotonicity") {
  ModelSpec m;
  m.beta = 2.5;
  m.gamma = 1.7;
  std::vector<double> samples;
  for (int i = -50; i <= 50; ++i) samples.push_back(0.37 * i);
  for (double u : samples) {
    CHECK(drift_eval(m, -u) == -drift_eval(m, u));
    CHECK(sigma_eval(m, -u) == sigma_eval(m, u));
    CHECK(sigma_eval(m, u) >= 0.0);
  }
  for (std::size_t i = 1; i < samples.size(); ++i)
    CHECK(drift_eval(m, samples[i]) <= drift_eval(m, samples[i - 1]));
}

TEST_CASE("dissipativity margin") {
  ModelSpec m;
  m.beta = 3;
  m.k1 = 2;
  m.c0 = 1;
  const std::vector<double> samples{-7, -2, -1.5, 0.2, 1.5, 3, 100};
  CHECK(dissipativity_margin(m, samples) == 0.0);
  m.drift = DriftKind::zero;
  const std::vector<double> two{2.0};
  CHECK(dissipativity_margin(m, two) == doctest::Approx(2.0 * 8.0));
  const std::vector<double> inside{-1.0, 0.5, 1.0};
  CHECK(dissipativity_margin(m, inside) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("model validation") {
  ModelSpec m;
  m.beta = 1.0;
  CHECK_THROWS_AS(m.validate(), std::invalid_argument);
  m = ModelSpec{};
  m.k1 = 0;
  CHECK_THROWS_AS(m.validate(), std::invalid_argument);
  m = ModelSpec{};
  m.k2 = 0;
  CHECK_NOTHROW(m.validate());
  CHECK(parse_drift_kind("zero") == DriftKind::zero);
  CHECK_THROWS_AS(parse_diffusion_kind("cubic"), std::invalid_argument);
}

TEST_CASE("drift flow is the exact ODE flow") {
  ModelSpec m;
  m.beta = 3;
  m.k1 = 1;
  CHECK(drift_flow(m, 1.0, 1.5) == doctest::Approx(0.5).epsilon(1e-14));
  m.k1 = 2;
  // Rate k1 rescales time.
  CHECK(drift_flow(m, 3.0, 0.25) == doctest::Approx(exact_solution(3.0, 3.0, 0.5)).epsilon(1e-14));
  m.drift = DriftKind::zero;
  CHECK(drift_flow(m, 4.0, 1.0) == 4.0);
}

TEST_CASE("exact solution against adaptive integration") {
  CHECK(exact_solution(1.0, 3.0, 0.0) == 1.0);
  CHECK(exact_solution(1.0, 3.0, 1.5) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(exact_solution(-2.0, 2.0, 1.0) == doctest::Approx(-2.0 / 3.0).epsilon(1e-14));
  CHECK(exact_solution(0.0, 3.0, 2.0) == 0.0);
  CHECK_THROWS_AS(exact_solution(1.0, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(exact_solution(1.0, 3.0, -1.0), std::invalid_argument);

  const std::vector<double> times{1.5};
  CHECK(oracle::integrate_power_ode(1.0, 3.0, times)[0] == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(oracle::integrate_power_ode(-2.0, 2.0, std::vector<double>{1.0})[0] ==
        doctest::Approx(-2.0 / 3.0).epsilon(1e-8));
}

TEST_CASE("exact solution structure") {
  for (double beta : {1.5, 2.0, 3.0, 5.0}) {
    for (double phi0 : {-50.0, -1.0, 0.3, 7.0}) {
      for (double s : {0.0, 0.1, 2.0}) {
        for (double t : {0.05, 1.0, 4.0}) {
          const double two = exact_solution(exact_solution(phi0, beta, s), beta, t);
          const double one = exact_solution(phi0, beta, s + t);
          CHECK(std::fabs(two - one) <= 1e-12 * std::fabs(one));
        }
      }
      CHECK(exact_solution(-phi0, beta, 0.7) == -exact_solution(phi0, beta, 0.7));
      double previous = std::fabs(phi0);
      for (double t = 0.0; t < 5.0; t += 0.25) {
        const double v = std::fabs(exact_solution(phi0, beta, t));
        CHECK(v <= previous);
        previous = v;
      }
    }
  }
}

TEST_CASE("decay envelope and uniform bound") {
  CHECK(decay_envelope(4.0, 3.0, 1.0, 0.0) == doctest::Approx(6.0).epsilon(1e-15));
  CHECK(decay_envelope(1.0, 3.0, 1.0, 16.0) == doctest::Approx(1.5 / std::sqrt(2.0)).epsilon(1e-14));
  CHECK(decay_envelope(std::numeric_limits<double>::infinity(), 3.0, 1.0, 2.0) ==
        doctest::Approx(uniform_bound(3.0, 1.0, 2.0)).epsilon(1e-15));
  CHECK(uniform_bound(3.0, 1.0, 2.0) == doctest::Approx(1.5 * std::pow(2.0 / 16.0, -0.5)).epsilon(1e-14));
  CHECK_THROWS_AS(decay_envelope(0.0, 3.0, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(uniform_bound(3.0, 1.0, 0.0), std::invalid_argument);

  // Inside the prefactor sits the ODE flow run for time k1 t / (2^beta (beta-1)^2).
  const double comparison = oracle::integrate_power_ode(1.0, 3.0, std::vector<double>{16.0 / 32.0})[0];
  CHECK(1.5 * comparison == doctest::Approx(decay_envelope(1.0, 3.0, 1.0, 16.0)).epsilon(1e-8));

  for (double beta : {2.0, 3.0, 6.0}) {
    for (double u0 : {0.1, 1.0, 1e3}) {
      double previous = decay_envelope(u0, beta, 1.0, 0.0);
      for (double t = 0.1; t < 10; t += 0.7) {
        const double v = decay_envelope(u0, beta, 1.0, t);
        CHECK(v <= previous);
        CHECK(v <= 1.5 * u0);
        CHECK(v <= uniform_bound(beta, 1.0, t));
        CHECK(decay_envelope(2 * u0, beta, 1.0, t) >= v);
        previous = v;
      }
    }
    CHECK(uniform_bound(beta, 1.0, 2.0) / uniform_bound(beta, 1.0, 1.0) ==
          doctest::Approx(std::pow(2.0, -1.0 / (beta - 1.0))).epsilon(1e-14));
  }
  const double slope = std::log(uniform_bound(3.0, 1.0, 8.0) / uniform_bound(3.0, 1.0, 0.5)) / std::log(16.0);
  CHECK(slope == doctest::Approx(-0.5).epsilon(1e-14));
}
