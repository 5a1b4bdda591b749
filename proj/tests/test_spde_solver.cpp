#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "srde/errors.hpp"
#include "srde/ode_oracle.hpp"
#include "srde/spde_solver.hpp"

using namespace srde;
constexpr double pi = std::numbers::pi;

namespace {

SolverConfig small_config() {
  SolverConfig c;
  c.num_modes = 16;
  c.grid_size = 64;
  c.noise_modes = 16;
  c.dt = 1e-3;
  c.horizon = 0.5;
  return c;
}

double sup_abs(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s = std::max(s, std::fabs(x));
  return s;
}

}  // namespace

TEST_CASE("noise increments") {
  const auto b = dirichlet_interval_basis(pi, 8, 32);
  const CounterNormal stream(4);
  const auto zero = NoiseSpectrum::tabulated({0, 0, 0}, 2.0, 0.6);
  for (double v : noise_increment(zero, b, 3, 1e-2, stream, 0)) CHECK(v == 0.0);
  CHECK_THROWS_AS(noise_increment(NoiseSpectrum::white(0.6), b, 9, 1e-2, stream, 0), std::invalid_argument);

  // One mode: the increment is a multiple of e_1 whose coefficient has variance dt.
  const double dt = 1e-2;
  double sum = 0, sumsq = 0;
  const std::size_t draws = 10000;
  for (std::size_t i = 0; i < draws; ++i) {
    const auto inc = noise_increment(NoiseSpectrum::white(0.6), b, 1, dt, stream, i);
    const auto c = forward_transform(b, inc);
    for (std::size_t k = 1; k < 8; ++k) CHECK(std::fabs(c[k]) < 1e-12);
    sum += c[0];
    sumsq += c[0] * c[0];
  }
  const double mean = sum / draws;
  CHECK(std::fabs((sumsq / draws - mean * mean) / dt - 1.0) < 0.05);
}

TEST_CASE("noise covariance matches the spectral sum") {
  const auto b = dirichlet_interval_basis(pi, 8, 32);
  const auto spectrum = NoiseSpectrum::power_law(0.5, 2.0, 0.6);
  const double dt = 1e-2;
  const CounterNormal stream(17);
  const std::pair<std::size_t, std::size_t> pairs[] = {{5, 5}, {5, 12}, {10, 20}};
  double acc[3] = {0, 0, 0};
  const std::size_t draws = 100000;
  for (std::size_t i = 0; i < draws; ++i) {
    const auto inc = noise_increment(spectrum, b, 8, dt, stream, i);
    for (int p = 0; p < 3; ++p) acc[p] += inc[pairs[p].first] * inc[pairs[p].second];
  }
  for (int p = 0; p < 3; ++p) {
    double expected = 0;
    for (std::size_t j = 1; j <= 8; ++j) {
      const double l = spectrum.lambda(j);
      expected += dt * l * l * b.mode_row(j - 1)[pairs[p].first] * b.mode_row(j - 1)[pairs[p].second];
    }
    CHECK(std::fabs(acc[p] / draws - expected) <= 0.05 * std::fabs(expected));
  }
}

TEST_CASE("pure heat decay of the first mode") {
  ModelSpec m;
  m.drift = DriftKind::zero;
  m.k2 = 0;
  SolverConfig c = small_config();
  c.dt = 1e-4;
  const auto b = dirichlet_interval_basis(pi, c.num_modes, c.grid_size);
  std::vector<double> u0(c.grid_size);
  for (std::size_t i = 0; i < u0.size(); ++i) u0[i] = b.mode_row(0)[i];
  FieldState s = make_field_state(b, u0);
  const CounterNormal stream(1);
  for (int i = 0; i < 5000; ++i) s = spde_step(s, m, NoiseSpectrum::white(0.6), b, c, stream);
  CHECK(s.time == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(std::fabs(s.coeffs[0] - std::exp(-0.5)) <= 1e-8);
  for (std::size_t k = 1; k < c.num_modes; ++k) CHECK(std::fabs(s.coeffs[k]) <= 1e-12);
}

TEST_CASE("field state stays synchronized") {
  ModelSpec m;
  m.gamma = 1.3;
  const SolverConfig c = small_config();
  const auto b = dirichlet_interval_basis(pi, c.num_modes, c.grid_size);
  FieldState s = make_field_state(b, sine_profile(b, 2.0));
  const CounterNormal stream(5);
  for (int i = 0; i < 50; ++i) {
    s = spde_step(s, m, NoiseSpectrum::white(0.6), b, c, stream);
    const auto grid = inverse_transform(b, s.coeffs);
    for (std::size_t x = 0; x < grid.size(); ++x) CHECK(std::fabs(grid[x] - s.grid_values[x]) <= 1e-10);
    CHECK(s.sup_norm == sup_abs(s.grid_values));
  }
}

TEST_CASE("noise-free solver stays below the ODE comparison solution") {
  ModelSpec m;
  m.beta = 3;
  m.k1 = 1;
  m.k2 = 0;
  SolverConfig c;
  c.num_modes = 64;
  c.grid_size = 256;
  c.noise_modes = 64;
  c.dt = 1e-4;
  c.horizon = 0.2;
  c.explosion_threshold = 1e9;
  const auto problem = make_problem(m, NoiseSpectrum::white(0.6), pi, c);
  const double amplitude = 1e4;
  const auto rec = simulate_spde(sine_profile(problem.basis, amplitude), problem, 1);
  CHECK(rec.verdict == Verdict::survived_to_T);
  const double u0_sup = rec.sup_norms.front();
  for (std::size_t i = 0; i < rec.times.size(); ++i) {
    const double bound = exact_solution(u0_sup, 3.0, rec.times[i]);
    // The drift flattens the profile within a step; projecting the flat top back
    // onto N modes overshoots (Gibbs), so the ODE comparison holds only up to ~10%.
    CHECK(rec.sup_norms[i] <= 1.1 * bound);
    CHECK(rec.sup_norms[i] <= decay_envelope(u0_sup, 3.0, 1.0, rec.times[i]) + 1e-6);
  }
}

TEST_CASE("zero data with everything off stays zero") {
  ModelSpec m;
  m.drift = DriftKind::zero;
  m.k2 = 0;
  const auto problem = make_problem(m, NoiseSpectrum::white(0.6), pi, small_config());
  const auto rec = simulate_spde(std::vector<double>(64, 0.0), problem, 3);
  CHECK(rec.verdict == Verdict::survived_to_T);
  CHECK(rec.times.size() == 501);
  for (double s : rec.sup_norms) CHECK(s == 0.0);
  CHECK(rec.crossings.empty());
}

TEST_CASE("records are reproducible") {
  ModelSpec m;
  m.gamma = 1.4;
  const auto problem = make_problem(m, NoiseSpectrum::white(0.6), pi, small_config());
  const auto u0 = sine_profile(problem.basis, 5.0);
  const auto a = simulate_spde(u0, problem, 42);
  const auto b = simulate_spde(u0, problem, 42);
  const auto c = simulate_spde(u0, problem, 43);
  CHECK(a.digest() == b.digest());
  CHECK(a.sup_norms == b.sup_norms);
  CHECK(a.digest() != c.digest());
}

TEST_CASE("explosions are reported at the threshold") {
  ModelSpec m;
  m.drift = DriftKind::zero;
  m.gamma = 2.0;
  SolverConfig c = small_config();
  c.horizon = 1.0;
  const auto problem = make_problem(m, NoiseSpectrum::white(0.6), pi, c);
  const auto u0 = sine_profile(problem.basis, 5.0);
  int exploded = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto rec = simulate_spde(u0, problem, seed);
    if (rec.exploded()) {
      ++exploded;
      CHECK(rec.sup_norms.back() >= c.explosion_threshold);
      CHECK(rec.verdict_time == rec.times.back());
    }
  }
  CHECK(exploded > 0);

  m.drift = DriftKind::power_dissipative;
  m.beta = 6;
  const auto rescued = make_problem(m, NoiseSpectrum::white(0.6), pi, c);
  for (std::uint64_t seed = 0; seed < 20; ++seed)
    CHECK(simulate_spde(u0, rescued, seed).verdict == Verdict::survived_to_T);
}

TEST_CASE("mode truncation and step refinement") {
  ModelSpec m;
  m.beta = 3;
  m.gamma = 1.2;
  const auto spectrum = NoiseSpectrum::power_law(2.0, 2.0, 0.6);
  SolverConfig coarse;
  coarse.num_modes = 16;
  coarse.grid_size = 64;
  coarse.noise_modes = 16;
  coarse.dt = 1e-3;
  coarse.horizon = 1.0;
  SolverConfig fine = coarse;
  fine.num_modes = 32;
  fine.grid_size = 128;
  fine.noise_modes = 32;
  const auto pc = make_problem(m, spectrum, pi, coarse);
  const auto pf = make_problem(m, spectrum, pi, fine);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto a = simulate_spde(sine_profile(pc.basis, 1.0), pc, seed);
    const auto b = simulate_spde(sine_profile(pf.basis, 1.0), pf, seed);
    REQUIRE(a.verdict == Verdict::survived_to_T);
    REQUIRE(b.verdict == Verdict::survived_to_T);
    double diff = 0, scale = 0;
    for (std::size_t i = 0; i < a.times.size(); ++i) {
      diff = std::max(diff, std::fabs(a.sup_norms[i] - b.sup_norms[i]));
      scale = std::max(scale, b.sup_norms[i]);
    }
    CHECK(diff / scale < 0.01);
  }

  // Step refinement with the noise off: the realization is then shared exactly.
  m.k2 = 0;
  SolverConfig half = fine;
  half.dt = fine.dt / 2;
  const auto p1 = make_problem(m, spectrum, pi, fine);
  const auto p2 = make_problem(m, spectrum, pi, half);
  const auto a = simulate_spde(sine_profile(p1.basis, 50.0), p1, 0);
  const auto b = simulate_spde(sine_profile(p2.basis, 50.0), p2, 0);
  double diff = 0, scale = 0;
  for (std::size_t i = 0; i < a.times.size(); ++i) {
    diff = std::max(diff, std::fabs(a.sup_norms[i] - b.sup_norms[2 * i]));
    scale = std::max(scale, b.sup_norms[2 * i]);
  }
  CHECK(diff / scale < 0.02);
}

TEST_CASE("exponential tamed scheme") {
  ModelSpec m;
  m.k2 = 0;
  SolverConfig c = small_config();
  c.scheme = SpdeScheme::exponential_tamed;
  const auto problem = make_problem(m, NoiseSpectrum::white(0.6), pi, c);
  const auto rec = simulate_spde(sine_profile(problem.basis, 100.0), problem, 0);
  CHECK(rec.verdict == Verdict::survived_to_T);
  for (std::size_t i = 1; i < rec.sup_norms.size(); ++i) CHECK(rec.sup_norms[i] <= rec.sup_norms[i - 1] + 1e-12);
  CHECK(rec.sup_norms.back() < 1.0);
}

TEST_CASE("solver configuration is validated") {
  ModelSpec m;
  SolverConfig c = small_config();
  c.explosion_threshold = 9.0;
  CHECK_THROWS_AS(c.validate(m), std::invalid_argument);
  c = small_config();
  c.noise_modes = 17;
  CHECK_THROWS_AS(c.validate(m), std::invalid_argument);
  c = small_config();
  c.grid_size = 63;
  CHECK_THROWS_AS(c.validate(m), std::invalid_argument);
  const auto problem = make_problem(m, NoiseSpectrum::white(0.6), pi, small_config());
  CHECK_THROWS_AS(simulate_spde(std::vector<double>(10, 0.0), problem, 1), std::invalid_argument);
  CHECK_THROWS_AS(make_problem(m, NoiseSpectrum::white(1.0), pi, small_config()), AssumptionViolation);
}

TEST_CASE("ladder examples") {
  LadderState ladder(1.0);
  ladder.update(2.0, 0.0);
  CHECK_FALSE(ladder.anchored());
  ladder.update(9.0, 0.1);
  // 3 c0 is met first on the way up, then 9 c0 within the same sample.
  REQUIRE(ladder.crossings().size() == 2);
  CHECK(ladder.crossings()[0].direction == LadderDirection::entry);
  CHECK(ladder.crossings()[0].level_index == 1);
  CHECK(ladder.crossings()[1].direction == LadderDirection::up);
  CHECK(ladder.crossings()[1].time == 0.1);
  CHECK(ladder.level_index() == 2);

  ladder.update(27.0, 0.3);
  CHECK(ladder.crossings().back().direction == LadderDirection::up);
  CHECK(ladder.crossings().back().level == 27.0);
  ladder.update(9.0, 0.4);
  ladder.update(3.0, 0.5);
  CHECK(ladder.crossings().back().direction == LadderDirection::down);
  CHECK(ladder.crossings().back().level == 3.0);
  const auto n = ladder.crossings().size();
  ladder.update(0.01, 0.6);  // floor: no further down moves
  CHECK(ladder.crossings().size() == n);
  ladder.update(9.0, 0.7);
  CHECK(ladder.crossings().back().direction == LadderDirection::up);
  CHECK(ladder.level_index() == 2);
  for (std::size_t i = 1; i < ladder.crossings().size(); ++i) {
    const double ratio = ladder.crossings()[i].level / ladder.crossings()[i - 1].level;
    CHECK((ratio == doctest::Approx(3.0) || ratio == doctest::Approx(1.0 / 3.0)));
  }
  CHECK_THROWS_AS(ladder.update(1.0, 0.5), ContractViolation);
  CHECK_THROWS_AS(ladder_update(LadderState(1.0), -1.0, 0.0), std::invalid_argument);
}

TEST_CASE("ladder equals the brute-force scan on synthetic paths") {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> step(0.0, 0.6);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int path = 0; path < 100; ++path) {
    const double c0 = path % 3 == 0 ? 1.0 : 0.5 + unit(rng);
    std::vector<double> s;
    double x = 2.0 * unit(rng) - 0.5;
    for (int i = 0; i < 400; ++i) {
      x += step(rng);
      x = std::clamp(x, -3.0, 12.0);
      const double snapped = unit(rng) < 0.1 ? std::round(x) : x;
      s.push_back(std::pow(3.0, snapped) * c0);
    }
    LadderState ladder(c0);
    for (std::size_t i = 0; i < s.size(); ++i) ladder = ladder_update(ladder, s[i], 0.01 * static_cast<double>(i));
    const auto expected = oracle::brute_force_ladder(s, c0);
    REQUIRE(ladder.crossings().size() == expected.size());
    for (std::size_t k = 0; k < expected.size(); ++k) {
      const auto& got = ladder.crossings()[k];
      CHECK(got.time == 0.01 * static_cast<double>(expected[k].sample));
      CHECK(got.level_index == expected[k].level);
      const int dir = got.direction == LadderDirection::entry ? 0 : got.direction == LadderDirection::up ? 1 : -1;
      CHECK(dir == expected[k].direction);
    }
  }
}

TEST_CASE("series and ladder CSV files") {
  ModelSpec m;
  m.gamma = 1.3;
  SolverConfig c = small_config();
  c.record_every = 10;
  const auto problem = make_problem(m, NoiseSpectrum::white(0.6), pi, c);
  const auto rec = simulate_spde(sine_profile(problem.basis, 5.0), problem, 7);
  CHECK(rec.times.size() == 51);
  const auto dir = std::filesystem::temp_directory_path();
  write_series_csv((dir / "srde_series.csv").string(), rec);
  write_ladder_csv((dir / "srde_ladder.csv").string(), rec);
  std::ifstream in(dir / "srde_series.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "t,sup_norm,level_index");
  std::size_t rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  CHECK(rows == rec.times.size());
  std::filesystem::remove(dir / "srde_series.csv");
  std::filesystem::remove(dir / "srde_ladder.csv");
}
