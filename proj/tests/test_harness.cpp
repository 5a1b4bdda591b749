#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "srde/errors.hpp"
#include "srde/harness.hpp"

using namespace srde;
namespace fs = std::filesystem;

namespace {

SweepSpec small_sweep() {
  SweepSpec s;
  s.beta_values = {2.0, 4.0};
  s.gamma_values = {1.2, 2.0, 2.6};
  s.trials = 16;
  s.model.drift = DriftKind::power_dissipative;
  s.spectrum = NoiseSpectrum::white(0.6);
  s.solver.num_modes = 8;
  s.solver.grid_size = 32;
  s.solver.noise_modes = 8;
  s.solver.dt = 1e-2;
  s.solver.horizon = 0.5;
  s.master_seed = 11;
  return s;
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "srde_harness_tests";
  fs::create_directories(dir);
  const auto p = dir / name;
  fs::remove(p);
  fs::remove(p.string() + ".digest");
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("Wilson intervals") {
  const auto none = wilson_interval(0, 200);
  CHECK(none.lo == 0.0);
  CHECK(none.hi == doctest::Approx(0.01884).epsilon(1e-3));
  const auto all = wilson_interval(200, 200);
  CHECK(all.hi == 1.0);
  CHECK(all.lo == doctest::Approx(1 - 0.01884).epsilon(1e-4));
  const auto half = wilson_interval(50, 100);
  CHECK(half.lo == doctest::Approx(0.40383).epsilon(1e-4));
  CHECK(half.hi == doctest::Approx(0.59617).epsilon(1e-4));
  const auto k = wilson_interval(190, 200);
  CHECK(k.lo < 0.95);
  CHECK(k.hi > 0.95);
  CHECK_THROWS_AS(wilson_interval(0, 0), std::invalid_argument);
  CHECK_THROWS_AS(wilson_interval(3, 2), std::invalid_argument);
}

TEST_CASE("cell classification") {
  CHECK(ito_threshold(3) == 2.0);
  CHECK(theorem_threshold(3, 0.6) == doctest::Approx(1.4));
  CHECK(combined_threshold(3) == 1.5);
  CHECK(combined_threshold(7) == 2.5);

  auto c = classify_cell(3, 1.45, 0.6);
  CHECK(c.below_ito);
  CHECK_FALSE(c.below_theorem);
  CHECK(c.below_combined);

  // On a line counts as not below.
  c = classify_cell(3, 2.0, 0.6);
  CHECK_FALSE(c.below_ito);
  CHECK(c.boundary_ito);
  c = classify_cell(3, 1.5, 0.6);
  CHECK_FALSE(c.below_combined);
  CHECK(c.boundary_combined);

  // With eta = 0 the theorem line coincides with the Ito line.
  for (double beta : {1.5, 2.0, 3.0, 7.0})
    for (double gamma : {0.5, 1.2, 2.0, 3.9, 4.2}) {
      const auto k = classify_cell(beta, gamma, 0.0);
      CHECK(k.below_ito == k.below_theorem);
      CHECK(k.boundary_ito == k.boundary_theorem);
    }
  CHECK(theorem_threshold(5, 0.0) == ito_threshold(5));

  CHECK_FALSE(classify_cell(5, 2.0, 0.5).below_theorem);
  CHECK(classify_cell(5, 2.0, 0.5).boundary_theorem);
  CHECK(classify_cell(7, 2.4, 0.5).below_theorem);
  CHECK(classify_cell(2, 1.4, 0.3).below_combined);
  const auto all = classify_cell(5, 1.5, 0.6);
  CHECK((all.below_ito && all.below_theorem && all.below_combined));
  CHECK(combined_threshold(3) == 1.5);
  CHECK_THROWS_AS(classify_cell(1.0, 1.0, 0.6), std::invalid_argument);
}

TEST_CASE("explosion estimates") {
  SolverConfig solver;
  solver.num_modes = 8;
  solver.grid_size = 32;
  solver.noise_modes = 8;
  solver.dt = 1e-2;
  solver.horizon = 0.5;
  ModelSpec quiet;
  quiet.k2 = 0;
  const auto problem = make_problem(quiet, NoiseSpectrum::white(0.6), std::acos(-1.0), solver);
  const auto u0 = sine_profile(problem.basis, 5.0);
  const auto est = estimate_explosion_probability(problem, u0, 30, 1, 2);
  CHECK(est.explosions == 0);
  CHECK(est.interval.lo == 0.0);
  CHECK(std::isnan(est.mean_blowup_time));

  ModelSpec loud;
  loud.drift = DriftKind::zero;
  loud.gamma = 2.0;
  const auto p2 = make_problem(loud, NoiseSpectrum::white(0.6), std::acos(-1.0), solver);
  std::vector<TrajectoryRecord> r1, r3;
  const auto one = estimate_explosion_probability(p2, u0, 24, 5, 1, &r1);
  const auto three = estimate_explosion_probability(p2, u0, 24, 5, 3, &r3);
  CHECK(one.explosions == three.explosions);
  CHECK(one.explosions > 0);
  REQUIRE(r1.size() == 24);
  for (std::size_t i = 0; i < 24; ++i) CHECK(r1[i].digest() == r3[i].digest());
}

TEST_CASE("sweep is independent of the worker count") {
  auto spec = small_sweep();
  const auto a_path = scratch("a.csv");
  const auto b_path = scratch("b.csv");
  spec.workers = 1;
  const auto a = run_sweep(spec, {a_path.string(), false, {}});
  spec.workers = 4;
  const auto b = run_sweep(spec, {b_path.string(), false, {}});
  CHECK(a.same_as(b));
  CHECK(file_digest(a_path.string()) == file_digest(b_path.string()));
  CHECK(spec.digest() == small_sweep().digest());
  REQUIRE(a.cells.size() == 6);
  CHECK(a.cells[0].beta == 2.0);
  CHECK(a.cells[1].gamma == 2.0);

  // Explosion frequency does not fall as gamma grows, up to interval overlap.
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j + 1 < 3; ++j)
      CHECK(a.cells[3 * i + j + 1].wilson_hi >= a.cells[3 * i + j].wilson_lo);

  const std::string text = slurp(a_path);
  CHECK(text.rfind(std::string(results_header) + "\n", 0) == 0);
  CHECK(text.find("true") != std::string::npos);
}

TEST_CASE("interrupted sweeps resume to the same file") {
  const auto spec = small_sweep();
  const auto full_path = scratch("full.csv");
  const auto part_path = scratch("part.csv");
  const auto full = run_sweep(spec, {full_path.string(), false, {}});

  SweepOptions stop{part_path.string(), false, [](std::size_t done) {
                      if (done == 2) throw std::runtime_error("interrupted");
                    }};
  CHECK_THROWS_AS(run_sweep(spec, stop), std::runtime_error);
  // Leave a torn row behind as a crash mid-write would.
  {
    std::ofstream torn(part_path, std::ios::app);
    torn << "4,1.2,16,3,0.1";
  }
  std::size_t first_new = 0;
  SweepOptions resume{part_path.string(), true, [&](std::size_t done) {
                        if (first_new == 0) first_new = done;
                      }};
  const auto resumed = run_sweep(spec, resume);
  CHECK(first_new == 3);
  CHECK(resumed.same_as(full));
  CHECK(file_digest(part_path.string()) == file_digest(full_path.string()));

  auto other = spec;
  other.trials = 17;
  CHECK_THROWS_AS(run_sweep(other, {part_path.string(), true, {}}), ConfigError);
}

TEST_CASE("sweep reports unwritable results") {
  const auto spec = small_sweep();
  const auto dir = fs::temp_directory_path() / "srde_harness_tests" / "no_such_dir" / "x.csv";
  try {
    run_sweep(spec, {dir.string(), false, {}});
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(e.resume_token() == "cell=0");
  }
}

TEST_CASE("results round trip") {
  ExplosionMap map;
  map.eta = 0.6;
  ExplosionCell c;
  c.beta = 3;
  c.gamma = 2.0;
  c.trials = 200;
  c.explosions = 0;
  const auto w = wilson_interval(0, 200);
  c.wilson_lo = w.lo;
  c.wilson_hi = w.hi;
  c.mean_blowup_time = NAN;
  c.classes = classify_cell(3, 2.0, 0.6);
  map.cells.push_back(c);
  c.gamma = 1.1;
  c.explosions = 7;
  c.mean_blowup_time = 0.123456789012345;
  c.classes = classify_cell(3, 1.1, 0.6);
  map.cells.push_back(c);
  const auto path = scratch("roundtrip.csv");
  persist_results(map, path.string());
  const auto back = load_results(path.string(), 0.6);
  CHECK(back.same_as(map));
  CHECK(back.cells[0].classes.boundary_ito);
  CHECK(slurp(path).find(",nan,") != std::string::npos);

  {
    std::ofstream bad(path, std::ios::app);
    bad << "3,1.0,200\n";
  }
  CHECK_THROWS_AS(load_results(path.string(), 0.6), IoError);
}

TEST_CASE("configuration files") {
  const RunConfig defaults;
  CHECK(parse_config("") == defaults);
  CHECK(parse_config("# nothing\n\n") == defaults);
  CHECK(config_keys().size() == 44);

  const auto c = parse_config("beta = 4 # inline\ngamma=1.7\nbeta_values = 2, 3\nscheme = exponential_tamed\n"
                              "ladder_enabled = false\nlambdas = power-law\nrho = 3\nconv_rule = left_endpoint\n");
  CHECK(c.model.beta == 4.0);
  CHECK(c.model.gamma == 1.7);
  CHECK(c.beta_values == std::vector<double>{2.0, 3.0});
  CHECK(c.solver.scheme == SpdeScheme::exponential_tamed);
  CHECK_FALSE(c.solver.ladder_enabled);
  CHECK(c.spectrum().kind == NoiseSpectrum::Kind::power_law);
  CHECK(c.conv_rule == ZAlphaRule::left_endpoint);

  const auto key_of = [](const std::string& text) {
    try {
      parse_config(text);
    } catch (const ConfigError& e) {
      return e.key();
    }
    return std::string("<none>");
  };
  CHECK(key_of("bogus = 1\n") == "bogus");
  CHECK(key_of("gamma = abc\n") == "gamma");
  CHECK(key_of("trials = -3\n") == "trials");
  CHECK(key_of("beta = 2\nbeta = 3\n") == "beta");
  CHECK(key_of("beta = 0.5\n") == "beta");
  CHECK(key_of("dt = 0\n") == "dt");
  CHECK(key_of("grid_size = 16\n") == "grid_size");
  CHECK(key_of("x0 = 1,2\n") == "x0");
  CHECK(key_of("conv_horizons = 1,2,4\n") == "conv_horizons");
  CHECK(key_of("scheme = rk4\n") == "scheme");

  try {
    parse_config("gamma = abc\n");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("expected real") != std::string::npos);
  }

  CHECK(RunConfig{}.spectrum().kind == NoiseSpectrum::Kind::white);
  RunConfig finite;
  finite.rho = 3;
  CHECK_THROWS_AS(finite.spectrum(), ConfigError);
}

TEST_CASE("configuration round trip") {
  RunConfig c;
  c.model.beta = 5.5;
  c.model.drift = DriftKind::zero;
  c.lambdas = "power-law";
  c.rho = 2.5;
  c.lambda_decay = 1.25;
  c.solver.dt = 2.5e-4;
  c.solver.scheme = SpdeScheme::exponential_tamed;
  c.dimension = 3;
  c.x0 = {0.1, -0.2, 1.0 / 3.0};
  c.gamma_values = {0.1, 0.7, 1.9};
  c.master_seed = 18446744073709551615ull;
  c.conv_horizons = {0.5, 1, 2, 4, 8};
  const auto path = scratch("config.txt");
  save_config(c, path.string());
  const auto back = load_config(path.string());
  CHECK(back == c);
  CHECK(back.digest() == c.digest());
  RunConfig d = c;
  d.trials += 1;
  CHECK(d.digest() != c.digest());
  CHECK_THROWS_AS(load_config((path.parent_path() / "missing.txt").string()), IoError);
}
