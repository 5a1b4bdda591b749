import math

import pytest

import srde

SMALL = """
num_modes = 8
grid_size = 32
noise_modes = 8
dt = 0.01
horizon = 0.2
beta_values = 2, 4
gamma_values = 1.2, 2.0
trials = 4
sde_trials = 50
sde_horizon = 0.1
conv_dt = 0.01
conv_horizon = 0.3
conv_trials = 100
conv_points = 3
"""


@pytest.fixture
def config():
    return srde.RunConfig.from_text(SMALL)


def test_closed_forms():
    assert srde.exact_solution(1.0, 3.0, 1.5) == pytest.approx(0.5)
    assert srde.decay_envelope(1.0, 3.0, 1.0, 16.0) == pytest.approx(1.5 / math.sqrt(2.0))
    assert srde.beta_constant(0.125, 0.5) == pytest.approx(math.pi * math.sqrt(2.0))
    lo, hi = srde.wilson_interval(0, 200)
    assert lo == 0.0 and hi == pytest.approx(0.0188, abs=1e-4)
    assert srde.classify_cell(7, 2.4, 0.5)["below_theorem"]


def test_config_round_trip(config, tmp_path):
    path = tmp_path / "run.conf"
    config.save(str(path))
    assert srde.RunConfig.load(str(path)) == config
    assert srde.RunConfig.from_text(config.to_text()).digest() == config.digest()
    assert len(srde.config_keys()) == 44


def test_config_errors():
    with pytest.raises(srde.ConfigError, match="colour"):
        srde.RunConfig.from_text("colour = blue\n")
    with pytest.raises(ValueError, match="gamma"):
        srde.RunConfig.from_text("gamma = fast\n")


def test_check(config):
    report = srde.check(config)
    assert report["eta"] == pytest.approx(0.6)
    assert report["gamma_threshold"] == pytest.approx(1.4)
    assert not report["gamma_beta_ok"]


def test_simulate_is_deterministic(config):
    a = srde.simulate(config, 5)
    b = srde.simulate(config, 5)
    assert a["digest"] == b["digest"]
    assert a["verdict"] in {"survived_to_T", "exploded_at_t", "nonfinite_at_t"}
    assert len(a["times"]) == len(a["sup_norms"])


def test_sde_and_sweep(config, tmp_path):
    est = srde.sde_moment(config)
    assert est["trials"] == 50 and est["mean"] >= 0.0
    cells = srde.sweep(config, str(tmp_path / "results.csv"))
    assert len(cells) == 4
    assert (tmp_path / "results.csv").read_text().startswith("beta,gamma,trials,explosions")


def test_moment_bound(config):
    report = srde.moment_bound(config, [1.0] * 30)
    assert len(report["times"]) == 3
    assert all(r > 0 for r in report["rhs"])
