"""Tests for config parsing and the config echo."""

import math

import pytest

from gevns.config import config_echo, parse_config, parse_settings
from gevns.errors import ConfigError
from gevns.models import ForcingMode, InitialKind, SimConfig, SweepConfig

MINIMAL = """\
[grid]
n = 32
[params]
nu = 0.01
mu = 0.1
[forcing]
modes = 2, 1, 1.0
[run]
t_end = 200
"""

SWEEP = MINIMAL.replace("nu = 0.01\n", "") + """\
[sweep]
nu_values = 2e-2, 1e-2, 5e-3, 2.5e-3
resolutions = 128, 128, 256, 256
"""


def test_minimal_config_is_defaulted():
    """Five keys give a complete SimConfig."""
    config = parse_config(MINIMAL)
    assert isinstance(config, SimConfig)
    assert config.grid.n == 32
    assert config.grid.length == pytest.approx(2 * math.pi)
    assert config.params.nu == 0.01 and config.params.mu == 0.1
    assert config.forcing.modes == (ForcingMode(2, 1, 1.0, 0.0),)
    assert config.t_end == 200.0
    assert config.dt is None
    assert config.spinup_time == pytest.approx(100.0)
    assert config.sample_every == 10
    assert config.seed == 0
    assert config.initial.kind is InitialKind.ZERO


def test_misspelled_key_is_rejected():
    """Unknown keys name themselves and their line."""
    text = MINIMAL.replace("nu = 0.01", "vicosity = 0.01")
    with pytest.raises(ConfigError, match="vicosity") as info:
        parse_config(text)
    assert info.value.line == 4
    assert info.value.key == "params.vicosity"
    assert info.value.exit_code == 3


def test_sweep_config_plans_rows():
    """Four viscosities plan four rows at their resolutions."""
    config = parse_config(SWEEP)
    assert isinstance(config, SweepConfig)
    assert config.planned() == [(2e-2, 128), (1e-2, 128), (5e-3, 256), (2.5e-3, 256)]
    assert config.base.params.nu == 2e-2
    assert config.refine


def test_missing_required_key():
    """Omitting t_end names the key."""
    text = MINIMAL.replace("t_end = 200\n", "")
    with pytest.raises(ConfigError, match="run.t_end"):
        parse_config(text)


def test_bad_value_names_key_and_line():
    """Type errors carry the key and line."""
    text = MINIMAL.replace("n = 32", "n = thirty-two")
    with pytest.raises(ConfigError, match="thirty-two") as info:
        parse_config(text)
    assert info.value.key == "grid.n"
    assert info.value.line == 2


def test_duplicate_key():
    """A key set twice is an error at its second line."""
    with pytest.raises(ConfigError, match="duplicate") as info:
        parse_config(MINIMAL + "grid.n = 64\n")
    assert info.value.line == 10


def test_unparseable_line():
    """Lines that are neither sections nor entries are refused."""
    with pytest.raises(ConfigError, match="cannot parse"):
        parse_config(MINIMAL + "just words\n")


def test_invalid_model_values_are_config_errors():
    """Model validation surfaces as a ConfigError on the responsible key."""
    with pytest.raises(ConfigError) as info:
        parse_config(MINIMAL.replace("mu = 0.1", "mu = -1"))
    assert info.value.key == "params.nu"
    with pytest.raises(ConfigError):
        parse_config(MINIMAL.replace("t_end = 200", "t_end = 50"))


def test_dotted_keys_and_comments():
    """Dotted keys work outside sections; comments are ignored."""
    text = """\
# a run
grid.n = 16   # small
params.nu = 0.5
params.mu = 0.5
forcing.modes = 2, 1, 1.0, 0.25; 0, 3, 0.5
run.t_end = 3
run.dt = 0.01
run.spinup = 1
initial.kind = random
"""
    config = parse_config(text)
    assert config.grid.n == 16
    assert config.dt == 0.01
    assert config.spinup_time == 1.0
    assert config.forcing.modes[0].phase == 0.25
    assert config.forcing.modes[1] == ForcingMode(0, 3, 0.5, 0.0)
    assert config.initial.kind is InitialKind.RANDOM


def test_auto_keywords():
    """'auto' selects the CFL step and the damping-time spin-up."""
    text = MINIMAL + "dt = auto\nspinup = auto\n"
    config = parse_config(text)
    assert config.dt is None
    assert config.spinup_time == pytest.approx(10 / 0.1)


def test_seed_override():
    """--seed wins over run.seed."""
    text = MINIMAL + "seed = 4\n"
    assert parse_settings(text).sim.seed == 4
    assert parse_settings(text, seed=9).sim.seed == 9


def test_bound_constants_and_sync_keys():
    """[bounds] constants and [sync] cutoffs are carried on Settings."""
    text = MINIMAL + "[bounds]\nC = 2.0\nc7 = 0.5\n[sync]\nkappa_values = 4, 8\n"
    settings = parse_settings(text)
    assert settings.constants.C == 2.0
    assert settings.constants.c7 == 0.5
    assert settings.constants.c4 == 12.0
    assert settings.kappa_values == [4.0, 8.0]
    assert settings.bounds_sigma1 == 1.0


def test_echo_is_complete_and_reparses():
    """The echo lists every key sorted and parses to the same settings."""
    settings = parse_settings(SWEEP + "[initial]\nkind = random\n")
    echo = config_echo(settings)
    keys = [line.split(" = ")[0] for line in echo.splitlines()]
    assert keys == sorted(keys)
    assert "run.spinup = 100.0" in echo
    assert "params.nu = 0.02" in echo
    again = parse_settings(echo)
    assert again.sim == settings.sim.with_overrides(spinup=100.0)
    assert again.sweep.planned() == settings.sweep.planned()
    assert again.constants == settings.constants
    assert config_echo(again) == echo


@pytest.mark.parametrize("p", ["1.5", "2.5", "1"])
def test_strip_exponent_must_give_even_norm(p):
    """bounds.p is refused unless 2p is an even integer."""
    with pytest.raises(ConfigError, match="bounds.p"):
        parse_settings(MINIMAL + f"[bounds]\np = {p}\n")


def test_strip_exponent_accepts_integers():
    """p = 3 measures ‖ω‖_6."""
    assert parse_settings(MINIMAL + "[bounds]\np = 3\n").values["bounds.p"] == 3.0
