"""Tests for data models."""

import json
import math

import pytest

from gevns.models import (
    BoundsReport,
    ForcingMode,
    ForcingSpec,
    GridSpec,
    NormKind,
    NormSpec,
    PhysParams,
    RadiusEstimate,
    SimConfig,
    SweepConfig,
    SyncResult,
)


def test_grid_spec_properties():
    """Cutoff n//3, area L², λ₁ = (2π/L)²."""
    grid = GridSpec(96)
    assert grid.dealias_cutoff == 32
    assert grid.area == pytest.approx(4 * math.pi ** 2)
    assert grid.lambda1 == pytest.approx(1.0)
    assert GridSpec(16, 1.0).lambda1 == pytest.approx(4 * math.pi ** 2)


@pytest.mark.parametrize("n", [6, 15, 0])
def test_grid_spec_rejects_bad_sizes(n):
    """Odd or tiny grids are refused."""
    with pytest.raises(ValueError, match="grid.n"):
        GridSpec(n)


def test_phys_params_admit_zero():
    """ν = μ = 0 is allowed, negative values are not."""
    assert PhysParams(0.0, 0.0).nu == 0.0
    with pytest.raises(ValueError):
        PhysParams(-1e-3, 0.1)
    with pytest.raises(ValueError):
        PhysParams(0.01, math.nan)


def test_norm_spec_constructors():
    """lp maps 2 and ∞ onto their dedicated kinds."""
    assert NormSpec.lp(2).kind is NormKind.L2
    assert NormSpec.lp(math.inf).kind is NormKind.LINF
    assert NormSpec.lp(4.0) == NormSpec(NormKind.LP, p=4)
    assert NormSpec.sobolev(1.0).tau == 0.0
    with pytest.raises(ValueError):
        NormSpec.gevrey(-0.1)
    with pytest.raises(ValueError):
        NormSpec.gevrey(0.1, s=1.5)


def test_forcing_spec_dict_roundtrip():
    """ForcingSpec survives to_dict/from_dict."""
    spec = ForcingSpec((ForcingMode(2, 1, 1.0), ForcingMode(0, 3, 0.5, 0.25)))
    assert ForcingSpec.from_dict(spec.to_dict()) == spec
    assert spec.modes[0].index_magnitude == pytest.approx(math.sqrt(5))


def test_sim_config_validation():
    """t_end must exceed the spin-up and dt must be positive."""
    base = dict(grid=GridSpec(16), params=PhysParams(0.01, 0.1), forcing=ForcingSpec())
    with pytest.raises(ValueError, match="t_end"):
        SimConfig(t_end=50.0, **base)
    with pytest.raises(ValueError, match="dt"):
        SimConfig(t_end=200.0, dt=0.0, **base)
    config = SimConfig(t_end=5.0, spinup=1.0, **base)
    assert config.with_overrides(seed=3).seed == 3
    assert SimConfig(t_end=1.0, grid=GridSpec(16), params=PhysParams(0.01, 0.0),
                     forcing=ForcingSpec()).spinup_time == 0.0


def test_sweep_config_validation():
    """Viscosities must be distinct and positive; resolutions pair up."""
    base = SimConfig(grid=GridSpec(16), params=PhysParams(0.01, 0.1), forcing=ForcingSpec(), t_end=200.0)
    with pytest.raises(ValueError, match="distinct"):
        SweepConfig(base, (0.01, 0.01, 0.02))
    with pytest.raises(ValueError, match="positive"):
        SweepConfig(base, (0.01, 0.0, 0.02))
    with pytest.raises(ValueError, match="resolutions"):
        SweepConfig(base, (0.01, 0.02, 0.03), resolutions=(16, 32))
    assert SweepConfig(base, (0.01, 0.02, 0.03)).planned() == [(0.01, 16), (0.02, 16), (0.03, 16)]


def test_radius_estimate_json_non_finite():
    """Non-finite floats serialize as strings, not as invalid JSON."""
    est = RadiusEstimate(math.nan, math.inf, 0.0, (0, 0), False)
    data = json.loads(est.to_json())
    assert data["l_a"] == "nan"
    assert data["intercept"] == "inf"
    assert data["window"] == [0, 0]


def test_bounds_report_merge():
    """Fields set on the right-hand report win; clamps accumulate."""
    left = BoundsReport(la_classical=1.0, la_lower=2.0)
    right = BoundsReport(la_lower=3.0, log_clamped=True)
    merged = left.merge(right)
    assert merged.la_classical == 1.0
    assert merged.la_lower == 3.0
    assert merged.log_clamped
    assert left.la_lower == 2.0


def test_sync_result_json():
    """An infinite decay rate is kept readable."""
    result = SyncResult(3.0, 29, [0.0], [0.0], math.inf, True)
    data = json.loads(result.to_json())
    assert data["decay_rate"] == "inf"
    assert data["n_det"] == 29
