"""Tests for sweeps, bound comparison and determining-modes runs."""

import math
import os
import random

import numpy as np
import pandas as pd
import pytest

from gevns.bounds import la_lower
from gevns.constants import CSV_COLUMNS, LP_EXPONENTS
from gevns.diagnostics import check_vorticity_bound, on_attractor
from gevns.errors import FitError, SweepError
from gevns.experiments import (
    compare_bounds,
    compensated,
    coupled_modes,
    determining_modes,
    fit_scaling,
    measured_m2p,
    row_csv_name,
    run_row,
    run_sweep,
    run_sweep_async,
    scan_determining_modes,
    summarize_sweep,
)
from gevns.models import (
    ForcingMode,
    ForcingSpec,
    GridSpec,
    InitialCondition,
    InitialKind,
    NormSpec,
    PhysParams,
    SimConfig,
    SweepConfig,
    SweepResult,
    SweepRow,
)
from gevns.solver import build_forcing, run
from gevns.spectral import norm

AREA = (2 * math.pi) ** 2
KOLMOGOROV = ForcingSpec.single(2, 1)

slow = pytest.mark.skipif(os.environ.get("GEVNS_SLOW") != "1", reason="set GEVNS_SLOW=1 for acceptance runs")


def synthetic_rows(measure, nus=(2e-2, 1e-2, 5e-3, 2.5e-3), mu=0.1):
    rows = []
    for i, nu in enumerate(nus):
        D = AREA / (mu * nu)
        bound = la_lower(D, AREA)
        rows.append(SweepRow(i, nu, 128, D, measure(D, bound), bound, bound / 10, 0.1, True))
    return rows


def small_base(**overrides) -> SimConfig:
    base = dict(
        grid=GridSpec(16),
        params=PhysParams(0.05, 0.1),
        forcing=KOLMOGOROV,
        t_end=2.0,
        dt=0.05,
        spinup=1.0,
        sample_every=5,
        initial=InitialCondition(InitialKind.RANDOM, amplitude=0.5),
        seed=5,
    )
    base.update(overrides)
    return SimConfig(**base)


def laminar_config(**overrides) -> SimConfig:
    base = dict(
        grid=GridSpec(16),
        params=PhysParams(0.5, 0.5),
        forcing=KOLMOGOROV,
        t_end=10.0,
        dt=0.05,
        spinup=2.0,
        sample_every=1,
    )
    base.update(overrides)
    return SimConfig(**base)


def rows_of(cfg: SweepConfig, jobs: int):
    try:
        return run_sweep(cfg, jobs).rows
    except SweepError as e:
        return e.rows


def test_fit_scaling_exact_power_law():
    """la = 3D^{-1/2} gives slope -1/2 with vanishing error."""
    pairs = [(D, 3.0 * D ** -0.5) for D in (1e2, 1e3, 1e4, 1e5)]
    slope, stderr = fit_scaling(pairs)
    assert slope == pytest.approx(-0.5, abs=1e-12)
    assert stderr == pytest.approx(0.0, abs=1e-12)


def test_fit_scaling_preconditions():
    """Two pairs, equal D or nonpositive values are refused."""
    with pytest.raises(FitError):
        fit_scaling([(1.0, 1.0), (2.0, 0.5)])
    with pytest.raises(FitError, match="degenerate"):
        fit_scaling([(10.0, 1.0), (10.0, 0.5), (10.0, 0.2)])
    with pytest.raises(FitError):
        fit_scaling([(10.0, 1.0), (100.0, -0.5), (1000.0, 0.2)])


def test_summarize_sweep_orders_and_fits():
    """Rows come back by descending ν with the fitted exponent."""
    rows = synthetic_rows(lambda D, b: 3.0 * D ** -0.5)
    random.Random(0).shuffle(rows)
    result = summarize_sweep(rows)
    assert [r.nu for r in result.rows] == [2e-2, 1e-2, 5e-3, 2.5e-3]
    assert result.fitted_exponent == pytest.approx(-0.5, abs=1e-9)


def test_summarize_sweep_without_usable_rows():
    """All rows unresolved raises with the per-row flags."""
    rows = synthetic_rows(lambda D, b: b)
    for r in rows:
        r.resolved = False
    with pytest.raises(SweepError) as info:
        summarize_sweep(rows)
    assert len(info.value.rows) == 4
    assert info.value.exit_code == 7


def test_summarize_sweep_two_usable_rows_skips_fit():
    """Fewer than three usable rows leave the exponent unset."""
    rows = synthetic_rows(lambda D, b: b)
    rows[0].measured_la = None
    rows[1].resolved = False
    result = summarize_sweep(rows)
    assert result.fitted_exponent is None
    assert len(result.usable_rows()) == 2


def test_compare_bounds_on_lower_bound_law():
    """Measuring exactly la_lower gives spread 1 and no violation."""
    comparison = compare_bounds(summarize_sweep(synthetic_rows(lambda D, b: b)))
    assert comparison.spread == pytest.approx(1.0, rel=1e-12)
    assert comparison.compensated_min == pytest.approx(2 * math.pi, rel=1e-12)
    assert not comparison.spread_exceeded
    assert comparison.worst_lower_ratio == 1.0
    assert not comparison.lower_violated


def test_compare_bounds_spread_of_pure_power_law():
    """la = D^{-1/2} leaves the logarithmic factor in the compensated product."""
    sweep = summarize_sweep(synthetic_rows(lambda D, b: D ** -0.5))
    comparison = compare_bounds(sweep)
    Ds = [r.D for r in sweep.rows]
    expected = math.sqrt((1 + math.log(max(Ds))) / (1 + math.log(min(Ds))))
    assert comparison.spread == pytest.approx(expected, rel=1e-12)
    assert comparison.lower_violated
    assert comparison.rows[0]["compensated"] == pytest.approx(compensated(sweep.rows[0].measured_la, Ds[0]))


def test_compare_bounds_flags_spread(caplog):
    """A spread above the factor is reported, not raised."""
    rows = synthetic_rows(lambda D, b: b)
    rows[-1].measured_la *= 5.0
    comparison = compare_bounds(summarize_sweep(rows), spread_factor=3.0)
    assert comparison.spread == pytest.approx(5.0, rel=1e-12)
    assert comparison.spread_exceeded
    assert "spread" in caplog.text


def test_compare_bounds_needs_two_rows():
    """One usable row is not a comparison."""
    rows = synthetic_rows(lambda D, b: b)
    for r in rows[1:]:
        r.resolved = False
    with pytest.raises(SweepError):
        compare_bounds(SweepResult(rows))


async def test_run_sweep_async_needs_three_viscosities():
    """A sweep over two viscosities is refused before any run."""
    cfg = SweepConfig(small_base(), (0.05, 0.02))
    with pytest.raises(SweepError, match="at least 3"):
        await run_sweep_async(cfg)


def test_sweep_rows_independent_of_jobs_and_order():
    """Worker count and ν order do not change the measured rows."""
    base = small_base()
    a = rows_of(SweepConfig(base, (0.05, 0.04, 0.03), refine=False), jobs=1)
    b = rows_of(SweepConfig(base, (0.03, 0.05, 0.04), refine=False), jobs=2)

    def key(rows):
        return sorted((r.nu, r.n, r.D, r.measured_la, r.resolved, r.accepted_samples) for r in rows)

    assert len(a) == 3
    assert key(a) == key(b)


def test_sweep_csvs_byte_identical_across_jobs(tmp_path):
    """Per-row diagnostics files do not depend on the worker count."""
    cfg = SweepConfig(small_base(), (0.05, 0.04, 0.03), refine=False)
    serial, pooled = tmp_path / "serial", tmp_path / "pooled"
    serial.mkdir()
    pooled.mkdir()
    for jobs, out in ((1, serial), (4, pooled)):
        try:
            run_sweep(cfg, jobs, out_dir=str(out))
        except SweepError:
            pass
    for i in range(3):
        name = row_csv_name(i)
        assert (serial / name).read_bytes() == (pooled / name).read_bytes()


def test_run_row_writes_csv(tmp_path):
    """The kept run of a row lands in diagnostics_row<i>.csv."""
    row = run_row(2, small_base(), 0.05, 16, False, 16, out_dir=str(tmp_path))
    assert row.index == 2 and row.nu == 0.05 and row.n == 16
    frame = pd.read_csv(tmp_path / row_csv_name(2))
    assert tuple(frame.columns) == CSV_COLUMNS
    assert frame["t"].iloc[-1] == pytest.approx(2.0)


def test_coupled_modes_counts():
    """|j| ≤ 1 couples 5 modes, |j| ≤ √2 couples 9."""
    grid = GridSpec(16)
    assert int(coupled_modes(grid, 1.0).sum()) == 5
    assert int(coupled_modes(grid, math.sqrt(2)).sum()) == 9
    assert int(coupled_modes(grid, 0.0).sum()) == 1


def test_band_edge_coupling_synchronizes():
    """κ_c = cutoff - 1 couples 49 modes and pulls the slave in."""
    result = determining_modes(laminar_config(), 4.0, horizon=5.0)
    assert result.n_det == 49
    assert result.errors[0] > 1e-6
    assert result.synchronized


def test_laminar_run_synchronizes():
    """Strong damping pulls the uncoupled modes onto the master."""
    result = determining_modes(laminar_config(), 3.0, horizon=5.0)
    assert result.n_det == 29
    assert result.synchronized
    assert result.errors[-1] < 1e-6
    assert result.decay_rate > 0
    assert result.times[0] == 0.0


@pytest.mark.parametrize("kappa_c", [-1.0, 5.0, 8.0])
def test_determining_modes_rejects_cutoff_outside_band(kappa_c):
    """κ_c must lie in [0, dealias_cutoff)."""
    with pytest.raises(ValueError, match="kappa_c"):
        determining_modes(laminar_config(), kappa_c)


def test_scan_checks_cutoffs_before_spinup():
    """One bad cutoff fails the whole scan up front."""
    with pytest.raises(ValueError, match=r"\[0, 5\)"):
        scan_determining_modes(laminar_config(), [3.0, 5.0])


def test_scan_reports_minimal_n_det():
    """The smallest synchronized mode count is compared to D/√68."""
    scan = scan_determining_modes(laminar_config(), [4.0, 3.0], horizon=5.0)
    assert [r.kappa_c for r in scan.results] == [3.0, 4.0]
    assert scan.minimal_n_det == 29
    assert scan.n_pred == pytest.approx(scan.D / math.sqrt(68), rel=1e-12)
    assert scan.bound_ok == (29 <= scan.n_pred)
    assert scan.findings == []


def test_measured_m2p_uses_post_spinup_peak():
    """M_{2p} is the largest post-spinup L_{2p} norm with headroom."""
    result = run(laminar_config(t_end=4.0, sample_every=5))
    post = [r for r in result.records if r.post_spinup]
    assert measured_m2p(result, 2.0, 0.1) == pytest.approx(1.1 * max(r.lp_norms[4] for r in post))
    expected = norm(result.final.omega, NormSpec.lp(6)) * 1.1
    assert measured_m2p(result, 3.0, 0.1) == pytest.approx(expected)


CHAOTIC = SimConfig(
    grid=GridSpec(256),
    params=PhysParams(5e-3, 0.1),
    forcing=ForcingSpec((ForcingMode(2, 1, 1.0), ForcingMode(0, 3, 0.5))),
    t_end=200.0,
    sample_every=50,
    initial=InitialCondition(InitialKind.RANDOM),
    seed=1,
)


@slow
@pytest.mark.slow
def test_acceptance_vorticity_bounds_on_chaotic_run():
    """Every Lp margin holds and the run settles inside ‖F‖∞/μ."""
    result = run(CHAOTIC)
    forcing = build_forcing(CHAOTIC.forcing, CHAOTIC.grid)
    for p in LP_EXPONENTS:
        assert check_vorticity_bound(result.records, forcing, 0.1, p).ok
    assert on_attractor(result.records, norm(forcing, NormSpec.linf()), 0.1, window=5)


@slow
@pytest.mark.slow
def test_acceptance_scaling_sweep():
    """Radius falls with D, with an exponent near -1/2 and bounded spread."""
    base = SimConfig(
        grid=GridSpec(128),
        params=PhysParams(2e-2, 0.1),
        forcing=KOLMOGOROV,
        t_end=150.0,
        sample_every=50,
        initial=InitialCondition(InitialKind.RANDOM),
        seed=1,
    )
    cfg = SweepConfig(base, (2e-2, 1e-2, 5e-3, 2.5e-3), resolutions=(128, 128, 256, 256))
    sweep = run_sweep(cfg, jobs=4)
    usable = sorted(sweep.usable_rows(), key=lambda r: r.D)
    assert len(usable) >= 3
    las = [r.measured_la for r in usable]
    assert all(b < a for a, b in zip(las, las[1:]))
    assert -0.8 <= sweep.fitted_exponent <= -0.25
    assert compare_bounds(sweep).spread <= 3.0


@slow
@pytest.mark.slow
def test_acceptance_determining_modes():
    """Some cutoff within 12·D modes synchronizes below the predicted count."""
    scan = scan_determining_modes(CHAOTIC, [8.0, 16.0, 32.0, 64.0])
    synced = [r for r in scan.results if r.synchronized]
    assert synced
    assert min(r.n_det for r in synced) <= scan.dim_bound
    assert scan.bound_ok
    assert np.all(np.isfinite([r.errors[-1] for r in synced]))
