"""
Multi-run studies: ν-sweeps of the measured analyticity radius, the
bound comparison table and master-slave determining-modes runs.

Sweep rows are independent runs executed through asyncio on a process
pool; rows are reduced in configuration order, so the result does not
depend on the number of workers.
"""

import asyncio
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple
import logging
import math
import os

import numpy as np

from .bounds import clamped_log, damped_bounds, dimensionless
from .constants import DT_REFRESH_STEPS, M2P_HEADROOM, SYNC_HORIZON_DAMPING_TIMES, SYNC_THRESHOLD
from .diagnostics import write_csv
from .errors import FitError, SweepError
from .fft import get_fft_backend
from .models import (
    BoundConstants,
    GridSpec,
    NormSpec,
    PhysParams,
    SimConfig,
    SweepConfig,
    SweepResult,
    SweepRow,
    SyncResult,
    _dumps,
    _json_float,
)
from .solver import Integrator, RunResult, State, advance, build_forcing, initial_state, run
from .spectral import SpectralField, norm, wavenumbers

logger = logging.getLogger(__name__)


def fit_scaling(pairs: Sequence[Tuple[float, float]]) -> Tuple[float, float]:
    """Least-squares slope of ln la against ln D and its standard error."""
    from scipy import stats

    if len(pairs) < 3:
        raise FitError(f"scaling fit needs at least 3 pairs, got {len(pairs)}")
    d = np.array([p[0] for p in pairs], dtype=float)
    la = np.array([p[1] for p in pairs], dtype=float)
    if np.any(d <= 0) or np.any(la <= 0):
        raise FitError("scaling fit needs positive values")
    if np.all(d == d[0]):
        raise FitError("scaling fit is degenerate: all D equal")
    fit = stats.linregress(np.log(d), np.log(la))
    return float(fit.slope), float(fit.stderr)


def row_csv_name(index: int) -> str:
    return f"diagnostics_row{index}.csv"


def run_row(index: int, base: SimConfig, nu: float, n: int, refine: bool, max_n: int,
            constants: Optional[BoundConstants] = None, out_dir: Optional[str] = None) -> SweepRow:
    """
    One sweep row. An under-resolved run is repeated at 2n while n stays
    within ``max_n``. With ``out_dir`` the diagnostics of the kept run are
    written to diagnostics_row<index>.csv there.
    """
    while True:
        config = base.with_overrides(grid=GridSpec(n, base.grid.length),
                                     params=PhysParams(nu, base.params.mu))
        result = run(config)
        if result.resolved or not refine or 2 * n > max_n:
            break
        logger.info("[SWEEP] row %d (nu=%g) under-resolved at n=%d, refining", index, nu, n)
        n *= 2
    if out_dir is not None:
        write_csv(result.records, os.path.join(out_dir, row_csv_name(index)))
    return _row_from_result(index, result, constants)


def _row_from_result(index: int, result: RunResult, constants: Optional[BoundConstants]) -> SweepRow:
    config = result.config
    d = dimensionless(config.params, config.forcing, config.grid, config.sigma1)
    report = damped_bounds(d, config.grid.area, config.sigma1, constants)
    row = SweepRow(
        index=index,
        nu=config.params.nu,
        n=config.grid.n,
        D=d.D,
        measured_la=result.radius,
        la_lower=report.la_lower,
        la_gevrey=report.la_gevrey,
        l_dn_damped=report.l_dn_damped,
        resolved=result.resolved,
        accepted_samples=result.accepted_samples(),
    )
    logger.info("[SWEEP] row %d nu=%g n=%d D=%.4g la=%s resolved=%s", index, row.nu, row.n,
                row.D, row.measured_la, row.resolved)
    return row


def summarize_sweep(rows: Sequence[SweepRow]) -> SweepResult:
    """Order rows by descending ν and fit la ∝ D^exponent on the usable ones."""
    ordered = sorted(rows, key=lambda r: (-r.nu, r.index))
    result = SweepResult(list(ordered))
    usable = result.usable_rows()
    if not usable:
        raise SweepError("no sweep row is resolved with an accepted radius", rows=result.rows)
    if len(usable) < 3:
        logger.warning("[SWEEP] only %d usable rows, exponent not fitted", len(usable))
        return result
    result.fitted_exponent, result.exponent_stderr = fit_scaling([(r.D, r.measured_la) for r in usable])
    logger.info("[SWEEP] fitted exponent %.4f +- %.4f over %d rows",
                result.fitted_exponent, result.exponent_stderr, len(usable))
    return result


async def run_sweep_async(cfg: SweepConfig, jobs: int = 1, constants: Optional[BoundConstants] = None,
                          out_dir: Optional[str] = None) -> SweepResult:
    """Run every row, ``jobs`` at a time in worker processes."""
    plan = cfg.planned()
    if len(plan) < 3:
        raise SweepError(f"a sweep needs at least 3 viscosities, got {len(plan)}")
    logger.info("[SWEEP] %d rows, jobs=%d", len(plan), jobs)
    args = [(i, cfg.base, nu, n, cfg.refine, cfg.max_n, constants, out_dir) for i, (nu, n) in enumerate(plan)]
    if jobs <= 1:
        rows = [run_row(*a) for a in args]
    else:
        loop = asyncio.get_running_loop()
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = await asyncio.gather(*(loop.run_in_executor(pool, run_row, *a) for a in args))
    return summarize_sweep(rows)


def run_sweep(cfg: SweepConfig, jobs: int = 1, constants: Optional[BoundConstants] = None,
              out_dir: Optional[str] = None) -> SweepResult:
    """Blocking wrapper around run_sweep_async."""
    return asyncio.run(run_sweep_async(cfg, jobs, constants, out_dir))


@dataclass
class BoundComparison:
    """Measured radius against the damped-system bounds, row by row."""
    rows: List[Dict[str, float]]
    compensated_min: float
    compensated_max: float
    spread: float
    spread_factor: float
    spread_exceeded: bool
    worst_lower_ratio: float
    lower_violated: bool

    def to_dict(self) -> dict:
        return {
            "rows": [{k: _json_float(v) for k, v in r.items()} for r in self.rows],
            "compensated_min": self.compensated_min,
            "compensated_max": self.compensated_max,
            "spread": self.spread,
            "spread_factor": self.spread_factor,
            "spread_exceeded": self.spread_exceeded,
            "worst_lower_ratio": self.worst_lower_ratio,
            "lower_violated": self.lower_violated,
        }

    def to_json(self) -> str:
        return _dumps(self.to_dict())


def compensated(la: float, D: float) -> float:
    """la·D^{1/2}(1 + ln D)^{1/2}, constant along the lower-bound law."""
    log_d, _ = clamped_log(D)
    return la * math.sqrt(D) * math.sqrt(1.0 + log_d)


def compare_bounds(sweep: SweepResult, spread_factor: float = 3.0) -> BoundComparison:
    """Tabulate la/la_lower, la/l_dn and the spread of the compensated product."""
    usable = sweep.usable_rows()
    if len(usable) < 2:
        raise SweepError(f"bound comparison needs at least 2 resolved rows, got {len(usable)}",
                         rows=sweep.rows)
    rows = []
    for r in usable:
        rows.append({
            "nu": r.nu,
            "D": r.D,
            "measured_la": r.measured_la,
            "ratio_lower": r.measured_la / r.la_lower,
            "ratio_dn": r.measured_la / r.l_dn_damped,
            "compensated": compensated(r.measured_la, r.D),
        })
    comp = [row["compensated"] for row in rows]
    lo, hi = min(comp), max(comp)
    spread = hi / lo
    worst = min(row["ratio_lower"] for row in rows)
    out = BoundComparison(rows, lo, hi, spread, spread_factor, spread > spread_factor, worst, worst < 1.0)
    if out.spread_exceeded:
        logger.warning("[SWEEP] compensated product spread %.3f exceeds %.3f", spread, spread_factor)
    if out.lower_violated:
        logger.warning("[SWEEP] measured radius below la_lower by factor %.3f", 1.0 / worst)
    return out


def _sync_error(master: SpectralField, slave: SpectralField) -> float:
    scale = norm(master, NormSpec.l2())
    diff = norm(master - slave, NormSpec.l2())
    return diff / scale if scale > 0 else diff


def spin_up(cfg: SimConfig) -> State:
    """Master state at t = spinup, without diagnostics."""
    integ = Integrator(cfg.grid, cfg.params, build_forcing(cfg.forcing, cfg.grid),
                       get_fft_backend(cfg.fft_backend))
    return advance(integ, initial_state(cfg), cfg.spinup_time, cfg.dt)


def coupled_modes(grid: GridSpec, kappa_c: float) -> np.ndarray:
    """Mask of the wave-vectors with |j| ≤ κ_c."""
    return wavenumbers(grid).jmag <= kappa_c


def _slave_start(master: State, cfg: SimConfig, kappa_c: float) -> State:
    """Master with the uncoupled modes zeroed plus one large-scale kick just outside the coupled disk."""
    grid = cfg.grid
    coeffs = np.where(coupled_modes(grid, kappa_c), master.omega.coeffs, 0.0)
    j = int(math.floor(kappa_c)) + 1
    rng = np.random.default_rng(cfg.seed)
    amp = float(np.abs(master.omega.coeffs).max()) or 1.0
    kick = amp * np.exp(1j * rng.uniform(0.0, 2.0 * math.pi))
    coeffs[j % grid.n, 0] += kick
    coeffs[-j % grid.n, 0] += np.conj(kick)
    return State(master.t, SpectralField(grid, coeffs))


def check_cutoff(grid: GridSpec, kappa_c: float) -> None:
    """0 ≤ κ_c < dealias_cutoff."""
    if not 0 <= kappa_c < grid.dealias_cutoff:
        raise ValueError(f"kappa_c must lie in [0, {grid.dealias_cutoff}) for n={grid.n}, got {kappa_c}")


def determining_modes(cfg: SimConfig, kappa_c: float, master_start: Optional[State] = None,
                      horizon: Optional[float] = None, threshold: float = SYNC_THRESHOLD) -> SyncResult:
    """
    Master-slave synchronization: after every step the slave's modes with
    |j| ≤ κ_c are overwritten by the master's.
    """
    grid = cfg.grid
    check_cutoff(grid, kappa_c)
    if horizon is None:
        horizon = SYNC_HORIZON_DAMPING_TIMES / cfg.params.mu if cfg.params.mu > 0 else cfg.t_end
    backend = get_fft_backend(cfg.fft_backend)
    integ = Integrator(grid, cfg.params, build_forcing(cfg.forcing, grid), backend)
    master = master_start if master_start is not None else spin_up(cfg)
    slave = _slave_start(master, cfg, kappa_c)
    mask = coupled_modes(grid, kappa_c)
    n_det = int(mask.sum())
    t_start = master.t
    until = t_start + horizon

    times = [0.0]
    errors = [_sync_error(master.omega, slave.omega)]
    logger.info("[SYNC] kappa_c=%g N_det=%d horizon=%g e0=%.3e", kappa_c, n_det, horizon, errors[0])
    n_step = 0
    dt = cfg.dt
    synchronized = errors[0] < threshold
    while master.t < until and not synchronized:
        if cfg.dt is None and n_step % DT_REFRESH_STEPS == 0:
            dt = integ.cfl_dt(master)
        h = min(dt, until - master.t)
        master = integ.step(master, h)
        slave = integ.step(slave, h)
        coeffs = slave.omega.coeffs.copy()
        coeffs[mask] = master.omega.coeffs[mask]
        slave = State(master.t, SpectralField(grid, coeffs))
        n_step += 1
        if n_step % cfg.sample_every == 0 or master.t >= until:
            e = _sync_error(master.omega, slave.omega)
            times.append(master.t - t_start)
            errors.append(e)
            synchronized = e < threshold

    rate = _decay_rate(times, errors)
    if synchronized and not (rate is not None and rate > 0):
        rate = math.inf
    logger.info("[SYNC] kappa_c=%g synchronized=%s e=%.3e rate=%s", kappa_c, synchronized, errors[-1], rate)
    return SyncResult(kappa_c, n_det, times, errors, rate, synchronized)


def _decay_rate(times: Sequence[float], errors: Sequence[float]) -> Optional[float]:
    from scipy import stats

    t = np.array(times)
    e = np.array(errors)
    live = e > 0
    if live.sum() < 3 or np.ptp(t[live]) == 0:
        return None
    return -float(stats.linregress(t[live], np.log(e[live])).slope)


@dataclass
class DeterminingScan:
    """Synchronization over several cutoffs sharing one master spin-up."""
    results: List[SyncResult]
    D: float
    n_pred: float
    dim_bound: float
    minimal_n_det: Optional[int] = None
    bound_ok: Optional[bool] = None
    findings: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "results": [r.to_dict() for r in self.results],
            "D": self.D,
            "n_pred": self.n_pred,
            "dim_bound": self.dim_bound,
            "minimal_n_det": self.minimal_n_det,
            "bound_ok": self.bound_ok,
            "findings": self.findings,
        }

    def to_json(self) -> str:
        return _dumps(self.to_dict())


def scan_determining_modes(cfg: SimConfig, kappa_values: Sequence[float],
                           horizon: Optional[float] = None, threshold: float = SYNC_THRESHOLD,
                           constants: Optional[BoundConstants] = None) -> DeterminingScan:
    """
    Run determining_modes for each κ_c from one master state; report the
    smallest sufficient N_det against N_pred = |Ω|/l_dn² and c₄·D.
    """
    for k in kappa_values:
        check_cutoff(cfg.grid, k)
    d = dimensionless(cfg.params, cfg.forcing, cfg.grid, cfg.sigma1)
    report = damped_bounds(d, cfg.grid.area, cfg.sigma1, constants)
    master = spin_up(cfg)
    results = [determining_modes(cfg, k, master, horizon, threshold) for k in sorted(kappa_values)]
    scan = DeterminingScan(results, d.D, report.n_det_predicted, report.dim_damped)
    sufficient = [r.n_det for r in results if r.synchronized]
    if sufficient:
        scan.minimal_n_det = min(sufficient)
        scan.bound_ok = scan.minimal_n_det <= scan.n_pred
        if not scan.bound_ok:
            logger.warning("[SYNC] minimal N_det=%d exceeds prediction %.1f", scan.minimal_n_det, scan.n_pred)
    seen_sync = False
    for r in results:
        if seen_sync and not r.synchronized:
            scan.findings.append(f"not synchronized at kappa_c={r.kappa_c} although a smaller cutoff was")
        seen_sync = seen_sync or r.synchronized
    for note in scan.findings:
        logger.info("[SYNC] finding: %s", note)
    return scan


def measured_m2p(result: RunResult, p: float, headroom: float = M2P_HEADROOM) -> float:
    """max post-spinup ‖ω‖_{L2p} of a run, with headroom."""
    q = 2 * p
    post = [r for r in result.records if r.post_spinup] or result.records
    if post and q in post[0].lp_norms:
        peak = max(r.lp_norms[q] for r in post)
    else:
        peak = norm(result.final.omega, NormSpec.lp(q))
    return peak * (1.0 + headroom)
