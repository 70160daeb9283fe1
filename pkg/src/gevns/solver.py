"""
Time integration of the damped-driven vorticity equation

    ∂t ω + u·∇ω = νΔω - μω + F

with an integrating-factor SSP-RK3 scheme.

The linear part is folded together with the constant forcing into the
exact per-mode affine flow ω̂ ↦ ω̂_s + (ω̂ - ω̂_s)e^{-(ν|k|²+μ)h},
ω̂_s = F̂/(ν|k|²+μ), so only advection is advanced explicitly.

``iterate`` is the sans-io core: it yields events and never touches files.
``run`` drives it and collects a RunResult.
"""

from dataclasses import dataclass, field
from typing import Callable, Dict, Generator, List, Optional, Tuple
import logging
import math

import numpy as np

from .constants import CFL_NUMBER, DT_REFRESH_STEPS, STAGE_GROWTH_LOG_LIMIT
from .diagnostics import budget_residuals, record, run_radius
from .errors import BlowUpError, ForcingError
from .fft import get_fft_backend
from .interfaces import FFTBackend
from .models import (
    DiagnosticsRecord,
    ForcingMode,
    ForcingSpec,
    GridSpec,
    InitialCondition,
    InitialKind,
    PhysParams,
    SimConfig,
)
from .spectral import (
    SpectralField,
    advect,
    biot_savart,
    symmetrize,
    wavenumbers,
    _synthesize,
)

logger = logging.getLogger(__name__)


@dataclass
class State:
    """Current time and vorticity; picklable between processes."""
    t: float
    omega: SpectralField

    def copy(self) -> "State":
        return State(self.t, self.omega.copy())


def _place_mode(coeffs: np.ndarray, grid: GridSpec, mode: ForcingMode) -> None:
    """Add amplitude·cos(j·x + phase) to a coefficient array."""
    n = grid.n
    j1, j2 = mode.j1, mode.j2
    if j1 == 0 and j2 == 0:
        raise ForcingError("mode (0, 0) is not allowed: the field must have zero mean")
    if mode.index_magnitude > grid.dealias_cutoff:
        raise ForcingError(
            f"mode ({j1}, {j2}) lies outside the dealiasing cutoff {grid.dealias_cutoff}"
        )
    half = 0.5 * mode.amplitude * complex(math.cos(mode.phase), math.sin(mode.phase))
    coeffs[j1 % n, j2 % n] += half
    coeffs[-j1 % n, -j2 % n] += half.conjugate()


def build_forcing(spec: ForcingSpec, grid: GridSpec) -> SpectralField:
    """F̂ for F = Σ amplitude·cos(j·x·2π/L + phase)."""
    coeffs = np.zeros((grid.n, grid.n), dtype=np.complex128)
    for mode in spec.modes:
        _place_mode(coeffs, grid, mode)
    return SpectralField(grid, coeffs)


def initial_state(config: SimConfig) -> State:
    """Initial vorticity per ``config.initial`` and ``config.seed``."""
    grid = config.grid
    init: InitialCondition = config.initial
    if init.kind is InitialKind.ZERO:
        return State(0.0, SpectralField.zeros(grid))
    if init.kind is InitialKind.SINGLE_MODE:
        coeffs = np.zeros((grid.n, grid.n), dtype=np.complex128)
        _place_mode(coeffs, grid, ForcingMode(init.mode[0], init.mode[1], init.amplitude))
        return State(0.0, SpectralField(grid, coeffs))

    wn = wavenumbers(grid)
    rng = np.random.default_rng(config.seed)
    phases = rng.uniform(0.0, 2.0 * math.pi, size=(grid.n, grid.n))
    live = wn.mask & (wn.jmag > 0)
    shape = np.zeros_like(wn.jmag)
    shape[live] = wn.jmag[live] ** init.slope * np.exp(-wn.jmag[live])
    coeffs = symmetrize(shape * np.exp(1j * phases))
    coeffs[0, 0] = 0.0
    rms = math.sqrt(float(np.sum(np.abs(coeffs) ** 2)))
    if rms > 0:
        coeffs *= init.amplitude / rms
    return State(0.0, SpectralField(grid, coeffs))


class Integrator:
    """
    IF-SSP-RK3 stepper for fixed grid, parameters and forcing.

    Exponential factors are cached per step size.
    """

    def __init__(self, grid: GridSpec, params: PhysParams, forcing: SpectralField,
                 backend: Optional[FFTBackend] = None):
        self.grid = grid
        self.params = params
        self.forcing = forcing
        self.backend = backend
        wn = wavenumbers(grid)
        self.rate = params.nu * wn.ksq + params.mu
        self.mask = wn.mask
        still = self.rate == 0
        if np.any(forcing.coeffs[still] != 0):
            raise ForcingError("forcing acts on a mode with zero linear damping (nu|k|^2 + mu = 0)")
        steady = np.zeros_like(forcing.coeffs)
        np.divide(forcing.coeffs, self.rate, out=steady, where=~still)
        self.steady = steady
        self._factors: Dict[float, Tuple[np.ndarray, np.ndarray, np.ndarray]] = {}

    def _exp(self, dt: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        factors = self._factors.get(dt)
        if factors is None:
            if len(self._factors) > 4:
                self._factors.clear()
            growth = 0.5 * dt * float(self.rate[self.mask].max())
            if growth > STAGE_GROWTH_LOG_LIMIT:
                logger.warning("[STEP] dt=%.4g: in-band stage growth e^%.1f can amplify round-off", dt, growth)
            factors = (
                np.exp(-self.rate * dt),
                np.exp(-self.rate * (0.5 * dt)),
                # zero outside the dealiased band, where the tendency vanishes
                np.exp(np.where(self.mask, self.rate * (0.5 * dt), -np.inf)),
            )
            self._factors[dt] = factors
        return factors

    def _rhs(self, v: np.ndarray) -> np.ndarray:
        """Explicit part -u·∇ω evaluated at ω̂ = v + ω̂_s."""
        return -advect(SpectralField(self.grid, v + self.steady), self.backend).coeffs

    def step(self, state: State, dt: float) -> State:
        """Advance by ``dt``; NaN/Inf raises BlowUpError."""
        full, half, back = self._exp(dt)
        v = state.omega.coeffs - self.steady
        a = v + dt * self._rhs(v)
        v1 = full * a
        v2 = 0.75 * half * v + 0.25 * (half * a + back * (dt * self._rhs(v1)))
        v3 = (1.0 / 3.0) * full * v + (2.0 / 3.0) * half * (v2 + dt * self._rhs(v2))
        out = v3 + self.steady
        if not np.isfinite(out).all():
            raise BlowUpError(f"non-finite vorticity after step from t={state.t:.6g}",
                              last_time=state.t, last_state=state)
        out[0, 0] = 0.0
        return State(state.t + dt, SpectralField(self.grid, out))

    def max_velocity(self, state: State) -> float:
        u1, u2 = biot_savart(state.omega)
        speed = np.hypot(_synthesize(u1.coeffs, self.grid, self.backend),
                         _synthesize(u2.coeffs, self.grid, self.backend))
        return float(speed.max())

    def cfl_dt(self, state: State) -> float:
        """dt = 0.5·Δx / max(1, ‖u‖_∞)."""
        return CFL_NUMBER * self.grid.dx / max(1.0, self.max_velocity(state))


def step(state: State, dt: float, params: PhysParams, forcing: SpectralField,
         backend: Optional[FFTBackend] = None) -> State:
    """One IF-SSP-RK3 step of the vorticity equation."""
    return Integrator(state.omega.grid, params, forcing, backend).step(state, dt)


def advance(integ: Integrator, state: State, until: float, dt: Optional[float] = None) -> State:
    """Step without diagnostics until t = ``until``; ``dt=None`` uses the CFL rule."""
    n_step = 0
    h = dt
    while state.t < until:
        if dt is None and n_step % DT_REFRESH_STEPS == 0:
            h = integ.cfl_dt(state)
        state = integ.step(state, min(h, until - state.t))
        n_step += 1
    logger.debug("[RUN] advanced to t=%g in %d steps", state.t, n_step)
    return state


@dataclass
class Sampled:
    """A diagnostics sample was taken."""
    step: int
    state: State
    record: DiagnosticsRecord


@dataclass
class CheckpointDue:
    """The configured checkpoint cadence was reached."""
    step: int
    state: State


def iterate(config: SimConfig, start: Optional[State] = None
            ) -> Generator[object, None, State]:
    """
    Integrate ``config`` and yield Sampled / CheckpointDue events.

    Samples are taken at t=0, every ``sample_every`` steps and at t_end.
    The generator's return value is the final state.
    """
    grid = config.grid
    backend = get_fft_backend(config.fft_backend)
    forcing = build_forcing(config.forcing, grid)
    integ = Integrator(grid, config.params, forcing, backend)
    state = start if start is not None else initial_state(config)
    spinup = config.spinup_time

    def sample(n_step: int, s: State) -> Sampled:
        rec = record(s, config.params, forcing, config.sigma1, radius=config.radius, spinup=spinup)
        logger.debug("[STEP] t=%.6g E=%.6g Z=%.6g", rec.t, rec.energy, rec.enstrophy)
        return Sampled(n_step, s, rec)

    logger.info("[RUN] n=%d nu=%g mu=%g t_end=%g spinup=%g", grid.n, config.params.nu,
                config.params.mu, config.t_end, spinup)
    yield sample(0, state)

    n_step = 0
    dt = config.dt
    while state.t < config.t_end:
        if config.dt is None and n_step % DT_REFRESH_STEPS == 0:
            dt = integ.cfl_dt(state)
        h = min(dt, config.t_end - state.t)
        state = integ.step(state, h)
        n_step += 1
        if config.t_end - state.t <= 1e-12 * max(1.0, config.t_end):
            state = State(config.t_end, state.omega)
        done = state.t >= config.t_end
        if n_step % config.sample_every == 0 or done:
            yield sample(n_step, state)
        if config.checkpoint_every and n_step % config.checkpoint_every == 0:
            yield CheckpointDue(n_step, state)
    logger.info("[RUN] finished at t=%g after %d steps", state.t, n_step)
    return state


@dataclass
class RunResult:
    """Time series of diagnostics plus the final state."""
    config: SimConfig
    records: List[DiagnosticsRecord]
    final: State
    checkpoints: List[Tuple[int, bytes]] = field(default_factory=list)

    @property
    def resolved(self) -> bool:
        post = [r for r in self.records if r.post_spinup] or self.records
        return all(r.resolved for r in post)

    @property
    def radius(self) -> Optional[float]:
        """Run-level analyticity radius (median of accepted samples)."""
        return run_radius(self.records)

    def accepted_samples(self) -> int:
        return sum(1 for r in self.records
                   if r.post_spinup and r.radius is not None and r.radius.accepted)


def run(config: SimConfig, on_checkpoint: Optional[Callable[[State, bytes], None]] = None,
        start: Optional[State] = None) -> RunResult:
    """
    Integrate ``config`` to t_end and collect diagnostics.

    Checkpoints go to ``on_checkpoint`` when given, otherwise they are kept
    on the result. On blow-up the records gathered so far travel on the
    BlowUpError.
    """
    from .checkpoint import save_checkpoint

    records: List[DiagnosticsRecord] = []
    checkpoints: List[Tuple[int, bytes]] = []
    gen = iterate(config, start)
    try:
        while True:
            event = next(gen)
            if isinstance(event, Sampled):
                records.append(event.record)
            elif isinstance(event, CheckpointDue):
                payload = save_checkpoint(event.state, config)
                logger.debug("[CKPT] step %d t=%g (%d bytes)", event.step, event.state.t, len(payload))
                if on_checkpoint is not None:
                    on_checkpoint(event.state, payload)
                else:
                    checkpoints.append((event.step, payload))
    except StopIteration as stop:
        final = stop.value
    except BlowUpError as e:
        budget_residuals(records, config.params)
        e.records = records
        logger.warning("[RUN] blow-up after t=%g, %d samples kept", e.last_time, len(records))
        raise
    budget_residuals(records, config.params)
    result = RunResult(config, records, final, checkpoints)
    if not result.resolved:
        logger.warning("[RUN] under-resolved: S(cutoff)/max S above threshold at n=%d", config.grid.n)
    return result


def rescale_dimensionless(config: SimConfig) -> SimConfig:
    """
    Map a dimensional configuration to x' = x/L, t' = νt/L², μ' = μL²/ν,
    F' = (L⁴/ν²)F on the unit torus with ν' = 1.

    D is unchanged and ‖ω'‖_∞ ≤ D on the attractor.
    """
    nu, mu = config.params.nu, config.params.mu
    if nu <= 0:
        raise ValueError("dimensionless rescaling needs nu > 0")
    length = config.grid.length
    time_scale = nu / length ** 2
    force_scale = length ** 4 / nu ** 2
    modes = tuple(ForcingMode(m.j1, m.j2, m.amplitude * force_scale, m.phase)
                  for m in config.forcing.modes)
    init = config.initial
    if init.kind is not InitialKind.ZERO:
        init = InitialCondition(init.kind, init.mode, init.amplitude * length ** 2 / nu, init.slope)
    return config.with_overrides(
        grid=GridSpec(config.grid.n, 1.0),
        params=PhysParams(1.0, mu * length ** 2 / nu),
        forcing=ForcingSpec(modes),
        t_end=config.t_end * time_scale,
        dt=config.dt * time_scale if config.dt is not None else None,
        spinup=config.spinup_time * time_scale,
        initial=init,
    )
