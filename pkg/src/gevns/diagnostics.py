"""
Per-snapshot and per-run measurements.

Snapshot quantities come from the spectral core; the radius estimator fits
ln S(κ) = a - l_a·|k| on the dissipation range of the shell spectrum.
"""

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, TextIO, Union
import logging
import math

import numpy as np

from .constants import (
    ATTRACTOR_TOLERANCE,
    BOUND_SLACK,
    CSV_COLUMNS,
    CSV_FLOAT_FORMAT,
    FIT_CUTOFF_MARGIN,
    FIT_FLOOR_FRACTION,
    FIT_MIN_R2,
    FIT_MIN_SHELLS,
    FIT_UPPER_FRACTION,
    LP_EXPONENTS,
    UNDER_RESOLVED_RATIO,
)
from .errors import NormOverflowError
from .models import DiagnosticsRecord, NormSpec, PhysParams, RadiusEstimate
from .spectral import (
    ShellSpectrum,
    SpectralField,
    energy,
    enstrophy,
    norm,
    shell_spectrum,
    wavenumbers,
)

logger = logging.getLogger(__name__)


def phi(t: float, nu: float, lambda1: float, sigma1: float) -> float:
    """Gevrey weight exponent φ(t) = min(ν λ₁^{1/2} t, σ₁)."""
    return min(nu * math.sqrt(lambda1) * max(t, 0.0), sigma1)


def gevrey_half_norm(omega: SpectralField, tau: float) -> Optional[float]:
    """‖A^{1/2}u‖_τ = (|Ω| Σ e^{2τ|k|} |ω̂_k|²)^{1/2}; None on overflow."""
    try:
        return norm(omega, NormSpec.gevrey(tau, s=0.5, alpha=0.0))
    except NormOverflowError as e:
        logger.debug("[STEP] Gevrey norm overflow at shell %.3f (tau=%g)", e.shell, tau)
        return None


def forcing_work(omega: SpectralField, forcing: SpectralField) -> float:
    """⟨f, u⟩ = |Ω| Re Σ F̂ conj(ω̂)/|k|², with f and u the Biot-Savart velocities."""
    wn = wavenumbers(omega.grid)
    return float(omega.grid.area * np.real(np.sum(forcing.coeffs * np.conj(omega.coeffs) * wn.inv_ksq)))


def budget_rhs(omega: SpectralField, params: PhysParams, forcing: SpectralField) -> float:
    """Right side of d/dt ½‖u‖² = -ν‖ω‖² - μ‖u‖² + ⟨f, u⟩."""
    return (-2.0 * params.nu * enstrophy(omega)
            - 2.0 * params.mu * energy(omega)
            + forcing_work(omega, forcing))


def is_resolved(spectrum: ShellSpectrum) -> bool:
    """S(cutoff)/max S must not exceed the under-resolution ratio."""
    if spectrum.values.size == 0:
        return True
    peak = spectrum.values.max()
    if peak == 0:
        return True
    last = spectrum.values[spectrum.kappa == spectrum.cutoff]
    tail = float(last[0]) if last.size else 0.0
    return tail / peak <= UNDER_RESOLVED_RATIO


def record(state, params: PhysParams, forcing: SpectralField, gevrey_sigma1: float,
           radius: bool = True, spinup: float = 0.0) -> DiagnosticsRecord:
    """Diagnostics of one state; ``state`` has ``t`` and ``omega``."""
    omega = state.omega
    lp = {p: norm(omega, NormSpec.lp(p)) for p in LP_EXPONENTS}
    tau = phi(state.t, params.nu, omega.grid.lambda1, gevrey_sigma1)
    spectrum = shell_spectrum(omega)
    estimate = estimate_radius(spectrum) if radius else None
    return DiagnosticsRecord(
        t=state.t,
        energy=energy(omega),
        enstrophy=enstrophy(omega),
        lp_norms=lp,
        gevrey_half=gevrey_half_norm(omega, tau),
        radius=estimate,
        budget_rhs=budget_rhs(omega, params, forcing),
        resolved=is_resolved(spectrum),
        post_spinup=state.t >= spinup,
    )


def estimate_radius(
    spectrum: ShellSpectrum,
    upper_fraction: float = FIT_UPPER_FRACTION,
    floor_fraction: float = FIT_FLOOR_FRACTION,
    cutoff_margin: int = FIT_CUTOFF_MARGIN,
    min_shells: int = FIT_MIN_SHELLS,
    min_r2: float = FIT_MIN_R2,
) -> RadiusEstimate:
    """
    Fit the exponential decay rate of a shell spectrum.

    The window starts at the first shell below ``upper_fraction``·max S and
    ends at the last shell above ``floor_fraction``·max S that is at least
    ``cutoff_margin`` shells below the dealiasing cutoff. Quality failures
    give ``accepted=False``, never an exception.
    """
    from scipy import stats

    kappa = np.asarray(spectrum.kappa)
    values = np.asarray(spectrum.values)
    live = values > 0
    kappa, values = kappa[live], values[live]
    rejected = RadiusEstimate(math.nan, math.nan, 0.0, (0, 0), False)
    if kappa.size == 0:
        return rejected
    peak = values.max()
    below = kappa[values <= upper_fraction * peak]
    above = kappa[(values >= floor_fraction * peak) & (kappa <= spectrum.cutoff - cutoff_margin)]
    if below.size == 0 or above.size == 0:
        return rejected
    lo, hi = int(below.min()), int(above.max())
    in_window = (kappa >= lo) & (kappa <= hi)
    if hi <= lo or in_window.sum() < max(min_shells, 3):
        return RadiusEstimate(math.nan, math.nan, 0.0, (lo, max(hi, lo)), False)

    k0 = 2.0 * math.pi / spectrum.length
    fit = stats.linregress(k0 * kappa[in_window], np.log(values[in_window]))
    l_a = -float(fit.slope)
    r2 = float(fit.rvalue) ** 2
    accepted = bool(l_a > 0 and r2 >= min_r2)
    suspect = accepted and l_a > spectrum.length / 2
    if suspect:
        logger.warning("[STEP] radius %.4g exceeds half the period; fit artifact", l_a)
    return RadiusEstimate(l_a, float(fit.intercept), r2, (lo, hi), accepted, suspect)


def run_radius(records: Iterable[DiagnosticsRecord]) -> Optional[float]:
    """Median of accepted post-spinup per-snapshot radii."""
    values = [r.radius.l_a for r in records
              if r.post_spinup and r.radius is not None and r.radius.accepted]
    if not values:
        return None
    return float(np.median(values))


@dataclass
class GevreyEnvelope:
    """φ(t)-weighted ‖A^{1/2}u‖ series from a restart point."""
    times: List[float]
    values: List[float]
    overflow_time: Optional[float] = None


def gevrey_envelope(states: Sequence, params: PhysParams, sigma1: float) -> GevreyEnvelope:
    """
    Track ‖A^{1/2}u(t)‖_{φ(t)} with t rebased to the first state.

    The series stops at the first overflow, whose time is reported.
    """
    out = GevreyEnvelope([], [])
    if not states:
        return out
    t0 = states[0].t
    for state in states:
        t = state.t - t0
        value = gevrey_half_norm(state.omega, phi(t, params.nu, state.omega.grid.lambda1, sigma1))
        if value is None:
            out.overflow_time = t
            break
        out.times.append(t)
        out.values.append(value)
    return out


@dataclass
class VorticityMargins:
    """Gronwall margins of ‖ω(t)‖_{Lp} along a series."""
    p: float
    times: List[float]
    margins: List[float]
    threshold: float
    violations: List[int] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def _relaxation(mu: float, t: float) -> float:
    """(1 - e^{-μt})/μ, equal to t when μ = 0."""
    if mu == 0:
        return t
    return -math.expm1(-mu * t) / mu


def check_vorticity_bound(series: Sequence[DiagnosticsRecord], forcing: SpectralField,
                          mu: float, p: float) -> VorticityMargins:
    """
    margin(t) = ‖ω(0)‖_p e^{-μt} + ‖F‖_p (1 - e^{-μt})/μ - ‖ω(t)‖_p.

    Samples with margin below -1e-6·‖F‖_p/μ are flagged.
    """
    if p not in LP_EXPONENTS:
        raise ValueError(f"p must be one of {LP_EXPONENTS}, got {p}")
    out = VorticityMargins(p, [], [], 0.0)
    if not series:
        return out
    f_norm = norm(forcing, NormSpec.lp(p))
    t0 = series[0].t
    w0 = series[0].lp_norms[p]
    # unforced runs are judged against the initial size instead
    scale = f_norm / mu if f_norm > 0 and mu > 0 else max(f_norm, w0)
    out.threshold = -BOUND_SLACK * scale
    for i, rec in enumerate(series):
        t = rec.t - t0
        bound = w0 * math.exp(-mu * t) + f_norm * _relaxation(mu, t)
        margin = bound - rec.lp_norms[p]
        out.times.append(t)
        out.margins.append(margin)
        if margin < out.threshold:
            out.violations.append(i)
    if out.violations:
        logger.warning("[STEP] vorticity bound p=%s violated at %d samples (worst %.3e)",
                       p, len(out.violations), min(out.margins))
    return out


def on_attractor(series: Sequence[DiagnosticsRecord], forcing_linf: float, mu: float,
                 window: int, tol: float = ATTRACTOR_TOLERANCE) -> bool:
    """
    True if the last ``window`` post-spinup samples all satisfy
    ‖ω‖_∞ ≤ ‖F‖_∞/μ·(1 + tol).
    """
    post = [r for r in series if r.post_spinup]
    if mu <= 0 or len(post) < window:
        return False
    limit = forcing_linf / mu * (1.0 + tol)
    return all(r.lp_norms[math.inf] <= limit for r in post[-window:])


def normalized_lp(rec: DiagnosticsRecord, area: float) -> Dict[float, float]:
    """|Ω|^{-1/p}‖ω‖_p, nondecreasing in p."""
    return {p: v * (1.0 if math.isinf(p) else area ** (-1.0 / p)) for p, v in rec.lp_norms.items()}


def budget_residuals(series: List[DiagnosticsRecord], params: PhysParams) -> List[float]:
    """
    Fill ``budget_residual`` with |dE/dt - rhs| relative to the size of the
    dissipation terms, dE/dt by second-order differences over sample times.
    """
    if len(series) < 3:
        for r in series:
            r.budget_residual = 0.0
        return [0.0] * len(series)
    t = np.array([r.t for r in series])
    e = np.array([r.energy for r in series])
    z = np.array([r.enstrophy for r in series])
    rhs = np.array([r.budget_rhs for r in series])
    dedt = np.gradient(e, t, edge_order=2)
    dissipation = 2.0 * params.nu * z + 2.0 * params.mu * e
    scale = np.maximum(np.maximum(np.abs(dedt), np.abs(rhs)), dissipation)
    residual = np.divide(np.abs(dedt - rhs), scale, out=np.zeros_like(rhs), where=scale > 0)
    for r, value in zip(series, residual):
        r.budget_residual = float(value)
    return residual.tolist()


def records_frame(series: Iterable[DiagnosticsRecord]):
    """Diagnostics as a pandas DataFrame with the fixed column order."""
    import pandas as pd

    return pd.DataFrame([r.to_row() for r in series], columns=list(CSV_COLUMNS))


def write_csv(series: Iterable[DiagnosticsRecord], target: Union[str, TextIO]) -> None:
    """One row per sample, floats printed round-trip exact."""
    records_frame(series).to_csv(target, index=False, float_format=CSV_FLOAT_FORMAT)


def read_spectrum_csv(source: Union[str, TextIO], cutoff: Optional[int] = None,
                      length: float = 2.0 * math.pi) -> ShellSpectrum:
    """Load a stored shell spectrum with columns ``kappa`` and ``S``."""
    import pandas as pd

    frame = pd.read_csv(source)
    missing = {"kappa", "S"} - set(frame.columns)
    if missing:
        raise ValueError(f"spectrum file lacks columns {sorted(missing)}")
    return ShellSpectrum.from_arrays(frame["kappa"].to_numpy(), frame["S"].to_numpy(), cutoff, length)


def write_spectrum_csv(spectrum: ShellSpectrum, target: Union[str, TextIO]) -> None:
    import pandas as pd

    frame = pd.DataFrame({"kappa": spectrum.kappa, "S": spectrum.values})
    frame.to_csv(target, index=False, float_format=CSV_FLOAT_FORMAT)
