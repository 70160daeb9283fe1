"""
Closed-form length scales, dimension bounds and admissible times.

All functions are pure. Absolute constants the analysis leaves abstract
come from BoundConstants (default 1); logarithms are natural with their
argument clamped below at e.
"""

from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple, Union
import logging
import math

import numpy as np

from .errors import BoundsError
from .models import (
    BoundConstants,
    BoundsReport,
    Dimensionless,
    ForcingSpec,
    GridSpec,
    NormSpec,
    PhysParams,
)
from .spectral import SpectralField, norm, wavenumbers

logger = logging.getLogger(__name__)


def clamped_log(x: float) -> Tuple[float, bool]:
    """ln(max(x, e)) and whether the clamp was active."""
    if x < math.e:
        return 1.0, True
    return math.log(x), False


def _forcing_field(forcing: Union[ForcingSpec, SpectralField], grid: GridSpec) -> SpectralField:
    if isinstance(forcing, SpectralField):
        return forcing
    from .solver import build_forcing
    return build_forcing(forcing, grid)


def dimensionless(params: PhysParams, forcing: Union[ForcingSpec, SpectralField],
                  grid: GridSpec, sigma1: float = 1.0) -> Dimensionless:
    """
    Grashof number G = ‖f‖₂|Ω|/ν², damped number D = ‖F‖_∞|Ω|/(μν) and
    D₁ = ‖A^{1/2}f‖_{σ₁}/(λ₁ν^{3/2}μ^{1/2}), with f = ∇^⊥Δ^{-1}F.
    """
    if params.nu <= 0 or params.mu <= 0:
        raise BoundsError(f"bounds need nu > 0 and mu > 0, got nu={params.nu}, mu={params.mu}")
    F = _forcing_field(forcing, grid)
    if not np.any(F.coeffs):
        raise BoundsError("bounds need nontrivial forcing")
    wn = wavenumbers(grid)
    area = grid.area
    lambda1 = grid.lambda1
    forcing_linf = norm(F, NormSpec.linf())
    forcing_l2 = norm(F, NormSpec.l2())
    f_l2 = math.sqrt(area * float(np.sum(np.abs(F.coeffs) ** 2 * wn.inv_ksq)))
    # |A^{1/2} f̂| = |F̂| mode by mode
    forcing_gevrey = norm(F, NormSpec.gevrey(sigma1, s=0.5))
    nu, mu = params.nu, params.mu
    return Dimensionless(
        G=f_l2 * area / nu ** 2,
        D=forcing_linf * area / (mu * nu),
        D1=forcing_gevrey / (lambda1 * nu ** 1.5 * mu ** 0.5),
        area=area,
        lambda1=lambda1,
        nu=nu,
        mu=mu,
        sigma1=sigma1,
        forcing_linf=forcing_linf,
        forcing_l2=forcing_l2,
        f_l2=f_l2,
        forcing_gevrey=forcing_gevrey,
    )


def la_lower(D: float, area: float, C: float = 1.0) -> float:
    """|Ω|^{1/2} / (C D^{1/2} (1 + ln D)^{1/2})."""
    log_d, _ = clamped_log(D)
    return math.sqrt(area) / (C * math.sqrt(D) * math.sqrt(1.0 + log_d))


def damped_bounds(d: Dimensionless, area: float, sigma1: float,
                  constants: Optional[BoundConstants] = None) -> BoundsReport:
    """Dimension, small-scale and analyticity bounds of the damped system."""
    k = constants or BoundConstants()
    D = d.D
    if D <= 1:
        logger.warning("[BOUNDS] D=%.4g <= 1: outside the logarithmic regime, logs clamped", D)
    root_area = math.sqrt(area)
    log_d, clamped = clamped_log(D)
    x = D * D + d.D1 + 1.0
    log_x, clamped_x = clamped_log(x)
    # T* ≥ c6 [νλ₁ X ln X]^{-1} with X = ‖A^{1/2}f‖²/(λ₁ν²μ²) + D₁ + 1
    y = d.forcing_l2 ** 2 / (d.lambda1 * d.nu ** 2 * d.mu ** 2) + d.D1 + 1.0
    log_y, clamped_y = clamped_log(y)
    if clamped:
        logger.warning("[BOUNDS] ln D clamped at 1 (D=%.4g)", D)
    return BoundsReport(
        constants=k,
        dimensionless=d,
        dim_damped=k.c4 * D,
        l_f_damped=root_area / math.sqrt(D),
        l_dn_damped=k.c5 * math.sqrt(area / D),
        la_gevrey=min(k.c7 * root_area / (x * log_x), sigma1),
        la_gevrey_asymptotic=k.c8 * root_area / (D * D * log_d),
        la_lower=la_lower(D, area, k.C),
        gevrey_time=k.c6 / (d.nu * d.lambda1 * y * log_y),
        h1_ball=d.forcing_l2 / d.mu,
        n_det_predicted=area / (k.c5 * math.sqrt(area / D)) ** 2,
        log_clamped=clamped or clamped_x or clamped_y,
    )


def classical_bounds(g: Dimensionless, area: float,
                     constants: Optional[BoundConstants] = None) -> BoundsReport:
    """Grashof-number bounds of the undamped Navier-Stokes system."""
    k = constants or BoundConstants()
    G = g.G
    if G <= 1:
        logger.warning("[BOUNDS] G=%.4g <= 1: outside the logarithmic regime, logs clamped", G)
    root_area = math.sqrt(area)
    log_g, clamped = clamped_log(G)
    return BoundsReport(
        constants=k,
        dimensionless=g,
        la_classical=k.c * root_area / (G * G * log_g),
        la_grashof_log=k.c3 * root_area / (math.sqrt(G) * (1.0 + log_g) ** 0.25),
        l_nodes_ns=k.c2 ** -0.5 * root_area / math.sqrt(G),
        dim_classical=k.c1 * G ** (2.0 / 3.0) * math.log1p(G) ** (1.0 / 3.0),
        l_f_classical=root_area / G ** (1.0 / 3.0),
        log_clamped=clamped,
    )


def bounds_report(params: PhysParams, forcing: Union[ForcingSpec, SpectralField], grid: GridSpec,
                  sigma1: float = 1.0, constants: Optional[BoundConstants] = None) -> BoundsReport:
    """Every bound for one configuration."""
    d = dimensionless(params, forcing, grid, sigma1)
    report = classical_bounds(d, grid.area, constants).merge(damped_bounds(d, grid.area, sigma1, constants))
    logger.info("[BOUNDS] G=%.4g D=%.4g D1=%.4g la_lower=%.4g", d.G, d.D, d.D1, report.la_lower)
    return report


@dataclass
class StripBound:
    """sup of |F + iG| over the strip |Im z| ≤ δ_F."""
    value: float
    upper_bound: bool


def strip_bound_mf(forcing: ForcingSpec, delta_F: float, length: float = 2.0 * math.pi) -> StripBound:
    """
    M_F of a band-limited forcing: |amp|·cosh(|k|δ_F) for one mode, the
    triangle-inequality sum Σ|amp|cosh(|k|δ_F) (flagged) otherwise.
    """
    if delta_F < 0:
        raise BoundsError(f"delta_F must be nonnegative, got {delta_F}")
    k0 = 2.0 * math.pi / length
    total = sum(abs(m.amplitude) * math.cosh(k0 * m.index_magnitude * delta_F) for m in forcing.modes)
    return StripBound(total, upper_bound=len(forcing.modes) > 1)


class StripWidth:
    """t ↦ δ(t), the lower bound on the analyticity strip for 0 < t ≤ t₀."""

    def __init__(self, p: float, M2p: float, delta_F: float, C: float = 1.0):
        self.p = p
        self.M2p = M2p
        self.delta_F = delta_F
        self.C = C

    def terms(self, t: float) -> Tuple[float, float, float, float, float]:
        p, M, C = self.p, self.M2p, self.C
        if t <= 0:
            return (0.0, math.inf, math.inf, math.inf, self.delta_F)
        return (
            math.sqrt(t) / C,
            1.0 / (C * p * t ** ((2 * p - 3) / (4 * p)) * M),
            1.0 / (C * p * t ** ((2 * p - 3) / (4 * p + 6)) * M ** (2 * p / (2 * p + 3))),
            1.0 / (p * math.sqrt(t) * M),
            self.delta_F,
        )

    def __call__(self, t: float) -> float:
        return min(self.terms(t))


def strip_time_and_width(p: float, M2p: float, MF: float, mu: float, delta_F: float,
                            constants: Optional[BoundConstants] = None) -> Tuple[float, StripWidth]:
    """t₀ = M_{2p}² / (C M_F²/μ) and the strip-width function δ(t)."""
    k = constants or BoundConstants()
    if p < 1.5:
        raise BoundsError(f"p must be >= 3/2, got {p}")
    if not M2p > 0:
        raise BoundsError(f"M2p must be positive, got {M2p}")
    if delta_F < 0:
        raise BoundsError(f"delta_F must be nonnegative, got {delta_F}")
    t0 = math.inf if MF == 0 else M2p ** 2 / (k.C * MF ** 2 / mu)
    return t0, StripWidth(p, M2p, delta_F, k.C)


def young_strip(t: float, p: float, M2p: float, delta_F: float, C: float = 1.0) -> float:
    """Simplified strip width min(t^{1/2}/C, 1/(C p t^{1/2}(M^{4p/(4p-3)} + M)), δ_F)."""
    if t <= 0:
        return 0.0
    M = M2p
    return min(
        math.sqrt(t) / C,
        1.0 / (C * p * math.sqrt(t) * (M ** (4 * p / (4 * p - 3)) + M)),
        delta_F,
    )


@dataclass
class OptimalStrip:
    """Exponent, time and width balancing the strip-width terms."""
    p: float
    t_star: float
    delta_star: float


def optimal_strip(M_inf: float, C: float = 1.0) -> OptimalStrip:
    """p = C(1 + ln M∞), t* = 1/(C(1 + ln M∞)M∞), δ(t*) ≥ 1/(C M∞^{1/2}(1 + ln M∞)^{1/2})."""
    if not M_inf > 0:
        raise BoundsError(f"M_inf must be positive, got {M_inf}")
    log_m, _ = clamped_log(M_inf)
    return OptimalStrip(
        p=C * (1.0 + log_m),
        t_star=1.0 / (C * (1.0 + log_m) * M_inf),
        delta_star=1.0 / (C * math.sqrt(M_inf) * math.sqrt(1.0 + log_m)),
    )


def t_star_within_t0(D: float, K: float, mu: float, forcing_linf: float, C: float = 1.0) -> bool:
    """t* ≤ t₀ in the form C(1 + ln D) ≥ K²μ²/‖rot f‖_∞."""
    log_d, _ = clamped_log(D)
    return C * (1.0 + log_d) >= K * K * mu * mu / forcing_linf


def admissible_times(p: float, alpha: float, M2p: float, MF: float, mu: float,
                     C: float = 1.0) -> Tuple[float, float, float, float, float]:
    """The five times A₁…A₅ up to which the complexified L_{2p} norm stays below 2M_{2p}."""
    if p < 1.5:
        raise BoundsError(f"p must be >= 3/2, got {p}")
    a = abs(alpha)
    M = M2p
    if a == 0:
        a1 = a2 = a3 = a4 = math.inf
    else:
        a1 = 1.0 / (C * a * a)
        a2 = 1.0 / (C * p ** ((4 * p - 6) / (6 * p - 3)) * a ** (4 * p / (6 * p - 3)) * M ** (4 * p / (6 * p - 3)))
        a3 = 1.0 / (C * p ** ((4 * p - 6) / (6 * p + 3)) * a ** ((4 * p + 6) / (6 * p + 3))
                    * M ** (4 * p / (6 * p + 3)))
        a4 = 1.0 / (C * p ** (2.0 / 3.0) * a ** (2.0 / 3.0) * M ** (2.0 / 3.0))
    a5 = math.inf if MF == 0 else M * M / (C * MF * MF / mu)
    return a1, a2, a3, a4, a5


GronwallTerm = Tuple[float, float, float, float]


def gronwall_time(terms: Sequence[GronwallTerm], M: float, N: float, T: float) -> float:
    """
    min(T, min_j ((α_j+1) / (N K_j 2^{β_j⁺+γ_j} M^{β_j+γ_j-1}))^{1/(α_j+1)})
    for terms (K, α, β, γ).
    """
    if not M > 0 or not N > 0:
        raise BoundsError(f"M and N must be positive, got M={M}, N={N}")
    best = T
    for i, (K, alpha, beta, gamma) in enumerate(terms):
        if not K > 0:
            raise BoundsError(f"term {i}: K must be positive, got {K}")
        if not alpha > -1:
            raise BoundsError(f"term {i}: alpha must exceed -1, got {alpha}")
        if gamma < 0:
            raise BoundsError(f"term {i}: gamma must be nonnegative, got {gamma}")
        inner = (alpha + 1) / (N * K * 2.0 ** (max(beta, 0.0) + gamma) * M ** (beta + gamma - 1))
        best = min(best, inner ** (1.0 / (alpha + 1)))
    return best


def strip_summary(forcing: ForcingSpec, params: PhysParams, grid: GridSpec, p: float,
                  delta_F: float, M2p: float, constants: Optional[BoundConstants] = None) -> Dict[str, object]:
    """M_F, t₀ and δ(t₀) for one configuration."""
    mf = strip_bound_mf(forcing, delta_F, grid.length)
    t0, delta = strip_time_and_width(p, M2p, mf.value, params.mu, delta_F, constants)
    return {
        "p": p,
        "delta_f": delta_F,
        "m2p": M2p,
        "mf": mf.value,
        "mf_upper_bound": mf.upper_bound,
        "t0": t0,
        "delta_t0": delta(t0) if math.isfinite(t0) else delta_F,
    }

