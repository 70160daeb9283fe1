"""
Data models for gevns.
"""

from dataclasses import dataclass, field, asdict, replace
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple
import json
import math

from .constants import (
    C2_NODES,
    C4_DIMENSION,
    C5_LATTICE,
    DEFAULT_LENGTH,
    MIN_GRID_POINTS,
    SPINUP_DAMPING_TIMES,
    SPREAD_FACTOR,
)


def _json_float(x: Optional[float]) -> Any:
    """Map non-finite floats to strings so the JSON stays standard."""
    if x is None:
        return None
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def _dumps(d: Dict[str, Any]) -> str:
    return json.dumps(d, indent=2, sort_keys=True, allow_nan=False)


@dataclass(frozen=True)
class GridSpec:
    """Square periodic collocation grid with a 2/3-rule dealiasing cutoff."""
    n: int
    length: float = DEFAULT_LENGTH

    def __post_init__(self):
        if self.n < MIN_GRID_POINTS or self.n % 2:
            raise ValueError(f"grid.n must be even and >= {MIN_GRID_POINTS}, got {self.n}")
        if not (self.length > 0 and math.isfinite(self.length)):
            raise ValueError(f"grid.length must be positive, got {self.length}")

    @property
    def dealias_cutoff(self) -> int:
        return self.n // 3

    @property
    def area(self) -> float:
        return self.length * self.length

    @property
    def lambda1(self) -> float:
        """Smallest Stokes eigenvalue (2π/L)²."""
        return (2.0 * math.pi / self.length) ** 2

    @property
    def dx(self) -> float:
        return self.length / self.n

    @property
    def k0(self) -> float:
        """Physical wavenumber of the index-1 mode."""
        return 2.0 * math.pi / self.length


class NormKind(Enum):
    """Norms the spectral core can evaluate."""
    L2 = "l2"
    LP = "lp"
    LINF = "linf"
    SOBOLEV = "sobolev"
    GEVREY = "gevrey"


@dataclass(frozen=True)
class NormSpec:
    """
    Norm selector.

    Gevrey(τ, s, α) weights mode j by |k|^{4α} e^{2τ|k|^{2s}}; Sobolev(α) is
    Gevrey with τ = 0. Lp takes an even integer p.
    """
    kind: NormKind
    p: Optional[int] = None
    tau: float = 0.0
    s: float = 0.5
    alpha: float = 0.0

    def __post_init__(self):
        if self.kind is NormKind.LP:
            if self.p is None or int(self.p) != self.p or self.p < 2 or self.p % 2:
                raise ValueError(f"Lp norm needs an even integer p >= 2, got {self.p}")
        if not (math.isfinite(self.tau) and math.isfinite(self.alpha)):
            raise ValueError("tau and alpha must be finite")
        if self.tau < 0 or self.alpha < 0:
            raise ValueError("tau and alpha must be nonnegative")
        if not (0.0 < self.s <= 1.0):
            raise ValueError(f"Gevrey exponent s must lie in (0, 1], got {self.s}")

    @classmethod
    def l2(cls) -> "NormSpec":
        return cls(NormKind.L2)

    @classmethod
    def lp(cls, p: float) -> "NormSpec":
        if math.isinf(p):
            return cls(NormKind.LINF)
        if p == 2:
            return cls(NormKind.L2)
        return cls(NormKind.LP, p=int(p) if float(p).is_integer() else p)

    @classmethod
    def linf(cls) -> "NormSpec":
        return cls(NormKind.LINF)

    @classmethod
    def sobolev(cls, alpha: float) -> "NormSpec":
        return cls(NormKind.SOBOLEV, alpha=alpha)

    @classmethod
    def gevrey(cls, tau: float, s: float = 0.5, alpha: float = 0.0) -> "NormSpec":
        return cls(NormKind.GEVREY, tau=tau, s=s, alpha=alpha)


@dataclass(frozen=True)
class PhysParams:
    """Viscosity ν and Rayleigh damping μ."""
    nu: float
    mu: float

    def __post_init__(self):
        # zero is admitted for the inviscid/undamped conservation checks
        if self.nu < 0 or self.mu < 0 or not (math.isfinite(self.nu) and math.isfinite(self.mu)):
            raise ValueError(f"nu and mu must be finite and nonnegative, got {self.nu}, {self.mu}")


@dataclass(frozen=True)
class ForcingMode:
    """One term amplitude·cos(j·x·2π/L + phase) of the curl forcing F."""
    j1: int
    j2: int
    amplitude: float
    phase: float = 0.0

    @property
    def index_magnitude(self) -> float:
        return math.hypot(self.j1, self.j2)


@dataclass(frozen=True)
class ForcingSpec:
    """Time-independent band-limited forcing F = rot f."""
    modes: Tuple[ForcingMode, ...] = ()

    @classmethod
    def single(cls, j1: int, j2: int, amplitude: float = 1.0, phase: float = 0.0) -> "ForcingSpec":
        return cls((ForcingMode(j1, j2, amplitude, phase),))

    def to_dict(self) -> dict:
        return {"modes": [asdict(m) for m in self.modes]}

    @classmethod
    def from_dict(cls, d: dict) -> "ForcingSpec":
        return cls(tuple(ForcingMode(**m) for m in d.get("modes", [])))


class InitialKind(Enum):
    ZERO = "zero"
    SINGLE_MODE = "single_mode"
    RANDOM = "random"


@dataclass(frozen=True)
class InitialCondition:
    """
    Initial vorticity.

    single_mode: amplitude·cos(j·x) at ``mode``.
    random: |ω̂_j| ∝ |j|^slope e^{-|j|} with seeded uniform phases, scaled to
    root-mean-square vorticity ``amplitude``.
    """
    kind: InitialKind = InitialKind.ZERO
    mode: Tuple[int, int] = (1, 0)
    amplitude: float = 1.0
    slope: float = -1.0


@dataclass(frozen=True)
class SimConfig:
    """Everything a single run needs. ``dt=None`` selects the CFL rule."""
    grid: GridSpec
    params: PhysParams
    forcing: ForcingSpec
    t_end: float
    dt: Optional[float] = None
    spinup: Optional[float] = None
    sample_every: int = 10
    initial: InitialCondition = field(default_factory=InitialCondition)
    checkpoint_every: Optional[int] = None
    seed: int = 0
    sigma1: float = 1.0
    radius: bool = True
    fft_backend: str = "numpy"

    def __post_init__(self):
        if self.dt is not None and not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.sample_every < 1:
            raise ValueError("sample_every must be >= 1")
        if not self.t_end > self.spinup_time:
            raise ValueError(f"t_end ({self.t_end}) must exceed spinup ({self.spinup_time})")
        if self.spinup_time < 0:
            raise ValueError("spinup must be nonnegative")

    @property
    def spinup_time(self) -> float:
        if self.spinup is not None:
            return self.spinup
        if self.params.mu > 0:
            return SPINUP_DAMPING_TIMES / self.params.mu
        return 0.0

    def with_overrides(self, **changes) -> "SimConfig":
        return replace(self, **changes)


@dataclass
class RadiusEstimate:
    """Log-linear fit ln S(κ) = intercept − l_a·|k| over a dissipation window."""
    l_a: float
    intercept: float
    r2: float
    window: Tuple[int, int]
    accepted: bool
    suspect: bool = False

    def to_dict(self) -> dict:
        return {
            "l_a": _json_float(self.l_a),
            "intercept": _json_float(self.intercept),
            "r2": _json_float(self.r2),
            "window": list(self.window),
            "accepted": self.accepted,
            "suspect": self.suspect,
        }

    def to_json(self) -> str:
        return _dumps(self.to_dict())


@dataclass
class DiagnosticsRecord:
    """Scalar diagnostics of one snapshot."""
    t: float
    energy: float
    enstrophy: float
    lp_norms: Dict[float, float]
    gevrey_half: Optional[float]
    radius: Optional[RadiusEstimate] = None
    budget_rhs: float = 0.0
    budget_residual: float = 0.0
    resolved: bool = True
    post_spinup: bool = False

    def to_row(self) -> Dict[str, Any]:
        """One CSV row in the fixed column order."""
        r = self.radius
        return {
            "t": self.t,
            "energy": self.energy,
            "enstrophy": self.enstrophy,
            "l2": self.lp_norms[2],
            "l4": self.lp_norms[4],
            "l8": self.lp_norms[8],
            "linf": self.lp_norms[math.inf],
            "gevrey_half": self.gevrey_half if self.gevrey_half is not None else math.nan,
            "la": r.l_a if r is not None else math.nan,
            "r2": r.r2 if r is not None else math.nan,
            "accepted": int(r.accepted) if r is not None else 0,
            "budget_residual": self.budget_residual,
        }


@dataclass
class Dimensionless:
    """Grashof number G, damped number D and the Gevrey forcing number D₁."""
    G: float
    D: float
    D1: float
    area: float
    lambda1: float
    nu: float
    mu: float
    sigma1: float
    forcing_linf: float
    forcing_l2: float
    f_l2: float
    forcing_gevrey: float

    def to_dict(self) -> dict:
        return {k: _json_float(v) for k, v in asdict(self).items()}


@dataclass(frozen=True)
class BoundConstants:
    """
    Absolute constants of the bounds. Only c2, c4 and c5 are pinned by the
    analysis; the rest default to 1.
    """
    c: float = 1.0
    c1: float = 1.0
    c2: float = C2_NODES
    c3: float = 1.0
    c4: float = C4_DIMENSION
    c5: float = C5_LATTICE
    c6: float = 1.0
    c7: float = 1.0
    c8: float = 1.0
    C: float = 1.0

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class BoundsReport:
    """Evaluated length scales and dimension bounds."""
    constants: BoundConstants = field(default_factory=BoundConstants)
    dimensionless: Optional[Dimensionless] = None
    # classical Navier-Stokes
    la_classical: Optional[float] = None
    la_grashof_log: Optional[float] = None
    l_nodes_ns: Optional[float] = None
    dim_classical: Optional[float] = None
    l_f_classical: Optional[float] = None
    # damped system
    dim_damped: Optional[float] = None
    l_f_damped: Optional[float] = None
    l_dn_damped: Optional[float] = None
    la_gevrey: Optional[float] = None
    la_gevrey_asymptotic: Optional[float] = None
    la_lower: Optional[float] = None
    gevrey_time: Optional[float] = None
    h1_ball: Optional[float] = None
    n_det_predicted: Optional[float] = None
    log_clamped: bool = False
    strip: Dict[str, Any] = field(default_factory=dict)

    _FIELDS = (
        "la_classical", "la_grashof_log", "l_nodes_ns", "dim_classical", "l_f_classical",
        "dim_damped", "l_f_damped", "l_dn_damped", "la_gevrey",
        "la_gevrey_asymptotic", "la_lower", "gevrey_time", "h1_ball", "n_det_predicted",
    )

    def merge(self, other: "BoundsReport") -> "BoundsReport":
        """Combine two partial reports; fields set in ``other`` win."""
        out = replace(self)
        for name in self._FIELDS:
            value = getattr(other, name)
            if value is not None:
                setattr(out, name, value)
        out.dimensionless = other.dimensionless or self.dimensionless
        out.log_clamped = self.log_clamped or other.log_clamped
        out.strip = {**self.strip, **other.strip}
        return out

    def to_dict(self) -> dict:
        d = {name: _json_float(getattr(self, name)) for name in self._FIELDS}
        d["constants"] = self.constants.to_dict()
        d["dimensionless"] = self.dimensionless.to_dict() if self.dimensionless else None
        d["log_clamped"] = self.log_clamped
        d["strip"] = {k: _json_float(v) if isinstance(v, float) else v for k, v in self.strip.items()}
        return d

    def to_json(self) -> str:
        return _dumps(self.to_dict())


@dataclass(frozen=True)
class SweepConfig:
    """A ν-sweep around a base configuration."""
    base: SimConfig
    nu_values: Tuple[float, ...]
    resolutions: Optional[Tuple[int, ...]] = None
    refine: bool = True
    max_n: int = 1024
    spread_factor: float = SPREAD_FACTOR

    def __post_init__(self):
        if len(set(self.nu_values)) != len(self.nu_values):
            raise ValueError("nu_values must be distinct")
        if any(not nu > 0 for nu in self.nu_values):
            raise ValueError("nu_values must be positive")
        if self.resolutions is not None and len(self.resolutions) != len(self.nu_values):
            raise ValueError("resolutions must match nu_values one to one")

    def planned(self) -> List[Tuple[float, int]]:
        """(ν, n) per row in configuration order."""
        ns = self.resolutions or (self.base.grid.n,) * len(self.nu_values)
        return list(zip(self.nu_values, ns))


@dataclass
class SweepRow:
    """Measured and predicted radius for one viscosity."""
    index: int
    nu: float
    n: int
    D: float
    measured_la: Optional[float]
    la_lower: float
    la_gevrey: float
    l_dn_damped: float
    resolved: bool
    accepted_samples: int = 0

    def to_dict(self) -> dict:
        return {k: _json_float(v) if isinstance(v, float) else v for k, v in asdict(self).items()}


@dataclass
class SweepResult:
    """Rows ordered by descending ν and the fitted l_a ∝ D^exponent law."""
    rows: List[SweepRow]
    fitted_exponent: Optional[float] = None
    exponent_stderr: Optional[float] = None

    def usable_rows(self) -> List[SweepRow]:
        return [r for r in self.rows if r.resolved and r.measured_la is not None]

    def to_dict(self) -> dict:
        return {
            "rows": [r.to_dict() for r in self.rows],
            "fitted_exponent": _json_float(self.fitted_exponent),
            "exponent_stderr": _json_float(self.exponent_stderr),
        }

    def to_json(self) -> str:
        return _dumps(self.to_dict())


@dataclass
class SyncResult:
    """Master-slave synchronization through the modes |j| ≤ κ_c."""
    kappa_c: float
    n_det: int
    times: List[float]
    errors: List[float]
    decay_rate: Optional[float]
    synchronized: bool

    def to_dict(self) -> dict:
        return {
            "kappa_c": self.kappa_c,
            "n_det": self.n_det,
            "times": self.times,
            "errors": self.errors,
            "decay_rate": _json_float(self.decay_rate),
            "synchronized": self.synchronized,
        }

    def to_json(self) -> str:
        return _dumps(self.to_dict())


@dataclass
class RunManifest:
    """What a CLI invocation produced, with SHA-256 digests."""
    config_path: Optional[str]
    output_dir: str
    config_echo: str
    artifacts: Dict[str, str] = field(default_factory=dict)
    created: str = ""

    def to_json(self) -> str:
        return _dumps(asdict(self))
