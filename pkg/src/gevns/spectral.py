"""
Fourier representation of real periodic fields on the square torus and the
spectral operators of the vorticity equation.

Convention: f(x) = Σ_j f̂_j e^{i k_j·x} with k_j = (2π/L) j and
j ∈ {-n/2, …, n/2-1}². Coefficients are stored as a full complex (n, n)
array in FFT-standard order (0…n/2-1, -n/2…-1 along each axis).
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Tuple
import logging
import math

import numpy as np

from .constants import MEAN_TOLERANCE, SYMMETRY_TOLERANCE
from .errors import FieldError, NormOverflowError
from .fft import get_fft_backend, next_fast_size
from .interfaces import FFTBackend
from .models import GridSpec, NormKind, NormSpec

logger = logging.getLogger(__name__)

_LOG_FLOAT_MAX = math.log(np.finfo(np.float64).max)


@dataclass(frozen=True)
class Wavenumbers:
    """Index and physical wave-vectors of a grid, in FFT order."""
    j1: np.ndarray
    j2: np.ndarray
    k1: np.ndarray
    k2: np.ndarray
    ksq: np.ndarray
    kmag: np.ndarray
    jmag: np.ndarray
    inv_ksq: np.ndarray
    mask: np.ndarray
    neg: np.ndarray


@lru_cache(maxsize=16)
def wavenumbers(grid: GridSpec) -> Wavenumbers:
    """Wavenumber tables for ``grid`` (cached, read-only)."""
    n = grid.n
    j = np.fft.fftfreq(n, d=1.0 / n)
    j1, j2 = np.meshgrid(j, j, indexing="ij")
    k1 = grid.k0 * j1
    k2 = grid.k0 * j2
    ksq = k1 * k1 + k2 * k2
    inv_ksq = np.zeros_like(ksq)
    np.divide(1.0, ksq, out=inv_ksq, where=ksq > 0)
    cutoff = grid.dealias_cutoff
    mask = (np.abs(j1) <= cutoff) & (np.abs(j2) <= cutoff)
    tables = Wavenumbers(
        j1=j1, j2=j2, k1=k1, k2=k2, ksq=ksq,
        kmag=np.sqrt(ksq),
        jmag=np.hypot(j1, j2),
        inv_ksq=inv_ksq,
        mask=mask,
        neg=(-np.arange(n)) % n,
    )
    for arr in (tables.j1, tables.j2, tables.k1, tables.k2, tables.ksq,
                tables.kmag, tables.jmag, tables.inv_ksq, tables.mask):
        arr.setflags(write=False)
    return tables


@dataclass
class SpectralField:
    """Complex Fourier coefficients of a real scalar field."""
    grid: GridSpec
    coeffs: np.ndarray

    def __post_init__(self):
        if self.coeffs.shape != (self.grid.n, self.grid.n):
            raise FieldError(f"coefficient array {self.coeffs.shape} does not match n={self.grid.n}")

    @classmethod
    def zeros(cls, grid: GridSpec) -> "SpectralField":
        return cls(grid, np.zeros((grid.n, grid.n), dtype=np.complex128))

    def copy(self) -> "SpectralField":
        return SpectralField(self.grid, self.coeffs.copy())

    def __add__(self, other: "SpectralField") -> "SpectralField":
        return SpectralField(self.grid, self.coeffs + other.coeffs)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        return SpectralField(self.grid, self.coeffs - other.coeffs)

    def __mul__(self, scalar: float) -> "SpectralField":
        return SpectralField(self.grid, self.coeffs * scalar)

    __rmul__ = __mul__

    @property
    def mean(self) -> complex:
        return complex(self.coeffs[0, 0])

    def coefficient(self, j1: int, j2: int) -> complex:
        """Coefficient at integer wave-vector (j1, j2)."""
        n = self.grid.n
        return complex(self.coeffs[j1 % n, j2 % n])

    def symmetry_defect(self) -> float:
        """max |f̂_j - conj(f̂_{-j})| relative to max |f̂_j|."""
        neg = wavenumbers(self.grid).neg
        mirrored = np.conj(self.coeffs[np.ix_(neg, neg)])
        scale = np.abs(self.coeffs).max()
        if scale == 0:
            return 0.0
        return float(np.abs(self.coeffs - mirrored).max() / scale)

    def is_finite(self) -> bool:
        return bool(np.isfinite(self.coeffs).all())


@dataclass
class PhysicalField:
    """Real samples at x = (L/n)(i1, i2), row-major."""
    grid: GridSpec
    values: np.ndarray

    @classmethod
    def from_function(cls, grid: GridSpec, fn) -> "PhysicalField":
        """Sample ``fn(x1, x2)`` on the collocation grid."""
        x = grid.dx * np.arange(grid.n)
        x1, x2 = np.meshgrid(x, x, indexing="ij")
        return cls(grid, np.asarray(fn(x1, x2), dtype=np.float64))


@dataclass
class ShellSpectrum:
    """S(κ) = max |ω̂_j| over κ-1/2 < |j| ≤ κ+1/2, present shells only."""
    kappa: np.ndarray
    values: np.ndarray
    cutoff: int
    length: float = 2.0 * math.pi

    @classmethod
    def from_arrays(cls, kappa, values, cutoff: Optional[int] = None,
                    length: float = 2.0 * math.pi) -> "ShellSpectrum":
        kappa = np.asarray(kappa, dtype=np.int64)
        values = np.asarray(values, dtype=np.float64)
        if cutoff is None:
            cutoff = int(kappa.max()) if kappa.size else 0
        return cls(kappa, values, cutoff, length)

    def as_pairs(self):
        return list(zip(self.kappa.tolist(), self.values.tolist()))


def _full_from_half(half: np.ndarray, n: int) -> np.ndarray:
    """Rebuild the full Hermitian spectrum from an rfft2 half spectrum."""
    m = n // 2 + 1
    full = np.empty((n, n), dtype=np.complex128)
    full[:, :m] = half
    rows = (-np.arange(n)) % n
    cols = np.arange(m, n)
    full[:, m:] = np.conj(half[rows][:, n - cols])
    return full


def _backend(backend: Optional[FFTBackend]) -> FFTBackend:
    return backend if backend is not None else get_fft_backend()


def to_spectral(f: PhysicalField, backend: Optional[FFTBackend] = None) -> SpectralField:
    """
    Discrete Fourier analysis of grid samples.

    The zero mode carries the field mean; callers that need a zero-mean
    field use ``project_mean``.
    """
    values = np.asarray(f.values, dtype=np.float64)
    if values.shape != (f.grid.n, f.grid.n):
        raise FieldError(f"sample array {values.shape} does not match n={f.grid.n}")
    if not np.isfinite(values).all():
        bad = np.argwhere(~np.isfinite(values))[0]
        raise FieldError(f"non-finite sample at index {tuple(int(i) for i in bad)}")
    half = _backend(backend).forward(values)
    return SpectralField(f.grid, _full_from_half(half, f.grid.n))


def to_physical(g: SpectralField, backend: Optional[FFTBackend] = None) -> PhysicalField:
    """Synthesize grid samples; rejects spectra that are not Hermitian."""
    defect = g.symmetry_defect()
    if defect > SYMMETRY_TOLERANCE:
        raise FieldError(f"spectrum is not Hermitian (relative defect {defect:.3e})")
    n = g.grid.n
    values = _backend(backend).inverse(g.coeffs[:, : n // 2 + 1], (n, n))
    return PhysicalField(g.grid, values)


def _synthesize(coeffs: np.ndarray, grid: GridSpec, backend: Optional[FFTBackend]) -> np.ndarray:
    """Inverse transform without the symmetry check (internal operands)."""
    n = grid.n
    return _backend(backend).inverse(coeffs[:, : n // 2 + 1], (n, n))


def _analyze(values: np.ndarray, grid: GridSpec, backend: Optional[FFTBackend]) -> np.ndarray:
    return _full_from_half(_backend(backend).forward(values), grid.n)


def dealias(field: SpectralField) -> SpectralField:
    """Zero every coefficient with max(|j1|, |j2|) above the cutoff."""
    return SpectralField(field.grid, np.where(wavenumbers(field.grid).mask, field.coeffs, 0.0))


def project_mean(field: SpectralField) -> SpectralField:
    out = field.copy()
    out.coeffs[0, 0] = 0.0
    return out


def symmetrize(coeffs: np.ndarray) -> np.ndarray:
    """Hermitian part (f̂_j + conj f̂_{-j}) / 2 of a coefficient array."""
    n = coeffs.shape[0]
    neg = (-np.arange(n)) % n
    return 0.5 * (coeffs + np.conj(coeffs[np.ix_(neg, neg)]))


def _require_zero_mean(field: SpectralField, what: str) -> None:
    scale = max(np.abs(field.coeffs).max(), 1.0)
    if abs(field.coeffs[0, 0]) > MEAN_TOLERANCE * scale:
        raise FieldError(f"{what} requires a zero-mean field (mean mode {field.coeffs[0, 0]:.3e})")


def stream_function(omega: SpectralField) -> SpectralField:
    """ψ̂ = -ω̂/|k|², so that Δψ = ω."""
    _require_zero_mean(omega, "stream_function")
    return SpectralField(omega.grid, -omega.coeffs * wavenumbers(omega.grid).inv_ksq)


def biot_savart(omega: SpectralField) -> Tuple[SpectralField, SpectralField]:
    """
    Velocity u = ∇^⊥Δ^{-1}ω with ∇^⊥ = (-∂2, ∂1).

    û = (i k2, -i k1) ω̂/|k|²; divergence-free by construction.
    """
    _require_zero_mean(omega, "biot_savart")
    wn = wavenumbers(omega.grid)
    psi = -omega.coeffs * wn.inv_ksq
    u1 = -1j * wn.k2 * psi
    u2 = 1j * wn.k1 * psi
    return SpectralField(omega.grid, u1), SpectralField(omega.grid, u2)


def curl(u1: SpectralField, u2: SpectralField) -> SpectralField:
    """Scalar rot u = ∂1 u² - ∂2 u¹."""
    wn = wavenumbers(u1.grid)
    return SpectralField(u1.grid, 1j * wn.k1 * u2.coeffs - 1j * wn.k2 * u1.coeffs)


def gradient(field: SpectralField) -> Tuple[SpectralField, SpectralField]:
    wn = wavenumbers(field.grid)
    return (SpectralField(field.grid, 1j * wn.k1 * field.coeffs),
            SpectralField(field.grid, 1j * wn.k2 * field.coeffs))


def advect(omega: SpectralField, backend: Optional[FFTBackend] = None) -> SpectralField:
    """
    Dealiased pseudo-spectral u·∇ω = J(Δ^{-1}ω, ω).

    Velocity and vorticity gradient are synthesized on the grid, multiplied
    pointwise and analyzed again; the 2/3 mask removes the aliased band and
    the mean is zeroed.
    """
    grid = omega.grid
    wn = wavenumbers(grid)
    u1, u2 = biot_savart(omega)
    d1, d2 = gradient(omega)
    product = (
        _synthesize(u1.coeffs, grid, backend) * _synthesize(d1.coeffs, grid, backend)
        + _synthesize(u2.coeffs, grid, backend) * _synthesize(d2.coeffs, grid, backend)
    )
    out = _analyze(product, grid, backend)
    out[~wn.mask] = 0.0
    out[0, 0] = 0.0
    return SpectralField(grid, out)


def inner(a: SpectralField, b: SpectralField) -> float:
    """L2 scalar product ⟨a, b⟩ = |Ω| Σ Re(â conj b̂)."""
    return float(a.grid.area * np.real(np.vdot(b.coeffs, a.coeffs)))


def energy(omega: SpectralField) -> float:
    """½‖u‖² with u the Biot-Savart velocity of ω."""
    wn = wavenumbers(omega.grid)
    return float(0.5 * omega.grid.area * np.sum(np.abs(omega.coeffs) ** 2 * wn.inv_ksq))


def enstrophy(omega: SpectralField) -> float:
    """½‖ω‖²."""
    return float(0.5 * omega.grid.area * np.sum(np.abs(omega.coeffs) ** 2))


def band_limit(field: SpectralField) -> int:
    """Largest max(|j1|, |j2|) carrying a nonzero coefficient."""
    wn = wavenumbers(field.grid)
    nz = field.coeffs != 0
    if not nz.any():
        return 0
    return int(np.maximum(np.abs(wn.j1), np.abs(wn.j2))[nz].max())


def _pad_axis(a: np.ndarray, m: int, axis: int) -> np.ndarray:
    """Zero-pad one axis of an FFT-ordered spectrum, splitting the Nyquist mode."""
    a = np.moveaxis(a, axis, 0)
    n = a.shape[0]
    h = n // 2
    out = np.zeros((m,) + a.shape[1:], dtype=np.complex128)
    out[:h] = a[:h]
    out[m - h + 1:] = a[h + 1:]
    out[h] += 0.5 * a[h]
    out[m - h] += 0.5 * a[h]
    return np.moveaxis(out, 0, axis)


def padded_values(field: SpectralField, m: int, backend: Optional[FFTBackend] = None) -> np.ndarray:
    """Samples of ``field`` on an (m, m) grid over the same period, m >= n."""
    n = field.grid.n
    if m == n:
        return _synthesize(field.coeffs, field.grid, backend)
    padded = _pad_axis(_pad_axis(field.coeffs, m, 0), m, 1)
    return _backend(backend).inverse(padded[:, : m // 2 + 1], (m, m))


def _weighted_norm(field: SpectralField, spec: NormSpec) -> float:
    """sqrt(|Ω| Σ |k|^{4α} e^{2τ|k|^{2s}} |f̂|²) over the modes ``field`` carries."""
    wn = wavenumbers(field.grid)
    power = np.abs(field.coeffs) ** 2
    live = power > 0
    if not live.any():
        return 0.0
    with np.errstate(divide="ignore"):
        log_terms = np.log(power[live])
        if spec.alpha > 0:
            log_terms = log_terms + 2.0 * spec.alpha * np.log(wn.ksq[live])
    log_terms = log_terms + 2.0 * spec.tau * wn.kmag[live] ** (2.0 * spec.s)
    top = int(np.argmax(log_terms))
    peak = float(log_terms[top])
    if peak == -math.inf:
        return 0.0
    log_norm = 0.5 * (peak + math.log(field.grid.area * float(np.sum(np.exp(log_terms - peak)))))
    if log_norm > _LOG_FLOAT_MAX:
        shell = float(wn.jmag[live][top])
        raise NormOverflowError(
            f"Gevrey-weighted norm overflows, dominated by shell |j|={shell:.3f} "
            f"(log-norm {log_norm:.1f})",
            shell=shell,
        )
    return math.exp(log_norm)


def norm(field: SpectralField, spec: NormSpec, backend: Optional[FFTBackend] = None) -> float:
    """
    Evaluate ``spec`` on ``field``.

    L2, Sobolev and Gevrey norms are exact Parseval sums. Lp uses grid
    quadrature on a zero-padded grid fine enough to integrate |f|^p exactly
    for band-limited f; L∞ is the maximum on a 2x zero-padded grid.
    """
    kind = spec.kind
    if kind is NormKind.L2:
        return math.sqrt(field.grid.area * float(np.sum(np.abs(field.coeffs) ** 2)))
    if kind in (NormKind.SOBOLEV, NormKind.GEVREY):
        tau = spec.tau if kind is NormKind.GEVREY else 0.0
        return _weighted_norm(field, NormSpec(NormKind.GEVREY, tau=tau, s=spec.s, alpha=spec.alpha))
    if kind is NormKind.LINF:
        values = padded_values(field, 2 * field.grid.n, backend)
        return float(np.abs(values).max())
    p = spec.p
    m = next_fast_size(max(field.grid.n, p * band_limit(field) + 2))
    values = padded_values(field, m, backend)
    integral = field.grid.area * float(np.mean(np.abs(values) ** p))
    return integral ** (1.0 / p)


def shell_spectrum(omega: SpectralField) -> ShellSpectrum:
    """Shell maxima S(κ) for κ = 1 … dealias_cutoff."""
    grid = omega.grid
    wn = wavenumbers(grid)
    cutoff = grid.dealias_cutoff
    shell = np.ceil(wn.jmag - 0.5).astype(np.int64).ravel()
    keep = (shell >= 1) & (shell <= cutoff)
    idx = shell[keep]
    amp = np.abs(omega.coeffs).ravel()[keep]
    values = np.zeros(cutoff + 1)
    np.maximum.at(values, idx, amp)
    members = np.bincount(idx, minlength=cutoff + 1)
    kappa = np.arange(cutoff + 1)
    present = (members > 0) & (kappa >= 1)
    return ShellSpectrum(kappa[present], values[present], cutoff, grid.length)
