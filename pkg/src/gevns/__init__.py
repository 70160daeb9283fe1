"""
gevns - pseudo-spectral lab for the damped-driven 2D Navier-Stokes equations

Integrates the vorticity equation on a periodic square, measures the
analyticity radius from the decay of the spectrum and compares it with
closed-form bounds in terms of the Grashof-type numbers G and D.
"""

from .models import (
    BoundConstants,
    BoundsReport,
    DiagnosticsRecord,
    Dimensionless,
    ForcingMode,
    ForcingSpec,
    GridSpec,
    InitialCondition,
    InitialKind,
    NormKind,
    NormSpec,
    PhysParams,
    RadiusEstimate,
    RunManifest,
    SimConfig,
    SweepConfig,
    SweepResult,
    SweepRow,
    SyncResult,
)
from .errors import (
    GevnsError,
    FieldError,
    NormOverflowError,
    ForcingError,
    BlowUpError,
    CheckpointError,
    CheckpointMagicError,
    CheckpointVersionError,
    CheckpointTruncatedError,
    CheckpointGridError,
    BoundsError,
    FitError,
    SweepError,
    ConfigError,
)
from .interfaces import ChecksumProvider, FFTBackend
from .spectral import (
    PhysicalField,
    ShellSpectrum,
    SpectralField,
    biot_savart,
    curl,
    dealias,
    energy,
    enstrophy,
    norm,
    shell_spectrum,
    stream_function,
    to_physical,
    to_spectral,
)
from .solver import (
    CheckpointDue,
    Integrator,
    RunResult,
    Sampled,
    State,
    build_forcing,
    initial_state,
    iterate,
    run,
    step,
)
from .diagnostics import estimate_radius, record, check_vorticity_bound
from .bounds import bounds_report, classical_bounds, damped_bounds, dimensionless
from .checkpoint import load_checkpoint, save_checkpoint
from .experiments import compare_bounds, determining_modes, run_sweep, run_sweep_async
from .config import parse_config, parse_settings, config_echo

__version__ = "0.1.0"

__all__ = [
    # Version
    "__version__",
    # Models
    "BoundConstants",
    "BoundsReport",
    "DiagnosticsRecord",
    "Dimensionless",
    "ForcingMode",
    "ForcingSpec",
    "GridSpec",
    "InitialCondition",
    "InitialKind",
    "NormKind",
    "NormSpec",
    "PhysParams",
    "RadiusEstimate",
    "RunManifest",
    "SimConfig",
    "SweepConfig",
    "SweepResult",
    "SweepRow",
    "SyncResult",
    # Errors
    "GevnsError",
    "FieldError",
    "NormOverflowError",
    "ForcingError",
    "BlowUpError",
    "CheckpointError",
    "CheckpointMagicError",
    "CheckpointVersionError",
    "CheckpointTruncatedError",
    "CheckpointGridError",
    "BoundsError",
    "FitError",
    "SweepError",
    "ConfigError",
    # Interfaces
    "ChecksumProvider",
    "FFTBackend",
    # Spectral core
    "PhysicalField",
    "ShellSpectrum",
    "SpectralField",
    "biot_savart",
    "curl",
    "dealias",
    "energy",
    "enstrophy",
    "norm",
    "shell_spectrum",
    "stream_function",
    "to_physical",
    "to_spectral",
    # Solver
    "CheckpointDue",
    "Integrator",
    "RunResult",
    "Sampled",
    "State",
    "build_forcing",
    "initial_state",
    "iterate",
    "run",
    "step",
    # Diagnostics
    "estimate_radius",
    "record",
    "check_vorticity_bound",
    # Bounds
    "bounds_report",
    "classical_bounds",
    "damped_bounds",
    "dimensionless",
    # Checkpoints
    "load_checkpoint",
    "save_checkpoint",
    # Experiments
    "compare_bounds",
    "determining_modes",
    "run_sweep",
    "run_sweep_async",
    # Config
    "parse_config",
    "parse_settings",
    "config_echo",
    # Providers
    "get_fft_backend",
    "get_checksum_provider",
]


def get_fft_backend(name: str = "numpy") -> FFTBackend:
    """Get an FFT backend by name ("numpy", "scipy" or "scipy:<workers>")."""
    from .fft import get_fft_backend
    return get_fft_backend(name)


def get_checksum_provider() -> ChecksumProvider:
    """Get the default checksum provider (requires cryptography)."""
    from .digest import get_default_checksum_provider
    return get_default_checksum_provider()
