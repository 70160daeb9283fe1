"""
Exception types for gevns.

Each error carries a machine-readable ``category`` that the CLI reports
alongside a nonzero exit code.
"""

from typing import Any, List, Optional


class GevnsError(Exception):
    """Base class for all gevns errors."""
    category = "error"
    exit_code = 1


class FieldError(GevnsError):
    """Invalid field data: non-finite values, broken symmetry, nonzero mean."""
    category = "field"
    exit_code = 8


class NormOverflowError(GevnsError):
    """A Gevrey weight overflowed double range."""
    category = "overflow"
    exit_code = 8

    def __init__(self, message: str, shell: float):
        super().__init__(message)
        self.shell = shell


class ForcingError(GevnsError):
    """Forcing mode outside the dealiased band or at the zero wave-vector."""
    category = "forcing"
    exit_code = 8


class BlowUpError(GevnsError):
    """The time integration produced NaN/Inf."""
    category = "blowup"
    exit_code = 4

    def __init__(self, message: str, last_time: float, last_state: Any = None,
                 records: Optional[List[Any]] = None):
        super().__init__(message)
        self.last_time = last_time
        self.last_state = last_state
        self.records = records if records is not None else []


class CheckpointError(GevnsError):
    """Base class for checkpoint decoding errors."""
    category = "checkpoint"
    exit_code = 5


class CheckpointMagicError(CheckpointError):
    """The file does not start with the checkpoint magic."""


class CheckpointVersionError(CheckpointError):
    """Unsupported checkpoint format version."""


class CheckpointTruncatedError(CheckpointError):
    """The file ends before the declared payload."""


class CheckpointGridError(CheckpointError):
    """The checkpoint grid does not match the run grid."""


class BoundsError(GevnsError):
    """A bound calculator was called outside its preconditions."""
    category = "bounds"
    exit_code = 6


class FitError(GevnsError):
    """Degenerate least-squares input."""
    category = "fit"
    exit_code = 6


class SweepError(GevnsError):
    """No sweep row produced a usable measurement."""
    category = "sweep"
    exit_code = 7

    def __init__(self, message: str, rows: Optional[List[Any]] = None):
        super().__init__(message)
        self.rows = rows if rows is not None else []


class ConfigError(GevnsError):
    """Bad configuration text."""
    category = "config"
    exit_code = 3

    def __init__(self, message: str, key: Optional[str] = None, line: Optional[int] = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key '{key}'")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)
        self.key = key
        self.line = line
