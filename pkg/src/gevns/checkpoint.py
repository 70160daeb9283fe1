"""
Binary checkpoint format for solver states.

Layout (little-endian):
- magic "GVNS"
- version u32, n u32
- L, t, nu, mu as f64
- n² complex coefficients as interleaved f64 pairs, row-major in FFT order
"""

from dataclasses import dataclass
from typing import Optional, Tuple
import logging
import struct

import numpy as np

from .constants import CHECKPOINT_HEADER, CHECKPOINT_MAGIC, CHECKPOINT_VERSION
from .errors import (
    CheckpointGridError,
    CheckpointMagicError,
    CheckpointTruncatedError,
    CheckpointVersionError,
)
from .models import GridSpec, SimConfig
from .spectral import SpectralField

logger = logging.getLogger(__name__)

HEADER_SIZE = struct.calcsize(CHECKPOINT_HEADER)
_COEFF_DTYPE = np.dtype("<c16")


@dataclass
class CheckpointHeader:
    """Fixed-size checkpoint header."""
    version: int
    n: int
    length: float
    t: float
    nu: float
    mu: float

    @property
    def grid(self) -> GridSpec:
        return GridSpec(self.n, self.length)

    @property
    def payload_size(self) -> int:
        return self.n * self.n * _COEFF_DTYPE.itemsize


def save_checkpoint(state, config: SimConfig) -> bytes:
    """Serialize (t, ω̂) together with the run's grid and parameters."""
    grid = state.omega.grid
    header = struct.pack(
        CHECKPOINT_HEADER,
        CHECKPOINT_MAGIC,
        CHECKPOINT_VERSION,
        grid.n,
        grid.length,
        state.t,
        config.params.nu,
        config.params.mu,
    )
    return header + np.ascontiguousarray(state.omega.coeffs, dtype=_COEFF_DTYPE).tobytes()


def read_header(data: bytes) -> CheckpointHeader:
    """Parse and validate the header only."""
    head = bytes(data[: len(CHECKPOINT_MAGIC)])
    if head != CHECKPOINT_MAGIC:
        if head and CHECKPOINT_MAGIC.startswith(head):
            raise CheckpointTruncatedError(f"header needs {HEADER_SIZE} bytes, got {len(data)}")
        raise CheckpointMagicError("not a gevns checkpoint (bad magic)")
    if len(data) < HEADER_SIZE:
        raise CheckpointTruncatedError(f"header needs {HEADER_SIZE} bytes, got {len(data)}")
    _, version, n, length, t, nu, mu = struct.unpack_from(CHECKPOINT_HEADER, data)
    if version != CHECKPOINT_VERSION:
        raise CheckpointVersionError(f"unsupported checkpoint version {version}")
    return CheckpointHeader(version, n, length, t, nu, mu)


def load_checkpoint(data: bytes, expected_grid: Optional[GridSpec] = None) -> Tuple["State", CheckpointHeader]:
    """
    Decode a checkpoint.

    With ``expected_grid`` a checkpoint written on another grid is refused.
    """
    from .solver import State

    header = read_header(data)
    if expected_grid is not None and (header.n != expected_grid.n or header.length != expected_grid.length):
        raise CheckpointGridError(
            f"checkpoint grid n={header.n}, L={header.length} does not match "
            f"run grid n={expected_grid.n}, L={expected_grid.length}"
        )
    end = HEADER_SIZE + header.payload_size
    if len(data) < end:
        raise CheckpointTruncatedError(f"payload needs {header.payload_size} bytes, got {len(data) - HEADER_SIZE}")
    if len(data) > end:
        logger.warning("[CKPT] ignoring %d trailing bytes", len(data) - end)
    coeffs = np.frombuffer(data, dtype=_COEFF_DTYPE, count=header.n * header.n, offset=HEADER_SIZE)
    coeffs = coeffs.reshape(header.n, header.n).astype(np.complex128)
    return State(header.t, SpectralField(header.grid, coeffs)), header
