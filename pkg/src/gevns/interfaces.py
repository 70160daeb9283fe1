"""
Abstract interfaces for pluggable components.

Users can implement these to swap the FFT library or the digest used in
run manifests.
"""

from abc import ABC, abstractmethod
from typing import Tuple

import numpy as np


class FFTBackend(ABC):
    """
    Real 2D transforms with the series convention f(x) = Σ f̂_j e^{ij·x}.

    ``forward`` divides by the number of points, ``inverse`` does not, so the
    half spectrum holds Fourier-series coefficients directly.
    """

    name = "abstract"

    @abstractmethod
    def forward(self, values: np.ndarray) -> np.ndarray:
        """Real (m, m) samples -> half spectrum (m, m//2 + 1)."""
        pass

    @abstractmethod
    def inverse(self, half: np.ndarray, shape: Tuple[int, int]) -> np.ndarray:
        """Half spectrum -> real samples of the given shape."""
        pass


class ChecksumProvider(ABC):
    """Digest for manifest artifacts."""

    algorithm = "abstract"

    @abstractmethod
    def digest(self, data: bytes) -> str:
        """Return the hex digest of ``data``."""
        pass
