"""
FFT backends.

The numpy backend is the default: single-threaded and bit-reproducible.
The scipy backend can use worker threads; its worker count is part of the
run configuration so repeated runs stay identical.
"""

from typing import Dict, Tuple

import numpy as np

from .interfaces import FFTBackend


class NumpyFFTBackend(FFTBackend):
    """numpy.fft real transforms."""

    name = "numpy"

    def forward(self, values: np.ndarray) -> np.ndarray:
        return np.fft.rfft2(values, norm="forward")

    def inverse(self, half: np.ndarray, shape: Tuple[int, int]) -> np.ndarray:
        return np.fft.irfft2(half, s=shape, norm="forward")


class ScipyFFTBackend(FFTBackend):
    """scipy.fft real transforms with a fixed number of workers."""

    name = "scipy"

    def __init__(self, workers: int = 1):
        self.workers = workers

    def forward(self, values: np.ndarray) -> np.ndarray:
        import scipy.fft
        return scipy.fft.rfft2(values, norm="forward", workers=self.workers)

    def inverse(self, half: np.ndarray, shape: Tuple[int, int]) -> np.ndarray:
        import scipy.fft
        return scipy.fft.irfft2(half, s=shape, norm="forward", workers=self.workers)


_BACKENDS: Dict[str, FFTBackend] = {"numpy": NumpyFFTBackend()}


def get_fft_backend(name: str = "numpy") -> FFTBackend:
    """
    Get an FFT backend by name.

    ``"numpy"`` or ``"scipy"``; ``"scipy:4"`` selects four scipy workers.
    """
    if name not in _BACKENDS:
        kind, _, workers = name.partition(":")
        if kind != "scipy":
            raise ValueError(f"unknown FFT backend '{name}'")
        _BACKENDS[name] = ScipyFFTBackend(int(workers) if workers else 1)
    return _BACKENDS[name]


def next_fast_size(m: int) -> int:
    """Smallest even size >= m that the transforms handle quickly."""
    import scipy.fft
    size = scipy.fft.next_fast_len(m, real=True)
    while size % 2:
        size = scipy.fft.next_fast_len(size + 1, real=True)
    return size
