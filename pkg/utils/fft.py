from typing import Protocol
import numpy as np
import scipy.fft


class FFTBackend(Protocol):
    """Transform interface used by the fast Hankel products.

    Only accuracy is contracted; different backends may differ in the last bits.
    """

    def fft(self, x: np.ndarray, n: int, axis: int = 0) -> np.ndarray:
        ...

    def ifft(self, x: np.ndarray, n: int, axis: int = 0) -> np.ndarray:
        ...

    def next_fast_len(self, n: int) -> int:
        ...


class ScipyFFT:
    """FFT backend on top of :mod:`scipy.fft`."""

    def __init__(self, workers: int = None):
        self.workers = workers

    def fft(self, x, n, axis=0):
        return scipy.fft.fft(x, n=n, axis=axis, workers=self.workers)

    def ifft(self, x, n, axis=0):
        return scipy.fft.ifft(x, n=n, axis=axis, workers=self.workers)

    def next_fast_len(self, n):
        return scipy.fft.next_fast_len(n)


class NumpyFFT:
    """FFT backend on top of :mod:`numpy.fft` (powers of two padding)."""

    def fft(self, x, n, axis=0):
        return np.fft.fft(x, n=n, axis=axis)

    def ifft(self, x, n, axis=0):
        return np.fft.ifft(x, n=n, axis=axis)

    def next_fast_len(self, n):
        return 1 << max(int(n) - 1, 0).bit_length()
