from typing import Tuple
import numpy as np

from core.exceptions import InputError
from api.v1.hankel.schema import Generator, as_generator
from .schema import LineSpectrum, SamplingOperator

# frequency pairs closer than this (on the unit circle) are redrawn
MIN_FREQ_SEPARATION = 1e-12


def synth_signal(spec: LineSpectrum, n: int) -> Generator:
    """x[t] = sum_i amps[i] exp(2 pi i freqs[i] t) for t = 0, ..., n-1."""
    if n < 1:
        raise InputError(f"n must be positive, got {n}")
    t = np.arange(n)
    return np.exp(2j * np.pi * np.outer(t, spec.freqs)) @ spec.amps


def wrap_distance(a, b) -> np.ndarray:
    """Distance on the unit frequency circle, min(|a - b|, 1 - |a - b|)."""
    delta = np.abs(np.mod(np.asarray(a, dtype=float) - np.asarray(b, dtype=float), 1.0))
    return np.minimum(delta, 1.0 - delta)


class SpectralDomain:
    """Random instances, masks and noise; every draw goes through ``rng``."""

    def __init__(self, rng: np.random.Generator):
        self.rng = rng

    def random_instance(self, r: int, n: int) -> Tuple[LineSpectrum, Generator]:
        """Draw f ~ U[0, 1), |a| = 1 + 10^c with c ~ U[0, 1] and uniform phases."""
        if r < 1:
            raise InputError(f"r must be positive, got {r}")
        freqs = self.rng.uniform(0.0, 1.0, size=r)
        while True:
            gaps = wrap_distance(freqs[:, None], freqs[None, :]) + 2.0 * np.eye(r)
            close = np.argwhere(np.triu(gaps < MIN_FREQ_SEPARATION))
            if close.size == 0:
                break
            freqs[close[:, 1]] = self.rng.uniform(0.0, 1.0, size=close.shape[0])
        magnitudes = 1.0 + 10.0 ** self.rng.uniform(0.0, 1.0, size=r)
        phases = self.rng.uniform(0.0, 2.0 * np.pi, size=r)
        spec = LineSpectrum(freqs=freqs, amps=magnitudes * np.exp(1j * phases))
        return spec, synth_signal(spec, n)

    def random_mask(self, n: int, m: int) -> SamplingOperator:
        """Uniformly random m-subset of {0, ..., n-1}, sorted."""
        if not 1 <= m <= n:
            raise InputError(f"m must lie in [1, {n}], got {m}")
        return SamplingOperator(n=n, indices=np.sort(self.rng.choice(n, size=m, replace=False)))

    def add_noise(self, z: Generator, snr_db: float) -> Tuple[Generator, float]:
        """Add circular complex Gaussian noise at the prescribed SNR (dB).

        The per-sample variance is sigma^2 = mean|z|^2 / 10^(snr_db / 10); real
        and imaginary parts each carry sigma^2 / 2.
        """
        z = as_generator(z)
        power = np.mean(np.abs(z) ** 2)
        if power == 0:
            raise InputError("cannot set an SNR for a zero signal")
        if np.isposinf(snr_db):
            return z.copy(), 0.0
        sigma = float(np.sqrt(power / 10.0 ** (snr_db / 10.0)))
        noise = self.rng.standard_normal(z.size) + 1j * self.rng.standard_normal(z.size)
        return z + sigma / np.sqrt(2.0) * noise, sigma


def apply_sampling(op: SamplingOperator, z: Generator) -> np.ndarray:
    return op.apply(z)


def adjoint_sampling(op: SamplingOperator, y: np.ndarray) -> Generator:
    return op.adjoint(y)
