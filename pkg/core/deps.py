from typing import Sequence
import numpy as np

from core.config import settings
from utils.fft import FFTBackend, ScipyFFT


def get_fft() -> FFTBackend:
    """Provide the default FFT backend."""
    return ScipyFFT()


def get_rng(seed: int = None, *key: int) -> np.random.Generator:
    """Provide a seeded random generator.

    The stream is derived from ``seed`` and an optional integer key, so that
    e.g. an experiment cell ``(m, r, trial)`` always gets the same numbers
    no matter in which order or process it runs.

    Args:
        seed (int): Master seed, defaults to ``settings.SEED``.
        *key (int): Additional non-negative integers identifying the stream.

    Returns:
        np.random.Generator: Independent PCG64 stream.
    """
    seed = settings.SEED if seed is None else seed
    return np.random.default_rng(np.random.SeedSequence(_entropy(seed, key)))


def derive_seed(seed: int, *key: int) -> int:
    """Derive a 32-bit integer seed for a keyed sub-stream."""
    sequence = np.random.SeedSequence(_entropy(seed, key))
    return int(sequence.generate_state(1, dtype=np.uint32)[0])


def _entropy(seed: int, key: Sequence[int]) -> list:
    return [int(seed)] + [int(k) for k in key]
