import numpy as np
import pytest

from core.deps import get_rng
from api.v1.spectral.domain import synth_signal
from api.v1.spectral.schema import LineSpectrum


@pytest.fixture
def rng():
    return get_rng(20240517)


@pytest.fixture
def complex_normal(rng):
    """Factory of standard circular complex Gaussian arrays."""

    def draw(*size):
        return (rng.standard_normal(size) + 1j * rng.standard_normal(size)) / np.sqrt(2.0)

    return draw


@pytest.fixture
def two_tone():
    """Noiseless f = [0.35, 0.40], unit amplitudes, n = 64."""
    spec = LineSpectrum(freqs=[0.35, 0.40], amps=[1.0, 1.0])
    return spec, synth_signal(spec, 64)
