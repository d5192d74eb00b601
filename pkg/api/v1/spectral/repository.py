import os
import numpy as np
import pandas as pd
from pydantic import ValidationError

from core.exceptions import InputError
from utils.file import FileUtils
from .schema import LineSpectrum, SamplingOperator


class SpectralRepository:
    """Masks (one 0-based index per line) and line spectra (``f,re_amp,im_amp``)."""

    SPECTRUM_COLUMNS = ["f", "re_amp", "im_amp"]

    def read_mask(self, path: str, n: int) -> SamplingOperator:
        if not os.path.isfile(path):
            raise InputError(f"File not found: {path}")
        with open(path) as handle:
            tokens = [line.strip() for line in handle if line.strip() and not line.lstrip().startswith("#")]
        try:
            indices = np.array([int(token) for token in tokens], dtype=np.int64)
        except ValueError as e:
            raise InputError(f"{path}: mask entries must be integers ({e})")
        if indices.size == 0:
            raise InputError(f"{path}: mask is empty")
        if np.unique(indices).size != indices.size:
            raise InputError(f"{path}: duplicate mask indices")
        try:
            return SamplingOperator(n=n, indices=np.sort(indices))
        except ValidationError as e:
            raise InputError(f"{path}: {e.errors()[0]['msg']}")

    def write_mask(self, path: str, op: SamplingOperator) -> str:
        text = "".join(f"{index}\n" for index in op.indices)
        with open(path, "w") as handle:
            handle.write(text)
        return text

    def read_spectrum(self, path: str) -> LineSpectrum:
        frame = FileUtils.read_numeric_table(path, self.SPECTRUM_COLUMNS)
        try:
            return LineSpectrum(
                freqs=frame["f"].to_numpy(),
                amps=frame["re_amp"].to_numpy() + 1j * frame["im_amp"].to_numpy(),
            )
        except ValidationError as e:
            raise InputError(f"{path}: {e.errors()[0]['msg']}")

    def write_spectrum(self, path: str, spec: LineSpectrum) -> str:
        frame = pd.DataFrame({"f": spec.freqs, "re_amp": spec.amps.real, "im_amp": spec.amps.imag})
        return FileUtils.write_table(path, frame)
