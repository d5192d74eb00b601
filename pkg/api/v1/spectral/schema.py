import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from core.exceptions import InputError


class LineSpectrum(BaseModel):
    """Sum of r complex exponentials: frequencies in [0, 1) cycles/sample and amplitudes."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    freqs: np.ndarray
    amps: np.ndarray

    @field_validator("freqs", mode="before")
    @classmethod
    def to_freqs(cls, value):
        array = np.array(value, dtype=float).reshape(-1)
        array.setflags(write=False)
        return array

    @field_validator("amps", mode="before")
    @classmethod
    def to_amps(cls, value):
        array = np.array(value, dtype=np.complex128).reshape(-1)
        array.setflags(write=False)
        return array

    @model_validator(mode="after")
    def check_lines(self):
        if self.freqs.shape != self.amps.shape:
            raise ValueError(f"{self.freqs.size} frequencies but {self.amps.size} amplitudes")
        if np.any(self.freqs < 0) or np.any(self.freqs >= 1):
            raise ValueError("frequencies must lie in [0, 1)")
        if np.any(np.diff(np.sort(self.freqs)) <= 0):
            raise ValueError("frequencies must be pairwise distinct")
        return self

    @property
    def r(self) -> int:
        return self.freqs.size


class SamplingOperator(BaseModel):
    """Subsampling map Phi: C^n -> C^m keeping the coordinates in ``indices``."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    n: int = Field(..., ge=1)
    indices: np.ndarray

    @field_validator("indices", mode="before")
    @classmethod
    def to_indices(cls, value):
        array = np.asarray(value)
        if array.size and not np.all(np.equal(np.mod(array, 1), 0)):
            raise ValueError("indices must be integers")
        array = np.array(array, dtype=np.int64).reshape(-1)
        array.setflags(write=False)
        return array

    @model_validator(mode="after")
    def check_indices(self):
        if self.indices.size > self.n:
            raise ValueError(f"m={self.indices.size} exceeds n={self.n}")
        if self.indices.size and (self.indices[0] < 0 or self.indices[-1] > self.n - 1):
            raise ValueError(f"indices must lie in [0, {self.n - 1}]")
        if np.any(np.diff(self.indices) <= 0):
            raise ValueError("indices must be strictly increasing")
        return self

    @classmethod
    def identity(cls, n: int) -> "SamplingOperator":
        return cls(n=n, indices=np.arange(n))

    @property
    def m(self) -> int:
        return self.indices.size

    @property
    def mask(self) -> np.ndarray:
        mask = np.zeros(self.n, dtype=bool)
        mask[self.indices] = True
        return mask

    @property
    def complement(self) -> np.ndarray:
        """Unobserved coordinates, ascending."""
        return np.flatnonzero(~self.mask)

    def apply(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z)
        if z.shape != (self.n,):
            raise InputError(f"signal has shape {z.shape}, expected ({self.n},)")
        return z[self.indices]

    def adjoint(self, y: np.ndarray) -> np.ndarray:
        y = np.asarray(y, dtype=np.complex128)
        if y.shape != (self.m,):
            raise InputError(f"data has shape {y.shape}, expected ({self.m},)")
        z = np.zeros(self.n, dtype=np.complex128)
        z[self.indices] = y
        return z
