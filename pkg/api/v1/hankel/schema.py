from typing import Optional
import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, Field, model_validator

from core.exceptions import InputError

# Generators are stored 0-based; formulas in docstrings are 1-based.
Generator = npt.NDArray[np.complex128]


class HankelShape(BaseModel):
    """Dimensions of a Hankel embedding H: C^n -> C^(d1 x d2)."""

    model_config = ConfigDict(frozen=True)

    n: int = Field(..., ge=1)
    d1: int = Field(..., ge=1)
    d2: int = Field(..., ge=1)

    @model_validator(mode="after")
    def check_dimensions(self):
        if self.n != self.d1 + self.d2 - 1:
            raise ValueError(f"n={self.n} must equal d1 + d2 - 1 = {self.d1 + self.d2 - 1}")
        return self

    @property
    def d(self) -> int:
        return min(self.d1, self.d2)

    @property
    def w(self) -> np.ndarray:
        """Antidiagonal multiplicities, w[j] = min(j+1, d1, d2, n-j)."""
        j = np.arange(self.n)
        return np.minimum.reduce([j + 1, np.full(self.n, self.d1), np.full(self.n, self.d2), self.n - j])

    @property
    def transposed(self) -> "HankelShape":
        return HankelShape(n=self.n, d1=self.d2, d2=self.d1)


def make_shape(n: int, d1: Optional[int] = None) -> HankelShape:
    """Build a HankelShape, choosing the balanced split d1 = n // 2 + 1 when absent.

    Raises:
        InputError: If n < 1 or d1 is outside [1, n].
    """
    if n < 1:
        raise InputError(f"n must be positive, got {n}")
    if d1 is None:
        d1 = n // 2 + 1
    if not 1 <= d1 <= n:
        raise InputError(f"d1 must lie in [1, {n}], got {d1}")
    return HankelShape(n=n, d1=d1, d2=n - d1 + 1)


def as_generator(z, shape: Optional[HankelShape] = None) -> Generator:
    """Coerce ``z`` to a complex vector, checking its length against ``shape``."""
    z = np.asarray(z, dtype=np.complex128)
    if z.ndim != 1:
        raise InputError(f"generator must be one-dimensional, got shape {z.shape}")
    if shape is not None and z.shape[0] != shape.n:
        raise InputError(f"generator has length {z.shape[0]}, expected n={shape.n}")
    return z
