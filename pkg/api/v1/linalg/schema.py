from typing import Callable
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator


class LinOpPair(BaseModel):
    """Matrix-free operator A (rows x cols) together with its adjoint A*.

    Both callables accept a single vector or a block of column vectors.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    forward: Callable[[np.ndarray], np.ndarray]
    adjoint: Callable[[np.ndarray], np.ndarray]
    rows: int = Field(..., ge=1)
    cols: int = Field(..., ge=1)

    @property
    def dims(self):
        return self.rows, self.cols

    @classmethod
    def from_matrix(cls, A: np.ndarray) -> "LinOpPair":
        A = np.asarray(A)
        return cls(forward=lambda v: A @ v, adjoint=lambda u: A.conj().T @ u, rows=A.shape[0], cols=A.shape[1])


class EigPack(BaseModel):
    """Truncated eigendecomposition of a Gram matrix: orthonormal vectors and
    descending non-negative values (squared singular values)."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    vectors: np.ndarray
    values: np.ndarray

    @field_validator("vectors", "values", mode="before")
    @classmethod
    def to_array(cls, value):
        array = np.array(value)
        array.setflags(write=False)
        return array

    @property
    def rank(self) -> int:
        return self.values.shape[0]

    def gram(self) -> np.ndarray:
        """Dense U diag(values) U*. Test oracle only."""
        return (self.vectors * self.values) @ self.vectors.conj().T


class CGResult(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    x: np.ndarray
    iterations: int
    residual: float
    converged: bool
