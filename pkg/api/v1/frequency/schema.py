from typing import Any, Dict, List, Literal, Optional
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from api.v1.irls.schema import LambdaMode

Method = Literal["struchmirls+esprit", "vanilla-esprit", "prony"]


class FreqEstimate(BaseModel):
    """Estimated frequencies, ascending in [0, 1)."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    freqs: np.ndarray
    method: Method
    diagnostics: Dict[str, Any] = {}

    @field_validator("freqs", mode="before")
    @classmethod
    def to_sorted(cls, value):
        array = np.sort(np.asarray(value, dtype=float).reshape(-1))
        if np.any(array < 0) or np.any(array >= 1):
            raise ValueError("frequencies must lie in [0, 1)")
        array.setflags(write=False)
        return array


class EstimateRequest(BaseModel):
    re: List[float] = Field(..., min_length=1)
    im: List[float] = Field(..., min_length=1)
    indices: Optional[List[int]] = None
    n: Optional[int] = Field(None, ge=1)
    d1: Optional[int] = Field(None, ge=1)
    r: int = Field(..., ge=1)
    method: Method = "struchmirls+esprit"
    lambda_mode: LambdaMode = "adaptive"
    lam: Optional[float] = Field(None, gt=0)
    seed: int = Field(0, ge=0)


class EstimateResponse(BaseModel):
    method: str
    freqs: List[float]
    diagnostics: Dict[str, Any]
