from typing import List, Literal, Optional
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from core.config import settings
from api.v1.hankel.schema import HankelShape
from api.v1.linalg.schema import EigPack

LambdaMode = Literal["fixed", "exact", "adaptive"]


class SolverConfig(BaseModel):
    """Inputs of the structured harmonic-mean IRLS iteration.

    ``lambda_mode``:
        fixed    -- minimize lam * logdet + ||Phi z - y||^2 with the given ``lam``;
        exact    -- completion, Phi z = y enforced by eliminating observed coordinates;
        adaptive -- lam set once from the energy of H(Phi* y) outside rank R, then held.
    """

    model_config = ConfigDict(frozen=True)

    R: int = Field(..., ge=1)
    lambda_mode: LambdaMode = "exact"
    lam: Optional[float] = Field(None, gt=0)
    decay_alpha: float = Field(default_factory=lambda: settings.DECAY_ALPHA, gt=0, lt=1)
    tol: float = Field(default_factory=lambda: settings.TOL, gt=0)
    max_outer: int = Field(default_factory=lambda: settings.MAX_OUTER, ge=1)
    cg_tol: float = Field(default_factory=lambda: settings.CG_TOL, gt=0)
    cg_max_iters: Optional[int] = Field(None, ge=1)
    # inner tolerance follows max(cg_tol, cg_tol_factor * last iterate change)
    cg_tol_factor: float = Field(0.1, ge=0)
    seed: int = Field(default_factory=lambda: settings.SEED, ge=0)
    initial_weight: Literal["eps2", "inverse_eps2"] = "inverse_eps2"
    eps_floor: float = Field(default_factory=lambda: settings.EPS_FLOOR, ge=0, lt=1)
    oversampling: int = Field(default_factory=lambda: settings.OVERSAMPLING, ge=0)
    power_iters: int = Field(default_factory=lambda: settings.POWER_ITERS, ge=0)

    @model_validator(mode="after")
    def check_lambda(self):
        if self.lambda_mode == "fixed" and self.lam is None:
            raise ValueError("lambda_mode 'fixed' needs a value for lam")
        return self


class ScaledIdentityWeight(BaseModel):
    """W = scale * I, the weight of the first iteration."""

    model_config = ConfigDict(frozen=True)

    scale: float = Field(..., gt=0)
    n: int = Field(..., ge=1)


class WeightOperator(BaseModel):
    """Factored harmonic-mean weight

        W = 2 H_vec* [ T_R(H H*) (+) T_R(H* H) + eps^2 I ]^{-1} H_vec

    stored as the two rank-R eigenpacks of the Gram matrices of H = H(z) and eps.
    Nothing of size d1 d2 x d1 d2 is ever formed.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    left: EigPack
    right: EigPack
    eps: float = Field(..., gt=0)
    shape: HankelShape


class IrlsReport(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    z_hat: np.ndarray
    objective_history: List[float] = []
    eps_history: List[float] = []
    iterate_change_history: List[float] = []
    lambda_history: List[Optional[float]] = []
    cg_iters_history: List[int] = []
    outer_iters: int = 0
    converged: bool = False
    cg_iters_total: int = 0
    cg_failures: int = 0
    objective_is_approximate: bool = False


class SolveRequest(BaseModel):
    """Samples as separate real/imaginary lists; ``indices`` absent means fully sampled."""

    re: List[float] = Field(..., min_length=1)
    im: List[float] = Field(..., min_length=1)
    indices: Optional[List[int]] = None
    n: Optional[int] = Field(None, ge=1)
    d1: Optional[int] = Field(None, ge=1)
    R: int = Field(..., ge=1)
    lambda_mode: LambdaMode = "exact"
    lam: Optional[float] = Field(None, gt=0)
    tol: Optional[float] = Field(None, gt=0)
    max_outer: Optional[int] = Field(None, ge=1)
    seed: int = Field(0, ge=0)


class SolveResponse(BaseModel):
    re: List[float]
    im: List[float]
    objective_history: List[float]
    eps_history: List[float]
    iterate_change_history: List[float]
    outer_iters: int
    converged: bool
    cg_iters_total: int
    cg_failures: int


class DenoiseRequest(SolveRequest):
    lambda_mode: LambdaMode = "adaptive"


class IterateSpectrum(BaseModel):
    """Squared singular values of H(z) with the rank-R Gram eigenpacks.

    ``squared`` holds all d values when d <= ``settings.DENSE_LIMIT`` and the
    top R + 1 otherwise.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    left: EigPack
    right: EigPack
    squared: np.ndarray

    @property
    def next_value(self) -> float:
        """sigma_{R+1}(H(z))."""
        return float(np.sqrt(self.squared[self.left.values.size]))
