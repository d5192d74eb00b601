from typing import List, Optional, Tuple
import numpy as np
from fastapi import APIRouter, HTTPException, status
from pydantic import BaseModel, ValidationError

from core.exceptions import InputError, SolverError
from api.v1.hankel.schema import HankelShape, make_shape
from api.v1.spectral.schema import SamplingOperator
from .domain import IrlsSolver
from .schema import SolverConfig, SolveRequest, DenoiseRequest, SolveResponse


def samples_to_problem(
    re: List[float],
    im: List[float],
    indices: Optional[List[int]],
    n: Optional[int],
    d1: Optional[int],
) -> Tuple[SamplingOperator, np.ndarray, HankelShape]:
    """Turn request samples into (Phi, y, shape)."""
    if len(re) != len(im):
        raise InputError(f"re has {len(re)} entries but im has {len(im)}")
    values = np.asarray(re, dtype=float) + 1j * np.asarray(im, dtype=float)
    if indices is None:
        if n is not None and n != values.size:
            raise InputError(f"n={n} but {values.size} samples were given without indices")
        n = values.size
        Phi = SamplingOperator.identity(n)
    else:
        if n is None:
            raise InputError("n is required when indices are given")
        if len(indices) != values.size:
            raise InputError(f"{len(indices)} indices for {values.size} samples")
        order = np.argsort(indices, kind="stable")
        try:
            Phi = SamplingOperator(n=n, indices=np.asarray(indices)[order])
        except ValidationError as e:
            raise InputError(e.errors()[0]["msg"])
        values = values[order]
    return Phi, values, make_shape(n, d1)


def solver_config(request: BaseModel, **overrides) -> SolverConfig:
    keys = ("R", "lambda_mode", "lam", "seed", "tol", "max_outer")
    options = {key: getattr(request, key) for key in keys if getattr(request, key, None) is not None}
    options.update(overrides)
    try:
        return SolverConfig(**options)
    except ValidationError as e:
        raise InputError(e.errors()[0]["msg"])


class IrlsRouter:
    def __init__(self) -> None:
        self.__domain = IrlsSolver()
        self.tags = ["IRLS"]

    @property
    def router(self):
        """
        Get the API router for structured low-rank recovery.

        Returns:
            APIRouter: The API router.
        """
        api_router = APIRouter(
            prefix="/irls",
            tags=self.tags,
            responses={
                400: {"description": "Bad request"},
                422: {"description": "Solver failure"},
                500: {"description": "Internal server error"}
            }
        )

        def run(request: SolveRequest, require_full: bool) -> SolveResponse:
            try:
                if require_full and request.indices is not None:
                    raise InputError("denoising expects fully sampled data (no indices)")
                Phi, y, shape = samples_to_problem(request.re, request.im, request.indices, request.n, request.d1)
                report = self.__domain.solve(Phi, y, shape, solver_config(request))
            except InputError as e:
                raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=str(e))
            except SolverError as e:
                raise HTTPException(status_code=status.HTTP_422_UNPROCESSABLE_ENTITY, detail=str(e))
            return SolveResponse(
                re=report.z_hat.real.tolist(),
                im=report.z_hat.imag.tolist(),
                objective_history=report.objective_history,
                eps_history=report.eps_history,
                iterate_change_history=report.iterate_change_history,
                outer_iters=report.outer_iters,
                converged=report.converged,
                cg_iters_total=report.cg_iters_total,
                cg_failures=report.cg_failures,
            )

        @api_router.post("/complete", response_model=SolveResponse)
        def complete(request: SolveRequest):
            """
            Complete a Hankel-structured signal from the samples at ``indices``.
            """
            return run(request, require_full=False)

        @api_router.post("/denoise", response_model=SolveResponse)
        def denoise(request: DenoiseRequest):
            """
            Denoise a fully sampled signal towards a low-rank Hankel structure.
            """
            return run(request, require_full=True)

        return api_router
