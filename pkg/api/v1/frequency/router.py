from fastapi import APIRouter, HTTPException, status

from core.exceptions import InputError, SolverError
from api.v1.irls.router import samples_to_problem, solver_config
from .domain import FrequencyDomain
from .schema import EstimateRequest, EstimateResponse


class FrequencyRouter:
    def __init__(self) -> None:
        self.__domain = FrequencyDomain()
        self.tags = ["Frequencies"]

    @property
    def router(self):
        """
        Get the API router for frequency estimation.

        Returns:
            APIRouter: The API router.
        """
        api_router = APIRouter(
            prefix="/frequencies",
            tags=self.tags,
            responses={
                400: {"description": "Bad request"},
                422: {"description": "Estimation failure"},
                500: {"description": "Internal server error"}
            }
        )

        @api_router.post("/estimate", response_model=EstimateResponse)
        def estimate(request: EstimateRequest):
            """
            Estimate r frequencies, optionally from partial samples.
            """
            try:
                Phi, y, shape = samples_to_problem(request.re, request.im, request.indices, request.n, request.d1)
                if request.method == "struchmirls+esprit":
                    mode = "exact" if Phi.m < shape.n else request.lambda_mode
                    config = solver_config(request, R=request.r, lambda_mode=mode)
                    result = self.__domain.denoise_then_estimate(y, Phi, shape, config, request.r)
                elif Phi.m < shape.n:
                    raise InputError(f"{request.method} needs fully sampled data")
                elif request.method == "prony":
                    result = self.__domain.prony(y, request.r)
                else:
                    result = self.__domain.esprit(y, shape, request.r)
            except InputError as e:
                raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=str(e))
            except SolverError as e:
                raise HTTPException(status_code=status.HTTP_422_UNPROCESSABLE_ENTITY, detail=str(e))
            return EstimateResponse(method=result.method, freqs=result.freqs.tolist(), diagnostics=result.diagnostics)

        return api_router
