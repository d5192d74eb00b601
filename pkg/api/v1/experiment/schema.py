from typing import List, Literal, Optional
from pydantic import BaseModel, ConfigDict, Field, model_validator

from core.config import settings
from api.v1.irls.schema import SolverConfig

ExperimentKind = Literal["phase_transition", "snr_sweep"]

SNR_METHODS = ["struchmirls+esprit", "vanilla-esprit", "prony"]


class ExperimentConfig(BaseModel):
    """Grid, trial count and solver settings of one experiment run."""

    model_config = ConfigDict(frozen=True)

    kind: ExperimentKind
    n: int = Field(..., ge=3)
    d1: Optional[int] = Field(None, ge=1)
    r_values: List[int] = []
    m_values: List[int] = []
    snr_values: List[float] = []
    trials: int = Field(..., ge=1)
    solver: SolverConfig
    success_threshold: float = Field(default_factory=lambda: settings.SUCCESS_THRESHOLD, gt=0)
    output_path: Optional[str] = None
    seed: int = Field(default_factory=lambda: settings.SEED, ge=0)
    workers: int = Field(default_factory=lambda: settings.WORKERS, ge=1)
    truth_freqs: List[float] = [0.35, 0.40]
    truth_amps: List[float] = [1.0, 1.0]
    methods: List[str] = SNR_METHODS

    @model_validator(mode="after")
    def check_grid(self):
        if self.kind == "phase_transition":
            if not self.r_values or not self.m_values:
                raise ValueError("phase transition needs non-empty r_values and m_values")
            if min(self.r_values) < 1 or min(self.m_values) < 1 or max(self.m_values) > self.n:
                raise ValueError(f"need r >= 1 and 1 <= m <= n={self.n}")
        else:
            if not self.snr_values:
                raise ValueError("SNR sweep needs non-empty snr_values")
            if len(self.truth_freqs) != len(self.truth_amps):
                raise ValueError("truth_freqs and truth_amps differ in length")
            unknown = set(self.methods) - set(SNR_METHODS)
            if unknown or not self.methods:
                raise ValueError(f"methods must be a non-empty subset of {SNR_METHODS}")
        return self
