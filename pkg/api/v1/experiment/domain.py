import logging
import math
from functools import partial
from typing import Callable, Dict, List, Sequence, Tuple
import numpy as np
import pandas as pd
from tqdm import tqdm
from tqdm.contrib.concurrent import process_map

from core.config import settings
from core.deps import get_rng, derive_seed
from core.exceptions import InputError, SolverError
from api.v1.hankel.schema import make_shape
from api.v1.irls.domain import IrlsDomain
from api.v1.spectral.domain import SpectralDomain, synth_signal
from api.v1.spectral.schema import LineSpectrum
from api.v1.frequency import domain as frequency_domain
from .repository import ExperimentRepository
from .schema import ExperimentConfig

logger = logging.getLogger(__name__)

# metric bound charged to a trial whose estimator fails
FAILED_TRIAL_MSE = 0.25


def snr_key(snr_db: float) -> int:
    """Stable integer key of an SNR value (its IEEE-754 bit pattern)."""
    return int(np.float64(snr_db).view(np.uint64))


def phase_transition_cell(config: ExperimentConfig, cell: Tuple[int, int, int]) -> bool:
    """One completion trial; True when the relative error is below the threshold."""
    m, r, trial = cell
    shape = make_shape(config.n, config.d1)
    spectral = SpectralDomain(get_rng(config.seed, m, r, trial))
    _, x = spectral.random_instance(r, config.n)
    Phi = spectral.random_mask(config.n, m)
    solver = config.solver.model_copy(
        update={"R": r, "lambda_mode": "exact", "seed": derive_seed(config.seed, m, r, trial)}
    )
    try:
        report = IrlsDomain(shape, solver).solve(Phi, Phi.apply(x))
    except SolverError as e:
        logger.warning(f"cell m={m} r={r} trial={trial} failed: {e}")
        return False
    return bool(np.linalg.norm(report.z_hat - x) / np.linalg.norm(x) < config.success_threshold)


def snr_trial(config: ExperimentConfig, cell: Tuple[float, int]) -> Dict[str, float]:
    """One noise realization; every method sees the same noisy vector."""
    snr_db, trial = cell
    shape = make_shape(config.n, config.d1)
    truth = LineSpectrum(freqs=config.truth_freqs, amps=config.truth_amps)
    r = truth.r
    noisy, _ = SpectralDomain(get_rng(config.seed, snr_key(snr_db), trial)).add_noise(
        synth_signal(truth, config.n), snr_db
    )
    noisy.setflags(write=False)
    solver = config.solver.model_copy(
        update={"R": r, "seed": derive_seed(config.seed, snr_key(snr_db), trial)}
    )
    errors = {}
    for method in config.methods:
        estimator = frequency_domain.ESTIMATORS[method]
        try:
            estimate = estimator(noisy, shape, r, solver)
            errors[method] = frequency_domain.freq_mse(estimate, truth.freqs)
        except SolverError as e:
            logger.warning(f"{method} failed at snr={snr_db} trial={trial}: {e}")
            errors[method] = FAILED_TRIAL_MSE
    return errors


class ExperimentDomain:
    """Runs experiment grids cell by cell and aggregates them into CSV tables.

    Each cell seeds its own stream from (seed, cell key), so results do not
    depend on the number of workers or the order in which cells finish.
    """

    def __init__(self, config: ExperimentConfig, repository: ExperimentRepository = None):
        self.config = config
        self.repository = repository or ExperimentRepository()

    def run_phase_transition(self) -> pd.DataFrame:
        cfg = self.config
        if cfg.kind != "phase_transition":
            raise InputError(f"config is for {cfg.kind}, not phase_transition")
        shape = make_shape(cfg.n, cfg.d1)
        if max(cfg.r_values) >= shape.d:
            raise InputError(f"every r must be below min(d1, d2) = {shape.d}")

        cells = [(m, r, t) for m in cfg.m_values for r in cfg.r_values for t in range(cfg.trials)]
        successes = self._run(partial(phase_transition_cell, cfg), cells, "phase transition")
        rows = []
        for index, (m, r) in enumerate((m, r) for m in cfg.m_values for r in cfg.r_values):
            chunk = successes[index * cfg.trials:(index + 1) * cfg.trials]
            rows.append({"m": m, "r": r, "success_rate": math.fsum(chunk) / cfg.trials})
        frame = pd.DataFrame(rows, columns=["m", "r", "success_rate"])
        self._write(frame)
        return frame

    def run_snr_sweep(self) -> pd.DataFrame:
        cfg = self.config
        if cfg.kind != "snr_sweep":
            raise InputError(f"config is for {cfg.kind}, not snr_sweep")
        shape = make_shape(cfg.n, cfg.d1)
        if len(cfg.truth_freqs) >= shape.d:
            raise InputError(f"model order {len(cfg.truth_freqs)} must be below min(d1, d2) = {shape.d}")

        cells = [(snr, t) for snr in cfg.snr_values for t in range(cfg.trials)]
        errors = self._run(partial(snr_trial, cfg), cells, "snr sweep")
        rows = []
        for index, snr in enumerate(cfg.snr_values):
            chunk = errors[index * cfg.trials:(index + 1) * cfg.trials]
            for method in cfg.methods:
                mean = math.fsum(trial[method] for trial in chunk) / cfg.trials
                rows.append({"snr_db": float(snr), "method": method, "mean_freq_mse": mean})
        frame = pd.DataFrame(rows, columns=["snr_db", "method", "mean_freq_mse"])
        self._write(frame)
        return frame

    def _run(self, fn: Callable, cells: Sequence, desc: str) -> List:
        workers = self.config.workers
        logger.info(f"{desc}: {len(cells)} cells on {workers} worker(s), seed={self.config.seed}")
        if workers > 1:
            return process_map(
                fn, cells,
                max_workers=workers,
                chunksize=max(1, len(cells) // (4 * workers)),
                desc=desc,
                disable=not settings.SHOW_PROGRESS,
            )
        return [fn(cell) for cell in tqdm(cells, desc=desc, disable=not settings.SHOW_PROGRESS)]

    def _write(self, frame: pd.DataFrame) -> None:
        if self.config.output_path:
            self.repository.write_grid(self.config.output_path, frame, self.config.seed)
            logger.info(f"wrote {self.config.output_path}")


def run_phase_transition(config: ExperimentConfig) -> pd.DataFrame:
    return ExperimentDomain(config).run_phase_transition()


def run_snr_sweep(config: ExperimentConfig) -> pd.DataFrame:
    return ExperimentDomain(config).run_snr_sweep()
