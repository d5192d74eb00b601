import logging
from typing import Callable, Dict, Sequence, Union
import numpy as np
import scipy.linalg
from scipy.optimize import linear_sum_assignment

from core.config import settings
from core.exceptions import EstimationError, InputError
from api.v1.hankel.domain import HankelDomain
from api.v1.hankel.schema import HankelShape, Generator, as_generator
from api.v1.irls.domain import IrlsDomain
from api.v1.irls.schema import SolverConfig
from api.v1.linalg.domain import randomized_svd
from api.v1.spectral.domain import wrap_distance
from api.v1.spectral.schema import SamplingOperator
from .schema import FreqEstimate

logger = logging.getLogger(__name__)

# Vandermonde fits above this condition number are reported as ill-conditioned
VANDERMONDE_COND_WARN = 1e8


def angles_to_freqs(roots: np.ndarray) -> np.ndarray:
    """Map points on (or near) the unit circle to frequencies in [0, 1)."""
    freqs = np.mod(np.angle(roots) / (2.0 * np.pi), 1.0)
    freqs[freqs >= 1.0] = 0.0
    return np.sort(freqs)


class FrequencyDomain:
    """Frequency retrieval: ESPRIT, Prony and the IRLS + ESPRIT pipeline."""

    def esprit(self, z: Generator, shape: HankelShape, r: int, method: str = "vanilla-esprit") -> FreqEstimate:
        """Least-squares ESPRIT on the column space of H(z).

        Solves U_s[:-1] Psi = U_s[1:] for the top-r left singular vectors U_s;
        the eigenvalues of Psi are exp(2 pi i f).
        """
        z = as_generator(z, shape)
        if not 1 <= r < shape.d:
            raise InputError(f"r={r} must satisfy 1 <= r < min(d1, d2) = {shape.d}")

        hankel = HankelDomain(shape)
        if shape.d <= settings.DENSE_LIMIT:
            U, s, _ = scipy.linalg.svd(hankel.to_dense(z), full_matrices=False)
        else:
            U, s, _ = randomized_svd(hankel.as_linop(z), r + 1, rng=np.random.default_rng(settings.SEED))
        if s[0] == 0 or s[r - 1] <= max(shape.d1, shape.d2) * np.finfo(float).eps * s[0]:
            raise EstimationError(f"H(z) has numerical rank below r={r}")

        signal = U[:, :r]
        psi, _, rank, sv = scipy.linalg.lstsq(signal[:-1], signal[1:])
        if rank < r:
            raise EstimationError("shift-invariance subblock is rank deficient")
        eigenvalues = scipy.linalg.eigvals(psi)
        return FreqEstimate(
            freqs=angles_to_freqs(eigenvalues),
            method=method,
            diagnostics={
                "singular_values": s[: r + 1].tolist(),
                "eig_moduli": np.sort(np.abs(eigenvalues)).tolist(),
                "subblock_cond": float(sv[0] / sv[-1]),
            },
        )

    def prony(self, z: Generator, r: int) -> FreqEstimate:
        """Prony's method: roots of the order-r linear prediction polynomial.

        Uses the square system on the first 2r samples when n = 2r and the
        least-squares prediction over all samples otherwise.
        """
        z = as_generator(z)
        n = z.size
        if r < 1 or n < 2 * r:
            raise InputError(f"Prony needs 1 <= r and n >= 2r, got r={r}, n={n}")

        # rows [z[t-1], ..., z[t-r]] for t = r, ..., n-1
        X = scipy.linalg.toeplitz(z[r - 1:-1], z[r - 1::-1])
        rhs = -z[r:]
        if n == 2 * r:
            try:
                coeffs = scipy.linalg.solve(X, rhs)
            except (scipy.linalg.LinAlgError, ValueError) as e:
                raise EstimationError(f"singular prediction system ({e})")
            if not np.all(np.isfinite(coeffs)):
                raise EstimationError("singular prediction system")
        else:
            coeffs, _, rank, _ = scipy.linalg.lstsq(X, rhs)
            if rank < r:
                raise EstimationError("prediction system is rank deficient")

        roots = np.roots(np.concatenate([[1.0], coeffs]))
        return FreqEstimate(
            freqs=angles_to_freqs(roots),
            method="prony",
            diagnostics={"root_moduli": np.sort(np.abs(roots)).tolist()},
        )

    @staticmethod
    def estimate_amplitudes(z: Generator, freqs: Sequence[float]) -> np.ndarray:
        """Least-squares amplitudes of the Vandermonde model V(freqs) a ~ z."""
        z = as_generator(z)
        freqs = np.asarray(freqs, dtype=float)
        if np.unique(freqs).size != freqs.size:
            raise InputError("frequencies must be distinct")
        V = np.exp(2j * np.pi * np.outer(np.arange(z.size), freqs))
        cond = np.linalg.cond(V)
        if cond > VANDERMONDE_COND_WARN:
            logger.warning(f"ill-conditioned Vandermonde system (cond={cond:.3e})")
        amps, *_ = scipy.linalg.lstsq(V, z)
        return amps

    @staticmethod
    def freq_mse(est: Union[FreqEstimate, Sequence[float]], truth: Sequence[float]) -> float:
        """Mean squared wraparound distance under the optimal matching of est to truth."""
        est = est.freqs if isinstance(est, FreqEstimate) else np.asarray(est, dtype=float)
        truth = np.asarray(truth, dtype=float)
        if est.shape != truth.shape:
            raise InputError(f"{est.size} estimated frequencies but {truth.size} true ones")
        if est.size == 0:
            return 0.0
        cost = wrap_distance(est[:, None], truth[None, :]) ** 2
        rows, cols = linear_sum_assignment(cost)
        return float(cost[rows, cols].mean())

    def denoise_then_estimate(
        self,
        y: np.ndarray,
        Phi: SamplingOperator,
        shape: HankelShape,
        config: SolverConfig,
        r: int,
    ) -> FreqEstimate:
        """Two stages: structured low-rank recovery with IRLS, then ESPRIT on the result."""
        report = IrlsDomain(shape, config).solve(Phi, y)
        estimate = self.esprit(report.z_hat, shape, r, method="struchmirls+esprit")
        diagnostics = dict(estimate.diagnostics)
        diagnostics.update({
            "outer_iters": report.outer_iters,
            "converged": report.converged,
            "cg_iters_total": report.cg_iters_total,
        })
        return FreqEstimate(freqs=estimate.freqs, method=estimate.method, diagnostics=diagnostics)


def vanilla_esprit(z: Generator, shape: HankelShape, r: int) -> FreqEstimate:
    return FrequencyDomain().esprit(z, shape, r)


def freq_mse(est, truth) -> float:
    return FrequencyDomain.freq_mse(est, truth)


EstimatorFn = Callable[[Generator, HankelShape, int, SolverConfig], FreqEstimate]

# estimators compared in the SNR sweep, all fed the same noisy vector
ESTIMATORS: Dict[str, EstimatorFn] = {
    "struchmirls+esprit": lambda z, shape, r, config: FrequencyDomain().denoise_then_estimate(
        z, SamplingOperator.identity(shape.n), shape, config, r
    ),
    "vanilla-esprit": lambda z, shape, r, config: FrequencyDomain().esprit(z, shape, r),
    "prony": lambda z, shape, r, config: FrequencyDomain().prony(z, r),
}
