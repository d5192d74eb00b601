import logging
from typing import Optional, Tuple, Union
import numpy as np
import scipy.linalg

from core.config import settings
from core.exceptions import InputError, SolverError
from utils.fft import FFTBackend
from api.v1.hankel.domain import HankelDomain
from api.v1.hankel.schema import HankelShape, Generator, as_generator
from api.v1.linalg.domain import cg_solve, gram_eigpacks, randomized_svd
from api.v1.linalg.schema import CGResult, EigPack
from api.v1.spectral.schema import SamplingOperator
from .schema import SolverConfig, WeightOperator, ScaledIdentityWeight, IrlsReport, IterateSpectrum

logger = logging.getLogger(__name__)

Weight = Union[WeightOperator, ScaledIdentityWeight]

# largest d1 * d2 for the dense weight oracle
DENSE_WEIGHT_LIMIT = 400
# iterates weigh with 2 (A (+) B + 2 eps^2)^-1, i.e. a WeightOperator at sqrt(2) eps
SQRT2 = float(np.sqrt(2.0))
# step halvings tried before an iteration is declared stalled
MAX_BACKTRACKS = 10
# relative rounding allowance when comparing objective values
OBJECTIVE_SLACK = 1e-12


def logdet_surrogate(
    z: Generator,
    shape: HankelShape,
    eps: float,
    top_values: Optional[np.ndarray] = None,
) -> float:
    """sum_{i<=d} log(sigma_i(H(z))^2 + eps^2).

    Exact for d <= ``settings.DENSE_LIMIT``. Beyond that the squared top
    singular values ``top_values`` are used and the remaining ones count as zero.
    """
    value, _ = _logdet(z, shape, eps, top_values)
    return value


def objective(
    z: Generator,
    eps: float,
    lam: float,
    Phi: SamplingOperator,
    y: np.ndarray,
    shape: HankelShape,
    top_values: Optional[np.ndarray] = None,
) -> float:
    """J_lam(z, eps) = lam * logdet_surrogate(H(z), eps) + ||Phi z - y||^2."""
    if lam < 0:
        raise InputError(f"lambda must be non-negative, got {lam}")
    residual = Phi.apply(as_generator(z, shape)) - np.asarray(y)
    fidelity = float(np.vdot(residual, residual).real)
    if lam == 0:
        return fidelity
    return lam * logdet_surrogate(z, shape, eps, top_values) + fidelity


def epsilon_update(eps_prev: float, z_prev: Generator, z: Generator, decay_alpha: float, k: int) -> float:
    """eps_k = min(eps_{k-1}, ||z^(k-1) - z^(k)||_2 + alpha^(k^2))."""
    if k < 1:
        raise InputError(f"k must be at least 1, got {k}")
    if not 0 < decay_alpha < 1:
        raise InputError(f"decay_alpha must lie in (0, 1), got {decay_alpha}")
    step = float(np.linalg.norm(np.asarray(z_prev) - np.asarray(z)))
    return min(eps_prev, step + decay_alpha ** (k * k))


def build_weight_operator(
    z: Generator,
    shape: HankelShape,
    R: int,
    eps: float,
    rng: np.random.Generator,
    oversampling: int = None,
    power_iters: int = None,
    fft: FFTBackend = None,
) -> WeightOperator:
    if eps <= 0:
        raise InputError(f"eps must be positive, got {eps}")
    left, right = gram_eigpacks(z, shape, R, rng, oversampling=oversampling, power_iters=power_iters, fft=fft)
    return WeightOperator(left=left, right=right, eps=eps, shape=shape)


def apply_weight(W: Weight, v: Generator, fft: FFTBackend = None) -> Generator:
    """W v in O(n R^2 + n R log n).

    With A = U diag(lam) U*, B = V diag(mu) V* and M = H(v), the inverse of
    M -> AM + MB + eps^2 M scales the blocks of M in the bases (U, U_perp) and
    (V, V_perp) by 1/(lam_i + mu_j + eps^2), 1/(lam_i + eps^2),
    1/(mu_j + eps^2) and 1/eps^2. Written as eps^-2 M plus three rank-R
    corrections, only H(v)V, H(v)*U and antidiagonal sums of rank-R products
    are needed.
    """
    if isinstance(W, ScaledIdentityWeight):
        v = as_generator(v)
        if v.size != W.n:
            raise InputError(f"vector has length {v.size}, expected {W.n}")
        return W.scale * v

    shape = W.shape
    v = as_generator(v, shape)
    hankel = HankelDomain(shape, fft=fft)
    U, lam = W.left.vectors, W.left.values
    V, mu = W.right.vectors, W.right.values
    eps2 = W.eps ** 2
    c = 1.0 / eps2
    a = 1.0 / (lam + eps2)
    b = 1.0 / (mu + eps2)

    MV = hankel.matvec(v, V)
    G = hankel.adjoint_matvec(v, U)
    M11 = U.conj().T @ MV
    K = (1.0 / (lam[:, None] + mu[None, :] + eps2) - a[:, None] - b[None, :] + c) * M11

    out = c * shape.w * v
    out = out + hankel.antidiagonal_sums(U * (a - c), G.conj())
    out = out + hankel.antidiagonal_sums(MV * (b - c) + U @ K, V.conj())
    return 2.0 * out


def dense_weight_matrix(z: Generator, shape: HankelShape, R: int, eps: float) -> np.ndarray:
    """Dense n x n weight matrix built with explicit Kronecker sums. Test oracle only.

    Under column-major vectorization M -> AM + MB is I_d2 (x) A + B^T (x) I_d1.
    """
    if shape.d1 * shape.d2 > DENSE_WEIGHT_LIMIT:
        raise InputError(f"dense weight oracle limited to d1*d2 <= {DENSE_WEIGHT_LIMIT}")
    if eps <= 0:
        raise InputError(f"eps must be positive, got {eps}")
    hankel = HankelDomain(shape)
    U, s, Vh = scipy.linalg.svd(hankel.to_dense(z))
    V = Vh.conj().T
    A = (U[:, :R] * s[:R] ** 2) @ U[:, :R].conj().T
    B = (V[:, :R] * s[:R] ** 2) @ V[:, :R].conj().T
    kron_sum = np.kron(np.eye(shape.d2), A) + np.kron(B.T, np.eye(shape.d1))
    system = kron_sum + eps ** 2 * np.eye(shape.d1 * shape.d2)
    P = np.column_stack([hankel.hankel_vec(e) for e in np.eye(shape.n)])
    return 2.0 * P.T @ np.linalg.solve(system, P)


class IrlsDomain:
    """Structured harmonic-mean IRLS for Hankel completion and denoising."""

    def __init__(self, shape: HankelShape, config: SolverConfig, fft: FFTBackend = None):
        if not config.R < shape.d:
            raise InputError(f"rank R={config.R} must be below min(d1, d2) = {shape.d}")
        self.shape = shape
        self.config = config
        self.fft = fft
        self.hankel = HankelDomain(shape, fft=fft)

    def solve_quadratic_step(
        self,
        W: Weight,
        Phi: SamplingOperator,
        y: np.ndarray,
        lam: Optional[float],
        x0: Generator,
        cg_tol: float,
        cg_max_iters: int,
    ) -> Tuple[Generator, CGResult]:
        """argmin <z, W z> + ||Phi z - y||^2 / (2 lam), or with Phi z = y when ``lam`` is None."""
        base = Phi.adjoint(y)
        if lam is None:
            free = Phi.complement
            if free.size == 0:
                return base, CGResult(x=base, iterations=0, residual=0.0, converged=True)

            def normal_op(u):
                full = np.zeros(self.shape.n, dtype=np.complex128)
                full[free] = u
                return apply_weight(W, full, self.fft)[free]

            rhs = -apply_weight(W, base, self.fft)[free]
            result = cg_solve(normal_op, rhs, cg_tol, cg_max_iters, x0=np.asarray(x0)[free])
            z = base.copy()
            z[free] = result.x
            return z, result

        fidelity = Phi.mask / (2.0 * lam)

        def normal_op(v):
            return apply_weight(W, v, self.fft) + fidelity * v

        result = cg_solve(normal_op, base / (2.0 * lam), cg_tol, cg_max_iters, x0=x0)
        return result.x, result

    def solve(self, Phi: SamplingOperator, y: np.ndarray) -> IrlsReport:
        """Safeguarded majorize-minimize iteration on J_lam(z, eps).

        Each candidate from the weighted quadratic step is accepted only if it
        does not increase J at the current eps; otherwise the step is halved up
        to ``MAX_BACKTRACKS`` times. eps never drops below sigma_{R+1}(H(z)).
        Convergence is only declared after a step solved at ``cg_tol``.
        """
        cfg, shape = self.config, self.shape
        y = np.asarray(y, dtype=np.complex128)
        if Phi.n != shape.n:
            raise InputError(f"sampling operator acts on n={Phi.n}, shape has n={shape.n}")
        if y.shape != (Phi.m,):
            raise InputError(f"data has shape {y.shape}, expected ({Phi.m},)")

        z = Phi.adjoint(y)
        z_norm = np.linalg.norm(z)
        if z_norm == 0:
            logger.info("zero data, returning the zero generator")
            return IrlsReport(z_hat=z, converged=True)

        rng = np.random.default_rng(cfg.seed)
        spectrum = self._spectrum(z, rng)
        eps = float(np.sqrt(spectrum.left.values[0]))
        if eps == 0:
            raise SolverError("H(Phi* y) has no numerically non-zero singular value")
        eps_floor = cfg.eps_floor * eps
        scale = eps ** 2 if cfg.initial_weight == "eps2" else eps ** -2
        W: Weight = ScaledIdentityWeight(scale=scale, n=shape.n)
        cg_max_iters = cfg.cg_max_iters or 10 * shape.n
        lam = self._lambda(z, spectrum, z_norm)
        # the step minimizes lam <z, W z> + ||Phi z - y||^2, the quadratic model of J
        step_lam = None if lam is None else lam / 2.0
        singleton = cfg.lambda_mode == "exact" and Phi.complement.size == 0

        report = IrlsReport(
            z_hat=z,
            objective_is_approximate=shape.d > settings.DENSE_LIMIT,
        )
        value, change, tight = np.inf, 1.0, True
        # z^(0) = 0 for the first epsilon step and iterate change
        z_prev = np.zeros_like(z)
        for k in range(1, cfg.max_outer + 1):
            cg_tol = cfg.cg_tol if tight or k <= 2 else max(cfg.cg_tol, cfg.cg_tol_factor * change)
            candidate, cg = self.solve_quadratic_step(W, Phi, y, step_lam, z, cg_tol, cg_max_iters)
            report.cg_iters_total += cg.iterations
            report.cg_iters_history.append(cg.iterations)
            if not cg.converged:
                report.cg_failures += 1

            t, z_new, accepted = self._safeguarded_step(z, candidate, eps, lam, Phi, y, value, rng)
            if accepted is None:
                if cg_tol > cfg.cg_tol:
                    tight = True
                    continue
                candidate_norm = np.linalg.norm(candidate)
                gap = np.linalg.norm(candidate - z) / candidate_norm if candidate_norm > 0 else 0.0
                report.converged = bool(gap < cfg.tol)
                logger.info(f"k={k}: no descent along the step (relative length {gap:.3e}), stopping")
                break
            spectrum = accepted

            eps = min(eps, max(epsilon_update(eps, z_prev, z_new, cfg.decay_alpha, k), spectrum.next_value, eps_floor))
            new_norm = np.linalg.norm(z_new)
            change = float(np.linalg.norm(z_new - z_prev) / new_norm) if new_norm > 0 else 0.0
            z = z_prev = z_new

            value = self._objective(z, eps, lam, Phi, y, spectrum)
            if not np.isfinite(value):
                raise SolverError(f"non-finite objective at iteration {k}")
            report.objective_history.append(value)
            report.eps_history.append(eps)
            report.iterate_change_history.append(change)
            report.lambda_history.append(lam)
            report.outer_iters = len(report.objective_history)
            logger.debug(f"k={k} J={value:.10e} eps={eps:.3e} change={change:.3e} t={t:g} cg={cg.iterations}")

            if singleton or (change < cfg.tol and t == 1.0 and cg_tol <= cfg.cg_tol):
                report.converged = True
                break
            # a small change under a loose inner tolerance or a shortened step proves nothing
            tight = change < cfg.tol
            W = WeightOperator(left=spectrum.left, right=spectrum.right, eps=SQRT2 * eps, shape=shape)

        report.z_hat = z
        logger.info(
            f"IRLS {'converged' if report.converged else 'stopped'} after {report.outer_iters} iterations, "
            f"{report.cg_iters_total} CG iterations"
        )
        return report

    def _safeguarded_step(self, z, candidate, eps, lam, Phi, y, value, rng):
        """Largest t in {1, 1/2, ..., 2^-MAX_BACKTRACKS} with J(z + t (candidate - z), eps) <= J(z, eps).

        Returns (t, iterate, spectrum), or (0, z, None) when no trial descends.
        """
        bound = value + OBJECTIVE_SLACK * abs(value) if np.isfinite(value) else np.inf
        t = 1.0
        for _ in range(MAX_BACKTRACKS + 1):
            trial = candidate if t == 1.0 else z + t * (candidate - z)
            spectrum = self._spectrum(trial, rng)
            trial_value = self._objective(trial, eps, lam, Phi, y, spectrum)
            if not np.isfinite(trial_value):
                raise SolverError("non-finite objective along the quadratic step")
            if trial_value <= bound:
                return t, trial, spectrum
            t /= 2.0
        return 0.0, z, None

    def _spectrum(self, z, rng) -> IterateSpectrum:
        cfg = self.config
        R = cfg.R
        if self.shape.d <= settings.DENSE_LIMIT:
            U, s, Vh = scipy.linalg.svd(self.hankel.to_dense(z), full_matrices=False)
            V = Vh.conj().T
        else:
            U, s, V = randomized_svd(
                self.hankel.as_linop(z), R + 1, rng=rng,
                oversampling=cfg.oversampling, power_iters=cfg.power_iters,
            )
        squared = s ** 2
        return IterateSpectrum(
            left=EigPack(vectors=U[:, :R], values=squared[:R]),
            right=EigPack(vectors=V[:, :R], values=squared[:R]),
            squared=squared,
        )

    def _lambda(self, z, spectrum: IterateSpectrum, z_norm: float) -> Optional[float]:
        mode = self.config.lambda_mode
        if mode == "exact":
            return None
        if mode == "fixed":
            return self.config.lam
        d, R = self.shape.d, self.config.R
        # energy of H(Phi* y) the rank-R model cannot explain, per unit of d * R
        tail = max(self.hankel.weighted_norm(z) ** 2 - float(np.sum(spectrum.left.values)), 0.0)
        lam = max(tail, 1e-16 * z_norm ** 2) / (d * R)
        logger.info(f"adaptive lambda set to {lam:.6e}")
        return lam

    def _objective(self, z, eps, lam, Phi, y, spectrum: IterateSpectrum) -> float:
        missing = self.shape.d - spectrum.squared.size
        logdet = float(np.sum(np.log(spectrum.squared + eps ** 2)) + missing * np.log(eps ** 2))
        if lam is None:
            return logdet
        residual = Phi.apply(z) - y
        return lam * logdet + float(np.vdot(residual, residual).real)


class IrlsSolver:
    """Entry point for callers that see a new shape and configuration per problem."""

    def __init__(self, fft: FFTBackend = None):
        self.fft = fft

    def solve(self, Phi: SamplingOperator, y: np.ndarray, shape: HankelShape, config: SolverConfig) -> IrlsReport:
        return IrlsDomain(shape, config, fft=self.fft).solve(Phi, y)


def irls_solve(Phi: SamplingOperator, y: np.ndarray, shape: HankelShape, config: SolverConfig) -> IrlsReport:
    return IrlsSolver().solve(Phi, y, shape, config)


def _logdet(z, shape: HankelShape, eps: float, top_values=None) -> Tuple[float, bool]:
    if eps <= 0:
        raise InputError(f"eps must be positive, got {eps}")
    if shape.d <= settings.DENSE_LIMIT:
        s = scipy.linalg.svdvals(HankelDomain(shape).to_dense(z))
        return float(np.sum(np.log(s ** 2 + eps ** 2))), False
    if top_values is None:
        raise InputError(f"min(d1, d2) = {shape.d} needs the top singular values for the surrogate")
    top_values = np.asarray(top_values, dtype=float)
    tail = shape.d - top_values.size
    return float(np.sum(np.log(top_values + eps ** 2)) + tail * np.log(eps ** 2)), True
