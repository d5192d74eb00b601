import logging
from typing import Callable, Optional, Tuple
import numpy as np
import scipy.linalg

from core.config import settings
from core.exceptions import InputError, SolverError
from api.v1.hankel.schema import HankelShape, Generator
from api.v1.hankel.domain import HankelDomain
from .schema import LinOpPair, EigPack, CGResult

logger = logging.getLogger(__name__)


def gaussian_test_matrix(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    """Circular complex Gaussian sketch with unit-variance entries."""
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2.0)


def randomized_svd(
    op: LinOpPair,
    R: int,
    oversampling: int = None,
    power_iters: int = None,
    rng: np.random.Generator = None,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Rank-R randomized SVD of a matrix-free operator.

    Range finder with ``R + oversampling`` Gaussian sketch vectors and
    ``power_iters`` QR-stabilized power iterations, followed by a small
    dense SVD of the projected operator.

    Args:
        op: Operator pair (A, A*).
        R: Target rank, 1 <= R <= min(rows, cols).
        oversampling: Extra sketch vectors, defaults to ``settings.OVERSAMPLING``.
        power_iters: Power iterations, defaults to ``settings.POWER_ITERS``.
        rng: Random generator for the sketch.

    Returns:
        (U, s, V) with A ~ U diag(s) V*, orthonormal U (rows x R) and V (cols x R),
        s descending.
    """
    oversampling = settings.OVERSAMPLING if oversampling is None else oversampling
    power_iters = settings.POWER_ITERS if power_iters is None else power_iters
    rng = rng if rng is not None else np.random.default_rng(settings.SEED)
    if not 1 <= R <= min(op.rows, op.cols):
        raise InputError(f"rank R={R} must lie in [1, {min(op.rows, op.cols)}]")
    if oversampling < 0 or power_iters < 0:
        raise InputError("oversampling and power_iters must be non-negative")

    k = min(R + oversampling, op.rows, op.cols)
    Q = _orthonormalize(op.forward(gaussian_test_matrix(op.cols, k, rng)))
    for _ in range(power_iters):
        Q = _orthonormalize(op.forward(_orthonormalize(op.adjoint(Q))))

    # B = Q* A, obtained as (A* Q)*
    B = op.adjoint(Q).conj().T
    U_small, s, Vh = scipy.linalg.svd(B, full_matrices=False)
    U = Q @ U_small[:, :R]
    return U, s[:R], Vh[:R].conj().T


def gram_eigpacks(
    z: Generator,
    shape: HankelShape,
    R: int,
    rng: np.random.Generator = None,
    oversampling: int = None,
    power_iters: int = None,
    fft=None,
) -> Tuple[EigPack, EigPack]:
    """Rank-R eigenpacks of H(z)H(z)* (left) and H(z)*H(z) (right) from one SVD."""
    if not 1 <= R < shape.d:
        raise InputError(f"rank R={R} must satisfy 1 <= R < min(d1, d2) = {shape.d}")
    op = HankelDomain(shape, fft=fft).as_linop(z)
    U, s, V = randomized_svd(op, R, oversampling=oversampling, power_iters=power_iters, rng=rng)
    values = s ** 2
    return EigPack(vectors=U, values=values), EigPack(vectors=V, values=values)


def cg_solve(
    apply_A: Callable[[np.ndarray], np.ndarray],
    b: np.ndarray,
    tol: float,
    max_iters: int,
    x0: Optional[np.ndarray] = None,
    callback: Optional[Callable[[np.ndarray], None]] = None,
) -> CGResult:
    """Conjugate gradients for a Hermitian positive definite operator.

    Stops once ||Ax - b|| / ||b|| <= tol. When ``max_iters`` is reached the
    iterate with the smallest residual is returned with ``converged=False``.

    Raises:
        SolverError: On non-finite values or non-positive curvature, which
            means the operator is not positive definite.
    """
    if tol <= 0:
        raise InputError(f"tol must be positive, got {tol}")
    b = np.asarray(b, dtype=np.complex128)
    x = np.zeros_like(b) if x0 is None else np.array(x0, dtype=np.complex128)
    b_norm = np.linalg.norm(b)
    if b_norm == 0:
        return CGResult(x=np.zeros_like(b), iterations=0, residual=0.0, converged=True)

    r = b - apply_A(x)
    rs = np.vdot(r, r).real
    residual = np.sqrt(rs) / b_norm
    if not np.isfinite(residual):
        raise SolverError("non-finite residual in conjugate gradients")
    if residual <= tol:
        return CGResult(x=x, iterations=0, residual=float(residual), converged=True)

    p = r.copy()
    best_x, best_residual = x, residual
    for iteration in range(1, max_iters + 1):
        Ap = apply_A(p)
        curvature = np.vdot(p, Ap).real
        if not np.isfinite(curvature):
            raise SolverError(f"non-finite curvature at CG iteration {iteration}")
        if curvature <= 0:
            raise SolverError(f"non-positive curvature {curvature:.3e} at CG iteration {iteration}")

        alpha = rs / curvature
        x = x + alpha * p
        r = r - alpha * Ap
        rs_new = np.vdot(r, r).real
        residual = np.sqrt(rs_new) / b_norm
        if not np.isfinite(residual):
            raise SolverError(f"non-finite residual at CG iteration {iteration}")
        if callback is not None:
            callback(x)
        if residual < best_residual:
            best_x, best_residual = x, residual
        if residual <= tol:
            return CGResult(x=x, iterations=iteration, residual=float(residual), converged=True)

        p = r + (rs_new / rs) * p
        rs = rs_new

    logger.warning(f"CG stopped after {max_iters} iterations with relative residual {best_residual:.3e}")
    return CGResult(x=best_x, iterations=max_iters, residual=float(best_residual), converged=False)


def dense_svd(M: np.ndarray, limit: int = None) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Full SVD (U, s, Vh) of a small dense matrix. Test oracle only."""
    limit = settings.DENSE_LIMIT if limit is None else limit
    M = np.asarray(M)
    if M.ndim != 2:
        raise InputError(f"expected a matrix, got shape {M.shape}")
    if min(M.shape) > limit:
        raise InputError(f"dense SVD limited to min dimension {limit}, got {M.shape}")
    return scipy.linalg.svd(M, full_matrices=True)


def _orthonormalize(Y: np.ndarray) -> np.ndarray:
    Q, _ = scipy.linalg.qr(Y, mode="economic")
    return Q
