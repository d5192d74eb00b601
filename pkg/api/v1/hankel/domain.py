import numpy as np
import scipy.linalg

from core.deps import get_fft
from core.exceptions import InputError
from utils.fft import FFTBackend
from api.v1.linalg.schema import LinOpPair
from .schema import HankelShape, Generator, as_generator


class HankelDomain:
    """Hankel embedding H(z)_{i,j} = z_{i+j-1} for a fixed shape.

    Products with H(z) and H(z)* are computed as FFT correlations in
    O(n log n) per vector; nothing of size d1 x d2 is formed except by the
    explicit ``to_dense``/``hankel_vec`` oracles.
    """

    def __init__(self, shape: HankelShape, fft: FFTBackend = None):
        self.shape = shape
        self.fft = fft or get_fft()
        # no wraparound for the indices we keep as long as the length covers n
        self.fft_len = self.fft.next_fast_len(shape.n)

    def entry(self, z: Generator, i: int, j: int) -> complex:
        """Return H(z)_{i,j} for 1-based indices 1 <= i <= d1, 1 <= j <= d2."""
        z = as_generator(z, self.shape)
        if not (1 <= i <= self.shape.d1 and 1 <= j <= self.shape.d2):
            raise InputError(f"index ({i}, {j}) outside {self.shape.d1} x {self.shape.d2}")
        return complex(z[i + j - 2])

    def matvec(self, z: Generator, v: np.ndarray) -> np.ndarray:
        """H(z) @ v for a vector of length d2 or a block of shape (d2, k)."""
        z = as_generator(z, self.shape)
        v = self._check_operand(v, self.shape.d2, "v")
        return self._correlate(self.fft.fft(z, self.fft_len), v, self.shape.d2)

    def adjoint_matvec(self, z: Generator, u: np.ndarray) -> np.ndarray:
        """H(z)* @ u for a vector of length d1 or a block of shape (d1, k)."""
        z = as_generator(z, self.shape)
        u = self._check_operand(u, self.shape.d1, "u")
        # H(z)^T is the d2 x d1 Hankel matrix of the same generator
        return np.conj(self._correlate(self.fft.fft(z, self.fft_len), np.conj(u), self.shape.d1))

    def as_linop(self, z: Generator) -> LinOpPair:
        """Matrix-free pair (H(z), H(z)*) with the transform of z computed once."""
        z = as_generator(z, self.shape)
        z_hat = self.fft.fft(z, self.fft_len)
        d1, d2 = self.shape.d1, self.shape.d2

        def forward(v):
            return self._correlate(z_hat, self._check_operand(v, d2, "v"), d2)

        def adjoint(u):
            return np.conj(self._correlate(z_hat, np.conj(self._check_operand(u, d1, "u")), d1))

        return LinOpPair(forward=forward, adjoint=adjoint, rows=d1, cols=d2)

    def vec_adjoint(self, M: np.ndarray) -> Generator:
        """H_vec* vec(M): component j is the sum of M over its (j+1)-th antidiagonal."""
        M = np.asarray(M, dtype=np.complex128)
        if M.shape != (self.shape.d1, self.shape.d2):
            raise InputError(f"matrix has shape {M.shape}, expected {(self.shape.d1, self.shape.d2)}")
        index = np.add.outer(np.arange(self.shape.d1), np.arange(self.shape.d2)).ravel()
        real = np.bincount(index, weights=M.real.ravel(), minlength=self.shape.n)
        imag = np.bincount(index, weights=M.imag.ravel(), minlength=self.shape.n)
        return real + 1j * imag

    def antidiagonal_sums(self, X: np.ndarray, Y: np.ndarray) -> Generator:
        """H_vec* vec(X Y^T) for factors X (d1 x k) and Y (d2 x k), via FFT convolution."""
        X = np.asarray(X, dtype=np.complex128).reshape(self.shape.d1, -1)
        Y = np.asarray(Y, dtype=np.complex128).reshape(self.shape.d2, -1)
        if X.shape[1] != Y.shape[1]:
            raise InputError(f"factor ranks differ: {X.shape[1]} vs {Y.shape[1]}")
        spectrum = (self.fft.fft(X, self.fft_len, axis=0) * self.fft.fft(Y, self.fft_len, axis=0)).sum(axis=1)
        return self.fft.ifft(spectrum, self.fft_len)[: self.shape.n]

    def weighted_norm(self, z: Generator) -> float:
        """sqrt(sum_j w_j |z_j|^2), which equals the Frobenius norm of H(z)."""
        z = as_generator(z, self.shape)
        return float(np.sqrt(np.sum(self.shape.w * np.abs(z) ** 2)))

    def to_dense(self, z: Generator) -> np.ndarray:
        """Materialize H(z). Test oracle only."""
        z = as_generator(z, self.shape)
        return scipy.linalg.hankel(z[: self.shape.d1], z[self.shape.d1 - 1:])

    def hankel_vec(self, z: Generator) -> np.ndarray:
        """Column-major vectorization of H(z). Test oracle only."""
        return self.to_dense(z).ravel(order="F")

    def _correlate(self, z_hat: np.ndarray, v: np.ndarray, inner: int) -> np.ndarray:
        # out[i] = sum_j z[i + j] v[j] for j < inner, i.e. entries inner-1 .. n-1
        # of the convolution of z with reversed v
        v_hat = self.fft.fft(v[::-1], self.fft_len, axis=0)
        z_hat = z_hat if v.ndim == 1 else z_hat[:, None]
        full = self.fft.ifft(z_hat * v_hat, self.fft_len, axis=0)
        return full[inner - 1: self.shape.n]

    @staticmethod
    def _check_operand(x, length: int, name: str) -> np.ndarray:
        x = np.asarray(x, dtype=np.complex128)
        if x.ndim not in (1, 2) or x.shape[0] != length:
            raise InputError(f"{name} has shape {x.shape}, expected leading dimension {length}")
        return x
