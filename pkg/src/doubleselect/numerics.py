"""Dense linear algebra, normal distribution functions and seeded random streams."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from numpy.typing import NDArray
from scipy import special

from .errors import ArgumentError

__all__ = [
    "OlsFit",
    "RngStream",
    "as_matrix",
    "as_vector",
    "normal_cdf",
    "normal_quantile",
    "ols_fit",
    "sample_gaussian_matrix",
    "sample_gaussian_vector",
    "toeplitz_correlation_factor",
]

# Singular values below max(rows, cols) * sigma_max * RANK_RTOL count as zero.
RANK_RTOL = 1e-12


def as_matrix(X, name: str = "X") -> NDArray[np.float64]:
    """Return `X` as a finite 2-D float64 array, raising ArgumentError otherwise."""
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ArgumentError(f"{name} must be 2-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ArgumentError(f"{name} contains non-finite entries")
    return arr


def as_vector(y, name: str = "y") -> NDArray[np.float64]:
    arr = np.asarray(y, dtype=np.float64)
    if arr.ndim == 2 and 1 in arr.shape:
        arr = arr.ravel()
    if arr.ndim != 1:
        raise ArgumentError(f"{name} must be 1-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ArgumentError(f"{name} contains non-finite entries")
    return arr


@dataclass(frozen=True)
class OlsFit:
    """Least-squares fit of y on the columns of X.

    Attributes
    ----------
    coefficients : ndarray, shape (p,)
        Least-squares coefficients; the minimum-norm solution when X is
        rank deficient.
    fitted : ndarray, shape (n,)
        Orthogonal projection of y onto the column space of X.
    residuals : ndarray, shape (n,)
        ``y - fitted``.
    leverage : ndarray, shape (n,)
        Diagonal of the hat matrix.
    rank : int
        Numerical rank of X.
    """

    coefficients: NDArray[np.float64]
    fitted: NDArray[np.float64]
    residuals: NDArray[np.float64]
    leverage: NDArray[np.float64]
    rank: int

    @property
    def full_rank(self) -> bool:
        return self.rank == self.coefficients.shape[0]


def ols_fit(X, y) -> OlsFit:
    """Ordinary least squares via column-pivoted QR with an SVD fallback.

    Pivoted QR handles the common full-rank case. When the pivoted R has a
    diagonal entry below the rank tolerance the fit is recomputed from the
    SVD and the pseudo-inverse (minimum-norm) solution is returned.

    Parameters
    ----------
    X : array-like, shape (n, p)
    y : array-like, shape (n,)

    Returns
    -------
    OlsFit
    """
    X = as_matrix(X)
    y = as_vector(y)
    n, p = X.shape
    if y.shape[0] != n:
        raise ArgumentError(f"X has {n} rows but y has length {y.shape[0]}")
    if n < 1:
        raise ArgumentError("ols_fit needs at least one observation")
    if p == 0:
        return OlsFit(np.zeros(0), np.zeros(n), y.copy(), np.zeros(n), 0)

    tol_scale = max(n, p) * RANK_RTOL
    if n >= p:
        Q, R, piv = scipy.linalg.qr(X, mode="economic", pivoting=True)
        diag = np.abs(np.diag(R))
        if diag[0] > 0 and diag[-1] > tol_scale * diag[0]:
            coef = np.empty(p)
            coef[piv] = scipy.linalg.solve_triangular(R, Q.T @ y)
            fitted = Q @ (Q.T @ y)
            leverage = np.einsum("ij,ij->i", Q, Q)
            return OlsFit(coef, fitted, y - fitted, leverage, p)

    U, s, Vt = np.linalg.svd(X, full_matrices=False)
    rank = int(np.sum(s > tol_scale * s[0])) if s.size and s[0] > 0 else 0
    Ur = U[:, :rank]
    uty = Ur.T @ y
    coef = Vt[:rank].T @ (uty / s[:rank])
    fitted = Ur @ uty
    leverage = np.einsum("ij,ij->i", Ur, Ur)
    return OlsFit(coef, fitted, y - fitted, leverage, rank)


def normal_cdf(z):
    """Standard normal CDF (double-precision ``ndtr``)."""
    return special.ndtr(z)


def normal_quantile(p):
    """Inverse of the standard normal CDF.

    Raises
    ------
    ArgumentError
        If any ``p`` lies outside the open interval (0, 1).
    """
    arr = np.asarray(p, dtype=np.float64)
    if not np.all((arr > 0.0) & (arr < 1.0)):
        raise ArgumentError(f"normal_quantile needs 0 < p < 1, got {p!r}")
    out = special.ndtri(arr)
    return float(out) if out.ndim == 0 else out


def toeplitz_correlation_factor(p: int, rho: float) -> NDArray[np.float64]:
    """Lower-triangular Cholesky factor of the AR(1) correlation matrix.

    ``Sigma[k, j] = rho ** |k - j|``. The factor is written down in closed
    form: row k is ``rho**(k-j) * sqrt(1 - rho**2)`` for ``0 < j <= k`` and
    ``rho**k`` in column 0, which is exact and avoids a numerical Cholesky.
    """
    if p < 1:
        raise ArgumentError(f"p must be >= 1, got {p}")
    if not abs(rho) < 1:
        raise ArgumentError(f"|rho| must be < 1, got {rho}")
    k = np.arange(p)
    lag = k[:, None] - k[None, :]
    L = np.where(lag >= 0, float(rho) ** np.maximum(lag, 0), 0.0)
    L[:, 1:] *= np.sqrt(1.0 - rho * rho)
    return L


def toeplitz_correlation(p: int, rho: float) -> NDArray[np.float64]:
    k = np.arange(p)
    return float(rho) ** np.abs(k[:, None] - k[None, :])


@dataclass
class RngStream:
    """Reproducible random stream identified by ``(seed, index)``.

    Streams are built on the counter-based Philox generator keyed through a
    ``SeedSequence`` whose spawn key is the stream index, so streams with
    different indices never overlap. ``substream`` gives a replication a
    second independent stream (for example for fold assignment). Normal variates use numpy's ziggurat
    sampler. A stream is stateful and must have a single owner.
    """

    seed: int
    index: int = 0
    substream: int = 0
    algorithm: str = field(default="philox4x64-ziggurat", init=False)

    def __post_init__(self):
        if self.seed < 0 or self.index < 0 or self.substream < 0:
            raise ArgumentError("seed and stream indices must be non-negative")
        key = (int(self.index),) if self.substream == 0 else (int(self.index), int(self.substream))
        ss = np.random.SeedSequence(entropy=int(self.seed), spawn_key=key)
        self.generator = np.random.Generator(np.random.Philox(ss))

    def standard_normal(self, size=None):
        return self.generator.standard_normal(size)

    def integers(self, *args, **kwargs):
        return self.generator.integers(*args, **kwargs)

    def permutation(self, x):
        return self.generator.permutation(x)


def sample_gaussian_vector(stream: RngStream, factor) -> NDArray[np.float64]:
    """Draw ``factor @ z`` with ``z`` a vector of independent standard normals."""
    factor = np.asarray(factor, dtype=np.float64)
    if factor.ndim != 2 or factor.shape[0] != factor.shape[1]:
        raise ArgumentError("factor must be a square matrix")
    z = stream.standard_normal(factor.shape[1])
    return factor @ z


def sample_gaussian_matrix(stream: RngStream, factor, n: int) -> NDArray[np.float64]:
    """Draw ``n`` i.i.d. rows with covariance ``factor @ factor.T``.

    Equivalent to stacking ``n`` calls of :func:`sample_gaussian_vector`
    with the same stream.
    """
    factor = np.asarray(factor, dtype=np.float64)
    Z = stream.standard_normal((n, factor.shape[1]))
    return Z @ factor.T
