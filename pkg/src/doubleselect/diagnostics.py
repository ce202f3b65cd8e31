"""Sparse eigenvalues of Gram matrices and distance to normality."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb

import numpy as np

from .errors import ArgumentError, CapacityError
from .numerics import as_matrix, as_vector, normal_cdf

__all__ = ["SparseEigReport", "gram_matrix", "ks_distance_to_normal", "sparse_eigenvalues"]

DEFAULT_CAP = 200_000


@dataclass(frozen=True)
class SparseEigReport:
    m: int
    phi_min: float
    phi_max: float
    method: str
    subsets: int

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "m": self.m,
            "phi_min": self.phi_min,
            "phi_max": self.phi_max,
            "method": self.method,
            "subsets_examined": self.subsets,
        }


def gram_matrix(X) -> np.ndarray:
    """``En[x x']`` for the rows of X."""
    X = as_matrix(X)
    return X.T @ X / X.shape[0]


def sparse_eigenvalues(M, m: int, cap: int = DEFAULT_CAP) -> SparseEigReport:
    """Exact m-sparse minimal and maximal eigenvalues of a PSD matrix.

    ``phi_min(m)`` and ``phi_max(m)`` are the extreme values of
    ``delta' M delta / delta' delta`` over vectors with at most m nonzero
    entries. Over a fixed support the extremes are the eigenvalues of the
    principal submatrix, and enlarging a support only widens the range, so
    enumerating the size-m supports is enough.

    Raises
    ------
    CapacityError
        If ``C(p, m)`` exceeds ``cap``; the count is in the message.
    """
    M = as_matrix(M, "M")
    p = M.shape[0]
    if M.shape != (p, p):
        raise ArgumentError("M must be square")
    scale = max(1.0, float(np.abs(M).max(initial=0.0)))
    if not np.allclose(M, M.T, atol=1e-10 * scale, rtol=0):
        raise ArgumentError("M must be symmetric")
    if not 1 <= m <= p:
        raise ArgumentError(f"m must lie in [1, {p}], got {m}")
    count = comb(p, m)
    if count > cap:
        raise CapacityError(f"C({p}, {m}) = {count} supports exceeds the enumeration cap {cap}")
    M = (M + M.T) / 2.0
    if m == p:
        ev = np.linalg.eigvalsh(M)
        if ev[0] < -1e-10 * scale:
            raise ArgumentError("M is not positive semi-definite")
        return SparseEigReport(m, max(float(ev[0]), 0.0), float(ev[-1]), "full-spectrum", 1)
    lo, hi = np.inf, -np.inf
    for support in combinations(range(p), m):
        idx = np.array(support)
        ev = np.linalg.eigvalsh(M[np.ix_(idx, idx)])
        lo = min(lo, ev[0])
        hi = max(hi, ev[-1])
    if lo < -1e-10 * scale:
        raise ArgumentError("M is not positive semi-definite")
    return SparseEigReport(m, max(float(lo), 0.0), float(hi), "exact-enumeration", count)


def ks_distance_to_normal(samples) -> float:
    """Kolmogorov-Smirnov distance between the empirical CDF and N(0, 1)."""
    x = np.sort(as_vector(samples, "samples"))
    n = x.size
    if n < 2:
        raise ArgumentError("need at least two samples")
    cdf = normal_cdf(x)
    upper = np.arange(1, n + 1) / n - cdf
    lower = cdf - np.arange(n) / n
    return float(max(upper.max(), lower.max()))
