"""Weighted Lasso and Square-root Lasso solvers with KKT certificates.

Both programs are on the per-observation scale::

    lasso       min_b  En[(y - X b)^2]       + (lam / n) * sum_j l_j |b_j|
    sqrt-lasso  min_b  sqrt(En[(y - X b)^2]) + (lam / n) * sum_j l_j |b_j|

where ``En`` is the sample mean. Columns are used as given; the loadings
``l_j`` do the standardization. A loading of exactly zero leaves that
coefficient unpenalized.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from . import _cd
from .errors import ArgumentError
from .numerics import OlsFit, as_matrix, as_vector, ols_fit

__all__ = [
    "LassoFit",
    "LassoProblem",
    "SolverOptions",
    "kkt_residual",
    "objective_value",
    "post_lasso_refit",
    "solve",
    "solve_lasso",
    "solve_sqrt_lasso",
]

KINDS = ("lasso", "sqrt-lasso")


@dataclass(frozen=True)
class SolverOptions:
    """Coordinate-descent stopping rules.

    A fit is certified once the largest coefficient change in a sweep is at
    most ``change_tol * (1 + max|b|)`` and the KKT residual is at most
    ``tolerance``. Designs with more than ``gram_limit`` columns skip the
    Gram matrix and update the residual vector directly.
    """

    tolerance: float = 1e-7
    max_sweeps: int = 10_000
    change_tol: float = 1e-10
    residual_floor: float = 1e-10
    gram_limit: int = 1000


@dataclass
class LassoProblem:
    X: NDArray[np.float64]
    y: NDArray[np.float64]
    lam: float
    loadings: NDArray[np.float64]
    kind: str = "lasso"

    def __post_init__(self):
        self.X = as_matrix(self.X, "X")
        self.y = as_vector(self.y, "y")
        n, p = self.X.shape
        if self.y.shape[0] != n:
            raise ArgumentError(f"X has {n} rows but y has length {self.y.shape[0]}")
        if n < 1 or p < 1:
            raise ArgumentError("need n >= 1 and p >= 1")
        self.loadings = as_vector(self.loadings, "loadings")
        if self.loadings.shape[0] != p:
            raise ArgumentError(f"expected {p} loadings, got {self.loadings.shape[0]}")
        if np.any(self.loadings < 0):
            raise ArgumentError("loadings must be non-negative")
        if not (np.isfinite(self.lam) and self.lam >= 0):
            raise ArgumentError(f"lambda must be finite and >= 0, got {self.lam}")
        if self.kind not in KINDS:
            raise ArgumentError(f"kind must be one of {KINDS}, got {self.kind!r}")

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    @property
    def penalty_weights(self) -> NDArray[np.float64]:
        """Per-coordinate weight ``lam * l_j / n`` multiplying ``|b_j|``."""
        return self.lam * self.loadings / self.n


@dataclass
class LassoFit:
    beta: NDArray[np.float64]
    support: NDArray[np.intp]
    objective: float
    kkt_residual: float
    iterations: int
    converged: bool
    history: NDArray[np.float64] = field(repr=False, default_factory=lambda: np.zeros(0))


def _residual_floor2(problem: LassoProblem, options: SolverOptions) -> float:
    y_rms2 = float(np.mean(problem.y**2))
    return (options.residual_floor**2) * y_rms2


def objective_value(problem: LassoProblem, beta, options: SolverOptions | None = None) -> float:
    """Objective of ``problem`` at ``beta`` (sqrt-lasso residual norm floored)."""
    options = options or SolverOptions()
    beta = np.asarray(beta, dtype=np.float64)
    resid = problem.y - problem.X @ beta
    Q = float(np.mean(resid**2))
    pen = float(np.sum(problem.penalty_weights * np.abs(beta)))
    if problem.kind == "lasso":
        return Q + pen
    return float(np.sqrt(max(Q, _residual_floor2(problem, options)))) + pen


def kkt_residual(problem: LassoProblem, beta, options: SolverOptions | None = None) -> float:
    """Largest violation of the subgradient optimality conditions at ``beta``.

    With ``e = y - X beta`` and ``t_j = lam * l_j / n`` the score of
    coordinate j is ``2 En[x_j e]`` for the Lasso and
    ``En[x_j e] / sqrt(En[e^2])`` for the Square-root Lasso. Inactive
    coordinates must satisfy ``|score_j| <= t_j``; active ones
    ``score_j = t_j * sign(beta_j)``. Returns 0 at an exact optimum.

    When the Square-root Lasso residual is at or below the floor the
    residual direction is undefined. The score is then ``X'u / n`` for the
    minimum-norm ``u`` solving the active equations, shrunk into the ball
    ``||u|| <= sqrt(n)`` of valid subgradients, so a zero return is still
    a proof of optimality.
    """
    options = options or SolverOptions()
    beta = as_vector(beta, "beta")
    if beta.shape[0] != problem.p:
        raise ArgumentError(f"beta must have length {problem.p}")
    resid = problem.y - problem.X @ beta
    corr = problem.X.T @ resid / problem.n
    t = problem.penalty_weights
    if problem.kind == "lasso":
        score = 2.0 * corr
    else:
        Q = float(np.mean(resid**2))
        if Q <= _residual_floor2(problem, options):
            score = _exact_fit_score(problem.X, beta, t)
        else:
            score = corr / np.sqrt(Q)
    viol = np.where(
        beta == 0.0,
        np.maximum(np.abs(score) - t, 0.0),
        np.abs(score - t * np.sign(beta)),
    )
    return float(viol.max(initial=0.0))


def _exact_fit_score(X, beta, t):
    n = X.shape[0]
    active = np.flatnonzero(beta)
    if active.size == 0:
        return np.zeros(X.shape[1])
    A = X[:, active].T / n
    u = np.linalg.lstsq(A, t[active] * np.sign(beta[active]), rcond=None)[0]
    norm = float(np.linalg.norm(u))
    if norm > np.sqrt(n):
        u *= np.sqrt(n) / norm
    return X.T @ u / n


def _run(problem: LassoProblem, options: SolverOptions, beta0) -> LassoFit:
    kind = _cd.LASSO if problem.kind == "lasso" else _cd.SQRT_LASSO
    X, y = problem.X, problem.y
    n, p = X.shape
    beta = np.zeros(p) if beta0 is None else np.array(beta0, dtype=np.float64)
    if beta.shape != (p,):
        raise ArgumentError(f"warm start must have length {p}")
    pen = problem.penalty_weights
    floor2 = _residual_floor2(problem, options)
    history = np.full(options.max_sweeps, np.nan)
    if not np.any(y):
        beta[:] = 0.0
        sweeps = 0
    elif p <= options.gram_limit:
        G = X.T @ X / n
        g = X.T @ y / n
        yy = float(y @ y / n)
        sweeps, _ = _cd.cd_covariance(
            kind, G, g, yy, pen, beta, options.max_sweeps,
            options.change_tol, options.tolerance, floor2, history,
        )
    else:
        col_ms = np.einsum("ij,ij->j", X, X) / n
        sweeps, _ = _cd.cd_streaming(
            kind, np.ascontiguousarray(X), y, col_ms, pen, beta, options.max_sweeps,
            options.change_tol, options.tolerance, floor2, history,
        )
    # certify independently of the kernel's running quantities
    kkt = kkt_residual(problem, beta, options)
    converged = kkt <= options.tolerance
    return LassoFit(
        beta=beta,
        support=np.flatnonzero(beta),
        objective=objective_value(problem, beta, options),
        kkt_residual=kkt,
        iterations=int(sweeps),
        converged=bool(converged),
        history=history[: int(sweeps)],
    )


def solve_lasso(problem: LassoProblem, options: SolverOptions | None = None, beta0=None) -> LassoFit:
    """Weighted Lasso by cyclic coordinate descent.

    Parameters
    ----------
    problem : LassoProblem
        Must have ``kind == "lasso"``.
    options : SolverOptions, optional
    beta0 : array-like, optional
        Warm start.

    Returns
    -------
    LassoFit
        ``converged`` is False when the sweep cap was hit before the KKT
        certificate held; the caller decides what to do with such a fit.
    """
    if problem.kind != "lasso":
        raise ArgumentError("solve_lasso needs a problem of kind 'lasso'")
    return _run(problem, options or SolverOptions(), beta0)


def solve_sqrt_lasso(problem: LassoProblem, options: SolverOptions | None = None, beta0=None) -> LassoFit:
    """Weighted Square-root Lasso by cyclic coordinate descent.

    Each coordinate step has a closed form in terms of the partial residual
    norm. If the residual norm falls below ``residual_floor * rms(y)`` it is
    floored there, both inside the updates and in the reported objective,
    and the solver stops. Such a fit counts as converged only when the
    exact-fit certificate of :func:`kkt_residual` holds.
    """
    if problem.kind != "sqrt-lasso":
        raise ArgumentError("solve_sqrt_lasso needs a problem of kind 'sqrt-lasso'")
    return _run(problem, options or SolverOptions(), beta0)


def solve(problem: LassoProblem, options: SolverOptions | None = None, beta0=None) -> LassoFit:
    """Dispatch on ``problem.kind``."""
    return _run(problem, options or SolverOptions(), beta0)


def post_lasso_refit(X, y, support) -> OlsFit:
    """OLS of ``y`` on the columns of ``X`` listed in ``support``.

    An empty support gives zero fitted values and ``residuals == y``.
    """
    X = as_matrix(X)
    support = np.asarray(support, dtype=np.intp)
    if support.size and (support.min() < 0 or support.max() >= X.shape[1]):
        raise ArgumentError("support indices out of range")
    return ols_fit(X[:, support], y)
