"""Plug-in penalty levels and data-driven penalty loadings.

The Lasso level is ``2 c sqrt(n) Phi^{-1}(1 - gamma / (2p))`` and the
Square-root Lasso level is half of it. Loadings for the Lasso are refined
by post-Lasso iterations starting from residuals of a small initial
regression; Square-root Lasso loadings are either fixed functions of the
design or refined by the self-normalized analogue of the same loop.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from .errors import ArgumentError, EstimationError
from .lasso import LassoFit, LassoProblem, SolverOptions, post_lasso_refit, solve
from .numerics import as_matrix, as_vector, normal_quantile, ols_fit

__all__ = [
    "SELECTORS",
    "LoadingEstimate",
    "PenaltyConfig",
    "estimate_loadings",
    "floor_loadings",
    "initial_loadings",
    "intercept_columns",
    "iterate_loadings_lasso",
    "iterate_loadings_sqrt",
    "lasso_lambda",
    "penalty_level",
    "sqrt_lasso_conservative_loadings",
    "sqrt_lasso_homoscedastic_loadings",
    "sqrt_lasso_lambda",
]

SELECTORS = (
    "iterated-lasso",
    "sqrt-lasso-homoscedastic",
    "sqrt-lasso-conservative",
    "sqrt-lasso-iterated",
)

# Loadings below LOADING_FLOOR_RTOL * max(loading) are raised to that value.
LOADING_FLOOR_RTOL = 1e-6


@dataclass(frozen=True)
class PenaltyConfig:
    """Penalty constants and loading-iteration controls.

    Parameters
    ----------
    c : float, default=1.1
        Slack constant, must exceed 1.
    gamma : float, default=0.05
        The penalty holds with probability about ``1 - gamma``.
    selector : str, default="iterated-lasso"
        One of :data:`SELECTORS`.
    max_loading_iterations : int, default=15
        Cap K on loading updates.
    loading_tolerance : float, default=1e-8
        Stop once the largest loading change is at most this.
    initial_set : tuple of int or None
        Columns regressed on to form the initial residuals. ``None`` uses
        the all-ones column(s) of the design, if any.
    """

    c: float = 1.1
    gamma: float = 0.05
    selector: str = "iterated-lasso"
    max_loading_iterations: int = 15
    loading_tolerance: float = 1e-8
    initial_set: tuple[int, ...] | None = None
    solver: SolverOptions = field(default_factory=SolverOptions)

    def __post_init__(self):
        if not self.c > 1:
            raise ArgumentError(f"c must exceed 1, got {self.c}")
        if not 0 < self.gamma < 1:
            raise ArgumentError(f"gamma must lie in (0, 1), got {self.gamma}")
        if self.selector not in SELECTORS:
            raise ArgumentError(f"selector must be one of {SELECTORS}, got {self.selector!r}")
        if self.max_loading_iterations < 1:
            raise ArgumentError("max_loading_iterations must be >= 1")
        if not self.loading_tolerance >= 0:
            raise ArgumentError("loading_tolerance must be >= 0")

    @property
    def kind(self) -> str:
        return "lasso" if self.selector == "iterated-lasso" else "sqrt-lasso"


@dataclass
class LoadingEstimate:
    loadings: NDArray[np.float64]
    iterations: int
    fit: LassoFit
    history: list[float]
    converged: bool
    lam: float


def _check_level_args(n, p, c, gamma):
    if n < 1 or p < 1:
        raise ArgumentError(f"need n >= 1 and p >= 1, got n={n}, p={p}")
    if not c > 1:
        raise ArgumentError(f"c must exceed 1, got {c}")
    if not 0 < gamma < 1:
        raise ArgumentError(f"gamma must lie in (0, 1), got {gamma}")


def lasso_lambda(n: int, p: int, c: float = 1.1, gamma: float = 0.05) -> float:
    """``2 c sqrt(n) Phi^{-1}(1 - gamma / (2p))``."""
    _check_level_args(n, p, c, gamma)
    return 2.0 * c * np.sqrt(n) * normal_quantile(1.0 - gamma / (2.0 * p))


def sqrt_lasso_lambda(n: int, p: int, c: float = 1.1, gamma: float = 0.05) -> float:
    """``c sqrt(n) Phi^{-1}(1 - gamma / (2p))``, half the Lasso level."""
    _check_level_args(n, p, c, gamma)
    return c * np.sqrt(n) * normal_quantile(1.0 - gamma / (2.0 * p))


def penalty_level(config: PenaltyConfig, n: int, p: int) -> float:
    if config.kind == "lasso":
        return lasso_lambda(n, p, config.c, config.gamma)
    return sqrt_lasso_lambda(n, p, config.c, config.gamma)


def intercept_columns(X) -> list[int]:
    """Indices of columns that are identically one."""
    X = np.asarray(X)
    return [int(j) for j in np.flatnonzero(np.all(X == 1.0, axis=0))]


def _cross_moment_root(X, resid):
    # sqrt(En[x_j^2 e^2]) for every column j
    return np.sqrt((X**2).T @ (resid**2) / X.shape[0])


def initial_loadings(X, y, initial_set=()) -> NDArray[np.float64]:
    """``sqrt(En[x_j^2 r^2])`` with ``r`` the OLS residual of y on X[:, initial_set]."""
    X = as_matrix(X)
    y = as_vector(y)
    idx = np.asarray(list(initial_set), dtype=np.intp)
    resid = ols_fit(X[:, idx], y).residuals
    return _cross_moment_root(X, resid)


def floor_loadings(loadings, unpenalized=()) -> NDArray[np.float64]:
    """Raise degenerate loadings to ``1e-6 * max``; unpenalized entries become 0.

    When every penalized loading is zero the floor is ``1e-6`` itself.
    """
    out = np.array(loadings, dtype=np.float64)
    mask = np.ones(out.shape[0], dtype=bool)
    mask[list(unpenalized)] = False
    if mask.any():
        top = out[mask].max()
        floor = LOADING_FLOOR_RTOL * top if top > 0 else LOADING_FLOOR_RTOL
        out[mask] = np.maximum(out[mask], floor)
    out[~mask] = 0.0
    return out


def sqrt_lasso_homoscedastic_loadings(X) -> NDArray[np.float64]:
    """Column root-mean-squares ``sqrt(En[x_j^2])``."""
    X = as_matrix(X)
    return np.sqrt(np.mean(X**2, axis=0))


def sqrt_lasso_conservative_loadings(X) -> NDArray[np.float64]:
    """``2 En[x_j^4]^{1/4}``, an upper bound valid for moderately heavy tails."""
    X = as_matrix(X)
    return 2.0 * np.mean(X**4, axis=0) ** 0.25


def _default_initial_set(X, config):
    if config.initial_set is not None:
        return tuple(config.initial_set)
    return tuple(intercept_columns(X))


def _iterate(X, y, lam, config, loadings, unpenalized, update):
    kind = config.kind
    n = X.shape[0]
    history: list[float] = []
    beta = None
    converged = False
    for _ in range(config.max_loading_iterations + 1):
        fit = solve(LassoProblem(X, y, lam, loadings, kind), config.solver, beta0=beta)
        beta = fit.beta
        refit = post_lasso_refit(X, y, fit.support)
        new = floor_loadings(update(refit.residuals, fit.support.size, n), unpenalized)
        change = float(np.max(np.abs(new - loadings)))
        history.append(change)
        loadings = new
        if change <= config.loading_tolerance:
            converged = True
            break
    if history[-1] != 0.0:
        fit = solve(LassoProblem(X, y, lam, loadings, kind), config.solver, beta0=beta)
    return LoadingEstimate(loadings, len(history), fit, history, converged, lam)


def iterate_loadings_lasso(X, y, lam: float, config: PenaltyConfig | None = None,
                           unpenalized=()) -> LoadingEstimate:
    """Post-Lasso iterations for heteroscedasticity-robust Lasso loadings.

    Starting from :func:`initial_loadings`, each round solves the Lasso with
    the current loadings, refits OLS on the selected support and sets
    ``l_j = sqrt(En[x_j^2 e^2]) * sqrt(n / (n - s))`` with ``e`` the refit
    residual and ``s`` the support size. The loop ends when no loading
    moves by more than ``loading_tolerance`` or after
    ``max_loading_iterations + 1`` updates. The returned fit uses the final
    loadings.

    Raises
    ------
    EstimationError
        If the selected support leaves no degrees of freedom (``s >= n``).
    """
    config = config or PenaltyConfig()
    X = as_matrix(X)
    y = as_vector(y)
    if config.kind != "lasso":
        raise ArgumentError("iterate_loadings_lasso needs the iterated-lasso selector")
    start = initial_loadings(X, y, _default_initial_set(X, config))
    start = floor_loadings(start, unpenalized)

    def update(resid, s, n):
        if n - s <= 0:
            raise EstimationError(f"selected model of size {s} leaves no degrees of freedom (n={n})")
        return _cross_moment_root(X, resid) * np.sqrt(n / (n - s))

    return _iterate(X, y, lam, config, start, unpenalized, update)


def iterate_loadings_sqrt(X, y, lam: float, config: PenaltyConfig | None = None,
                          unpenalized=()) -> LoadingEstimate:
    """Post-Square-root-Lasso iterations with self-normalized loadings.

    Starts from the conservative loadings ``2 En[x_j^4]^{1/4}`` and updates
    ``l_j = sqrt(En[x_j^2 e^2]) / sqrt(En[e^2])``.
    """
    config = config or PenaltyConfig(selector="sqrt-lasso-iterated")
    X = as_matrix(X)
    y = as_vector(y)
    if config.kind != "sqrt-lasso":
        raise ArgumentError("iterate_loadings_sqrt needs a sqrt-lasso selector")
    start = floor_loadings(sqrt_lasso_conservative_loadings(X), unpenalized)

    def update(resid, s, n):
        ms = float(np.mean(resid**2))
        if ms <= 0.0:
            raise EstimationError("post-fit residuals are identically zero")
        return _cross_moment_root(X, resid) / np.sqrt(ms)

    return _iterate(X, y, lam, config, start, unpenalized, update)


def estimate_loadings(X, y, config: PenaltyConfig, unpenalized=()) -> LoadingEstimate:
    """Penalty level, loadings and final fit for the configured selector."""
    X = as_matrix(X)
    y = as_vector(y)
    n = X.shape[0]
    # all-zero columns can never enter the model, so they do not count toward p
    p = max(int(np.count_nonzero(np.any(X != 0.0, axis=0))), 1)
    lam = penalty_level(config, n, p)
    if config.selector == "iterated-lasso":
        return iterate_loadings_lasso(X, y, lam, config, unpenalized)
    if config.selector == "sqrt-lasso-iterated":
        return iterate_loadings_sqrt(X, y, lam, config, unpenalized)
    if config.selector == "sqrt-lasso-homoscedastic":
        loadings = sqrt_lasso_homoscedastic_loadings(X)
    else:
        loadings = sqrt_lasso_conservative_loadings(X)
    loadings = floor_loadings(loadings, unpenalized)
    fit = solve(LassoProblem(X, y, lam, loadings, "sqrt-lasso"), config.solver)
    return LoadingEstimate(loadings, 0, fit, [], True, lam)
