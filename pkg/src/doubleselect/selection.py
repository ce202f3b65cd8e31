"""Post-double-selection estimation of a treatment effect with many controls.

Controls useful for predicting the treatment and controls useful for
predicting the outcome are selected by feasible Lasso; the treatment
effect is the OLS coefficient on the treatment in a regression of the
outcome on the treatment and the union of both selected sets (plus any
controls the user forces in).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np
from numpy.typing import NDArray

from .errors import ArgumentError, EstimationError
from .numerics import RngStream, as_matrix, as_vector, normal_quantile, ols_fit
from .penalty import PenaltyConfig, estimate_loadings, intercept_columns

__all__ = [
    "DEFAULT_RIDGE_GRID",
    "SelectionSets",
    "TreatmentEffectEstimate",
    "confidence_interval",
    "jackknife_variance",
    "plugin_variance",
    "post_double_selection",
    "post_double_selection_ridge",
    "post_single_selection",
    "ridge_cv_fit",
    "ridge_cv_select",
    "select_controls",
]

Selector = Callable[[NDArray[np.float64], NDArray[np.float64]], Sequence[int]]

# Ridge penalties kappa (objective ||y - Xb||^2 + kappa * n * ||b||^2). The
# lower end stays away from the interpolating limit, which for p > n
# reproduces the target exactly in sample.
DEFAULT_RIDGE_GRID = tuple(np.logspace(-1, 4, 21))


@dataclass(frozen=True)
class SelectionSets:
    treatment: tuple[int, ...]
    outcome: tuple[int, ...]
    amelioration: tuple[int, ...]
    union: tuple[int, ...]

    @property
    def sizes(self) -> tuple[int, int, int, int]:
        return len(self.treatment), len(self.outcome), len(self.amelioration), len(self.union)


@dataclass(frozen=True)
class TreatmentEffectEstimate:
    """Point estimate, standard errors and selection record.

    ``sigma_n`` is the plug-in sandwich standard deviation on the
    root-n scale; ``se_plugin = sigma_n / sqrt(n)`` and ``se_jackknife``
    (HC3) are ready-to-use standard errors of ``alpha_hat``.
    """

    alpha_hat: float
    beta_hat: NDArray[np.float64]
    sigma_n: float
    se_plugin: float
    se_jackknife: float
    ci_plugin: tuple[float, float]
    ci_jackknife: tuple[float, float]
    level: float
    selection: SelectionSets
    v_hat: NDArray[np.float64]
    zeta_hat: NDArray[np.float64]
    n: int
    p: int
    rank_deficient: bool = False

    @property
    def ci(self) -> tuple[float, float]:
        return self.ci_plugin

    def se(self, kind: str = "jackknife") -> float:
        if kind == "jackknife":
            return self.se_jackknife
        if kind == "plugin":
            return self.se_plugin
        raise ArgumentError(f"unknown standard error kind {kind!r}")


def select_controls(X, target, config: PenaltyConfig | None = None, unpenalized=()) -> tuple[int, ...]:
    """Support of the configured feasible Lasso of ``target`` on ``X``."""
    X = as_matrix(X)
    target = as_vector(target, "target")
    if X.shape[0] != target.shape[0]:
        raise ArgumentError("X and target have different numbers of rows")
    est = estimate_loadings(X, target, config or PenaltyConfig(), unpenalized)
    return tuple(int(j) for j in est.fit.support)


def plugin_variance(v_hat, zeta_hat) -> float:
    """Sandwich ``En[v^2]^-1 En[v^2 zeta^2] En[v^2]^-1``."""
    v = as_vector(v_hat, "v_hat")
    z = as_vector(zeta_hat, "zeta_hat")
    if v.shape != z.shape:
        raise ArgumentError("v_hat and zeta_hat must have equal length")
    if v.shape[0] < 2:
        raise ArgumentError("plugin_variance needs at least two observations")
    ev2 = float(np.mean(v**2))
    if ev2 <= 0.0:
        raise EstimationError("En[v^2] is zero")
    return float(np.mean(v**2 * z**2)) / ev2**2


def jackknife_variance(W, residuals, index: int = 0) -> float:
    """HC3 variance of coefficient ``index`` in the OLS of some y on ``W``.

    Returns the diagonal entry of
    ``(W'W)^-1 W' diag(e_i^2 / (1 - h_i)^2) W (W'W)^-1`` where ``h`` is the
    leverage. A rank-deficient ``W`` uses the pseudo-inverse.

    Raises
    ------
    EstimationError
        If some observation has leverage numerically equal to one.
    """
    W = as_matrix(W, "W")
    e = as_vector(residuals, "residuals")
    if W.shape[0] != e.shape[0]:
        raise ArgumentError("W and residuals have different numbers of rows")
    pinv = np.linalg.pinv(W, rcond=max(W.shape) * 1e-12)
    h = np.einsum("ij,ji->i", W, pinv)
    if np.any(h >= 1.0 - 1e-10):
        raise EstimationError("leverage one: an observation is fitted exactly")
    row = pinv[index]
    return float(np.sum(row**2 * e**2 / (1.0 - h) ** 2))


def confidence_interval(alpha_hat: float, se: float, n: int, level: float = 0.95) -> tuple[float, float]:
    """``alpha_hat -+ Phi^{-1}(1 - (1 - level)/2) * se / sqrt(n)``; ``se`` is on the root-n scale."""
    if not 0 < level < 1:
        raise ArgumentError(f"level must lie in (0, 1), got {level}")
    half = normal_quantile(1.0 - (1.0 - level) / 2.0) * se / np.sqrt(n)
    return (alpha_hat - half, alpha_hat + half)


def _final_regression(y, d, X, sets: SelectionSets, level: float) -> TreatmentEffectEstimate:
    n, p = X.shape
    idx = np.asarray(sets.union, dtype=np.intp)
    s_hat = idx.size
    if s_hat + 1 >= n:
        raise EstimationError(f"selected model exhausts sample: {s_hat} controls with n={n}")
    Xs = X[:, idx]
    v_hat = ols_fit(Xs, d).residuals
    ev2 = float(np.mean(v_hat**2))
    if ev2 <= 1e-12 * max(1.0, float(np.mean(d**2))):
        raise EstimationError("treatment fully explained by selected controls")
    W = np.column_stack([d, Xs])
    fit = ols_fit(W, y)
    alpha = float(fit.coefficients[0])
    beta = np.zeros(p)
    beta[idx] = fit.coefficients[1:]
    zeta_hat = fit.residuals * np.sqrt(n / (n - s_hat - 1))
    sigma_n = float(np.sqrt(plugin_variance(v_hat, zeta_hat)))
    se_jk = float(np.sqrt(jackknife_variance(W, fit.residuals, 0)))
    return TreatmentEffectEstimate(
        alpha_hat=alpha,
        beta_hat=beta,
        sigma_n=sigma_n,
        se_plugin=sigma_n / np.sqrt(n),
        se_jackknife=se_jk,
        ci_plugin=confidence_interval(alpha, sigma_n, n, level),
        ci_jackknife=confidence_interval(alpha, se_jk * np.sqrt(n), n, level),
        level=level,
        selection=sets,
        v_hat=v_hat,
        zeta_hat=zeta_hat,
        n=n,
        p=p,
        rank_deficient=not fit.full_rank,
    )


def _prepare(y, d, X, level):
    X = as_matrix(X)
    y = as_vector(y, "y")
    d = as_vector(d, "d")
    if not (X.shape[0] == y.shape[0] == d.shape[0]):
        raise ArgumentError("y, d and X must have the same number of rows")
    if not 0 < level < 1:
        raise ArgumentError(f"level must lie in (0, 1), got {level}")
    return y, d, X


def _amelioration_set(X, amelioration):
    extra = set(int(j) for j in amelioration) | set(intercept_columns(X))
    if any(j < 0 or j >= X.shape[1] for j in extra):
        raise ArgumentError("amelioration index out of range")
    return tuple(sorted(extra))


def post_double_selection(y, d, X, amelioration=(), config: PenaltyConfig | None = None,
                          level: float = 0.95, selector: Selector | None = None) -> TreatmentEffectEstimate:
    """Post-double-selection estimate of the treatment effect.

    Parameters
    ----------
    y : array-like, shape (n,)
        Outcome.
    d : array-like, shape (n,)
        Treatment; any real values.
    X : array-like, shape (n, p)
        Candidate controls. All-ones columns are treated as intercepts and
        always kept.
    amelioration : sequence of int
        Controls forced into the final regression.
    config : PenaltyConfig, optional
    level : float, default=0.95
        Confidence level of the reported intervals.
    selector : callable, optional
        ``selector(X, target) -> indices`` replacing the feasible Lasso.

    Returns
    -------
    TreatmentEffectEstimate

    Raises
    ------
    EstimationError
        When the selected model leaves fewer than one residual degree of
        freedom or the selected controls explain the treatment exactly.
    """
    y, d, X = _prepare(y, d, X, level)
    config = config or PenaltyConfig()
    select = selector or (lambda A, t: select_controls(A, t, config))
    I1 = tuple(sorted(select(X, d)))
    I2 = tuple(sorted(select(X, y)))
    I3 = _amelioration_set(X, amelioration)
    union = tuple(sorted(set(I1) | set(I2) | set(I3)))
    return _final_regression(y, d, X, SelectionSets(I1, I2, I3, union), level)


def post_single_selection(y, d, X, config: PenaltyConfig | None = None, level: float = 0.95,
                          amelioration=()) -> TreatmentEffectEstimate:
    """Post-Lasso on the outcome equation with the treatment left unpenalized.

    One feasible Lasso of ``y`` on ``[d, X]`` selects controls; the effect
    is then estimated by OLS of ``y`` on ``d`` and those controls. This is
    the conventional single-selection comparator and is not robust to
    controls that matter mostly through the treatment.
    """
    y, d, X = _prepare(y, d, X, level)
    config = config or PenaltyConfig()
    Z = np.column_stack([d, X])
    if config.initial_set is None:
        config = replace(config, initial_set=(0, *[j + 1 for j in intercept_columns(X)]))
    est = estimate_loadings(Z, y, config, unpenalized=(0,))
    I2 = tuple(int(j) - 1 for j in est.fit.support if j != 0)
    I3 = _amelioration_set(X, amelioration)
    union = tuple(sorted(set(I2) | set(I3)))
    return _final_regression(y, d, X, SelectionSets((), I2, I3, union), level)


def _ridge_path_predict(Xtr, ytr, Xte, grid, center):
    if center:
        xm = Xtr.mean(axis=0)
        ym = ytr.mean()
    else:
        xm = np.zeros(Xtr.shape[1])
        ym = 0.0
    U, s, Vt = np.linalg.svd(Xtr - xm, full_matrices=False)
    keep = s > max(Xtr.shape) * 1e-12 * (s[0] if s.size else 0.0)
    U, s, Vt = U[:, keep], s[keep], Vt[keep]
    uty = U.T @ (ytr - ym)
    m = Xtr.shape[0]
    proj = (Xte - xm) @ Vt.T
    out = np.empty((len(grid), Xte.shape[0]))
    for k, kappa in enumerate(grid):
        if np.isinf(kappa):
            out[k] = ym
            continue
        shrink = s / (s**2 + kappa * m)
        out[k] = proj @ (shrink * uty) + ym
    return out


def _ridge_design(X):
    icpt = intercept_columns(X)
    keep = [j for j in range(X.shape[1]) if j not in set(icpt)]
    return X[:, keep], bool(icpt)


def ridge_cv_select(X, y, folds: int = 10, grid=DEFAULT_RIDGE_GRID,
                    stream: RngStream | None = None) -> tuple[float, NDArray[np.float64]]:
    """Cross-validated ridge penalty.

    The ridge problem is ``min ||y - X b||^2 + kappa * n * ||b||^2`` with
    any all-ones column left unpenalized (handled by centering). Folds are
    a random balanced partition drawn from ``stream``. Returns the grid
    value with the smallest out-of-fold squared error (first one on ties)
    and the error for every grid value.
    """
    X = as_matrix(X)
    y = as_vector(y)
    grid = [float(g) for g in grid]
    if folds < 2:
        raise ArgumentError("folds must be >= 2")
    if not grid or any(g < 0 for g in grid):
        raise ArgumentError("grid must be a non-empty list of non-negative penalties")
    n = X.shape[0]
    if folds > n:
        raise ArgumentError(f"cannot split {n} observations into {folds} folds")
    stream = stream or RngStream(0)
    fold_id = np.empty(n, dtype=np.intp)
    fold_id[stream.permutation(n)] = np.arange(n) % folds
    Xr, center = _ridge_design(X)
    errors = np.zeros(len(grid))
    for f in range(folds):
        te = fold_id == f
        pred = _ridge_path_predict(Xr[~te], y[~te], Xr[te], grid, center)
        errors += np.sum((pred - y[te]) ** 2, axis=1)
    return grid[int(np.argmin(errors))], errors / n


def ridge_cv_fit(X, y, folds: int = 10, grid=DEFAULT_RIDGE_GRID,
                 stream: RngStream | None = None) -> NDArray[np.float64]:
    """In-sample ridge fitted values at the cross-validated penalty."""
    X = as_matrix(X)
    y = as_vector(y)
    kappa, _ = ridge_cv_select(X, y, folds, grid, stream)
    Xr, center = _ridge_design(X)
    return _ridge_path_predict(Xr, y, Xr, [kappa], center)[0]


def post_double_selection_ridge(y, d, X, amelioration=(), config: PenaltyConfig | None = None,
                                level: float = 0.95, folds: int = 10, grid=DEFAULT_RIDGE_GRID,
                                stream: RngStream | None = None) -> TreatmentEffectEstimate:
    """Post-double-selection with the ridge fit of ``d`` on ``X`` as one more candidate control.

    The ridge column is appended as the last column of the design and can
    be selected like any other; ``beta_hat`` and the selection sets refer
    to the augmented design.
    """
    y, d, X = _prepare(y, d, X, level)
    ridge = ridge_cv_fit(X, d, folds, grid, stream)
    return post_double_selection(y, d, np.column_stack([X, ridge]), amelioration, config, level)
