"""Monte Carlo designs for the partially linear treatment model.

Every design draws ``x_i ~ N(0, Sigma)`` with ``Sigma[k, j] = rho**|k-j|``,

    d_i = x_i' theta_m + sigma_d(x_i) v_i
    y_i = alpha0 d_i + x_i' theta_g + sigma_y(d_i, x_i) zeta_i

with ``zeta, v`` independent standard normals. Design 1 is homoscedastic
with quadratically decaying coefficients, design 2 makes both errors
heteroscedastic, and design 3 keeps five decaying coefficients and draws
the rest as small independent Gaussians in every replication.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np
from numpy.typing import NDArray

from .diagnostics import ks_distance_to_normal
from .errors import ArgumentError, EstimationError
from .numerics import (
    RngStream,
    normal_quantile,
    ols_fit,
    sample_gaussian_matrix,
    toeplitz_correlation,
    toeplitz_correlation_factor,
)
from .penalty import PenaltyConfig
from .selection import (
    DEFAULT_RIDGE_GRID,
    jackknife_variance,
    post_double_selection,
    post_double_selection_ridge,
    post_single_selection,
)

__all__ = [
    "ESTIMATORS",
    "FULL_GRID",
    "DesignSpec",
    "EstimatorSummary",
    "ReplicationDraw",
    "SimulationReport",
    "decay_vector",
    "design_constants",
    "ds_oracle_estimate",
    "generate_replication",
    "oracle_estimate",
    "apply_estimator",
    "run_grid",
    "run_point",
    "studentized_samples",
]

ESTIMATORS = ("oracle", "ds-oracle", "post-lasso", "double-selection", "double-selection-ridge")
R2_LEVELS = (0.0, 0.2, 0.4, 0.6, 0.8)
FULL_GRID = tuple((ry, rd) for ry in R2_LEVELS for rd in R2_LEVELS)
DETERMINISTIC_HEAD = 5


@dataclass(frozen=True)
class DesignSpec:
    """One cell of the simulation study.

    ``random_tail`` only matters for design 3: ``"all"`` draws random
    coefficients for every index after the first five, ``"95"`` only for
    indices 6 through 100.
    """

    design: int = 1
    n: int = 100
    p: int = 200
    alpha0: float = 0.5
    rho: float = 0.5
    r2_y: float = 0.0
    r2_d: float = 0.0
    seed: int = 0
    random_tail: str = "all"

    def __post_init__(self):
        if self.design not in (1, 2, 3):
            raise ArgumentError(f"design must be 1, 2 or 3, got {self.design}")
        if self.n < 2 or self.p < 1:
            raise ArgumentError("need n >= 2 and p >= 1")
        for name in ("r2_y", "r2_d"):
            r2 = getattr(self, name)
            if not 0.0 <= r2 < 1.0:
                raise ArgumentError(f"{name} must lie in [0, 1), got {r2}")
        if not abs(self.rho) < 1:
            raise ArgumentError("|rho| must be < 1")
        if self.random_tail not in ("all", "95"):
            raise ArgumentError("random_tail must be 'all' or '95'")


@dataclass
class ReplicationDraw:
    y: NDArray[np.float64]
    d: NDArray[np.float64]
    X: NDArray[np.float64]
    theta_g: NDArray[np.float64]
    theta_m: NDArray[np.float64]

    def checksum(self) -> str:
        h = hashlib.sha256()
        for arr in (self.y, self.d, self.X, self.theta_g, self.theta_m):
            h.update(np.ascontiguousarray(arr).tobytes())
        return h.hexdigest()[:16]


def decay_vector(design: int, p: int) -> NDArray[np.float64]:
    """``(1/j)**2`` for ``j = 1..p``, truncated to five terms in design 3."""
    beta0 = 1.0 / np.arange(1, p + 1) ** 2
    if design == 3:
        beta0[DETERMINISTIC_HEAD:] = 0.0
    return beta0


@lru_cache(maxsize=16)
def _factor(p: int, rho: float) -> NDArray[np.float64]:
    return toeplitz_correlation_factor(p, rho)


@lru_cache(maxsize=256)
def _constants(design, p, rho, alpha0, r2_y, r2_d):
    beta0 = decay_vector(design, p)
    q = float(beta0 @ toeplitz_correlation(p, rho) @ beta0)
    c_d = np.sqrt(r2_d / ((1.0 - r2_d) * q))
    total = np.sqrt(r2_y * (alpha0**2 + 1.0) / ((1.0 - r2_y) * q))
    return float(total - alpha0 * c_d), float(c_d)


def design_constants(spec: DesignSpec) -> tuple[float, float]:
    """Coefficient scales ``(c_y, c_d)`` hitting the target reduced-form R^2s.

    With ``q = beta0' Sigma beta0`` and unit error variances,
    ``c_d = sqrt(r2_d / ((1 - r2_d) q))``. The reduced form of y has
    coefficient ``(alpha0 c_d + c_y) beta0`` and error variance
    ``alpha0^2 + 1``, so ``alpha0 c_d + c_y = sqrt(r2_y (alpha0^2 + 1) / ((1 - r2_y) q))``.
    Designs 2 and 3 use the same constants (computed as if homoscedastic,
    respectively as if the random coefficients were zero).
    """
    c_y, c_d = _constants(spec.design, spec.p, float(spec.rho), float(spec.alpha0),
                          float(spec.r2_y), float(spec.r2_d))
    if not (np.isfinite(c_y) and np.isfinite(c_d)):
        raise ArgumentError("R^2 targets give no real coefficient scale")
    return c_y, c_d


def generate_replication(spec: DesignSpec, stream: RngStream) -> ReplicationDraw:
    """Draw one sample of size ``spec.n`` from the design.

    Draw order from the stream: the ``n x p`` matrix of covariates, then (for
    design 3) the random tail coefficients, then ``v``, then ``zeta``.
    """
    n, p = spec.n, spec.p
    c_y, c_d = design_constants(spec)
    beta0 = decay_vector(spec.design, p)
    X = sample_gaussian_matrix(stream, _factor(p, float(spec.rho)), n)
    theta_g = c_y * beta0
    theta_m = c_d * beta0
    if spec.design == 3:
        stop = p if spec.random_tail == "all" else min(p, 100)
        m = max(stop - DETERMINISTIC_HEAD, 0)
        tail = stream.standard_normal((m, 2)) / np.sqrt(p)
        theta_g[DETERMINISTIC_HEAD:stop] = tail[:, 0]
        theta_m[DETERMINISTIC_HEAD:stop] = tail[:, 1]
    v = stream.standard_normal(n)
    zeta = stream.standard_normal(n)
    if spec.design == 2:
        base_d = (1.0 + X @ beta0) ** 2
        sigma_d = np.sqrt(base_d / np.mean(base_d))
    else:
        sigma_d = 1.0
    d = X @ theta_m + sigma_d * v
    if spec.design == 2:
        base_y = (1.0 + spec.alpha0 * d + X @ beta0) ** 2
        sigma_y = np.sqrt(base_y / np.mean(base_y))
    else:
        sigma_y = 1.0
    y = spec.alpha0 * d + X @ theta_g + sigma_y * zeta
    return ReplicationDraw(y, d, X, theta_g, theta_m)


def _simple_regression(target, regressor) -> tuple[float, float]:
    W = regressor[:, None]
    fit = ols_fit(W, target)
    se = np.sqrt(jackknife_variance(W, fit.residuals, 0))
    return float(fit.coefficients[0]), float(se)


def oracle_estimate(draw: ReplicationDraw) -> tuple[float, float]:
    """OLS of ``y - X theta_g`` on ``d`` with its HC3 standard error."""
    return _simple_regression(draw.y - draw.X @ draw.theta_g, draw.d)


def ds_oracle_estimate(draw: ReplicationDraw) -> tuple[float, float]:
    """OLS of ``y - X theta_g`` on ``d - X theta_m`` with its HC3 standard error."""
    return _simple_regression(draw.y - draw.X @ draw.theta_g, draw.d - draw.X @ draw.theta_m)


def _with_intercept(X):
    return np.column_stack([np.ones(X.shape[0]), X])


def apply_estimator(name: str, draw: ReplicationDraw, config: PenaltyConfig,
                    ridge_stream: RngStream | None = None) -> tuple[float, float]:
    """Run one named estimator on a draw; returns ``(alpha_hat, jackknife se)``.

    Feasible estimators receive the covariates plus an intercept column.
    """
    if name == "oracle":
        return oracle_estimate(draw)
    if name == "ds-oracle":
        return ds_oracle_estimate(draw)
    X = _with_intercept(draw.X)
    if name == "post-lasso":
        est = post_single_selection(draw.y, draw.d, X, config)
    elif name == "double-selection":
        est = post_double_selection(draw.y, draw.d, X, (), config)
    elif name == "double-selection-ridge":
        est = post_double_selection_ridge(draw.y, draw.d, X, (), config, grid=DEFAULT_RIDGE_GRID,
                                          stream=ridge_stream)
    else:
        raise ArgumentError(f"unknown estimator {name!r}; valid: {', '.join(ESTIMATORS)}")
    return est.alpha_hat, est.se_jackknife


@dataclass
class EstimatorSummary:
    rmse: float
    bias: float
    std: float
    rejection_rate: float
    successes: int
    exclusions: int
    estimates: NDArray[np.float64] = field(repr=False)
    std_errors: NDArray[np.float64] = field(repr=False)

    def studentized(self, alpha0: float) -> NDArray[np.float64]:
        ok = np.isfinite(self.estimates)
        return (self.estimates[ok] - alpha0) / self.std_errors[ok]


@dataclass
class SimulationReport:
    design: int
    r2_y: float
    r2_d: float
    seed: int
    reps: int
    n: int
    p: int
    alpha0: float
    estimators: dict[str, EstimatorSummary]
    checksums: tuple[str, ...] = field(repr=False, default=())

    def to_dict(self) -> dict:
        """JSON-ready summary (per-replication arrays omitted)."""
        return {
            "schema_version": 1,
            "design": self.design,
            "r2_y": self.r2_y,
            "r2_d": self.r2_d,
            "seed": self.seed,
            "reps": self.reps,
            "n": self.n,
            "p": self.p,
            "alpha0": self.alpha0,
            "se_method": "jackknife-hc3",
            "estimators": {
                name: {
                    "rmse": _json_float(s.rmse),
                    "bias": _json_float(s.bias),
                    "std": _json_float(s.std),
                    "rejection_rate": _json_float(s.rejection_rate),
                    "successes": s.successes,
                    "exclusions": s.exclusions,
                }
                for name, s in self.estimators.items()
            },
        }


def _json_float(x):
    return None if not np.isfinite(x) else float(x)


def _summarize(alphas, ses, alpha0, crit) -> EstimatorSummary:
    ok = np.isfinite(alphas)
    a = alphas[ok]
    if a.size == 0:
        nan = float("nan")
        return EstimatorSummary(nan, nan, nan, nan, 0, int(alphas.size), alphas, ses)
    err = a - alpha0
    bias = float(np.mean(err))
    std = float(np.std(a))
    rmse = float(np.sqrt(np.mean(err**2)))
    reject = float(np.mean(np.abs(err / ses[ok]) > crit))
    return EstimatorSummary(rmse, bias, std, reject, int(a.size), int(alphas.size - a.size), alphas, ses)


def _replicate(spec: DesignSpec, rep: int, estimators: Sequence[str], config: PenaltyConfig):
    draw = generate_replication(spec, RngStream(spec.seed, rep))
    out = []
    for name in estimators:
        try:
            out.append(apply_estimator(name, draw, config, RngStream(spec.seed, rep, substream=1)))
        except EstimationError:
            out.append((np.nan, np.nan))
    return draw.checksum(), out


def run_point(spec: DesignSpec, reps: int, estimators: Sequence[str] = ESTIMATORS,
              config: PenaltyConfig | None = None, n_jobs: int = 1) -> SimulationReport:
    """Monte Carlo at one design cell; replication ``r`` uses stream index ``r``.

    Every estimator sees the same draw within a replication. Replications
    whose estimation fails are excluded from that estimator's aggregates
    and counted in ``exclusions``.
    """
    if reps < 1:
        raise ArgumentError("reps must be >= 1")
    estimators = tuple(estimators)
    bad = [e for e in estimators if e not in ESTIMATORS]
    if bad:
        raise ArgumentError(f"unknown estimator(s) {bad}; valid: {', '.join(ESTIMATORS)}")
    config = config or PenaltyConfig()
    if n_jobs == 1:
        results = [_replicate(spec, r, estimators, config) for r in range(reps)]
    else:
        from joblib import Parallel, delayed

        results = Parallel(n_jobs=n_jobs)(
            delayed(_replicate)(spec, r, estimators, config) for r in range(reps)
        )
    crit = normal_quantile(0.975)
    table = np.array([row for _, row in results], dtype=np.float64).reshape(reps, len(estimators), 2)
    summaries = {
        name: _summarize(table[:, k, 0], table[:, k, 1], spec.alpha0, crit)
        for k, name in enumerate(estimators)
    }
    return SimulationReport(
        design=spec.design, r2_y=spec.r2_y, r2_d=spec.r2_d, seed=spec.seed, reps=reps,
        n=spec.n, p=spec.p, alpha0=spec.alpha0, estimators=summaries,
        checksums=tuple(c for c, _ in results),
    )


def run_grid(design: int, grid: Iterable[tuple[float, float]] = FULL_GRID, reps: int = 100,
             estimators: Sequence[str] = ESTIMATORS, seed: int = 0, *, n: int = 100, p: int = 200,
             alpha0: float = 0.5, rho: float = 0.5, random_tail: str = "all",
             config: PenaltyConfig | None = None, n_jobs: int = 1) -> list[SimulationReport]:
    """One :class:`SimulationReport` per ``(r2_y, r2_d)`` grid point.

    Tests of ``alpha = alpha0`` are two-sided at 5% with HC3 jackknife
    standard errors for every estimator.
    """
    reports = []
    for r2_y, r2_d in grid:
        spec = DesignSpec(design, n, p, alpha0, rho, float(r2_y), float(r2_d), seed, random_tail)
        reports.append(run_point(spec, reps, estimators, config, n_jobs))
    return reports


def studentized_samples(spec: DesignSpec, reps: int, estimator: str,
                        config: PenaltyConfig | None = None,
                        n_jobs: int = 1) -> tuple[NDArray[np.float64], float]:
    """Studentized ``(alpha_hat - alpha0) / se`` per replication and its KS distance to N(0, 1)."""
    if reps < 100:
        raise ArgumentError("studentized_samples needs reps >= 100")
    report = run_point(spec, reps, (estimator,), config, n_jobs)
    t = report.estimators[estimator].studentized(spec.alpha0)
    return t, ks_distance_to_normal(t)
