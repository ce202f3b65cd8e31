"""Acceptance criteria, one test per criterion.

Each test attaches its measured quantities as a ``detail`` property; the
terminal summary prints one PASS/FAIL line per criterion.
"""
import json
import time

import jsonschema
import mpmath
import numpy as np
import pytest

from conftest import orthonormal_design
from doubleselect import cli
from doubleselect.data import Dataset
from doubleselect.diagnostics import ks_distance_to_normal, sparse_eigenvalues
from doubleselect.lasso import LassoProblem, kkt_residual, solve
from doubleselect.numerics import RngStream
from doubleselect.penalty import PenaltyConfig, estimate_loadings, lasso_lambda, sqrt_lasso_lambda
from doubleselect.selection import post_double_selection
from doubleselect.simulation import FULL_GRID, DesignSpec, generate_replication, run_point

pytestmark = pytest.mark.slow

SEED = 1


def studentized_ks(summary):
    return ks_distance_to_normal(summary.studentized(0.5))


@pytest.fixture(scope="module")
def design1_mid():
    spec = DesignSpec(1, r2_y=0.5, r2_d=0.5, seed=SEED)
    return run_point(spec, 2000, ("post-lasso", "double-selection"))


@pytest.fixture(scope="module")
def design1_high():
    spec = DesignSpec(1, r2_y=0.8, r2_d=0.8, seed=SEED)
    return run_point(spec, 2000, ("post-lasso", "double-selection"))


def test_criterion_01_solver_optimality(record_property):
    rng = np.random.default_rng(SEED)
    start = time.perf_counter()
    worst, converged = 0.0, 0
    for k in range(500):
        n, p = int(rng.integers(5, 51)), int(rng.integers(1, 21))
        X = rng.standard_normal((n, p)) * rng.uniform(0.2, 3.0, p)
        y = X[:, : min(3, p)] @ rng.standard_normal(min(3, p)) + rng.standard_normal(n)
        loadings = rng.uniform(0.5, 2.0, p)
        score = np.abs(X.T @ y / n) / loadings
        kind = "lasso" if k % 2 == 0 else "sqrt-lasso"
        top = 2 * n * score.max() if kind == "lasso" else n * score.max() / np.sqrt(np.mean(y**2))
        problem = LassoProblem(X, y, float(rng.uniform(0.01, 1.2) * top), loadings, kind)
        fit = solve(problem)
        if fit.converged:
            converged += 1
            worst = max(worst, kkt_residual(problem, fit.beta))
    soft_err = 0.0
    for _ in range(200):
        p = int(rng.integers(1, 21))
        n = int(rng.integers(p + 2, 51))
        Z = orthonormal_design(rng, n, p + 1)
        X = Z[:, :p]
        y = X @ rng.standard_normal(p) + Z[:, p]
        loadings = rng.uniform(0.5, 2.0, p)
        lam = float(rng.uniform(0.0, 2.0) * n)
        fit = solve(LassoProblem(X, y, lam, loadings))
        z = X.T @ y / n
        thr = lam * loadings / (2 * n)
        exact = np.sign(z) * np.maximum(np.abs(z) - thr, 0.0)
        soft_err = max(soft_err, float(np.max(np.abs(fit.beta - exact))))
    elapsed = time.perf_counter() - start
    record_property("detail", f"converged={converged}/500 max_kkt={worst:.2e} "
                              f"soft_threshold_err={soft_err:.2e} time={elapsed:.1f}s")
    assert worst <= 1e-7
    assert soft_err <= 1e-8
    assert elapsed < 30


def test_criterion_02_penalty_formulas(record_property):
    mpmath.mp.dps = 40
    q = mpmath.sqrt(2) * mpmath.erfinv(2 * mpmath.mpf("0.999875") - 1)
    oracle = float(22 * q)
    got = lasso_lambda(100, 200, 1.1, 0.05)
    rng = np.random.default_rng(SEED)
    halves = all(
        sqrt_lasso_lambda(n, p, c, g) == lasso_lambda(n, p, c, g) / 2
        for n, p, c, g in zip(rng.integers(2, 10**6, 200), rng.integers(1, 10**5, 200),
                              rng.uniform(1.01, 3, 200), rng.uniform(1e-4, 0.5, 200))
    )
    record_property("detail", f"lasso_lambda={got:.6f} oracle={oracle:.6f} exact_half={halves}")
    assert abs(got - oracle) <= 1e-2
    assert halves


def test_criterion_03_loading_convergence(record_property):
    configs = [PenaltyConfig(), PenaltyConfig(selector="sqrt-lasso-iterated")]
    runs = by_cap = 0
    for r2_y, r2_d in FULL_GRID:
        spec = DesignSpec(1, r2_y=r2_y, r2_d=r2_d, seed=SEED)
        for rep in range(50):
            draw = generate_replication(spec, RngStream(SEED, rep))
            X = np.column_stack([np.ones(spec.n), draw.X])
            for config in configs:
                for target in (draw.y, draw.d):
                    est = estimate_loadings(X, target, config)
                    runs += 1
                    by_cap += not est.converged
    rate = 1 - by_cap / runs
    record_property("detail", f"converged={runs - by_cap}/{runs} ({rate:.4f})")
    assert rate >= 0.99


def test_criterion_04_double_selection_normality(design1_mid, record_property):
    ds = design1_mid.estimators["double-selection"]
    ks = studentized_ks(ds)
    record_property("detail", f"ks={ks:.4f} rejection={ds.rejection_rate:.4f} "
                              f"exclusions={ds.exclusions}")
    assert ks <= 0.07
    assert 0.03 <= ds.rejection_rate <= 0.08


def test_criterion_05_post_single_failure(design1_mid, design1_high, record_property):
    pl_hi = design1_high.estimators["post-lasso"].rejection_rate
    ds_hi = design1_high.estimators["double-selection"].rejection_rate
    ks_pl = studentized_ks(design1_mid.estimators["post-lasso"])
    ks_ds = studentized_ks(design1_mid.estimators["double-selection"])
    record_property("detail", f"rej(0.8,0.8) post-lasso={pl_hi:.4f} ds={ds_hi:.4f}; "
                              f"ks(0.5,0.5) post-lasso={ks_pl:.4f} ds={ks_ds:.4f}")
    assert pl_hi >= 2 * ds_hi
    assert ks_pl > ks_ds


def test_criterion_06_oracle_benchmark(record_property):
    parts, ok = [], True
    for r2_y, r2_d in [(0.0, 0.2), (0.0, 0.8), (0.8, 0.2), (0.8, 0.8)]:
        rep = run_point(DesignSpec(1, r2_y=r2_y, r2_d=r2_d, seed=SEED), 1000,
                        ("ds-oracle", "double-selection"))
        ratio = rep.estimators["double-selection"].rmse / rep.estimators["ds-oracle"].rmse
        parts.append(f"({r2_y},{r2_d}) ratio={ratio:.3f}")
        ok &= ratio <= 1.5
    record_property("detail", "; ".join(parts))
    assert ok


def test_criterion_07_heteroscedastic_design(record_property):
    rep = run_point(DesignSpec(2, r2_y=0.5, r2_d=0.5, seed=SEED), 2000, ("double-selection",))
    ds = rep.estimators["double-selection"]
    ks = studentized_ks(ds)
    record_property("detail", f"ks={ks:.4f} rejection={ds.rejection_rate:.4f} "
                              f"exclusions={ds.exclusions}")
    assert ks <= 0.07
    assert 0.02 <= ds.rejection_rate <= 0.10


def test_criterion_08_ridge_augmentation(record_property):
    est = ("double-selection", "double-selection-ridge")
    high = run_point(DesignSpec(3, r2_y=0.8, r2_d=0.8, seed=SEED), 500, est)
    zero = run_point(DesignSpec(3, r2_y=0.8, r2_d=0.0, seed=SEED), 500, est)
    rej_ds = high.estimators["double-selection"].rejection_rate
    rej_r = high.estimators["double-selection-ridge"].rejection_rate
    rmse_ds = zero.estimators["double-selection"].rmse
    rmse_r = zero.estimators["double-selection-ridge"].rmse
    record_property("detail", f"rej(0.8,0.8) ridge={rej_r:.4f} ds={rej_ds:.4f}; "
                              f"rmse(0.8,0) ridge={rmse_r:.4f} ds={rmse_ds:.4f}")
    assert rej_r <= rej_ds + 0.01
    assert rmse_r > rmse_ds


def test_criterion_09_plugin_variance(record_property):
    spec = DesignSpec(1, n=10_000, p=20, seed=SEED)
    alphas, ses = [], []
    for rep in range(200):
        draw = generate_replication(spec, RngStream(SEED, rep))
        X = np.column_stack([np.ones(spec.n), draw.X])
        e = post_double_selection(draw.y, draw.d, X)
        alphas.append(e.alpha_hat)
        ses.append(e.se_plugin)
    sd = float(np.std(alphas, ddof=1))
    mean_se = float(np.mean(ses))
    record_property("detail", f"mean_se_plugin={mean_se:.5f} empirical_sd={sd:.5f} "
                              f"ratio={mean_se / sd:.3f}")
    assert abs(mean_se / sd - 1) <= 0.15


def test_criterion_10_sparse_eigenvalues(record_property):
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for k in range(100):
        p = int(rng.integers(1, 11))
        rank = int(rng.integers(1, p + 4))
        A = rng.standard_normal((rank, p))
        M = A.T @ A / rank
        r = sparse_eigenvalues(M, p)
        w = np.linalg.eigvalsh(M)
        worst = max(worst, abs(r.phi_min - w[0]), abs(r.phi_max - w[-1]))
    record_property("detail", f"max_abs_diff={worst:.2e}")
    assert worst <= 1e-10


def test_criterion_11_cli_coverage(tmp_path, record_property):
    schema = cli.load_schema("estimation_report")
    spec = DesignSpec(1, r2_y=0.5, r2_d=0.5, seed=SEED)
    names = [f"x{j + 1}" for j in range(spec.p)]
    covered = valid = identical = 0
    for rep in range(200):
        draw = generate_replication(spec, RngStream(SEED, rep))
        data = tmp_path / f"data{rep}.csv"
        Dataset("y", "d", names, [], np.column_stack([draw.y, draw.d, draw.X])).to_csv(data)
        outputs = []
        for k in range(2):
            out = tmp_path / f"report{rep}_{k}.json"
            code = cli.main(["fit", "--data", str(data), "--outcome", "y", "--treatment", "d",
                             "--controls-all-others", "--seed", str(rep), "--out", str(out)])
            assert code == 0
            outputs.append(out.read_bytes())
        identical += outputs[0] == outputs[1]
        report = json.loads(outputs[0])
        try:
            jsonschema.validate(report, schema)
            valid += 1
        except jsonschema.ValidationError:
            pass
        lo, hi = report["ci_plugin"]
        covered += lo <= 0.5 <= hi
    coverage = covered / 200
    record_property("detail", f"coverage={coverage:.3f} schema_valid={valid}/200 "
                              f"byte_identical={identical}/200")
    assert 0.88 <= coverage <= 0.99
    assert valid == 200 and identical == 200
