import numpy as np
import pytest

from doubleselect.errors import ArgumentError
from doubleselect.numerics import RngStream, toeplitz_correlation
from doubleselect.simulation import (
    ESTIMATORS,
    FULL_GRID,
    DesignSpec,
    ReplicationDraw,
    decay_vector,
    design_constants,
    ds_oracle_estimate,
    generate_replication,
    oracle_estimate,
    run_grid,
    run_point,
    studentized_samples,
)


def ar1_rows(rng, n, p, rho):
    # AR(1) recursion, independent of the Cholesky route used by the library
    X = np.empty((n, p))
    X[:, 0] = rng.standard_normal(n)
    s = np.sqrt(1 - rho**2)
    for j in range(1, p):
        X[:, j] = rho * X[:, j - 1] + s * rng.standard_normal(n)
    return X


class TestDesignConstants:
    def test_zero_targets(self):
        assert design_constants(DesignSpec(r2_d=0.0, r2_y=0.3))[1] == 0.0
        assert design_constants(DesignSpec(r2_y=0.0, r2_d=0.0)) == (0.0, 0.0)

    def test_population_identity(self):
        spec = DesignSpec(r2_y=0.6, r2_d=0.4)
        c_y, c_d = design_constants(spec)
        b = decay_vector(1, spec.p)
        q = b @ toeplitz_correlation(spec.p, spec.rho) @ b
        assert c_d**2 * q / (c_d**2 * q + 1) == pytest.approx(0.4, rel=1e-12)
        lead = (0.5 * c_d + c_y) ** 2 * q
        assert lead / (lead + 1.25) == pytest.approx(0.6, rel=1e-12)

    @pytest.mark.slow
    @pytest.mark.parametrize("r2_y,r2_d", [(0.2, 0.8), (0.8, 0.2), (0.8, 0.8), (0.4, 0.6), (0.6, 0.0)])
    def test_empirical_r2(self, r2_y, r2_d):
        spec = DesignSpec(r2_y=r2_y, r2_d=r2_d)
        c_y, c_d = design_constants(spec)
        b = decay_vector(1, spec.p)
        rng = np.random.default_rng(11)
        sig_d = sig_y = tot_d = tot_y = 0.0
        for _ in range(10):
            X = ar1_rows(rng, 20_000, spec.p, spec.rho)
            v, z = rng.standard_normal((2, 20_000))
            md = X @ (c_d * b)
            my = X @ ((0.5 * c_d + c_y) * b)
            d = md + v
            y = my + 0.5 * v + z
            sig_d += np.sum((md - md.mean()) ** 2)
            tot_d += np.sum((d - d.mean()) ** 2)
            sig_y += np.sum((my - my.mean()) ** 2)
            tot_y += np.sum((y - y.mean()) ** 2)
        assert sig_d / tot_d == pytest.approx(r2_d, abs=0.02)
        assert sig_y / tot_y == pytest.approx(r2_y, abs=0.02)

    def test_spec_validation(self):
        with pytest.raises(ArgumentError):
            DesignSpec(design=4)
        with pytest.raises(ArgumentError):
            DesignSpec(r2_y=1.0)
        with pytest.raises(ArgumentError):
            DesignSpec(n=1)

    def test_decay_vector(self):
        np.testing.assert_allclose(decay_vector(1, 4), [1, 0.25, 1 / 9, 1 / 16])
        assert np.count_nonzero(decay_vector(3, 50)) == 5


class TestGenerateReplication:
    def test_zero_constants(self):
        spec = DesignSpec(n=30, p=10)
        draw = generate_replication(spec, RngStream(1))
        s = RngStream(1)
        s.standard_normal((30, 10))
        v = s.standard_normal(30)
        zeta = s.standard_normal(30)
        np.testing.assert_array_equal(draw.d, v)
        np.testing.assert_array_equal(draw.y, 0.5 * v + zeta)

    def test_shapes_and_reproducibility(self):
        spec = DesignSpec(design=3, n=20, p=40, r2_y=0.4, r2_d=0.4)
        a = generate_replication(spec, RngStream(7, 3))
        b = generate_replication(spec, RngStream(7, 3))
        assert a.X.shape == (20, 40) and a.theta_g.shape == (40,)
        assert a.checksum() == b.checksum()
        assert a.checksum() != generate_replication(spec, RngStream(7, 4)).checksum()

    def test_design2_self_normalized(self):
        for rep in range(5):
            kw = dict(n=50, p=30, r2_y=0.4, r2_d=0.6)
            d1 = generate_replication(DesignSpec(1, **kw), RngStream(3, rep))
            d2 = generate_replication(DesignSpec(2, **kw), RngStream(3, rep))
            np.testing.assert_array_equal(d1.X, d2.X)
            ratio = (d2.d - d2.X @ d2.theta_m) / (d1.d - d1.X @ d1.theta_m)
            assert np.mean(ratio**2) == pytest.approx(1.0, abs=1e-10)

    def test_design3_fresh_tail(self):
        spec = DesignSpec(design=3, n=20, p=40, r2_y=0.4, r2_d=0.4)
        a = generate_replication(spec, RngStream(7, 0))
        b = generate_replication(spec, RngStream(7, 1))
        np.testing.assert_array_equal(a.theta_m[:5], b.theta_m[:5])
        assert not np.array_equal(a.theta_m[5:], b.theta_m[5:])
        assert np.all(a.theta_m[5:] != 0)

    def test_design3_tail_95(self):
        spec = DesignSpec(design=3, n=20, p=200, r2_y=0.4, r2_d=0.4, random_tail="95")
        draw = generate_replication(spec, RngStream(2))
        assert np.all(draw.theta_g[100:] == 0) and np.all(draw.theta_g[5:100] != 0)

    def test_design3_without_tail_matches_truncated_design1(self):
        kw = dict(n=50_000, r2_y=0.6, r2_d=0.6)
        d3 = generate_replication(DesignSpec(3, p=200, **kw), RngStream(4))
        tail_y = d3.X[:, 5:] @ d3.theta_g[5:]
        tail_d = d3.X[:, 5:] @ d3.theta_m[5:]
        y3 = d3.y - tail_y - 0.5 * tail_d
        d1 = generate_replication(DesignSpec(1, p=5, **kw), RngStream(5))
        assert y3.mean() == pytest.approx(d1.y.mean(), abs=0.02)
        assert y3.var() == pytest.approx(d1.y.var(), rel=0.02)
        c_y, c_d = design_constants(DesignSpec(1, p=5, **kw))
        b = decay_vector(1, 5)
        var = (0.5 * c_d + c_y) ** 2 * (b @ toeplitz_correlation(5, 0.5) @ b) + 1.25
        assert y3.var() == pytest.approx(var, rel=0.02)


class TestOracles:
    def test_oracle_exact_without_noise(self, rng):
        X = rng.standard_normal((40, 6))
        th = rng.standard_normal(6)
        d = X @ th + rng.standard_normal(40)
        draw = ReplicationDraw(0.5 * d + X @ th, d, X, th, th)
        assert oracle_estimate(draw)[0] == pytest.approx(0.5, abs=1e-12)

    def test_ds_oracle_exact_without_noise(self, rng):
        X = rng.standard_normal((40, 6))
        th = rng.standard_normal(6)
        d = rng.standard_normal(40)
        draw = ReplicationDraw(0.5 * d + X @ th, d, X, th, np.zeros(6))
        assert ds_oracle_estimate(draw)[0] == pytest.approx(0.5, abs=1e-12)

    def test_definition_invariance(self, rng):
        X = rng.standard_normal((40, 6))
        th = rng.standard_normal(6)
        d = rng.standard_normal(40)
        y = 0.5 * d + rng.standard_normal(40)
        a = ReplicationDraw(y, d, X, np.zeros(6), np.zeros(6))
        b = ReplicationDraw(y + X @ th, d, X, th, np.zeros(6))
        assert oracle_estimate(a) == pytest.approx(oracle_estimate(b), abs=1e-12)
        assert ds_oracle_estimate(a) == pytest.approx(ds_oracle_estimate(b), abs=1e-12)

    def test_clt_bound(self):
        draw = generate_replication(DesignSpec(n=10_000, p=20), RngStream(6))
        for fn in (oracle_estimate, ds_oracle_estimate):
            alpha, se = fn(draw)
            assert abs(alpha - 0.5) <= 3 / np.sqrt(10_000)
            assert se == pytest.approx(0.01, rel=0.1)


class TestRunGrid:
    def test_single_replication(self):
        (rep,) = run_grid(1, [(0.5, 0.5)], reps=1, seed=3, n=60, p=40)
        for s in rep.estimators.values():
            assert s.std == 0.0
            assert s.bias == pytest.approx(s.estimates[0] - 0.5)
            assert s.rejection_rate in (0.0, 1.0)

    def test_determinism(self):
        kw = dict(reps=4, seed=9, n=60, p=40)
        a = run_grid(1, [(0.2, 0.6)], **kw)[0]
        b = run_grid(1, [(0.2, 0.6)], **kw)[0]
        assert a.to_dict() == b.to_dict()
        for name in ESTIMATORS:
            np.testing.assert_array_equal(a.estimators[name].estimates, b.estimators[name].estimates)

    def test_parallel_matches_serial(self):
        spec = DesignSpec(n=60, p=40, r2_y=0.4, r2_d=0.4, seed=2)
        est = ("ds-oracle", "double-selection")
        a = run_point(spec, 4, est)
        b = run_point(spec, 4, est, n_jobs=2)
        assert a.to_dict() == b.to_dict()

    def test_common_random_numbers(self):
        spec = DesignSpec(n=60, p=40, r2_y=0.4, r2_d=0.4, seed=2)
        a = run_point(spec, 3, ("oracle",))
        b = run_point(spec, 3, ("post-lasso", "double-selection"))
        assert a.checksums == b.checksums
        assert len(set(a.checksums)) == 3

    def test_rmse_identity_and_ranges(self):
        for rep in run_grid(2, [(0.0, 0.8), (0.6, 0.2)], reps=8, seed=1, n=60, p=40):
            for s in rep.estimators.values():
                assert s.rmse**2 == pytest.approx(s.bias**2 + s.std**2, abs=1e-10)
                assert 0.0 <= s.rejection_rate <= 1.0
                assert s.successes + s.exclusions == 8

    def test_exclusions_are_counted(self):
        # n - 1 controls plus intercept leave nothing for a residual
        spec = DesignSpec(n=12, p=11, r2_y=0.0, r2_d=0.0, seed=0)
        rep = run_point(spec, 2, ("oracle", "double-selection"))
        assert rep.estimators["oracle"].successes == 2
        s = rep.estimators["double-selection"]
        assert s.successes + s.exclusions == 2

    def test_unknown_estimator(self):
        with pytest.raises(ArgumentError):
            run_point(DesignSpec(), 1, ("lasso",))
        with pytest.raises(ArgumentError):
            run_point(DesignSpec(), 0)

    def test_grid_constant(self):
        assert len(FULL_GRID) == 25 and (0.8, 0.8) in FULL_GRID

    def test_report_dict(self):
        rep = run_point(DesignSpec(n=40, p=20), 2, ("oracle",))
        out = rep.to_dict()
        assert out["schema_version"] == 1 and out["se_method"] == "jackknife-hc3"
        assert set(out["estimators"]["oracle"]) == {
            "rmse", "bias", "std", "rejection_rate", "successes", "exclusions"}

    @pytest.mark.slow
    def test_std_grows_with_first_stage(self):
        kw = dict(reps=300, seed=4, estimators=("ds-oracle",))
        lo, hi = run_grid(1, [(0.0, 0.0), (0.0, 0.8)], **kw)
        assert hi.estimators["ds-oracle"].std >= lo.estimators["ds-oracle"].std


class TestStudentized:
    def test_needs_reps(self):
        with pytest.raises(ArgumentError):
            studentized_samples(DesignSpec(), 50, "oracle")

    def test_ds_oracle_normal(self):
        t, ks = studentized_samples(DesignSpec(seed=12), 2000, "ds-oracle")
        assert t.shape == (2000,)
        assert ks <= 0.05
