import math

import numpy as np
import pytest

from evtcvar import TailModel
from evtcvar.asymptotics import cov_kernel, covariance_matrix, limit_variance
from evtcvar.exceptions import DomainError
from evtcvar.process_lab import (
    ProcessGrid,
    ProcessPaths,
    _truncated_variance,
    empirical_cov,
    empirical_tilde_B,
    simulate_limit_process,
    three_way_covariance,
    truncation_epsilon,
)


class TestGrid:
    def test_orders(self):
        assert ProcessGrid((0.5, 1, 2, 4)).orders(100, 10_000) == [50, 100, 200, 400]

    def test_zero_order_rejected(self):
        with pytest.raises(DomainError):
            ProcessGrid((0.005, 1.0)).orders(100, 10_000)

    def test_beyond_n_rejected(self):
        with pytest.raises(DomainError):
            ProcessGrid((1.0, 200.0)).orders(100, 10_000)

    @pytest.mark.parametrize("bad", [(), (1.0, 1.0), (2.0, 1.0), (-1.0, 1.0), (0.0,), (math.inf,)])
    def test_invalid(self, bad):
        with pytest.raises(DomainError):
            ProcessGrid(bad)

    def test_paths_shape_checked(self):
        with pytest.raises(DomainError):
            ProcessPaths(np.zeros((3, 2)), ProcessGrid((1.0,)))


class TestEmpiricalCov:
    def test_constant_paths(self):
        c = empirical_cov(np.full((10, 3), 4.2))
        np.testing.assert_array_equal(c, np.zeros((3, 3)))

    def test_two_replications(self):
        # deviations from the mean are (-1, -2) and (1, 2); divisor 1
        c = empirical_cov(np.array([[1.0, 2.0], [3.0, 6.0]]))
        np.testing.assert_allclose(c, [[2.0, 4.0], [4.0, 8.0]], rtol=1e-15)

    def test_symmetric_psd(self):
        x = np.random.default_rng(0).standard_normal((50, 6)) @ np.random.default_rng(1).random((6, 6))
        c = empirical_cov(x)
        assert np.array_equal(c, c.T)
        assert np.linalg.eigvalsh(c).min() > -1e-10
        np.testing.assert_allclose(c, np.cov(x, rowvar=False), rtol=1e-12)

    def test_needs_two_rows(self):
        with pytest.raises(DomainError):
            empirical_cov(np.ones((1, 3)))


class TestTruncation:
    @pytest.mark.parametrize("gamma", [-1.0, -0.5, 0.0, 0.25, 0.45])
    def test_deficit(self, gamma):
        eps = truncation_epsilon(gamma, 0.5)
        ratio = _truncated_variance(eps, 0.5, gamma) / limit_variance(0.5, gamma)
        assert 0.999 - 1e-9 <= ratio < 1.0

    @pytest.mark.parametrize("gamma", [-1.0, 0.0, 0.3])
    def test_truncated_variance_at_zero_eps(self, gamma):
        assert _truncated_variance(1e-300, 2.0, gamma) == pytest.approx(limit_variance(2.0, gamma), rel=1e-12)


class TestLimitProcess:
    def test_gamma_rejected(self):
        with pytest.raises(DomainError):
            simulate_limit_process(0.5, ProcessGrid((1.0,)))
        with pytest.raises(DomainError):
            simulate_limit_process(0.0, ProcessGrid((1.0,)), steps=10)

    def test_deterministic(self):
        grid = ProcessGrid((1.0, 2.0))
        a = simulate_limit_process(0.1, grid, steps=1000, reps=300, seed=4)
        b = simulate_limit_process(0.1, grid, steps=1000, reps=300, seed=4)
        assert a.values.tobytes() == b.values.tobytes()

    @pytest.mark.slow
    def test_gamma_zero_examples(self):
        p = simulate_limit_process(0.0, ProcessGrid((1.0, 2.0)), steps=100_000, reps=10_000, seed=3)
        c = empirical_cov(p)
        assert c[0, 0] == pytest.approx(2.0, rel=0.05)
        assert c[0, 1] == pytest.approx(1.346574, rel=0.05)

    @pytest.mark.slow
    def test_gamma_minus_one_example(self):
        p = simulate_limit_process(-1.0, ProcessGrid((2.0,)), steps=100_000, reps=10_000, seed=3)
        assert empirical_cov(p)[0, 0] == pytest.approx(2.0 / 3.0, rel=0.05)

    @pytest.mark.slow
    def test_discretization_bias_small(self):
        # with 1e5 paths the sampling error per entry is about 0.7%
        grid = ProcessGrid((0.5, 1.0, 2.0, 4.0))
        c = empirical_cov(simulate_limit_process(-1.0, grid, reps=100_000, seed=7, cell=1))
        assert np.max(np.abs(c / covariance_matrix(grid.t_values, -1.0) - 1)) < 0.025

    def test_matches_kernel(self):
        grid = ProcessGrid((0.5, 1.0, 2.0, 4.0))
        c = empirical_cov(simulate_limit_process(0.0, grid, reps=10_000, seed=8))
        k = covariance_matrix(grid.t_values, 0.0)
        assert np.max(np.abs(c / k - 1)) < 0.05


class TestEmpiricalProcess:
    def test_exponential_mean_and_variance(self):
        p = empirical_tilde_B(TailModel("gpd", 0.0), 100_000, 100, ProcessGrid((1.0,)), 2000, 1)
        col = p.values[:, 0]
        se = col.std(ddof=1) / math.sqrt(len(col))
        assert abs(col.mean()) < 3 * se
        assert col.var(ddof=1) == pytest.approx(2.0, rel=0.15)

    def test_exponential_exact_finite_mean(self):
        # for the exponential law E[Y_k] = H_n - H_k + 1 exactly
        n, m = 100_000, 100
        h = lambda j: float(np.sum(1.0 / np.arange(1, j + 1)))
        shift = math.sqrt(m) * (h(n) - h(m) + 1 - (1 + math.log(n / m)))
        p = empirical_tilde_B(TailModel("gpd", 0.0), n, m, ProcessGrid((1.0,)), 2000, 5)
        col = p.values[:, 0]
        assert abs(col.mean() - shift) < 3 * col.std(ddof=1) / math.sqrt(len(col))

    def test_metadata_and_determinism(self):
        model = TailModel("gev", 0.2)
        grid = ProcessGrid((1.0, 2.0))
        a = empirical_tilde_B(model, 5000, 50, grid, 20, 9)
        b = empirical_tilde_B(model, 5000, 50, grid, 20, 9)
        assert a.values.tobytes() == b.values.tobytes()
        assert a.meta["gamma"] == 0.2 and a.values.shape == (20, 2)

    def test_gamma_rejected(self):
        with pytest.raises(DomainError):
            empirical_tilde_B(TailModel("gpd", 0.5), 1000, 10, ProcessGrid((1.0,)), 5, 0)


def test_three_way_rows():
    rows = three_way_covariance(
        TailModel("gpd", 0.0), 20_000, 50, ProcessGrid((1.0, 2.0)), 200, 2, limit_reps=200,
        steps=1000,
    )
    assert [(r["t1"], r["t2"]) for r in rows] == [(1.0, 1.0), (1.0, 2.0), (2.0, 2.0)]
    for r in rows:
        assert r["cov_kernel"] == cov_kernel(r["t1"], r["t2"], 0.0)
        assert r["relerr_limit"] == pytest.approx(r["cov_limit"] / r["cov_kernel"] - 1, rel=1e-12)
