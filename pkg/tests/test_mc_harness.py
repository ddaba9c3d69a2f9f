import io
import math
import warnings

import numpy as np
import pytest

from evtcvar import TailModel, sample
from evtcvar.asymptotics import cvar_pickands_av, pickands_reference_av, yun_av
from evtcvar.estimators import cvar_pickands_estimate, pickands_estimate
from evtcvar.exceptions import ConfigError
from evtcvar.mc_harness import (
    CSV_COLUMNS,
    SweepConfig,
    _m_scaled_variance,
    default_gamma_grid,
    resolve_workers,
    run_sweep,
    sweep_condition_report,
    top_exceedances,
)
from evtcvar.second_order import ConditionWarning, SecondOrderSpec

SMALL = dict(gamma_grid=(-0.5, 0.0, 0.3), n=2000, m=20, reps=600, master_seed=99)


def test_default_grid():
    g = default_gamma_grid()
    assert len(g) == 30 and g[0] == -1.0 and g[-1] == 0.45
    assert np.allclose(np.diff(g), 0.05)


class TestConfig:
    @pytest.mark.parametrize(
        "kwargs",
        [
            {"gamma_grid": (0.0, 0.5)},
            {"family": "normal"},
            {"reps": 1},
            {"n": 100, "m": 30},
            {"u": 1.0},
            {"master_seed": -1},
        ],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ConfigError):
            SweepConfig(**kwargs)

    def test_round_trip(self):
        c = SweepConfig(**SMALL)
        assert SweepConfig.from_dict(c.to_dict()) == c

    def test_unknown_key(self):
        with pytest.raises(ConfigError):
            SweepConfig.from_dict({"gamma": 1})

    def test_workers(self, monkeypatch):
        monkeypatch.delenv("EVTCVAR_WORKERS", raising=False)
        assert resolve_workers(3) == 3
        assert resolve_workers("auto") >= 1
        with pytest.raises(ConfigError):
            resolve_workers(0)
        with pytest.raises(ConfigError):
            resolve_workers("many")
        monkeypatch.setenv("EVTCVAR_WORKERS", "2")
        assert resolve_workers(7) == 2


class TestSweep:
    def test_rows_and_columns(self):
        res = run_sweep(SweepConfig(**SMALL))
        assert [r.gamma for r in res.rows] == [-0.5, 0.0, 0.3]
        for r in res.rows:
            assert r.ratio_asym == r.av_cvar / r.av_pickands
            assert r.ratio_sim == r.var_sim_cvar / r.var_sim_pickands
            assert r.av_cvar == cvar_pickands_av(r.gamma)
            assert r.av_pickands == pickands_reference_av(r.gamma)
        lines = res.to_csv().splitlines()
        assert lines[0] == "# schema=evtcvar.v1"
        assert lines[1] == ",".join(CSV_COLUMNS)
        assert len(lines) == 5

    def test_rows_sorted(self):
        res = run_sweep(SweepConfig(**{**SMALL, "gamma_grid": (0.3, -0.5)}))
        assert [r.gamma for r in res.rows] == [-0.5, 0.3]

    def test_byte_identical(self):
        a = run_sweep(SweepConfig(**SMALL)).to_csv()
        b = run_sweep(SweepConfig(**SMALL)).to_csv()
        assert a == b

    def test_worker_count_invariant(self, monkeypatch):
        monkeypatch.delenv("EVTCVAR_WORKERS", raising=False)
        one = run_sweep(SweepConfig(**{**SMALL, "workers": 1}))
        many = run_sweep(SweepConfig(**{**SMALL, "workers": 3}))
        assert one.to_csv() == many.to_csv()
        assert one.checksums == many.checksums

    def test_estimates_match_sample_api(self):
        # replication r of the sweep is stream r of the sample API
        cfg = SweepConfig(**{**SMALL, "keep_estimates": True, "family": "gev"})
        res = run_sweep(cfg)
        for r in (0, 1, 599):
            x = sample(TailModel("gev", 0.3), cfg.n, cfg.master_seed, r).values
            assert res.estimates[0.3]["cvar"][r] == cvar_pickands_estimate(x, cfg.m)
            assert res.estimates[0.3]["pickands"][r] == pickands_estimate(x, cfg.m)

    def test_independent_cells_differ(self):
        crn = run_sweep(SweepConfig(**{**SMALL, "keep_estimates": True}))
        ind = run_sweep(SweepConfig(**{**SMALL, "keep_estimates": True, "common_random_numbers": False}))
        assert not np.array_equal(crn.estimates[0.0]["cvar"], ind.estimates[0.0]["cvar"])

    def test_general_spacing_uses_yun_variance(self):
        res = run_sweep(SweepConfig(**{**SMALL, "u": 3.0, "v": 1.5}))
        assert res.rows[0].av_pickands == yun_av(-0.5, 3.0, 1.5)

    def test_top_exceedances_are_smallest(self):
        from evtcvar.distributions import exceedance_uniforms, stream_id
        q = top_exceedances(5, 2, 300, 1000, 40)
        full = np.sort(exceedance_uniforms(5, stream_id(2, 299), 1000))[:40]
        np.testing.assert_array_equal(q[299], full)

    def test_sidecar(self):
        res = run_sweep(SweepConfig(**SMALL))
        side = res.sidecar()
        assert side["schema"] == "evtcvar.v1"
        assert side["config"]["n"] == 2000 and side["flagged_gammas"] == []
        assert set(side["batch_checksums"]) == {"-0.5", "0.0", "0.3"}


def test_m_scaled_variance_excludes_degenerate():
    est = np.array([1.0, 2.0, 3.0, np.nan])
    var, se = _m_scaled_variance(est, np.array([False, False, False, True]), 10)
    assert var == pytest.approx(10.0, rel=1e-15)
    assert se == pytest.approx(10.0, rel=1e-15)
    assert math.isnan(_m_scaled_variance(est, np.array([True, True, True, False]), 10)[0])


class TestConditionReport:
    def test_exact_family(self):
        rep = sweep_condition_report(SweepConfig(**SMALL), SecondOrderSpec(-1.0, 1.0, 1.0))
        assert all(r["bias_bound"] == 0.0 and not r["warning"] for r in rep)

    def test_unit_rate(self):
        cfg = SweepConfig(gamma_grid=(-1.0, 0.0, 0.25), n=10_000, m=100, reps=2)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ConditionWarning)
            rep = sweep_condition_report(cfg, SecondOrderSpec(-1.0, 1.0, 0.0, a_coef=1.0))
        assert [r["condition2"] for r in rep] == pytest.approx([0.1] * 3, rel=1e-15)

    def test_large_statistic_warns(self):
        cfg = SweepConfig(gamma_grid=(0.0,), n=10_000, m=2500, reps=2)
        with pytest.warns(ConditionWarning):
            rep = sweep_condition_report(cfg, SecondOrderSpec(-0.25, 1.0, 0.0, a_coef=1.0))
        assert rep[0]["condition2"] == pytest.approx(35.36, abs=0.005)
        assert rep[0]["warning"]
