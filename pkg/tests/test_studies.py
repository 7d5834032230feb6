import dataclasses
import math

import numpy as np
import pytest

from benfordlab import (
    DomainError,
    PowerStudyConfig,
    power_study,
    qdelta_conditional,
    qq_pairs,
    sample_benford,
    sample_manipulated,
    ManipulationModel,
    substream,
)


def small_config(**overrides):
    base = dict(
        scenarios=[{"model": "manipulated", "family": "lognormal", "alpha": 0.3}],
        n=120,
        runs=80,
        gamma=0.05,
        B=2000,
        seed=1234,
        statistics=["ks2", "qdelta", "gks"],
    )
    base.update(overrides)
    return PowerStudyConfig.from_dict(base)


class TestPowerStudy:
    def test_rows_and_determinism(self):
        a = power_study(small_config())
        b = power_study(small_config())
        assert [dataclasses.astuple(r) for r in a.rows] == [dataclasses.astuple(r) for r in b.rows]
        assert {r.statistic for r in a.rows} == {"ks2", "qdelta", "gks"}
        assert all(0.0 <= r.rate <= 1.0 for r in a.rows)
        assert all(r.rejections == round(r.rate * r.runs) for r in a.rows)

    def test_alpha_grid_expands(self):
        cfg = small_config(scenarios=[{"model": "manipulated", "family": "lognormal",
                                       "alpha": [0.3, 0.5]}], statistics=["ks2"])
        report = power_study(cfg)
        assert [r.scenario for r in report.rows] == ["manipulated:lognormal:0.3",
                                                     "manipulated:lognormal:0.5"]

    def test_benford_scenario_has_nominal_size(self):
        cfg = small_config(scenarios=[{"model": "benford"}], runs=400,
                           statistics=["ks2"], gamma=0.10)
        rate = power_study(cfg).rows[0].rate
        assert rate == pytest.approx(0.10, abs=0.06)

    def test_manipulated_detected(self):
        # strong fabrication signal: near-degenerate fractional part
        cfg = small_config(scenarios=[{"model": "manipulated", "family": "lognormal",
                                       "alpha": 0.15}], n=200, runs=60,
                          statistics=["ks2", "q1"])
        rows = {r.statistic: r.rate for r in power_study(cfg).rows}
        assert rows["ks2"] > 0.9
        assert rows["q1"] < 0.15

    def test_discretization_matched_null(self):
        cfg = small_config(scenarios=[{"model": "benford"}], runs=300, n=150,
                           statistics=["ks2"], gamma=0.05,
                           discretization={"k": 2, "mode": "truncate"},
                           null="matched")
        rate = power_study(cfg).rows[0].rate
        assert rate < 0.12  # size is controlled under the matched null

    def test_config_validation(self):
        with pytest.raises(DomainError):
            PowerStudyConfig.from_dict({"n": 10})
        with pytest.raises(DomainError):
            PowerStudyConfig.from_dict(dict(small_config().__dict__, bogus=1))
        with pytest.raises(DomainError):
            power_study(small_config(null="sideways"))


class TestQqPairs:
    def test_benford_data_near_diagonal(self):
        from benfordlab import frac_cdf

        n = 400
        s = sample_benford(n, substream(41, 0))
        emp, ref = qq_pairs(s - np.floor(s), n, B=400, seed=99)
        gap = np.max(np.abs(frac_cdf(np.clip(emp, 0, 1 - 1e-12))
                            - frac_cdf(np.clip(ref, 0, 1 - 1e-12))))
        assert gap < 1.628 / math.sqrt(n)

    def test_fabricated_data_departs(self):
        n = 400
        s = sample_manipulated(n, ManipulationModel("lognormal", 0.2), substream(42, 0))
        emp, ref = qq_pairs(s - np.floor(s), n, B=400, seed=99)
        assert np.max(np.abs(emp - ref)) > 0.1

    def test_size_mismatch(self):
        with pytest.raises(DomainError):
            qq_pairs(np.array([0.1, 0.2]), 3, B=10, seed=1)


class TestQdeltaConditional:
    def test_threshold_required_and_filtering(self):
        full, cond = qdelta_conditional(100, 2000, seed=17, q1_threshold=6.635)
        assert len(full) == 2000
        assert 0 < len(cond) < 2000
        # conditioning on the first-digit outcome barely moves the upper tail
        q_full = np.quantile(full, 0.95)
        q_cond = np.quantile(cond, 0.95)
        assert q_cond == pytest.approx(q_full, abs=0.8)
