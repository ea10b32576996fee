from __future__ import annotations

import json
import math

import numpy as np
import pytest

from gevfit import DegenerateSampleError, InvalidParameterError, fisher_information
from gevfit.mc_harness import (
    CSV_COLUMNS,
    SimConfig,
    normality_diagnostics,
    run_replicate,
    run_simulation,
    standardize_errors,
    thread_count,
)

from helpers import validate_schema

SMALL = SimConfig((0.2, 0.0, 1.0), (60, 120), 100, 5)


@pytest.fixture(scope="module")
def small_report():
    return run_simulation(SMALL, threads=1)


class TestConfig:
    def test_round_trip(self):
        assert SimConfig.from_dict(SMALL.to_dict()) == SMALL

    @pytest.mark.parametrize(
        "change, field",
        [
            ({"theta0": [-0.5, 0, 1]}, "theta0"),
            ({"replicates": 99}, "replicates"),
            ({"n_grid": [3]}, "n_grid"),
            ({"n_grid": []}, "n_grid"),
            ({"seed": -1}, "seed"),
            ({"seed": 1.5}, "seed"),
            ({"ci_level": 1.0}, "ci_level"),
            ({"extra": 1}, "extra"),
        ],
    )
    def test_rejects_with_field_name(self, change, field):
        d = SMALL.to_dict() | change
        with pytest.raises(InvalidParameterError, match=f"^{field}"):
            SimConfig.from_dict(d)

    def test_missing_field(self):
        d = SMALL.to_dict()
        del d["seed"]
        with pytest.raises(InvalidParameterError, match="^seed"):
            SimConfig.from_dict(d)

    def test_schema(self):
        validate_schema(SMALL.to_dict(), "sim_config")


class TestThreads:
    def test_explicit(self, monkeypatch):
        monkeypatch.setenv("GEVFIT_THREADS", "4")
        assert thread_count(2) == 2

    def test_environment(self, monkeypatch):
        monkeypatch.setenv("GEVFIT_THREADS", "3")
        assert thread_count() == 3

    def test_default(self, monkeypatch):
        monkeypatch.delenv("GEVFIT_THREADS", raising=False)
        assert thread_count() == 1


class TestReplicate:
    def test_deterministic_row(self):
        info = fisher_information((0.2, 0, 1)).entries
        a = run_replicate(SMALL.theta0, 200, 3, 11, None, info, 1.96)
        b = run_replicate(SMALL.theta0, 200, 3, 11, None, info, 1.96)
        assert a == b and not a["failed"]

    def test_distinct_streams(self):
        info = fisher_information((0.2, 0, 1)).entries
        a = run_replicate(SMALL.theta0, 200, 3, 11, None, info, 1.96)
        b = run_replicate(SMALL.theta0, 200, 4, 11, None, info, 1.96)
        assert a["gamma_hat"] != b["gamma_hat"]


class TestSimulation:
    def test_shape(self, small_report):
        assert [s.n for s in small_report.sizes] == [60, 120]
        assert len(small_report.rows) == 200
        assert [(r["n"], r["r"]) for r in small_report.rows] == sorted((r["n"], r["r"]) for r in small_report.rows)

    def test_valid(self, small_report):
        assert small_report.valid
        assert all(s.failure_rate <= 0.05 for s in small_report.sizes)

    def test_deterministic_across_workers(self, small_report):
        other = run_simulation(SMALL, threads=3)
        assert other.to_json() == small_report.to_json()
        assert other.to_csv() == small_report.to_csv()

    def test_json_schema(self, small_report):
        validate_schema(json.loads(small_report.to_json()), "sim_report")

    def test_csv(self, small_report):
        lines = small_report.to_csv().splitlines()
        assert lines[0] == ",".join(CSV_COLUMNS)
        assert len(lines) == 201

    def test_coverage_plausible(self, small_report):
        cov = small_report.by_n(120).coverage
        assert np.all((cov > 0.8) & (cov <= 1.0))

    def test_by_n_unknown(self, small_report):
        with pytest.raises(KeyError):
            small_report.by_n(7)


class TestNormality:
    INFO = fisher_information((0.0, 0.0, 1.0)).entries

    def _errors(self, cov, r=4000, seed=0):
        return np.random.default_rng(seed).multivariate_normal(np.zeros(3), cov, r)

    def test_standardize_whitens(self):
        inv = np.linalg.inv(self.INFO)
        z = standardize_errors(self._errors(inv, 200_000), self.INFO)
        np.testing.assert_allclose(np.cov(z, rowvar=False), np.eye(3), atol=0.02)

    def test_correct_information_passes(self):
        st = normality_diagnostics(self._errors(np.linalg.inv(self.INFO)), self.INFO)
        assert st.covariance_ok and st.cov_distance < 0.15
        assert np.all(np.abs(st.skewness) < 0.2) and np.all(np.abs(st.excess_kurtosis) < 0.3)
        assert np.all(st.anderson_darling < 2.5)

    def test_wrong_information_fails(self):
        wrong = 2.0 * self.INFO
        st = normality_diagnostics(self._errors(np.linalg.inv(self.INFO)), wrong)
        assert not st.covariance_ok

    def test_heavy_tails_detected(self):
        rng = np.random.default_rng(4)
        e = rng.standard_t(3, (4000, 3)) @ np.linalg.cholesky(np.linalg.inv(self.INFO)).T
        st = normality_diagnostics(e, self.INFO)
        assert np.any(st.excess_kurtosis > 1.0)

    def test_zero_variance(self):
        e = self._errors(np.linalg.inv(self.INFO))
        e[:, 1] = 0.3
        with pytest.raises(DegenerateSampleError):
            normality_diagnostics(e, self.INFO)

    def test_shape_checked(self):
        with pytest.raises(InvalidParameterError):
            normality_diagnostics(np.zeros((10, 2)), self.INFO)

    def test_anderson_darling_textbook(self):
        rng = np.random.default_rng(2)
        e = rng.normal(size=(300, 3))
        st = normality_diagnostics(e, np.eye(3))
        assert st.anderson_darling[0] == pytest.approx(_ad_known(e[:, 0]), rel=1e-10)


def _ad_known(z):
    # Anderson-Darling with known N(0, 1) null, from the textbook sum
    from scipy import stats

    z = np.sort(z)
    n = z.size
    i = np.arange(1, n + 1)
    f = stats.norm.cdf(z)
    return -n - np.mean((2 * i - 1) * (np.log(f) + np.log(1 - f[::-1])))


@pytest.mark.slow
def test_error_shrinks_with_n():
    # ratio of medians is near sqrt(2000 / 8000) = 0.5, so half would be a coin flip
    rep = run_simulation(SimConfig((0.2, 0.0, 1.0), (2000, 8000), 100, 17))
    ratio = rep.by_n(8000).median_error / rep.by_n(2000).median_error
    assert ratio < 0.625
    assert rep.valid
