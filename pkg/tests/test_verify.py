"""Predictive-vs-true likelihood-ratio experiment tests."""

import csv

import numpy as np
import pytest
import scipy.stats as st

from irtlab.errors import TrueDensityZeroError
from irtlab.verify import (
    SCENARIOS,
    LrCurvePoint,
    lr_expectation_curve,
    lr_product,
    missing_rate,
    write_curve_csv,
)


class TestMissingRate:
    def test_anchor_at_100(self):
        assert missing_rate(100, 0.5) == pytest.approx(0.5)
        assert missing_rate(100, 0.7) == pytest.approx(0.5)

    def test_decreases_in_n(self):
        assert missing_rate(10_000, 0.5) == pytest.approx(0.05)
        assert missing_rate(100_000, 0.5) < missing_rate(1000, 0.5)

    def test_faster_rate_smaller(self):
        assert missing_rate(100_000, 0.7) < missing_rate(100_000, 0.5)

    def test_capped_at_one(self):
        assert missing_rate(1, 0.7) == 1.0


class TestLrProduct:
    def test_identical_densities_zero(self):
        holdout = np.linspace(-2, 2, 9)
        assert lr_product(st.norm.logpdf, st.norm.logpdf, holdout) == 0.0

    def test_empty_holdout_zero(self):
        assert lr_product(st.norm.logpdf, st.norm.logpdf, []) == 0.0

    def test_zero_predictive_gives_one(self):
        def pred(x):
            return np.full(len(np.atleast_1d(x)), -np.inf)

        assert lr_product(st.norm.logpdf, pred, [0.0]) == 1.0

    def test_true_density_zero_raises(self):
        with pytest.raises(TrueDensityZeroError):
            lr_product(st.uniform.logpdf, st.norm.logpdf, [2.0])

    def test_order_invariance(self):
        holdout = np.array([0.3, -1.0, 2.2, 0.7])
        pred = st.norm(loc=0.1, scale=1.2).logpdf
        fwd = lr_product(st.norm.logpdf, pred, holdout)
        rev = lr_product(st.norm.logpdf, pred, holdout[::-1])
        assert fwd == pytest.approx(rev, abs=1e-12)

    def test_matches_direct_product_small_case(self):
        holdout = np.array([0.5, -0.5])
        pred = st.norm(loc=0.2, scale=1.0).logpdf
        direct = abs(
            np.prod(np.exp(pred(holdout)) / st.norm.pdf(holdout)) - 1.0
        )
        assert lr_product(st.norm.logpdf, pred, holdout) == pytest.approx(direct)


class TestScenarios:
    def test_registry(self):
        assert set(SCENARIOS) == {
            "nig_normal", "kernel_normal", "beta_binomial", "empirical_binomial",
        }

    def test_normal_scenarios_true_law(self):
        scen = SCENARIOS["nig_normal"]()
        x = np.array([-1.0, 0.0, 2.0])
        assert scen.true_log_density(x) == pytest.approx(st.norm.logpdf(x))
        assert scen.continuous

    def test_binomial_scenarios_true_law(self):
        scen = SCENARIOS["beta_binomial"]()
        draws = scen.draw(1000, np.random.default_rng(0))
        assert draws.min() >= 0 and draws.max() <= 100
        assert scen.true_log_density(np.array([10.0])) == pytest.approx(
            st.binom.logpmf(10, 100, 0.1)
        )
        assert not scen.continuous

    def test_unknown_scenario(self):
        with pytest.raises(ValueError):
            lr_expectation_curve("mystery", reps=1)


class TestCurve:
    def test_shapes_and_n1(self):
        points = lr_expectation_curve(
            "nig_normal", n_grid=(100, 1000), rates=(0.5,), reps=5, rng=0
        )
        assert len(points) == 2
        for pt in points:
            assert isinstance(pt, LrCurvePoint)
            assert pt.n1 == round(pt.n_total * (1 - missing_rate(pt.n_total, pt.rate)))
            assert pt.mean_abs_dev >= 0
            assert pt.reps == 5

    def test_zero_missing_gives_zero_curve(self):
        # with no holdout the deviation is identically 0; force r_mis -> 0
        # by a huge rate exponent
        points = lr_expectation_curve(
            "nig_normal", n_grid=(1000,), rates=(5.0,), reps=3, rng=1
        )
        assert points[0].mean_abs_dev == 0.0

    def test_csv_round_trip(self, tmp_path):
        points = lr_expectation_curve(
            "empirical_binomial", n_grid=(100,), rates=(0.5,), reps=3, rng=2
        )
        out = tmp_path / "curve.csv"
        write_curve_csv(points, out)
        with open(out) as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["scenario", "N", "rate", "N1", "mean_abs_dev", "reps"]
        assert rows[1][0] == "empirical_binomial"
        assert float(rows[1][4]) == points[0].mean_abs_dev

    def test_deterministic(self):
        a = lr_expectation_curve("kernel_normal", n_grid=(100,), rates=(0.5,), reps=3, rng=7)
        b = lr_expectation_curve("kernel_normal", n_grid=(100,), rates=(0.5,), reps=3, rng=7)
        assert a == b
