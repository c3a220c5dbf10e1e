"""Likelihood-ratio product experiments.

These quantify, by simulation, how fast the fitted predictive distribution
approaches the true data law as the observed fraction grows: draw N values
from the true law, fit on the first N1, evaluate the product of predictive
to true density ratios over the holdout, and average the absolute deviation
of that product from 1. The missing fraction shrinks like N^(-rate),
anchored at 0.5 for N=100.
"""

from __future__ import annotations

import csv
from dataclasses import asdict, dataclass

import numpy as np
import scipy.stats as st

from .designs import as_rng
from .errors import TrueDensityZeroError
from .imputation import (
    BetaBinomialImputer,
    EmpiricalImputer,
    KernelImputer,
    NIGImputer,
)

MISSING_RATE_ANCHOR = 0.5  # missing rate at N = 100
DEFAULT_N_GRID = (100, 1000, 10_000, 100_000)
DEFAULT_RATES = (0.5, 0.6, 0.7)


@dataclass(frozen=True)
class LrCurvePoint:
    """One averaged likelihood-ratio-product deviation."""

    scenario: str
    n_total: int
    rate: float
    n1: int
    mean_abs_dev: float
    reps: int


def missing_rate(n_total: int, rate: float) -> float:
    """Missing fraction N^(-rate), scaled so it is 0.5 at N=100."""
    return min(1.0, MISSING_RATE_ANCHOR * (n_total / 100.0) ** (-rate))


def lr_product(true_log_density, predictive_log_density, holdout) -> float:
    """|prod of predictive/true density ratios over the holdout - 1|.

    Accumulated in log space. A -inf predictive log-density (zero mass on
    a holdout point) makes the product 0, so the deviation is exactly 1.
    """
    holdout = np.asarray(holdout, dtype=float)
    if len(holdout) == 0:
        return 0.0
    log_true = np.asarray(true_log_density(holdout), dtype=float)
    if np.isneginf(log_true).any():
        raise TrueDensityZeroError("true density is 0 on a holdout point")
    log_pred = np.asarray(predictive_log_density(holdout), dtype=float)
    if np.isneginf(log_pred).any():
        return 1.0
    log_ratio = float(log_pred.sum() - log_true.sum())
    if log_ratio > 700:  # exp would overflow; |e^x - 1| = e^x here
        return float(np.exp(700))
    return abs(float(np.expm1(log_ratio)))


class _Scenario:
    continuous: bool

    def draw(self, n, rng):
        raise NotImplementedError

    def true_log_density(self, x):
        raise NotImplementedError

    def make_imputer(self):
        raise NotImplementedError


class _NigNormal(_Scenario):
    continuous = True

    def draw(self, n, rng):
        return rng.standard_normal(n)

    def true_log_density(self, x):
        return st.norm.logpdf(x)

    def make_imputer(self):
        return NIGImputer(alpha0=1.0, beta0=1.0, kappa0=1.0, mu0=0.0)


class _KernelNormal(_NigNormal):
    def make_imputer(self):
        return KernelImputer()


class _BetaBinomial(_Scenario):
    continuous = False
    m = 100
    q = 0.1

    def draw(self, n, rng):
        return rng.binomial(self.m, self.q, size=n).astype(float)

    def true_log_density(self, x):
        return st.binom.logpmf(np.round(x).astype(int), self.m, self.q)

    def make_imputer(self):
        return BetaBinomialImputer(m=self.m, alpha=1.0, beta=1.0)


class _EmpiricalBinomial(_BetaBinomial):
    def make_imputer(self):
        return EmpiricalImputer()


SCENARIOS = {
    "nig_normal": _NigNormal,
    "kernel_normal": _KernelNormal,
    "beta_binomial": _BetaBinomial,
    "empirical_binomial": _EmpiricalBinomial,
}


def lr_expectation_curve(
    scenario: str,
    n_grid=DEFAULT_N_GRID,
    rates=DEFAULT_RATES,
    reps: int = 1000,
    rng=None,
) -> list:
    """Averaged deviation curves over a (N, rate) grid.

    For each cell: draw N values from the scenario's true law, fit the
    scenario's imputer on the first N1 = round(N * (1 - missing rate)),
    evaluate the ratio product on the holdout, average over reps.
    """
    try:
        scen = SCENARIOS[scenario]()
    except KeyError:
        raise ValueError(f"unknown scenario: {scenario!r}") from None
    rng = as_rng(rng)
    points = []
    for n_total in n_grid:
        for rate in rates:
            r_mis = missing_rate(n_total, rate)
            n1 = int(round(n_total * (1.0 - r_mis)))
            devs = np.empty(reps)
            for rep in range(reps):
                values = scen.draw(n_total, rng)
                imputer = scen.make_imputer().fit(values[:n1])
                pred = (
                    imputer.log_density if scen.continuous else imputer.log_pmf
                )
                devs[rep] = lr_product(
                    scen.true_log_density, pred, values[n1:]
                )
            points.append(
                LrCurvePoint(
                    scenario=scenario,
                    n_total=n_total,
                    rate=rate,
                    n1=n1,
                    mean_abs_dev=float(devs.mean()),
                    reps=reps,
                )
            )
    return points


def write_curve_csv(points, path):
    """CSV columns: scenario,N,rate,N1,mean_abs_dev,reps."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["scenario", "N", "rate", "N1", "mean_abs_dev", "reps"])
        for pt in points:
            row = asdict(pt)
            writer.writerow(
                [
                    row["scenario"],
                    row["n_total"],
                    row["rate"],
                    row["n1"],
                    repr(row["mean_abs_dev"]),
                    row["reps"],
                ]
            )
