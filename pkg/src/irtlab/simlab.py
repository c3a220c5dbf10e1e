"""Simulation scenarios and rejection-rate studies.

Scenario generators produce datasets (network + design + potential
outcomes) with an additive effect tau between the two contrasted
exposures, so tau=0 puts the null exactly true by construction. The study
runner replays many randomized experiments per dataset and tallies
rejection rates per method.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
import scipy.stats as st

from .designs import BernoulliDesign, TwoStageDesign, as_rng
from .errors import ValidationError
from .imputation import (
    EmpiricalImputer,
    KernelImputer,
    NIGImputer,
    OracleImputer,
    named_distribution,
)
from .irt import irt_pvalue
from .network import ThreeLevelExposure, cluster_network, spatial_network
from .teststat import observed_theta

BASE_LAWS = {
    "normal": lambda: st.norm(),
    "chi2_4": lambda: st.chi2(df=4),
    "t_4": lambda: st.t(df=4),
}

SPATIAL_MIXTURE = (
    # (weight, mean, sd) of the coordinate mixture components
    (0.5, (0.5, 0.5), 0.1),
    (0.3, (0.25, 0.75), 0.075),
    (0.2, (0.3, 0.3), 0.075),
)


@dataclass(eq=False)
class ScenarioDataset:
    """One concrete dataset: structure plus fixed potential outcomes."""

    network: object
    design: object
    exposure_map: object
    a: object
    b: object
    y_a: np.ndarray  # outcome under exposure a
    y_b: np.ndarray  # outcome under exposure b (= y_a + tau)

    def observed_outcomes(self, z_obs) -> np.ndarray:
        """Outcomes revealed by an assignment.

        Units outside the two focal exposures get their a-level value;
        those entries are masked off downstream and never enter the
        statistic.
        """
        exposures = self.exposure_map(z_obs)
        return np.where(exposures == self.b, self.y_b, self.y_a)


class ClusteredScenario:
    """Equal clusters, two-stage design, spillover contrast (0, 1)."""

    def __init__(self, n_units=300, n_clusters=75, tau=0.0, base_law="normal"):
        if n_units % n_clusters:
            raise ValidationError(
                f"cluster count {n_clusters} must divide N={n_units}"
            )
        self.n_units = n_units
        self.n_clusters = n_clusters
        self.tau = tau
        self.base_law = base_law
        self.memberships = np.repeat(
            np.arange(n_clusters), n_units // n_clusters
        )
        self._network = cluster_network(self.memberships)
        self._design = TwoStageDesign(self.memberships)
        self._exposure = ThreeLevelExposure(self._network)

    def sample_dataset(self, rng) -> ScenarioDataset:
        rng = as_rng(rng)
        y0 = BASE_LAWS[self.base_law]().rvs(size=self.n_units, random_state=rng)
        return ScenarioDataset(
            network=self._network,
            design=self._design,
            exposure_map=self._exposure,
            a=0,
            b=1,
            y_a=y0,
            y_b=y0 + self.tau,
        )


class SpatialScenario:
    """Gaussian-mixture coordinates, Bernoulli(p) design, contrast (0, 1).

    Coordinates (and hence the network) are redrawn for every dataset.
    """

    def __init__(
        self, n_units=1000, radius=0.01, p=0.5, tau=0.0, base_law="normal"
    ):
        self.n_units = n_units
        self.radius = radius
        self.p = p
        self.tau = tau
        self.base_law = base_law

    def sample_coords(self, rng) -> np.ndarray:
        rng = as_rng(rng)
        counts = [int(round(w * self.n_units)) for w, _, _ in SPATIAL_MIXTURE]
        counts[-1] = self.n_units - sum(counts[:-1])
        blocks = [
            np.asarray(mean) + sd * rng.standard_normal((count, 2))
            for count, (_, mean, sd) in zip(counts, SPATIAL_MIXTURE)
        ]
        return np.vstack(blocks)

    def sample_dataset(self, rng) -> ScenarioDataset:
        rng = as_rng(rng)
        coords = self.sample_coords(rng)
        network = spatial_network(coords, self.radius)
        y0 = BASE_LAWS[self.base_law]().rvs(size=self.n_units, random_state=rng)
        return ScenarioDataset(
            network=network,
            design=BernoulliDesign(self.n_units, self.p),
            exposure_map=ThreeLevelExposure(network),
            a=0,
            b=1,
            y_a=y0,
            y_b=y0 + self.tau,
        )


def gen_clustered(n_clusters, tau, base_law="normal", n_units=300):
    """Clustered-interference scenario generator."""
    return ClusteredScenario(
        n_units=n_units, n_clusters=n_clusters, tau=tau, base_law=base_law
    )


def gen_spatial(radius, p, tau, base_law="normal", n_units=1000):
    """Spatial-interference scenario generator."""
    return SpatialScenario(
        n_units=n_units, radius=radius, p=p, tau=tau, base_law=base_law
    )


def default_methods(base_law="normal"):
    """The four imputation strategies compared in the studies.

    The oracle knows the true outcome law; the parametric imputer always
    fits a normal model, deliberately mis-specified for heavy-tailed laws.
    """
    oracle_dists = {
        "normal": {"name": "normal", "mu": 0.0, "var": 1.0},
        "chi2_4": {"name": "chi2", "df": 4},
        "t_4": {"name": "t", "df": 4},
    }
    spec = dict(oracle_dists[base_law])
    name = spec.pop("name")
    return {
        "oracle": lambda: OracleImputer(named_distribution(name, **spec)),
        "empirical": lambda: EmpiricalImputer(),
        "parametric": lambda: NIGImputer(),
        "kernel": lambda: KernelImputer(),
    }


@dataclass(frozen=True)
class RejectionRow:
    scenario: str
    method: str
    tau: float
    rejection_rate: float
    std_error: float
    replications: int
    per_dataset_rates: tuple = ()


def run_rejection_study(
    scenario,
    methods: dict,
    alpha: float = 0.05,
    n_datasets: int = 10,
    n_experiments: int = 1000,
    k: int = 2000,
    rng=None,
    scenario_id: str = "scenario",
) -> list:
    """Rejection rate of each method over datasets x experiments.

    ``methods`` maps a method name to a zero-argument imputer factory.
    Every method sees the same datasets and the same observed assignments.
    Substreams are spawned per dataset, so results do not depend on
    evaluation order across datasets.
    """
    if isinstance(rng, np.random.SeedSequence):
        root = rng
    else:
        root = np.random.SeedSequence(rng)
    rejections = {name: 0 for name in methods}
    per_dataset = {name: [] for name in methods}
    for dataset_ss in root.spawn(n_datasets):
        ds_rng = np.random.default_rng(dataset_ss)
        dataset = scenario.sample_dataset(ds_rng)
        ds_rejections = {name: 0 for name in methods}
        for _ in range(n_experiments):
            z_obs = dataset.design.sample(ds_rng)
            y_obs = dataset.observed_outcomes(z_obs)
            partial = observed_theta(
                dataset.exposure_map(z_obs), y_obs, dataset.a, dataset.b
            )
            for name, make_imputer in methods.items():
                result = irt_pvalue(
                    dataset.design,
                    dataset.exposure_map,
                    dataset.a,
                    dataset.b,
                    partial,
                    make_imputer(),
                    z_obs,
                    k=k,
                    rng=ds_rng,
                )
                if result.reject(alpha):
                    ds_rejections[name] += 1
        for name in methods:
            rejections[name] += ds_rejections[name]
            per_dataset[name].append(ds_rejections[name] / n_experiments)
    rows = []
    total = n_datasets * n_experiments
    for name in methods:
        rate = rejections[name] / total
        rows.append(
            RejectionRow(
                scenario=scenario_id,
                method=name,
                tau=getattr(scenario, "tau", float("nan")),
                rejection_rate=rate,
                std_error=float(np.sqrt(rate * (1 - rate) / total)),
                replications=total,
                per_dataset_rates=tuple(per_dataset[name]),
            )
        )
    return rows


def write_rejection_csv(rows, path):
    """CSV schema: scenario,method,tau,rejection_rate,std_error,replications."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            [
                "scenario",
                "method",
                "tau",
                "rejection_rate",
                "std_error",
                "replications",
            ]
        )
        for row in rows:
            writer.writerow(
                [
                    row.scenario,
                    row.method,
                    repr(row.tau),
                    repr(row.rejection_rate),
                    repr(row.std_error),
                    row.replications,
                ]
            )
