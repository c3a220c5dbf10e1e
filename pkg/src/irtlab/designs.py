"""Randomization designs: samplers and exact enumerators over assignments.

Each design represents a known randomization distribution over the
assignment set. All designs support seeded sampling (single and batched)
and, when the support is small enough, exact enumeration with rational
probabilities so downstream p-value oracles can be computed exactly.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np

from .errors import (
    EmptyClusterError,
    SupportTooLargeError,
    TooFewClustersError,
)

DEFAULT_ENUMERATION_CAP = 2**20


def as_rng(rng) -> np.random.Generator:
    """Accept a Generator, SeedSequence, or integer seed."""
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


class Design:
    """Base class; subclasses set ``n`` and implement sampling."""

    n: int

    def sample(self, rng) -> np.ndarray:
        return self.sample_batch(1, rng)[0]

    def sample_batch(self, size: int, rng) -> np.ndarray:
        raise NotImplementedError

    def support_size(self) -> int:
        raise NotImplementedError

    def enumerate_support(self, cap: int = DEFAULT_ENUMERATION_CAP):
        """List of (assignment, probability) pairs, probabilities exact.

        Probabilities are :class:`fractions.Fraction` and sum to 1 exactly.
        Enumeration order is lexicographic in the unit indices.
        """
        size = self.support_size()
        if size > cap:
            raise SupportTooLargeError(f"support size {size} exceeds cap {cap}")
        return list(self._enumerate())

    def _enumerate(self):
        raise NotImplementedError


class BernoulliDesign(Design):
    """Independent Bernoulli(p) treatment for each of n units."""

    def __init__(self, n: int, p: float):
        if not 0 <= p <= 1:
            raise ValueError(f"p must be in [0,1], got {p}")
        self.n = n
        self.p = p

    def sample_batch(self, size, rng):
        rng = as_rng(rng)
        return (rng.random((size, self.n)) < self.p).astype(np.int64)

    def support_size(self):
        if self.p in (0.0, 1.0):
            return 1
        return 2**self.n

    def _enumerate(self):
        p = Fraction(self.p)
        if p == 0 or p == 1:
            yield np.full(self.n, int(p), dtype=np.int64), Fraction(1)
            return
        for bits in itertools.product((0, 1), repeat=self.n):
            z = np.array(bits, dtype=np.int64)
            t = int(z.sum())
            yield z, p**t * (1 - p) ** (self.n - t)


class CompleteDesign(Design):
    """Exactly m of n units treated, uniformly at random."""

    def __init__(self, n: int, m: int):
        if not 0 <= m <= n:
            raise ValueError(f"need 0 <= m <= n, got m={m}, n={n}")
        self.n = n
        self.m = m

    def sample_batch(self, size, rng):
        rng = as_rng(rng)
        order = np.argsort(rng.random((size, self.n)), axis=1)
        Z = np.zeros((size, self.n), dtype=np.int64)
        np.put_along_axis(Z, order[:, : self.m], 1, axis=1)
        return Z

    def support_size(self):
        return math.comb(self.n, self.m)

    def _enumerate(self):
        prob = Fraction(1, math.comb(self.n, self.m))
        for treated in itertools.combinations(range(self.n), self.m):
            z = np.zeros(self.n, dtype=np.int64)
            z[list(treated)] = 1
            yield z, prob


class TwoStageDesign(Design):
    """Two-stage clustered design.

    Stage 1 picks a uniform floor(K/2)-subset of clusters for treatment;
    stage 2 treats one uniform unit inside each picked cluster. All other
    units are controls.
    """

    def __init__(self, memberships):
        memberships = np.asarray(memberships, dtype=np.int64)
        self.n = len(memberships)
        self.memberships = memberships
        self.cluster_ids = np.unique(memberships)
        self.n_clusters = len(self.cluster_ids)
        if self.n_clusters < 2:
            raise TooFewClustersError(
                f"need >= 2 clusters, got {self.n_clusters}"
            )
        self.members = [
            np.flatnonzero(memberships == c) for c in self.cluster_ids
        ]
        if any(len(m) == 0 for m in self.members):
            raise EmptyClusterError("every cluster must be non-empty")
        self.n_treated_clusters = self.n_clusters // 2
        # padded member matrix for vectorized stage-2 draws
        self._sizes = np.array([len(m) for m in self.members])
        pad = np.zeros((self.n_clusters, self._sizes.max()), dtype=np.int64)
        for i, m in enumerate(self.members):
            pad[i, : len(m)] = m
        self._padded = pad

    def sample_batch(self, size, rng):
        rng = as_rng(rng)
        m = self.n_treated_clusters
        order = np.argsort(rng.random((size, self.n_clusters)), axis=1)
        chosen = order[:, :m]  # cluster indices, (size, m)
        within = np.floor(
            rng.random((size, m)) * self._sizes[chosen]
        ).astype(np.int64)
        units = self._padded[chosen, within]
        Z = np.zeros((size, self.n), dtype=np.int64)
        np.put_along_axis(Z, units, 1, axis=1)
        return Z

    def support_size(self):
        m = self.n_treated_clusters
        total = 0
        for subset in itertools.combinations(range(self.n_clusters), m):
            total += math.prod(int(self._sizes[c]) for c in subset)
        return total

    def _enumerate(self):
        m = self.n_treated_clusters
        p_subset = Fraction(1, math.comb(self.n_clusters, m))
        for subset in itertools.combinations(range(self.n_clusters), m):
            prob = p_subset * math.prod(
                Fraction(1, int(self._sizes[c])) for c in subset
            )
            for units in itertools.product(*(self.members[c] for c in subset)):
                z = np.zeros(self.n, dtype=np.int64)
                z[list(units)] = 1
                yield z, prob


def sample_two_stage(memberships, rng) -> np.ndarray:
    """One draw from the two-stage clustered design."""
    return TwoStageDesign(memberships).sample(rng)


def design_from_spec(spec: dict, n: int = None) -> Design:
    """Build a design from its JSON config representation."""
    kind = spec["kind"]
    if kind == "bernoulli":
        return BernoulliDesign(n=spec.get("n", n), p=spec["p"])
    if kind == "complete":
        return CompleteDesign(n=spec.get("n", n), m=spec["m"])
    if kind == "two_stage":
        return TwoStageDesign(spec["memberships"])
    raise ValueError(f"unknown design kind: {kind!r}")
