"""Imputation distributions for the unidentified entries of the nuisance
vector.

Every imputer follows a small estimator API: configure hyperparameters in
``__init__``, call ``fit(observed_values)``, then use ``sample`` (i.i.d.
predictive draws), ``density``/``pmf`` (predictive evaluation), and
``draw``/``draw_batch`` (complete a partially observed vector, copying the
observed entries verbatim).
"""

from __future__ import annotations

import inspect
import warnings

import numpy as np
import scipy.stats as st
from scipy.special import logsumexp

from .designs import as_rng
from .errors import (
    ContinuousKindError,
    DegenerateSampleWarning,
    DiscreteKindError,
    EmptyObservedError,
    InvalidHyperparameterError,
    OutOfSupportError,
)
from .teststat import PartialTheta


def kernel_bandwidth(values) -> float:
    """Silverman rule-of-thumb bandwidth: 1.06 * std * N^(-1/5).

    Returns 0.0 for a degenerate (constant) sample; callers fall back to
    plain resampling in that case.
    """
    values = np.asarray(values, dtype=float)
    if len(values) < 2:
        raise EmptyObservedError("bandwidth needs at least 2 observations")
    sd = float(values.std(ddof=1))
    return 1.06 * sd * len(values) ** (-1 / 5)


class BaseImputer:
    """Shared estimator plumbing (get_params/set_params, draw helpers)."""

    discrete = False

    def get_params(self, deep=True):
        sig = inspect.signature(type(self).__init__)
        return {
            name: getattr(self, name)
            for name in sig.parameters
            if name != "self"
        }

    def set_params(self, **params):
        for key, value in params.items():
            if key not in self.get_params():
                raise ValueError(f"invalid parameter {key!r} for {type(self).__name__}")
            setattr(self, key, value)
        return self

    def fit(self, values) -> "BaseImputer":
        raise NotImplementedError

    def sample(self, size: int, rng) -> np.ndarray:
        raise NotImplementedError

    # continuous kinds override log_density; discrete kinds override log_pmf
    def log_density(self, x):
        if self.discrete:
            raise DiscreteKindError(
                f"{type(self).__name__} is discrete; use pmf()"
            )
        raise NotImplementedError

    def density(self, x):
        return np.exp(self.log_density(x))

    def log_pmf(self, x):
        if not self.discrete:
            raise ContinuousKindError(
                f"{type(self).__name__} is continuous; use density()"
            )
        raise NotImplementedError

    def pmf(self, x):
        return np.exp(self.log_pmf(x))

    def _check_fitted(self):
        if not getattr(self, "fitted_", False):
            raise EmptyObservedError(f"{type(self).__name__} is not fitted")

    def draw(self, partial: PartialTheta, rng) -> np.ndarray:
        """Complete one vector: observed entries verbatim, rest i.i.d."""
        self._check_fitted()
        out = partial.values.copy()
        missing = ~partial.observed
        n_missing = int(missing.sum())
        if n_missing:
            out[missing] = self.sample(n_missing, rng)
        return out

    def draw_batch(self, partial: PartialTheta, size: int, rng) -> np.ndarray:
        """(size, n) matrix of completed vectors."""
        self._check_fitted()
        out = np.tile(partial.values, (size, 1))
        missing = ~partial.observed
        n_missing = int(missing.sum())
        if n_missing:
            out[:, missing] = self.sample(size * n_missing, rng).reshape(
                size, n_missing
            )
        return out


class PointMass:
    """Degenerate distribution at a single value (for oracle imputation)."""

    def __init__(self, value: float):
        self.value = float(value)

    def rvs(self, size=1, random_state=None):
        return np.full(size, self.value)


class OracleImputer(BaseImputer):
    """Imputes from a known marginal distribution; fitting is a no-op.

    ``dist`` is any frozen distribution exposing ``rvs`` (and ``pdf`` or
    ``pmf`` when predictive evaluation is needed).
    """

    def __init__(self, dist):
        self.dist = dist

    @property
    def discrete(self):
        return hasattr(self.dist, "pmf")

    def fit(self, values=None):
        self.fitted_ = True
        return self

    def sample(self, size, rng):
        return np.asarray(self.dist.rvs(size=size, random_state=rng), dtype=float)

    def log_density(self, x):
        if self.discrete:
            return super().log_density(x)
        return self.dist.logpdf(x)

    def log_pmf(self, x):
        if not self.discrete:
            return super().log_pmf(x)
        return self.dist.logpmf(x)


class EmpiricalImputer(BaseImputer):
    """Resamples uniformly from the observed values."""

    discrete = True

    def __init__(self):
        pass

    def fit(self, values):
        values = np.asarray(values, dtype=float)
        if len(values) == 0:
            raise EmptyObservedError("empirical imputer needs observations")
        self.values_ = values
        self.support_, counts = np.unique(values, return_counts=True)
        self.probs_ = counts / len(values)
        self.fitted_ = True
        return self

    def sample(self, size, rng):
        return self.values_[as_rng(rng).integers(0, len(self.values_), size)]

    def log_pmf(self, x):
        with np.errstate(divide="ignore"):
            return np.log(self.pmf(x))

    def pmf(self, x):
        x = np.asarray(x, dtype=float)
        idx = np.searchsorted(self.support_, x)
        idx = np.clip(idx, 0, len(self.support_) - 1)
        hit = self.support_[idx] == x
        return np.where(hit, self.probs_[idx], 0.0)


class KernelImputer(BaseImputer):
    """Gaussian kernel smoothing of the empirical distribution.

    Bandwidth follows the Silverman rule. A constant sample makes the
    bandwidth zero; the imputer then degrades to plain resampling and
    warns, since no density exists.
    """

    def __init__(self, bandwidth=None):
        self.bandwidth = bandwidth

    def fit(self, values):
        values = np.asarray(values, dtype=float)
        if len(values) == 0:
            raise EmptyObservedError("kernel imputer needs observations")
        if self.bandwidth is not None:
            h = float(self.bandwidth)
        elif len(values) < 2:
            h = 0.0
        else:
            h = kernel_bandwidth(values)
        if h <= 0:
            warnings.warn(
                "degenerate sample: kernel bandwidth is 0, falling back to "
                "resampling the observed values",
                DegenerateSampleWarning,
            )
            h = 0.0
        self.values_ = values
        self.h_ = h
        self.__dict__.pop("_bin_cache", None)
        self.fitted_ = True
        return self

    def sample(self, size, rng):
        rng = as_rng(rng)
        picks = self.values_[rng.integers(0, len(self.values_), size)]
        if self.h_ == 0.0:
            return picks
        return picks + self.h_ * rng.standard_normal(size)

    # above this sample size, density evaluation switches to a linearly
    # binned grid (relative error ~ (bin width / bandwidth)^2, negligible
    # at 4096 bins); below it the kernel sum is exact
    _EXACT_LIMIT = 10_000
    _N_BINS = 4096

    def log_density(self, x):
        self._check_fitted()
        if self.h_ == 0.0:
            raise DiscreteKindError(
                "kernel imputer degenerated to resampling; no density exists"
            )
        scalar = np.ndim(x) == 0
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if len(self.values_) > self._EXACT_LIMIT:
            centers, weights = self._binned()
        else:
            centers, weights = self.values_, None
        out = np.empty(len(x))
        # chunk the (n_eval, n_centers) kernel matrix to bound memory
        chunk = max(1, int(4e6) // max(1, len(centers)))
        log_norm = -np.log(len(self.values_) * self.h_) - 0.5 * np.log(2 * np.pi)
        for lo in range(0, len(x), chunk):
            u = (x[lo : lo + chunk, None] - centers[None, :]) / self.h_
            out[lo : lo + chunk] = (
                logsumexp(-0.5 * u * u, b=weights, axis=1) + log_norm
            )
        return out[0] if scalar else out

    def _binned(self):
        if not hasattr(self, "_bin_cache"):
            lo = self.values_.min() - 6 * self.h_
            hi = self.values_.max() + 6 * self.h_
            delta = (hi - lo) / (self._N_BINS - 1)
            pos = (self.values_ - lo) / delta
            left = np.floor(pos).astype(np.int64)
            frac = pos - left
            weights = np.zeros(self._N_BINS)
            np.add.at(weights, left, 1.0 - frac)
            np.add.at(weights, np.minimum(left + 1, self._N_BINS - 1), frac)
            centers = lo + delta * np.arange(self._N_BINS)
            self._bin_cache = (centers, weights)
        return self._bin_cache


class NormalKnownVarImputer(BaseImputer):
    """Normal data with known variance, conjugate normal prior on the mean.

    The predictive is N(posterior mean, posterior var + data var). Fitting
    on an empty sample yields the prior predictive N(mu0, var0 + var).
    """

    def __init__(self, var, mu0=0.0, var0=1.0):
        if var <= 0 or var0 <= 0:
            raise InvalidHyperparameterError("variances must be positive")
        self.var = var
        self.mu0 = mu0
        self.var0 = var0

    def fit(self, values):
        values = np.asarray(values, dtype=float)
        n1 = len(values)
        post_var = 1.0 / (1.0 / self.var0 + n1 / self.var)
        post_mean = post_var * (
            self.mu0 / self.var0 + values.sum() / self.var
        )
        self.post_mean_ = post_mean
        self.post_var_ = post_var
        self.pred_var_ = post_var + self.var
        self.fitted_ = True
        return self

    def sample(self, size, rng):
        return self.post_mean_ + np.sqrt(self.pred_var_) * as_rng(
            rng
        ).standard_normal(size)

    def log_density(self, x):
        self._check_fitted()
        return st.norm.logpdf(x, loc=self.post_mean_, scale=np.sqrt(self.pred_var_))


class NIGImputer(BaseImputer):
    """Normal data with unknown mean and variance, normal-inverse-gamma
    prior. The predictive is a noncentral scaled t distribution.
    """

    def __init__(self, alpha0=1.0, beta0=1.0, kappa0=1.0, mu0=0.0):
        if alpha0 <= 0 or beta0 <= 0 or kappa0 <= 0:
            raise InvalidHyperparameterError(
                "alpha0, beta0, kappa0 must be positive"
            )
        self.alpha0 = alpha0
        self.beta0 = beta0
        self.kappa0 = kappa0
        self.mu0 = mu0

    def fit(self, values):
        values = np.asarray(values, dtype=float)
        n1 = len(values)
        mean = values.mean() if n1 else 0.0
        ss = float(values.var(ddof=1)) * (n1 - 1) if n1 >= 2 else 0.0
        self.alpha_ = self.alpha0 + n1 / 2.0
        self.kappa_ = self.kappa0 + n1
        self.mu_ = (self.kappa0 * self.mu0 + n1 * mean) / self.kappa_
        self.beta_ = self.beta0 + 0.5 * (
            ss + n1 * self.kappa0 / self.kappa_ * (mean - self.mu0) ** 2
        )
        self.pred_scale_sq_ = (
            self.beta_ / self.alpha_ * (1.0 + 1.0 / self.kappa_)
        )
        self.pred_df_ = 2.0 * self.alpha_
        self.fitted_ = True
        return self

    def _frozen(self):
        return st.t(
            df=self.pred_df_, loc=self.mu_, scale=np.sqrt(self.pred_scale_sq_)
        )

    def sample(self, size, rng):
        return self._frozen().rvs(size=size, random_state=as_rng(rng))

    def log_density(self, x):
        self._check_fitted()
        return self._frozen().logpdf(x)


class BetaBinomialImputer(BaseImputer):
    """Binomial(m, q) data with a Beta(alpha, beta) prior on q.

    The predictive is Beta-Binomial(m, alpha + sum, beta + n*m - sum).
    """

    discrete = True

    def __init__(self, m, alpha=1.0, beta=1.0):
        if m < 1:
            raise InvalidHyperparameterError("m must be >= 1")
        if alpha <= 0 or beta <= 0:
            raise InvalidHyperparameterError("alpha, beta must be positive")
        self.m = int(m)
        self.alpha = alpha
        self.beta = beta

    def fit(self, values):
        values = np.asarray(values, dtype=float)
        if values.size and (
            (values < 0).any()
            or (values > self.m).any()
            or (values != np.round(values)).any()
        ):
            raise OutOfSupportError(f"observations must be integers in 0..{self.m}")
        total = float(values.sum())
        n1 = len(values)
        self.alpha_ = self.alpha + total
        self.beta_ = self.beta + n1 * self.m - total
        self.fitted_ = True
        return self

    def _frozen(self):
        return st.betabinom(self.m, self.alpha_, self.beta_)

    def sample(self, size, rng):
        return np.asarray(
            self._frozen().rvs(size=size, random_state=as_rng(rng)), dtype=float
        )

    def log_pmf(self, x):
        self._check_fitted()
        x = np.asarray(x)
        if ((x < 0) | (x > self.m) | (x != np.round(x))).any():
            raise OutOfSupportError(f"pmf support is integers 0..{self.m}")
        return self._frozen().logpmf(np.round(x).astype(int))


_NAMED_DISTRIBUTIONS = {
    "normal": lambda mu=0.0, var=1.0: st.norm(loc=mu, scale=np.sqrt(var)),
    "chi2": lambda df: st.chi2(df=df),
    "t": lambda df: st.t(df=df),
    "bernoulli": lambda q: st.bernoulli(p=q),
    "point_mass": lambda value: PointMass(value),
}


def named_distribution(name: str, **params):
    """Frozen distribution from a config-friendly name."""
    try:
        factory = _NAMED_DISTRIBUTIONS[name]
    except KeyError:
        raise ValueError(f"unknown distribution name: {name!r}") from None
    return factory(**params)


_IMPUTER_KINDS = {
    "empirical": EmpiricalImputer,
    "kernel": KernelImputer,
    "normal_known_var": NormalKnownVarImputer,
    "nig": NIGImputer,
    "beta_binomial": BetaBinomialImputer,
}


def imputer_from_spec(spec: dict) -> BaseImputer:
    """Build an (unfitted) imputer from its JSON config representation."""
    spec = dict(spec)
    kind = spec.pop("kind")
    if kind == "oracle":
        dist_spec = dict(spec.pop("dist"))
        name = dist_spec.pop("name")
        return OracleImputer(named_distribution(name, **dist_spec))
    try:
        cls = _IMPUTER_KINDS[kind]
    except KeyError:
        raise ValueError(f"unknown imputer kind: {kind!r}") from None
    return cls(**spec)


def fit_imputer(kind: str, values, **hyper) -> BaseImputer:
    """Convenience: construct by kind name and fit on observed values."""
    imputer = imputer_from_spec({"kind": kind, **hyper})
    return imputer.fit(values)


def predictive_density(imputer: BaseImputer, x):
    """Predictive density of a fitted continuous imputer at x."""
    return imputer.density(x)


def predictive_pmf(imputer: BaseImputer, x):
    """Predictive pmf of a fitted discrete imputer at x."""
    return imputer.pmf(x)
