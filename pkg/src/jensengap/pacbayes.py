"""Exact cross-entropy risk and oracle upper bounds for finite model families.

For a finite outcome space with true distribution nu and a finite parameter
set with likelihood table p(x|theta), every quantity in the model-averaging
story is an exact finite sum: the cross-entropy risk of a mixture rho,

    CE(rho) = sum_x nu(x) * (-log mu(x)),    mu(x) = sum_t rho(t) p(x|t),

the expected log-loss sum_t rho(t) sum_x nu(x) (-log p(x|t)) (the plain
Jensen upper bound on CE), and the order-k oracle bound

    ELL(rho) - sum_{i=2}^{2k-1} ((-1)^i / i)
               * sum_x nu(x) sum_t rho(t) (p(x|t) - mu(x))^i / mu(x)^i.

The i = 1 term is identically zero (first central moment), so k = 1
returns the expected log-loss unchanged — bit for bit, not within
tolerance.  A two-model binomial instance reproduces the qualitative
model-averaging phenomena: under misspecification the risk minimizes at an
interior mixture while the log-loss, being linear in rho, minimizes at an
endpoint; under perfect specification every curve favors the true model's
endpoint.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import gammaln

from .bounds import _check_k
from .errors import ArgumentError, DomainError

__all__ = [
    "FiniteModelFamily",
    "MixtureWeights",
    "cross_entropy",
    "expected_log_loss",
    "oracle_bound",
    "first_order_term",
    "MixtureCurvePoint",
    "model_averaging_sweep",
    "argmin_rho",
    "binomial_family",
    "MISSPECIFIED_DEFAULT",
    "PERFECT_DEFAULT",
]

_SIMPLEX_TOL = 1e-12

#: Default binomial instances (trial count, true success rate, theta_0, theta_1).
#: In the misspecified instance neither theta matches the data rate; in the
#: perfect one theta_1 equals it.
MISSPECIFIED_DEFAULT = (50, 0.51, 0.35, 0.65)
PERFECT_DEFAULT = (50, 0.65, 0.35, 0.65)


@dataclass(frozen=True)
class FiniteModelFamily:
    """True distribution nu over outcomes plus a likelihood table p(x|theta).

    ``likelihood[i, t]`` is the probability of outcome i under parameter t;
    every column must be a strictly positive distribution.
    """

    nu: np.ndarray = field(repr=False)  # (n_outcomes,)
    thetas: tuple[str, ...]
    likelihood: np.ndarray = field(repr=False)  # (n_outcomes, n_thetas)

    def __post_init__(self) -> None:
        nu = np.asarray(self.nu, dtype=np.float64)
        lik = np.asarray(self.likelihood, dtype=np.float64)
        if nu.ndim != 1 or lik.ndim != 2 or lik.shape != (nu.size, len(self.thetas)):
            raise ArgumentError(
                f"shape mismatch: nu {nu.shape}, likelihood {lik.shape}, "
                f"{len(self.thetas)} thetas"
            )
        if np.any(nu < 0) or abs(float(nu.sum()) - 1.0) > _SIMPLEX_TOL:
            raise ArgumentError("nu must be a probability vector summing to 1 within 1e-12")
        if np.any(lik <= 0.0):
            raise ArgumentError("likelihood table must be strictly positive")
        col_sums = lik.sum(axis=0)
        if np.any(np.abs(col_sums - 1.0) > _SIMPLEX_TOL):
            raise ArgumentError(
                f"each likelihood column must sum to 1 within 1e-12, got {col_sums}"
            )
        object.__setattr__(self, "nu", nu)
        object.__setattr__(self, "likelihood", lik)
        object.__setattr__(self, "thetas", tuple(self.thetas))

    @property
    def n_thetas(self) -> int:
        return len(self.thetas)


@dataclass(frozen=True)
class MixtureWeights:
    """A point on the parameter simplex."""

    rho: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        rho = np.asarray(self.rho, dtype=np.float64)
        if rho.ndim != 1 or np.any(rho < 0) or abs(float(rho.sum()) - 1.0) > _SIMPLEX_TOL:
            raise ArgumentError("mixture weights must be a probability vector within 1e-12")
        object.__setattr__(self, "rho", rho)

    @classmethod
    def two_point(cls, rho: float) -> "MixtureWeights":
        """Weights (1 - rho, rho) over a two-parameter family."""
        if not 0.0 <= rho <= 1.0:
            raise ArgumentError(f"scalar mixture parameter must lie in [0, 1], got {rho}")
        return cls(np.array([1.0 - rho, rho]))


def _mixture_density(family: FiniteModelFamily, weights: MixtureWeights) -> np.ndarray:
    if weights.rho.size != family.n_thetas:
        raise ArgumentError(
            f"weights cover {weights.rho.size} thetas, family has {family.n_thetas}"
        )
    mu = family.likelihood @ weights.rho
    dead = (mu == 0.0) & (family.nu > 0.0)
    if np.any(dead):
        idx = int(np.flatnonzero(dead)[0])
        raise DomainError(f"mixture density is zero on outcome {idx} with positive nu")
    return mu


def cross_entropy(family: FiniteModelFamily, weights: MixtureWeights) -> float:
    """CE(rho) = -sum_x nu(x) log mu(x), the exact mixture risk."""
    mu = _mixture_density(family, weights)
    support = family.nu > 0.0
    return -float(family.nu[support] @ np.log(mu[support]))


def expected_log_loss(family: FiniteModelFamily, weights: MixtureWeights) -> float:
    """sum_t rho(t) L(t) with L(t) = -sum_x nu(x) log p(x|t); linear in rho."""
    if weights.rho.size != family.n_thetas:
        raise ArgumentError(
            f"weights cover {weights.rho.size} thetas, family has {family.n_thetas}"
        )
    per_theta = -(family.nu @ np.log(family.likelihood))
    return float(per_theta @ weights.rho)


def first_order_term(family: FiniteModelFamily, weights: MixtureWeights) -> float:
    """The i = 1 correction term; identically zero (kept as a self-test hook)."""
    mu = _mixture_density(family, weights)
    centered = family.likelihood - mu[:, None]
    return float(family.nu @ ((centered @ weights.rho) / mu))


def oracle_bound(family: FiniteModelFamily, weights: MixtureWeights, k: int) -> float:
    """Order-k oracle upper bound on CE(rho).

        ELL(rho) - sum_{i=2}^{2k-1} ((-1)^i / i)
                   * sum_x nu(x) E_rho[(p(x|theta) - mu(x))^i] / mu(x)^i

    The i = 1 term vanishes identically, so k = 1 returns
    :func:`expected_log_loss` exactly (same float, no arithmetic applied).
    """
    k = _check_k(k)
    value = expected_log_loss(family, weights)
    if k == 1:
        return value
    mu = _mixture_density(family, weights)
    ratio = (family.likelihood - mu[:, None]) / mu[:, None]  # (x, t)
    power = ratio.copy()
    for i in range(2, 2 * k):
        power = power * ratio
        moment = float(family.nu @ (power @ weights.rho))
        value -= ((-1.0) ** i / i) * moment
    return value


@dataclass(frozen=True)
class MixtureCurvePoint:
    """One grid point of the two-model averaging sweep."""

    rho: float
    ce: float
    bounds: tuple[tuple[int, float], ...]  # ((k, value), ...) in k order

    def bound(self, k: int) -> float:
        for kk, v in self.bounds:
            if kk == k:
                return v
        raise ArgumentError(f"no bound of order {k} on this curve point")


def model_averaging_sweep(
    family: FiniteModelFamily, rho_grid: Sequence[float], k_list: Sequence[int]
) -> list[MixtureCurvePoint]:
    """CE and oracle-bound curves over a scalar mixture grid.

    Requires exactly two thetas; grid values must be sorted and lie in
    [0, 1].  Points are emitted in grid order.
    """
    if family.n_thetas != 2:
        raise ArgumentError(
            f"the scalar sweep applies to two-parameter families, got {family.n_thetas}"
        )
    grid = [float(r) for r in rho_grid]
    ks = [int(k) for k in k_list]
    if not grid or not ks:
        raise ArgumentError("sweep requires a non-empty rho grid and k list")
    if grid != sorted(grid):
        raise ArgumentError("rho grid must be sorted ascending")
    points = []
    for r in grid:
        w = MixtureWeights.two_point(r)
        points.append(
            MixtureCurvePoint(
                rho=r,
                ce=cross_entropy(family, w),
                bounds=tuple((k, oracle_bound(family, w, k)) for k in ks),
            )
        )
    return points


def argmin_rho(values: Sequence[float], grid: Sequence[float]) -> float:
    """Grid value minimizing ``values``; ties resolve to the smaller rho."""
    return float(grid[int(np.argmin(values))])


def binomial_family(
    trials: int, true_rate: float, theta0: float, theta1: float
) -> FiniteModelFamily:
    """Binomial(trials) outcome space: true rate vs a two-model family.

    Outcomes are the counts 0..trials; nu is the Binomial(trials, true_rate)
    pmf and each theta contributes the Binomial(trials, theta) pmf.  All
    pmfs are computed in log-space via log-gamma.
    """
    if trials < 1:
        raise ArgumentError(f"trial count must be >= 1, got {trials}")
    for name, p in (("true_rate", true_rate), ("theta0", theta0), ("theta1", theta1)):
        if not 0.0 < p < 1.0:
            raise ArgumentError(f"{name} must lie strictly inside (0, 1), got {p}")

    counts = np.arange(trials + 1, dtype=np.float64)
    log_comb = gammaln(trials + 1) - gammaln(counts + 1) - gammaln(trials - counts + 1)

    def pmf(p: float) -> np.ndarray:
        logs = log_comb + counts * math.log(p) + (trials - counts) * math.log1p(-p)
        vec = np.exp(logs)
        return vec / vec.sum()  # renormalize away float drift so columns sum to 1

    return FiniteModelFamily(
        nu=pmf(true_rate),
        thetas=(f"theta={theta0:g}", f"theta={theta1:g}"),
        likelihood=np.column_stack([pmf(theta0), pmf(theta1)]),
    )
