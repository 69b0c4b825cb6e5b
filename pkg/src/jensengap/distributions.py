"""Moment providers and the generic expectation engine.

Every bound kernel consumes moments through the same small surface:

* ``mean()``                      -- E X
* ``raw_moment(j)``               -- E X^j for integer j (possibly negative)
* ``central_moment(i)``           -- E (X - E X)^i
* ``expectation(integrand, ...)`` -- E g(X) for an arbitrary integrand

Analytic providers (gamma, log-normal, exponential, normal) answer raw
moments from closed forms and general expectations by adaptive quadrature
against their density; the empirical provider answers everything with
sample means.  Moments that do not exist are reported as a flagged
:class:`MomentValue` carrying a signed infinity, never as a silent NaN.
"""

from __future__ import annotations

import math
from typing import Callable, NamedTuple

import numpy as np
from scipy import integrate, special

from .errors import ArgumentError, ComputationError, DataError

__all__ = [
    "MomentValue",
    "MomentProvider",
    "GammaProvider",
    "LogNormalProvider",
    "ExponentialProvider",
    "NormalProvider",
    "EmpiricalProvider",
    "load_samples",
    "exact_log_gap",
    "kahan_sum",
    "MAX_MOMENT_ORDER",
    "DEFAULT_REL_TOL",
]

#: Highest moment order any bound of order k <= K_MAX can request (2*K_MAX - 1).
MAX_MOMENT_ORDER = 15

#: Default relative tolerance of the quadrature expectation engine.
DEFAULT_REL_TOL = 1e-10

#: Sample minima below this make empirical negative moments blow up.
_EMPIRICAL_MIN_GUARD = 1e-12


class MomentValue(NamedTuple):
    """A moment together with an existence flag.

    ``value`` is the moment when ``exists`` is true; otherwise it is the
    signed infinity the defining integral diverges to, and ``note`` says why.
    """

    value: float
    exists: bool = True
    note: str = ""


def _check_order(j: int) -> int:
    j = int(j)
    if abs(j) > MAX_MOMENT_ORDER:
        raise ArgumentError(
            f"moment order {j} outside supported range "
            f"[-{MAX_MOMENT_ORDER}, {MAX_MOMENT_ORDER}]"
        )
    return j


class MomentProvider:
    """Base class: caching, Newton's central moments, quadrature engine.

    Subclasses set ``kind``, implement ``raw_moment_uncached`` and either
    ``_log_pdf`` + ``_positive_support`` (analytic kinds) or override
    ``expectation`` outright (empirical kind).
    """

    kind: str = ""
    _positive_support = True  # integrate over u = log x by default

    def __init__(self) -> None:
        self._raw_cache: dict[int, MomentValue] = {}

    # -- raw / central moments ------------------------------------------------

    def raw_moment(self, j: int) -> MomentValue:
        """E X^j with closed-form evaluation and per-instance caching."""
        j = _check_order(j)
        if j not in self._raw_cache:
            self._raw_cache[j] = self.raw_moment_uncached(j)
        return self._raw_cache[j]

    def raw_moment_uncached(self, j: int) -> MomentValue:
        raise NotImplementedError

    def mean(self) -> float:
        return self.raw_moment(1).value

    def central_moment(self, i: int) -> MomentValue:
        """E (X - E X)^i by binomial expansion over raw moments.

        The alternating expansion is summed with compensated arithmetic;
        a nonexistent constituent raw moment makes the central moment
        nonexistent as well.
        """
        i = _check_order(i)
        if i < 1:
            raise ArgumentError(f"central moment order must be >= 1, got {i}")
        if i == 1:
            return MomentValue(0.0)
        m = self.mean()
        terms = []
        for r in range(i + 1):
            raw = self.raw_moment(r)
            if not raw.exists:
                return MomentValue(raw.value, False, raw.note)
            terms.append(math.comb(i, r) * (-1.0) ** (i - r) * raw.value * m ** (i - r))
        return MomentValue(kahan_sum(terms))

    # -- generic expectations -------------------------------------------------

    def expectation(
        self, integrand: Callable[[float], float], rel_tol: float = DEFAULT_REL_TOL
    ) -> float:
        """E g(X) by adaptive quadrature against the density.

        Positive-support kinds are integrated over u = log x, which keeps
        integrands with x^{-j} blow-up near zero well behaved; the normal
        kind integrates over the real line directly.
        """
        if not 0.0 < rel_tol <= 1e-2:
            raise ArgumentError(f"relative tolerance {rel_tol} outside (0, 1e-2]")
        # The weight (density times jacobian) is evaluated in log space first;
        # once it has decayed below exp(-800) the point cannot contribute, and
        # skipping it protects steep integrands from overflowing out there.
        if self._positive_support:

            def transformed(u: float) -> float:
                if u > 709.0 or u < -745.0:
                    return 0.0  # x leaves double range; weight tails are negligible there
                x = math.exp(u)
                log_weight = self._log_pdf(x) + u
                if not log_weight > -800.0:
                    return 0.0
                return _weighted(integrand, x, log_weight)

        else:

            def transformed(x: float) -> float:
                log_weight = self._log_pdf(x)
                if not log_weight > -800.0:
                    return 0.0
                return _weighted(integrand, x, log_weight)

        value, abserr = integrate.quad(
            transformed, -np.inf, np.inf, epsabs=0.0, epsrel=rel_tol, limit=200
        )
        if not math.isfinite(value) or abserr > max(rel_tol * abs(value), 1e-12):
            raise ComputationError(
                f"quadrature did not converge: estimate {value:.6g}, "
                f"error estimate {abserr:.2e} exceeds tolerance"
            )
        return value

    def _log_pdf(self, x: float) -> float:
        raise NotImplementedError


def _weighted(integrand: Callable[[float], float], x: float, log_weight: float) -> float:
    try:
        g = float(integrand(x))
    except OverflowError as exc:
        raise ComputationError(f"integrand overflowed at x = {x:.6g}") from exc
    return g * math.exp(log_weight)


def _exp_or_inf(log_value: float, note: str) -> MomentValue:
    """exp(log_value) as a MomentValue; values beyond double range become a flagged inf."""
    if log_value > 709.0:
        return MomentValue(math.inf, True, note)
    return MomentValue(math.exp(log_value))


class GammaProvider(MomentProvider):
    """X ~ Gamma(shape a, scale theta): E X^j = theta^j Gamma(a+j)/Gamma(a) for j > -a."""

    kind = "gamma"

    def __init__(self, shape: float, scale: float = 1.0) -> None:
        if not (shape > 0 and scale > 0):
            raise ArgumentError(f"gamma requires shape > 0 and scale > 0, got ({shape}, {scale})")
        super().__init__()
        self.shape = float(shape)
        self.scale = float(scale)

    def raw_moment_uncached(self, j: int) -> MomentValue:
        # Integer-step Gamma ratios are finite products: Gamma(a+j)/Gamma(a) is
        # prod(a+m) for m < j, and 1/prod(a-m) for m <= |j| when j < 0.  Unlike
        # a gammaln difference this loses no digits at large shape, where the
        # bound sums cancel to O(1/a) and ulp(gammaln(a)) would dominate them.
        if j == 0:
            return MomentValue(1.0)
        if j <= -self.shape:
            return MomentValue(
                math.inf, False, f"E X^{j} diverges for gamma with shape {self.shape}"
            )
        if j > 0:
            ratio = math.prod(self.shape + m for m in range(j))
        else:
            ratio = 1.0 / math.prod(self.shape - m for m in range(1, -j + 1))
        value = ratio * self.scale**j
        if math.isinf(value):
            return MomentValue(math.inf, True, f"E X^{j} overflows double precision")
        return MomentValue(value)

    def _log_pdf(self, x: float) -> float:
        a, th = self.shape, self.scale
        return (a - 1) * math.log(x) - x / th - special.gammaln(a) - a * math.log(th)


class LogNormalProvider(MomentProvider):
    """X ~ LogNormal(mu, sigma): E X^j = exp(j mu + j^2 sigma^2 / 2) for every integer j."""

    kind = "lognormal"

    def __init__(self, mu: float, sigma: float) -> None:
        if not sigma > 0:
            raise ArgumentError(f"lognormal requires sigma > 0, got {sigma}")
        super().__init__()
        self.mu = float(mu)
        self.sigma = float(sigma)

    def raw_moment_uncached(self, j: int) -> MomentValue:
        return _exp_or_inf(
            j * self.mu + 0.5 * j * j * self.sigma**2, f"E X^{j} overflows double precision"
        )

    def _log_pdf(self, x: float) -> float:
        z = (math.log(x) - self.mu) / self.sigma
        return -0.5 * z * z - math.log(x * self.sigma) - 0.5 * math.log(2 * math.pi)


class ExponentialProvider(MomentProvider):
    """X ~ Exponential(rate lambda): E X^j = j! / lambda^j for j >= 0, divergent for j <= -1."""

    kind = "exponential"

    def __init__(self, rate: float = 1.0) -> None:
        if not rate > 0:
            raise ArgumentError(f"exponential requires rate > 0, got {rate}")
        super().__init__()
        self.rate = float(rate)

    def raw_moment_uncached(self, j: int) -> MomentValue:
        if j <= -1:
            return MomentValue(math.inf, False, f"E X^{j} diverges for the exponential law")
        return MomentValue(math.factorial(j) / self.rate**j)

    def _log_pdf(self, x: float) -> float:
        return math.log(self.rate) - self.rate * x


class NormalProvider(MomentProvider):
    """X ~ Normal(mean, std); raw moments by the Gaussian recurrence."""

    kind = "normal"
    _positive_support = False

    def __init__(self, mean: float, std: float) -> None:
        if not std > 0:
            raise ArgumentError(f"normal requires std > 0, got {std}")
        super().__init__()
        self.loc = float(mean)
        self.std = float(std)

    def raw_moment_uncached(self, j: int) -> MomentValue:
        if j < 0:
            return MomentValue(
                math.inf, False, f"E X^{j} does not exist for a law with mass at zero"
            )
        # m_j = loc * m_{j-1} + (j-1) * std^2 * m_{j-2}
        prev, cur = 0.0, 1.0
        for order in range(1, j + 1):
            prev, cur = cur, self.loc * cur + (order - 1) * self.std**2 * prev
        return MomentValue(cur)

    def _log_pdf(self, x: float) -> float:
        z = (x - self.loc) / self.std
        return -0.5 * z * z - math.log(self.std) - 0.5 * math.log(2 * math.pi)


class EmpiricalProvider(MomentProvider):
    """Moments and expectations as plain sample means over a fixed sample."""

    kind = "empirical"

    def __init__(self, samples) -> None:
        super().__init__()
        arr = np.asarray(samples, dtype=float).ravel()
        if arr.size < 1:
            raise DataError("empirical provider needs at least one sample")
        if not np.all(np.isfinite(arr)):
            raise DataError("empirical samples must be finite")
        self.samples = arr

    @classmethod
    def from_file(cls, path) -> "EmpiricalProvider":
        return cls(load_samples(path))

    def raw_moment_uncached(self, j: int) -> MomentValue:
        if j == 0:
            return MomentValue(1.0)
        if j < 0:
            smallest = float(np.min(np.abs(self.samples)))
            if smallest == 0.0:
                return MomentValue(math.inf, False, "sample contains an exact zero")
            with np.errstate(over="ignore"):
                value = float(np.mean(self.samples**float(j)))
            if not math.isfinite(value):
                return MomentValue(math.inf, False, "negative-moment sample mean overflowed")
            if smallest < _EMPIRICAL_MIN_GUARD:
                return MomentValue(
                    value,
                    True,
                    f"high-variance estimate: sample minimum {smallest:.3g} is near zero",
                )
            return MomentValue(value)
        return MomentValue(float(np.mean(self.samples**float(j))))

    def expectation(
        self, integrand: Callable[[float], float], rel_tol: float = DEFAULT_REL_TOL
    ) -> float:
        del rel_tol  # sample mean has no tunable accuracy
        return kahan_sum([integrand(float(x)) for x in self.samples]) / self.samples.size


def load_samples(path) -> np.ndarray:
    """Read a newline-delimited numeric file; '#' starts a comment line."""
    try:
        arr = np.loadtxt(path, comments="#", dtype=float)
    except (OSError, ValueError) as exc:
        raise DataError(f"could not read sample file {path}: {exc}") from exc
    arr = np.atleast_1d(arr).ravel()
    if arr.size == 0:
        raise DataError(f"sample file {path} contains no values")
    return arr


def exact_log_gap(mp: MomentProvider) -> float | None:
    """Closed-form Jensen's gap for f = -log, where one is known.

    log-normal: sigma^2/2; gamma: log(shape) - digamma(shape) (scale-free);
    exponential: the Euler-Mascheroni constant.  Other kinds return None.
    """
    if isinstance(mp, LogNormalProvider):
        return 0.5 * mp.sigma**2
    if isinstance(mp, GammaProvider):
        return math.log(mp.shape) - float(special.digamma(mp.shape))
    if isinstance(mp, ExponentialProvider):
        return float(np.euler_gamma)
    return None


def kahan_sum(terms) -> float:
    """Compensated summation (Kahan); used wherever alternating terms cancel."""
    total = 0.0
    carry = 0.0
    for t in terms:
        y = t - carry
        s = total + y
        carry = (s - total) - y
        total = s
    return total
