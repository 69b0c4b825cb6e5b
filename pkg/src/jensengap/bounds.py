"""Order-k lower/upper bound kernels for Jensen's gap E f(X) - f(E X).

An order-k bound consumes moments (and mixed expectations) up to order
2k - 1.  The combinatorial coefficients

    a[i][j] = (-1)^j / (j! (i-j)!)          (general kernels)
    b[k][j] = ((-1)^j / j) * C(2k-1, j)     (negative-log kernels)

are built from exact integer factorials/binomials as rationals and only
converted to floats at the end, so identities such as

    sum_{j=1}^{2k-1} 1/j  ==  -sum_{j=1}^{2k-1} b[k][j]

hold exactly.  Alternating sums of floating terms are reduced with
compensated (Kahan) summation: near the order cap the b coefficients grow
like C(15, 7) and naive accumulation loses digits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .distributions import MomentProvider, MomentValue, kahan_sum
from .errors import ArgumentError, ComputationError, DomainError

__all__ = [
    "K_MAX",
    "BoundOrder",
    "coeff_a",
    "coeff_b",
    "CoefficientTable",
    "harmonic_minus_b_identity",
    "FunctionSpec",
    "neg_log_function",
    "exp_function",
    "BoundReport",
    "general_bounds",
    "general_bounds_zero_mean",
    "log_bounds_central",
    "log_bounds_raw",
    "simple_cov_bounds",
    "kahan_sum",
]

#: Order cap.  Beyond moments of order 15 the coefficient magnitudes and the
#: moment growth leave double precision unreliable, so higher orders are a
#: hard error instead of a silent loss of digits.
K_MAX = 8

BoundOrder = int


def _check_k(k: int) -> int:
    k = int(k)
    if not 1 <= k <= K_MAX:
        raise ArgumentError(f"bound order k must be in [1, {K_MAX}], got {k}")
    return k


def _coeff_a_fraction(i: int, j: int) -> Fraction:
    return Fraction((-1) ** j, math.factorial(j) * math.factorial(i - j))


def _coeff_b_fraction(k: int, j: int) -> Fraction:
    return Fraction((-1) ** j * math.comb(2 * k - 1, j), j)


def coeff_a(i: int, j: int) -> float:
    """a[i][j] = (-1)^j / (j! (i-j)!) for 1 <= i <= 2*K_MAX-1, 0 <= j <= i."""
    i, j = int(i), int(j)
    if not 1 <= i <= 2 * K_MAX - 1:
        raise ArgumentError(f"index i must be in [1, {2 * K_MAX - 1}], got {i}")
    if not 0 <= j <= i:
        raise ArgumentError(f"index j must be in [0, {i}], got {j}")
    return float(_coeff_a_fraction(i, j))


def coeff_b(k: BoundOrder, j: int) -> float:
    """b[k][j] = ((-1)^j / j) * C(2k-1, j) for 1 <= j <= 2k-1."""
    k = _check_k(k)
    j = int(j)
    if not 1 <= j <= 2 * k - 1:
        raise ArgumentError(f"index j must be in [1, {2 * k - 1}], got {j}")
    return float(_coeff_b_fraction(k, j))


@dataclass(frozen=True)
class CoefficientTable:
    """All a- and b-coefficients needed by an order-k bound, precomputed."""

    k: BoundOrder
    a: tuple[tuple[float, ...], ...] = field(repr=False)  # a[i][j], i = 1..2k-1
    b: tuple[float, ...] = field(repr=False)  # b[j], j = 1..2k-1

    @classmethod
    def for_order(cls, k: BoundOrder) -> "CoefficientTable":
        k = _check_k(k)
        a = tuple(
            tuple(float(_coeff_a_fraction(i, j)) for j in range(i + 1))
            for i in range(1, 2 * k)
        )
        b = tuple(float(_coeff_b_fraction(k, j)) for j in range(1, 2 * k))
        return cls(k=k, a=a, b=b)

    def a_at(self, i: int, j: int) -> float:
        return self.a[i - 1][j]

    def b_at(self, j: int) -> float:
        return self.b[j - 1]


def harmonic_minus_b_identity(k: BoundOrder) -> float:
    """sum_{j<=2k-1} 1/j + sum_{j<=2k-1} b[k][j]; contractually 0 (self-test hook).

    Both sums are carried out in exact rational arithmetic, so the returned
    float is exactly 0.0 for every admissible k.
    """
    k = _check_k(k)
    total = Fraction(0)
    for j in range(1, 2 * k):
        total += Fraction(1, j) + _coeff_b_fraction(k, j)
    return float(total)


@dataclass(frozen=True)
class FunctionSpec:
    """A function together with its derivatives and an open domain.

    ``derivative(order, x)`` must return f^(order)(x) for orders 0..2k-1 on
    the declared domain; nonnegativity of f^(2k) (the hypothesis behind the
    bound direction) is the caller's declaration and is not verified here.
    """

    name: str
    derivative: Callable[[int, float], float]
    domain: tuple[float, float] = (-math.inf, math.inf)

    def deriv(self, order: int, x: float) -> float:
        if order < 0:
            raise ArgumentError(f"derivative order must be >= 0, got {order}")
        lo, hi = self.domain
        if not lo < x < hi:
            raise DomainError(f"{self.name} is not defined at x={x:g}")
        return self.derivative(order, x)


def neg_log_function() -> FunctionSpec:
    """f(x) = -log x on (0, inf); f^(i)(x) = (-1)^i (i-1)! / x^i for i >= 1."""

    def derivative(order: int, x: float) -> float:
        if order == 0:
            return -math.log(x)
        return (-1.0) ** order * math.factorial(order - 1) * x ** (-order)

    return FunctionSpec(name="neg-log", derivative=derivative, domain=(0.0, math.inf))


def exp_function(scale: float = 1.0) -> FunctionSpec:
    """f(x) = exp(scale * x) on the real line; every even derivative is positive."""

    def derivative(order: int, x: float) -> float:
        return scale**order * math.exp(scale * x)

    return FunctionSpec(name=f"exp({scale:g}x)", derivative=derivative)


@dataclass(frozen=True)
class BoundReport:
    """A computed (lower, upper) pair for Jensen's gap at one order.

    ``upper`` may be +inf when a required negative moment does not exist;
    in that case ``flags`` names the missing piece.  ``exact`` is filled
    whenever the producing operation knows the gap in closed form.
    """

    method: str
    k: BoundOrder
    lower: float
    upper: float
    exact: float | None = None
    flags: tuple[str, ...] = ()
    meta: tuple[tuple[str, str], ...] = ()

    def __post_init__(self) -> None:
        if math.isfinite(self.lower) and math.isfinite(self.upper):
            slack = 1e-9 * max(1.0, abs(self.lower), abs(self.upper))
            if self.lower > self.upper + slack:
                raise ComputationError(
                    f"inconsistent bound pair: lower {self.lower!r} > upper {self.upper!r}"
                )

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def meta_dict(self) -> dict[str, str]:
        return dict(self.meta)


def _meta(mp: MomentProvider) -> tuple[tuple[str, str], ...]:
    params = {
        "gamma": lambda: f"shape={mp.shape:g}, scale={mp.scale:g}",
        "lognormal": lambda: f"mu={mp.mu:g}, sigma={mp.sigma:g}",
        "exponential": lambda: f"rate={mp.rate:g}",
        "normal": lambda: f"mean={mp.loc:g}, std={mp.std:g}",
        "empirical": lambda: f"n={mp.samples.size}",
    }
    detail = params.get(mp.kind, lambda: "")()
    return (("distribution", mp.kind), ("parameters", detail))


def general_bounds(f: FunctionSpec, mp: MomentProvider, k: BoundOrder) -> BoundReport:
    """Order-k bounds for any f with f^(2k) >= 0 (caller-declared).

        lower =  sum_i a[i][0] f^(i)(E X) E (X - E X)^i
        upper = -sum_i a[i][i] E{ f^(i)(X) (X - E X)^i }

    Mixed upper-bound expectations go through the provider's expectation
    engine.  Nonexistent moments degrade the affected side to a flagged
    infinity; quadrature failures surface as ComputationError naming the
    term.
    """
    k = _check_k(k)
    table = CoefficientTable.for_order(k)
    mean = mp.mean()
    flags: list[str] = []

    low_terms: list[float] = []
    lower = -math.inf
    for i in range(1, 2 * k):
        cm = mp.central_moment(i)
        if not cm.exists:
            flags.append(f"lower-term-{i}-nonexistent: {cm.note}")
            break
        low_terms.append(table.a_at(i, 0) * f.deriv(i, mean) * cm.value)
    else:
        lower = kahan_sum(low_terms)

    up_terms: list[float] = []
    for i in range(1, 2 * k):
        try:
            mixed = mp.expectation(lambda x, i=i: f.deriv(i, x) * (x - mean) ** i)
        except ComputationError as exc:
            raise ComputationError(f"upper-bound term i={i}: {exc}") from exc
        up_terms.append(-table.a_at(i, i) * mixed)
    upper = kahan_sum(up_terms)

    return BoundReport(
        method="general-central",
        k=k,
        lower=lower,
        upper=upper,
        flags=tuple(flags),
        meta=_meta(mp) + (("function", f.name),),
    )


def general_bounds_zero_mean(f: FunctionSpec, mp: MomentProvider, k: BoundOrder) -> BoundReport:
    """Zero-mean corollary: raw moments at the origin replace central ones.

        lower =  sum_i a[i][0] f^(i)(0) E X^i
        upper = -sum_i a[i][i] E{ f^(i)(X) X^i }
    """
    k = _check_k(k)
    mean = mp.mean()
    if abs(mean) > 1e-12:
        raise ArgumentError(f"zero-mean form requires |E X| <= 1e-12, got {mean!r}")
    table = CoefficientTable.for_order(k)
    flags: list[str] = []

    low_terms: list[float] = []
    lower = -math.inf
    for i in range(1, 2 * k):
        raw = mp.raw_moment(i)
        if not raw.exists:
            flags.append(f"lower-term-{i}-nonexistent: {raw.note}")
            break
        low_terms.append(table.a_at(i, 0) * f.deriv(i, 0.0) * raw.value)
    else:
        lower = kahan_sum(low_terms)

    up_terms = []
    for i in range(1, 2 * k):
        try:
            mixed = mp.expectation(lambda x, i=i: f.deriv(i, x) * x**i)
        except ComputationError as exc:
            raise ComputationError(f"upper-bound term i={i}: {exc}") from exc
        up_terms.append(-table.a_at(i, i) * mixed)
    upper = kahan_sum(up_terms)

    return BoundReport(
        method="general-raw",
        k=k,
        lower=lower,
        upper=upper,
        flags=tuple(flags),
        meta=_meta(mp) + (("function", f.name),),
    )


def log_bounds_central(mp: MomentProvider, k: BoundOrder) -> BoundReport:
    """Central-moment bounds on the gap of f = -log for a positive X.

        lower =  sum_i ((-1)^i / i) (E X)^(-i) E (X - E X)^i
        upper = -sum_i (1/i) E{ X^(-i) (X - E X)^i }
    """
    k = _check_k(k)
    mean = mp.mean()
    flags: list[str] = []

    low_terms: list[float] = []
    lower = -math.inf
    for i in range(1, 2 * k):
        cm = mp.central_moment(i)
        if not cm.exists:
            flags.append(f"lower-term-{i}-nonexistent: {cm.note}")
            break
        low_terms.append(((-1.0) ** i / i) * mean ** (-i) * cm.value)
    else:
        lower = kahan_sum(low_terms)

    up_terms = []
    for i in range(1, 2 * k):
        try:
            mixed = mp.expectation(lambda x, i=i: x ** (-i) * (x - mean) ** i)
        except ComputationError as exc:
            raise ComputationError(f"upper-bound term i={i}: {exc}") from exc
        up_terms.append(-(1.0 / i) * mixed)
    upper = kahan_sum(up_terms)

    return BoundReport(
        method="log-central", k=k, lower=lower, upper=upper,
        exact=None, flags=tuple(flags), meta=_meta(mp),
    )


def log_bounds_raw(mp: MomentProvider, k: BoundOrder) -> BoundReport:
    """Raw-moment form of the negative-log bounds (equivalent to the central form).

        lower =  sum_j [ 1/j + b[k][j] E X^j  / (E X)^j ]
        upper = -sum_j [ 1/j + b[k][j] E X^-j * (E X)^j ]

    A nonexistent negative moment only degrades the upper side: it is
    reported as +inf with a flag while the lower side stays finite.
    """
    k = _check_k(k)
    table = CoefficientTable.for_order(k)
    mean = mp.mean()
    flags: list[str] = []

    low_terms: list[float] = []
    lower = -math.inf
    for j in range(1, 2 * k):
        raw = mp.raw_moment(j)
        if not raw.exists or not math.isfinite(raw.value):
            flags.append(f"lower-term-{j}-nonexistent: {raw.note}")
            break
        low_terms.append(1.0 / j + table.b_at(j) * raw.value / mean**j)
    else:
        lower = kahan_sum(low_terms)

    up_terms: list[float] = []
    upper = math.inf
    for j in range(1, 2 * k):
        neg = mp.raw_moment(-j)
        if not neg.exists or not math.isfinite(neg.value):
            flags.append(f"upper-nonexistent: {neg.note}")
            break
        up_terms.append(1.0 / j + table.b_at(j) * neg.value * mean**j)
    else:
        upper = -kahan_sum(up_terms)

    return BoundReport(
        method="log-raw", k=k, lower=lower, upper=upper, flags=tuple(flags), meta=_meta(mp)
    )


def simple_cov_bounds(f: FunctionSpec, mp: MomentProvider) -> BoundReport:
    """First-order covariance bound: 0 <= gap <= E{X f'(X)} - E X E{f'(X)}.

    For f = -log this is E X * E X^-1 - 1.  It coincides with the k = 1
    raw-moment log bound.
    """
    mean = mp.mean()
    try:
        x_fprime = mp.expectation(lambda x: x * f.deriv(1, x))
        fprime = mp.expectation(lambda x: f.deriv(1, x))
    except ComputationError as exc:
        raise ComputationError(f"covariance bound: {exc}") from exc
    upper = x_fprime - mean * fprime
    return BoundReport(
        method="simple-cov", k=1, lower=0.0, upper=upper,
        meta=_meta(mp) + (("function", f.name),),
    )
