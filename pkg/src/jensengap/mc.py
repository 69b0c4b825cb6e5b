"""Sample-mean tightening estimator for log E X from a positive-value sampler.

Replacing X by an n-sample mean X-bar concentrates the distribution, which
makes the order-k negative-log bounds tight; averaging the bound values
over m independent replicates gives an interval estimate of log E X with
standard errors:

    lower_r =  sum_j [ 1/j + b[k][j] Xbar_r^j / plug^j ] + log Xbar_r
    upper_r = -sum_j [ 1/j + b[k][j] plug^j / Xbar_r^j ] + log Xbar_r

with ``plug`` the grand mean over all n*m draws.  A geometric grid search
picks the smallest n whose log X-bar spread falls below a target standard
deviation, and normality diagnostics on log X-bar (skewness, excess
kurtosis, Q-Q correlation) report how trustworthy the interval is.

Randomness uses counter-based Philox streams: replicate r consumes the
stream jumped r blocks ahead of the seed key, so results are deterministic
and replicates could be evaluated in any order or in parallel.  Grid-probe
streams live in a disjoint jump range so the search never shares draws
with the final estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Iterator

import numpy as np
from scipy import stats

from .bounds import CoefficientTable, _check_k
from .errors import ArgumentError, ComputationError, DataError, NumericalError

__all__ = [
    "SampleFn",
    "NGrid",
    "McConfig",
    "NormalityDiagnostics",
    "McBoundEstimate",
    "GridSearchResult",
    "sample_mean_log_bounds",
    "grid_search_n",
    "estimate_with_auto_n",
    "normality_diagnostics",
    "distribution_sampler",
    "empirical_sampler",
]

#: A sampler draws ``size`` iid strictly positive values from the given stream.
SampleFn = Callable[[np.random.Generator, int], np.ndarray]

# Replicate r of the final estimate uses jump offset r; probe replicates for
# grid node i use offsets PROBE_JUMP_BASE + i * PROBE_NODE_STRIDE + r.  The
# ranges cannot collide as long as m stays below 2**40 and the probe count
# below 2**20, both absurdly above practical sizes.
_PROBE_JUMP_BASE = 1 << 40
_PROBE_NODE_STRIDE = 1 << 20

_MEAN_FLOOR = 1e-300
_LOG_RATIO_LIMIT = 700.0
_MIN_DIAGNOSTIC_SAMPLES = 8
_MAX_QQ_POINTS = 512


@dataclass(frozen=True)
class NGrid:
    """Geometric grid of candidate inner sample sizes."""

    min: int = 50
    max: int = 5_000_000
    ratio: float = 2.0

    def __post_init__(self) -> None:
        if self.min < 2:
            raise ArgumentError(f"n grid minimum must be >= 2, got {self.min}")
        if self.max < self.min:
            raise ArgumentError(f"n grid maximum {self.max} below minimum {self.min}")
        if not self.ratio > 1.0:
            raise ArgumentError(f"n grid ratio must exceed 1, got {self.ratio}")

    def sequence(self) -> Iterator[int]:
        n = self.min
        while n < self.max:
            yield n
            n = max(n + 1, int(math.ceil(n * self.ratio)))
        yield self.max


@dataclass(frozen=True)
class McConfig:
    """Estimator configuration; ``n=None`` requests the automatic grid search."""

    n: int | None = None
    m: int = 10_000
    k: int = 2
    seed: int = 0
    target_std: float = 0.3
    n_grid: NGrid = NGrid()
    m_probe: int = 200

    def __post_init__(self) -> None:
        if self.n is not None and self.n < 1:
            raise ArgumentError(f"inner sample size n must be >= 1, got {self.n}")
        if self.m < 2:
            raise ArgumentError(f"replicate count m must be >= 2, got {self.m}")
        _check_k(self.k)
        if not 0 <= self.seed < 2**64:
            raise ArgumentError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if not self.target_std > 0:
            raise ArgumentError(f"target std must be positive, got {self.target_std}")
        if self.m_probe < 2:
            raise ArgumentError(f"probe replicate count must be >= 2, got {self.m_probe}")


@dataclass(frozen=True)
class NormalityDiagnostics:
    """Gaussianity summary of a log X-bar sample.

    ``qq_correlation`` is the Pearson correlation of the full Q-Q point
    cloud (standard-normal quantiles at plotting positions (r - 0.5)/m
    against the sorted standardized sample); ``qq_points`` stores an
    evenly thinned subset of at most 512 pairs for plotting.  Degenerate
    zero-variance samples carry NaN shape statistics, a flag, and
    qq_correlation 1.
    """

    skewness: float
    excess_kurtosis: float
    qq_correlation: float
    qq_points: tuple[tuple[float, float], ...]
    flags: tuple[str, ...] = ()


@dataclass(frozen=True)
class McBoundEstimate:
    """Interval estimate of log E X with replicate standard errors."""

    lower: float
    upper: float
    lower_se: float
    upper_se: float
    n_used: int
    m: int
    k: int
    seed: int
    plug_in_mean: float
    diagnostics: NormalityDiagnostics | None
    flags: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        slack = 2.0 * (self.lower_se + self.upper_se)
        if self.lower > self.upper + slack:
            raise ComputationError(
                f"inconsistent estimate: lower {self.lower!r} exceeds upper "
                f"{self.upper!r} beyond the 2-SE slack {slack!r}"
            )

    def to_json_dict(self) -> dict:
        record: dict = {
            "lower": self.lower,
            "upper": self.upper,
            "lower_se": self.lower_se,
            "upper_se": self.upper_se,
            "n": self.n_used,
            "m": self.m,
            "k": self.k,
            "seed": self.seed,
            "plug_in_mean": self.plug_in_mean,
            "flags": list(self.flags),
            "diagnostics": None,
        }
        if self.diagnostics is not None:
            d = self.diagnostics
            record["diagnostics"] = {
                "skewness": d.skewness,
                "kurtosis": d.excess_kurtosis,
                "qq_correlation": d.qq_correlation,
                "qq_points": [list(p) for p in d.qq_points],
                "flags": list(d.flags),
            }
        return record


@dataclass(frozen=True)
class GridSearchResult:
    """Outcome of the n search: chosen n and the probe trace that led there."""

    n: int
    achieved_std: float
    achieved: bool
    probes: tuple[tuple[int, float], ...]


def _replicate_rng(seed: int, offset: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed).jumped(offset))


def _replicate_mean(sampler: SampleFn, rng: np.random.Generator, n: int, label: str) -> float:
    draws = np.asarray(sampler(rng, n), dtype=np.float64)
    if draws.shape != (n,):
        raise DataError(f"sampler returned shape {draws.shape}, expected ({n},) ({label})")
    if not np.all(np.isfinite(draws)):
        idx = int(np.flatnonzero(~np.isfinite(draws))[0])
        raise DataError(f"non-finite draw at {label}, position {idx}: {draws[idx]!r}")
    if np.any(draws <= 0.0):
        idx = int(np.flatnonzero(draws <= 0.0)[0])
        raise DataError(f"nonpositive draw at {label}, position {idx}: {draws[idx]!r}")
    mean = float(draws.mean())
    if mean < _MEAN_FLOOR:
        raise NumericalError(f"sample mean underflow at {label}: {mean!r}")
    return mean


def sample_mean_log_bounds(sampler: SampleFn, cfg: McConfig) -> McBoundEstimate:
    """Estimate log E X as an interval from m replicates of an n-sample mean.

    Requires a resolved ``cfg.n``; use :func:`estimate_with_auto_n` (or run
    :func:`grid_search_n` yourself) when the inner size should be searched.
    Attaches diagnostics of log X-bar whenever m allows them (>= 8).
    """
    if cfg.n is None:
        raise ArgumentError("cfg.n is unresolved; run grid_search_n first or set n")
    n, m, k = cfg.n, cfg.m, cfg.k

    means = np.empty(m, dtype=np.float64)
    for r in range(m):
        means[r] = _replicate_mean(sampler, _replicate_rng(cfg.seed, r), n, f"replicate {r}")

    plug = float(means.mean())
    log_means = np.log(means)
    delta = log_means - math.log(plug)

    js = np.arange(1, 2 * k, dtype=np.float64)
    worst = float(np.max(np.abs(delta))) * js[-1]
    if worst > _LOG_RATIO_LIMIT:
        raise NumericalError(
            f"replicate-to-plug-in log ratio {worst:.1f} exceeds {_LOG_RATIO_LIMIT:g}; "
            "bound terms would overflow"
        )
    b = np.asarray(CoefficientTable.for_order(k).b)
    harmonic = float(np.sum(1.0 / js))
    ratio_pow = np.exp(np.outer(delta, js))  # (m, 2k-1)

    lower_r = harmonic + ratio_pow @ b + log_means
    upper_r = -(harmonic + (1.0 / ratio_pow) @ b) + log_means

    diagnostics = normality_diagnostics(log_means) if m >= _MIN_DIAGNOSTIC_SAMPLES else None
    flags = () if diagnostics is not None else ("diagnostics unavailable: m < 8",)
    return McBoundEstimate(
        lower=float(lower_r.mean()),
        upper=float(upper_r.mean()),
        lower_se=float(lower_r.std(ddof=1)) / math.sqrt(m),
        upper_se=float(upper_r.std(ddof=1)) / math.sqrt(m),
        n_used=n,
        m=m,
        k=k,
        seed=cfg.seed,
        plug_in_mean=plug,
        diagnostics=diagnostics,
        flags=flags,
    )


def grid_search_n(sampler: SampleFn, cfg: McConfig) -> GridSearchResult:
    """Smallest grid n whose empirical std of log X-bar meets the target.

    Each grid node draws ``cfg.m_probe`` fresh replicates on probe-only
    streams.  If no node qualifies, the grid maximum is returned with
    ``achieved=False`` so callers can surface the shortfall rather than
    silently trusting the estimate.
    """
    probes: list[tuple[int, float]] = []
    for node, n in enumerate(cfg.n_grid.sequence()):
        base = _PROBE_JUMP_BASE + node * _PROBE_NODE_STRIDE
        log_means = np.log(
            [
                _replicate_mean(
                    sampler,
                    _replicate_rng(cfg.seed, base + r),
                    n,
                    f"grid probe n={n}, replicate {r}",
                )
                for r in range(cfg.m_probe)
            ]
        )
        std = float(np.std(log_means, ddof=1))
        probes.append((n, std))
        if std <= cfg.target_std:
            return GridSearchResult(n=n, achieved_std=std, achieved=True, probes=tuple(probes))
    n_last, std_last = probes[-1]
    return GridSearchResult(n=n_last, achieved_std=std_last, achieved=False, probes=tuple(probes))


def estimate_with_auto_n(
    sampler: SampleFn, cfg: McConfig
) -> tuple[McBoundEstimate, GridSearchResult | None]:
    """Resolve ``n`` (searching when unset) and run the estimator.

    A failed search still produces an estimate at the grid maximum, with a
    flag recording that the spread target was not met.
    """
    if cfg.n is not None:
        return sample_mean_log_bounds(sampler, cfg), None
    found = grid_search_n(sampler, cfg)
    estimate = sample_mean_log_bounds(sampler, replace(cfg, n=found.n))
    if not found.achieved:
        estimate = replace(
            estimate,
            flags=estimate.flags
            + (
                f"spread target not achieved: std {found.achieved_std:.4g} > "
                f"{cfg.target_std:g} at grid maximum n={found.n}",
            ),
        )
    return estimate, found


def normality_diagnostics(log_mean_samples: np.ndarray) -> NormalityDiagnostics:
    """Shape statistics and Q-Q correlation for a (log X-bar) sample."""
    samples = np.asarray(log_mean_samples, dtype=np.float64).ravel()
    count = samples.size
    if count < _MIN_DIAGNOSTIC_SAMPLES:
        raise ArgumentError(
            f"diagnostics require at least {_MIN_DIAGNOSTIC_SAMPLES} samples, got {count}"
        )
    ordered = np.sort(samples)
    theoretical = stats.norm.ppf((np.arange(1, count + 1) - 0.5) / count)

    # Treat numerically constant samples (spread at float-noise level) as
    # degenerate too: their moment ratios are pure cancellation noise.
    if ordered[-1] - ordered[0] <= 1e-12 * max(1.0, abs(float(samples.mean()))):
        standardized = np.zeros(count)
        skewness = excess_kurtosis = math.nan
        qq_correlation = 1.0
        flags: tuple[str, ...] = ("degenerate sample: zero variance",)
    else:
        standardized = (ordered - samples.mean()) / samples.std(ddof=1)
        skewness = float(stats.skew(samples, bias=False))
        excess_kurtosis = float(stats.kurtosis(samples, bias=False))
        qq_correlation = float(np.corrcoef(theoretical, standardized)[0, 1])
        flags = ()

    keep = np.unique(np.linspace(0, count - 1, min(count, _MAX_QQ_POINTS)).round().astype(int))
    points = tuple((float(theoretical[i]), float(standardized[i])) for i in keep)
    return NormalityDiagnostics(
        skewness=skewness,
        excess_kurtosis=excess_kurtosis,
        qq_correlation=qq_correlation,
        qq_points=points,
        flags=flags,
    )


def distribution_sampler(kind: str, **params: float) -> SampleFn:
    """Sampler factory for the positive analytic families.

    Supports lognormal(mu, sigma), gamma(shape, scale), exponential(rate).
    """
    if kind == "lognormal":
        mu, sigma = float(params.pop("mu")), float(params.pop("sigma"))
        if sigma <= 0:
            raise ArgumentError(f"lognormal sampler requires sigma > 0, got {sigma}")
        fn: SampleFn = lambda rng, size: rng.lognormal(mu, sigma, size)
    elif kind == "gamma":
        shape, scale = float(params.pop("shape")), float(params.pop("scale", 1.0))
        if shape <= 0 or scale <= 0:
            raise ArgumentError(f"gamma sampler requires shape, scale > 0, got ({shape}, {scale})")
        fn = lambda rng, size: rng.gamma(shape, scale, size)
    elif kind == "exponential":
        rate = float(params.pop("rate", 1.0))
        if rate <= 0:
            raise ArgumentError(f"exponential sampler requires rate > 0, got {rate}")
        fn = lambda rng, size: rng.exponential(1.0 / rate, size)
    else:
        raise ArgumentError(f"no sampler for distribution kind {kind!r}")
    if params:
        raise ArgumentError(f"unused sampler parameters for {kind!r}: {sorted(params)}")
    return fn


def empirical_sampler(samples: np.ndarray) -> SampleFn:
    """Resample-with-replacement sampler over a fixed positive sample."""
    values = np.asarray(samples, dtype=np.float64).ravel()
    if values.size == 0:
        raise ArgumentError("empirical sampler requires a non-empty sample")
    if not np.all(np.isfinite(values)) or np.any(values <= 0.0):
        raise DataError("empirical sampler requires strictly positive finite samples")
    return lambda rng, size: rng.choice(values, size=size, replace=True)
