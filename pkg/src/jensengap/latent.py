"""Linear-Gaussian latent-variable model with an exact log-marginal oracle.

The decoder maps a standard-normal latent z through x = W z + bias + noise
with isotropic noise variance, so the marginal p(x) is the Gaussian
N(bias, W W^T + noise * I) and its log-density is computable exactly.  The
encoder is an affine-mean, diagonal-covariance Gaussian proposal q(z|x);
with orthogonal decoder columns the true posterior has exactly this shape,
which lets a controlled covariance mismatch be injected while keeping the
mean map exact.

Importance ratios R_x(Z) = p(x|Z) p(Z) / q(Z|x) drawn under q are strictly
positive with E R_x = p(x), so the sample-mean tightening estimator can be
validated end-to-end against the oracle.  All densities are evaluated in
log-space and the ratio exponentiated last.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ArgumentError, DataError, ModelError, NumericalError
from .mc import SampleFn

__all__ = [
    "LatentGaussianModel",
    "with_posterior_encoder",
    "log_marginal_oracle",
    "importance_ratio_sampler",
    "BenchmarkPair",
    "make_benchmark_suite",
    "model_to_json_dict",
    "model_from_json_dict",
    "DEFAULT_DECODER_NOISE",
]

#: Decoder noise variance used by generated models.
DEFAULT_DECODER_NOISE = 0.3

_LOG_RATIO_LIMIT = 700.0
_TWO_PI = 2.0 * math.pi

# The generated-suite mismatch spectrum, cycled by pair index: four exact
# posteriors, then encoder variances inflated 2x, 4x, 8x.  Wider inflation
# produces heavier-tailed ratios, which is the single controlled factor.
_MISMATCH_CYCLE = (1.0, 1.0, 1.0, 1.0, 2.0, 2.0, 2.0, 4.0, 4.0, 8.0)

# Latent dims per mismatch level, tuned so that mismatched pairs land in an
# auto-n regime where log X-bar is near the spread target rather than so
# concentrated that the intervals collapse below their own plug-in noise.
_MISMATCH_DIMS = {2.0: 15, 4.0: 5, 8.0: 3}


def _as_vector(value, size: int, name: str) -> np.ndarray:
    arr = np.asarray(value, dtype=np.float64)
    if arr.shape != (size,):
        raise ArgumentError(f"{name} must have shape ({size},), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ArgumentError(f"{name} contains non-finite entries")
    return arr


@dataclass(frozen=True, eq=False)
class LatentGaussianModel:
    """Decoder x = W z + bias + N(0, noise_variance I), encoder q(z|x)."""

    weight: np.ndarray = field(repr=False)  # (D, d)
    bias: np.ndarray = field(repr=False)  # (D,)
    noise_variance: float
    encoder_weight: np.ndarray = field(repr=False)  # (d, D)
    encoder_bias: np.ndarray = field(repr=False)  # (d,)
    encoder_variances: np.ndarray = field(repr=False)  # (d,)

    def __post_init__(self) -> None:
        w = np.asarray(self.weight, dtype=np.float64)
        if w.ndim != 2:
            raise ArgumentError(f"decoder weight must be a matrix, got ndim {w.ndim}")
        if not np.all(np.isfinite(w)):
            raise ArgumentError("decoder weight contains non-finite entries")
        data_dim, latent_dim = w.shape
        object.__setattr__(self, "weight", w)
        object.__setattr__(self, "bias", _as_vector(self.bias, data_dim, "decoder bias"))
        if not self.noise_variance > 0:
            raise ArgumentError(f"decoder noise variance must be positive, got {self.noise_variance}")
        ew = np.asarray(self.encoder_weight, dtype=np.float64)
        if ew.shape != (latent_dim, data_dim):
            raise ArgumentError(
                f"encoder weight must have shape ({latent_dim}, {data_dim}), got {ew.shape}"
            )
        if not np.all(np.isfinite(ew)):
            raise ArgumentError("encoder weight contains non-finite entries")
        object.__setattr__(self, "encoder_weight", ew)
        object.__setattr__(
            self, "encoder_bias", _as_vector(self.encoder_bias, latent_dim, "encoder bias")
        )
        ev = _as_vector(self.encoder_variances, latent_dim, "encoder variances")
        if not np.all(ev > 0):
            raise ArgumentError("encoder variances must all be positive")
        object.__setattr__(self, "encoder_variances", ev)
        object.__setattr__(self, "noise_variance", float(self.noise_variance))

    @property
    def latent_dim(self) -> int:
        return self.weight.shape[1]

    @property
    def data_dim(self) -> int:
        return self.weight.shape[0]

    def encoder_mean(self, x: np.ndarray) -> np.ndarray:
        return self.encoder_weight @ x + self.encoder_bias

    def sample_data_point(self, rng: np.random.Generator) -> np.ndarray:
        z = rng.standard_normal(self.latent_dim)
        noise = rng.standard_normal(self.data_dim) * math.sqrt(self.noise_variance)
        return self.weight @ z + self.bias + noise


def with_posterior_encoder(
    weight: np.ndarray,
    bias: np.ndarray,
    noise_variance: float,
    variance_scale: float = 1.0,
) -> LatentGaussianModel:
    """Build a model whose encoder is the exact posterior, optionally widened.

    The posterior covariance (I + W^T W / noise)^{-1} is diagonal exactly
    when W^T W is; decoders violating that cannot carry a diagonal-encoder
    posterior and are rejected.  ``variance_scale`` multiplies the posterior
    variances, leaving the mean map exact — scale 1 is the perfect proposal.
    """
    w = np.asarray(weight, dtype=np.float64)
    if w.ndim != 2:
        raise ArgumentError("decoder weight must be a matrix")
    if not variance_scale > 0:
        raise ArgumentError(f"encoder variance scale must be positive, got {variance_scale}")
    gram = w.T @ w
    off_diag = gram - np.diag(np.diag(gram))
    scale = max(1.0, float(np.max(np.abs(np.diag(gram)))))
    if np.max(np.abs(off_diag)) > 1e-10 * scale:
        raise ModelError(
            "decoder columns are not orthogonal (W^T W not diagonal); the exact "
            "posterior covariance is not diagonal for this decoder"
        )
    post_var = 1.0 / (1.0 + np.diag(gram) / noise_variance)
    mean_map = (post_var[:, None] * w.T) / noise_variance
    return LatentGaussianModel(
        weight=w,
        bias=np.asarray(bias, dtype=np.float64),
        noise_variance=float(noise_variance),
        encoder_weight=mean_map,
        encoder_bias=-mean_map @ np.asarray(bias, dtype=np.float64),
        encoder_variances=variance_scale * post_var,
    )


def log_marginal_oracle(model: LatentGaussianModel, x: np.ndarray) -> float:
    """Exact log p(x) = log N(x; bias, W W^T + noise I) via Cholesky."""
    x = _as_vector(x, model.data_dim, "data point")
    cov = model.weight @ model.weight.T + model.noise_variance * np.eye(model.data_dim)
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise ModelError(f"marginal covariance is not positive definite: {exc}") from exc
    white = np.linalg.solve(chol, x - model.bias)
    log_det = 2.0 * float(np.sum(np.log(np.diag(chol))))
    return -0.5 * (model.data_dim * math.log(_TWO_PI) + log_det + float(white @ white))


def importance_ratio_sampler(model: LatentGaussianModel, x: np.ndarray) -> SampleFn:
    """iid draws of R_x(Z) = p(x|Z) p(Z) / q(Z|x) for Z ~ q(.|x).

    The log-ratio is assembled from the three Gaussian log-densities and
    exponentiated last; values beyond exp(700) raise rather than overflow.
    """
    x = _as_vector(x, model.data_dim, "data point")
    d = model.latent_dim
    q_mean = model.encoder_mean(x)
    q_std = np.sqrt(model.encoder_variances)
    log_q_norm = -0.5 * (d * math.log(_TWO_PI) + float(np.sum(np.log(model.encoder_variances))))
    noise = model.noise_variance
    lik_norm = -0.5 * model.data_dim * math.log(_TWO_PI * noise)
    prior_norm = -0.5 * d * math.log(_TWO_PI)

    def sampler(rng: np.random.Generator, size: int) -> np.ndarray:
        eps = rng.standard_normal((size, d))
        z = q_mean + eps * q_std
        resid = x - z @ model.weight.T - model.bias  # (size, D)
        log_lik = lik_norm - 0.5 * np.einsum("ij,ij->i", resid, resid) / noise
        log_prior = prior_norm - 0.5 * np.einsum("ij,ij->i", z, z)
        log_q = log_q_norm - 0.5 * np.einsum("ij,ij->i", eps, eps)
        log_ratio = log_lik + log_prior - log_q
        peak = float(np.max(log_ratio))
        if peak > _LOG_RATIO_LIMIT:
            raise NumericalError(
                f"importance log-ratio {peak:.1f} exceeds {_LOG_RATIO_LIMIT:g}; "
                "ratio would overflow"
            )
        return np.exp(log_ratio)

    return sampler


@dataclass(frozen=True, eq=False)
class BenchmarkPair:
    """One generated (model, data point) with its mismatch level and seed."""

    index: int
    model: LatentGaussianModel
    x: np.ndarray = field(repr=False)
    mismatch: float
    seed: int


def make_benchmark_suite(seed: int, count: int) -> list[BenchmarkPair]:
    """Generate ``count`` seeded (model, x) pairs over a mismatch spread.

    Pair i derives everything from the stream jumped i blocks past the
    master key, so any prefix of the suite is independent of ``count``.
    The mismatch spectrum cycles through encoder-variance multipliers
    {1, 2, 4, 8}; latent dimension varies with the level so each stratum
    lands in a usable estimator regime.  The data point is sampled from
    the model itself.
    """
    if count < 1:
        raise ArgumentError(f"suite size must be >= 1, got {count}")
    pairs: list[BenchmarkPair] = []
    for i in range(count):
        rng = np.random.Generator(np.random.Philox(key=seed).jumped(i))
        mismatch = _MISMATCH_CYCLE[i % len(_MISMATCH_CYCLE)]
        d = _MISMATCH_DIMS.get(mismatch, 2 + (i // 10) % 4)
        data_dim = d + 2
        q, _ = np.linalg.qr(rng.standard_normal((data_dim, d)))
        col_scales = np.exp(rng.uniform(math.log(0.5), math.log(2.0), size=d))
        weight = q * col_scales
        bias = 0.5 * rng.standard_normal(data_dim)
        model = with_posterior_encoder(
            weight, bias, DEFAULT_DECODER_NOISE, variance_scale=mismatch
        )
        x = model.sample_data_point(rng)
        pair_seed = int(rng.integers(0, 2**63))
        pairs.append(BenchmarkPair(index=i, model=model, x=x, mismatch=mismatch, seed=pair_seed))
    return pairs


def model_to_json_dict(
    model: LatentGaussianModel,
    data_points: Sequence[np.ndarray] = (),
    seed: int | None = None,
) -> dict:
    """JSON-ready dict: dims, row-major matrices, variances, data points."""
    record: dict = {
        "latent_dim": model.latent_dim,
        "data_dim": model.data_dim,
        "weight": [[float(v) for v in row] for row in model.weight],
        "bias": [float(v) for v in model.bias],
        "noise_variance": model.noise_variance,
        "encoder_weight": [[float(v) for v in row] for row in model.encoder_weight],
        "encoder_bias": [float(v) for v in model.encoder_bias],
        "encoder_variances": [float(v) for v in model.encoder_variances],
        "data_points": [[float(v) for v in np.asarray(p).ravel()] for p in data_points],
    }
    if seed is not None:
        record["seed"] = int(seed)
    return record


def model_from_json_dict(record: dict) -> tuple[LatentGaussianModel, list[np.ndarray]]:
    """Inverse of :func:`model_to_json_dict`; shape errors become DataError."""
    try:
        model = LatentGaussianModel(
            weight=np.asarray(record["weight"], dtype=np.float64),
            bias=np.asarray(record["bias"], dtype=np.float64),
            noise_variance=float(record["noise_variance"]),
            encoder_weight=np.asarray(record["encoder_weight"], dtype=np.float64),
            encoder_bias=np.asarray(record["encoder_bias"], dtype=np.float64),
            encoder_variances=np.asarray(record["encoder_variances"], dtype=np.float64),
        )
    except (KeyError, TypeError, ValueError, ArgumentError) as exc:
        raise DataError(f"invalid model record: {exc}") from exc
    declared = (record.get("data_dim"), record.get("latent_dim"))
    if declared != (model.data_dim, model.latent_dim):
        raise DataError(
            f"declared dims {declared} disagree with matrices "
            f"({model.data_dim}, {model.latent_dim})"
        )
    points = []
    for idx, p in enumerate(record.get("data_points", [])):
        arr = np.asarray(p, dtype=np.float64)
        if arr.shape != (model.data_dim,):
            raise DataError(f"data point {idx} has shape {arr.shape}, expected ({model.data_dim},)")
        points.append(arr)
    return model, points
