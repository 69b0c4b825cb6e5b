"""Linear-Gaussian latent models: oracles, proposals, suite generation."""

import math

import numpy as np
import pytest
from scipy import stats

from jensengap import (
    ArgumentError,
    DataError,
    LatentGaussianModel,
    McConfig,
    ModelError,
    estimate_with_auto_n,
    importance_ratio_sampler,
    log_marginal_oracle,
    make_benchmark_suite,
    model_from_json_dict,
    model_to_json_dict,
    with_posterior_encoder,
)


def orthogonal_weight(rows: int, cols: int, seed: int = 0) -> np.ndarray:
    # orthonormal columns scaled independently keep W^T W diagonal
    rng = np.random.default_rng(seed)
    q, _ = np.linalg.qr(rng.normal(size=(rows, cols)))
    return q * np.array([1.5, 0.5, 2.0][:cols])


def test_oracle_matches_direct_gaussian_logpdf():
    w = orthogonal_weight(5, 3)
    bias = np.arange(5, dtype=float) * 0.1
    model = with_posterior_encoder(w, bias, noise_variance=0.3)
    x = np.array([0.4, -0.2, 1.0, 0.0, -0.7])
    # independent route: x ~ N(bias, W W^T + sigma^2 I)
    cov = w @ w.T + 0.3 * np.eye(5)
    expected = stats.multivariate_normal.logpdf(x, mean=bias, cov=cov)
    assert log_marginal_oracle(model, x) == pytest.approx(expected, abs=1e-10)


def test_posterior_encoder_makes_ratio_constant():
    # with the exact posterior as proposal, R(z) = p(x) for every z
    w = orthogonal_weight(4, 2, seed=3)
    bias = np.full(4, 0.25)
    model = with_posterior_encoder(w, bias, noise_variance=0.5)
    x = np.array([1.0, -0.5, 0.3, 0.8])
    oracle = log_marginal_oracle(model, x)
    ratios = importance_ratio_sampler(model, x)(np.random.default_rng(5), 256)
    assert np.allclose(np.log(ratios), oracle, rtol=0.0, atol=1e-9)


def test_ratio_expectation_recovers_marginal():
    # E_q R(Z) = p(x) holds for a mismatched proposal as well
    w = orthogonal_weight(4, 2, seed=8)
    model = with_posterior_encoder(w, np.zeros(4), noise_variance=0.4, variance_scale=2.0)
    x = model.sample_data_point(np.random.default_rng(11))
    oracle = log_marginal_oracle(model, x)
    ratios = importance_ratio_sampler(model, x)(np.random.default_rng(12), 400_000)
    assert math.log(ratios.mean()) == pytest.approx(oracle, abs=5e-3)


def test_variance_mismatch_keeps_mean_map():
    w = orthogonal_weight(4, 2, seed=4)
    bias = np.zeros(4)
    exact = with_posterior_encoder(w, bias, noise_variance=0.3)
    scaled = with_posterior_encoder(w, bias, noise_variance=0.3, variance_scale=4.0)
    x = np.array([0.2, -0.1, 0.5, 0.9])
    assert np.allclose(exact.encoder_mean(x), scaled.encoder_mean(x), atol=1e-14)
    assert np.allclose(scaled.encoder_variances, 4.0 * exact.encoder_variances, atol=1e-14)


def test_mismatched_proposal_estimate_brackets_oracle():
    # a moderately over-dispersed proposal in the spread regime the
    # estimator targets; bracket asserted at 3 SE plus float-noise slack
    pair = next(p for p in make_benchmark_suite(seed=21, count=10) if p.mismatch == 4.0)
    sampler = importance_ratio_sampler(pair.model, pair.x)
    oracle = log_marginal_oracle(pair.model, pair.x)
    est, _ = estimate_with_auto_n(sampler, McConfig(m=10_000, k=2, seed=pair.seed))
    assert est.lower - 3 * est.lower_se - 1e-9 <= oracle <= est.upper + 3 * est.upper_se + 1e-9


def test_non_diagonal_gram_rejected():
    rng = np.random.default_rng(2)
    w = rng.normal(size=(4, 2))  # generic: W^T W has off-diagonal mass
    with pytest.raises(ModelError):
        with_posterior_encoder(w, np.zeros(4), noise_variance=0.5)


def test_model_validation():
    w = orthogonal_weight(4, 2)
    good = with_posterior_encoder(w, np.zeros(4), noise_variance=0.5)
    with pytest.raises(ArgumentError):
        LatentGaussianModel(
            weight=w,
            bias=np.zeros(3),  # wrong length
            noise_variance=0.5,
            encoder_weight=good.encoder_weight,
            encoder_bias=good.encoder_bias,
            encoder_variances=good.encoder_variances,
        )
    with pytest.raises(ArgumentError):
        LatentGaussianModel(
            weight=w,
            bias=np.zeros(4),
            noise_variance=-1.0,
            encoder_weight=good.encoder_weight,
            encoder_bias=good.encoder_bias,
            encoder_variances=good.encoder_variances,
        )
    with pytest.raises(ArgumentError):
        LatentGaussianModel(
            weight=w,
            bias=np.zeros(4),
            noise_variance=0.5,
            encoder_weight=good.encoder_weight,
            encoder_bias=good.encoder_bias,
            encoder_variances=np.array([1.0, 0.0]),  # zero variance
        )


def test_suite_is_deterministic_and_prefix_stable():
    first = make_benchmark_suite(seed=19, count=12)
    again = make_benchmark_suite(seed=19, count=12)
    prefix = make_benchmark_suite(seed=19, count=6)
    for a, b in zip(first, again):
        assert a.seed == b.seed and np.array_equal(a.x, b.x)
    for a, b in zip(prefix, first):
        assert a.seed == b.seed and np.array_equal(a.x, b.x)
    other = make_benchmark_suite(seed=20, count=6)
    assert not np.array_equal(other[0].x, first[0].x)


def test_suite_composition():
    suite = make_benchmark_suite(seed=19, count=20)
    mismatches = [p.mismatch for p in suite]
    # the ten-pair template repeats: 40% exact proposals, then widening
    # variance mismatch
    assert mismatches[:10] == [1.0, 1.0, 1.0, 1.0, 2.0, 2.0, 2.0, 4.0, 4.0, 8.0]
    assert mismatches[:10] == mismatches[10:]
    for pair in suite:
        d, c = pair.model.latent_dim, pair.mismatch
        assert pair.model.data_dim == d + 2
        if c == 2.0:
            assert d == 15
        elif c == 4.0:
            assert d == 5
        elif c == 8.0:
            assert d == 3
        else:
            assert 2 <= d <= 5
        assert pair.x.shape == (pair.model.data_dim,)
        assert 0 <= pair.seed < 2**63


def test_model_json_roundtrip_is_bit_exact():
    pair = make_benchmark_suite(seed=7, count=5)[4]
    record = model_to_json_dict(pair.model, [pair.x], seed=7)
    model, points = model_from_json_dict(record)
    assert log_marginal_oracle(model, points[0]) == log_marginal_oracle(pair.model, pair.x)
    assert record["seed"] == 7


def test_model_json_validation():
    pair = make_benchmark_suite(seed=7, count=1)[0]
    record = model_to_json_dict(pair.model, [pair.x])
    bad = dict(record, latent_dim=record["latent_dim"] + 1)
    with pytest.raises(DataError):
        model_from_json_dict(bad)
    bad_point = dict(record, data_points=[[1.0, 2.0]])
    with pytest.raises(DataError):
        model_from_json_dict(bad_point)


def test_suite_size_validation():
    with pytest.raises(ArgumentError):
        make_benchmark_suite(seed=1, count=0)
