"""Release acceptance checklist.

Each test is tagged with ``criterion(n, label)`` and contributes a PASS/FAIL
line to the summary section that conftest prints after the run.  The two
benchmark-backed criteria share one session-scoped 100-pair run.
"""

import json
import math
import shutil
import subprocess

import numpy as np
import pytest

from jensengap import (
    GammaProvider,
    K_MAX,
    LogNormalProvider,
    MISSPECIFIED_DEFAULT,
    MixtureWeights,
    PERFECT_DEFAULT,
    argmin_rho,
    binomial_family,
    comparison_sweep,
    cross_entropy,
    expected_log_loss,
    exp_exponential_bounds,
    exp_normal_bounds,
    first_order_term,
    gamma_log_bounds,
    harmonic_minus_b_identity,
    log_bounds_central,
    log_bounds_raw,
    lognormal_log_bounds,
    model_averaging_sweep,
    neg_log_function,
    oracle_bound,
    simple_cov_bounds,
)

RHO_GRID = [i / 100 for i in range(101)]


@pytest.mark.criterion(1, "exact gaps of the two worked examples to 3 decimals")
def test_exact_gap_reproduction():
    ee = exp_exponential_bounds(2)
    assert ee.exact == pytest.approx(2.0 - math.sqrt(math.e), abs=1e-15)
    assert round(ee.exact, 3) == 0.351
    en = exp_normal_bounds(2)
    assert en.exact == pytest.approx(math.sqrt(math.e) - 1.0, abs=1e-15)
    assert round(en.exact, 3) == 0.649


@pytest.mark.criterion(2, "bracket everywhere on the case gallery, k = 1..4")
def test_bracket_suite():
    def check(report):
        assert report.lower - 1e-9 <= report.exact <= report.upper + 1e-9

    for k in (1, 2, 3, 4):
        check(exp_exponential_bounds(k))
        check(exp_normal_bounds(k))
        for sigma in (0.05, 0.3, 1.0, 1.5):
            check(lognormal_log_bounds(sigma, k))
        for shape in (2.5, 10.0, 100.0):
            if shape > 2 * k - 1:
                check(gamma_log_bounds(shape, k))


@pytest.mark.criterion(3, "higher order tightens both worked examples")
def test_order_k_tightening():
    en_exact = exp_normal_bounds(2).exact
    slack_k2 = exp_normal_bounds(2).upper - en_exact
    slack_k6 = exp_normal_bounds(6).upper - en_exact
    assert slack_k6 < slack_k2 - 1e-3
    width_k2 = exp_exponential_bounds(2).width
    width_k4 = exp_exponential_bounds(4).width
    assert width_k4 < width_k2 - 1e-3


@pytest.mark.criterion(4, "coefficient and route identities")
def test_identity_suite():
    for k in range(1, K_MAX + 1):
        assert abs(harmonic_minus_b_identity(k)) <= 1e-12
    providers = [LogNormalProvider(mu=0.2, sigma=0.6), GammaProvider(shape=8.0, scale=1.3)]
    for provider in providers:
        cov = simple_cov_bounds(neg_log_function(), provider)
        first = log_bounds_raw(provider, 1)
        assert abs(cov.upper - first.upper) <= 1e-12
        for k in (1, 2, 3):
            central = log_bounds_central(provider, k)
            raw = log_bounds_raw(provider, k)
            assert abs(central.lower - raw.lower) <= 1e-9
            assert abs(central.upper - raw.upper) <= 1e-9
    base = log_bounds_raw(GammaProvider(shape=6.0, scale=1.0), 2)
    scaled = log_bounds_raw(GammaProvider(shape=6.0, scale=250.0), 2)
    assert abs(base.lower - scaled.lower) <= 1e-10
    assert abs(base.upper - scaled.upper) <= 1e-10


@pytest.mark.criterion(5, "order-2 upper beats the product-mean baseline somewhere")
def test_comparison_claim():
    sigmas = [0.05 * i for i in range(1, 31)]
    ln_rows = comparison_sweep("lognormal-log", sigmas, [2])
    assert any(r.upper < r.struski_upper for r in ln_rows)
    shapes = [4.0 + 2.0 * i for i in range(49)]
    ga_rows = comparison_sweep("gamma-log", shapes, [2])
    assert any(r.upper < r.struski_upper for r in ga_rows)


@pytest.mark.criterion(6, "oracle bracket rate >= 0.95 over 100 toy pairs")
def test_mc_oracle_bracketing(benchmark_result):
    assert benchmark_result.count == 100
    assert benchmark_result.bracket_rate >= 0.95
    perfect = [p for p in benchmark_result.pairs if p.mismatch == 1.0]
    assert perfect  # the suite template guarantees 40 of them
    for pair in perfect:
        assert pair.width < 1e-9


@pytest.mark.criterion(7, "normality diagnostics separate successes from failures")
def test_diagnostics_correlation(benchmark_result):
    failures = [p for p in benchmark_result.pairs if not p.bracket]
    assert failures, "a spread this size is expected to miss a few brackets"
    assert benchmark_result.mean_qq_success > benchmark_result.mean_qq_failure
    # the summary means agree with the per-pair records they summarize
    qq_fail = float(np.mean([p.qq_correlation for p in failures]))
    assert benchmark_result.mean_qq_failure == pytest.approx(qq_fail, abs=1e-12)


@pytest.mark.criterion(8, "risk-curve bound validity and argmin phenomena")
def test_pacbayes_validity():
    for instance in (MISSPECIFIED_DEFAULT, PERFECT_DEFAULT):
        family = binomial_family(*instance)
        for rho in RHO_GRID:
            w = MixtureWeights.two_point(rho)
            ce = cross_entropy(family, w)
            for k in (1, 2, 3):
                assert oracle_bound(family, w, k) >= ce - 1e-12
        for rho in (0.0, 1.0):  # Dirac collapse
            w = MixtureWeights.two_point(rho)
            assert abs(oracle_bound(family, w, 2) - cross_entropy(family, w)) <= 1e-12
        for rho in (0.0, 0.3, 0.7, 1.0):  # first-order term vanishes
            assert abs(first_order_term(family, MixtureWeights.two_point(rho))) <= 1e-12

    mis = binomial_family(*MISSPECIFIED_DEFAULT)
    points = model_averaging_sweep(mis, RHO_GRID, [1])
    ce_argmin = argmin_rho([p.ce for p in points], RHO_GRID)
    assert 0.0 < ce_argmin < 1.0
    ell_argmin = argmin_rho(
        [expected_log_loss(mis, MixtureWeights.two_point(r)) for r in RHO_GRID], RHO_GRID
    )
    assert ell_argmin in (0.0, 1.0)

    per = binomial_family(*PERFECT_DEFAULT)
    per_points = model_averaging_sweep(per, RHO_GRID, [1, 2, 3])
    assert argmin_rho([p.ce for p in per_points], RHO_GRID) == 1.0
    for k in (1, 2, 3):
        assert argmin_rho([p.bound(k) for p in per_points], RHO_GRID) == 1.0


@pytest.mark.criterion(9, "seeded runs are byte-identical")
def test_determinism(tmp_path):
    exe = shutil.which("jensengap")
    assert exe, "console script must be installed"

    def run(args):
        result = subprocess.run([exe, *args, "--quiet"], capture_output=True, check=True)
        return result.stdout

    mc_args = ["mc", "--dist", "lognormal", "--sigma", "0.4", "--n", "80", "--m", "600",
               "--seed", "13"]
    first = run(mc_args)
    assert first == run(mc_args)
    json.loads(first)  # and it is well-formed

    bench_args = ["benchmark", "--count", "6", "--m", "400", "--seed", "19"]
    first = run(bench_args)
    assert first == run(bench_args)
    json.loads(first)
