"""Worked examples and baseline sweeps against frozen oracle values.

Expected numbers were computed independently (exact rational arithmetic
for the alternating sums, quadrature for cross-checks) and frozen here;
cancellation-dominated endpoints get an absolute tolerance of a few
femto-units rather than exact equality because summation order differs
between the oracle and the library.
"""

import math

import pytest

from jensengap import (
    ArgumentError,
    GALLERY_CASES,
    GalleryCase,
    GammaProvider,
    LogNormalProvider,
    ExponentialProvider,
    comparison_sweep,
    exact_log_gap,
    exp_exponential_bounds,
    exp_normal_bounds,
    gamma_log_bounds,
    lognormal_log_bounds,
    struski_log_upper,
)

EXP_EXP_EXACT = 0.3512787292998718  # 2 - sqrt(e)
EXP_NORMAL_EXACT = 0.6487212707001282  # sqrt(e) - 1

EXP_EXP_FROZEN = {
    1: (0.0, 1.0),
    2: (0.2747868784500214, 0.9583333333333333),
    3: (0.33232038112549467, 0.9578125),
    4: (0.34654019317623797, 0.9578093998015873),
}

EXP_NORMAL_FROZEN = {
    1: (0.0, 1.6487212707001282),
    2: (0.5, 1.0991475138000855),
    3: (0.625, 0.7694032596600598),
    4: (0.6458333333333334, 0.6712650887850522),
    5: (0.6484375, 0.6519282343756062),
    6: (0.6486979166666667, 0.6490881751881629),
}


@pytest.mark.parametrize("k", sorted(EXP_EXP_FROZEN))
def test_exp_exponential_frozen(k):
    report = exp_exponential_bounds(k)
    lower, upper = EXP_EXP_FROZEN[k]
    assert report.lower == pytest.approx(lower, abs=5e-15)
    assert report.upper == pytest.approx(upper, abs=5e-15)
    assert report.exact == pytest.approx(EXP_EXP_EXACT, abs=5e-16)
    assert report.lower <= report.exact <= report.upper


@pytest.mark.parametrize("k", sorted(EXP_NORMAL_FROZEN))
def test_exp_normal_frozen(k):
    report = exp_normal_bounds(k)
    lower, upper = EXP_NORMAL_FROZEN[k]
    assert report.lower == pytest.approx(lower, abs=5e-15)
    assert report.upper == pytest.approx(upper, abs=5e-15)
    assert report.exact == pytest.approx(EXP_NORMAL_EXACT, abs=5e-16)
    assert report.lower <= report.exact <= report.upper


def test_gamma_frozen_rationals():
    # shape 10, k=2: endpoints are exactly 13/300 and 59/756
    report = gamma_log_bounds(10.0, 2)
    assert report.lower == pytest.approx(13.0 / 300.0, abs=5e-15)
    assert report.upper == pytest.approx(59.0 / 756.0, abs=5e-15)
    assert report.exact == pytest.approx(0.05083250392732458, abs=1e-14)


def test_gamma_upper_needs_enough_negative_moments():
    # k=2 needs E X^-3, which gamma(2) lacks: upper side diverges, flagged
    report = gamma_log_bounds(2.0, 2)
    assert report.lower == pytest.approx(1.0 / 12.0, abs=5e-15)
    assert math.isinf(report.upper)
    assert report.flags


def test_gamma_large_shape_still_brackets():
    # regression: with log-gamma differences instead of integer-step
    # products, rounding noise at shape >= 1e5 exceeds the bound width and
    # the bracket inverts by ~1e-10.  The reference value log(a) - psi(a)
    # is itself a cancellation of two O(log a) doubles, so once the
    # interval narrows below ~5e-15 only a noise-level slack is meaningful.
    for shape in (1e5, 1e6, 1e8):
        for k in (2, 3):
            report = gamma_log_bounds(shape, k)
            assert report.lower - 5e-15 <= report.exact <= report.upper + 5e-15
    # where the interval is wider than the reference noise, demand strictness
    for shape, k in ((1e5, 2), (1e6, 2)):
        report = gamma_log_bounds(shape, k)
        assert report.lower < report.exact < report.upper


def test_gamma_frozen_large_shape_endpoints():
    report = gamma_log_bounds(1e6, 2)
    assert report.lower == pytest.approx(4.999993333333333e-07, rel=1e-11)
    assert report.upper == pytest.approx(5.000008333438334e-07, rel=1e-11)


def test_lognormal_frozen_small_sigma():
    # sigma=0.001: the gap is 5e-7 and both endpoints are cancellation
    # residues of order-1 terms
    report = lognormal_log_bounds(0.001, 2)
    assert report.lower == pytest.approx(4.999992498366801e-07, rel=1e-11)
    assert report.upper == pytest.approx(5.000007497479864e-07, rel=1e-11)
    assert report.exact == pytest.approx(5e-07, rel=1e-12)


def test_lognormal_first_order_closed_form():
    # k=1: lower 0, upper e^{sigma^2} - ... collapses to exp(sigma^2) - 1
    report = lognormal_log_bounds(1.0, 1)
    assert report.lower == 0.0
    assert report.upper == pytest.approx(math.e - 1.0, rel=1e-14)
    assert report.exact == 0.5


def test_lognormal_huge_sigma_overflows_to_flagged_infinity():
    report = lognormal_log_bounds(40.0, 2)
    assert math.isinf(report.upper)
    assert report.flags


def test_gallery_case_registry():
    assert set(GALLERY_CASES) == {
        "gamma-log",
        "lognormal-log",
        "exp-exponential",
        "exp-normal",
    }
    case = GalleryCase(case="gamma-log", parameters=(10.0,), k=2)
    assert case.k == 2
    with pytest.raises(ArgumentError):
        GalleryCase(case="weibull-log", parameters=(1.0,), k=2)


def test_struski_baseline_closed_forms():
    # lognormal: log(E X * E 1/X) = sigma^2, twice the exact gap
    ln = struski_log_upper(LogNormalProvider(mu=0.3, sigma=0.5))
    assert ln.upper == pytest.approx(0.25, rel=1e-12)
    assert ln.exact == pytest.approx(0.125, rel=1e-15)
    assert ln.lower == 0.0
    # gamma: log(a / (a - 1)), scale-free
    ga = struski_log_upper(GammaProvider(shape=5.0, scale=3.0))
    assert ga.upper == pytest.approx(math.log(5.0 / 4.0), rel=1e-13)
    # exponential has no inverse moment: the baseline is vacuous
    ex = struski_log_upper(ExponentialProvider())
    assert math.isinf(ex.upper)
    assert ex.flags


def test_struski_upper_dominates_exact_on_gallery():
    for provider in (
        LogNormalProvider(mu=0.0, sigma=0.4),
        GammaProvider(shape=3.0),
        GammaProvider(shape=50.0),
    ):
        report = struski_log_upper(provider)
        assert report.upper >= exact_log_gap(provider)


def test_lognormal_sweep_contract():
    sigmas = [0.05 * i for i in range(1, 31)]
    rows = comparison_sweep("lognormal-log", sigmas, [2, 3])
    assert len(rows) == 60
    k2 = [r for r in rows if r.k == 2]
    # frozen from the oracle sweep: at k=2 the order-2 upper beats the
    # baseline sigma^2 for sigma <= 0.40 and loses beyond
    winners = [r.param1 for r in k2 if r.ours_wins]
    assert len(winners) == 8
    assert max(winners) == pytest.approx(0.40, rel=1e-12)
    for r in rows:
        assert r.lower <= r.exact <= r.upper + 1e-15
        assert r.struski_upper == pytest.approx(r.param1**2, rel=1e-12)


def test_gamma_sweep_contract():
    shapes = [4.0 + 2.0 * i for i in range(49)]
    rows = comparison_sweep("gamma-log", shapes, [2])
    assert len(rows) == 49
    winners = [r.param1 for r in rows if r.ours_wins]
    assert len(winners) == 47
    assert min(winners) == 8.0  # shapes 4 and 6 lose to the baseline
    for r in rows:
        assert r.struski_upper == pytest.approx(math.log(r.param1 / (r.param1 - 1.0)), rel=1e-12)


def test_sweep_rejects_bad_requests():
    with pytest.raises(ArgumentError):
        comparison_sweep("lognormal-log", [], [2])
    with pytest.raises(ArgumentError):
        comparison_sweep("exp-exponential", [0.5], [2])
