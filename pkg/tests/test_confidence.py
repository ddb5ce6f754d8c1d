import math

import mpmath
import numpy as np
import pytest

from skim.confidence import (
    DEFAULT_EPSILONS,
    ErrorLedger,
    IterationRecord,
    accumulate_ledger,
    discrepancy_confidence,
    union_bound_curve,
)

mpmath.mp.dps = 50


def chernoff_mp(k_prime, tau, gain, eps):
    mu = mpmath.mpf(tau) * gain * (1 + mpmath.mpf(eps))
    nu = 1 - k_prime / mu
    if nu <= 0:
        return mpmath.mpf(1)
    if nu == 1:
        return mpmath.e ** (-mu)
    return min(mpmath.mpf(1), (mpmath.e ** (-nu) / (1 - nu) ** (1 - nu)) ** mu)


def test_vacuous_when_nu_nonpositive():
    assert discrepancy_confidence(50, 0.5, 80, 0.1) == 1.0  # mu = 44 <= 50
    assert discrepancy_confidence(44, 0.5, 80, 0.1) == 1.0


def test_nu_one_limit():
    mu = 0.3 * 40 * 1.05
    assert discrepancy_confidence(0, 0.3, 40, 0.05) == pytest.approx(math.exp(-mu), rel=1e-14)
    # approaching from inside
    assert discrepancy_confidence(1e-9, 0.3, 40, 0.05) == pytest.approx(math.exp(-mu), rel=1e-6)


def test_worked_value():
    # mu = 20, nu = 0.5  ->  k' = 10
    v = discrepancy_confidence(10, 1.0, 20 / 1.1, 0.1)
    assert v == pytest.approx((math.exp(-0.5) / math.sqrt(0.5)) ** 20, rel=1e-12)
    assert v == pytest.approx(0.0465, abs=5e-5)


def test_matches_high_precision_grid():
    rng = np.random.default_rng(2024)
    for _ in range(200):
        kp = int(rng.integers(0, 64))
        tau = float(rng.uniform(1e-3, 1))
        gain = float(rng.uniform(1, 5000))
        eps = float(rng.choice(DEFAULT_EPSILONS))
        ref = chernoff_mp(kp, tau, gain, eps)
        got = discrepancy_confidence(kp, tau, gain, eps)
        if ref == 0:
            assert got < 1e-300
        else:
            assert abs(got - float(ref)) <= 1e-9 * float(ref) or abs(got - float(ref)) < 1e-300


def test_monotone_in_eps():
    for kp in (0, 5, 30):
        vals = [discrepancy_confidence(kp, 0.2, 600, e) for e in (0.01, 0.05, 0.1, 0.5, 1.0)]
        assert vals == sorted(vals, reverse=True)


@pytest.mark.parametrize("bad", [(1, 0.0, 10, 0.1), (1, 1.5, 10, 0.1), (1, 0.5, 0, 0.1),
                                 (1, 0.5, 10, 0.0), (-1, 0.5, 10, 0.1)])
def test_domain_errors(bad):
    with pytest.raises(ValueError):
        discrepancy_confidence(*bad)


def test_empty_ledger():
    led = ErrorLedger(100)
    assert led.confidence(0.0) == 1.0
    assert led.guarantee(0.99) == 0.0


def test_single_iteration_curve():
    led = ErrorLedger(1000)
    rec = IterationRecord(k_prime=3, tau=0.5, gain=800, ell=4)
    accumulate_ledger(led, rec)
    fails = [discrepancy_confidence(3, 0.5, 800, e) for e in DEFAULT_EPSILONS]
    fails = np.minimum.accumulate(fails)
    for e, f in zip(DEFAULT_EPSILONS, fails):
        assert led.confidence(e * 200) == pytest.approx(1 - f, abs=1e-12)
    assert led.confidence(DEFAULT_EPSILONS[0] * 200 * 0.99) == 0.0
    assert led.lost == pytest.approx(fails[-1])


def test_two_point_masses_convolve():
    # with k' = 0 and large mu the failure probabilities are tiny, so each
    # iteration is a near point mass at eps_0 * gain
    led = ErrorLedger(10_000)
    r1 = IterationRecord(0, 1.0, 4000, 1)
    r2 = IterationRecord(0, 1.0, 2000, 1)
    accumulate_ledger(led, r1)
    accumulate_ledger(led, r2)
    c1 = 1 - discrepancy_confidence(0, 1.0, 4000, 0.01)
    c2 = 1 - discrepancy_confidence(0, 1.0, 2000, 0.01)
    d = 0.01 * 4000 + 0.01 * 2000
    assert led.confidence(d) >= c1 * c2 - 1e-12


def test_curve_monotone_and_bounded():
    rng = np.random.default_rng(5)
    led = ErrorLedger(5000)
    for _ in range(40):
        accumulate_ledger(led, IterationRecord(int(rng.integers(0, 30)), float(rng.uniform(0.05, 1)),
                                               int(rng.integers(1, 2000)), 8))
    pts, cdf = led.curve()
    assert np.all(np.diff(pts) > 0)
    assert np.all(np.diff(cdf) >= -1e-15)
    assert np.all((cdf >= 0) & (cdf <= 1 + 1e-12))
    assert led.guarantee(0.0) <= led.guarantee(0.5) <= led.guarantee(cdf[-1])
    assert led.guarantee(1.5) == math.inf


def test_zero_gain_records_are_neutral():
    led = ErrorLedger(100)
    accumulate_ledger(led, IterationRecord(0, 1.0, 0, 2))
    assert led.confidence(0.0) == 1.0 and len(led.records) == 1


def test_dominates_union_bound():
    rng = np.random.default_rng(77)
    for _ in range(200):
        n = int(rng.integers(50, 5000))
        ell = int(rng.integers(1, 64))
        led = ErrorLedger(n)
        left = n * ell
        for _ in range(int(rng.integers(1, 60))):
            gain = int(rng.integers(1, max(2, left // 4)))
            left -= gain
            if left <= 1:
                break
            accumulate_ledger(led, IterationRecord(int(rng.integers(0, 64)), float(rng.uniform(0.01, 1)),
                                                   gain, ell))
        totals, conf = union_bound_curve(led)
        for t, c in zip(totals, conf):
            assert led.confidence(t) >= c - 1e-12


def test_convolution_without_merging_dominates_union_bound():
    # few iterations keep every atom distinct, so the convolved curve alone
    # must dominate: product of (1 - f) >= 1 - sum f
    rng = np.random.default_rng(3)
    for _ in range(100):
        led = ErrorLedger(10**4, buckets=10**6)
        for _ in range(int(rng.integers(1, 5))):
            accumulate_ledger(led, IterationRecord(int(rng.integers(0, 20)), float(rng.uniform(0.1, 1)),
                                                   int(rng.integers(200, 3000)), 1))
        totals, conf = union_bound_curve(led)
        for t, c in zip(totals, conf):
            assert led._convolved(t) >= c - 1e-12
