import time
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from grlrpc import oracles
from grlrpc.bounds import (
    intersection_bound,
    log2,
    nm_count,
    product_bound,
    syndrome_bound,
    total_bound,
)
from grlrpc.errors import ParameterError

mpmath.mp.dps = 200
FIG1 = dict(p=2, r=2, s=1, m=21, n=20, k=8, lam=2)
HEAD = dict(p=2, r=2, s=4, m=101, n=101, k=40, lam=2)


# independent high-precision re-implementations
def mp_product(p, r, s, m, lam, t):
    p = mpmath.mpf(p)
    acc = mpmath.fsum(p ** (s * (r - j) * (i * lam - m)) for i in range(1, t + 1) for j in range(r))
    return (1 - p ** (-s * lam)) * acc


def mp_syndrome(p, s, n, k, lam, t):
    p = mpmath.mpf(p)
    return 1 - mpmath.fprod(1 - p ** ((i - (n - k)) * s) for i in range(lam * t))


def mp_intersection(p, r, s, m, lam, t):
    return mp_product(p, r, s, m, lam * (lam + 1) // 2, t)


def test_zero_rank():
    assert product_bound(2, 2, 1, 21, 2, 0) == 0
    assert syndrome_bound(2, 2, 1, 20, 8, 2, 0) == 0
    assert intersection_bound(2, 2, 1, 21, 2, 0) == 0
    assert total_bound(t=0, **FIG1).total_tight == 0


def test_product_example():
    exact = product_bound(2, 2, 1, 21, 2, 7)
    simple = product_bound(2, 2, 1, 21, 2, 7, "simple")
    assert simple == Fraction(14, 128)
    assert exact < simple


def test_intersection_example():
    simple = intersection_bound(2, 2, 1, 21, 2, 6, "simple")
    assert simple == Fraction(3, 2)
    rep = total_bound(t=6, **FIG1)
    assert rep.clamped("inter_simple") == 1.0
    for t in range(1, 7):
        assert intersection_bound(2, 2, 1, 21, 2, t) < intersection_bound(2, 2, 1, 21, 2, t, "simple")


def test_headline_values():
    start = time.perf_counter()
    r30 = total_bound(t=30, **HEAD)
    r18 = total_bound(t=18, **HEAD)
    assert time.perf_counter() - start < 1
    assert abs(log2(r30.total_simple) - (-6)) < 0.01
    assert abs(log2(r18.total_simple) - (-102)) < 0.01
    assert log2(r30.syndrome_simple) == pytest.approx(-6.0)
    assert log2(4 * 30 * Fraction(2) ** (4 * (90 - 101))) == pytest.approx(log2(r30.total_simple - r30.syndrome_simple))
    # t = 24: our evaluation, kept as a regression value
    assert abs(log2(total_bound(t=24, **HEAD).total_simple) - (-54)) < 0.01


def test_dual_evaluation():
    for t in range(1, 7):
        assert mpmath.almosteq(mpmath.mpf(product_bound(2, 2, 1, 21, 2, t).numerator) /
                               product_bound(2, 2, 1, 21, 2, t).denominator,
                               mp_product(2, 2, 1, 21, 2, t), rel_eps=mpmath.mpf(10) ** -150)
        ours = syndrome_bound(2, 2, 1, 20, 8, 2, t)
        assert mpmath.almosteq(mpmath.mpf(ours.numerator) / ours.denominator,
                               mp_syndrome(2, 1, 20, 8, 2, t), rel_eps=mpmath.mpf(10) ** -150)
        ours = intersection_bound(2, 2, 1, 21, 2, t)
        assert mpmath.almosteq(mpmath.mpf(ours.numerator) / ours.denominator,
                               mp_intersection(2, 2, 1, 21, 2, t), rel_eps=mpmath.mpf(10) ** -150)
    for t in (18, 24, 30):
        ours = syndrome_bound(2, 2, 4, 101, 40, 2, t)
        assert mpmath.almosteq(mpmath.mpf(ours.numerator) / ours.denominator,
                               mp_syndrome(2, 4, 101, 40, 2, t), rel_eps=mpmath.mpf(10) ** -150)


def test_log2_exact_for_tiny_values():
    assert log2(Fraction(1, 2**300)) == -300
    assert log2(Fraction(0)) == float("-inf")
    with pytest.raises(ValueError):
        log2(Fraction(-1))


def test_preconditions():
    with pytest.raises(ParameterError):
        product_bound(2, 2, 1, 21, 2, 11)
    with pytest.raises(ParameterError):
        syndrome_bound(2, 2, 1, 20, 8, 2, 7)
    with pytest.raises(ParameterError):
        intersection_bound(2, 2, 1, 21, 2, 7)
    with pytest.raises(ParameterError):
        total_bound(t=7, **FIG1)
    with pytest.raises(ParameterError):
        product_bound(2, 2, 1, 21, 2, 1, form="loose")
    rep = total_bound(t=7, allow_infeasible=True, **FIG1)
    assert not rep.feasible and rep.clamped("total_tight") == 1.0
    assert rep.total_tight > 1


@settings(max_examples=60, deadline=None)
@given(p=st.sampled_from([2, 3]), r=st.integers(1, 3), s=st.integers(1, 3),
       lam=st.integers(1, 3), m=st.integers(10, 40), nk=st.integers(4, 30))
def test_ordering_and_monotonicity(p, r, s, lam, m, nk):
    n, k = nk + 5, 5
    width = lam * (lam + 1) // 2
    tmax = min((m - 1) // width, nk // lam)
    prev = None
    for t in range(0, tmax + 1):
        rep = total_bound(p, r, s, m, n, k, lam, t)
        vals = rep.values()
        assert all(v >= 0 for v in vals.values())
        assert rep.product_bound <= rep.product_simple
        assert rep.syndrome_bound <= rep.syndrome_simple
        assert rep.intersection_bound <= rep.intersection_simple
        assert rep.total_simple >= max(rep.product_simple, rep.syndrome_simple, rep.intersection_simple)
        assert rep.total_tight == rep.product_bound + rep.syndrome_bound + rep.intersection_bound
        if prev is not None:
            for key in ("prod_exact", "synd_exact", "inter_exact", "total_tight"):
                assert vals[key] >= prev[key]
        prev = vals


def test_nm_count_examples():
    assert nm_count(2, 2, 1, 1, 2) == 12
    assert nm_count(2, 1, 1, 1, 2) == 3
    assert nm_count(2, 2, 1, 1, 2) == oracles.count_full_free_rank(2, 2, 1, 1, 2)
    assert nm_count(2, 2, 1, 2, 3) == oracles.count_full_free_rank(2, 2, 1, 2, 3)
    assert nm_count(2, 2, 2, 1, 2) == oracles.count_full_free_rank(2, 2, 2, 1, 2) == 240
    # the exponent without s would give 256 * (1 - 1/4) = 192
    with pytest.raises(ParameterError):
        nm_count(2, 2, 1, 2, 2)


def test_nm_count_matches_syndrome_product():
    p, r, s, a, b = 2, 2, 2, 3, 5
    frac = Fraction(nm_count(p, r, s, a, b), (p ** (r * s)) ** (a * b))
    prod = Fraction(1)
    for i in range(a):
        prod *= 1 - Fraction(p) ** ((i - b) * s)
    assert frac == prod


def test_report_row():
    row = total_bound(t=3, **FIG1).row()
    assert row["t"] == 3 and row["feasible"] == 1
    assert set(row) >= {"prod_exact", "synd_simple", "total_tight", "log2_total_simple"}
