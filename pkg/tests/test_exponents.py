import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from polydist.exponents import (
    INF,
    ExponentRangeError,
    as_exponent,
    ball_s,
    ball_sigma,
    codistortion_exponent,
    composition_exponent,
    corollary_r,
    format_exponent,
    inverse_exponent,
    pullback_varrho,
    remark_rho,
)


def test_parsing():
    assert as_exponent("80/79") == Fraction(80, 79)
    assert as_exponent("inf") == INF
    assert as_exponent(3) == 3
    assert as_exponent(2.5) == Fraction(5, 2)
    assert format_exponent(INF) == "inf"
    assert format_exponent(Fraction(40, 13)) == "40/13"
    assert format_exponent(Fraction(4)) == "4"


def test_inverse_exponent():
    assert inverse_exponent(3, 3) == 3
    assert inverse_exponent(2, 3) == INF
    assert inverse_exponent(1, 2) == INF
    assert inverse_exponent(INF, 3) == 1
    with pytest.raises(ExponentRangeError):
        inverse_exponent(Fraction(3, 2), 3)


def test_codistortion_exponent():
    assert codistortion_exponent(5, 5, 3) == INF
    assert codistortion_exponent(3, 6, 3) == 3
    assert codistortion_exponent(2, 4, 2) == 4
    with pytest.raises(ExponentRangeError):
        codistortion_exponent(6, 3, 3)
    with pytest.raises(ExponentRangeError):
        codistortion_exponent(1, 3, 3)


def test_composition_exponent():
    assert composition_exponent(2, 2) == INF
    assert composition_exponent(2, 4) == 4
    assert composition_exponent(1, INF) == 1
    with pytest.raises(ExponentRangeError):
        composition_exponent(4, 2)


def test_ball_exponents():
    assert ball_sigma(4, 9) == Fraction(40, 13)
    assert ball_sigma(6, 6) == Fraction(7, 2)
    with pytest.raises(ExponentRangeError, match=r"m must exceed 2q/\(q-3\) = 8"):
        ball_sigma(4, 8)
    with pytest.raises(ExponentRangeError, match="q must exceed 3"):
        ball_sigma(3, 100)
    assert ball_s(Fraction(40, 13), 2, 3) == Fraction(80, 79)
    assert ball_s(Fraction(7, 2), 2, 3) == Fraction(14, 13)
    with pytest.raises(ExponentRangeError):
        ball_s(3, 2, 3)
    with pytest.raises(ExponentRangeError):
        ball_s(4, 1, 3)


def test_corollary_and_remark():
    assert corollary_r(1, 3) == 2
    assert corollary_r(1, 2) == 1
    assert 2 <= corollary_r(1000, 3) <= 3
    assert corollary_r(INF, 3) == 3
    with pytest.raises(ExponentRangeError):
        corollary_r(Fraction(1, 2), 3)
    assert remark_rho(2, 3) == 1
    assert remark_rho(3, 3) == 3
    assert remark_rho(2, 2) == 2
    with pytest.raises(ExponentRangeError):
        remark_rho(Fraction(19, 10), 3)
    assert pullback_varrho(3, 3) == INF
    assert pullback_varrho(2, 3) == 3


rationals = st.fractions(min_value=Fraction(-50), max_value=Fraction(50), max_denominator=10**6)


@given(st.fractions(min_value=Fraction(1, 10**6), max_value=100, max_denominator=10**6))
def test_involution_planar(delta):
    p = 1 + delta
    assert inverse_exponent(inverse_exponent(p, 2), 2) == p


@given(st.fractions(min_value=Fraction(1, 10**6), max_value=Fraction(99, 100), max_denominator=10**6))
def test_inverse_map_in_space_is_not_an_involution(delta):
    # for n = 3 the map p -> p/(p-2) is an involution only together with
    # its own inverse p -> 2p/(p-1); applying it twice gives p/(4-p)
    p = 2 + delta
    pp = inverse_exponent(p, 3)
    if pp < 2:
        return
    twice = inverse_exponent(pp, 3) if pp > 2 else INF
    assert twice == p / (4 - p) or twice == INF


@given(
    st.sampled_from([2, 3]),
    st.fractions(min_value=0, max_value=50, max_denominator=1000),
    st.fractions(min_value=0, max_value=50, max_denominator=1000),
)
def test_chain_consistency(n, a, b):
    q = (n - 1) + a
    p = q + b
    if q == n - 1:
        return
    lhs = codistortion_exponent(q, p, n)
    rhs = composition_exponent(inverse_exponent(p, n), inverse_exponent(q, n))
    assert lhs == rhs


@given(st.sampled_from([2, 3]), st.fractions(min_value=1, max_value=10**6, max_denominator=10**6))
def test_corollary_range(n, s):
    r = corollary_r(s, n)
    assert n - 1 <= r <= n
    assert remark_rho(r, n) >= 1


@given(
    st.fractions(min_value=Fraction(301, 100), max_value=50, max_denominator=1000),
    st.fractions(min_value=Fraction(1, 1000), max_value=50, max_denominator=1000),
    st.fractions(min_value=Fraction(1001, 1000), max_value=20, max_denominator=1000),
)
def test_ball_chain_ranges(q, extra, r):
    m = 2 * q / (q - 3) + extra
    sigma = ball_sigma(q, m)
    assert 3 < sigma < q
    s = ball_s(sigma, r, 3)
    assert 1 < s < r


def test_exactness_large_denominators():
    p = Fraction(10**30 + 1, 10**30)
    assert inverse_exponent(inverse_exponent(1 + p, 2), 2) == 1 + p
    assert not isinstance(ball_s(ball_sigma(4, 9), 2, 3), float)
    assert math.isinf(inverse_exponent(2, 3))
