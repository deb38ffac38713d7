"""
Exact exponent relations between Sobolev regularity, distortion
integrability and the regularity of inverse maps.

Exponents are :class:`fractions.Fraction` values; ``INF`` (``math.inf``)
is a first-class value with ``1/INF == 0`` and ``1/0 == INF``. Inputs may
be ints, Fractions, decimal/fraction strings (``"80/79"``) or ``"inf"``.
"""

import math
from fractions import Fraction

__all__ = [
    "INF",
    "ExponentRangeError",
    "as_exponent",
    "format_exponent",
    "inverse_exponent",
    "codistortion_exponent",
    "composition_exponent",
    "ball_sigma",
    "ball_s",
    "corollary_r",
    "remark_rho",
    "pullback_varrho",
]

INF = math.inf


class ExponentRangeError(ValueError):
    """An exponent falls outside the range where a relation is stated."""


def as_exponent(x):
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("bool is not an exponent")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        if math.isinf(x) and x > 0:
            return INF
        if not math.isfinite(x):
            raise ValueError(f"invalid exponent {x!r}")
        return Fraction(x).limit_denominator(10**12)
    if isinstance(x, str):
        s = x.strip().lower()
        if s in ("inf", "infinity", "+inf", "oo"):
            return INF
        return Fraction(s)
    raise TypeError(f"cannot interpret {x!r} as an exponent")


def format_exponent(x):
    if x == INF:
        return "inf"
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _recip(x):
    if x == INF:
        return Fraction(0)
    if x == 0:
        return INF
    return 1 / x


def inverse_exponent(p, n):
    """``p' = p / (p - n + 1)``; ``inf`` for ``p = n - 1`` and ``1`` for ``p = inf``."""
    p = as_exponent(p)
    if p == INF:
        return Fraction(1)
    if p < n - 1:
        raise ExponentRangeError(f"need p >= n-1 = {n - 1}, got p = {format_exponent(p)}")
    if p == n - 1:
        return INF
    return p / (p - n + 1)


def codistortion_exponent(q, p, n):
    """``varrho`` from ``1/varrho = (n-1)/q - (n-1)/p`` for ``n-1 <= q <= p``."""
    q, p = as_exponent(q), as_exponent(p)
    if not (n - 1 <= q <= p):
        raise ExponentRangeError(
            f"need n-1 <= q <= p, got n-1 = {n - 1}, q = {format_exponent(q)}, p = {format_exponent(p)}"
        )
    return _recip((n - 1) * _recip(q) - (n - 1) * _recip(p))


def composition_exponent(q, p):
    """``kappa`` from ``1/kappa = 1/q - 1/p`` for ``1 <= q <= p``."""
    q, p = as_exponent(q), as_exponent(p)
    if not (1 <= q <= p):
        raise ExponentRangeError(
            f"need 1 <= q <= p, got q = {format_exponent(q)}, p = {format_exponent(p)}"
        )
    return _recip(_recip(q) - _recip(p))


def ball_sigma(q, m):
    """Integrability exponent ``q(1+m)/(q+m)`` of the inverse map (3D)."""
    q, m = as_exponent(q), as_exponent(m)
    if q == INF or m == INF:
        raise ExponentRangeError("q and m must be finite")
    if not q > 3:
        raise ExponentRangeError(f"q must exceed 3, got q = {format_exponent(q)}")
    bound = 2 * q / (q - 3)
    if not m > bound:
        raise ExponentRangeError(
            f"m must exceed 2q/(q-3) = {format_exponent(bound)}, got m = {format_exponent(m)}"
        )
    sigma = q * (1 + m) / (q + m)
    assert sigma > 3
    return sigma


def ball_s(sigma, r, n):
    """Inner-distortion exponent ``sigma r / (r n + sigma - n)`` obtained by Hoelder."""
    sigma, r = as_exponent(sigma), as_exponent(r)
    if sigma == INF or r == INF:
        raise ExponentRangeError("sigma and r must be finite")
    if not sigma > n:
        raise ExponentRangeError(f"sigma must exceed n = {n}, got sigma = {format_exponent(sigma)}")
    if not r > 1:
        raise ExponentRangeError(f"r must exceed 1, got r = {format_exponent(r)}")
    s = sigma * r / (r * n + sigma - n)
    assert s > 1
    return s


def corollary_r(s, n):
    """Pullback exponent ``n (n-1) s / (n s + 1 - s)``; lies in ``[n-1, n]``."""
    s = as_exponent(s)
    if s == INF:
        return Fraction(n)
    if s < 1:
        raise ExponentRangeError(f"need s >= 1, got s = {format_exponent(s)}")
    r = n * (n - 1) * s / (n * s + 1 - s)
    assert n - 1 <= r <= n
    return r


def remark_rho(r, n):
    """Composition exponent ``r / ((n-1)^2 - r (n-2))`` for ``n-1 <= r <= n``."""
    r = as_exponent(r)
    if r == INF or not (n - 1 <= r <= n):
        raise ExponentRangeError(f"need n-1 <= r <= n = {n}, got r = {format_exponent(r)}")
    rho = r / ((n - 1) ** 2 - r * (n - 2))
    assert rho >= 1
    return rho


def pullback_varrho(r, n):
    """Integrability ``r n / ((n-1)(n-r))`` of the inner operator function; ``inf`` at ``r = n``."""
    r = as_exponent(r)
    if r == INF or not (n - 1 <= r <= n):
        raise ExponentRangeError(f"need n-1 <= r <= n = {n}, got r = {format_exponent(r)}")
    if r == n:
        return INF
    return r * n / ((n - 1) * (n - r))
