"""Gamma function, Pochhammer symbols and Gamma ratios at arbitrary precision.

Gamma is evaluated by promoting the argument with the functional equation
until Stirling's series converges to the working precision, then dividing the
shift back out with an exact rational rising factorial.  Arguments below 1/2
go through the reflection formula.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Union

import mpmath

from .precision import PrecisionContext, ratio_to_real, rescale, to_real

EXACT_POCHHAMMER_LIMIT = 10**6

Number = Union[int, Fraction, mpmath.mpf]


class PoleError(ArithmeticError):
    """Gamma evaluated at zero or a negative integer."""


def _is_nonpositive_integer(x) -> bool:
    if isinstance(x, (int, Fraction)):
        x = Fraction(x)
        return x.denominator == 1 and x <= 0
    return x <= 0 and x == int(x)


@dataclass(frozen=True)
class GammaArgument:
    value: Union[Fraction, mpmath.mpf]
    classification: str  # "positive" | "negative-non-integer" | "pole"

    @classmethod
    def of(cls, x: Number) -> "GammaArgument":
        if isinstance(x, GammaArgument):
            return x
        if isinstance(x, (int, Fraction)):
            x = Fraction(x)
        if _is_nonpositive_integer(x):
            kind = "pole"
        elif x > 0:
            kind = "positive"
        else:
            kind = "negative-non-integer"
        return cls(x, kind)


@lru_cache(maxsize=8)
def _bernoulli_table(count: int) -> tuple[Fraction, ...]:
    """B_0 .. B_count as exact fractions (B_1 = -1/2 convention)."""
    b = [Fraction(1)]
    for m in range(1, count + 1):
        acc = Fraction(0)
        binom = 1
        for j in range(m):
            acc += binom * b[j]
            binom = binom * (m + 1 - j) // (j + 1)
        b.append(-acc / (m + 1))
    return tuple(b)


def bernoulli(n: int) -> Fraction:
    # share cache entries between nearby requests
    size = max(64, -(-n // 64) * 64)
    return _bernoulli_table(size)[n]


def _stirling_threshold(digits: int) -> int:
    # minimal Stirling term ~ exp(-2 pi z); z = digits/2 leaves a wide margin
    return max(12, digits // 2 + 8)


def _stirling_lngamma(z: mpmath.mpf, mp) -> mpmath.mpf:
    """log Gamma(z) for large positive z via the asymptotic series."""
    eps = mp.mpf(2) ** (-mp.prec - 4)
    s = (z - 0.5) * mp.ln(z) - z + mp.ln(2 * mp.pi) / 2
    z2 = z * z
    zpow = z
    k = 1
    while True:
        b = bernoulli(2 * k)
        term = ratio_to_real_mp(b.numerator, b.denominator * (2 * k) * (2 * k - 1), mp) / zpow
        s += term
        if abs(term) < eps * abs(s):
            return s
        zpow *= z2
        k += 1
        if k > 4 * mp.dps + 50:
            raise ArithmeticError("Stirling series failed to converge")


def ratio_to_real_mp(p: int, q: int, mp) -> mpmath.mpf:
    return mp.make_mpf(mpmath.libmp.from_rational(p, q, mp.prec, mpmath.libmp.round_nearest))


def _rising_product(p: int, q: int, lo: int, hi: int) -> int:
    """prod_{k=lo}^{hi-1} (p + k*q) by binary splitting."""
    if hi - lo <= 16:
        out = 1
        for k in range(lo, hi):
            out *= p + k * q
        return out
    mid = (lo + hi) // 2
    return _rising_product(p, q, lo, mid) * _rising_product(p, q, mid, hi)


def pochhammer_exact(a: Union[int, Fraction], n: int) -> Fraction:
    """(a)_n as an exact fraction."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    a = Fraction(a)
    return Fraction(_rising_product(a.numerator, a.denominator, 0, n), a.denominator**n)


def _internal(ctx: PrecisionContext, magnitude: float) -> PrecisionContext:
    # exp() of a large log-Gamma amplifies its absolute error
    extra = 10 + max(0, int(math.log10(magnitude + 1.0)) + 1)
    return ctx.extended(extra)


def _gamma_positive(x, work: PrecisionContext) -> mpmath.mpf:
    """Gamma(x) for x >= 1/2 at ``work`` precision."""
    mp = work.mp
    threshold = _stirling_threshold(work.working_digits)
    shift = max(0, math.ceil(threshold - float(x)))
    if isinstance(x, Fraction):
        z = to_real(x + shift, work)
        if shift:
            num = _rising_product(x.numerator, x.denominator, 0, shift)
            rising = ratio_to_real(num, x.denominator**shift, work)
        else:
            rising = mp.mpf(1)
    else:
        x = mp.mpf(x)
        z = x + shift
        rising = mp.mpf(1)
        for k in range(shift):
            rising *= x + k
    return mp.exp(_stirling_lngamma(z, mp)) / rising


def gamma(x: Number, ctx: PrecisionContext) -> mpmath.mpf:
    """Gamma(x) for real x, relative error below ``10**-ctx.target_digits``.

    Raises PoleError at 0, -1, -2, ...
    """
    arg = GammaArgument.of(x)
    if arg.classification == "pole":
        raise PoleError(f"Gamma has a pole at {x}")
    v = arg.value
    z = min(abs(float(v)), 1e300) + _stirling_threshold(ctx.working_digits)
    work = _internal(ctx, z * math.log(z))
    if v < 0.5:
        # reflection: Gamma(v) Gamma(1 - v) = pi / sin(pi v)
        mp = work.mp
        vr = to_real(v, work) if isinstance(v, Fraction) else mp.mpf(v)
        out = mp.pi / (mp.sinpi(vr) * _gamma_positive(1 - v, work))
    else:
        out = _gamma_positive(v, work)
    return rescale(out, ctx)


def pochhammer(a: Union[int, Fraction], n: int, ctx: PrecisionContext) -> mpmath.mpf:
    """Rising factorial (a)_n rounded once from the exact product."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    a = Fraction(a)
    if n == 0:
        return ctx.mp.mpf(1)
    if _is_nonpositive_integer(a) and n > -a:
        return ctx.mp.mpf(0)
    if n < EXACT_POCHHAMMER_LIMIT:
        num = _rising_product(a.numerator, a.denominator, 0, n)
        return ratio_to_real(num, a.denominator**n, ctx)
    return _gamma_ratio_inexact(a + n, a, ctx)


def _gamma_ratio_inexact(x: Fraction, y: Fraction, ctx: PrecisionContext) -> mpmath.mpf:
    if x >= Fraction(1, 2) and y >= Fraction(1, 2):
        # common shift, then a difference of log-Gammas: no overflow, and
        # nearby x, y cancel inside the log rather than after exponentiation
        big = float(max(x, y))
        work = _internal(ctx, big * math.log(big + 2.0) + 100)
        mp = work.mp
        threshold = _stirling_threshold(work.working_digits)
        shift = max(0, math.ceil(threshold - min(x, y)))
        lx = _stirling_lngamma(to_real(x + shift, work), mp)
        ly = _stirling_lngamma(to_real(y + shift, work), mp)
        out = mp.exp(lx - ly)
        if shift:
            out *= to_real(pochhammer_exact(y, shift) / pochhammer_exact(x, shift), work)
        return rescale(out, ctx)
    work = ctx.extended(10)
    return rescale(gamma(x, work) / gamma(y, work), ctx)


def gamma_ratio(x: Union[int, Fraction], y: Union[int, Fraction], ctx: PrecisionContext) -> mpmath.mpf:
    """Gamma(x) / Gamma(y); exact rational when x - y is an integer."""
    x, y = Fraction(x), Fraction(y)
    for v in (x, y):
        if _is_nonpositive_integer(v):
            raise PoleError(f"Gamma has a pole at {v}")
    diff = x - y
    if diff.denominator == 1 and abs(diff) < EXACT_POCHHAMMER_LIMIT:
        k = int(diff)
        if k >= 0:
            return to_real(pochhammer_exact(y, k), ctx)
        return to_real(1 / pochhammer_exact(x, -k), ctx)
    return _gamma_ratio_inexact(x, y, ctx)
