"""Exact rational parameters and arbitrary-precision reals.

Parameters stay as :class:`fractions.Fraction` until a value is needed at
finite precision.  Reals are ``mpf`` values owned by a private
``mpmath.MPContext`` per :class:`PrecisionContext`, so no global mpmath state
is touched.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Union

import mpmath
from mpmath import libmp

Rational = Fraction
Real = mpmath.mpf  # values carry their owning context's precision

DEFAULT_TARGET_DIGITS = 30
DEFAULT_GUARD_DIGITS = 15
MIN_GUARD_DIGITS = 10

_LITERAL = re.compile(r"^(-?)(\d+)(?:/(\d+)|\.(\d+))?$")


class RationalSyntaxError(ValueError):
    """Raised for text that is not a rational literal."""


def parse_rational(text: str) -> Fraction:
    """Parse ``[-]digits``, ``[-]digits/digits`` or ``[-]digits.digits``.

    >>> parse_rational("0.25")
    Fraction(1, 4)
    """
    m = _LITERAL.match(text.strip())
    if m is None:
        raise RationalSyntaxError(f"not a rational literal: {text!r}")
    sign, whole, den, frac = m.groups()
    if den is not None:
        if int(den) == 0:
            raise RationalSyntaxError(f"zero denominator: {text!r}")
        value = Fraction(int(whole), int(den))
    elif frac is not None:
        value = Fraction(int(whole + frac), 10 ** len(frac))
    else:
        value = Fraction(int(whole))
    return -value if sign else value


def format_rational(q: Fraction) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class PrecisionContext:
    target_digits: int = DEFAULT_TARGET_DIGITS
    guard_digits: int = DEFAULT_GUARD_DIGITS

    def __post_init__(self):
        if self.target_digits < 1:
            raise ValueError("target_digits must be positive")
        if self.guard_digits < MIN_GUARD_DIGITS:
            raise ValueError(f"guard_digits must be >= {MIN_GUARD_DIGITS}")

    @property
    def working_digits(self) -> int:
        return self.target_digits + self.guard_digits

    @property
    def working_bits(self) -> int:
        return libmp.dps_to_prec(self.working_digits)

    @cached_property
    def mp(self) -> mpmath.ctx_mp.MPContext:
        ctx = mpmath.MPContext()
        ctx.dps = self.working_digits
        return ctx

    def extended(self, extra_digits: int) -> "PrecisionContext":
        """Same target, ``extra_digits`` more guard digits."""
        return PrecisionContext(self.target_digits, self.guard_digits + extra_digits)

    def real(self, x: Union[int, Fraction, str, mpmath.mpf]) -> mpmath.mpf:
        """Convert ``x`` into this context (rounding once)."""
        if isinstance(x, (int, Fraction)):
            return to_real(Fraction(x), self)
        return +self.mp.mpf(x)

    def eps(self) -> mpmath.mpf:
        """Per-operation relative error bound ``10**(1 - working_digits)``."""
        return self.mp.mpf(10) ** (1 - self.working_digits)


def ratio_to_real(p: int, q: int, ctx: PrecisionContext) -> mpmath.mpf:
    """Correctly rounded ``p/q`` for integers ``p``, ``q != 0``."""
    if q < 0:
        p, q = -p, -q
    raw = libmp.from_rational(p, q, ctx.working_bits, libmp.round_nearest)
    return ctx.mp.make_mpf(raw)


def to_real(q: Fraction, ctx: PrecisionContext) -> mpmath.mpf:
    q = Fraction(q)
    return ratio_to_real(q.numerator, q.denominator, ctx)


def pi(ctx: PrecisionContext) -> mpmath.mpf:
    return +ctx.mp.pi


def rescale(x: mpmath.mpf, ctx: PrecisionContext) -> mpmath.mpf:
    """Round a value computed in another context into ``ctx``."""
    return ctx.mp.mpf(x)
