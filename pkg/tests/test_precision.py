from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, strategies as st

from hypersum.precision import (PrecisionContext, RationalSyntaxError, format_rational, parse_rational,
                                pi, to_real)

rationals = st.fractions(max_denominator=10**6).filter(lambda q: abs(q) < 10**9)


@pytest.mark.parametrize("text, value", [
    ("3", Fraction(3)),
    ("-7", Fraction(-7)),
    ("1/2", Fraction(1, 2)),
    ("-5/4", Fraction(-5, 4)),
    ("6/4", Fraction(3, 2)),
    ("0.25", Fraction(1, 4)),
    ("-1.5", Fraction(-3, 2)),
    (" 9/4 ", Fraction(9, 4)),
])
def test_parse(text, value):
    assert parse_rational(text) == value


@pytest.mark.parametrize("text", ["", "1/0", "a", "1/-2", "1e5", "0.", ".5", "1/2/3", "--1", "0.333..."])
def test_parse_rejects(text):
    with pytest.raises(RationalSyntaxError):
        parse_rational(text)


@given(rationals)
def test_format_parse_roundtrip(q):
    assert parse_rational(format_rational(q)) == q


@given(rationals.filter(bool), rationals.filter(bool))
def test_reciprocal_product_is_exact(a, b):
    assert (a / b) * (b / a) == 1


def test_pi_digits():
    assert mpmath.nstr(pi(PrecisionContext(20)), 20) == "3.1415926535897932385"
    ctx = PrecisionContext(10)
    assert mpmath.nstr(pi(ctx) ** 2, 10) == "9.869604401"
    assert mpmath.nstr(pi(ctx) * ctx.mp.sqrt(pi(ctx)), 10) == "5.568327997"


@given(rationals, st.integers(5, 60))
def test_to_real_monotone_in_precision(q, digits):
    lo = to_real(q, PrecisionContext(digits))
    hi = to_real(q, PrecisionContext(digits + 20))
    assert mpmath.nstr(lo, digits - 2) == mpmath.nstr(hi, digits - 2)


def test_to_real_correctly_rounded():
    ctx = PrecisionContext(30)
    x = to_real(Fraction(1, 3), ctx)
    assert abs(x * 3 - 1) <= mpmath.mpf(2) ** (-ctx.working_bits)


def test_context_validation():
    with pytest.raises(ValueError):
        PrecisionContext(30, guard_digits=5)
    with pytest.raises(ValueError):
        PrecisionContext(0)
    ctx = PrecisionContext(30)
    assert ctx.working_digits == 45
    assert ctx.extended(5).working_digits == 50
    assert ctx.mp is not PrecisionContext(30).mp  # no shared global state


def test_contexts_do_not_leak_into_global_mpmath():
    before = mpmath.mp.dps
    PrecisionContext(200).mp.pi
    assert mpmath.mp.dps == before
