from fractions import Fraction

import mpmath
import pytest
from hypothesis import assume, given, settings, strategies as st

from hypersum.precision import PrecisionContext, to_real
from hypersum.series import (BudgetExceeded, Diverges, NoConvergence, PoleInTerms, SeriesSpec, SignChange, SumResult,
                             TermStream, WrongShape, direct_sum, levin_sum, partial_sum, richardson_sum,
                             sum_unit_argument, tail_exponent)
from hypersum.theorems import IdentityId, lhs_series, ram_rhs, REGISTRY

from conftest import rel

F = Fraction
CTX = PrecisionContext(30)
RAM12 = SeriesSpec.of([F(1, 2), F(1, 2), F(1, 4)], [1, F(5, 4)])
RAM14 = SeriesSpec.of([F(1, 2), F(1, 4)], [F(5, 4)])


def d_extended_series(d):
    return SeriesSpec.of([F(1, 2), F(1, 4), d + 1], [F(9, 4), d])


def hyper_oracle(spec, dps=50):
    with mpmath.workdps(dps):
        return mpmath.hyper([mpmath.mpf(a.numerator) / a.denominator for a in spec.numerator],
                            [mpmath.mpf(b.numerator) / b.denominator for b in spec.denominator], 1)


# --- construction -------------------------------------------------------

def test_spec_rejects_denominator_pole():
    with pytest.raises(PoleInTerms):
        SeriesSpec.of([F(1, 2), F(1, 3)], [-2])
    # a numerator that terminates first is fine
    SeriesSpec.of([-1, F(1, 3)], [-2])


def test_spec_rejects_other_arguments():
    with pytest.raises(ValueError):
        SeriesSpec((F(1),), (F(2),), argument=F(1, 2))


@pytest.mark.parametrize("spec, tau", [
    (RAM14, F(3, 2)),
    (d_extended_series(F(2)), F(3, 2)),
    (RAM12, F(2)),
])
def test_tail_exponent(spec, tau):
    assert tail_exponent(spec) == tau


def test_tail_exponent_wrong_shape():
    with pytest.raises(WrongShape):
        tail_exponent(SeriesSpec.of([1, 2], [3, 4]))


small = st.fractions(min_value=F(-3), max_value=F(3), max_denominator=12)
positive = st.fractions(min_value=F(1, 12), max_value=F(3), max_denominator=12)


@given(st.lists(positive, min_size=1, max_size=3), st.lists(positive, min_size=0, max_size=2), positive, positive)
def test_d_pair_tau_is_independent_of_d(num, den, d1, d2):
    assume(len(num) == len(den) + 1)
    spec = SeriesSpec.of(num, den)
    one = SeriesSpec.of(num + [d1 + 1], den + [d1])
    two = SeriesSpec.of(num + [d2 + 1], den + [d2])
    # (d+1)_n / (d)_n = (d+n)/d grows like n, whatever d is
    assert tail_exponent(one) == tail_exponent(two) == tail_exponent(spec) - 1


# --- partial sums against exact rational oracles --------------------------

def test_partial_sum_zero_parameter():
    spec = SeriesSpec.of([F(1, 2), 0], [F(5, 4)])
    for n in (1, 5, 100):
        assert partial_sum(spec, n, CTX) == 1


def test_partial_sum_terminating():
    spec = SeriesSpec.of([-2, F(1, 4)], [F(5, 4)])
    expect = 1 - F(2, 5) + F(1, 9)
    for n in (3, 4, 50):
        assert partial_sum(spec, n, CTX) == to_real(expect, CTX)
    assert partial_sum(spec, 2, CTX) == to_real(F(3, 5), CTX)


def test_partial_sum_first_terms():
    # t_1 = (1/2)(1/4)/(5/4), t_2 = (1/2)(3/2)(1/4)(5/4) / ((5/4)(9/4) 2!)
    t1 = F(1, 2) * F(1, 4) / F(5, 4)
    t2 = F(1, 2) * F(3, 2) * F(1, 4) * F(5, 4) / (F(5, 4) * F(9, 4) * 2)
    assert RAM14.exact_terms(3) == [1, t1, t2]
    assert partial_sum(RAM14, 3, CTX) == to_real(1 + t1 + t2, CTX)


@settings(max_examples=40, deadline=None)
@given(st.lists(small, min_size=2, max_size=3), st.integers(1, 200))
def test_partial_sum_matches_exact(params, n):
    num, den = params, [F(5, 4)] * (len(params) - 1)
    spec = SeriesSpec.of(num, den)
    exact = sum(spec.exact_terms(n), F(0))
    assert abs(partial_sum(spec, n, CTX) - to_real(exact, CTX)) <= CTX.eps() * max(1, abs(to_real(exact, CTX))) * n


@pytest.mark.parametrize("n", [10, 100, 1000, 10_000])
def test_recurrence_matches_pochhammer_product(n):
    for spec in (RAM12, RAM14, d_extended_series(F(7, 3))):
        stream = TermStream.for_context(spec, CTX)
        stream.advance_to(n)
        exact = to_real(spec.exact_term(n), CTX)
        assert abs(stream.term(CTX) - exact) <= CTX.mp.mpf(10) ** (4 - CTX.working_digits) * exact


def test_partial_sums_increase_to_closed_form():
    limit = ram_rhs(IdentityId.RAM_1_14, CTX)
    previous = partial_sum(RAM14, 1, CTX)
    for n in (2, 3, 10, 100, 1000, 5000):
        s = partial_sum(RAM14, n, CTX)
        assert previous < s < limit
        previous = s


# --- direct summation -------------------------------------------------------

def test_direct_sum_trivial():
    r = direct_sum(SeriesSpec.of([F(1, 2), 0], [F(5, 4)]), CTX, 1e-10)
    assert r.value == 1 and r.error_estimate == 0 and r.method == "exact-terminating"


def test_direct_sum_ramanujan_1_12():
    r = direct_sum(RAM12, CTX, CTX.mp.mpf(10) ** -6)
    ref = ram_rhs(IdentityId.RAM_1_12, CTX)
    assert abs(r.value - ref) <= r.error_estimate
    assert abs(r.value - mpmath.mpf("1.094220")) < 2e-6
    assert 10**5 < r.terms_used < 10**6


@pytest.mark.parametrize("spec, eps", [(RAM12, 1e-5), (RAM12, 1e-7), (d_extended_series(F(2)), 1e-3),
                                       (SeriesSpec.of([F(1, 3), F(1, 2)], [F(7, 2)]), 1e-12)])
def test_tail_bound_is_sound(spec, eps):
    r = direct_sum(spec, CTX, eps)
    assert r.error_estimate <= eps
    assert abs(partial_sum(spec, 2 * r.terms_used, CTX) - r.value) <= r.error_estimate
    assert abs(hyper_oracle(spec) - r.value) <= r.error_estimate


def test_direct_sum_budget_exceeded_fast():
    with pytest.raises(BudgetExceeded) as info:
        direct_sum(RAM14, CTX, CTX.mp.mpf(10) ** -20)
    partial = info.value.partial
    assert isinstance(partial, SumResult) and partial.terms_used < 10**5


def test_divergent_and_boundary():
    with pytest.raises(Diverges):
        direct_sum(SeriesSpec.of([1, 1], [1]), CTX, 1e-5)
    with pytest.raises(Diverges, match="boundary"):
        richardson_sum(SeriesSpec.of([F(1, 2), F(1, 2)], [1]), CTX)


# --- acceleration -------------------------------------------------------------

def test_richardson_ramanujan():
    for ident, spec in ((IdentityId.RAM_1_14, RAM14), (IdentityId.RAM_1_12, RAM12)):
        r = richardson_sum(spec, CTX, 25)
        assert rel(r.value, ram_rhs(ident, CTX)) < 1e-25
        assert r.error_estimate <= abs(r.value) * 1e-25


def test_richardson_zero_parameter():
    r = richardson_sum(SeriesSpec.of([F(1, 2), 0], [F(5, 4)]), CTX)
    assert r.value == 1


def test_richardson_refuses_sign_changes():
    with pytest.raises(SignChange):
        richardson_sum(SeriesSpec.of([F(-81, 2), F(1, 3)], [F(50)]), CTX)


def test_levin_terminating_exact():
    spec = SeriesSpec.of([-2, F(1, 4)], [F(5, 4)])
    assert levin_sum(spec, CTX).value == to_real(1 - F(2, 5) + F(1, 9), CTX)


@pytest.mark.parametrize("spec", [RAM14, RAM12, d_extended_series(F(2)), d_extended_series(F(1, 2)),
                                  SeriesSpec.of([F(-1, 3), F(1, 5), F(1, 7)], [F(11, 3), F(9, 7)])])
def test_levin_and_richardson_agree(spec):
    r = richardson_sum(spec, CTX)
    v = levin_sum(spec, CTX)
    assert abs(r.value - v.value) <= r.error_estimate + v.error_estimate
    assert rel(v.value, hyper_oracle(spec)) < 1e-28


def test_levin_handles_late_sign_change():
    spec = SeriesSpec.of([F(-81, 2), F(1, 3)], [F(-118, 3)])
    r = sum_unit_argument(spec, CTX)
    assert r.method == "levin" and r.details["start"] == 41
    assert rel(r.value, hyper_oracle(spec, 80)) < 1e-28


def test_large_negative_parameters_richardson():
    spec = SeriesSpec.of([F(-41, 2), F(1, 3)], [F(-52, 3)])
    assert rel(sum_unit_argument(spec, CTX).value, hyper_oracle(spec, 80)) < 1e-28


def test_zero_sum_is_not_reported_as_converged():
    # Gauss: 1/Gamma(c - b) = 1/Gamma(-18) = 0, so no relative target is reachable
    spec = SeriesSpec.of([F(-41, 2), F(1, 3)], [F(-53, 3)])
    with pytest.raises(NoConvergence):
        sum_unit_argument(spec, CTX)


def test_sum_unit_argument_reduction():
    a = sum_unit_argument(d_extended_series(F(5, 4)), CTX, 25)
    b = sum_unit_argument(RAM14, CTX, 25)
    assert mpmath.nstr(a.value, 5, strip_zeros=False) == "1.3110"
    assert abs(a.value - b.value) <= a.error_estimate + b.error_estimate


def test_sum_unit_argument_zero_parameter():
    assert sum_unit_argument(SeriesSpec.of([F(1, 2), 0], [F(5, 4)]), CTX).value == 1


def test_sum_unit_argument_methods():
    for method in ("direct", "richardson", "levin", "auto"):
        r = sum_unit_argument(SeriesSpec.of([F(1, 3), F(1, 2)], [F(7, 2)]), CTX, 12, method)
        assert rel(r.value, hyper_oracle(SeriesSpec.of([F(1, 3), F(1, 2)], [F(7, 2)]))) < 1e-12
    with pytest.raises(ValueError):
        sum_unit_argument(RAM14, CTX, method="wynn")


def test_every_registry_series_cross_checks():
    from hypersum.theorems import random_binding
    import random
    rng = random.Random(3)
    for ident in IdentityId:
        entry = REGISTRY[ident]
        p = random_binding(ident, rng) if entry.slots else None
        spec = lhs_series(ident, p) if p is not None else lhs_series(ident)
        if spec.terminates:
            continue
        v = levin_sum(spec, CTX)
        if spec.one_signed_from(32):
            r = richardson_sum(spec, CTX)
            assert abs(r.value - v.value) <= r.error_estimate + v.error_estimate, ident


@given(st.integers(min_value=0))
def test_sum_result_validation(n):
    with pytest.raises(ValueError):
        SumResult(mpmath.mpf(1), mpmath.mpf(-1), n + 1, "direct")
    with pytest.raises(ValueError):
        SumResult(mpmath.mpf(1), mpmath.mpf(0), 0, "direct")
