"""Unit-argument generalized hypergeometric series and their summation.

A series ``pFq[a; b; 1]`` with ``p = q + 1`` has terms that decay like
``C * n**-tau`` where ``tau = 1 + sum(b) - sum(a)``.  For ``tau`` close to 1
plain summation is hopeless, so two independent accelerators are provided:

* ``richardson_sum`` extrapolates partial sums taken at ``N0 * 2**k`` against
  the known exponent ladder ``1 - tau, -tau, -1 - tau, ...``;
* ``levin_sum`` applies the Levin u-transform to the first few dozen
  partial sums.

The term recurrence for Richardson and direct summation runs in binary
fixed point on Python integers, which is several times faster than mpf
arithmetic for the hundreds of thousands of terms involved.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import mpmath

from .gamma import pochhammer_exact
from .precision import PrecisionContext, to_real

N0 = 32
MAX_DEPTH = 16
TERM_BUDGET = 5 * 10**6
LEVIN_BETA = 1
# direct summation is chosen when the tail reaches 10**-digits within ~10**4 terms
DIRECT_LOG10_TERMS = 4

_FIXED_GUARD_BITS = 32


class SeriesError(ArithmeticError):
    pass


class WrongShape(SeriesError):
    """The operation needs p = q + 1."""


class PoleInTerms(SeriesError):
    """A denominator parameter hits 0, -1, -2, ... before the series ends."""


class Diverges(SeriesError):
    """Non-terminating series with nonpositive parameter excess."""


class SignChange(SeriesError):
    """Terms change sign beyond the first Richardson checkpoint."""


class _PartialResultError(SeriesError):
    def __init__(self, message: str, partial: "SumResult"):
        super().__init__(message)
        self.partial = partial


class BudgetExceeded(_PartialResultError):
    """Direct summation ran out of terms; ``partial`` holds the best effort."""


class NoConvergence(_PartialResultError):
    """An accelerator stalled before the target; ``partial`` is its best estimate."""


def _nonpositive_int(x: Fraction) -> bool:
    return x.denominator == 1 and x <= 0


@dataclass(frozen=True)
class SeriesSpec:
    numerator: tuple[Fraction, ...]
    denominator: tuple[Fraction, ...]
    argument: Fraction = Fraction(1)

    def __post_init__(self):
        object.__setattr__(self, "numerator", tuple(Fraction(a) for a in self.numerator))
        object.__setattr__(self, "denominator", tuple(Fraction(b) for b in self.denominator))
        object.__setattr__(self, "argument", Fraction(self.argument))
        if self.argument != 1:
            raise ValueError("only unit-argument series are supported")
        stop = self.terminating_order
        for b in self.denominator:
            if _nonpositive_int(b) and (stop is None or -b < stop):
                raise PoleInTerms(f"denominator parameter {b} produces a pole")

    @classmethod
    def of(cls, numerator: Sequence, denominator: Sequence) -> "SeriesSpec":
        return cls(tuple(numerator), tuple(denominator))

    @property
    def p(self) -> int:
        return len(self.numerator)

    @property
    def q(self) -> int:
        return len(self.denominator)

    @property
    def terminating_order(self) -> Optional[int]:
        """Index of the last nonzero term, or None if the series is infinite."""
        orders = [int(-a) for a in self.numerator if _nonpositive_int(a)]
        return min(orders) if orders else None

    @property
    def terminates(self) -> bool:
        return self.terminating_order is not None

    @property
    def parameter_excess(self) -> Fraction:
        return sum(self.denominator, Fraction(0)) - sum(self.numerator, Fraction(0))

    def term_ratio(self, n: int) -> tuple[int, int]:
        """Integers (N, D), D > 0, with t_{n+1} / t_n = N / D."""
        num, den = 1, n + 1
        for a in self.numerator:
            num *= a.numerator + n * a.denominator
            den *= a.denominator
        for b in self.denominator:
            den *= b.numerator + n * b.denominator
            num *= b.denominator
        if den < 0:
            num, den = -num, -den
        return num, den

    def exact_term(self, n: int) -> Fraction:
        """t_n from scratch as a ratio of Pochhammer products."""
        num = Fraction(1)
        for a in self.numerator:
            num *= pochhammer_exact(a, n)
        den = Fraction(math.factorial(n))
        for b in self.denominator:
            den *= pochhammer_exact(b, n)
        if den == 0:
            if num == 0:
                return Fraction(0)
            raise PoleInTerms(f"term {n} has a zero denominator")
        return num / den

    def exact_terms(self, count: int) -> list[Fraction]:
        """First ``count`` terms by the exact recurrence."""
        out = []
        t = Fraction(1)
        stop = self.terminating_order
        for n in range(count):
            if stop is not None and n > stop:
                t = Fraction(0)
            out.append(t)
            if t:
                num, den = self.term_ratio(n)
                t = t * num / den if num else Fraction(0)
        return out

    def one_signed_from(self, n: int) -> bool:
        """True if every term from index ``n`` on has the same sign."""
        return all(x + n > 0 for x in self.numerator + self.denominator)


@dataclass
class SumResult:
    value: mpmath.mpf
    error_estimate: mpmath.mpf
    terms_used: int
    method: str  # "direct" | "richardson" | "levin" | "exact-terminating"
    details: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.error_estimate < 0:
            raise ValueError("error_estimate must be nonnegative")
        if self.terms_used < 1:
            raise ValueError("terms_used must be at least 1")


class TermStream:
    """Running term t_n and partial sum S_n = t_0 + ... + t_{n-1}.

    Values are binary fixed point with ``bits`` fractional bits.  Each step
    floors once, so after n steps the absolute error is below n ulps.
    """

    def __init__(self, spec: SeriesSpec, bits: int):
        self.spec = spec
        self.bits = bits
        self.n = 0
        self._term = 1 << bits
        self._total = 0
        self._num = [(a.numerator, a.denominator) for a in spec.numerator]
        self._den = [(b.numerator, b.denominator) for b in spec.denominator]
        self._num_scale = math.prod(b.denominator for b in spec.denominator)
        self._den_scale = math.prod(a.denominator for a in spec.numerator)

    @classmethod
    def for_context(cls, spec: SeriesSpec, ctx: PrecisionContext) -> "TermStream":
        return cls(spec, ctx.working_bits + _FIXED_GUARD_BITS)

    def advance_to(self, stop: int) -> None:
        n, t, s = self.n, self._term, self._total
        num_params, den_params = self._num, self._den
        cn, cd = self._num_scale, self._den_scale
        while n < stop:
            s += t
            if t:
                num = cn
                for p, q in num_params:
                    num *= p + n * q
                den = (n + 1) * cd
                for p, q in den_params:
                    den *= p + n * q
                if den < 0:
                    num, den = -num, -den
                t = t * num // den if num else 0
            n += 1
        self.n, self._term, self._total = n, t, s

    def term(self, ctx: PrecisionContext) -> mpmath.mpf:
        return ctx.mp.ldexp(ctx.mp.mpf(self._term), -self.bits)

    def total(self, ctx: PrecisionContext) -> mpmath.mpf:
        return ctx.mp.ldexp(ctx.mp.mpf(self._total), -self.bits)

    def drift(self, ctx: PrecisionContext) -> mpmath.mpf:
        """Relative gap between the running t_n and its from-scratch value."""
        exact = to_real(self.spec.exact_term(self.n), ctx)
        if exact == 0:
            return abs(self.term(ctx))
        return abs(self.term(ctx) - exact) / abs(exact)


def tail_exponent(spec: SeriesSpec) -> Fraction:
    """tau with t_n ~ C n**-tau, i.e. 1 + sum(b) - sum(a)."""
    if spec.p != spec.q + 1:
        raise WrongShape(f"tail exponent needs p = q + 1, got p={spec.p}, q={spec.q}")
    return 1 + spec.parameter_excess


def _exact_sum(spec: SeriesSpec, ctx: PrecisionContext, count: Optional[int] = None) -> SumResult:
    stop = spec.terminating_order
    n_terms = stop + 1 if count is None else min(count, stop + 1)
    total = sum(spec.exact_terms(n_terms), Fraction(0))
    return SumResult(to_real(total, ctx), ctx.mp.mpf(0), n_terms, "exact-terminating",
                     {"exact": total})


def partial_sum(spec: SeriesSpec, n_terms: int, ctx: PrecisionContext) -> mpmath.mpf:
    """S_N = t_0 + ... + t_{N-1}."""
    if n_terms < 1:
        raise ValueError("N must be positive")
    if spec.terminates:
        return _exact_sum(spec, ctx, n_terms).value
    stream = TermStream.for_context(spec, ctx)
    stream.advance_to(n_terms)
    return stream.total(ctx)


def _check_convergent(spec: SeriesSpec) -> Fraction:
    sigma = tail_exponent(spec) - 1
    if sigma <= 0:
        kind = "boundary case" if sigma == 0 else "parameter excess"
        raise Diverges(f"non-terminating series diverges at z = 1 ({kind} {sigma})")
    return sigma


def _relative_target(target_digits: int, value, ctx: PrecisionContext):
    return abs(value) * ctx.mp.mpf(10) ** (-target_digits)


def direct_sum(spec: SeriesSpec, ctx: PrecisionContext, eps, budget: int = TERM_BUDGET,
               chunk: int = 256) -> SumResult:
    """Sum terms until the integral tail bound drops below ``eps``.

    The bound |t_N| (1 + N / (tau - 1)) holds once the terms decay
    monotonically like n**-tau.  When the bound's decay rate shows the
    budget cannot be met, BudgetExceeded is raised without spending it.
    """
    if spec.terminates:
        return _exact_sum(spec, ctx)
    sigma = _check_convergent(spec)
    stream = TermStream.for_context(spec, ctx)
    scale = 1 << stream.bits
    eps_fixed = max(1, int(ctx.mp.mpf(eps) * scale))
    # start testing once every factor of the term ratio is positive
    start = max([64] + [int(-x) + 2 for x in spec.numerator + spec.denominator if x < 0])

    def bound() -> int:
        n = stream.n
        return abs(stream._term) * (sigma.numerator + n * sigma.denominator) // sigma.numerator

    def result(b: int) -> SumResult:
        return SumResult(stream.total(ctx), ctx.mp.mpf(b) / scale, stream.n, "direct")

    next_projection = 4096
    while True:
        stream.advance_to(min(budget, stream.n + chunk))
        if stream.n < start:
            continue
        b = bound()
        if b <= eps_fixed:
            return result(b)
        if stream.n >= budget:
            raise BudgetExceeded(f"tail bound above eps after {stream.n} terms", result(b))
        if stream.n >= next_projection:
            next_projection *= 2
            # bound ~ n**-sigma: project the count needed to reach eps
            needed = stream.n * (b / eps_fixed) ** (1 / float(sigma))
            if needed > 4 * budget:
                raise BudgetExceeded(
                    f"tail bound projects ~{needed:.3g} terms, budget {budget}", result(b))
        chunk = min(chunk * 2, 1 << 16)


def _richardson_table_row(prev_row, s_new, factors):
    row = [s_new]
    for j, g in enumerate(factors[: len(prev_row)]):
        row.append((g * row[j] - prev_row[j]) / (g - 1))
    return row


def richardson_sum(spec: SeriesSpec, ctx: PrecisionContext, target_digits: Optional[int] = None,
                   n0: int = N0, max_depth: int = MAX_DEPTH) -> SumResult:
    """Richardson extrapolation of S_N at N = n0 * 2**k.

    S - S_N = sum_k c_k N**(1 - tau - k), so level j of the table removes
    N**-(tau - 1 + j).  The error estimate is the gap between the two
    highest orders available at the last checkpoint.
    """
    if target_digits is None:
        target_digits = ctx.target_digits
    if spec.terminates:
        return _exact_sum(spec, ctx)
    sigma = _check_convergent(spec)
    if not spec.one_signed_from(n0):
        raise SignChange("terms change sign past the first checkpoint")
    mp = ctx.mp
    two = mp.mpf(2)
    sig = to_real(sigma, ctx)
    factors = [two ** (sig + j) for j in range(max_depth + 1)]
    stream = TermStream.for_context(spec, ctx)
    rows = []
    best: Optional[SumResult] = None
    stale = 0
    for k in range(max_depth + 1):
        stream.advance_to(n0 << k)
        s = stream.total(ctx)
        row = _richardson_table_row(rows[-1] if rows else [], s, factors)
        rows.append(row)
        if k == 0:
            continue
        err = abs(row[-1] - row[-2])
        current = SumResult(row[-1], err, stream.n, "richardson", {"depth": k})
        if best is None or err < best.error_estimate:
            best, stale = current, 0
        else:
            stale += 1
        if err <= _relative_target(target_digits, row[-1], ctx):
            return current
        if stale >= 3:
            raise NoConvergence("Richardson table stopped improving", best)
    raise NoConvergence(f"target not reached at depth {max_depth}", best)


def levin_sum(spec: SeriesSpec, ctx: PrecisionContext, target_digits: Optional[int] = None,
              max_order: Optional[int] = None, beta: int = LEVIN_BETA) -> SumResult:
    """Levin u-transform L_k of the partial sums s_0, ..., s_k.

    The transform cancels heavily, so it runs at twice the working digits.
    Error estimate: the larger of the last two successive differences.
    """
    if target_digits is None:
        target_digits = ctx.target_digits
    if spec.terminates:
        return _exact_sum(spec, ctx)
    if spec.p != spec.q + 1:
        raise WrongShape("Levin summation here needs p = q + 1")
    _check_convergent(spec)
    if max_order is None:
        max_order = 3 * target_digits + 40
    # start past the last sign change so the remainder model applies
    start = max([0] + [int(-x) + 1 for x in spec.numerator + spec.denominator if x < 0])
    work = ctx.extended(ctx.working_digits)
    mp = work.mp
    t = mp.mpf(1)
    s = mp.mpf(0)
    s_over_w, inv_w = [], []
    estimates = []
    best: Optional[SumResult] = None
    stale = 0
    for j in range(start + max_order + 1):
        s += t
        if j >= start:
            # index restarts at the first transformed term; weights centred on the
            # original n drift far from the terms' own scale when start is large
            w = (beta + j - start) * t
            s_over_w.append(s / w)
            inv_w.append(1 / w)
        num, den = spec.term_ratio(j)
        t = t * num / den
        k = j - start
        if k < 1:
            continue
        nu = mp.mpf(0)
        de = mp.mpf(0)
        binom = 1
        for i in range(k + 1):
            c = binom * (beta + i) ** (k - 1)
            if i % 2:
                c = -c
            nu += c * s_over_w[i]
            de += c * inv_w[i]
            binom = binom * (k - i) // (i + 1)
        estimates.append(nu / de)
        if len(estimates) < 3:
            continue
        err = max(abs(estimates[-1] - estimates[-2]), abs(estimates[-2] - estimates[-3]))
        value = ctx.mp.mpf(estimates[-1])
        current = SumResult(value, ctx.mp.mpf(err), j + 1, "levin", {"order": k, "start": start})
        if best is None or err < best.error_estimate:
            best, stale = current, 0
        else:
            stale += 1
        if err <= _relative_target(target_digits, estimates[-1], work):
            return current
        # early orders are erratic; only a long plateau past order 20 counts
        if k > 20 and stale >= 10:
            raise NoConvergence("Levin transform stopped improving", best)
    raise NoConvergence(f"target not reached at order {max_order}", best)


def direct_is_feasible(spec: SeriesSpec, target_digits: int) -> bool:
    sigma = tail_exponent(spec) - 1
    return sigma > 0 and target_digits <= DIRECT_LOG10_TERMS * sigma


def sum_unit_argument(spec: SeriesSpec, ctx: PrecisionContext, target_digits: Optional[int] = None,
                      method: str = "auto") -> SumResult:
    """Sum ``spec`` at z = 1 to ``target_digits`` relative digits.

    ``auto``: exact for terminating series, direct summation for fast tails,
    otherwise Richardson cross-checked by Levin (Levin alone for series that
    change sign late).  The reported error is at least the gap between the
    two accelerators.
    """
    if target_digits is None:
        target_digits = ctx.target_digits
    if method not in ("auto", "direct", "richardson", "levin"):
        raise ValueError(f"unknown method {method!r}")
    if spec.terminates:
        return _exact_sum(spec, ctx)
    if method == "direct":
        return direct_sum(spec, ctx, ctx.mp.mpf(10) ** (-target_digits))
    if method == "richardson":
        return richardson_sum(spec, ctx, target_digits)
    if method == "levin":
        return levin_sum(spec, ctx, target_digits)

    _check_convergent(spec)
    if direct_is_feasible(spec, target_digits):
        try:
            return direct_sum(spec, ctx, ctx.mp.mpf(10) ** (-target_digits - 1))
        except BudgetExceeded:
            pass
    if not spec.one_signed_from(N0):
        return levin_sum(spec, ctx, target_digits)

    try:
        primary = richardson_sum(spec, ctx, target_digits)
    except NoConvergence as exc:
        return _levin_after_richardson(spec, ctx, target_digits, exc.partial)
    try:
        check = levin_sum(spec, ctx, target_digits)
    except NoConvergence as exc:
        check = exc.partial
    gap = abs(primary.value - check.value)
    details = dict(primary.details, levin_value=check.value, levin_error=check.error_estimate,
                   richardson_error=primary.error_estimate)
    return SumResult(primary.value, max(primary.error_estimate, gap), primary.terms_used,
                     "richardson", details)


def _levin_after_richardson(spec, ctx, target_digits, coarse: Optional[SumResult]) -> SumResult:
    """Levin as primary once Richardson has stalled.

    The stalled table still gives a coarse value; Levin must land inside its
    error bar, otherwise the gap becomes the reported error.
    """
    result = levin_sum(spec, ctx, target_digits)
    details = dict(result.details, richardson_stalled=True)
    error = result.error_estimate
    if coarse is not None:
        gap = abs(result.value - coarse.value)
        details.update(richardson_value=coarse.value, richardson_error=coarse.error_estimate)
        if gap > coarse.error_estimate + result.error_estimate:
            error = max(error, gap)
    return SumResult(result.value, error, result.terms_used, "levin", details)
