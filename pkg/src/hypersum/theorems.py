"""Registry of unit-argument summation theorems.

Each entry pairs a series constructor (the left-hand side) with a closed-form
evaluator in Gamma functions (the right-hand side), a validity predicate and
the parameter constraints under which it collapses onto another entry.

The Ramanujan instances are registered on their own, with their closed forms
written directly in pi and Gamma(3/4), rather than derived from the general
theorems; checking them against each other is then a real test.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from typing import Callable, Mapping, Optional

import mpmath

from .gamma import PoleError, gamma, gamma_ratio
from .precision import PrecisionContext, format_rational, rescale, to_real
from .series import PoleInTerms, SeriesSpec

F = Fraction
HALF = F(1, 2)
SLOTS = ("a", "b", "c", "d")


class IdentityId(str, Enum):
    GAUSS_1_6 = "gauss_1_6"
    DIXON_1_7 = "dixon_1_7"
    EXT_GAUSS_1_8 = "ext_gauss_1_8"
    EXT_DIXON_1_9 = "ext_dixon_1_9"
    RAM_1_12 = "ram_1_12"
    RAM_1_13 = "ram_1_13"
    RAM_1_14 = "ram_1_14"
    EXT_RAM_1_15 = "ext_ram_1_15"
    EXT_RAM_1_16 = "ext_ram_1_16"
    EXT_RAM_2_1 = "ext_ram_2_1"

    def __str__(self) -> str:
        return self.value


class InvalidParams(ValueError):
    def __init__(self, identity, violated):
        self.identity = identity
        self.violated = list(violated)
        super().__init__(f"{identity}: " + "; ".join(self.violated))


@dataclass(frozen=True)
class ParamBinding:
    a: Optional[Fraction] = None
    b: Optional[Fraction] = None
    c: Optional[Fraction] = None
    d: Optional[Fraction] = None

    def __post_init__(self):
        for slot in SLOTS:
            v = getattr(self, slot)
            if v is not None and not isinstance(v, Fraction):
                object.__setattr__(self, slot, Fraction(v))

    def used(self) -> dict[str, Fraction]:
        return {s: getattr(self, s) for s in SLOTS if getattr(self, s) is not None}

    def to_dict(self) -> dict[str, str]:
        return {s: format_rational(v) for s, v in self.used().items()}

    @classmethod
    def from_dict(cls, data: Mapping[str, str]) -> "ParamBinding":
        from .precision import parse_rational

        return cls(**{k: parse_rational(str(v)) for k, v in data.items()})

    def with_(self, **kw) -> "ParamBinding":
        return replace(self, **kw)

    def __str__(self) -> str:
        return ", ".join(f"{k}={v}" for k, v in self.to_dict().items()) or "-"


@dataclass(frozen=True)
class ValidityVerdict:
    valid: bool
    violated_conditions: tuple[str, ...] = ()

    @classmethod
    def from_violations(cls, violations) -> "ValidityVerdict":
        violations = tuple(violations)
        return cls(not violations, violations)


@dataclass(frozen=True)
class ExtDixonCoefficients:
    alpha_exact: Fraction
    beta_exact: Fraction
    alpha: Optional[mpmath.mpf] = None
    beta: Optional[mpmath.mpf] = None


def _is_pole(x: Fraction) -> bool:
    return x.denominator == 1 and x <= 0


def _poles(label: str, args: Mapping[str, Fraction]):
    for name, v in args.items():
        if _is_pole(v):
            yield f"{label} Gamma({name}) has a pole at {format_rational(v)}"


def _d_condition(d: Fraction):
    if _is_pole(d):
        yield "d != 0, -1, -2, ..."


# --- closed forms -----------------------------------------------------------

def _gamma_products(num, den, ctx: PrecisionContext) -> mpmath.mpf:
    """prod Gamma(num) / prod Gamma(den), pairing arguments positionally."""
    work = ctx.extended(5)
    out = work.mp.mpf(1)
    for x, y in zip(num, den):
        out *= gamma_ratio(x, y, work)
    for x in num[len(den):]:
        out *= gamma(x, work)
    for y in den[len(num):]:
        out /= gamma(y, work)
    return rescale(out, ctx)


def gauss_rhs(a, b, c, ctx: PrecisionContext) -> mpmath.mpf:
    """Gamma(c) Gamma(c-a-b) / (Gamma(c-a) Gamma(c-b))."""
    a, b, c = F(a), F(b), F(c)
    try:
        return _gamma_products([c, c - a - b], [c - b, c - a], ctx)
    except PoleError as exc:
        raise InvalidParams(IdentityId.GAUSS_1_6, [str(exc)]) from exc


def ext_gauss_bracket(a, b, c, d) -> Fraction:
    a, b, c, d = F(a), F(b), F(c), F(d)
    return (c - a - b) + a * b / d


def ext_gauss_rhs(a, b, c, d, ctx: PrecisionContext) -> mpmath.mpf:
    a, b, c, d = F(a), F(b), F(c), F(d)
    if _is_pole(d):
        raise InvalidParams(IdentityId.EXT_GAUSS_1_8, ["d != 0, -1, -2, ..."])
    try:
        g = _gamma_products([c + 1, c - a - b], [c - b + 1, c - a + 1], ctx)
    except PoleError as exc:
        raise InvalidParams(IdentityId.EXT_GAUSS_1_8, [str(exc)]) from exc
    return g * to_real(ext_gauss_bracket(a, b, c, d), ctx)


def dixon_rhs(a, b, c, ctx: PrecisionContext) -> mpmath.mpf:
    a, b, c = F(a), F(b), F(c)
    h = a / 2
    num = [1 + a - b, 1 + h, 1 + a - c, 1 + h - b - c]
    den = [1 + a, 1 + h - b, 1 + a - b - c, 1 + h - c]
    try:
        return _gamma_products(num, den, ctx)
    except PoleError as exc:
        raise InvalidParams(IdentityId.DIXON_1_7, [str(exc)]) from exc


def ext_dixon_coeffs(a, b, c, d, ctx: Optional[PrecisionContext] = None) -> ExtDixonCoefficients:
    a, b, c, d = F(a), F(b), F(c), F(d)
    problems = []
    if d == 0:
        problems.append("d != 0")
    if 1 + a - b - c == 0:
        problems.append("1 + a - b - c != 0")
    if problems:
        raise InvalidParams(IdentityId.EXT_DIXON_1_9, problems)
    alpha = 1 - (1 + a - b) / d
    beta = (1 + a - b) / (1 + a - b - c) * (a / d * (1 + a - b - 2 * c) - 2 * (a / 2 - b - c + 1))
    if ctx is None:
        return ExtDixonCoefficients(alpha, beta)
    return ExtDixonCoefficients(alpha, beta, to_real(alpha, ctx), to_real(beta, ctx))


def ext_dixon_rhs(a, b, c, d, ctx: PrecisionContext) -> mpmath.mpf:
    """Two-term closed form, evaluated as printed; b = 1 is rejected."""
    a, b, c, d = F(a), F(b), F(c), F(d)
    if b == 1:
        raise InvalidParams(IdentityId.EXT_DIXON_1_9, ["b != 1"])
    coeffs = ext_dixon_coeffs(a, b, c, d)
    work = ctx.extended(5)
    mp = work.mp
    h = a / 2
    sqrt_pi = mp.sqrt(mp.pi)
    total = mp.mpf(0)
    try:
        if coeffs.alpha_exact:
            g1 = _gamma_products(
                [2 + a - b, 1 + a - c, F(3, 2) + h - b - c],
                [h - b + F(3, 2), h - c + HALF, 2 + a - b - c, h], work)
            total += to_real(coeffs.alpha_exact / (b - 1), work) * mp.power(2, to_real(-a, work)) * sqrt_pi * g1
        if coeffs.beta_exact:
            g2 = _gamma_products(
                [1 + a - b, 1 + a - c, 1 + h - b - c],
                [h - b + 1, h - c + 1, 1 + a - b - c, h + HALF], work)
            total += to_real(coeffs.beta_exact / (b - 1), work) * mp.power(2, to_real(-a - 1, work)) * sqrt_pi * g2
    except PoleError as exc:
        raise InvalidParams(IdentityId.EXT_DIXON_1_9, [str(exc)]) from exc
    return rescale(total, ctx)


def _ram_pieces(ctx: PrecisionContext):
    work = ctx.extended(5)
    mp = work.mp
    g = gamma(F(3, 4), work)
    return work, mp, mp.pi, g * g, mp.sqrt(2)


def ram_rhs(identity, ctx: PrecisionContext) -> mpmath.mpf:
    identity = IdentityId(identity)
    work, mp, pi, g2, root2 = _ram_pieces(ctx)
    if identity is IdentityId.RAM_1_12:
        out = pi**2 / (4 * g2 * g2)
    elif identity is IdentityId.RAM_1_13:
        out = pi**2 * mp.sqrt(pi) / (8 * root2 * g2)
    elif identity is IdentityId.RAM_1_14:
        out = pi * mp.sqrt(pi) / (2 * root2 * g2)
    else:
        raise ValueError(f"{identity} is not a fixed Ramanujan constant")
    return rescale(out, ctx)


def ext_ram_rhs(identity, d, ctx: PrecisionContext) -> mpmath.mpf:
    identity = IdentityId(identity)
    d = F(d)
    if _is_pole(d):
        raise InvalidParams(identity, ["d != 0, -1, -2, ..."])
    work, mp, pi, g2, root2 = _ram_pieces(ctx)
    r = lambda q: to_real(q, work)  # noqa: E731
    if identity is IdentityId.EXT_RAM_1_15:
        out = r(F(4, 3) * (1 / d - 1)) / pi + pi**2 / (g2 * g2) * r(F(1, 3) * (1 - 1 / (4 * d)))
    elif identity is IdentityId.EXT_RAM_1_16:
        pi32 = pi * mp.sqrt(pi)
        out = (pi32 / (root2 * g2) * r(F(5, 48) * (F(5, 4) / d - 1))
               - pi * pi32 / (root2 * g2) * r(F(5, 32) * (1 / (4 * d) - 1)))
    elif identity is IdentityId.EXT_RAM_2_1:
        out = pi * mp.sqrt(pi) / (root2 * g2) * r(F(5, 12) * (1 + 1 / (4 * d)))
    else:
        raise ValueError(f"{identity} has no d-extension closed form")
    return rescale(out, ctx)


# --- registry ---------------------------------------------------------------

@dataclass(frozen=True)
class Reduction:
    constraint: str
    target: IdentityId
    specialize: Callable[[ParamBinding], ParamBinding]
    target_params: Callable[[ParamBinding], ParamBinding]


@dataclass(frozen=True)
class Identity:
    id: IdentityId
    title: str
    slots: tuple[str, ...]
    conditions: tuple[str, ...]
    lhs_params: Callable[[ParamBinding], tuple[list, list]]
    rhs: Callable[[ParamBinding, PrecisionContext], mpmath.mpf]
    checks: Callable[[ParamBinding], list] = field(default=lambda p: [])
    reductions: tuple[Reduction, ...] = ()


def _gauss_checks(p):
    a, b, c = p.a, p.b, p.c
    if not c - a - b > 0:
        yield f"c - a - b > 0 (got {format_rational(c - a - b)})"
    yield from _poles("RHS", {"c": c, "c-a-b": c - a - b, "c-a": c - a, "c-b": c - b})


def _ext_gauss_checks(p):
    a, b, c, d = p.a, p.b, p.c, p.d
    if not c - a - b > 0:
        yield f"c - a - b > 0 (got {format_rational(c - a - b)})"
    yield from _d_condition(d)
    yield from _poles("RHS", {"c+1": c + 1, "c-a-b": c - a - b, "c-a+1": c - a + 1, "c-b+1": c - b + 1})


def _dixon_checks(p):
    a, b, c = p.a, p.b, p.c
    if not a - 2 * b - 2 * c > -2:
        yield f"a - 2b - 2c > -2 (got {format_rational(a - 2 * b - 2 * c)})"
    h = a / 2
    yield from _poles("RHS", {"1+a/2": 1 + h, "1+a-b": 1 + a - b, "1+a-c": 1 + a - c,
                              "1+a/2-b-c": 1 + h - b - c, "1+a": 1 + a, "1+a/2-b": 1 + h - b,
                              "1+a/2-c": 1 + h - c, "1+a-b-c": 1 + a - b - c})


def _ext_dixon_checks(p):
    a, b, c, d = p.a, p.b, p.c, p.d
    if not a - 2 * b - 2 * c > -2:
        yield f"a - 2b - 2c > -2 (got {format_rational(a - 2 * b - 2 * c)})"
    yield from _d_condition(d)
    if b == 1:
        yield "b != 1 (closed form divides by b - 1)"
    if 1 + a - b - c == 0:
        yield "1 + a - b - c != 0 (beta divides by it)"
    h = a / 2
    args = {"1+a-c": 1 + a - c, "2+a-b": 2 + a - b, "3/2+a/2-b-c": F(3, 2) + h - b - c,
            "a/2": h, "a/2-c+1/2": h - c + HALF, "a/2-b+3/2": h - b + F(3, 2), "2+a-b-c": 2 + a - b - c,
            "1+a-b": 1 + a - b, "1+a/2-b-c": 1 + h - b - c, "a/2+1/2": h + HALF,
            "a/2-b+1": h - b + 1, "a/2-c+1": h - c + 1, "1+a-b-c": 1 + a - b - c}
    yield from _poles("RHS", args)


def _ext_ram_checks(p):
    yield from _d_condition(p.d)


def _keep(*slots):
    return lambda p: ParamBinding(**{s: getattr(p, s) for s in slots})


_RAM_12 = ([HALF, HALF, F(1, 4)], [F(1), F(5, 4)])
_RAM_13 = ([HALF, F(1, 4), F(1, 4)], [F(5, 4), F(5, 4)])
_RAM_14 = ([HALF, F(1, 4)], [F(5, 4)])

_ENTRIES = [
    Identity(
        IdentityId.GAUSS_1_6, "Gauss summation, 2F1 at unit argument", ("a", "b", "c"),
        ("c - a - b > 0",),
        lambda p: ([p.a, p.b], [p.c]),
        lambda p, ctx: gauss_rhs(p.a, p.b, p.c, ctx),
        _gauss_checks,
    ),
    Identity(
        IdentityId.DIXON_1_7, "Dixon summation, well-poised 3F2", ("a", "b", "c"),
        ("a - 2b - 2c > -2",),
        lambda p: ([p.a, p.b, p.c], [1 + p.a - p.b, 1 + p.a - p.c]),
        lambda p, ctx: dixon_rhs(p.a, p.b, p.c, ctx),
        _dixon_checks,
    ),
    Identity(
        IdentityId.EXT_GAUSS_1_8, "extended Gauss summation, 3F2 with (d+1; d) pair", ("a", "b", "c", "d"),
        ("c - a - b > 0", "d != 0, -1, -2, ..."),
        lambda p: ([p.a, p.b, p.d + 1], [p.c + 1, p.d]),
        lambda p, ctx: ext_gauss_rhs(p.a, p.b, p.c, p.d, ctx),
        _ext_gauss_checks,
        (Reduction("d = c", IdentityId.GAUSS_1_6, lambda p: p.with_(d=p.c), _keep("a", "b", "c")),),
    ),
    Identity(
        IdentityId.EXT_DIXON_1_9, "extended Dixon summation, 4F3 with alpha/beta closed form",
        ("a", "b", "c", "d"),
        ("a - 2b - 2c > -2", "d != 0, -1, -2, ...", "b != 1", "1 + a - b - c != 0"),
        lambda p: ([p.a, p.b, p.c, p.d + 1], [2 + p.a - p.b, 1 + p.a - p.c, p.d]),
        lambda p, ctx: ext_dixon_rhs(p.a, p.b, p.c, p.d, ctx),
        _ext_dixon_checks,
        (Reduction("d = 1 + a - b", IdentityId.DIXON_1_7, lambda p: p.with_(d=1 + p.a - p.b),
                   _keep("a", "b", "c")),),
    ),
    Identity(
        IdentityId.RAM_1_12, "Ramanujan: 1 + (1/5)(1/2)^2 + (1/9)(1.3/2.4)^2 + ...", (), (),
        lambda p: _RAM_12,
        lambda p, ctx: ram_rhs(IdentityId.RAM_1_12, ctx),
    ),
    Identity(
        IdentityId.RAM_1_13, "Ramanujan: 1 + (1/5^2)(1/2) + (1/9^2)(1.3/2.4) + ...", (), (),
        lambda p: _RAM_13,
        lambda p, ctx: ram_rhs(IdentityId.RAM_1_13, ctx),
    ),
    Identity(
        IdentityId.RAM_1_14, "Ramanujan: 1 + (1/5)(1/2) + (1/9)(1.3/2.4) + ...", (), (),
        lambda p: _RAM_14,
        lambda p, ctx: ram_rhs(IdentityId.RAM_1_14, ctx),
    ),
    Identity(
        IdentityId.EXT_RAM_1_15, "extension in d of the squared-ratio Ramanujan series", ("d",),
        ("d != 0, -1, -2, ...",),
        lambda p: (_RAM_12[0] + [p.d + 1], [F(2), F(5, 4), p.d]),
        lambda p, ctx: ext_ram_rhs(IdentityId.EXT_RAM_1_15, p.d, ctx),
        _ext_ram_checks,
        (Reduction("d = 1", IdentityId.RAM_1_12, lambda p: p.with_(d=F(1)), _keep()),),
    ),
    Identity(
        IdentityId.EXT_RAM_1_16, "extension in d of the 1/(4n+1)^2-weighted Ramanujan series", ("d",),
        ("d != 0, -1, -2, ...",),
        lambda p: (_RAM_13[0] + [p.d + 1], [F(9, 4), F(5, 4), p.d]),
        lambda p, ctx: ext_ram_rhs(IdentityId.EXT_RAM_1_16, p.d, ctx),
        _ext_ram_checks,
        (Reduction("d = 5/4", IdentityId.RAM_1_13, lambda p: p.with_(d=F(5, 4)), _keep()),),
    ),
    Identity(
        IdentityId.EXT_RAM_2_1, "extension in d of the 1/(4n+1)-weighted Ramanujan series", ("d",),
        ("d != 0, -1, -2, ...",),
        lambda p: ([HALF, F(1, 4), p.d + 1], [F(9, 4), p.d]),
        lambda p, ctx: ext_ram_rhs(IdentityId.EXT_RAM_2_1, p.d, ctx),
        _ext_ram_checks,
        (Reduction("d = 5/4", IdentityId.RAM_1_14, lambda p: p.with_(d=F(5, 4)), _keep()),),
    ),
]

REGISTRY: Mapping[IdentityId, Identity] = {e.id: e for e in _ENTRIES}


def get_identity(identity, registry: Mapping = REGISTRY) -> Identity:
    try:
        return registry[IdentityId(identity)]
    except ValueError:
        raise KeyError(f"unknown identity {identity!r}") from None


def validity(identity, p: ParamBinding, registry: Mapping = REGISTRY) -> ValidityVerdict:
    entry = get_identity(identity, registry)
    violations = [f"missing parameter {s}" for s in entry.slots if getattr(p, s) is None]
    violations += [f"unexpected parameter {s}" for s in p.used() if s not in entry.slots]
    if violations:
        return ValidityVerdict.from_violations(violations)
    violations = list(entry.checks(p))
    if not violations:
        num, den = entry.lhs_params(p)
        try:
            SeriesSpec.of(num, den)
        except PoleInTerms as exc:
            violations.append(f"LHS {exc}")
    return ValidityVerdict.from_violations(violations)


def lhs_series(identity, p: ParamBinding = ParamBinding(), registry: Mapping = REGISTRY) -> SeriesSpec:
    verdict = validity(identity, p, registry)
    if not verdict.valid:
        raise InvalidParams(identity, verdict.violated_conditions)
    num, den = get_identity(identity, registry).lhs_params(p)
    return SeriesSpec.of(num, den)


def rhs_value(identity, p: ParamBinding, ctx: PrecisionContext, registry: Mapping = REGISTRY) -> mpmath.mpf:
    verdict = validity(identity, p, registry)
    if not verdict.valid:
        raise InvalidParams(identity, verdict.violated_conditions)
    return get_identity(identity, registry).rhs(p, ctx)


def reduction_map(identity, registry: Mapping = REGISTRY) -> list[tuple[str, IdentityId]]:
    return [(r.constraint, r.target) for r in get_identity(identity, registry).reductions]


def random_binding(identity, rng: random.Random, registry: Mapping = REGISTRY,
                   max_den: int = 6, low: int = -2, high: int = 3,
                   min_excess: Fraction = F(1, 4)) -> ParamBinding:
    """A random valid binding with small rationals; deterministic given ``rng``.

    ``min_excess`` keeps the series' parameter excess away from zero so the
    binding is practical to sum, not merely convergent.
    """
    entry = get_identity(identity, registry)
    for _ in range(10_000):
        vals = {}
        for s in entry.slots:
            den = rng.randint(1, max_den)
            vals[s] = F(rng.randint(low * den, high * den), den)
        p = ParamBinding(**vals)
        if not validity(identity, p, registry).valid:
            continue
        num, den = entry.lhs_params(p)
        if SeriesSpec.of(num, den).parameter_excess >= min_excess:
            return p
    raise RuntimeError(f"no valid random binding found for {identity}")


def inject_fault(registry: Mapping, identity, factor=F(1, 10**6),
                 params: Optional[ParamBinding] = None) -> dict:
    """Copy of ``registry`` whose RHS for ``identity`` is scaled by (1 + factor).

    With ``params`` given, only that binding is corrupted.  Test fixture.
    """
    identity = IdentityId(identity)
    entry = registry[identity]
    original = entry.rhs

    def corrupted(p, ctx):
        value = original(p, ctx)
        if params is None or p == params:
            value = value * (1 + to_real(F(factor), ctx))
        return value

    out = dict(registry)
    out[identity] = replace(entry, rhs=corrupted)
    return out
