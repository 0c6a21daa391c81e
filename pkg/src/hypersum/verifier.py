"""Independent two-sided verification of registry identities.

The left-hand side is always summed from its series; the closed form is
only ever used as the right-hand side.  Agreement is judged relative to
``10**-(digits - 8)``; a series whose own error estimate is too large to
decide yields ``inconclusive`` rather than a pass or a fail.
"""

from __future__ import annotations

import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Mapping, Optional, Sequence

import mpmath

from .precision import PrecisionContext
from .series import BudgetExceeded, Diverges, NoConvergence, SeriesSpec, sum_unit_argument
from .theorems import (REGISTRY, IdentityId, InvalidParams, ParamBinding, get_identity,
                       random_binding, validity)

F = Fraction
TOLERANCE_SLACK_DIGITS = 8
REDUCTION_SAMPLES = 20
REDUCTION_TERMS = 50
REDUCTION_SEED = 20130501

STATUSES = ("verified", "mismatch", "invalid_params", "inconclusive")

REPORT_FIELDS = ("identity", "params", "requested_digits", "lhs", "rhs", "abs_diff", "rel_diff",
                 "digits_agreed", "lhs_terms_used", "lhs_method", "wall_ms", "status")


class NoReductions(ValueError):
    pass


@dataclass
class VerificationReport:
    identity: str
    params: dict
    requested_digits: int
    lhs: str
    rhs: str
    abs_diff: str
    rel_diff: str
    digits_agreed: int
    lhs_terms_used: int
    lhs_method: str
    wall_ms: int
    status: str
    notes: list = field(default_factory=list, compare=False, repr=False)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("notes")
        return {k: d[k] for k in REPORT_FIELDS}

    @classmethod
    def from_dict(cls, data: Mapping) -> "VerificationReport":
        return cls(**{k: data[k] for k in REPORT_FIELDS})

    @property
    def binding(self) -> ParamBinding:
        return ParamBinding.from_dict(self.params)


@dataclass
class SweepResult:
    identity: str
    slot: str
    grid: list
    reports: list


def tolerance(target_digits: int, ctx: PrecisionContext):
    return ctx.mp.mpf(10) ** (-(target_digits - TOLERANCE_SLACK_DIGITS))


def format_decimal(x, digits: int) -> str:
    """``digits`` significant digits, round to nearest, '.' separator."""
    return mpmath.nstr(x, digits, strip_zeros=False, min_fixed=-4, max_fixed=digits + 1)


def digits_agreed(rel_diff, requested: int) -> int:
    if rel_diff == 0:
        return requested
    return max(0, min(requested, int(mpmath.floor(-mpmath.log10(rel_diff)))))


def _blank_report(identity, p: ParamBinding, digits: int, status: str, start: float,
                  notes=()) -> VerificationReport:
    return VerificationReport(str(identity), p.to_dict(), digits, "nan", "nan", "nan", "nan", 0, 0,
                              "none", _elapsed_ms(start), status, list(notes))


def _elapsed_ms(start: float) -> int:
    return int(round((time.perf_counter() - start) * 1000))


def _compare(identity, p: ParamBinding, digits: int, ctx: PrecisionContext, lhs, lhs_error,
             rhs, terms: int, method: str, start: float, notes=()) -> VerificationReport:
    mp = ctx.mp
    tol = tolerance(digits, ctx)
    abs_diff = abs(lhs - rhs)
    scale = abs(rhs) if rhs != 0 else max(abs(lhs), mp.mpf(1))
    rel_diff = abs_diff / scale
    rel_err = lhs_error / scale
    if rel_err > tol:
        status = "inconclusive"
    elif rel_diff <= tol:
        status = "verified"
    elif rel_err < tol / 10:
        status = "mismatch"
    else:
        status = "inconclusive"
    return VerificationReport(
        str(identity), p.to_dict(), digits,
        format_decimal(lhs, digits), format_decimal(rhs, digits),
        format_decimal(abs_diff, digits), format_decimal(rel_diff, digits),
        digits_agreed(rel_diff, digits), terms, method, _elapsed_ms(start), status, list(notes))


def verify(identity, p: ParamBinding = ParamBinding(), target_digits: int = 30,
           registry: Mapping = REGISTRY) -> VerificationReport:
    """Sum the series side, evaluate the closed form, and compare."""
    start = time.perf_counter()
    identity = IdentityId(identity)
    entry = get_identity(identity, registry)
    verdict = validity(identity, p, registry)
    if not verdict.valid:
        return _blank_report(identity, p, target_digits, "invalid_params", start,
                             verdict.violated_conditions)
    ctx = PrecisionContext(target_digits)
    num, den = entry.lhs_params(p)
    spec = SeriesSpec.of(num, den)
    notes = []
    try:
        lhs = sum_unit_argument(spec, ctx, target_digits)
    except (NoConvergence, BudgetExceeded) as exc:
        lhs = exc.partial
        notes.append(str(exc))
    except Diverges as exc:
        return _blank_report(identity, p, target_digits, "invalid_params", start, [str(exc)])
    try:
        rhs = entry.rhs(p, ctx)
    except InvalidParams as exc:
        return _blank_report(identity, p, target_digits, "invalid_params", start, exc.violated)
    return _compare(identity, p, target_digits, ctx, lhs.value, lhs.error_estimate, rhs,
                    lhs.terms_used, lhs.method, start, notes)


def _reduction_bindings(identity, count: int, registry: Mapping) -> list[ParamBinding]:
    entry = get_identity(identity, registry)
    if entry.slots == ("d",):
        return [ParamBinding()]
    rng = random.Random(f"{REDUCTION_SEED}:{identity}")
    out = []
    reduction = entry.reductions[0]
    while len(out) < count:
        p = random_binding(identity, rng, registry)
        q = reduction.specialize(p)
        if validity(identity, q, registry).valid and validity(reduction.target, reduction.target_params(q),
                                                              registry).valid:
            out.append(p)
    return out


def verify_reduction(identity, target_digits: int = 30, registry: Mapping = REGISTRY,
                     samples: int = REDUCTION_SAMPLES) -> list[VerificationReport]:
    """Check every reduction of ``identity`` on both sides.

    For each sampled binding the extended closed form at the constraint is
    compared with the parent closed form, and the first REDUCTION_TERMS series
    coefficients of the two left-hand sides must be equal as fractions.
    Report ``lhs`` is the extended closed form, ``rhs`` the parent's.
    """
    identity = IdentityId(identity)
    entry = get_identity(identity, registry)
    if not entry.reductions:
        raise NoReductions(f"{identity} has no reductions")
    reports = []
    for reduction in entry.reductions:
        target = get_identity(reduction.target, registry)
        for p in _reduction_bindings(identity, samples, registry):
            start = time.perf_counter()
            q = reduction.specialize(p)
            tp = reduction.target_params(q)
            ctx = PrecisionContext(target_digits)
            src_terms = SeriesSpec.of(*entry.lhs_params(q)).exact_terms(REDUCTION_TERMS)
            dst_terms = SeriesSpec.of(*target.lhs_params(tp)).exact_terms(REDUCTION_TERMS)
            lhs = entry.rhs(q, ctx)
            rhs = target.rhs(tp, ctx)
            method = f"reduction:{reduction.target}"
            notes = [f"{reduction.constraint} -> {reduction.target}"]
            report = _compare(identity, q, target_digits, ctx, lhs, ctx.mp.mpf(0), rhs,
                              REDUCTION_TERMS, method, start, notes)
            if src_terms != dst_terms:
                report.status = "mismatch"
                report.notes.append("series coefficients differ")
            reports.append(report)
    return reports


def sweep(identity, d_grid: Sequence, target_digits: int = 30, base: ParamBinding = ParamBinding(),
          registry: Mapping = REGISTRY, jobs: int = 1) -> SweepResult:
    """One verification per value of d; invalid points are reported, not raised."""
    identity = IdentityId(identity)
    if "d" not in get_identity(identity, registry).slots:
        raise ValueError(f"{identity} has no d slot")
    grid = [F(d) for d in d_grid]
    tasks = [(identity, base.with_(d=d), target_digits) for d in grid]
    return SweepResult(str(identity), "d", grid, _run_tasks(tasks, registry, jobs))


def _verify_task(task):
    identity, p, digits = task
    return verify(identity, p, digits)


def _run_tasks(tasks, registry: Mapping, jobs: int) -> list[VerificationReport]:
    if jobs > 1 and registry is REGISTRY and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_verify_task, tasks, chunksize=4))
    return [verify(i, p, d, registry) for i, p, d in tasks]


# parameter points exercised by the full suite
GAUSS_GRID = [
    (F(1, 2), F(1, 4), F(5, 4)), (F(1, 3), F(1, 3), F(2)), (F(1, 2), F(0), F(5, 4)),
    (F(1, 2), F(1, 2), F(5, 4)), (F(1), F(1), F(9, 4)), (F(1, 4), F(1, 4), F(3, 4)),
    (F(-1, 3), F(1, 2), F(3, 4)), (F(-5, 2), F(1, 3), F(2, 3)), (F(2), F(3, 2), F(15, 4)),
    (F(1, 5), F(2, 7), F(3)), (F(3, 2), F(-1, 2), F(5, 4)), (F(-3), F(1, 2), F(7, 5)),
    (F(5, 2), F(7, 3), F(6)), (F(1, 7), F(1, 9), F(4, 7)), (F(-1, 2), F(-1, 2), F(1, 3)),
    (F(3, 4), F(5, 4), F(7, 3)), (F(1), F(1, 2), F(7, 4)), (F(2, 3), F(4, 3), F(5, 2)),
    (F(-7, 4), F(3, 4), F(-1, 2)), (F(1, 10), F(1, 10), F(11, 20)),
]
EXT_GAUSS_D = [F(1, 3), F(1), F(2), F(7)]
DIXON_GRID = [
    (F(1, 2), F(1, 2), F(1, 4)), (F(1, 2), F(1, 4), F(1, 4)), (F(1, 3), F(1, 5), F(1, 7)),
    (F(1), F(1, 3), F(1, 4)), (F(2), F(1, 2), F(1, 3)), (F(-1, 3), F(1, 6), F(1, 5)),
    (F(3, 2), F(3, 4), F(1, 8)), (F(1, 4), F(-1, 2), F(1, 3)), (F(5, 2), F(1, 2), F(3, 4)),
    (F(2, 3), F(1, 3), F(-1, 4)),
]
EXT_DIXON_GRID = [
    (F(1, 2), F(1, 2), F(1, 4), F(2)), (F(1, 2), F(1, 4), F(1, 4), F(3)),
    (F(1, 3), F(1, 5), F(1, 7), F(3)), (F(2), F(1, 3), F(1, 4), F(1, 2)),
    (F(1), F(1, 3), F(1, 4), F(5, 3)), (F(-1, 3), F(1, 5), F(1, 7), F(-5, 2)),
    (F(3, 2), F(3, 4), F(1, 8), F(7)), (F(1, 4), F(-1, 2), F(1, 3), F(2, 5)),
    (F(5, 2), F(1, 2), F(3, 4), F(1)), (F(2, 3), F(1, 3), F(-1, 4), F(4)),
]
EXT_RAM_GRIDS = {
    IdentityId.EXT_RAM_1_15: [F(1), F(2), F(3)],
    IdentityId.EXT_RAM_1_16: [F(5, 4), F(2), F(3)],
    IdentityId.EXT_RAM_2_1: [F(1, 2), F(1), F(5, 4), F(2), F(10)],
}


def suite_tasks() -> list[tuple[IdentityId, ParamBinding]]:
    tasks = []
    for a, b, c in GAUSS_GRID:
        tasks.append((IdentityId.GAUSS_1_6, ParamBinding(a, b, c)))
    for a, b, c in GAUSS_GRID:
        for d in EXT_GAUSS_D:
            tasks.append((IdentityId.EXT_GAUSS_1_8, ParamBinding(a, b, c, d)))
    for a, b, c in DIXON_GRID:
        tasks.append((IdentityId.DIXON_1_7, ParamBinding(a, b, c)))
    for a, b, c, d in EXT_DIXON_GRID:
        tasks.append((IdentityId.EXT_DIXON_1_9, ParamBinding(a, b, c, d)))
    for ident in (IdentityId.RAM_1_12, IdentityId.RAM_1_13, IdentityId.RAM_1_14):
        tasks.append((ident, ParamBinding()))
    for ident, grid in EXT_RAM_GRIDS.items():
        tasks.extend((ident, ParamBinding(d=d)) for d in grid)
    return tasks


def consistency_suite(target_digits: int = 30, registry: Mapping = REGISTRY,
                      jobs: int = 1) -> list[VerificationReport]:
    """Every identity at its fixed grid points, then every reduction."""
    tasks = [(i, p, target_digits) for i, p in suite_tasks()]
    reports = _run_tasks(tasks, registry, jobs)
    for ident in IdentityId:
        if get_identity(ident, registry).reductions:
            reports.extend(verify_reduction(ident, target_digits, registry))
    return reports


def summarize(reports: Sequence[VerificationReport]) -> dict[str, int]:
    counts = {s: 0 for s in STATUSES}
    for r in reports:
        counts[r.status] += 1
    return counts
