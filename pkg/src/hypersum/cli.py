"""``hypersum`` command line.

Exit codes: 0 all verified, 1 any mismatch or inconclusive, 2 usage or
parameter error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional, Sequence

import mpmath

from . import __version__
from .gamma import PoleError, gamma
from .precision import PrecisionContext, RationalSyntaxError, format_rational, parse_rational
from .series import SeriesError, SeriesSpec, sum_unit_argument, NoConvergence, BudgetExceeded
from .theorems import REGISTRY, IdentityId, ParamBinding, get_identity, reduction_map, validity
from .verifier import (REPORT_FIELDS, VerificationReport, consistency_suite, format_decimal,
                       summarize, sweep, verify)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
MIN_DIGITS, MAX_DIGITS = 5, 1000
DEFAULT_DIGITS = 30
SCHEMA_VERSION = 1


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    identity: Optional[IdentityId] = None
    params: dict = field(default_factory=dict)
    digits: int = DEFAULT_DIGITS
    output: str = "text"
    output_path: Optional[str] = None


def default_digits() -> int:
    raw = os.environ.get("HYPERSUM_DIGITS")
    if raw is None:
        return DEFAULT_DIGITS
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"HYPERSUM_DIGITS must be an integer, got {raw!r}") from None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _rational(text: str) -> Fraction:
    try:
        return parse_rational(text)
    except RationalSyntaxError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _rational_list(text: str) -> list[Fraction]:
    if not text.strip():
        return []
    return [_rational(t) for t in text.split(",")]


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--digits", type=int, default=None,
                        help=f"target decimal digits (default {DEFAULT_DIGITS}, or $HYPERSUM_DIGITS)")
    out = common.add_argument_group("output")
    out.add_argument("--format", choices=("text", "json", "csv"), default=None)
    out.add_argument("--output", metavar="PATH", default=None)
    out.add_argument("--json", nargs="?", const="-", metavar="PATH", default=None,
                     help="JSON report to PATH (stdout if omitted)")
    out.add_argument("--csv", nargs="?", const="-", metavar="PATH", default=None,
                     help="CSV report to PATH (stdout if omitted)")
    out.add_argument("--timing", action="store_true",
                     help="record wall_ms in JSON/CSV output (omitted by default for reproducible files)")
    out.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps and the suite")

    slots = _Parser(add_help=False)
    for s in ("a", "b", "c", "d"):
        slots.add_argument(f"--{s}", type=_rational, default=None, metavar="R")

    parser = _Parser(prog="hypersum", description="High-precision checks of hypergeometric summation theorems.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("list", help="list identities")
    p = sub.add_parser("show", parents=[slots], help="print the first LHS terms as exact rationals")
    p.add_argument("identity")
    p.add_argument("--terms", type=int, default=5)
    p = sub.add_parser("verify", parents=[common, slots], help="verify one identity")
    p.add_argument("identity")
    p = sub.add_parser("sweep", parents=[common, slots], help="verify an identity over a grid of d")
    p.add_argument("identity")
    p.add_argument("--d-grid", type=_rational_list, required=True, metavar="R,R,...")
    sub.add_parser("suite", parents=[common], help="verify every identity and reduction")
    p = sub.add_parser("sum", parents=[common], help="sum a unit-argument pFq series")
    p.add_argument("--num", type=_rational_list, required=True, metavar="R,R,...")
    p.add_argument("--den", type=_rational_list, required=True, metavar="R,R,...")
    p.add_argument("--method", choices=("auto", "direct", "richardson", "levin"), default="auto")
    p = sub.add_parser("gamma", parents=[common], help="evaluate Gamma at a rational")
    p.add_argument("x", type=_rational)
    return parser


def _identity(name: str, registry: Mapping) -> IdentityId:
    try:
        ident = IdentityId(name)
        get_identity(ident, registry)
    except (ValueError, KeyError):
        names = ", ".join(i.value for i in IdentityId)
        raise UsageError(f"unknown identity {name!r} (choose from {names})") from None
    return ident


def _binding(args) -> ParamBinding:
    return ParamBinding(**{s: getattr(args, s, None) for s in ("a", "b", "c", "d")})


def _digits(args) -> int:
    digits = args.digits if args.digits is not None else default_digits()
    if not MIN_DIGITS <= digits <= MAX_DIGITS:
        raise UsageError(f"--digits must be in [{MIN_DIGITS}, {MAX_DIGITS}]")
    return digits


def _output(args) -> tuple[str, Optional[str]]:
    chosen = [f for f in ("json", "csv") if getattr(args, f, None) is not None]
    if len(chosen) > 1:
        raise UsageError("choose one of --json and --csv")
    if chosen:
        path = getattr(args, chosen[0])
        return chosen[0], None if path == "-" else path
    return args.format or "text", args.output


# --- report emission -----------------------------------------------------

def _machine_rows(reports, timing: bool):
    for r in reports:
        row = r.to_dict()
        if not timing:
            row["wall_ms"] = 0
        yield row


def render_json(reports: Sequence[VerificationReport], timing: bool = False) -> str:
    doc = {"schema_version": SCHEMA_VERSION, "reports": list(_machine_rows(reports, timing))}
    return json.dumps(doc, indent=2) + "\n"


def render_csv(reports: Sequence[VerificationReport], timing: bool = False) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=REPORT_FIELDS, lineterminator="\n")
    writer.writeheader()
    for row in _machine_rows(reports, timing):
        row["params"] = ";".join(f"{k}={v}" for k, v in row["params"].items())
        writer.writerow(row)
    return buf.getvalue()


def render_text(reports: Sequence[VerificationReport]) -> str:
    header = ("identity", "params", "status", "digits", "lhs", "rel_diff", "terms", "method", "ms")
    rows = [header]
    for r in reports:
        params = ",".join(f"{k}={v}" for k, v in r.params.items()) or "-"
        rows.append((r.identity, params, r.status, str(r.digits_agreed), r.lhs, _short(r.rel_diff),
                     str(r.lhs_terms_used), r.lhs_method, str(r.wall_ms)))
    widths = [max(len(row[i]) for row in rows) for i in range(len(header))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in rows]
    counts = summarize(reports)
    lines.append("")
    lines.append("  ".join(f"{k}={v}" for k, v in counts.items()))
    return "\n".join(lines) + "\n"


def _short(dec: str) -> str:
    if dec == "nan":
        return dec
    return mpmath.nstr(mpmath.mpf(dec), 3)


def emit_report(reports: Sequence[VerificationReport], fmt: str = "text", path: Optional[str] = None,
                timing: bool = False, stream=None) -> None:
    if not reports:
        raise ValueError("no reports to emit")
    if fmt == "json":
        text = render_json(reports, timing)
    elif fmt == "csv":
        text = render_csv(reports, timing)
    else:
        text = render_text(reports)
    if path is None:
        (stream or sys.stdout).write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def exit_code_for(reports: Sequence[VerificationReport]) -> int:
    statuses = {r.status for r in reports}
    if statuses & {"mismatch", "inconclusive"}:
        return EXIT_FAIL
    if "invalid_params" in statuses:
        return EXIT_USAGE
    return EXIT_OK


# --- commands ------------------------------------------------------------

def _cmd_list(args, registry, out) -> int:
    for ident in IdentityId:
        entry = get_identity(ident, registry)
        slots = ",".join(entry.slots) or "-"
        conds = "; ".join(entry.conditions) or "-"
        reds = "; ".join(f"{c} -> {t}" for c, t in reduction_map(ident, registry)) or "-"
        out.write(f"{ident.value:<14} params: {slots:<8} {entry.title}\n")
        out.write(f"{'':<14} conditions: {conds}\n")
        out.write(f"{'':<14} reduces: {reds}\n")
    return EXIT_OK


def _cmd_show(args, registry, out) -> int:
    ident = _identity(args.identity, registry)
    entry = get_identity(ident, registry)
    p = _binding(args)
    if args.terms < 1:
        raise UsageError("--terms must be positive")
    symbolic_d = "d" in entry.slots and p.d is None
    if symbolic_d:
        # (d+1)_n / (d)_n = (d+n)/d, so show the rest of the term as a rational
        p = p.with_(d=Fraction(1))
    verdict = validity(ident, p, registry)
    if not verdict.valid:
        raise UsageError("; ".join(verdict.violated_conditions))
    num, den = entry.lhs_params(p)
    if symbolic_d:
        num, den = list(num)[:-1], list(den)[:-1]
    spec = SeriesSpec.of(num, den)
    out.write(f"{ident.value}: {_series_label(spec, symbolic_d)}\n")
    for n, t in enumerate(spec.exact_terms(args.terms)):
        term = format_rational(t)
        if symbolic_d and n:
            term = f"{term} * (d+{n})/d"
        out.write(f"  n={n}: {term}\n")
    return EXIT_OK


def _series_label(spec: SeriesSpec, symbolic_d: bool) -> str:
    num = [format_rational(a) for a in spec.numerator]
    den = [format_rational(b) for b in spec.denominator]
    if symbolic_d:
        num.append("d+1")
        den.append("d")
    return f"{len(num)}F{len(den)}[{', '.join(num)}; {', '.join(den)}; 1]"


def _cmd_verify(args, registry, out) -> int:
    ident = _identity(args.identity, registry)
    p = _binding(args)
    verdict = validity(ident, p, registry)
    if not verdict.valid:
        raise UsageError(f"{ident}: invalid parameters: " + "; ".join(verdict.violated_conditions))
    report = verify(ident, p, _digits(args), registry)
    return _finish([report], args, out)


def _cmd_sweep(args, registry, out) -> int:
    ident = _identity(args.identity, registry)
    if "d" not in get_identity(ident, registry).slots:
        raise UsageError(f"{ident} has no d parameter to sweep")
    if not args.d_grid:
        raise UsageError("--d-grid is empty")
    base = _binding(args).with_(d=None)
    result = sweep(ident, args.d_grid, _digits(args), base, registry, jobs=args.jobs)
    return _finish(result.reports, args, out)


def _cmd_suite(args, registry, out) -> int:
    reports = consistency_suite(_digits(args), registry, jobs=args.jobs)
    return _finish(reports, args, out)


def _finish(reports, args, out) -> int:
    fmt, path = _output(args)
    try:
        emit_report(reports, fmt, path, timing=args.timing, stream=out)
    except OSError as exc:
        raise UsageError(f"cannot write report: {exc}") from None
    return exit_code_for(reports)


def _cmd_sum(args, registry, out) -> int:
    digits = _digits(args)
    try:
        spec = SeriesSpec.of(args.num, args.den)
    except SeriesError as exc:
        raise UsageError(str(exc)) from None
    ctx = PrecisionContext(digits)
    status = EXIT_OK
    try:
        result = sum_unit_argument(spec, ctx, digits, args.method)
    except (NoConvergence, BudgetExceeded) as exc:
        result, status = exc.partial, EXIT_FAIL
        out.write(f"warning: {exc}\n")
    except SeriesError as exc:
        raise UsageError(str(exc)) from None
    out.write(f"value    {format_decimal(result.value, digits)}\n")
    out.write(f"error    {mpmath.nstr(result.error_estimate, 3)}\n")
    out.write(f"terms    {result.terms_used}\n")
    out.write(f"method   {result.method}\n")
    return status


def _cmd_gamma(args, registry, out) -> int:
    digits = _digits(args)
    try:
        value = gamma(args.x, PrecisionContext(digits))
    except PoleError as exc:
        raise UsageError(str(exc)) from None
    out.write(f"{format_decimal(value, digits)}\n")
    return EXIT_OK


COMMANDS = {"list": _cmd_list, "show": _cmd_show, "verify": _cmd_verify, "sweep": _cmd_sweep,
            "suite": _cmd_suite, "sum": _cmd_sum, "gamma": _cmd_gamma}


def run(argv: Optional[Sequence[str]] = None, registry: Mapping = REGISTRY, stdout=None, stderr=None) -> int:
    out = stdout or sys.stdout
    err = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args, registry, out)
    except UsageError as exc:
        err.write(f"hypersum: error: {exc}\n")
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
