"""Digits gained per term for direct summation, Richardson and Levin.

Uses the slowly convergent 2F1[1/2, 1/4; 5/4; 1] (tau = 3/2) and a
d-extended 3F2 as test series; the closed forms are the reference.
Writes one CSV row per (series, method, budget).
"""

import argparse
import csv
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import mpmath

from hypersum.precision import PrecisionContext
from hypersum.series import NoConvergence, levin_sum, partial_sum, richardson_sum
from hypersum.theorems import IdentityId, ParamBinding, lhs_series, rhs_value
from hypersum.verifier import digits_agreed


@dataclass
class StudyConfig:
    digits: int = 40
    cases: list = field(default_factory=lambda: [
        (IdentityId.RAM_1_14, ParamBinding()),
        (IdentityId.RAM_1_12, ParamBinding()),
        (IdentityId.EXT_RAM_2_1, ParamBinding(d=Fraction(2))),
    ])
    direct_terms: tuple = (10**2, 10**3, 10**4, 10**5)
    depths: tuple = (2, 4, 6, 8, 10, 12)
    levin_orders: tuple = (5, 10, 20, 40, 80)
    out: Path = Path("results/acceleration.csv")


def _agreed(value, ref, digits):
    return digits_agreed(abs(value - ref) / abs(ref), digits)


def run(cfg: StudyConfig):
    ctx = PrecisionContext(cfg.digits)
    rows = []
    for ident, p in cfg.cases:
        spec = lhs_series(ident, p)
        ref = rhs_value(ident, p, ctx)
        label = f"{ident}{'' if not p.used() else ' ' + str(p)}"
        for n in cfg.direct_terms:
            rows.append((label, "direct", n, n, _agreed(partial_sum(spec, n, ctx), ref, cfg.digits)))
        for depth in cfg.depths:
            try:
                r = richardson_sum(spec, ctx, cfg.digits, max_depth=depth)
            except NoConvergence as exc:
                r = exc.partial
            rows.append((label, "richardson", depth, r.terms_used, _agreed(r.value, ref, cfg.digits)))
        for order in cfg.levin_orders:
            try:
                r = levin_sum(spec, ctx, cfg.digits, max_order=order)
            except NoConvergence as exc:
                r = exc.partial
            rows.append((label, "levin", order, r.terms_used, _agreed(r.value, ref, cfg.digits)))
    return rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--digits", type=int, default=StudyConfig.digits)
    ap.add_argument("--out", type=Path, default=StudyConfig.out)
    args = ap.parse_args(argv)
    cfg = StudyConfig(digits=args.digits, out=args.out)
    rows = run(cfg)
    cfg.out.parent.mkdir(parents=True, exist_ok=True)
    with cfg.out.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["series", "method", "setting", "terms", "digits_agreed"])
        w.writerows(rows)
    w = csv.writer(sys.stdout, delimiter="\t")
    w.writerow(["series", "method", "setting", "terms", "digits"])
    w.writerows(rows)


if __name__ == "__main__":
    main()
