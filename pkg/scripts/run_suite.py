"""Run the full consistency suite and write a table plus JSON/CSV reports.

    python3 scripts/run_suite.py --digits 30 --out results/
"""

import argparse
import time
from dataclasses import dataclass
from pathlib import Path

from hypersum.cli import render_csv, render_json, render_text
from hypersum.verifier import consistency_suite, summarize


@dataclass
class SuiteConfig:
    digits: int = 30
    jobs: int = 1
    out: Path = Path("results")


def main(cfg: SuiteConfig) -> int:
    t0 = time.perf_counter()
    reports = consistency_suite(cfg.digits, jobs=cfg.jobs)
    elapsed = time.perf_counter() - t0
    cfg.out.mkdir(parents=True, exist_ok=True)
    stem = cfg.out / f"suite_{cfg.digits}"
    stem.with_suffix(".json").write_text(render_json(reports))
    stem.with_suffix(".csv").write_text(render_csv(reports))
    print(render_text(reports), end="")
    print(f"{len(reports)} reports in {elapsed:.1f}s -> {stem}.json, {stem}.csv")
    return 0 if summarize(reports)["verified"] == len(reports) else 1


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--digits", type=int, default=SuiteConfig.digits)
    ap.add_argument("--jobs", type=int, default=SuiteConfig.jobs)
    ap.add_argument("--out", type=Path, default=SuiteConfig.out)
    args = ap.parse_args()
    raise SystemExit(main(SuiteConfig(args.digits, args.jobs, args.out)))
