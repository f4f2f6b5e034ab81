"""Run every suite with default settings, write JSON reports and print timings."""

import argparse
import sys
from pathlib import Path

from realmod import report as R
from realmod.suites import SUITES, RunConfig, run_suite


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", type=Path, default=Path("reports"))
    ap.add_argument("suites", nargs="*", default=list(SUITES))
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    bad = 0
    for suite in args.suites:
        cfg = RunConfig()
        items, dt = run_suite(suite, cfg)
        rep = R.build(suite, cfg, items)
        (args.out / f"{suite}.json").write_text(R.to_json(rep))
        s = rep["summary"]
        bad += not s["ok"]
        print(f"{suite:<10} {s['items']:>4} items  {len(s['unexpected'])} unexpected  {dt:6.1f}s")
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
