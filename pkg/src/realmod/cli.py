"""Workbench command line: ``realmod run|replay|list``."""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import report as R
from .backends import BACKENDS
from .modal import probe_labels
from .suites import MANIFESTS, SUITES, RunConfig, replay_rows, run_suite

EXIT_OK, EXIT_UNEXPECTED, EXIT_USAGE, EXIT_MISMATCH = 0, 1, 2, 3


def _positive(text: str) -> int:
    n = int(text)
    if n <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return n


def _nonneg(text: str) -> int:
    n = int(text)
    if n < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return n


def parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="realmod", description="Realizability and modal workbench.")
    sub = ap.add_subparsers(dest="cmd", required=True)

    run = sub.add_parser("run", help="run a suite and write a report")
    run.add_argument("--suite", required=True, choices=SUITES)
    run.add_argument("--backend", default="term", choices=BACKENDS)
    run.add_argument("--fuel", type=_positive, default=None,
                     help="reduction fuel (default: REALMOD_FUEL or 100000)")
    run.add_argument("--samples", type=_positive, default=50)
    run.add_argument("--cutoff", type=_positive, default=None)
    run.add_argument("--rank", type=_nonneg, default=3)
    run.add_argument("--trunc", type=_positive, default=1 << 10)
    run.add_argument("--probes", default="default", help="probe family label or probe file")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--report", type=Path, default=None, help="write the report here")
    run.add_argument("--format", choices=("json", "text"), default="text",
                     help="format on stdout; files are always JSON")
    run.add_argument("--timing", action="store_true", help="print wall time to stderr")

    rp = sub.add_parser("replay", help="re-run a stored report and compare")
    rp.add_argument("report", type=Path)
    rp.add_argument("--seed", type=int, default=None, help="must match the stored seed")
    rp.add_argument("--limit", type=_positive, default=None,
                    help="replay at most this many counterexamples per refuter")
    rp.add_argument("--format", choices=("json", "text"), default="text")

    ls = sub.add_parser("list", help="list suites, backends and probe families")
    ls.add_argument("--format", choices=("json", "text"), default="text")
    return ap


def cmd_run(args: argparse.Namespace) -> int:
    cfg = RunConfig(backend=args.backend, fuel=args.fuel, samples=args.samples, cutoff=args.cutoff,
                    rank=args.rank, trunc=args.trunc, probes=args.probes, seed=args.seed)
    items, dt = run_suite(args.suite, cfg)
    rep = R.build(args.suite, cfg, items)
    if args.report is not None:
        args.report.write_text(R.to_json(rep))
    sys.stdout.write(R.render(rep, args.format))
    if args.timing:
        print(f"{args.suite}: {dt:.1f}s", file=sys.stderr)
    return EXIT_OK if rep["summary"]["ok"] else EXIT_UNEXPECTED


def cmd_replay(args: argparse.Namespace) -> int:
    try:
        stored_text = args.report.read_text()
        stored = R.load(stored_text)
    except (OSError, ValueError) as exc:
        print(f"realmod: cannot read report: {exc}", file=sys.stderr)
        return EXIT_USAGE
    cfg = RunConfig(**stored["config"])
    if args.seed is not None and args.seed != cfg.seed:
        print(f"realmod: seed mismatch: report was produced with seed {cfg.seed}, "
              f"replay asked for {args.seed}", file=sys.stderr)
        return EXIT_MISMATCH
    items, _ = run_suite(stored["suite"], cfg)
    fresh = R.to_json(R.build(stored["suite"], cfg, items))
    same = fresh == stored_text
    bad_rows = []
    for it in stored["items"]:
        if it["verdict"] == "Refuted" and it.get("detail", {}).get("refuter"):
            for m in replay_rows(it, cfg, args.limit):
                bad_rows.append({"item": it["item"], **m})
    out = {"schema": R.SCHEMA, "suite": stored["suite"], "identical": same,
           "counterexample_mismatches": bad_rows}
    if args.format == "json":
        sys.stdout.write(R.to_json(out))
    else:
        print(f"replay {stored['suite']}: report {'identical' if same else 'DIFFERS'}, "
              f"{len(bad_rows)} counterexample mismatches")
    return EXIT_OK if same and not bad_rows else EXIT_MISMATCH


def cmd_list(args: argparse.Namespace) -> int:
    data = {"suites": {s: {"about": MANIFESTS[s]["about"],
                           "expected_refuted": list(MANIFESTS[s]["refuted"])} for s in SUITES},
            "backends": list(BACKENDS), "probes": probe_labels(),
            "fuel": os.environ.get("REALMOD_FUEL") or "100000"}
    if args.format == "json":
        sys.stdout.write(R.to_json(data))
        return EXIT_OK
    for s, d in data["suites"].items():
        extra = f"  [expected Refuted: {', '.join(d['expected_refuted'])}]" if d["expected_refuted"] else ""
        print(f"{s:<10} {d['about']}{extra}")
    print("backends:", ", ".join(data["backends"]))
    print("probe families:", ", ".join(data["probes"]))
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = parser().parse_args(argv)
    try:
        return {"run": cmd_run, "replay": cmd_replay, "list": cmd_list}[args.cmd](args)
    except ValueError as exc:
        print(f"realmod: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
