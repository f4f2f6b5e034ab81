"""Versioned run reports.

The JSON form carries no timings or paths, so two runs with the same
configuration produce the same bytes.
"""

from __future__ import annotations

import json
from typing import Any, Sequence

from .suites import Item, RunConfig

SCHEMA = "realmod-report/1"


def build(suite: str, cfg: RunConfig, items: Sequence[Item]) -> dict:
    counts: dict[str, int] = {}
    for it in items:
        counts[it.verdict] = counts.get(it.verdict, 0) + 1
    unexpected = [it.item for it in items if not it.ok]
    return {
        "schema": SCHEMA,
        "suite": suite,
        "config": cfg.as_dict(),
        "items": [it.as_dict() for it in items],
        "summary": {"items": len(items), "verdicts": dict(sorted(counts.items())),
                    "unexpected": unexpected, "ok": not unexpected},
    }


def to_json(report: dict) -> str:
    return json.dumps(report, indent=1, sort_keys=True, ensure_ascii=True) + "\n"


def to_text(report: dict) -> str:
    lines = [f"suite {report['suite']}  ({report['schema']})"]
    cfg = report["config"]
    lines.append("config " + " ".join(f"{k}={cfg[k]}" for k in sorted(cfg)))
    for it in report["items"]:
        mark = "ok " if it["ok"] else "BAD"
        exp = "" if it["verdict"] == it["expected"] else f" (expected {it['expected']})"
        lines.append(f"{mark} {it['verdict']:<12} {it['item']:<40} {it['anchor']}{exp}")
        if "counterexample" in it:
            lines.append(f"      counterexample {it['counterexample'][:120]}")
    s = report["summary"]
    lines.append(f"{s['items']} items, " + ", ".join(f"{k} {v}" for k, v in s["verdicts"].items())
                 + f"; {len(s['unexpected'])} unexpected")
    return "\n".join(lines) + "\n"


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return to_json(report)
    if fmt == "text":
        return to_text(report)
    raise ValueError(f"unknown format {fmt!r}")


def load(text: str) -> dict[str, Any]:
    rep = json.loads(text)
    if rep.get("schema") != SCHEMA:
        raise ValueError(f"unsupported report schema {rep.get('schema')!r}; expected {SCHEMA}")
    return rep
