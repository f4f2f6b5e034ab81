"""The eleven acceptance criteria, each with its time limit.

Every criterion records a pass/fail line that the terminal summary prints.
"""

from __future__ import annotations

import json
import time
from contextlib import contextmanager

import pytest

from conftest import ACCEPTANCE
from realmod import ehp as E
from realmod import heyting as H
from realmod import modal as M
from realmod import report as R
from realmod.backends import BACKENDS, get_backend, pca_law_check
from realmod.heyting import Heyting, combine
from realmod.models import arith as A
from realmod.models import scott_structure as SC
from realmod.scott import ScottBackend, meyer_scott_counterexample
from realmod.suites import RunConfig, replay_rows, run_suite, s4_truths, s5_singletons
from realmod.terms import enumerate_closed_terms


@contextmanager
def criterion(n: int, title: str, limit: float):
    t0 = time.perf_counter()
    state = {"note": ""}
    ok = False
    try:
        yield state
        ok = True
    finally:
        dt = time.perf_counter() - t0
        if ok and dt >= limit:
            ok = False
            state["note"] = f"over the {limit:.0f}s limit"
        ACCEPTANCE[n] = (title, ok, dt, state["note"])
    assert dt < limit, f"took {dt:.1f}s, limit {limit}s"


def kinds(items, prefix: str = "") -> dict:
    return {i.item: i.verdict for i in items if i.item.startswith(prefix)}


def test_01_pca_laws():
    with criterion(1, "pca laws on term, scott and k2", 10) as st:
        fails = {}
        for name in BACKENDS:
            b = get_backend(name, trunc=1 << 10, prefix=8)
            r = pca_law_check(b, count=50, seed=0)
            assert len(r["rows"]) == 50
            fails[name] = r["failures"]
        st["note"] = f"failures {fails}"
        assert not any(fails.values())


def test_02_ehp_extraction():
    with criterion(2, "EHP derivations validate, extract, never refuted", 60) as st:
        lib = E.canned_library()
        for need in ("help1", "help2", "help3") + tuple(f"d{i}" for i in range(1, 11)):
            assert any(k == need or k.startswith(need + ".") for k in lib), need
        for name, dv in lib.items():
            E.validate_derivation(dv, E.LAWS[name])
        ws = E.extracted_witnesses(lib)
        bad = []
        for backend in BACKENDS:
            h = Heyting(get_backend(backend))
            for name in E.LAW_ORDER:
                v = E.check_law(h, name, ws[name], count=50, seed=3)
                if v.kind != "Confirmed" or v.tested < 50:
                    bad.append((backend, name, v.kind, v.tested))
        st["note"] = f"{len(lib)} laws x {len(BACKENDS)} backends"
        assert not bad, bad


def test_03_uniform_witnesses():
    with criterion(3, "uniform witnesses e1-e12 on all backends", 30) as st:
        laws = H.witness_laws()
        bad = []
        for backend in BACKENDS:
            h = Heyting(get_backend(backend))
            for name, law in laws.items():
                vs = []
                for inst in H.instantiations("XYZ", 50, 0):
                    X, Y = law(inst["X"], inst["Y"], inst["Z"])
                    vs.append(h.check_reduction(H.WITNESS_TERMS[name], X, Y))
                if combine(vs).kind != "Confirmed" or len(vs) < 50:
                    bad.append((backend, name))
        st["note"] = f"{len(laws)} witnesses"
        assert len(laws) == 12 and not bad, bad


def test_04_s4():
    with criterion(4, "S4 witnesses, necessitation, mu laws, embedding laws", 60) as st:
        assert len(s4_truths(M.default_probes())) == 10
        items, _ = run_suite("s4", RunConfig())
        got = kinds(items)
        for law in ("K", "T", "Four", "necessitation", "cert"):
            assert sum(k.startswith(law + "/") for k in got) == 10, law
        for law in ("mono.fwd", "mono.bwd", "meet.fwd", "meet.bwd", "join.fwd", "join.bwd",
                    "top.fwd", "top.bwd", "bot.fwd", "bot.bwd"):
            assert f"mu/{law}" in got, law
        for law in ("conditional.fwd", "conditional.bwd", "intersection.fwd", "intersection.bwd"):
            assert f"embedding/{law}" in got, law
        bad = {k: v for k, v in got.items() if v != "Confirmed"}
        st["note"] = f"{len(items)} checks"
        assert not bad, bad


def test_05_s5():
    with criterion(5, "S5 refuter on 300 candidates, singleton witnesses", 300) as st:
        h = Heyting(get_backend("term"))
        cands = enumerate_closed_terms(300)
        r = M.s5_refuter(h, cands, retries=1)
        counts = r["counts"]
        assert len(r["entries"]) == 300
        assert counts.get("Confirmed", 0) == 0
        assert counts.get("Inconclusive", 0) < 0.05 * 300
        assert all(e.verdict in ("Refuted", "Inconclusive") for e in r["entries"])
        singles = s5_singletons()
        assert len(singles) == 10
        probes = M.default_probes()
        bad = [name for name, f in singles if M.singleton_s5_witness(h, f, probes)[1].kind != "Confirmed"]
        st["note"] = f"refuted {counts.get('Refuted', 0)}/300"
        assert not bad, bad


def test_06_goedel():
    with criterion(6, "Goedel translation agreement on the corpus", 120) as st:
        items, _ = run_suite("goedel", RunConfig(cutoff=6))
        assert len(items) >= 30
        dis = sum(i.detail["disagree"] for i in items)
        agree = sum(i.detail["agree"] for i in items)
        bad = [i.detail["formula"] for i in items if i.verdict != "Confirmed"]
        st["note"] = f"{len(items)} formulas, {agree} agreements, {dis} disagreements"
        assert dis == 0 and not bad, bad


def test_07_soundness_harness():
    with criterion(7, "soundness harness on numbers, sets and Scott", 180) as st:
        items, _ = run_suite("semantics", RunConfig())
        got = kinds(items)
        for tag in ("arith", "set", "scott"):
            for name in ("cbf", "exists-box", "duality.fwd", "duality.bwd", "atomic-stability",
                         "necid", "generalization", "modus-ponens", "instantiation"):
                assert got.get(f"{tag}/{name}") == "Confirmed", (tag, name, got.get(f"{tag}/{name}"))
        uniform = {i.item.split("/")[0]: i.detail["flags"]["uniform"]
                   for i in items if i.item.endswith("/quantifier")}
        for tag, u in uniform.items():
            assert (f"{tag}/instantiation.free" in got) == u, tag
        ref = next(i for i in items if i.item == "arith/existence-refuter")
        rows = ref.detail["rows"]
        assert len(rows) == 200 and all(r["verdict"] == "Refuted" for r in rows)
        bad = {i.item: i.verdict for i in items if not i.ok}
        st["note"] = f"{len(items)} items; uniform Q: {sorted(t for t, u in uniform.items() if u)}"
        assert not bad, bad


def test_08_arithmetic():
    with criterion(8, "induction, CT, Sigma-1 stability, Barcan experiment", 180) as st:
        items, _ = run_suite("arith", RunConfig(cutoff=8))
        got = kinds(items)
        assert sum(k.startswith("induction/") for k in got) >= 5
        ct = [i for i in items if i.item.startswith("ct/")]
        assert len(ct) >= 3 and all(len(i.detail["table"]) == 11 for i in ct)
        assert sum(k.startswith("sigma1/") for k in got) >= 5
        b = next(i for i in items if i.item == "barcan")
        assert len(b.detail["rows"]) == 200 and all(r["verdict"] == "Refuted" for r in b.detail["rows"])
        bad = {i.item: i.verdict for i in items if not i.ok}
        st["note"] = f"{len(items)} items"
        assert not bad, bad


def test_09_set_model():
    with criterion(9, "set model table, pack, axioms, refuter vs stability", 300) as st:
        items, _ = run_suite("set", RunConfig(cutoff=6, rank=3))
        got = kinds(items)
        assert got["numeral-table"] == "Confirmed"
        for name in ("rho", "sigma", "tau", "iota"):
            assert got[f"pack/{name}"] == "Confirmed", name
        for ax in ("extensionality", "pairing", "union", "power-set", "separation", "infinity",
                   "induction"):
            assert got[f"axiom/{ax}"] == "Confirmed", ax
        ref = next(i for i in items if i.item == "negated-atomic-refuter")
        assert len(ref.detail["rows"]) == 200 and all(r["verdict"] == "Refuted" for r in ref.detail["rows"])
        assert got["atomic-stability"] == "Confirmed"
        bad = {i.item: i.verdict for i in items if not i.ok}
        st["note"] = f"{len(items)} items"
        assert not bad, bad


def test_10_scott_model():
    with criterion(10, "Meyer-Scott, choice and fixed points in the graph model", 120) as st:
        _, _, rep = meyer_scott_counterexample(ScottBackend(trunc=1 << 10))
        assert rep.trunc == 1 << 10 and len(rep.samples) == 10
        assert rep.one_a_empty and rep.pair00_in_one_b and rep.a_values_empty and rep.b_values_full
        assert rep.certified
        items, _ = run_suite("scott", RunConfig(trunc=1 << 10))
        got = kinds(items)
        assert got["axiom/meyer-scott.modal"] == "Confirmed"
        assert all(v == "Confirmed" for k, v in got.items() if k.startswith("choice/"))
        assert got["fixpoint"] == "Confirmed"
        fx = next(i for i in items if i.item == "fixpoint")
        assert all(set(r["by_trunc"]) == {"256", "1024"} for r in fx.detail["rows"])
        bad = {i.item: i.verdict for i in items if not i.ok}
        st["note"] = f"{len(items)} items"
        assert not bad, bad


def test_11_determinism(tmp_path):
    with criterion(11, "byte-identical reports and counterexample replay", 60) as st:
        replayed = 0
        for suite in ("s5", "scott", "k2-smoke"):
            cfg = RunConfig(seed=11)
            a = R.to_json(R.build(suite, cfg, run_suite(suite, cfg)[0]))
            b = R.to_json(R.build(suite, cfg, run_suite(suite, cfg)[0]))
            assert a == b, suite
            rep = json.loads(a)
            for it in rep["items"]:
                if it["verdict"] == "Refuted" and it.get("detail", {}).get("refuter"):
                    assert replay_rows(it, cfg) == [], (suite, it["item"])
                    replayed += sum(r["verdict"] == "Refuted" for r in it["detail"]["rows"])
        st["note"] = f"{replayed} counterexamples replayed"
        assert replayed > 0
