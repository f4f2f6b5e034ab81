"""Suite runners: each suite yields report items with an expected verdict.

An item is unexpected when its verdict differs from the one its suite
manifest declares.  Refuter sweeps are single items whose expected verdict
is Refuted; their per-candidate rows are kept for replay.
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Callable, Optional, Sequence

from . import ehp as E
from . import heyting as H
from . import modal as M
from .backends import get_backend, pca_law_check
from .heyting import TOP, Heyting, Verdict, combine
from .kernel import STANDARD, Tri, default_fuel, numeral
from .modal import ProbeFamily
from .terms import K, Term, app, enumerate_closed_terms, parse_sexpr, to_sexpr

st = STANDARD
SUITES = ("ehp", "s4", "s5", "semantics", "goedel", "arith", "set", "scott", "k2-smoke")
FORMULA_DIR = Path(__file__).resolve().parent / "corpus" / "formulas"

# Expected verdicts: every item is expected Confirmed except the listed refuter sweeps.
MANIFESTS: dict[str, dict] = {
    "ehp": {"about": "pca laws, uniform witnesses e1-e12 and the 18 extracted EHP laws",
            "refuted": ()},
    "s4": {"about": "K, T, 4 and necessitation on certified modal truths; mu laws", "refuted": ()},
    "s5": {"about": "uniform S5 refuter and singleton-domain S5 witnesses", "refuted": ("refuter",)},
    "semantics": {"about": "soundness harness on the numbers, sets and Scott structures",
                  "refuted": ("arith/existence-refuter",)},
    "goedel": {"about": "Goedel translation agreement over the numbers", "refuted": ()},
    "arith": {"about": "induction, CT instances, Sigma-1 stability, Barcan experiment",
              "refuted": ("barcan",)},
    "set": {"about": "numeral table, witness pack, axiom witnesses, negated-atomic refuter",
            "refuted": ("negated-atomic-refuter",)},
    "scott": {"about": "Meyer-Scott, choice, fixed points and refuters in the graph model",
              "refuted": ("meyer-scott-refuter", "neq-instability-refuter")},
    "k2-smoke": {"about": "pca laws and the identity graph on Baire space", "refuted": ()},
}

# fuel floors: the set witnesses run long on the rank-3 domain
FUEL_FLOOR = {"set": 200_000, "semantics": 200_000}


@dataclass(frozen=True)
class RunConfig:
    backend: str = "term"
    fuel: Optional[int] = None
    samples: int = 50
    cutoff: Optional[int] = None
    rank: int = 3
    trunc: int = 1 << 10
    probes: str = "default"
    seed: int = 0

    def suite_fuel(self, suite: str) -> int:
        if self.fuel is not None:
            return self.fuel
        return max(default_fuel(), FUEL_FLOOR.get(suite, 0))

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass
class Item:
    suite: str
    item: str
    anchor: str
    verdict: str
    expected: str
    fuel: int
    cutoff: Optional[int]
    probes: list
    counterexample: Optional[str] = None
    detail: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.verdict == self.expected

    def as_dict(self) -> dict:
        out = {"suite": self.suite, "item": self.item, "anchor": self.anchor,
               "verdict": self.verdict, "expected": self.expected, "ok": self.ok,
               "fuel": self.fuel, "cutoff": self.cutoff, "probes": self.probes}
        if self.counterexample is not None:
            out["counterexample"] = self.counterexample
        if self.detail:
            out["detail"] = self.detail
        return out


class Context:
    """What one suite run needs: config, backend-aware Heyting engines, probes and a sink."""

    def __init__(self, suite: str, cfg: RunConfig):
        self.suite = suite
        self.cfg = cfg
        self.fuel = cfg.suite_fuel(suite)
        self.items: list[Item] = []
        self.timings: dict[str, float] = {}
        self._probes: Optional[ProbeFamily] = None

    def probes(self) -> ProbeFamily:
        if self._probes is None:
            self._probes = resolve_probes(self.cfg.probes)
        return self._probes

    def heyting(self, backend: Optional[str] = None, **kw: Any) -> Heyting:
        name = backend or self.cfg.backend
        b = get_backend(name, self.fuel, trunc=self.cfg.trunc)
        return Heyting(b, fuel=self.fuel, **kw)

    def add(self, item: str, anchor: str, v: Verdict, expected: Optional[str] = None,
            cutoff: Optional[int] = None, probes: Optional[ProbeFamily] = None,
            detail: Optional[dict] = None) -> Item:
        if expected is None:
            expected = "Refuted" if item in MANIFESTS[self.suite]["refuted"] else "Confirmed"
        ce = to_sexpr(v.counterexample, 400) if v.counterexample is not None else None
        d = dict(detail or {})
        d.setdefault("tested", v.tested)
        d.setdefault("proved", v.proved)
        if v.reason:
            d.setdefault("reason", v.reason)
        it = Item(self.suite, item, anchor, v.kind, expected, self.fuel, cutoff,
                  (probes.describe() if probes is not None else []), ce, d)
        self.items.append(it)
        return it


def resolve_probes(spec: str) -> ProbeFamily:
    """A corpus label, or a path to a probe file."""
    if spec == "default":
        return M.default_probes()
    p = Path(spec)
    if p.suffix == ".sexp" or p.exists():
        return M.load_probe_file(p)
    return M.load_probes(spec)


def refuter_verdict(rows: Sequence[dict], max_inconclusive: float = 0.0) -> Verdict:
    """Refuted when no row survives and the inconclusive share stays within bounds."""
    n = len(rows)
    refuted = sum(r["verdict"] == "Refuted" for r in rows)
    open_ = sum(r["verdict"] == "Inconclusive" for r in rows)
    survived = n - refuted - open_
    if survived == 0 and open_ <= max_inconclusive * n:
        return Verdict("Refuted", None, f"{refuted} of {n} candidates refuted", n, refuted)
    return Verdict("Inconclusive", None, f"{refuted} refuted, {open_} inconclusive, "
                   f"{survived} unrefuted of {n}", n, refuted)


def _rows(entries: Sequence[Any]) -> list[dict]:
    return [e.as_dict() for e in entries]


# ---------------------------------------------------------------- ehp

def suite_ehp(ctx: Context) -> None:
    cfg = ctx.cfg
    h = ctx.heyting()
    r = pca_law_check(h.backend, 50, cfg.seed)
    ctx.add("pca-laws", f"pca/k-s-laws/{h.backend.name}", r["verdict"],
            detail={"failures": r["failures"], "triples": len(r["rows"])})
    laws = H.witness_laws()
    for name, law in laws.items():
        vs = []
        for inst in H.instantiations("XYZ", cfg.samples, cfg.seed):
            X, Y = law(inst["X"], inst["Y"], inst["Z"])
            vs.append(h.check_reduction(H.WITNESS_TERMS[name], X, Y))
        ctx.add(f"uniform/{name}", f"heyting/uniform-witness/{name}", combine(vs),
                detail={"instantiations": len(vs)})
    lib = E.canned_library()
    ws = E.extracted_witnesses(lib)
    for name in E.LAW_ORDER:
        E.validate_derivation(lib[name], E.LAWS[name])
        v = E.check_law(h, name, ws[name], cfg.samples, cfg.seed)
        ctx.add(f"derivation/{name}", f"ehp/{name}", v,
                detail={"law": E.show_formula(E.LAWS[name]), "instantiations": cfg.samples,
                        "witness_size": len(to_sexpr(ws[name]))})


# ---------------------------------------------------------------- s4

def s4_truths(probes: ProbeFamily) -> list[tuple[str, M.ModalTruth]]:
    pts = (0, 1)
    f = {0: H.numeral_set(3), 1: H.numeral_set(0, 1)}
    g = {0: H.numeral_set(3), 1: TOP}
    mf, mg = M.mu(f, "mu f"), M.mu(g, "mu g")
    return [
        ("mu-f", mf),
        ("mu-g", mg),
        ("box-mu-f", M.box(mf, probes)),
        ("meet", M.m_meet(mf, mg)),
        ("top-imp-mu-f", M.m_imp(M.top_m(pts), mf)),
        ("arrow", M.f_arrow(pts)),
        ("top", M.top_m(pts)),
        ("join", M.m_join(mf, mg)),
        ("dia-mu-f", M.dia(mf, probes)),
        ("bigmeet", M.m_bigmeet([mf, mg, M.box(mg, probes)])),
    ]


def suite_s4(ctx: Context) -> None:
    h = ctx.heyting()
    probes = ctx.probes()
    truths = s4_truths(probes)
    for i, (name, f) in enumerate(truths):
        g = truths[(i + 1) % len(truths)][1]
        ctx.add(f"cert/{name}", "modal/certificate", M.check_cert(h, f, probes), probes=probes)
        for law, v in M.check_s4(h, f, g, probes).items():
            ctx.add(f"{law}/{name}", f"s4/{law}", v, probes=probes)
        nec = M.necessitation(app(K, st.i))
        v = M.check_modal(h, nec, M.top_m(f.points), M.box(M.m_imp(f, f), probes), probes)
        ctx.add(f"necessitation/{name}", "s4/necessitation", v, probes=probes)
    f = {0: H.numeral_set(3), 1: H.numeral_set(0, 1)}
    g = {0: H.numeral_set(3), 1: TOP}
    for law, v in M.mu_laws(h, f, g, probes, e_fg=st.i).items():
        ctx.add(f"mu/{law}", f"mu/{law}", v, probes=probes)
    emb = M.embedding_laws(h, f, g, probes)
    for law, v in emb.items():
        if law != "probes":
            ctx.add(f"embedding/{law}", f"mu/{law}", v, probes=probes)


# ---------------------------------------------------------------- s5

def s5_singletons() -> list[tuple[str, M.ModalTruth]]:
    one = ((),)
    out = [("top", M.f_top()), ("arrow", M.f_arrow())]
    for n in range(4):
        out.append((f"mu{{{n}}}", M.mu({(): H.numeral_set(n)})))
    out.append(("mu{0,1}", M.mu({(): H.numeral_set(0, 1)})))
    out.append(("mu-bot", M.mu({(): H.BOT})))
    out.append(("mu-top", M.mu({(): TOP})))
    out.append(("top-imp-mu{2}", M.m_imp(M.top_m(one), M.mu({(): H.numeral_set(2)}))))
    return out


def s5_replay(h: Heyting, cand: Term, fuel: int) -> dict:
    r = M.s5_refuter(h, [cand], fuel=fuel)
    return r["entries"][0].as_dict()


def suite_s5(ctx: Context) -> None:
    h = ctx.heyting()
    probes = ctx.probes()
    cands = enumerate_closed_terms(300)
    r = M.s5_refuter(h, cands, fuel=ctx.fuel)
    rows = _rows(r["entries"])
    ctx.add("refuter", "s5/uniform-refuter", refuter_verdict(rows, 0.05),
            detail={"refuter": "s5", "counts": r["counts"], "a": r["a"], "b": r["b"], "rows": rows})
    for name, f in s5_singletons():
        _, v = M.singleton_s5_witness(h, f, probes)
        ctx.add(f"singleton/{name}", "s5/singleton-witness", v, probes=probes)


# ---------------------------------------------------------------- semantics

EXPECTED_FLAGS = {
    "arith": {"non_degenerate": True, "uniform": False, "classical": False, "term_friendly": True},
    "set": {"non_degenerate": True, "uniform": True, "classical": True},
    "scott": {"non_degenerate": True, "uniform": False, "classical": False, "term_friendly": True},
}


def _flags_verdict(qc: Any, want: dict) -> Verdict:
    got = {k: getattr(qc, k) for k in want}
    if got == want:
        return Verdict("Confirmed", None, "", len(want), len(want))
    return Verdict("Refuted", None, f"flags {got}, expected {want}", len(want), 0)


def _harness(ctx: Context, tag: str, S: Any, h: Heyting, formulas: Sequence[Any]) -> None:
    from .semantics import axiom_harness, classify_quantifier, validate_pack
    probes = ctx.probes()
    for name, v in validate_pack(S, h).items():
        ctx.add(f"{tag}/pack/{name}", "structure/witness-pack", v, cutoff=S.cutoff)
    qc = classify_quantifier(S, h)
    ctx.add(f"{tag}/quantifier", "quantifier/classification", _flags_verdict(qc, EXPECTED_FLAGS[tag]),
            cutoff=S.cutoff, detail={"flags": {k: getattr(qc, k) for k in
                                               ("non_degenerate", "uniform", "classical",
                                                "term_friendly")},
                                     "evidence": qc.evidence,
                                     # the free-variable instantiation check needs a uniform Q
                                     "free_instantiation_run": qc.uniform})
    out = axiom_harness(S, h, probes, formulas=formulas, qc=qc)
    for name, v in out.items():
        ctx.add(f"{tag}/{name}", f"harness/{name}", v, cutoff=S.cutoff, probes=probes)


def existence_replay(h: Heyting, cand: Term, fuel: int) -> dict:
    from .models import arith as A
    return A.existence_refute_one(h, cand, fuel).as_dict()


def suite_semantics(ctx: Context) -> None:
    from .models import arith as A
    from .models import scott_structure as SC
    from .models import sets as Z
    h = ctx.heyting("term")
    S = A.arith_structure(ctx.cfg.cutoff or 6)
    _harness(ctx, "arith", S, h, [A.parse(S, t) for t in ("x = 0", "x < 2", "Even(x)")])
    rows = _rows(A.existence_refuter(h, A.candidates(200)))
    ctx.add("arith/existence-refuter", "arith/universal-instantiation-refuter",
            refuter_verdict(rows), cutoff=S.cutoff,
            detail={"refuter": "existence", "rows": rows})
    hz = ctx.heyting("term")
    dom = [Z.ordinal(0), Z.ordinal(1), Z.SetElem([(numeral(1), Z.EMPTY)])]
    SZ = Z.set_structure(dom)
    Z.attach(hz, SZ)
    _harness(ctx, "set", SZ, hz, [Z._fm(SZ, "x in y"), Z._fm(SZ, "exists z. z in x")])
    SS = SC.scott_structure(cutoff=3)
    hs = SC.heyting_for(SS)
    _harness(ctx, "scott", SS, hs, [SC.parse(SS, "ap(k, x) = x"), SC.parse(SS, "x = y")])


# ---------------------------------------------------------------- goedel

def goedel_corpus(path: Path = FORMULA_DIR / "goedel.txt") -> list[str]:
    out = []
    for line in path.read_text().splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            out.append(line)
    return out


def suite_goedel(ctx: Context) -> None:
    from .models import arith as A
    from .semantics import goedel_equivalence_check
    h = ctx.heyting("term")
    S = A.arith_structure(ctx.cfg.cutoff or 6)
    probes = ctx.probes()
    for i, text in enumerate(goedel_corpus()):
        r = goedel_equivalence_check(S, A.parse(S, text), probes, h)
        d = r.as_dict()
        ctx.add(f"formula/{i:02d}", "goedel/translation-agreement", r.verdict, cutoff=S.cutoff,
                probes=probes, detail={"formula": d["formula"], "translation": d["translation"],
                                       "agree": r.agree, "disagree": r.disagree,
                                       "unresolved": r.unresolved, "cells": r.cells})


# ---------------------------------------------------------------- arith

def barcan_replay(h: Heyting, cand: Term, fuel: int, cutoff: int = 8) -> dict:
    from .models import arith as A
    return A.barcan_refute_one(h, cand, cutoff, fuel).as_dict()


def suite_arith(ctx: Context) -> None:
    from .models import arith as A
    h = ctx.heyting("term")
    cutoff = ctx.cfg.cutoff or 8
    S = A.arith_structure(cutoff)
    for case in A.INDUCTION_CORPUS:
        r = A.induction_check(S, h, case)
        ctx.add(f"induction/{case.name}", "arith/induction", r["verdict"], cutoff=cutoff,
                detail={"formula": case.formula, "sample": r["sample_membership"]})
    SC = A.arith_structure(24)
    for case in A.CT_CORPUS:
        r = A.ct_instance_realizer(SC, h, case, inputs=11)
        ctx.add(f"ct/{case.name}", "arith/church-thesis-instance", r["verdict"], cutoff=24,
                detail={"relation": case.relation, "index": r.get("index"),
                        "table": r.get("table", [])})
    r = A.ect_replay(h, A.CT_CORPUS[0], probes=ctx.probes())
    ctx.add(f"ect/{A.CT_CORPUS[0].name}", "arith/extended-church-thesis", r["verdict"], cutoff=4,
            detail={"translation": r["translation"]})
    S6 = A.arith_structure(6)
    probes = ctx.probes()
    for text in A.SIGMA1_CORPUS:
        out = A.sigma1_stability_check(S6, h, A.parse(S6, text), probes)
        ctx.add(f"sigma1/{text}", "arith/sigma1-stability", combine(out.values()), cutoff=6,
                probes=probes, detail={k: v.kind for k, v in out.items()})
    b = A.barcan_experiment(S, h, A.candidates(200))
    rows = _rows(b["rows"])
    ctx.add("barcan", "arith/barcan-experiment", refuter_verdict(rows),
            cutoff=cutoff, detail={"refuter": "barcan", "label": b["label"],
                                   "control": b["control"], "rows": rows})


# ---------------------------------------------------------------- set

def negated_replay(h: Heyting, cand: Term, fuel: int) -> dict:
    from .models import sets as Z
    return Z.negated_atomic_refute_one(h, cand, fuel=fuel).as_dict()


def suite_set(ctx: Context) -> None:
    from .models import sets as Z
    h = ctx.heyting("term")
    cutoff = ctx.cfg.cutoff or 6
    t = Z.numeral_table(h, cutoff)
    ctx.add("numeral-table", "set/numeral-table", t.verdict(), cutoff=cutoff,
            detail={"cells": len(t.rows), "mismatches": t.mismatches, "undecided": t.undecided})
    S = Z.set_structure(Z.default_domain(ctx.cfg.rank))
    Z.attach(h, S)
    ctx.add("rank-invariant", "set/rank-bookkeeping", Z.rank_invariant(h, S.model, S.domain()),
            detail={"domain": [x.show() for x in S.domain()]})
    for name, v in Z.pack_checks(h, S).items():
        ctx.add(f"pack/{name}", f"set/special-witness/{name}", v)
    for name, v in Z.axiom_witness_checks(h, S).items():
        ctx.add(f"axiom/{name}", f"set/axiom-witness/{name}", v)
    ctx.add("hat", "set/encoded-subset", Z.hat_characterization(h))
    rows = _rows(Z.negated_atomic_refuter(h, Z.candidates(200)))
    ctx.add("negated-atomic-refuter", "set/negated-atomic-refuter", refuter_verdict(rows),
            detail={"refuter": "negated", "rows": rows})
    h2 = ctx.heyting("term")
    S2 = Z.set_structure(Z.default_domain(2))
    Z.attach(h2, S2)
    ctx.add("atomic-stability", "set/atomic-stability", Z.atomic_stability(h2, S2, ctx.probes()),
            probes=ctx.probes())


# ---------------------------------------------------------------- scott

def _scott(ctx: Context):
    from .models import scott_structure as SC
    from .scott import ScottBackend
    sb = ScottBackend(ctx.fuel, trunc=ctx.cfg.trunc)
    S = SC.scott_structure(sb, cutoff=ctx.cfg.cutoff or 4)
    return S, SC.heyting_for(S)


def ms_replay(h: Heyting, cand: Term, fuel: int) -> dict:
    from .models import scott_structure as SC
    return SC.meyer_scott_refute_one(h.backend, cand).as_dict()


def neq_replay(h: Heyting, cand: Term, fuel: int) -> dict:
    from .models import scott_structure as SC
    S = SC.scott_structure(h.backend, cutoff=3)
    return SC.neq_instability_refute_one(S, h, cand).as_dict()


def suite_scott(ctx: Context) -> None:
    from .models import scott_structure as SC
    from .scott import meyer_scott_counterexample
    S, h = _scott(ctx)
    sb = S.backend
    _, _, rep = meyer_scott_counterexample(sb)
    v = Verdict("Confirmed", None, "", 1, 1) if rep.certified else \
        Verdict("Inconclusive", None, "counterexample not certified at this truncation")
    ctx.add("meyer-scott-counterexample", "scott/meyer-scott-counterexample", v,
            detail=rep.as_dict())
    for name, v in SC.axiom_checks(S, h, ctx.probes()).items():
        ctx.add(f"axiom/{name}", f"scott/axiom/{name}", v, cutoff=S.cutoff, probes=ctx.probes())
    for case in SC.CHOICE_CASES:
        r = SC.choice_check(S, h, case)
        ctx.add(f"choice/{case.name}", "scott/choice-witness", r["verdict"], cutoff=S.cutoff,
                detail={"phi": r["phi"], "a": r["a"], "c": r["c"], "domain": r.get("domain")})
    fx = SC.fixpoint_demo(fuel=ctx.fuel)
    ctx.add("fixpoint", "scott/paradoxical-fixed-point", fx["verdict"], detail={"rows": fx["rows"]})
    cands = SC.candidates(200)
    rows = _rows(SC.meyer_scott_refuter(sb, cands))
    ctx.add("meyer-scott-refuter", "scott/plain-meyer-scott-refuter", refuter_verdict(rows),
            detail={"refuter": "meyer-scott", "rows": rows})
    S3 = SC.scott_structure(sb, cutoff=3)
    rows = _rows(SC.neq_instability_refuter(S3, h, cands))
    ctx.add("neq-instability-refuter", "scott/inequality-instability-refuter",
            refuter_verdict(rows), cutoff=3,
            detail={"refuter": "neq", "rows": rows})


# ---------------------------------------------------------------- k2

def suite_k2_smoke(ctx: Context) -> None:
    from .k2 import K2Backend, generator, k2_apply, k2_graph_from_continuous
    kb = K2Backend(ctx.fuel)
    r = pca_law_check(kb, 50, ctx.cfg.seed)
    ctx.add("pca-laws", "pca/k-s-laws/k2", r["verdict"], detail={"failures": r["failures"]})
    gamma = k2_graph_from_continuous("id", lambda beta: beta, lambda n: n + 1)
    bad = []
    tested = 0
    for label in ("id", "shift", "const 3"):
        beta = generator(label)
        for n in range(8):
            got = k2_apply(kb, gamma, beta, n, 64)
            tested += 1
            if got != kb.value(beta, n):
                bad.append((label, n, got if isinstance(got, int) else None))
    v = Verdict("Confirmed", None, "", tested, tested) if not bad else \
        Verdict("Refuted", None, f"identity graph disagrees at {bad[:3]}", tested, tested - len(bad))
    ctx.add("identity-graph", "k2/identity-graph-application", v)
    h = Heyting(kb, fuel=ctx.fuel)
    for name in ("e1", "e5", "e9"):
        law = H.witness_laws()[name]
        vs = []
        for inst in H.instantiations("XYZ", 10, ctx.cfg.seed):
            X, Y = law(inst["X"], inst["Y"], inst["Z"])
            vs.append(h.check_reduction(H.WITNESS_TERMS[name], X, Y))
        ctx.add(f"uniform/{name}", f"heyting/uniform-witness/{name}", combine(vs))


RUNNERS: dict[str, Callable[[Context], None]] = {
    "ehp": suite_ehp, "s4": suite_s4, "s5": suite_s5, "semantics": suite_semantics,
    "goedel": suite_goedel, "arith": suite_arith, "set": suite_set, "scott": suite_scott,
    "k2-smoke": suite_k2_smoke,
}

# refuter kind -> (backend for the replay, replay function)
REPLAYERS: dict[str, tuple[Optional[str], Callable[[Heyting, Term, int], dict]]] = {
    "s5": (None, s5_replay),
    "existence": ("term", existence_replay),
    "barcan": ("term", barcan_replay),
    "negated": ("term", negated_replay),
    "meyer-scott": ("scott", ms_replay),
    "neq": ("scott", neq_replay),
}


def run_suite(suite: str, cfg: RunConfig) -> tuple[list[Item], float]:
    if suite not in RUNNERS:
        raise ValueError(f"unknown suite {suite!r}; expected one of {', '.join(SUITES)}")
    ctx = Context(suite, cfg)
    t0 = time.perf_counter()
    RUNNERS[suite](ctx)
    return ctx.items, time.perf_counter() - t0


def replay_rows(item: dict, cfg: RunConfig, limit: Optional[int] = None) -> list[dict]:
    """Re-run the stored Refuted rows of a refuter item; returns the mismatches."""
    kind = item.get("detail", {}).get("refuter")
    if kind is None:
        return []
    backend, fn = REPLAYERS[kind]
    ctx = Context(item["suite"], cfg)
    h = ctx.heyting(backend)
    if kind == "neq" or kind == "meyer-scott":
        from .scott import ScottBackend
        h = Heyting(ScottBackend(ctx.fuel, trunc=cfg.trunc), width=4, fuel=ctx.fuel)
    bad = []
    rows = [r for r in item["detail"]["rows"] if r["verdict"] == "Refuted"]
    for row in rows[:limit]:
        cand = parse_sexpr(row["candidate"])
        again = fn(h, cand, item["fuel"])
        if again != row:
            bad.append({"stored": row, "replayed": again})
    return bad
