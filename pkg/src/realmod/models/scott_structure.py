"""The Scott structure over the graph model.

Elements are graph-model sets, application is the model's ``ap``, equality
is two-valued (Top when the sets agree below the truncation, Bot when some
code separates them) and Q(x) = {x}.  The checks here cover the combinator
axioms, the modal Meyer-Scott form, the choice witness, the paradoxical
fixed point and two candidate refuters.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .. import heyting as H
from .. import modal as M
from ..heyting import BOT, TOP, TV, Heyting, Verdict, combine
from ..kernel import STANDARD, Tri, lam, std_env
from ..modal import ProbeFamily, compose
from ..scott import ALL, EMPTY, ScottBackend, cofin, fin, one, pairs, scott_graph
from ..semantics import EvalError, Structure, WitnessPack
from ..syntax import Atom, Bot, Box, Formula, Imp, Signature, Var, free_vars_ordered, parse_formula
from ..terms import K, S as S_COMB, Term, app, apps, enumerate_closed_terms, to_sexpr

st = STANDARD
ENV = std_env()

Y = lam(r"\f. (\x. f (x x)) (\x. f (x x))")
AP = lam(r"\c. (p0 c) (p1 c)", ENV)
SKK = apps(S_COMB, K, K)
BOT_F = Bot()

B0 = lam(r"\a x. p0 (a x)", ENV)
B1 = lam(r"\a x. p (p0 (a x)) (p k (p1 (a x)))", ENV)
B2 = lam(r"\a. p (b0 a) (b1 a)", std_env(b0=B0, b1=B1))


class TruncationInconclusive(EvalError):
    """Two elements could not be separated or identified below the truncation."""


def default_domain(cutoff: int = 4) -> tuple:
    base = (EMPTY, ALL, pairs([(0, 0)]), fin([1, 4]), cofin([2]), pairs([(0, 3)]))
    return base[:cutoff]


def scott_structure(backend: Optional[ScottBackend] = None, domain: Optional[Sequence[Term]] = None,
                    cutoff: int = 4) -> Structure:
    sb = backend or ScottBackend()
    dom = tuple(domain) if domain is not None else default_domain(cutoff)

    def equality(a: Term, b: Term) -> TV:
        r = sb.equal(a, b)
        if r is Tri.OUT:
            return BOT
        if r in (Tri.IN, Tri.UNREF):
            return TOP
        raise TruncationInconclusive(f"{to_sexpr(a, 40)} = {to_sexpr(b, 40)} undecided "
                                     f"below {sb.trunc}")

    sig = Signature(("El",), {"ap": (("El", "El"), "El"), "k": ((), "El"), "s": ((), "El")})
    pack = WitnessPack(ref1=st.i, ref2=app(K, st.i), sym=st.i, tran=st.i, rel={},
                       fn={"ap": st.i, "k": st.i, "s": st.i})
    labels = {t: sb.show(t) for t in dom}
    S = Structure(
        name=f"Scott[trunc={sb.trunc},n={len(dom)}]", signature=sig, domains={"El": dom},
        functions={"ap": lambda a, b: sb.element(app(a, b)), "k": lambda: st.k, "s": lambda: st.s},
        relations={}, equality=equality,
        quantifier=lambda x: H.explicit([x], "{" + labels.get(x, to_sexpr(x, 30)) + "}"),
        pack=pack, q_terms={"ap": AP, "k": app(K, st.k), "s": app(K, st.s)},
        cutoff=len(dom), render=lambda t: labels.get(t, to_sexpr(t, 30)),
    )
    S.backend = sb      # type: ignore[attr-defined]
    return S


def parse(S: Structure, text: str) -> Formula:
    return parse_formula(text, S.signature)


def heyting_for(S: Structure, width: int = 4) -> Heyting:
    return Heyting(S.backend, width=width)      # type: ignore[attr-defined]


def _run(check) -> Verdict:
    try:
        return check()
    except TruncationInconclusive as exc:
        return Verdict("Inconclusive", None, str(exc))


# ---------------------------------------------------------------- axioms

def _one_term(n: int) -> str:
    """1_n written in the signature."""
    i = "ap(ap(s, k), k)"
    o1 = f"ap(s, ap(k, {i}))"
    t = o1
    for _ in range(n - 1):
        t = f"ap(ap(s, ap(k, {o1})), ap(s, ap(k, {t})))"
    return t


AXIOMS = {
    "k": "forall x. forall y. ap(ap(k, x), y) = x",
    "s": "forall x. forall y. forall z. ap(ap(ap(s, x), y), z) = ap(ap(x, z), ap(y, z))",
    "one2": f"ap({_one_term(2)}, k) = k",
    "one3": f"ap({_one_term(3)}, s) = s",
}

MEYER_SCOTT = "forall a. forall b. (forall x. ap(a, x) = ap(b, x)) -> ap({one}, a) = ap({one}, b)"
MODAL_MEYER_SCOTT = ("forall a. forall b. (box (forall x. ap(a, x) = ap(b, x))) -> "
                     "ap({one}, a) = ap({one}, b)")


def _constant(n: int, core: Term) -> Term:
    t = core
    for _ in range(n):
        t = app(K, t)
    return t


def axiom_checks(S: Structure, h: Heyting, probes: Optional[ProbeFamily] = None,
                 c: Optional[Term] = None) -> dict[str, Verdict]:
    """Each axiom by an arbitrary element c, plain and modal; Meyer-Scott both ways."""
    probes = probes or M.default_probes()
    c = c if c is not None else st.k
    val = S.valuation(probes)
    out: dict[str, Verdict] = {}
    for name, text in AXIOMS.items():
        f = parse(S, text)
        depth = text.count("forall")

        def plain(f=f) -> Verdict:
            return h.check_reduction(app(K, c), TOP, val.plain(f, {}))

        def modal(f=f, depth=depth) -> Verdict:
            return M.check_valid(h, _constant(depth, compose(r"d2 I")), val.truth(f), probes)
        out[name] = _run(plain)
        out[name + ".modal"] = _run(modal)
    o = _one_term(1)
    ms = parse(S, MEYER_SCOTT.format(one=o))
    out["meyer-scott"] = _run(lambda: h.check_reduction(app(K, c), TOP, val.plain(ms, {})))
    mms = parse(S, MODAL_MEYER_SCOTT.format(one=o))
    out["meyer-scott.modal"] = _run(
        lambda: M.check_valid(h, _constant(2, st.i), val.truth(mms), probes))
    return out


# ---------------------------------------------------------------- choice

@dataclass(frozen=True)
class ChoiceCase:
    name: str
    phi: str            # in x and y
    a: str              # lambda text: the antecedent realizer


CHOICE_CASES = (
    ChoiceCase("y=x", "y = x", r"\x. p x I"),
    ChoiceCase("y=kxx", "y = ap(ap(k, x), x)", r"\x. p (k x x) I"),
    ChoiceCase("y=skx", "y = ap(ap(s, k), x)", r"\x. p (s k x) I"),
    ChoiceCase("y=kkx", "y = ap(ap(k, k), x)", r"\x. p k I"),
    ChoiceCase("y=x0", "y = ap(x, ap(ap(s, k), k))", r"\x. p (x (s k k)) I"),
)


def _close(sb: ScottBackend, dom: list, f, limit: int) -> Optional[list]:
    """dom closed under f, up to ``limit`` new elements; None when it does not close."""
    out = list(dom)
    i = 0
    while i < len(out):
        y = f(out[i])
        known = [sb.equal(y, z) for z in out]
        if Tri.UNKNOWN in known:
            return None
        if all(k is Tri.OUT for k in known):
            if len(out) >= len(dom) + limit:
                return None
            out.append(y)
        i += 1
    return out


def choice_check(S: Structure, h: Heyting, case: ChoiceCase, limit: int = 4) -> dict:
    """b2 a in ||exists c forall x exists y (cx = y & phi)|| for the realizer a of the antecedent.

    The domain is first closed under x -> p0 (a x) and extended by c = b0 a,
    so that the existentials can see the elements the realizers name.
    """
    sb: ScottBackend = S.backend        # type: ignore[attr-defined]
    a = h.nf(lam(case.a, ENV))
    c = sb.element(app(B0, a))
    dom = _close(sb, list(S.domain()) + [c], lambda x: sb.element(app(st.p0, app(a, x))), limit)
    out = {"case": case.name, "phi": case.phi, "a": to_sexpr(a, 80), "c": sb.show(c)[:80]}
    if dom is None:
        out["verdict"] = Verdict("Inconclusive", None, "domain does not close under the witness")
        return out
    wide = scott_structure(sb, domain=dom)
    val = wide.valuation()
    ante = parse(wide, f"forall x. exists y. {case.phi}")
    cons = parse(wide, f"exists c. forall x. exists y. ap(c, x) = y & {case.phi}")

    def run() -> Verdict:
        v_a = h.check_reduction(app(K, a), TOP, val.plain(ante, {}))
        lands = h.mem(val.plain(cons, {}), h.nf(app(B2, a)))
        v_b = (Verdict("Confirmed", None, "", 1, int(lands is Tri.IN)) if lands is not Tri.OUT
               else Verdict("Refuted", app(B2, a), "b2 a misses the consequent"))
        return combine([v_a, v_b])
    out["verdict"] = _run(run)
    out["domain"] = len(dom)
    return out


# ---------------------------------------------------------------- fixed point

FIXPOINT_SAMPLES = (
    scott_graph({(): [1], (1,): [1, 2]}), pairs([(0, 3)]), EMPTY, ALL, scott_graph({(1,): [5]}),
)


def fixpoint_demo(truncs: Sequence[int] = (1 << 8, 1 << 10), samples: Sequence[Term] = FIXPOINT_SAMPLES,
                  fuel: Optional[int] = None, show: int = 16) -> dict:
    """c (y (1 c)) = y (1 c) at each truncation, with the fixed point's low members."""
    rows = []
    stable = True
    for c in samples:
        row = {"c": to_sexpr(c, 60), "by_trunc": {}}
        seen = set()
        for tr in truncs:
            sb = ScottBackend(fuel=fuel, trunc=tr)
            fx = app(Y, app(one(), c))
            eq = sb.equal(app(c, fx), fx)
            low, exact = sb.members(fx, show)
            row["by_trunc"][str(tr)] = {"equal": eq.name, "members": low, "exact": exact}
            seen.add((eq.name, tuple(low), exact))
            if eq not in (Tri.IN, Tri.UNREF) or not exact:
                stable = False
        if len(seen) != 1:
            stable = False
        rows.append(row)
    v = Verdict("Confirmed", None, "", len(rows) * len(truncs), len(rows)) if stable else \
        Verdict("Inconclusive", None, "fixed point differs between truncations or is undecided")
    return {"rows": rows, "verdict": v}


# ---------------------------------------------------------------- Meyer-Scott refuter

@dataclass(frozen=True)
class MSRefutation:
    candidate: Term
    verdict: str                # Refuted | Inconclusive
    witness: Optional[str]      # which x separates c(skk) from x
    reason: str

    def as_dict(self) -> dict:
        return {"candidate": to_sexpr(self.candidate), "verdict": self.verdict,
                "x": self.witness, "reason": self.reason}


def meyer_scott_refute_one(sb: ScottBackend, c: Term,
                           xs: Sequence[Term] = (EMPTY, ALL)) -> MSRefutation:
    """c would have to send skk to every x (take D = {x}); two x's suffice."""
    r = sb.element(app(c, SKK))
    for x in xs:
        if sb.equal(r, x) is Tri.OUT:
            other = next(y for y in xs if y is not x)
            return MSRefutation(c, "Refuted", sb.show(x),
                                f"c(skk) differs from {sb.show(x)} (and {sb.show(other)} would need it too)")
    return MSRefutation(c, "Inconclusive", None, "c(skk) not separated from either sample")


def meyer_scott_refuter(sb: ScottBackend, cands: Sequence[Term]) -> list[MSRefutation]:
    return [meyer_scott_refute_one(sb, c) for c in cands]


# ---------------------------------------------------------------- instability of x != y

@dataclass(frozen=True)
class NeqRefutation:
    candidate: Term
    verdict: str                # Refuted | Unrefuted
    cell: Optional[str]
    reason: str

    def as_dict(self) -> dict:
        return {"candidate": to_sexpr(self.candidate), "verdict": self.verdict, "cell": self.cell,
                "reason": self.reason}


def neq_instability_refute_one(S: Structure, h: Heyting, e: Term,
                               probes: Optional[ProbeFamily] = None) -> NeqRefutation:
    """e as a uniform witness of x != y ~> box x != y; a failing cell refutes it.

    A uniform witness cannot tell the equal pairs (where the antecedent
    carries a box and the consequent is a boxed absurdity) from the distinct
    ones (where only the identity-like members are forced), so some cell
    fails; the chain through the paradoxical fixed point shows that none
    survives all of them.
    """
    probes = probes or M.default_probes()
    val = S.valuation(probes)
    neq = Imp(Atom("=", (Var("x"), Var("y"))), BOT_F)
    vars = free_vars_ordered(neq)
    A, B = val.family(neq, vars), val.family(Box(neq), vars)
    for x, D in M.cells(A, probes):
        v = _run(lambda: h.check_reduction(e, A.at(x, D), B.at(x, D)))
        if v.refuted:
            pt = ", ".join(S.render(t) for t in x)
            return NeqRefutation(e, "Refuted", f"({pt}) at {H.show_tv(D, 3)}",
                                 f"e sends {to_sexpr(v.counterexample, 60)} outside the boxed value")
    # at an equal pair the consequent is Top => D, and a_d = \w t. w (K d) lies in
    # the antecedent whenever d is in D; so e a_d I must land in D
    for x in A.points:
        if len(set(x)) != 1:
            continue
        for D in probes:
            if D.kind != "explicit":
                continue
            for d in D.elems:
                a = lam(r"\w t. w (K d)", std_env(d=d))
                r = h.apply(app(e, a), st.i)
                if r is None:
                    r = h.apply(app(e, a), st.i, 2 * h.fuel)
                if r is None or h.mem(D, r) is Tri.OUT:
                    pt = ", ".join(S.render(t) for t in x)
                    got = "undefined" if r is None else to_sexpr(r, 40)
                    return NeqRefutation(e, "Refuted", f"({pt}) at {H.show_tv(D, 3)}",
                                         f"e a I = {got} for a = \\w t. w (K {to_sexpr(d, 20)})")
    return NeqRefutation(e, "Unrefuted", None, "every sampled cell passed")


def neq_instability_refuter(S: Structure, h: Heyting, cands: Sequence[Term],
                            probes: Optional[ProbeFamily] = None) -> list[NeqRefutation]:
    return [neq_instability_refute_one(S, h, e, probes) for e in cands]



def candidates(count: int = 200) -> list[Term]:
    return enumerate_closed_terms(count)
