"""The arithmetic structure over Curry numerals.

Domain 0..cutoff-1, Q(n) = {n~}, and equality and the order are two-valued
(Top or Bot).  Function symbols come from a small registry of primitive
recursive functions, each with a realizer on numerals, so Q is
term-friendly.  Kleene's T and U are modeled by a table of registered
programs (``TURegistry``).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Optional, Sequence

from .. import heyting as H
from .. import modal as M
from ..coding import pair, unpair
from ..heyting import BOT, TOP, TV, Heyting, Verdict, combine
from ..kernel import STANDARD, Tri, fixpoint, lam, numeral, numeral_value, std_env
from ..modal import ProbeFamily, compose
from ..semantics import (Structure, Valuation, WitnessPack, goedel_translate, change_of_basis_check,
                         modal_cert)
from ..syntax import (And, Atom, Bot, Box, Exists, Fn, Forall, Formula, Imp, Or, Signature, Var,
                      free_vars, free_vars_ordered, parse_formula, show)
from ..terms import K, Term, app, apps, enumerate_closed_terms, normalize, to_sexpr

st = STANDARD
ENV = std_env()

FIX = lam(r"\f. S (S (K (\w. f (S (S (K w) (K w)) I))) (K (\w. f (S (S (K w) (K w)) I)))) I")
SUCC = lam(r"\n. p kbar n", ENV)
DOUBLE = fixpoint(lam(r"\f n. (p0 n) z (succ (succ (f (p1 n))))", std_env(z=numeral(0), succ=SUCC)))
ADD = fixpoint(lam(r"\f m n. (p0 n) m (succ (f m (p1 n)))", std_env(succ=SUCC)))
PARITY = fixpoint(lam(r"\f n. (p0 n) (p k I) ((p0 (p1 n)) (p kbar I) (f (p1 (p1 n))))", ENV))


@dataclass(frozen=True)
class PrimRec:
    name: str
    arity: int
    fn: Callable[..., int]
    realizer: Term          # on the chain of argument numerals


REGISTRY: dict[str, PrimRec] = {
    "S": PrimRec("S", 1, lambda n: n + 1, SUCC),
    "double": PrimRec("double", 1, lambda n: 2 * n, DOUBLE),
    "add": PrimRec("add", 2, lambda m, n: m + n, lam(r"\c. a (p0 c) (p1 c)", std_env(a=ADD))),
}


# ---------------------------------------------------------------- T/U registry

@dataclass
class Program:
    index: int
    name: str
    table: dict              # input -> (trace, output)


@dataclass
class TURegistry:
    """Extracted programs; T(e,n,q) and U(q,m) are Top exactly on table rows."""

    programs: dict = field(default_factory=dict)

    def register(self, name: str, outputs: Mapping[int, int]) -> int:
        index = len(self.programs)
        table = {n: (pair(index, pair(n, m)), m) for n, m in outputs.items()}
        self.programs[index] = Program(index, name, table)
        return index

    def T(self, e: int, n: int, q: int) -> bool:
        prog = self.programs.get(e)
        return prog is not None and n in prog.table and prog.table[n][0] == q

    def U(self, q: int, m: int) -> bool:
        e, rest = unpair(q)
        prog = self.programs.get(e)
        if prog is None:
            return False
        n, out = unpair(rest)
        return n in prog.table and prog.table[n] == (q, m) and out == m


def _tv(b: bool) -> TV:
    return TOP if b else BOT


def _q(n: int) -> TV:
    return H.explicit([numeral(n)], f"{{{n}~}}")


def _iter_p1(n: int) -> Term:
    if n == 0:
        return st.i
    body = "c"
    for _ in range(n):
        body = f"(p1 {body})"
    return lam(r"\c. " + body, ENV)


def arith_structure(cutoff: int = 8, registry: Optional[TURegistry] = None) -> Structure:
    if cutoff < 2:
        raise ValueError("cutoff must be at least 2")
    reg = registry or TURegistry()
    funcs = {name: ((("Nat",) * r.arity), "Nat") for name, r in REGISTRY.items()}
    rels = {"<": ("Nat", "Nat"), "Even": ("Nat",), "T": ("Nat", "Nat", "Nat"), "U": ("Nat", "Nat")}
    sig = Signature(("Nat",), funcs, rels, literal_sort="Nat")
    relations = {
        "<": lambda a, b: _tv(a < b),
        "Even": lambda a: _tv(a % 2 == 0),
        "T": lambda e, n, q: _tv(reg.T(e, n, q)),
        "U": lambda q, m: _tv(reg.U(q, m)),
    }
    pack = WitnessPack(
        ref1=st.i, ref2=app(K, numeral(0)), sym=st.i, tran=st.i,
        rel={name: _iter_p1(len(s)) for name, s in rels.items()},
        fn={name: st.i for name in REGISTRY},
    )
    S = Structure(
        name=f"N0[cutoff={cutoff}]", signature=sig, domains={"Nat": tuple(range(cutoff))},
        functions={name: r.fn for name, r in REGISTRY.items()}, relations=relations,
        equality=lambda a, b: _tv(a == b), quantifier=_q, pack=pack, literal=int,
        q_terms={name: r.realizer for name, r in REGISTRY.items()}, cutoff=cutoff,
        render=lambda n: f"{n}",
    )
    S.registry = reg        # type: ignore[attr-defined]
    return S


def parse(S: Structure, text: str) -> Formula:
    return parse_formula(text, S.signature)


# ---------------------------------------------------------------- induction

INDUCTION = lam(r"\c. fix (\g n. (p0 n) (p0 c) ((p1 c) (p1 n) (g (p1 n))))", std_env(fix=FIX))


@dataclass(frozen=True)
class InductionCase:
    name: str
    formula: str            # in the variable x
    base: str               # lambda text for e0
    step: str               # lambda text for e1: \n a. ...


INDUCTION_CORPUS = (
    InductionCase("refl", "x = x", r"I", r"\n a. a"),
    InductionCase("even-double", "Even(double(x))", r"I", r"\n a. a"),
    InductionCase("below-succ", "exists y. y < S(x)", r"p z I", r"\n u. u"),
    InductionCase("zero-or-succ", "x = 0 | (exists y. S(y) = x)", r"p k I", r"\n u. p kbar (p n I)"),
    InductionCase("parity", "Even(x) | Even(S(x))", r"p k I", r"\n u. (p0 u) (p kbar I) (p k I)"),
)


def induction_check(S: Structure, h: Heyting, case: InductionCase) -> dict:
    """The induction index on phi(0) & forall x (phi(x) -> phi(S x)) ~> forall x phi(x)."""
    phi = parse(S, case.formula)
    from ..syntax import substitute
    phi0 = substitute(phi, "x", Fn("0"))
    step = Forall("x", "Nat", Imp(phi, substitute(phi, "x", Fn("S", (Var("x"),)))))
    ante = H.meet(S.valuation().plain(phi0, {}), S.valuation().plain(step, {}))
    goal = S.valuation().plain(Forall("x", "Nat", phi), {})
    env = std_env(z=numeral(0))
    sample = h.nf(apps(st.p, lam(case.base, env), lam(case.step, env)))
    pre = h.mem(ante, sample)
    samples = [sample] + [x for x in h.sample(ante) if x != sample]
    v = h.check_reduction(INDUCTION, ante, goal, samples=samples if pre is not Tri.OUT else samples[1:])
    if pre is Tri.OUT:
        v = Verdict("Inconclusive", None, "hand-built antecedent sample is not a member", v.tested, v.proved)
    return {"item": case.name, "formula": case.formula, "sample_membership": pre.name,
            "verdict": v}


# ---------------------------------------------------------------- Church's thesis instances

@dataclass(frozen=True)
class CTCase:
    name: str
    relation: str            # in n, m
    witness: str             # lambda text, n -> p m proof
    oracle: Callable[[int], int]


CT_CORPUS = (
    CTCase("successor", "m = S(n)", r"\n. p (succ n) I", lambda n: n + 1),
    CTCase("constant-zero", "m = 0", r"\n. p z I", lambda n: 0),
    CTCase("double", "m = double(n)", r"\n. p (d n) I", lambda n: 2 * n),
)


def ct_instance_realizer(S: Structure, h: Heyting, case: CTCase, inputs: int = 11) -> dict:
    """Extract n |-> p0(e n~), register it, and check T, U and the relation on the inputs.

    The antecedent is bounded by ``inputs``; S needs a cutoff above every output.
    """
    reg: TURegistry = S.registry        # type: ignore[attr-defined]
    env = std_env(succ=SUCC, z=numeral(0), d=DOUBLE)
    e = lam(case.witness, env)
    phi = parse(S, case.relation)
    ante_f = parse(S, f"forall n < {inputs}. exists m. {case.relation}")
    ante = S.valuation().plain(ante_f, {})
    pre = h.mem(ante, h.nf(compose(r"\n z. e n", e=e)))
    out: dict = {"item": case.name, "relation": case.relation, "antecedent": pre.name}
    if pre is Tri.OUT:
        out["verdict"] = Verdict("Refuted", e, "antecedent witness refuted")
        return out
    outputs: dict[int, int] = {}
    for n in range(inputs):
        r = h.apply(e, numeral(n))
        head = None if r is None else h.apply(st.p0, r)
        m = None if head is None else numeral_value(head, 4 * inputs + 4)
        if m is None:
            out["verdict"] = Verdict("Inconclusive", None, f"no numeral output at n={n}")
            return out
        outputs[n] = m
    index = reg.register(case.name, outputs)
    rows = []
    bad = []
    val = S.valuation()
    for n in range(inputs):
        q, m = reg.programs[index].table[n]
        conj = H.meet(S.relations["T"](index, n, q),
                      H.meet(S.relations["U"](q, m), val.plain(phi, {"n": n, "m": m})))
        proof = h.apply(st.p1, h.apply(e, numeral(n)))
        member = h.nf(apps(st.p, st.i, apps(st.p, st.i, proof)))
        ok = h.mem(conj, member) is not Tri.OUT and m == case.oracle(n)
        rows.append({"n": n, "q": q, "m": m, "oracle": case.oracle(n), "ok": ok})
        if not ok:
            bad.append(n)
    out["index"] = index
    out["table"] = rows
    out["verdict"] = (Verdict("Confirmed", None, "", inputs, inputs) if not bad else
                      Verdict("Refuted", None, f"mismatch at inputs {bad}", inputs, 0))
    return out


def ect_replay(h: Heyting, case: CTCase, cutoff: int = 4,
               probes: Optional[ProbeFamily] = None) -> dict:
    """Translate the CT antecedent, then change basis on its boxed matrix on a small domain."""
    S = arith_structure(cutoff)
    phi = parse(S, case.relation)
    g = goedel_translate(Forall("n", "Nat", Exists("m", "Nat", phi)))
    checks = change_of_basis_check(S, goedel_translate(phi), "G", h, probes)
    return {"item": case.name, "translation": show(g), "checks": checks,
            "verdict": combine(checks.values())}


# ---------------------------------------------------------------- decidable realizers

def truth(S: Structure, f: Formula, env: Mapping[str, Any]) -> bool:
    """Classical truth over the cutoff domain, treating Top atoms as true."""
    val = S.valuation()
    if isinstance(f, Atom):
        v = H.canon(val.atom(f, env))
        if v.kind not in ("top", "bot"):
            raise ValueError("decidable realizers need two-valued atoms")
        return v.kind == "top"
    if isinstance(f, Bot):
        return False
    if isinstance(f, And):
        return truth(S, f.left, env) and truth(S, f.right, env)
    if isinstance(f, Or):
        return truth(S, f.left, env) or truth(S, f.right, env)
    if isinstance(f, Imp):
        return (not truth(S, f.left, env)) or truth(S, f.right, env)
    if isinstance(f, Exists):
        return any(truth(S, f.body, {**env, f.var: c}) for c in S.domain(f.sort))
    if isinstance(f, Forall):
        return all(truth(S, f.body, {**env, f.var: c}) for c in S.domain(f.sort))
    if isinstance(f, Box):
        return truth(S, f.body, env)
    raise TypeError(f)


def select(ws: Sequence[Term]) -> Term:
    """q |-> ws[i] when q is the i-th numeral (last entry for anything beyond)."""
    out = app(K, ws[-1])
    for w in reversed(ws[:-1]):
        out = lam(r"\q. (p0 q) w (r (p1 q))", std_env(w=w, r=out))
    return out


def realize(S: Structure, f: Formula, env: Mapping[str, Any]) -> Term:
    """For true f: an element of ||f||_mu(E) for every E."""
    if isinstance(f, Atom):
        return compose(r"d2 I")
    if isinstance(f, And):
        return apps(st.p, realize(S, f.left, env), realize(S, f.right, env))
    if isinstance(f, Or):
        if truth(S, f.left, env):
            return compose(r"d2 (p k w)", w=realize(S, f.left, env))
        return compose(r"d2 (p kbar w)", w=realize(S, f.right, env))
    if isinstance(f, Imp):
        if not truth(S, f.left, env):
            return compose(r"\a. c (\z. r a)", c=modal_cert(f.right), r=refute(S, f.left, env))
        return app(K, realize(S, f.right, env))
    if isinstance(f, Exists):
        for c in S.domain(f.sort):
            if truth(S, f.body, {**env, f.var: c}):
                return compose(r"d2 (p n w)", n=numeral(c), w=realize(S, f.body, {**env, f.var: c}))
    if isinstance(f, Forall):
        return select([realize(S, f.body, {**env, f.var: c}) for c in S.domain(f.sort)])
    if isinstance(f, Box):
        return compose(r"d2 w", w=realize(S, f.body, env))
    raise ValueError(f"{show(f)} is not true")


def refute(S: Structure, f: Formula, env: Mapping[str, Any]) -> Term:
    """For false f: a map from ||f||_mu(E) into E, for every E."""
    if isinstance(f, (Atom, Bot)):
        return compose(r"\a. a I")
    if isinstance(f, And):
        if not truth(S, f.left, env):
            return compose(r"\a. r (p0 a)", r=refute(S, f.left, env))
        return compose(r"\a. r (p1 a)", r=refute(S, f.right, env))
    if isinstance(f, Or):
        return compose(r"\a. a (\u. (p0 u) l r (p1 u))",
                       l=refute(S, f.left, env), r=refute(S, f.right, env))
    if isinstance(f, Imp):
        return compose(r"\a. r (a w)", r=refute(S, f.right, env), w=realize(S, f.left, env))
    if isinstance(f, Exists):
        sel = select([_refute_or_any(S, f.body, {**env, f.var: c}) for c in S.domain(f.sort)])
        return compose(r"\a. a (\u. s (p0 u) (p1 u))", s=sel)
    if isinstance(f, Forall):
        for c in S.domain(f.sort):
            if not truth(S, f.body, {**env, f.var: c}):
                return compose(r"\a. r (a n)", r=refute(S, f.body, {**env, f.var: c}), n=numeral(c))
    if isinstance(f, Box):
        return compose(r"\a. a r", r=refute(S, f.body, env))
    raise ValueError(f"{show(f)} is not false")


def _refute_or_any(S: Structure, f: Formula, env: Mapping[str, Any]) -> Term:
    return refute(S, f, env) if not truth(S, f, env) else st.i


SIGMA1_CORPUS = (
    "0 = 0",
    "exists s. s = S(0)",
    "forall x < 2. x = x",
    "exists x. x < 3 & Even(S(x))",
    "exists y. exists z. (z < y & add(z, z) = double(S(0)))",
    "exists x. forall y < x. ~(y = 4)",
)


def sigma1_stability_check(S: Structure, h: Heyting, f: Formula,
                           probes: Optional[ProbeFamily] = None) -> dict[str, Verdict]:
    """f, box f and f^box pairwise, with witnesses from the decided truth of f."""
    probes = probes or M.default_probes()
    val = S.valuation(probes)
    g = goedel_translate(f)
    A, B, C = val.truth(f), val.truth(Box(f)), val.truth(g)
    true = truth(S, f, {})

    def into(target: Formula) -> Term:
        if true:
            return app(K, realize(S, target, {}))
        return compose(r"\a. c (\z. r a)", c=modal_cert(target), r=refute(S, f, {}))

    def out_of(source: Formula) -> Term:
        if true:
            return app(K, realize(S, f, {}))
        return compose(r"\a. c (\z. r a)", c=modal_cert(f), r=refute(S, source, {}))

    t_law = M.s4_witnesses(modal_cert(f))["T"]
    return {
        "to-box": M.check_modal(h, into(Box(f)), A, B, probes),
        "from-box": M.check_modal(h, t_law, B, A, probes),
        "to-translation": M.check_modal(h, into(g), A, C, probes),
        "from-translation": M.check_modal(h, out_of(g), C, A, probes),
    }


# ---------------------------------------------------------------- refuters

@dataclass
class Refutation:
    candidate: Term
    verdict: str             # Refuted | Inconclusive | Unrefuted
    trace: str

    def as_dict(self) -> dict:
        return {"candidate": to_sexpr(self.candidate), "verdict": self.verdict, "trace": self.trace}


def _run(h: Heyting, t: Term, fuel: int) -> tuple[Optional[Term], str]:
    nf, _ = normalize(t, fuel)
    if nf is not None:
        return nf, ""
    nf, _ = normalize(t, 2 * fuel)
    if nf is not None:
        return nf, "needed doubled fuel"
    return None, f"no normal form at fuel {fuel} or {2 * fuel}"


def existence_refute_one(h: Heyting, e: Term, fuel: Optional[int] = None) -> Refutation:
    """r = e d2 i must lie in {n~} for every n; exhibit the n where it does not."""
    fuel = fuel or h.fuel
    r, note = _run(h, apps(e, M.W("d2"), st.i), fuel)
    if r is None:
        return Refutation(e, "Refuted", f"e d2 i: {note}, so it lies in no Q(n)")
    n = 1 if r == numeral(0) else 0
    return Refutation(e, "Refuted", f"e d2 i = {to_sexpr(r, 80)} is not in Q({n}) = {{{n}~}}"
                      + (f" ({note})" if note else ""))


def existence_refuter(h: Heyting, candidates: Sequence[Term]) -> list[Refutation]:
    return [existence_refute_one(h, e) for e in candidates]


def barcan_refute_one(h: Heyting, e: Term, cutoff: int, fuel: Optional[int] = None,
                      predicate: Callable[[int], bool] = lambda y: y % 2 == 0) -> Refutation:
    """p0(e y~) must be k exactly when the stand-in predicate holds, for y < cutoff."""
    fuel = fuel or h.fuel
    for y in range(cutoff):
        r, note = _run(h, app(st.p0, app(e, numeral(y))), fuel)
        want = st.k if predicate(y) else st.kbar
        if r is None:
            return Refutation(e, "Refuted", f"y={y}: p0(e y~) {note}")
        if r != want:
            return Refutation(e, "Refuted", f"y={y}: p0(e y~) = {to_sexpr(r, 60)}, expected "
                              f"{'k' if predicate(y) else 'kbar'}")
    return Refutation(e, "Unrefuted", f"answers the stand-in correctly for y < {cutoff}")


def barcan_experiment(S: Structure, h: Heyting, candidates: Sequence[Term]) -> dict:
    """Candidate witnesses for forall y (Even(y) | ~Even(y)) against the decision they imply.

    An experiment on a decidable stand-in, with the parity realizer as a control.
    """
    rows = [barcan_refute_one(h, e, S.cutoff or 8) for e in candidates]
    f = parse(S, "forall y. Even(y) | ~Even(y)")
    control = h.mem(S.valuation().plain(f, {}), PARITY)
    return {"label": "experiment: decidable stand-in for the halting set",
            "rows": rows, "control": control.name,
            "refuted": sum(r.verdict == "Refuted" for r in rows),
            "unrefuted": sum(r.verdict == "Unrefuted" for r in rows)}


def candidates(count: int = 200) -> list[Term]:
    return enumerate_closed_terms(count)
