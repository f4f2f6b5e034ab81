"""Uniform many-valued structures and their non-modal and modal valuations.

A ``Structure`` interprets a signature over finite (cutoff-bounded) domains:
atomic formulas and equality take truth values, and a quantifier map Q feeds
both quantifiers.  ``evaluate`` computes the plain valuation, ``Valuation``
the modal one, where every connective is read in the prealgebra of
double-negation-stable maps and each value carries a certificate.

Witness builders in this module return closed terms assembled from the
structure's witness pack and the extracted law witnesses, so a check never
searches for a realizer; it only tests a constructed one on samples.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Iterable, Mapping, Optional, Sequence

from . import heyting as H
from . import modal as M
from .heyting import BOT, TOP, TV, Heyting, Verdict, combine, ominus
from .kernel import STANDARD, Tri, compile_abstraction
from .modal import ModalTruth, ProbeFamily, W, compose
from .syntax import (And, Atom, Bot, Box, Exists, Fn, Forall, Formula, Imp, Or, Signature, TermAst,
                     Var, free_vars, free_vars_ordered, is_modal, show, subformulas)
from .terms import K, Term, app, apps, to_sexpr, var

st = STANDARD


class EvalError(ValueError):
    pass


# ---------------------------------------------------------------- structures

@dataclass(frozen=True)
class WitnessPack:
    ref1: Term
    ref2: Term
    sym: Term
    tran: Term
    rel: Mapping[str, Term] = field(default_factory=dict)
    fn: Mapping[str, Term] = field(default_factory=dict)


@dataclass(eq=False)
class Structure:
    name: str
    signature: Signature
    domains: Mapping[str, tuple]
    functions: Mapping[str, Callable[..., Any]]
    relations: Mapping[str, Callable[..., TV]]
    equality: Callable[[Any, Any], TV]
    quantifier: Callable[[Any], TV]
    pack: WitnessPack
    literal: Optional[Callable[[str], Any]] = None
    q_terms: Mapping[str, Term] = field(default_factory=dict)   # term-friendliness witnesses
    cutoff: Optional[int] = None
    render: Callable[[Any], str] = str
    notes: tuple = ()

    def __post_init__(self) -> None:
        self._valuations: dict = {}
        for s in self.signature.sorts:
            if s not in self.domains or not self.domains[s]:
                raise EvalError(f"sort {s} has no domain")
        missing = [r for r in self.signature.relations if r not in self.relations]
        missing += [f for f in self.signature.functions if f not in self.functions]
        if missing:
            raise EvalError(f"uninterpreted symbols: {missing}")

    def domain(self, sort: Optional[str] = None) -> tuple:
        return tuple(self.domains[sort or self.signature.default_sort])

    def flags(self) -> dict:
        return {"structure": self.name, "cutoff": self.cutoff,
                "domain": {s: len(d) for s, d in self.domains.items()}}

    def valuation(self, probes: Optional[ProbeFamily] = None) -> "Valuation":
        probes = probes or M.default_probes()
        hit = self._valuations.get(probes)
        if hit is None:
            hit = Valuation(self, probes)
            self._valuations[probes] = hit
        return hit

    def expand(self, name: str, sorts: tuple, interp: Callable[..., TV], witness: Term,
               note: str = "") -> "Structure":
        if name in self.signature.relations or name in self.signature.functions:
            raise EvalError(f"symbol {name} already in the signature")
        return replace(self, name=f"{self.name}+{name}",
                       signature=self.signature.extend({name: sorts}),
                       relations={**self.relations, name: interp},
                       pack=replace(self.pack, rel={**self.pack.rel, name: witness}),
                       notes=self.notes + ((note,) if note else ()))


Env = Mapping[str, Any]


def _key(f: Formula, env: Env) -> tuple:
    return (f,) + tuple((v, env[v]) for v in sorted(free_vars(f)))


def chain(xs: Sequence[Term]) -> Term:
    """Right-nested pairing: x1, or p x1 (chain rest)."""
    if len(xs) == 1:
        return xs[0]
    return apps(st.p, xs[0], chain(xs[1:]))


def chain_tv(xs: Sequence[TV]) -> TV:
    if len(xs) == 1:
        return xs[0]
    return H.meet(xs[0], chain_tv(xs[1:]))


def _nth(c: Term, i: int, n: int) -> Term:
    """Component i of an n-element chain held in c."""
    for _ in range(i):
        c = app(st.p1, c)
    return c if i == n - 1 else app(st.p0, c)


# ---------------------------------------------------------------- valuations

class Valuation:
    """Plain and modal valuation of one structure under one probe family."""

    def __init__(self, S: Structure, probes: ProbeFamily):
        self.S = S
        self.probes = probes
        self._plain: dict = {}
        self._modal: dict = {}
        self._certs: dict = {}

    # -- terms

    def term(self, t: TermAst, env: Env) -> Any:
        if isinstance(t, Var):
            if t.name not in env:
                raise EvalError(f"unbound variable {t.name}")
            return env[t.name]
        if t.name.isdigit():
            if self.S.literal is None:
                raise EvalError(f"structure {self.S.name} has no numeral literals")
            return self.S.literal(t.name)
        fn = self.S.functions.get(t.name)
        if fn is None:
            raise EvalError(f"unknown function symbol {t.name}")
        return fn(*(self.term(a, env) for a in t.args))

    def atom(self, f: Atom, env: Env) -> TV:
        args = [self.term(a, env) for a in f.args]
        if f.rel == "=":
            return self.S.equality(*args)
        rel = self.S.relations.get(f.rel)
        if rel is None:
            raise EvalError(f"unknown relation symbol {f.rel}")
        return rel(*args)

    def _check_env(self, f: Formula, env: Env) -> None:
        missing = free_vars(f) - set(env)
        if missing:
            raise EvalError(f"unbound variables {sorted(missing)} in {show(f)}")

    # -- non-modal

    def plain(self, f: Formula, env: Env) -> TV:
        if is_modal(f):
            raise EvalError("the plain valuation takes non-modal formulas")
        self._check_env(f, env)
        return self._plain_rec(f, env)

    def _plain_rec(self, f: Formula, env: Env) -> TV:
        key = _key(f, env)
        hit = self._plain.get(key)
        if hit is not None:
            return hit
        if isinstance(f, Atom):
            out = self.atom(f, env)
        elif isinstance(f, Bot):
            out = BOT
        elif isinstance(f, And):
            out = H.meet(self._plain_rec(f.left, env), self._plain_rec(f.right, env))
        elif isinstance(f, Or):
            out = H.join(self._plain_rec(f.left, env), self._plain_rec(f.right, env))
        elif isinstance(f, Imp):
            out = H.imp(self._plain_rec(f.left, env), self._plain_rec(f.right, env))
        elif isinstance(f, Exists):
            out = H.big_join([H.meet(self.S.quantifier(c), self._plain_rec(f.body, {**env, f.var: c}))
                              for c in self.S.domain(f.sort)])
        elif isinstance(f, Forall):
            out = H.big_meet([H.imp(self.S.quantifier(c), self._plain_rec(f.body, {**env, f.var: c}))
                              for c in self.S.domain(f.sort)])
        else:
            raise EvalError(f"unexpected node {f!r}")
        self._plain[key] = out
        return out

    # -- modal

    def modal(self, f: Formula, env: Env, D: TV) -> TV:
        self._check_env(f, env)
        return self._modal_rec(f, env, D)

    def _modal_rec(self, f: Formula, env: Env, D: TV) -> TV:
        key = (_key(f, env), D)
        hit = self._modal.get(key)
        if hit is not None:
            return hit
        if isinstance(f, Atom):
            out = ominus(D, self.atom(f, env))
        elif isinstance(f, Bot):
            out = ominus(D, BOT)
        elif isinstance(f, And):
            out = H.meet(self._modal_rec(f.left, env, D), self._modal_rec(f.right, env, D))
        elif isinstance(f, Or):
            out = ominus(D, H.join(self._modal_rec(f.left, env, D), self._modal_rec(f.right, env, D)))
        elif isinstance(f, Imp):
            out = H.imp(self._modal_rec(f.left, env, D), self._modal_rec(f.right, env, D))
        elif isinstance(f, Exists):
            out = ominus(D, H.big_join([
                H.meet(self.S.quantifier(c), self._modal_rec(f.body, {**env, f.var: c}, D))
                for c in self.S.domain(f.sort)]))
        elif isinstance(f, Forall):
            out = H.big_meet([H.imp(self.S.quantifier(c), self._modal_rec(f.body, {**env, f.var: c}, D))
                              for c in self.S.domain(f.sort)])
        elif isinstance(f, Box):
            out = ominus(D, H.big_meet([self._modal_rec(f.body, env, E) for E in self.probes]))
        else:
            raise EvalError(f"unexpected node {f!r}")
        self._modal[key] = out
        return out

    def cert(self, f: Formula) -> Term:
        """Realizer of om_D ||f||_mu(D) ~> ||f||_mu(D), uniform in D and the environment."""
        hit = self._certs.get(f)
        if hit is None:
            hit = modal_cert(f)
            self._certs[f] = hit
        return hit

    def truth(self, f: Formula, env: Optional[Env] = None) -> ModalTruth:
        env = dict(env or {})
        self._check_env(f, env)
        return ModalTruth(((),), lambda x, D: self._modal_rec(f, env, D), self.cert(f), show(f),
                          self._flags(f))

    def family(self, f: Formula, vars: Sequence[str], base: Optional[Env] = None,
               points: Optional[Sequence[tuple]] = None) -> ModalTruth:
        """||f||_mu tabulated over assignments to ``vars`` (all of them unless ``points``)."""
        base = dict(base or {})
        pts = tuple(points) if points is not None else self.assignments(vars)
        for x in pts:
            self._check_env(f, {**base, **dict(zip(vars, x))})
        return ModalTruth(pts, lambda x, D: self._modal_rec(f, {**base, **dict(zip(vars, x))}, D),
                          self.cert(f), show(f), self._flags(f))

    def plain_map(self, f: Formula, vars: Sequence[str], base: Optional[Env] = None,
                  points: Optional[Sequence[tuple]] = None) -> dict:
        base = dict(base or {})
        pts = tuple(points) if points is not None else self.assignments(vars)
        return {x: self.plain(f, {**base, **dict(zip(vars, x))}) for x in pts}

    def assignments(self, vars: Sequence[str], sorts: Optional[Sequence[str]] = None) -> tuple:
        sorts = list(sorts or [None] * len(vars))
        return tuple(itertools.product(*(self.S.domain(s) for s in sorts)))

    def _flags(self, f: Formula) -> tuple:
        out = [f"cutoff={self.S.cutoff}"]
        if any(isinstance(g, Box) for g in subformulas(f)):
            out.append(M.BOX_CAVEAT)
        return tuple(out)


def evaluate(S: Structure, f: Formula, env: Optional[Env] = None) -> TV:
    return S.valuation().plain(f, dict(env or {}))


def evaluate_modal(S: Structure, f: Formula, env: Optional[Env] = None,
                   probes: Optional[ProbeFamily] = None) -> ModalTruth:
    return S.valuation(probes).truth(f, env)


# ---------------------------------------------------------------- certificates

def modal_cert(f: Formula) -> Term:
    if isinstance(f, (Atom, Bot, Or, Exists, Box)):
        return W("d3")
    if isinstance(f, And):
        return compose(r"\c. p (cf (p0 (d7lr c))) (cg (p1 (d7lr c)))",
                       cf=modal_cert(f.left), cg=modal_cert(f.right))
    if isinstance(f, Imp):
        return compose(r"\c a. cg (d5 c (d2 a))", cg=modal_cert(f.right))
    if isinstance(f, Forall):
        return M.uniform_closure_cert(compose(r"\c a. cg (d5 c (d2 a))", cg=modal_cert(f.body)))
    raise EvalError(f"unexpected node {f!r}")


# ---------------------------------------------------------------- substitution witnesses

def _lam(vars: Sequence[str], body: Term) -> Term:
    return compile_abstraction(body, list(vars))


V = var


def term_witness(S: Structure, t: TermAst, x: str) -> Term:
    """T with T e in ||t(b)=t(b')|| whenever e is in ||b=b'||, b and b' substituted for x."""
    pk = S.pack
    if isinstance(t, Var) and t.name == x:
        return st.i
    if x not in _tvars(t):
        return _lam(["e"], app(pk.ref2, V("e")))
    ef = pk.fn.get(t.name)
    if ef is None:
        raise EvalError(f"no function witness for {t.name}")
    parts = [app(term_witness(S, a, x), V("e")) for a in t.args]
    return _lam(["e"], app(ef, chain(parts)))


def _tvars(t: TermAst) -> set[str]:
    if isinstance(t, Var):
        return {t.name}
    out: set[str] = set()
    for a in t.args:
        out |= _tvars(a)
    return out


def subst_witness(S: Structure, f: Formula, x: str) -> Term:
    """Realizer of ||b=b'|| & ||f(b)|| ~> ||f(b')|| for the plain valuation, in the variable x."""
    pk = S.pack
    c = V("c")
    e, u = app(st.p0, c), app(st.p1, c)
    if x not in free_vars(f) or isinstance(f, Bot):
        return st.p1
    if isinstance(f, Atom):
        if f.rel == "=":
            Tt, Ts = (term_witness(S, a, x) for a in f.args)
            body = app(pk.tran, apps(st.p, app(pk.sym, app(Tt, e)),
                                     app(pk.tran, apps(st.p, u, app(Ts, e)))))
            return _lam(["c"], body)
        eR = pk.rel.get(f.rel)
        if eR is None:
            raise EvalError(f"no relation witness for {f.rel}")
        eqs = [app(term_witness(S, a, x), e) for a in f.args]
        return _lam(["c"], app(eR, chain(eqs + [u])))
    if isinstance(f, And):
        sa, sb = subst_witness(S, f.left, x), subst_witness(S, f.right, x)
        return _lam(["c"], apps(st.p, app(sa, apps(st.p, e, app(st.p0, u))),
                                app(sb, apps(st.p, e, app(st.p1, u)))))
    if isinstance(f, Or):
        sa, sb = subst_witness(S, f.left, x), subst_witness(S, f.right, x)
        L = _lam(["e", "b"], apps(st.p, st.k, app(sa, apps(st.p, V("e"), V("b")))))
        R = _lam(["e", "b"], apps(st.p, st.kbar, app(sb, apps(st.p, V("e"), V("b")))))
        return _lam(["c"], apps(app(st.p0, u), app(L, e), app(R, e), app(st.p1, u)))
    if isinstance(f, Imp):
        sa, sb = subst_witness(S, f.left, x), subst_witness(S, f.right, x)
        back = app(sa, apps(st.p, app(pk.sym, e), V("v")))
        return _lam(["c", "v"], app(sb, apps(st.p, e, app(u, back))))
    if isinstance(f, Forall):
        sa = subst_witness(S, f.body, x)
        return _lam(["c", "q"], app(sa, apps(st.p, e, app(u, V("q")))))
    if isinstance(f, Exists):
        sa = subst_witness(S, f.body, x)
        return _lam(["c"], apps(st.p, app(st.p0, u), app(sa, apps(st.p, e, app(st.p1, u)))))
    raise EvalError("the plain substitution witness takes non-modal formulas")


def modal_subst_witness(S: Structure, f: Formula, x: str) -> Term:
    """Realizer of ||b=b'||_mu(D) & ||f(b)||_mu(D) ~> ||f(b')||_mu(D), uniform in D."""
    pk = S.pack
    d1, d2, d7rl = W("d1"), W("d2"), W("d7.rl")
    c, w = V("c"), V("w")
    E, U = app(st.p0, c), app(st.p1, c)
    if x not in free_vars(f) or isinstance(f, Bot):
        return st.p1
    if isinstance(f, Atom):
        return _lam(["c"], apps(d1, subst_witness(S, f, x), app(d7rl, c)))
    if isinstance(f, And):
        sa, sb = modal_subst_witness(S, f.left, x), modal_subst_witness(S, f.right, x)
        return _lam(["c"], apps(st.p, app(sa, apps(st.p, E, app(st.p0, U))),
                                app(sb, apps(st.p, E, app(st.p1, U)))))
    if isinstance(f, Or):
        sa, sb = modal_subst_witness(S, f.left, x), modal_subst_witness(S, f.right, x)
        we = app(d2, app(st.p0, w))
        L = _lam(["e", "b"], apps(st.p, st.k, app(sa, apps(st.p, V("e"), V("b")))))
        R = _lam(["e", "b"], apps(st.p, st.kbar, app(sb, apps(st.p, V("e"), V("b")))))
        t = app(st.p1, w)
        inner = _lam(["w"], apps(app(st.p0, t), app(L, we), app(R, we), app(st.p1, t)))
        return _lam(["c"], apps(d1, inner, app(d7rl, c)))
    if isinstance(f, Imp):
        sa, sb = modal_subst_witness(S, f.left, x), modal_subst_witness(S, f.right, x)
        esym = app(d1, pk.sym)
        back = app(sa, apps(st.p, app(esym, E), V("v")))
        return _lam(["c", "v"], app(sb, apps(st.p, E, app(U, back))))
    if isinstance(f, Forall):
        sa = modal_subst_witness(S, f.body, x)
        return _lam(["c", "q"], app(sa, apps(st.p, E, app(U, V("q")))))
    if isinstance(f, Exists):
        sa = modal_subst_witness(S, f.body, x)
        t = app(st.p1, w)
        inner = _lam(["w"], apps(st.p, app(st.p0, t),
                                 app(sa, apps(st.p, app(d2, app(st.p0, w)), app(st.p1, t)))))
        return _lam(["c"], apps(d1, inner, app(d7rl, c)))
    if isinstance(f, Box):
        sa = modal_subst_witness(S, f.body, x)
        inner = _lam(["w"], app(sa, apps(st.p, app(d2, app(st.p0, w)), app(st.p1, w))))
        return _lam(["c"], apps(d1, inner, app(d7rl, c)))
    raise EvalError(f"unexpected node {f!r}")


def simultaneous_witness(steps: Sequence[Term]) -> Term:
    """From one-variable witnesses s_1..s_n, a realizer on the chain eq_1 & ... & eq_n & phi."""
    n = len(steps)
    if n == 0:
        return st.i
    c = V("c")
    acc = _nth(c, n, n + 1)
    for i, s in enumerate(steps):
        acc = app(s, apps(st.p, _nth(c, i, n + 1), acc))
    return _lam(["c"], acc)


def check_substitution(S: Structure, h: Heyting, f: Formula, x: str,
                       probes: Optional[ProbeFamily] = None, pairs: Optional[Sequence] = None,
                       base: Optional[Env] = None, modal: bool = True) -> Verdict:
    """The assembled witness on every pair (b, b') of domain elements (or the given pairs)."""
    val = S.valuation(probes)
    base = dict(base or {})
    others = [v for v in free_vars_ordered(f) if v != x and v not in base]
    pairs = list(pairs) if pairs is not None else list(itertools.product(S.domain(), repeat=2))
    envs = val.assignments(others)
    a, b = V("_sa"), V("_sb")
    from .syntax import substitute
    fa = substitute(f, x, Var("_sa"))
    fb = substitute(f, x, Var("_sb"))
    eqf = Atom("=", (Var("_sa"), Var("_sb")))
    vs: list[Verdict] = []
    if not modal:
        s = subst_witness(S, f, x)
        for (p, q), rest in itertools.product(pairs, envs):
            env = {**base, **dict(zip(others, rest)), "_sa": p, "_sb": q}
            lhs = H.meet(val.plain(eqf, env), val.plain(fa, env))
            vs.append(h.check_reduction(s, lhs, val.plain(fb, env)))
        return combine(vs)
    s = modal_subst_witness(S, f, x)
    for (p, q), rest in itertools.product(pairs, envs):
        env = {**base, **dict(zip(others, rest)), "_sa": p, "_sb": q}
        for D in val.probes:
            lhs = H.meet(val.modal(eqf, env, D), val.modal(fa, env, D))
            vs.append(h.check_reduction(s, lhs, val.modal(fb, env, D)))
    return combine(vs)


# ---------------------------------------------------------------- witness pack validation

def validate_pack(S: Structure, h: Heyting, limit: int = 4) -> dict[str, Verdict]:
    """Each clause of the uniform-structure definition on tuples from the first ``limit`` elements."""
    dom = S.domain()[:limit]
    pk = S.pack
    out: dict[str, Verdict] = {}
    out["ref1"] = combine(h.check_reduction(pk.ref1, S.equality(a, a), TOP) for a in dom)
    out["ref2"] = combine(h.check_reduction(pk.ref2, TOP, S.equality(a, a)) for a in dom)
    out["sym"] = combine(h.check_reduction(pk.sym, S.equality(a, b), S.equality(b, a))
                         for a, b in itertools.product(dom, repeat=2))
    out["tran"] = combine(h.check_reduction(pk.tran, H.meet(S.equality(a, b), S.equality(b, c)),
                                            S.equality(a, c))
                          for a, b, c in itertools.product(dom, repeat=3))
    for name, sorts in S.signature.relations.items():
        n = len(sorts)
        small = dom[: max(2, limit - n)]
        vs = []
        for xs in itertools.product(small, repeat=n):
            for ys in itertools.product(small, repeat=n):
                lhs = chain_tv([S.equality(a, b) for a, b in zip(xs, ys)] + [S.relations[name](*xs)])
                vs.append(h.check_reduction(pk.rel[name], lhs, S.relations[name](*ys)))
        out[f"rel.{name}"] = combine(vs)
    for name, (sorts, _) in S.signature.functions.items():
        n = len(sorts)
        if n == 0:
            continue
        small = dom[: max(2, limit - n)]
        fn = S.functions[name]
        vs = []
        for xs in itertools.product(small, repeat=n):
            for ys in itertools.product(small, repeat=n):
                lhs = chain_tv([S.equality(a, b) for a, b in zip(xs, ys)])
                vs.append(h.check_reduction(pk.fn[name], lhs, S.equality(fn(*xs), fn(*ys))))
        out[f"fn.{name}"] = combine(vs)
    return out


# ---------------------------------------------------------------- emptiness

def decide_empty(h: Heyting, X: TV) -> Optional[bool]:
    """True when X is provably empty, False when a member is at hand, None otherwise."""
    k = X.kind
    if k == "bot":
        return True
    if k in ("top", "explicit"):
        return False
    if k == "meet":
        a, b = decide_empty(h, X.parts[0]), decide_empty(h, X.parts[1])
        if a or b:
            return True
    elif k == "join":
        a, b = decide_empty(h, X.parts[0]), decide_empty(h, X.parts[1])
        if a and b:
            return True
        if a is False or b is False:
            return False
    elif k == "bigjoin":
        ds = [decide_empty(h, p) for p in X.parts]
        if all(ds):
            return True
        if any(d is False for d in ds):
            return False
    elif k == "bigmeet":
        if any(decide_empty(h, p) for p in X.parts):
            return True
    elif k == "imp":
        a, b = decide_empty(h, X.parts[0]), decide_empty(h, X.parts[1])
        if a is True or b is False:
            return False
        if a is False and b is True:
            return True
    return False if h.sample(X) else None


# ---------------------------------------------------------------- Goedel translation

def goedel_translate(f: Formula, simplify: bool = False) -> Formula:
    """Atomics fixed, conditionals and universals boxed.

    With ``simplify``, a universal whose body is a conditional with an atomic
    antecedent loses the box on that conditional.
    """
    if is_modal(f):
        raise EvalError("the Goedel translation takes non-modal formulas")
    return _gt(f, simplify)


def _gt(f: Formula, simplify: bool) -> Formula:
    if isinstance(f, (Atom, Bot)):
        return f
    if isinstance(f, And):
        return And(_gt(f.left, simplify), _gt(f.right, simplify))
    if isinstance(f, Or):
        return Or(_gt(f.left, simplify), _gt(f.right, simplify))
    if isinstance(f, Exists):
        return Exists(f.var, f.sort, _gt(f.body, simplify))
    if isinstance(f, Imp):
        return Box(Imp(_gt(f.left, simplify), _gt(f.right, simplify)))
    if isinstance(f, Forall):
        body = f.body
        if simplify and isinstance(body, Imp) and isinstance(body.left, Atom):
            return Box(Forall(f.var, f.sort, Imp(body.left, _gt(body.right, simplify))))
        return Box(Forall(f.var, f.sort, _gt(body, simplify)))
    raise EvalError(f"unexpected node {f!r}")


def goedel_witnesses(f: Formula) -> tuple[Term, Term]:
    """(fwd, bwd) with fwd : om_D ||f|| ~> ||f^box||_mu(D) and bwd the converse, uniform in D.

    The backward direction needs the probes to contain the plain values of
    every conditional's consequent and every universal's body.
    """
    if isinstance(f, (Atom, Bot)):
        return st.i, st.i
    if isinstance(f, And):
        fa, ga = goedel_witnesses(f.left)
        fb, gb = goedel_witnesses(f.right)
        fwd = compose(r"\c. p (fa (p0 (d7lr c))) (fb (p1 (d7lr c)))", fa=fa, fb=fb)
        bwd = compose(r"\c. d7rl (p (ga (p0 c)) (gb (p1 c)))", ga=ga, gb=gb)
        return fwd, bwd
    if isinstance(f, Or):
        fa, ga = goedel_witnesses(f.left)
        fb, gb = goedel_witnesses(f.right)
        e1, e2 = H.WITNESS_TERMS["e1"], H.WITNESS_TERMS["e2"]
        fwd = compose(r"d1 (\c. (p0 c) (\b. p k (fa (d2 b))) (\b. p kbar (fb (d2 b))) (p1 c))",
                      fa=fa, fb=fb)
        h = compose(r"\c. (p0 c) (\b. d1 e1 (ga b)) (\b. d1 e2 (gb b)) (p1 c)",
                    ga=ga, gb=gb, e1=e1, e2=e2)
        bwd = compose(r"\c. d3 (d1 h c)", h=h)
        return fwd, bwd
    if isinstance(f, Imp):
        fa, ga = goedel_witnesses(f.left)
        fb, gb = goedel_witnesses(f.right)
        cf, cb = M.conditional_witnesses()
        fwd = compose(r"\c. d1 (\u a. fb (u (ga a))) (cf c)", fb=fb, ga=ga, cf=cf)
        bwd = compose(r"\c. cb (d1 (\u a. gb (u (fa a))) c)", gb=gb, fa=fa, cb=cb)
        return fwd, bwd
    if isinstance(f, Forall):
        fa, ga = goedel_witnesses(f.body)
        fwd = compose(r"d1 (\u q. fa (d2 (u q)))", fa=fa)
        bwd = compose(r"d1 (\u q. d8 (ga (u q)))", ga=ga)
        return fwd, bwd
    if isinstance(f, Exists):
        fa, ga = goedel_witnesses(f.body)
        fwd = compose(r"d1 (\c. p (p0 c) (fa (d2 (p1 c))))", fa=fa)
        h = compose(r"\c. d1 I (d7rl (p (d2 (p0 c)) (ga (p1 c))))", ga=ga)
        bwd = compose(r"\c. d3 (d1 h c)", h=h)
        return fwd, bwd
    raise EvalError("the Goedel witnesses take non-modal formulas")


def probe_extras(val: Valuation, f: Formula, env: Env) -> list[TV]:
    """Plain values of the consequents and universal bodies below f, over all reachable envs."""
    out: list[TV] = []

    def walk(g: Formula, e: Env) -> None:
        if isinstance(g, (And, Or)):
            walk(g.left, e)
            walk(g.right, e)
        elif isinstance(g, Imp):
            out.append(val.plain(g.right, e))
            walk(g.left, e)
            walk(g.right, e)
        elif isinstance(g, (Forall, Exists)):
            for c in val.S.domain(g.sort):
                e2 = {**e, g.var: c}
                if isinstance(g, Forall):
                    out.append(val.plain(g.body, e2))
                walk(g.body, e2)

    walk(f, env)
    seen: list[TV] = []
    for x in out:
        if x not in seen:
            seen.append(x)
    return seen


@dataclass
class GoedelResult:
    formula: str
    translation: str
    verdict: Verdict
    fwd: Verdict
    bwd: Verdict
    agree: int
    disagree: int
    unresolved: int
    cells: int
    probes: list

    def as_dict(self) -> dict:
        return {"formula": self.formula, "translation": self.translation,
                "verdict": self.verdict.kind, "fwd": self.fwd.as_dict(), "bwd": self.bwd.as_dict(),
                "agree": self.agree, "disagree": self.disagree, "unresolved": self.unresolved,
                "cells": self.cells, "probes": self.probes}


def goedel_equivalence_check(S: Structure, f: Formula, probes: ProbeFamily, h: Heyting,
                             env: Optional[Env] = None) -> GoedelResult:
    """mu(||f||) against ||f^box||_mu: inhabitation agreement on every cell plus both witnesses."""
    base = dict(env or {})
    vars = [v for v in free_vars_ordered(f) if v not in base]
    val0 = S.valuation(probes)
    pts = val0.assignments(vars)
    extra: list[TV] = []
    for x in pts:
        for v in probe_extras(val0, f, {**base, **dict(zip(vars, x))}):
            if v not in extra and v not in probes:
                extra.append(v)
    probes = probes.extend(extra)
    val = S.valuation(probes)
    g = goedel_translate(f)
    left = M.mu(val.plain_map(f, vars, base, pts), "mu(" + show(f) + ")")
    right = val.family(g, vars, base, pts)
    fw, bw = goedel_witnesses(f)
    v_f = M.check_modal(h, fw, left, right, probes)
    v_b = M.check_modal(h, bw, right, left, probes)
    agree = disagree = unresolved = 0
    for x, D in M.cells(left, probes):
        a, b = decide_empty(h, left.at(x, D)), decide_empty(h, right.at(x, D))
        if a is not None and a == b:
            agree += 1
        elif a is None or b is None:
            unresolved += 1
        else:
            disagree += 1
    parts = [v_f, v_b]
    if disagree:
        parts.append(Verdict("Refuted", None, f"{disagree} cells disagree on inhabitation"))
    return GoedelResult(show(f), show(g), combine(parts), v_f, v_b, agree, disagree, unresolved,
                        len(left.points) * len(probes), probes.describe())


def simplification_witnesses(body: Formula) -> tuple[Term, Term]:
    """box forall x box(R -> A) against box forall x (R -> A), for A with certificate."""
    c = modal_cert(body)
    fwd = compose(r"d1 (\u q. c (d1 I (u q)))", c=c)
    bwd = compose(r"d1 (\u q. d2 (u q))")
    return fwd, bwd


# ---------------------------------------------------------------- change of basis

def change_of_basis(S: Structure, f: Formula, name: str, vars: Optional[Sequence[str]] = None,
                    probes: Optional[ProbeFamily] = None) -> Structure:
    """Expand S by G(a) = intersection over the probes of ||f(a)||_mu(E)."""
    if name in S.signature.relations or name in S.signature.functions or name == "=":
        raise EvalError(f"symbol {name} already in the signature")
    vars = list(vars) if vars is not None else free_vars_ordered(f)
    if set(vars) != free_vars(f):
        raise EvalError("change of basis needs exactly the free variables of the formula")
    val = S.valuation(probes)
    memo: dict = {}

    def interp(*args: Any) -> TV:
        if args not in memo:
            env = dict(zip(vars, args))
            memo[args] = H.big_meet([val.modal(f, env, E) for E in val.probes])
        return memo[args]

    d2 = W("d2")
    n = len(vars)
    eG = st.i
    if n:
        # the plain equalities are lifted with d2 before the modal witness runs
        steps = [modal_subst_witness(S, f, x) for x in vars]
        c = V("c")
        lifted = [app(d2, _nth(c, i, n + 1)) for i in range(n)] + [_nth(c, n, n + 1)]
        eG = _lam(["c"], app(simultaneous_witness(steps), chain(lifted)))
    sorts = tuple(S.signature.default_sort for _ in vars)
    return S.expand(name, sorts, interp, eG, f"{name} := box-basis of {show(f)} ({M.BOX_CAVEAT})")


def change_of_basis_check(S: Structure, f: Formula, name: str, h: Heyting,
                          probes: Optional[ProbeFamily] = None) -> dict[str, Verdict]:
    """||G(a)||_mu against ||box f(a)||_mu (both directions are the identity) and e_G."""
    probes = probes or M.default_probes()
    vars = free_vars_ordered(f)
    S2 = change_of_basis(S, f, name, vars, probes)
    val = S.valuation(probes)
    val2 = S2.valuation(probes)
    g_atom = Atom(name, tuple(Var(v) for v in vars))
    lhs = val2.family(g_atom, vars)
    rhs = val.family(Box(f), vars)
    out = {"fwd": M.check_modal(h, st.i, lhs, rhs, probes),
           "bwd": M.check_modal(h, st.i, rhs, lhs, probes)}
    vs = []
    dom = S.domain()[:3]
    for xs in itertools.product(dom, repeat=len(vars)):
        for ys in itertools.product(dom, repeat=len(vars)):
            ante = chain_tv([S.equality(a, b) for a, b in zip(xs, ys)] + [S2.relations[name](*xs)])
            vs.append(h.check_reduction(S2.pack.rel[name], ante, S2.relations[name](*ys)))
    out["e_G"] = combine(vs)
    return out


# ---------------------------------------------------------------- quantifier taxonomy

@dataclass
class QuantifierClass:
    non_degenerate: bool
    uniform: bool
    classical: bool
    term_friendly: bool
    evidence: dict
    member: Optional[Term] = None           # some member of some Q(c)
    uniform_member: Optional[Term] = None   # a member of every Q(c)

    def as_dict(self) -> dict:
        return {"non_degenerate": self.non_degenerate, "uniform": self.uniform,
                "classical": self.classical, "term_friendly": self.term_friendly,
                "evidence": dict(self.evidence)}


def classify_quantifier(S: Structure, h: Heyting) -> QuantifierClass:
    dom = S.domain()
    qs = [S.quantifier(c) for c in dom]
    ev: dict[str, str] = {}
    member = None
    for c, q in zip(dom, qs):
        got = h.sample(q)
        if got:
            member = got[0]
            ev["non_degenerate"] = f"{to_sexpr(member, 60)} in Q({S.render(c)})"
            break
    else:
        ev["non_degenerate"] = "no sampled member of any Q(c)"
    uniform_member = None
    common = H.big_meet(qs)
    got = h.sample(common)
    if got:
        uniform_member = got[0]
        ev["uniform"] = f"{to_sexpr(uniform_member, 60)} in every Q(c) over the cutoff domain"
    else:
        ev["uniform"] = _disjoint_trace(S, h, dom, qs) or "no common member found"
    classical = all(H.canon(q) is TOP for q in qs)
    if classical:
        ev["classical"] = "Q(c) is Top for every c; i realizes both directions"
    else:
        trace = _disjoint_trace(S, h, dom, qs)
        ev["classical"] = (f"{trace}; any e realizing Top ~> Q(c) would put e.a in both"
                           if trace else "some Q(c) is not Top")
    friendly = True
    notes = []
    for name, (sorts, _) in S.signature.functions.items():
        et = S.q_terms.get(name)
        if et is None:
            friendly = False
            notes.append(f"{name}: no witness")
            continue
        n = len(sorts)
        vs = []
        for xs in itertools.product(dom[:4], repeat=n):
            ante = chain_tv([S.quantifier(a) for a in xs]) if n else TOP
            vs.append(h.check_reduction(et, ante, S.quantifier(S.functions[name](*xs))))
        v = combine(vs)
        if not v.confirmed:
            friendly = False
        notes.append(f"{name}: {v.kind}")
    ev["term_friendly"] = "; ".join(notes) if notes else "no function symbols"
    return QuantifierClass(member is not None, uniform_member is not None, classical, friendly,
                           ev, member, uniform_member)


def _disjoint_trace(S: Structure, h: Heyting, dom: Sequence, qs: Sequence[TV]) -> str:
    for i in range(len(qs)):
        for j in range(i + 1, len(qs)):
            a, b = qs[i], qs[j]
            if a.kind == "explicit" and b.kind == "explicit":
                if all(h.backend.equal(x, y) is Tri.OUT for x in a.elems for y in b.elems):
                    return (f"Q({S.render(dom[i])}) and Q({S.render(dom[j])}) are disjoint "
                            f"explicit sets")
    return ""


# ---------------------------------------------------------------- axiom harness

def _fresh_var(f: Formula, base: str = "y") -> str:
    names = free_vars(f) | {g.var for g in subformulas(f) if isinstance(g, (Forall, Exists))}
    if base not in names:
        return base
    i = 1
    while f"{base}{i}" in names:
        i += 1
    return f"{base}{i}"


def harness_witnesses(S: Structure, qc: QuantifierClass) -> dict[str, Term]:
    env = {"ref2": S.pack.ref2}
    out = {
        "vacuous.bwd": st.k,
        "distributivity": compose(r"\u v q. u q (v q)"),
        "permutation": compose(r"\e n m. e m n"),
        "instantiation": compose(r"\n e. e n"),
        "necid": compose(r"d2 (ref2 I)", **env),
        "duality.fwd": compose(r"\u c z. c (\x. (p1 x) (u (p0 x)) I)"),
    }
    if qc.member is not None:
        out["vacuous.fwd"] = compose(r"\e. e n", n=qc.member)
    if qc.uniform_member is not None:
        out["instantiation.free"] = compose(r"\e. e n", n=qc.uniform_member)
    return out


def cbf_witness(f: Formula) -> Term:
    """box forall x f ~> forall x box f."""
    cert = modal_cert(Forall("_x", None, Box(f)))
    return compose(r"\c. cf (d1 (\u q. d2 (u q)) c)", cf=cert)


def exists_box_witness() -> Term:
    """exists x box f ~> box exists x f."""
    inner = compose(r"\c. d1 (\w. d2 w) (d7rl (p (d2 (p0 c)) (p1 c)))")
    return compose(r"\c. d3 (d1 h c)", h=inner)


def duality_witnesses(f: Formula) -> tuple[Term, Term]:
    """forall y f against ~exists y ~f."""
    fwd = compose(r"\u c z. c (\x. (p1 x) (u (p0 x)) I)")
    bwd = compose(r"\v q. cf (\m. v (d2 (p q (\a z. m a))) I)", cf=modal_cert(f))
    return fwd, bwd


def axiom_harness(S: Structure, h: Heyting, probes: Optional[ProbeFamily] = None,
                  formulas: Sequence[Formula] = (), qc: Optional[QuantifierClass] = None,
                  var_name: str = "x") -> dict[str, Verdict]:
    """Validity checks of the quantified S4 axioms and rules on S.

    Each formula should have ``var_name`` free (and possibly further free
    variables, which are ranged over the domain).  The free-variable
    instantiation axiom is checked only when Q is uniform.
    """
    probes = probes or M.default_probes()
    qc = qc or classify_quantifier(S, h)
    atoms: list[Formula] = []
    for g in (g for f in formulas for g in subformulas(f) if isinstance(g, Atom)):
        if g not in atoms:
            atoms.append(g)
    probes = _atom_probes(S, atoms, probes)
    val = S.valuation(probes)
    out: dict[str, Verdict] = {}
    x = var_name
    wit = harness_witnesses(S, qc)

    def fam(g: Formula) -> ModalTruth:
        vs = free_vars_ordered(g)
        return val.family(g, vs)

    def reduction(e: Term, a: Formula, b: Formula) -> Verdict:
        vs = free_vars_ordered(And(a, b))
        return M.check_modal(h, e, val.family(a, vs), val.family(b, vs), probes)

    def valid(e: Term, g: Formula) -> Verdict:
        return M.check_valid(h, e, fam(g), probes)

    def add(name: str, v: Verdict) -> None:
        out[name] = combine([out[name], v]) if name in out else v

    eqx = Atom("=", (Var(x), Var(x)))
    add("necid", valid(wit["necid"], eqx))
    add("necid.box", valid(compose(r"d2 w", w=wit["necid"]), Box(eqx)))
    add("generalization", valid(app(st.k, wit["necid"]), Forall(x, None, eqx)))
    add("modus-ponens", valid(app(compose(r"\a. p a a"), wit["necid"]), And(eqx, eqx)))
    top_f = Imp(BOT_F, BOT_F)
    add("box-top", reduction(M.s4_witnesses(modal_cert(top_f))["T"], Box(top_f), top_f))
    add("box-top", reduction(app(st.k, compose(r"d2 I")), top_f, Box(top_f)))
    for f in formulas:
        fv = free_vars(f)
        y = _fresh_var(f)
        if "vacuous.fwd" in wit:
            add("vacuous.fwd", reduction(wit["vacuous.fwd"], Forall(y, None, f), f))
        add("vacuous.bwd", reduction(wit["vacuous.bwd"], f, Forall(y, None, f)))
        if x in fv:
            g = next((o for o in formulas if o is not f and x in free_vars(o)), f)
            add("distributivity", valid(wit["distributivity"],
                                        Imp(Forall(x, None, Imp(f, g)),
                                            Imp(Forall(x, None, f), Forall(x, None, g)))))
            add("instantiation", valid(wit["instantiation"],
                                       Forall(y, None, Imp(Forall(x, None, f), _rename(f, x, y)))))
            fy = _rename(f, x, y)
            both = And(f, fy)
            add("permutation", reduction(wit["permutation"], Forall(x, None, Forall(y, None, both)),
                                         Forall(y, None, Forall(x, None, both))))
            add("subs", check_substitution(S, h, f, x, probes, pairs=_pairs(S)))
            add("cbf", reduction(cbf_witness(f), Box(Forall(x, None, f)), Forall(x, None, Box(f))))
            add("exists-box", reduction(exists_box_witness(), Exists(x, None, Box(f)),
                                        Box(Exists(x, None, f))))
            dfw, dbw = duality_witnesses(f)
            nf = Imp(Exists(x, None, Imp(f, BOT_F)), BOT_F)
            add("duality.fwd", reduction(dfw, Forall(x, None, f), nf))
            add("duality.bwd", reduction(dbw, nf, Forall(x, None, f)))
            if qc.uniform and "instantiation.free" in wit:
                add("instantiation.free", reduction(wit["instantiation.free"],
                                                    Forall(x, None, f), _rename(f, x, y)))
            if qc.classical:
                add("classical.forall", _classical_check(S, h, val, f, x, probes, qc))
    if atoms:
        out["atomic-stability"] = atomic_stability_check(S, h, atoms, probes)
    return out


def _atom_probes(S: Structure, atoms: Sequence[Formula], probes: ProbeFamily) -> ProbeFamily:
    val = S.valuation(probes)
    extra: list[TV] = []
    for g in atoms:
        vars = free_vars_ordered(g)
        for pt in val.assignments(vars):
            v = val.plain(g, dict(zip(vars, pt)))
            if v not in extra:
                extra.append(v)
    return probes.extend(extra)


def atomic_stability_check(S: Structure, h: Heyting, atoms: Sequence[Formula],
                           probes: Optional[ProbeFamily] = None) -> Verdict:
    """A <-> box A for each atom, by d1 d2 and d1 d8, over every assignment and probe."""
    probes = _atom_probes(S, atoms, probes or M.default_probes())
    val = S.valuation(probes)
    fwd, bwd = compose(r"d1 d2"), compose(r"d1 d8")
    vs = []
    for g in atoms:
        vars = free_vars_ordered(g)
        a, b = val.family(g, vars), val.family(Box(g), vars)
        vs.append(M.check_modal(h, fwd, a, b, probes))
        vs.append(M.check_modal(h, bwd, b, a, probes))
    return combine(vs)


BOT_F = Bot()


def _rename(f: Formula, x: str, y: str) -> Formula:
    from .syntax import substitute
    return substitute(f, x, Var(y))


def _pairs(S: Structure, limit: int = 4) -> list:
    dom = S.domain()[:limit]
    return list(itertools.product(dom, repeat=2))


def _classical_check(S: Structure, h: Heyting, val: Valuation, f: Formula, x: str,
                     probes: ProbeFamily, qc: QuantifierClass) -> Verdict:
    """With Q = Top, ||forall x f||_mu(D) against the bare intersection of ||f(c)||_mu(D)."""
    others = [v for v in free_vars_ordered(f) if v != x]
    fwd = compose(r"\e. e n", n=qc.uniform_member or st.i)
    vs = []
    for pt in val.assignments(others):
        env = dict(zip(others, pt))
        for D in probes:
            lhs = val.modal(Forall(x, None, f), env, D)
            rhs = H.big_meet([val.modal(f, {**env, x: c}, D) for c in S.domain()])
            vs.append(h.check_reduction(fwd, lhs, rhs))
            vs.append(h.check_reduction(st.k, rhs, lhs))
    return combine(vs)


def sentence_s5(S: Structure, h: Heyting, f: Formula, probes: Optional[ProbeFamily] = None
                ) -> Verdict:
    """For a sentence, the singleton-domain S5 witness for f => box dia f."""
    if free_vars(f):
        raise EvalError("sentence_s5 takes sentences")
    val = S.valuation(probes)
    _, verdict = M.singleton_s5_witness(h, val.truth(f), val.probes)
    return verdict
