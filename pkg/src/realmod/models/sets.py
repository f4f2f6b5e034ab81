"""The McCarty hierarchy over the term model, truncated to finite rank.

A ``SetElem`` is a finite set of (label, child) entries; elements are
interned, so structurally equal sets are the same object.  Membership and
equality take truth values recursively:

    ||a in b|| = {p e0 e1 : <e0, c> in b and e1 in ||a = c||}
    ||a = b||  = {e : for <n, c> in a, e n in ||c in b||} & (the same from b)

The quantifier is classical (Q = Top), and the quantifiers range over a
configured finite domain closed under children.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from .. import heyting as H
from .. import modal as M
from ..heyting import BOT, TOP, TV, Heyting, Verdict, combine
from ..kernel import STANDARD, Tri, fixpoint, lam, numeral, numeral_value, std_env
from ..semantics import (Structure, WitnessPack, atomic_stability_check, decide_empty, subst_witness,
                         validate_pack)
from ..syntax import Signature, parse_formula
from ..terms import K, Term, app, apps, enumerate_closed_terms, normalize, to_sexpr

st = STANDARD
ENV = std_env()


class RankError(ValueError):
    pass


class SetElem:
    """An interned hereditarily finite labelled set."""

    __slots__ = ("entries", "rank", "name", "__weakref__")
    _table: dict = {}

    def __new__(cls, entries: Iterable[tuple[Term, "SetElem"]] = (), name: str = "") -> "SetElem":
        key = tuple(sorted(set(entries), key=lambda e: (to_sexpr(e[0]), id(e[1]))))
        hit = cls._table.get(key)
        if hit is not None:
            if name and not hit.name:
                hit.name = name
            return hit
        self = object.__new__(cls)
        self.entries = key
        self.rank = 1 + max((c.rank for _, c in key), default=-1)
        self.name = name
        cls._table[key] = self
        return self

    def children(self) -> list["SetElem"]:
        out: list[SetElem] = []
        for _, c in self.entries:
            if c not in out:
                out.append(c)
        return out

    def closure(self) -> list["SetElem"]:
        """Self and every hereditary child, children first."""
        out: list[SetElem] = []

        def walk(x: SetElem) -> None:
            for c in x.children():
                walk(c)
            if x not in out:
                out.append(x)

        walk(self)
        return out

    def show(self) -> str:
        if self.name:
            return self.name
        inner = ", ".join(f"<{_label(e)}, {c.show()}>" for e, c in self.entries)
        return "{" + inner + "}"

    def to_data(self) -> list:
        return [[to_sexpr(e), c.to_data()] for e, c in self.entries]

    __repr__ = show


def _label(t: Term) -> str:
    n = numeral_value(t, 16)
    return f"{n}~" if n is not None else to_sexpr(t, 40)


EMPTY = SetElem((), "0")


def ordinal(n: int) -> SetElem:
    """The numeral n-bar = {<m~, m-bar> : m < n}."""
    return SetElem(((numeral(m), ordinal(m)) for m in range(n)), f"{n}")


def omega_bar(cutoff: int) -> SetElem:
    """omega-bar truncated to its first ``cutoff`` entries."""
    return SetElem(ordinal(cutoff).entries, f"omega[{cutoff}]")


def chi(X: Iterable[int], n: int) -> Term:
    return st.k if n in set(X) else st.kbar


def hat(X: Iterable[int], cutoff: int) -> SetElem:
    """X-hat = {<p n~ chi_X(n), n-bar> : n < cutoff}."""
    X = frozenset(X)
    entries = []
    for n in range(cutoff):
        label, _ = normalize(apps(st.p, numeral(n), chi(X, n)), 10_000)
        entries.append((label, ordinal(n)))
    return SetElem(entries, "hat{" + ",".join(map(str, sorted(X))) + f"}}[{cutoff}]")


# ---------------------------------------------------------------- special witnesses

J = fixpoint(lam(r"\j n. p n (p j j)", ENV))
I0 = normalize(apps(st.p, J, J), 10_000)[0]
RHO = app(K, I0)
SIGMA = lam(r"\c. p (p1 c) (p0 c)", ENV)
TAU = fixpoint(lam(
    r"\t c. p (\n. p (p0 ((p0 (p1 c)) (p0 ((p0 (p0 c)) n))))"
    r" (t (p (p1 ((p0 (p0 c)) n)) (p1 ((p0 (p1 c)) (p0 ((p0 (p0 c)) n)))))))"
    r" (\n. p (p0 ((p1 (p0 c)) (p0 ((p1 (p1 c)) n))))"
    r" (t (p (p1 ((p1 (p1 c)) n)) (p1 ((p1 (p0 c)) (p0 ((p1 (p1 c)) n)))))))", ENV))
IOTA = lam(r"\c. p (p0 ((p0 (p0 (p1 c))) (p0 (p1 (p1 c)))))"
           r" (tau (p (tau (p (sigma (p0 c)) (p1 (p1 (p1 c))))) (p1 ((p0 (p0 (p1 c))) (p0 (p1 (p1 c)))))))",
           std_env(tau=TAU, sigma=SIGMA))


def set_witness_pack() -> WitnessPack:
    return WitnessPack(ref1=st.i, ref2=RHO, sym=SIGMA, tran=TAU, rel={"in": IOTA})


# ---------------------------------------------------------------- valuation

def select_numeral(ws: Sequence[Term]) -> Term:
    """q |-> ws[i] for q the i-th numeral."""
    out = app(K, ws[-1])
    for w in reversed(ws[:-1]):
        out = lam(r"\q. (p0 q) w (r (p1 q))", std_env(w=w, r=out))
    return out


class SetModel:
    """Memoized truth values of membership and equality, with witness builders."""

    def __init__(self, bound: int = 4):
        self.bound = bound
        self._mem: dict = {}
        self._eq: dict = {}
        self._origin: dict = {}
        self._wit: dict = {}

    def _check(self, *xs: SetElem) -> None:
        for x in xs:
            if x.rank > self.bound:
                raise RankError(f"{x.show()} has rank {x.rank} above the bound {self.bound}")

    def mem(self, a: SetElem, b: SetElem) -> TV:
        key = (a, b)
        hit = self._mem.get(key)
        if hit is None:
            self._check(a, b)
            parts = [H.meet(H.explicit([e], _label(e)), self.eq(a, c)) for e, c in b.entries]
            hit = H.big_join(parts) if parts else BOT
            self._mem[key] = hit
            self._origin.setdefault(hit, ("mem", a, b))
        return hit

    def eq(self, a: SetElem, b: SetElem) -> TV:
        key = (a, b)
        hit = self._eq.get(key)
        if hit is None:
            self._check(a, b)
            left = [H.imp(H.explicit([n], _label(n)), self.mem(c, b)) for n, c in a.entries]
            right = [H.imp(H.explicit([n], _label(n)), self.mem(c, a)) for n, c in b.entries]
            hit = H.meet(H.big_meet(left) if left else TOP, H.big_meet(right) if right else TOP)
            self._eq[key] = hit
            self._origin.setdefault(hit, ("eq", a, b))
        return hit

    # -- witnesses

    def eq_witness(self, a: SetElem, b: SetElem) -> Optional[Term]:
        if a is b:
            return I0
        key = ("eq", a, b)
        if key in self._wit:
            return self._wit[key]
        self._wit[key] = None                 # blocks cycles
        e0 = _dispatch([(n, self.mem_witness(c, b)) for n, c in a.entries])
        e1 = _dispatch([(n, self.mem_witness(c, a)) for n, c in b.entries])
        out = None if e0 is None or e1 is None else normalize(apps(st.p, e0, e1), 100_000)[0]
        self._wit[key] = out
        return out

    def mem_parts(self, a: SetElem, b: SetElem) -> Optional[tuple[Term, Term]]:
        """(e0, e1) with <e0, c> in b and e1 in ||a = c||."""
        key = ("mem", a, b)
        if key in self._wit:
            return self._wit[key]
        out = None
        for e, c in b.entries:
            w = self.eq_witness(a, c)
            if w is not None:
                out = (e, w)
                break
        self._wit[key] = out
        return out

    def mem_witness(self, a: SetElem, b: SetElem) -> Optional[Term]:
        parts = self.mem_parts(a, b)
        return None if parts is None else apps(st.p, *parts)

    def subset_witness(self, c: SetElem, a: SetElem) -> Optional[Term]:
        """A member of ||forall z (z in c -> z in a)||, relabelling entry by entry."""
        pairs = []
        for e0, d in c.entries:
            parts = self.mem_parts(d, a)
            if parts is None:
                return None
            label, w = parts
            pairs.append((e0, lam(r"\e. p l (tau (p e w))", std_env(l=label, w=w, tau=TAU))))
        sel = _dispatch(pairs)
        if sel is None:
            return None
        return lam(r"\q x. s (p0 x) (p1 x)", std_env(s=sel))

    def seeder(self, X: TV) -> list[Term]:
        origin = self._origin.get(X)
        if origin is None:
            return []
        kind, a, b = origin
        w = self.eq_witness(a, b) if kind == "eq" else self.mem_witness(a, b)
        return [] if w is None else [w]


def _dispatch(pairs: Sequence[tuple[Term, Optional[Term]]]) -> Optional[Term]:
    """A term sending each label to its witness, when the labels allow it."""
    if not pairs:
        return st.i
    if any(w is None for _, w in pairs):
        return None
    table: dict = {}
    for label, w in pairs:
        n = numeral_value(label, 64)
        if n is None:
            head = _head_numeral(label)
            if head is None:
                break
            n = ("head", head)
        if table.get(n, w) != w:
            return None
        table[n] = w
    else:
        if all(isinstance(n, int) for n in table):
            top = max(table)
            default = next(iter(table.values()))
            return select_numeral([table.get(i, default) for i in range(top + 1)])
        if all(isinstance(n, tuple) for n in table):
            top = max(h for _, h in table)
            default = next(iter(table.values()))
            sel = select_numeral([table.get(("head", i), default) for i in range(top + 1)])
            return lam(r"\q. s (p0 q)", std_env(s=sel))
    ws = {w for _, w in pairs}
    return app(K, pairs[0][1]) if len(ws) == 1 else None


def _head_numeral(t: Term) -> Optional[int]:
    r, _ = normalize(app(st.p0, t), 10_000)
    return None if r is None else numeral_value(r, 64)


# ---------------------------------------------------------------- the structure

SET_SIGNATURE = Signature(("Set",), {}, {"in": ("Set", "Set")}, literal_sort="Set")


def default_domain(rank: int = 3) -> tuple[SetElem, ...]:
    """Numerals up to ``rank`` with a few intensional variants, closed under children."""
    extra = [
        SetElem([(numeral(1), EMPTY)], "{<1~,0>}"),
        SetElem([(numeral(0), ordinal(1))], "{<0~,1>}"),
        SetElem([(numeral(0), EMPTY), (numeral(1), EMPTY)], "{<0~,0>,<1~,0>}"),
    ]
    out: list[SetElem] = []
    for x in [ordinal(n) for n in range(rank + 1)] + [x for x in extra if x.rank <= rank]:
        for y in x.closure():
            if y not in out:
                out.append(y)
    return tuple(out)


def set_structure(domain: Optional[Sequence[SetElem]] = None, bound: int = 4,
                  model: Optional[SetModel] = None) -> Structure:
    model = model or SetModel(bound)
    dom = tuple(domain) if domain is not None else default_domain(min(bound, 3))
    for x in dom:
        for c in x.children():
            if c not in dom:
                raise ValueError(f"domain is not closed under children: {c.show()}")
    S = Structure(
        name=f"V[rank<={max(x.rank for x in dom)}]", signature=SET_SIGNATURE, domains={"Set": dom},
        functions={}, relations={"in": model.mem}, equality=model.eq, quantifier=lambda c: TOP,
        pack=set_witness_pack(), literal=lambda s: ordinal(int(s)), q_terms={},
        cutoff=len(dom), render=lambda x: x.show(),
        notes=(f"finite rank bound {bound}", "quantifiers range over a finite domain"),
    )
    S.model = model            # type: ignore[attr-defined]
    return S


def attach(h: Heyting, S: Structure) -> Heyting:
    h.add_seeder(S.model.seeder)        # type: ignore[attr-defined]
    return h


# ---------------------------------------------------------------- checks

@dataclass
class TableResult:
    cutoff: int
    rows: list
    mismatches: list
    undecided: list

    @property
    def exact(self) -> bool:
        return not self.mismatches and not self.undecided

    def verdict(self) -> Verdict:
        n = len(self.rows)
        if self.mismatches:
            return Verdict("Refuted", None, f"cells {self.mismatches[:4]} disagree", n, 0)
        if self.undecided:
            return Verdict("Inconclusive", None, f"cells {self.undecided[:4]} undecided", n, 0)
        return Verdict("Confirmed", None, "", n, n)


def _inhabited(h: Heyting, X: TV, w: Optional[Term]) -> Optional[bool]:
    if w is not None and h.mem(X, h.nf(w) or w) is Tri.IN:
        return True
    if decide_empty(h, X) is True:
        return False
    return None


def numeral_table(h: Heyting, cutoff: int = 6) -> TableResult:
    """n < m iff ||n in m|| is inhabited, n = m iff ||n = m|| is; each cell proved either way."""
    model = SetModel(bound=max(cutoff, 1))
    rows, bad, open_ = [], [], []
    for n, m in itertools.product(range(cutoff), repeat=2):
        a, b = ordinal(n), ordinal(m)
        mem = _inhabited(h, model.mem(a, b), model.mem_witness(a, b))
        eq = _inhabited(h, model.eq(a, b), model.eq_witness(a, b))
        rows.append({"n": n, "m": m, "mem": mem, "eq": eq})
        if mem is None or eq is None:
            open_.append((n, m))
        elif mem != (n < m) or eq != (n == m):
            bad.append((n, m))
    return TableResult(cutoff, rows, bad, open_)


def rank_invariant(h: Heyting, model: SetModel, dom: Sequence[SetElem]) -> Verdict:
    """A c with ||c in b|| inhabited has rank below b."""
    bad = []
    for b, c in itertools.product(dom, repeat=2):
        if _inhabited(h, model.mem(c, b), model.mem_witness(c, b)) and c.rank >= b.rank:
            bad.append((c.show(), b.show()))
    if bad:
        return Verdict("Refuted", None, f"rank bookkeeping fails at {bad[:3]}")
    return Verdict("Confirmed", None, "", len(dom) ** 2, len(dom) ** 2)


def pack_checks(h: Heyting, S: Structure) -> dict[str, Verdict]:
    """rho, sigma, tau and iota over the whole domain."""
    dom = S.domain()
    m: SetModel = S.model          # type: ignore[attr-defined]
    out: dict[str, Verdict] = {}
    out["rho"] = combine(h.check_reduction(RHO, TOP, m.eq(a, a)) for a in dom)
    out["sigma"] = combine(h.check_reduction(SIGMA, m.eq(a, b), m.eq(b, a))
                           for a, b in itertools.product(dom, repeat=2))
    out["tau"] = combine(h.check_reduction(TAU, H.meet(m.eq(a, b), m.eq(b, c)), m.eq(a, c))
                         for a, b, c in itertools.product(dom, repeat=3))
    vs = []
    for a, a2, b, b2 in itertools.product(dom, repeat=4):
        ante = H.meet(m.eq(a, a2), H.meet(m.eq(b, b2), m.mem(a, b)))
        if decide_empty(h, ante):
            continue
        vs.append(h.check_reduction(IOTA, ante, m.mem(a2, b2)))
    out["iota"] = combine(vs)
    return out


def _fm(S: Structure, text: str):
    return parse_formula(text, S.signature)


def _check_on(h: Heyting, e: Term, X: TV, Y: TV, samples: Sequence[Optional[Term]]) -> Verdict:
    """e : X ~> Y on the given candidates that are members of X, then on generic samples."""
    good = []
    for s in samples:
        if s is None:
            continue
        s = h.nf(s)
        if s is not None and h.mem(X, s) is not Tri.OUT and s not in good:
            good.append(s)
    good += [x for x in h.sample(X) if x not in good]
    if not good:
        if decide_empty(h, X):
            return Verdict("Confirmed", None, "antecedent empty", 0, 0)
        return Verdict("Inconclusive", None, "no antecedent samples")
    return h.check_reduction(e, X, Y, samples=good)


def axiom_witness_checks(h: Heyting, S: Structure) -> dict[str, Verdict]:
    """The set-theoretic axiom witnesses on instances from the domain."""
    m: SetModel = S.model          # type: ignore[attr-defined]
    val = S.valuation()
    dom = S.domain()
    out: dict[str, Verdict] = {}
    z0 = numeral(0)

    # extensionality
    ext = _fm(S, "forall c. (c in a -> c in b) & (c in b -> c in a)")
    h_ext = lam(r"\u. p (\n. p0 (u i) (p n i0)) (\n. p1 (u i) (p n i0))", std_env(i0=I0))
    vs = []
    for a, b in itertools.product(dom, repeat=2):
        X = val.plain(ext, {"a": a, "b": b})
        w = m.eq_witness(a, b)
        cands = []
        if w is not None:
            e0 = lam(r"\x. iota (p i0 (p w x))", std_env(iota=IOTA, i0=I0, w=w))
            e1 = lam(r"\x. iota (p i0 (p (sigma w) x))", std_env(iota=IOTA, i0=I0, w=w, sigma=SIGMA))
            cands.append(app(K, apps(st.p, e0, e1)))
        vs.append(_check_on(h, h_ext, X, m.eq(a, b), cands))
    out["extensionality"] = combine(vs)

    # pairing
    h_pair = lam(r"\n. p (p z i0) (p z i0)", std_env(z=z0, i0=I0))
    vs = []
    for a, b in itertools.product(dom, repeat=2):
        c = SetElem([(z0, a), (z0, b)])
        vs.append(h.check_reduction(h_pair, TOP, H.meet(m.mem(a, c), m.mem(b, c))))
    out["pairing"] = combine(vs)

    f_lab = lam(r"\n. p n i0", std_env(i0=I0))

    # union: u = {<n, c> : n in ||exists x (c in x & x in a)||}, labels from the samples
    un = _fm(S, "exists x. c in x & x in a")
    vs = []
    for a in dom:
        if a.rank < 1:
            continue
        labelled = [(n, c) for c in dom for n in h.sample(val.plain(un, {"c": c, "a": a}))]
        u = SetElem(labelled)
        for c in dom:
            X = val.plain(un, {"c": c, "a": a})
            vs.append(_check_on(h, f_lab, X, m.mem(c, u), []))
    out["union"] = combine(vs)

    # power set: P(a) = {<n, c> : n in ||c sub a||}
    sub = _fm(S, "forall z. z in c -> z in a")
    vs = []
    for a in dom[:4]:
        labelled = []
        for c in dom:
            X = val.plain(sub, {"c": c, "a": a})
            labelled += [(n, c) for n in _members(h, X, [m.subset_witness(c, a)])]
        P = SetElem(labelled)
        for c in dom:
            X = val.plain(sub, {"c": c, "a": a})
            vs.append(_check_on(h, f_lab, X, m.mem(c, P), [m.subset_witness(c, a)]))
    out["power-set"] = combine(vs)

    # separation with phi(d) = exists y. y in d
    body = _fm(S, "x in a & (exists y. y in x)")
    s = subst_witness(S, body, "x")
    g = lam(r"\v. s (p (sigma (p1 v)) (p0 v))", std_env(s=s, sigma=SIGMA))
    f_sep = lam(r"\e. p e i0", std_env(i0=I0))
    vs = []
    for a in dom:
        labelled = [(e, d) for d in dom for e in h.sample(val.plain(body, {"x": d, "a": a}))]
        b = SetElem(labelled)
        if b.rank > m.bound:
            continue
        for c in dom:
            target = val.plain(body, {"x": c, "a": a})
            vs.append(_check_on(h, g, m.mem(c, b), target, []))
            vs.append(_check_on(h, f_sep, target, m.mem(c, b), []))
    out["separation"] = combine(vs)

    # infinity on the truncated omega-bar
    top = max(x.rank for x in dom)
    w = omega_bar(top + 2)
    vs = [h.check_reduction(app(K, apps(st.p, z0, I0)), TOP, SetModel(top + 3).mem(EMPTY, w))]
    k0 = lam(r"\x. iota (p (sigma (p1 x)) (p i0 (p0 x)))", std_env(iota=IOTA, sigma=SIGMA, i0=I0))
    e_inf = lam(r"\x. p I (p (k0 (p (p (p0 x) i0) (p1 x))) (p (p kbar (p0 x)) i0))",
                std_env(k0=k0, i0=I0))
    inf_body = _fm(S, "exists y. c in y & y in w")
    wide = SetModel(bound=top + 3)
    S_wide = set_structure(tuple(dict.fromkeys(tuple(dom) + tuple(w.closure()))), bound=top + 3,
                           model=wide)
    attach(h, S_wide)
    val_w = S_wide.valuation()
    for c in dom:
        X = wide.mem(c, w)
        vs.append(_check_on(h, e_inf, X, val_w.plain(inf_body, {"c": c, "w": w}), []))
    out["infinity"] = combine(vs)

    # induction on phi(x) = (x = x)
    ind = lam(r"\e m q. m q (\r x. e m r)")
    e_ind = fixpoint(ind)
    ante = val.plain(_fm(S, "forall x. (forall y. y in x -> y = y) -> x = x"), {})
    goal = val.plain(_fm(S, "forall x. x = x"), {})
    out["induction"] = _check_on(h, e_ind, ante, goal, [app(K, app(K, I0))])
    return out


def _members(h: Heyting, X: TV, extra: Sequence[Optional[Term]]) -> list[Term]:
    out = [t for t in (h.nf(x) for x in extra if x is not None)
           if t is not None and h.mem(X, t) is not Tri.OUT]
    return out + [x for x in h.sample(X) if x not in out]


# ---------------------------------------------------------------- negated atomic refuter

@dataclass
class NegRefutation:
    candidate: Term
    verdict: str
    side: Optional[int]
    trace: str

    def as_dict(self) -> dict:
        return {"candidate": to_sexpr(self.candidate), "verdict": self.verdict,
                "side": self.side, "trace": self.trace}


def negated_atomic_refute_one(h: Heyting, e: Term, X: Iterable[int] = (0, 2, 4), cutoff: int = 3,
                              fuel: Optional[int] = None) -> NegRefutation:
    """e i must lie in ||n-bar in X-hat|| for every n; find the n where it does not."""
    fuel = fuel or h.fuel
    model = SetModel(bound=cutoff + 1)
    xh = hat(X, cutoff)
    r, _ = normalize(app(e, st.i), fuel)
    if r is None:
        r, _ = normalize(app(e, st.i), 2 * fuel)
    if r is None:
        return NegRefutation(e, "Refuted", None, f"e i has no normal form at fuel {fuel} or {2 * fuel}")
    head = normalize(app(st.p0, app(st.p0, r)), fuel)[0]
    for n in range(cutoff):
        if h.mem(model.mem(ordinal(n), xh), r) is Tri.OUT:
            got = "undefined" if head is None else _label(head)
            return NegRefutation(e, "Refuted", n,
                                 f"p0 p0 (e i) = {got}, but members of ||{n} in X-hat|| carry {n}~")
    return NegRefutation(e, "Unrefuted", None, "e i lies in every sampled ||n in X-hat||")


def negated_atomic_refuter(h: Heyting, candidates: Sequence[Term], **kw) -> list[NegRefutation]:
    return [negated_atomic_refute_one(h, e, **kw) for e in candidates]


def hat_characterization(h: Heyting, X: Iterable[int] = (0, 2, 4), cutoff: int = 4) -> Verdict:
    """||n in X-hat|| = {p (p n~ chi) e : e in ||n = n||}: inhabited, and each member has that form."""
    model = SetModel(bound=cutoff + 1)
    xh = hat(X, cutoff)
    vs = []
    for n in range(cutoff):
        D = model.mem(ordinal(n), xh)
        label = normalize(apps(st.p, numeral(n), chi(X, n)), 10_000)[0]
        w = app(apps(st.p, label), I0)
        ok = h.mem(D, h.nf(w)) is Tri.IN
        for other in range(cutoff):
            if other == n:
                continue
            wrong = normalize(apps(st.p, numeral(other), chi(X, other)), 10_000)[0]
            if h.mem(D, h.nf(apps(st.p, wrong, I0))) is not Tri.OUT:
                ok = False
        vs.append(Verdict("Confirmed", None, "", 1, 1) if ok else
                  Verdict("Refuted", w, f"||{n} in X-hat|| misses its canonical member"))
    return combine(vs)


def atomic_stability(h: Heyting, S: Structure, probes=None) -> Verdict:
    return atomic_stability_check(S, h, [_fm(S, "x in y"), _fm(S, "x = y")], probes)


def candidates(count: int = 200) -> list[Term]:
    return enumerate_closed_terms(count)
