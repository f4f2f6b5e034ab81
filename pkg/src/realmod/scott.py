"""Scott's graph model over subsets of the naturals, with lazy membership.

Elements are terms over S, K and native set atoms.  A term whose head is a
partial application of S or K denotes the graph of the curried function it
computes, so ``<n, r>`` belongs to it exactly when ``r`` belongs to the term
applied to the finite set ``d_n``.  A stuck application with a native head is
evaluated by the literal rule ``m in a.b iff <n, m> in a and d_n within b``.

Membership is answered IN/OUT exactly whenever the relevant scan is finite
and UNKNOWN otherwise; equality scans codes below the truncation bound.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Optional

from .coding import finite_set, pair, set_code, subcodes, unpair
from .kernel import AppResult, Defined, FuelExhausted, STANDARD, Tri, default_fuel, numeral
from .terms import K, S, Term, app, digest, native, normalize, spine, to_sexpr, whnf

_INF = 1 << 60


@dataclass(frozen=True)
class FinSet:
    codes: frozenset


@dataclass(frozen=True)
class CofinSet:
    excluded: frozenset


@dataclass(frozen=True)
class AllSet:
    pass


@dataclass(frozen=True)
class TableFn:
    """Continuous extension of a monotone table from finite sets to finite sets."""
    table: tuple

    def value(self, inputs_in: Callable[[frozenset], bool]) -> set:
        out: set = set()
        for t, o in self.table:
            if inputs_in(t):
                out |= o
        return out


@dataclass(frozen=True)
class LitApp:
    fun: Term
    arg: Term


def _fmt(xs: Iterable[int]) -> str:
    return "{" + ",".join(str(x) for x in sorted(xs)) + "}"


def fin(xs: Iterable[int]) -> Term:
    codes = frozenset(int(x) for x in xs)
    if any(c < 0 for c in codes):
        raise ValueError("set members are naturals")
    return native(_fmt(codes), FinSet(codes))


def cofin(excluded: Iterable[int]) -> Term:
    ex = frozenset(int(x) for x in excluded)
    return native("coN" + _fmt(ex), CofinSet(ex))


EMPTY = fin(())
ALL = native("N", AllSet())


def pairs(ps: Iterable[tuple[int, int]]) -> Term:
    return fin(pair(n, m) for n, m in ps)


def fin_code(n: int) -> Term:
    """The finite set d_n as an element."""
    return fin(finite_set(n))


def scott_graph(table: Mapping[Iterable[int], Iterable[int]]) -> Term:
    """Graph of the continuous function given by a monotone finite table."""
    rows = sorted(((frozenset(k), frozenset(v)) for k, v in table.items()),
                  key=lambda r: (len(r[0]), sorted(r[0]), sorted(r[1])))
    for a, fa in rows:
        for b, fb in rows:
            if a <= b and not fa <= fb:
                raise ValueError(f"table is not monotone at {sorted(a)} <= {sorted(b)}")
    label = ";".join(_fmt(a) + ":" + _fmt(fa) for a, fa in rows)
    return native("graph[" + label + "]", TableFn(tuple(rows)))


def scott_apply(a: Term, b: Term) -> Term:
    """The literal application set, evaluated by scanning the graph of a."""
    return native(f"apply({digest(a)},{digest(b)})", LitApp(a, b))


def parse_graph_literal(text: str) -> Term:
    """``{}``, ``{1,4}``, ``N``, ``coN{2}`` or ``pairs[(0,5),(3,1)]``."""
    s = "".join(text.split())
    if s == "N":
        return ALL
    if s.startswith("coN{") and s.endswith("}"):
        return cofin(_ints(s[4:-1]))
    if s.startswith("{") and s.endswith("}"):
        return fin(_ints(s[1:-1]))
    if s.startswith("pairs[") and s.endswith("]"):
        body = s[6:-1]
        ps = []
        if body:
            for chunk in body.split("),"):
                chunk = chunk.strip("()")
                n, m = chunk.split(",")
                ps.append((int(n), int(m)))
        return pairs(ps)
    raise ValueError(f"not a set literal: {text!r}")


def _ints(body: str) -> list[int]:
    return [int(x) for x in body.split(",") if x != ""]


class ScottBackend:
    """Graph-model backend; ``trunc`` bounds every unbounded scan."""

    name = "scott"

    def __init__(self, fuel: Optional[int] = None, trunc: int = 1 << 10, max_depth: int = 1200):
        self.fuel = fuel or default_fuel()
        self.trunc = trunc
        self.max_depth = max_depth
        self.std = STANDARD
        self._cache: dict = {}
        self._active: dict = {}
        self._eq: dict = {}
        self._sup: dict = {}
        if sys.getrecursionlimit() < 20000:
            sys.setrecursionlimit(20000)

    # -- contract

    def apply(self, a: Term, b: Term, fuel: Optional[int] = None) -> AppResult:
        t = app(a, b)
        nf, steps = normalize(t, fuel or self.fuel)
        if nf is None:
            return Defined(t, steps)
        return Defined(nf, steps)

    def element(self, t: Term) -> Term:
        nf, _ = normalize(t, self.fuel)
        return t if nf is None else nf

    def equal(self, a: Term, b: Term) -> Tri:
        if a == b:
            return Tri.IN
        key = (a, b) if a._hash <= b._hash else (b, a)
        hit = self._eq.get(key)
        if hit is not None:
            return hit
        na, nb = self.element(a), self.element(b)
        if na == nb:
            out = Tri.IN
        else:
            out = self.compare(na, nb, self.trunc)
        self._eq[key] = out
        return out

    def compare(self, a: Term, b: Term, bound: int) -> Tri:
        unknown = False
        for m in range(bound):
            x, y = self.mem(a, m), self.mem(b, m)
            if x == y:
                if x is Tri.UNKNOWN:
                    unknown = True
                continue
            if Tri.UNKNOWN in (x, y):
                unknown = True
                continue
            return Tri.OUT
        return Tri.UNKNOWN if unknown else Tri.UNREF

    def universe(self) -> list[Term]:
        st = self.std
        return [numeral(n) for n in range(6)] + [
            st.k, st.s, st.kbar, st.p, st.p0, st.p1,
            EMPTY, ALL, fin([pair(0, 0)]), fin([1, 4]), cofin([2]),
        ]

    def show(self, a: Term) -> str:
        return to_sexpr(a)

    def flags(self) -> dict:
        return {"backend": self.name, "fuel": self.fuel, "truncation": self.trunc}

    # -- membership

    def mem(self, t: Term, m: int) -> Tri:
        r, _ = self._mem(t, m)
        return r

    def members(self, t: Term, bound: Optional[int] = None) -> tuple[list[int], bool]:
        """Codes below the bound that are IN, and whether every answer was exact."""
        bound = self.trunc if bound is None else bound
        got, exact = [], True
        for m in range(bound):
            r = self.mem(t, m)
            if r is Tri.IN:
                got.append(m)
            elif r is not Tri.OUT:
                exact = False
        return got, exact

    def _mem(self, t: Term, m: int) -> tuple[Tri, int]:
        hit = self._cache.get((t, m))
        if hit is not None:
            return hit, _INF
        h, _ = whnf(t, self.fuel)
        if h is None:
            self._cache[(t, m)] = Tri.UNKNOWN
            return Tri.UNKNOWN, _INF
        key = (h, m)
        if h is not t:
            hit = self._cache.get(key)
            if hit is not None:
                self._cache[(t, m)] = hit
                return hit, _INF
        d = self._active.get(key)
        if d is not None:
            # least fixed point: a query that only supports itself fails
            return Tri.OUT, d
        depth = len(self._active)
        if depth >= self.max_depth:
            # too deep to settle here; not cached, so a shallower query may still decide it
            return Tri.UNKNOWN, 0
        self._active[key] = depth
        try:
            r, low = self._mem_whnf(h, m)
        finally:
            del self._active[key]
        if low >= depth:
            self._cache[key] = r
            self._cache[(t, m)] = r
            low = _INF
        return r, low

    def _mem_whnf(self, h: Term, m: int) -> tuple[Tri, int]:
        head, args = spine(h)
        if head is K or head is S:
            n, r = unpair(m)
            return self._mem(app(h, fin_code(n)), r)
        if head.kind != "nat":
            raise TypeError(f"open term in the graph model: {to_sexpr(h, 80)}")
        if not args:
            return self._native_mem(head.payload, m)
        f = spine_drop_last(h)
        return self._literal(f, args[-1], m)

    def _native_mem(self, pl, m: int) -> tuple[Tri, int]:
        if isinstance(pl, FinSet):
            return (Tri.IN if m in pl.codes else Tri.OUT), _INF
        if isinstance(pl, CofinSet):
            return (Tri.OUT if m in pl.excluded else Tri.IN), _INF
        if isinstance(pl, AllSet):
            return Tri.IN, _INF
        if isinstance(pl, TableFn):
            n, r = unpair(m)
            ds = finite_set(n)
            return (Tri.IN if r in pl.value(lambda t: t <= ds) else Tri.OUT), _INF
        if isinstance(pl, LitApp):
            return self._literal(pl.fun, pl.arg, m)
        raise TypeError(f"unknown native {pl!r}")

    def _finite(self, t: Term) -> Optional[frozenset]:
        h, _ = whnf(t, self.fuel)
        if h is not None and h.kind == "nat" and isinstance(h.payload, FinSet):
            return h.payload.codes
        return None

    def _superset(self, t: Term) -> Optional[tuple]:
        """A finite sorted superset of t when one is evident from its shape."""
        h, _ = whnf(t, self.fuel)
        if h is None:
            return None
        hit = self._sup.get(h, False)
        if hit is not False:
            return hit
        out = None
        if h.kind == "nat":
            pl = h.payload
            if isinstance(pl, FinSet):
                out = tuple(sorted(pl.codes))
            elif isinstance(pl, LitApp):
                inner = self._superset(pl.fun)
                if inner is not None:
                    out = tuple(sorted({unpair(c)[1] for c in inner}))
        elif h.kind == "app":
            head, _ = spine(h)
            if head.kind == "nat":
                pl = head.payload
                if isinstance(pl, TableFn) and h.fun is head:
                    out = tuple(sorted(set().union(*[o for _, o in pl.table])))
                else:
                    inner = self._superset(h.fun)
                    if inner is not None:
                        out = tuple(sorted({unpair(c)[1] for c in inner}))
        self._sup[h] = out
        return out

    def _subset(self, n: int, x: Term) -> tuple[Tri, int]:
        r, low = Tri.IN, _INF
        for i in finite_set(n):
            a, lo = self._mem(x, i)
            low = min(low, lo)
            r = min(r, a)
            if r is Tri.OUT:
                break
        return r, low

    def _literal(self, f: Term, x: Term, m: int) -> tuple[Tri, int]:
        """m in f.x by the defining scan."""
        fh, _ = whnf(f, self.fuel)
        if fh is None:
            return Tri.UNKNOWN, _INF
        if fh.kind == "nat":
            pl = fh.payload
            if isinstance(pl, AllSet):
                return Tri.IN, _INF
            if isinstance(pl, TableFn):
                r, low = Tri.OUT, _INF
                for t, o in pl.table:
                    if m in o:
                        a, lo = Tri.IN, _INF
                        for i in t:
                            b, l2 = self._mem(x, i)
                            a, lo = min(a, b), min(lo, l2)
                            if a is Tri.OUT:
                                break
                        r, low = max(r, a), min(low, lo)
                        if r is Tri.IN:
                            break
                return r, low
        sup = self._superset(f)
        if sup is not None:
            r, low = Tri.OUT, _INF
            for c in sup:
                n, mm = unpair(c)
                if mm != m:
                    continue
                a, lo = self._mem(f, c)
                low = min(low, lo)
                if a is Tri.OUT:
                    continue
                b, l2 = self._subset(n, x)
                r, low = max(r, min(a, b)), min(low, l2)
                if r is Tri.IN:
                    break
            return r, low
        cx = self._finite(x)
        r, low = Tri.OUT, _INF
        if cx is not None and len(cx) <= 16:
            for n in subcodes(set_code(cx)):
                a, lo = self._mem(f, pair(n, m))
                r, low = max(r, a), min(low, lo)
                if r is Tri.IN:
                    break
            return r, low
        n = 0
        while pair(n, m) < self.trunc:
            a, lo = self._mem(f, pair(n, m))
            low = min(low, lo)
            if a is not Tri.OUT:
                b, l2 = self._subset(n, x)
                low = min(low, l2)
                r = max(r, min(a, b))
                if r is Tri.IN:
                    return r, low
            n += 1
        return Tri.UNKNOWN, low


def spine_drop_last(t: Term) -> Term:
    return t.fun


def scott_fun(backend: ScottBackend, a: Term) -> Callable[[Term], Term]:
    """The continuous map x -> a.x (evaluated literally)."""
    return lambda x: scott_apply(a, x)


def one() -> Term:
    """1 = s(k(skk)); 1.a is the graph of the function coded by a."""
    return app(S, app(K, STANDARD.i))


@dataclass
class MeyerScottReport:
    a: Term
    b: Term
    trunc: int
    samples: list
    a_values_empty: bool
    b_values_full: bool
    one_a_empty: bool
    one_a_exact: bool
    pair00_in_one_b: bool

    @property
    def certified(self) -> bool:
        return (self.a_values_empty and self.b_values_full and self.one_a_empty
                and self.one_a_exact and self.pair00_in_one_b)

    def as_dict(self) -> dict:
        return {
            "a": "{}", "b": "N", "truncation": self.trunc,
            "samples": self.samples,
            "a_x_empty": self.a_values_empty, "b_x_full": self.b_values_full,
            "one_a_empty": self.one_a_empty, "one_a_exact": self.one_a_exact,
            "pair00_in_one_b": self.pair00_in_one_b, "certified": self.certified,
        }


def meyer_scott_counterexample(backend: Optional[ScottBackend] = None,
                               samples: Optional[list[Term]] = None) -> tuple[Term, Term, MeyerScottReport]:
    """a = {} and b = N agree on nothing applied yet 1a and 1b differ."""
    sb = backend or ScottBackend()
    xs = samples or (sb.universe()[:10])
    a, b = EMPTY, ALL
    a_empty = b_full = True
    for x in xs:
        got, exact = sb.members(scott_apply(a, x))
        a_empty &= exact and not got
        full, exact_b = sb.members(scott_apply(b, x))
        b_full &= exact_b and len(full) == sb.trunc
    one_a = app(one(), a)
    got, exact = sb.members(one_a)
    rep = MeyerScottReport(
        a=a, b=b, trunc=sb.trunc, samples=[sb.show(x) for x in xs],
        a_values_empty=a_empty, b_values_full=b_full,
        one_a_empty=not got, one_a_exact=exact,
        pair00_in_one_b=sb.mem(app(one(), b), pair(0, 0)) is Tri.IN,
    )
    return a, b, rep
