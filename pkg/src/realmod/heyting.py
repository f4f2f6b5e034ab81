"""Realizability truth values over a backend, with sampled membership.

A truth value is a set of backend elements described structurally.  Meets
are read through the projections, joins through a tag in the first
projection, and implications are tested against a finite sample of the
antecedent, so an implication member can be refuted but is only ever
reported as surviving (``Tri.UNREF``) unless the antecedent is finite.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Optional, Sequence

from .kernel import STANDARD, Backend, Defined, Tri, lam, numeral, std_env, tri_and, tri_or
from .terms import K, Term, app, apps, normalize, to_sexpr


# ---------------------------------------------------------------- truth values

_INTERN: dict = {}


class TV:
    """Interned, immutable truth-value node; identity is structural equality."""

    __slots__ = ("kind", "parts", "elems", "label", "__weakref__")

    def __init__(self, kind: str, parts: tuple, elems: tuple, label: str):
        self.kind = kind
        self.parts = parts
        self.elems = elems
        self.label = label

    def __repr__(self) -> str:
        return show_tv(self)

    def __reduce__(self):
        raise TypeError("truth values are process-local")


def _mk(kind: str, parts: tuple = (), elems: tuple = (), label: str = "") -> TV:
    key = (kind, tuple(id(p) for p in parts), elems, label)
    hit = _INTERN.get(key)
    if hit is None:
        hit = TV(kind, parts, elems, label)
        # keep the parts alive so their ids stay unique
        _INTERN[key] = hit
    return hit


TOP = _mk("top")
BOT = _mk("bot")


def explicit(elems: Iterable[Term], label: str = "") -> TV:
    out: list[Term] = []
    for e in elems:
        if e not in out:
            out.append(e)
    if not out:
        return BOT
    return _mk("explicit", (), tuple(out), label)


def meet(x: TV, y: TV) -> TV:
    return _mk("meet", (x, y))


def join(x: TV, y: TV) -> TV:
    return _mk("join", (x, y))


def imp(x: TV, y: TV) -> TV:
    return _mk("imp", (x, y))


def big_meet(fs: Sequence[TV]) -> TV:
    if not fs:
        raise ValueError("big_meet needs a nonempty family")
    return _mk("bigmeet", tuple(fs))


def big_join(fs: Sequence[TV]) -> TV:
    if not fs:
        raise ValueError("big_join needs a nonempty family")
    return _mk("bigjoin", tuple(fs))


def ominus(d: TV, x: TV) -> TV:
    """(x => d) => d, tagged for display."""
    return _mk("imp", (imp(x, d), d), (), "om")


_CANON: dict = {}


def canon(x: TV) -> TV:
    """Set-identical normal form: Bot => X and X => Top are both Top."""
    hit = _CANON.get(x)
    if hit is not None:
        return hit
    if x.kind in ("top", "bot", "explicit"):
        out = x
    else:
        parts = tuple(canon(p) for p in x.parts)
        if x.kind == "imp" and (parts[0].kind == "bot" or parts[1].kind == "top"):
            out = TOP
        else:
            out = _mk(x.kind, parts)
    _CANON[x] = out
    return out


def neg(x: TV) -> TV:
    return imp(x, BOT)


def show_tv(x: TV, depth: int = 6) -> str:
    if depth <= 0:
        return "..."
    k = x.kind
    if k == "top":
        return "T"
    if k == "bot":
        return "F"
    if k == "explicit":
        return x.label or "{" + ", ".join(to_sexpr(e, 40) for e in x.elems) + "}"
    a = [show_tv(p, depth - 1) for p in x.parts]
    if k == "imp" and x.label == "om":
        return f"om[{show_tv(x.parts[1], depth - 1)}]({show_tv(x.parts[0].parts[0], depth - 1)})"
    if k == "meet":
        return f"({a[0]} & {a[1]})"
    if k == "join":
        return f"({a[0]} | {a[1]})"
    if k == "imp":
        return f"({a[0]} => {a[1]})"
    if k == "bigmeet":
        return "/\\[" + ", ".join(a) + "]"
    return "\\/[" + ", ".join(a) + "]"


def numeral_set(*ns: int) -> TV:
    return explicit([numeral(n) for n in ns], "{" + ",".join(f"{n}~" for n in ns) + "}")


# ---------------------------------------------------------------- verdicts

@dataclass(frozen=True)
class Verdict:
    kind: str                      # Confirmed | Refuted | Inconclusive
    counterexample: Optional[Term] = None
    reason: str = ""
    tested: int = 0
    proved: int = 0                # tests answered IN rather than UNREF

    @property
    def confirmed(self) -> bool:
        return self.kind == "Confirmed"

    @property
    def refuted(self) -> bool:
        return self.kind == "Refuted"

    def as_dict(self) -> dict:
        out = {"verdict": self.kind, "tested": self.tested, "proved": self.proved}
        if self.reason:
            out["reason"] = self.reason
        if self.counterexample is not None:
            out["counterexample"] = to_sexpr(self.counterexample)
        return out


def combine(vs: Iterable[Verdict]) -> Verdict:
    """Refuted beats Inconclusive beats Confirmed; counts add up."""
    vs = list(vs)
    tested = sum(v.tested for v in vs)
    proved = sum(v.proved for v in vs)
    for v in vs:
        if v.refuted:
            return Verdict("Refuted", v.counterexample, v.reason, tested, proved)
    for v in vs:
        if v.kind == "Inconclusive":
            return Verdict("Inconclusive", None, v.reason, tested, proved)
    return Verdict("Confirmed", None, "", tested, proved)


CONFIRMED = Verdict("Confirmed")


# ---------------------------------------------------------------- witnesses

def _witness_terms() -> dict[str, Term]:
    env = std_env()
    w = {
        "e1": lam(r"\a. p k a", env),
        "e2": lam(r"\a. p kbar a", env),
        "e3": lam(r"\q c. (p0 c) (p0 q) (p1 q) (p1 c)", env),
        "e4": lam(r"\q c. p (p0 q c) (p1 q c)", env),
        "e5": STANDARD.p0,
        "e6": STANDARD.p1,
        "e7": STANDARD.i,
        "e8": STANDARD.i,
        "e9": STANDARD.i,
        "e10": lam(r"\q c. p1 q (p0 q c)", env),
        "e11": lam(r"\a y x. a (p x y)", env),
        "e12": lam(r"\a c. a (p1 c) (p0 c)", env),
    }
    return w


WITNESS_TERMS = _witness_terms()


@dataclass(frozen=True)
class WitnessLibrary:
    backend: str
    entries: dict = field(hash=False)

    def __getitem__(self, name: str) -> Term:
        return self.entries[name]

    def names(self) -> list[str]:
        return list(self.entries)


def uniform_witnesses(backend: Backend) -> WitnessLibrary:
    """e1..e12; the same closed terms serve every backend."""
    return WitnessLibrary(backend.name, dict(WITNESS_TERMS))


# reductions the library names, over metavariables X, Y, Z
def witness_laws() -> dict[str, tuple]:
    return {
        "e1": lambda X, Y, Z: (X, join(X, Y)),
        "e2": lambda X, Y, Z: (Y, join(X, Y)),
        "e3": lambda X, Y, Z: (meet(imp(X, Z), imp(Y, Z)), imp(join(X, Y), Z)),
        "e4": lambda X, Y, Z: (meet(imp(Z, X), imp(Z, Y)), imp(Z, meet(X, Y))),
        "e5": lambda X, Y, Z: (meet(X, Y), X),
        "e6": lambda X, Y, Z: (meet(X, Y), Y),
        "e7": lambda X, Y, Z: (X, TOP),
        "e8": lambda X, Y, Z: (BOT, X),
        "e9": lambda X, Y, Z: (X, X),
        "e10": lambda X, Y, Z: (meet(imp(X, Y), imp(Y, Z)), imp(X, Z)),
        "e11": lambda X, Y, Z: (imp(meet(X, Y), Z), imp(Y, imp(X, Z))),
        "e12": lambda X, Y, Z: (imp(Y, imp(X, Z)), imp(meet(X, Y), Z)),
    }


# ---------------------------------------------------------------- membership engine

class Heyting:
    """Membership, sampling and reduction checks for truth values on one backend.

    ``width`` bounds every sample list, including the antecedent samples an
    implication is tested on; all answers are memoized per (value, element).
    """

    def __init__(self, backend: Backend, width: int = 6, fuel: Optional[int] = None,
                 pool: Sequence[Term] = ()):
        self.backend = backend
        self.width = width
        self.fuel = fuel or backend.fuel
        self.std = STANDARD
        self._mem: dict = {}
        self._samples: dict = {}
        self._nf: dict = {}
        self.extra_pool = list(pool)
        self._pool = self._base_pool()
        self.anomalies: list = []
        self._seeders: list = []

    # -- helpers

    def nf(self, t: Term) -> Optional[Term]:
        hit = self._nf.get(t, False)
        if hit is not False:
            return hit
        r, _ = normalize(t, self.fuel)
        self._nf[t] = r
        return r

    def apply(self, e: Term, a: Term, fuel: Optional[int] = None) -> Optional[Term]:
        r = self.backend.apply(e, a, fuel or self.fuel)
        return r.value if isinstance(r, Defined) else None

    def _base_pool(self) -> list[Term]:
        st = self.std
        env = std_env()
        out = [st.i, st.p0, st.p1, WITNESS_TERMS["e1"], WITNESS_TERMS["e2"],
               lam(r"\c. (p1 c) (p0 c)", env), lam(r"\c. p (p1 c) (p0 c)", env),
               WITNESS_TERMS["e3"], WITNESS_TERMS["e4"], WITNESS_TERMS["e10"],
               WITNESS_TERMS["e11"], WITNESS_TERMS["e12"]]
        out += [x for x in self.extra_pool if x not in out]
        return out

    # -- membership

    def mem(self, X: TV, e: Term) -> Tri:
        key = (X, e)
        hit = self._mem.get(key)
        if hit is not None:
            return hit
        r = self._member(X, e)
        self._mem[key] = r
        return r

    def _member(self, X: TV, e: Term) -> Tri:
        k = X.kind
        if k == "top":
            return Tri.IN
        if k == "bot":
            return Tri.OUT
        if k == "explicit":
            return tri_or(*(self.backend.equal(e, x) for x in X.elems))
        if k == "meet":
            a = self.apply(self.std.p0, e)
            b = self.apply(self.std.p1, e)
            ra = Tri.UNKNOWN if a is None else self.mem(X.parts[0], a)
            if ra is Tri.OUT:
                return Tri.OUT
            rb = Tri.UNKNOWN if b is None else self.mem(X.parts[1], b)
            return tri_and(ra, rb)
        if k == "join":
            tag = self.apply(self.std.p0, e)
            if tag is None:
                return Tri.UNKNOWN
            body = self.apply(self.std.p1, e)
            left = self.backend.equal(tag, self.std.k)
            right = self.backend.equal(tag, self.std.kbar)
            if left is Tri.OUT and right is Tri.OUT:
                return Tri.OUT
            if body is None:
                return Tri.UNKNOWN
            return tri_or(
                tri_and(left, self.mem(X.parts[0], body)) if left is not Tri.OUT else Tri.OUT,
                tri_and(right, self.mem(X.parts[1], body)) if right is not Tri.OUT else Tri.OUT,
            )
        if k == "imp":
            return self._imp_member(X.parts[0], X.parts[1], e)
        if k == "bigmeet":
            out = Tri.IN
            for part in X.parts:
                out = tri_and(out, self.mem(part, e))
                if out is Tri.OUT:
                    return out
            return out
        if k == "bigjoin":
            out = Tri.OUT
            for part in X.parts:
                out = tri_or(out, self.mem(part, e))
                if out is Tri.IN:
                    return out
            return out
        raise TypeError(f"unknown truth value {k}")

    def exhaustive(self, X: TV) -> bool:
        """Whether ``sample`` lists every member up to canonical equality."""
        return X.kind in ("bot", "explicit")

    def _imp_member(self, A: TV, B: TV, e: Term) -> Tri:
        if A.kind == "bot":
            return Tri.IN
        exact = self.exhaustive(A)
        xs = list(A.elems) if A.kind == "explicit" else self.sample(A)
        out = Tri.IN if exact else Tri.UNREF
        for a in xs:
            r = self.apply(e, a)
            if r is None:
                out = tri_and(out, Tri.UNKNOWN)
                continue
            m = self.mem(B, r)
            if m is Tri.OUT:
                return Tri.OUT
            out = tri_and(out, m)
        return out

    # -- sampling

    def sample(self, X: TV, n: Optional[int] = None) -> list[Term]:
        """Members of X built by sound constructions, at most ``width`` of them.

        Every sample is a genuine member, not merely an unrefuted one, so a
        correct realizer can never be refuted on them.
        """
        hit = self._samples.get(X)
        if hit is None:
            self._samples[X] = []          # guards re-entry while building
            hit = self._sample(X)
            seeds = [self.nf(t) for f in self._seeders for t in f(X)]
            if seeds:
                hit = self._keep(X, seeds + hit)
            self._samples[X] = hit
        return hit if n is None else hit[:n]

    def add_seeder(self, seeder: Callable[[TV], Sequence[Term]]) -> None:
        """Register a source of genuine members, consulted before the generic samplers."""
        if seeder not in self._seeders:
            self._seeders.append(seeder)
            self._samples.clear()

    def _keep(self, X: TV, genuine: Iterable[Optional[Term]],
              tested: Iterable[Term] = ()) -> list[Term]:
        out: list[Term] = []
        for c in genuine:
            if c is None or c in out:
                continue
            if self.mem(X, c) is Tri.OUT:
                self.anomalies.append((X, c))
                continue
            out.append(c)
            if len(out) >= self.width:
                return out
        for c in tested:
            if c not in out and self.mem(X, c) is Tri.IN:
                out.append(c)
                if len(out) >= self.width:
                    break
        return out

    def _sample(self, X: TV) -> list[Term]:
        k = X.kind
        st = self.std
        if k == "top":
            return self.backend.universe()[: self.width]
        if k == "bot":
            return []
        if k == "explicit":
            return list(X.elems)
        if k == "meet":
            xs, ys = self.sample(X.parts[0]), self.sample(X.parts[1])
            return self._keep(X, (self.nf(apps(st.p, a, b)) for a, b in _interleave(xs, ys)))
        if k == "join":
            xs, ys = self.sample(X.parts[0]), self.sample(X.parts[1])
            cands: list = []
            for i in range(max(len(xs), len(ys))):
                if i < len(xs):
                    cands.append(self.nf(apps(st.p, st.k, xs[i])))
                if i < len(ys):
                    cands.append(self.nf(apps(st.p, st.kbar, ys[i])))
            return self._keep(X, cands)
        if k == "imp":
            return self._keep(X, self._imp_candidates(X.parts[0], X.parts[1]), self._pool)
        if k == "bigmeet":
            parts = X.parts
            pools = [self.sample(p) for p in parts]
            union = [c for c in _round_robin(pools)]
            shared = [c for c in union
                      if all(c in pool or self.mem(p, c) is Tri.IN for p, pool in zip(parts, pools))]
            return self._keep(X, shared)
        if k == "bigjoin":
            return self._keep(X, _round_robin([self.sample(p) for p in X.parts]))
        raise TypeError(f"unknown truth value {k}")

    def _imp_candidates(self, A: TV, B: TV) -> Iterator[Optional[Term]]:
        """Realizers of A => B by construction, cheapest first."""
        st, w = self.std, WITNESS_TERMS
        if A.kind == "bot":
            yield from self.backend.universe()
        if A is B or B.kind == "top" or canon(A) is canon(B):
            yield st.i
        if A.kind == "meet":
            if A.parts[0] is B:
                yield st.p0
            if A.parts[1] is B:
                yield st.p1
            u, v = A.parts
            if B.kind == "meet" and B.parts[0] is v and B.parts[1] is u:
                yield self.nf(_SWAP)
            if v.kind == "imp" and v.parts[0] is u and v.parts[1] is B:
                yield self.nf(_MODUS)
        if B.kind == "join":
            if B.parts[0] is A:
                yield w["e1"]
            if B.parts[1] is A:
                yield w["e2"]
        if A.kind == "imp" and A.parts[1] is B:
            for a in self.sample(A.parts[0]):
                yield self.nf(app(_EVAL_AT, a))
        for y in self.sample(B):
            yield self.nf(app(K, y))
        # composites: every factor is itself a constructed member
        if A.kind == "meet":
            for f in self.sample(imp(A.parts[0], B))[:2]:
                yield self.nf(apps(w["e10"], apps(st.p, st.p0, f)))
            for f in self.sample(imp(A.parts[1], B))[:2]:
                yield self.nf(apps(w["e10"], apps(st.p, st.p1, f)))
        if A.kind == "join":
            fs, gs = self.sample(imp(A.parts[0], B))[:2], self.sample(imp(A.parts[1], B))[:2]
            for f, g in _interleave(fs, gs):
                yield self.nf(apps(w["e3"], apps(st.p, f, g)))
        if B.kind == "meet":
            fs, gs = self.sample(imp(A, B.parts[0]))[:2], self.sample(imp(A, B.parts[1]))[:2]
            for f, g in _interleave(fs, gs):
                yield self.nf(apps(w["e4"], apps(st.p, f, g)))
        if B.kind == "join":
            for f in self.sample(imp(A, B.parts[0]))[:2]:
                yield self.nf(apps(w["e10"], apps(st.p, f, w["e1"])))
        if B.kind == "imp":
            for g in self.sample(imp(meet(B.parts[0], A), B.parts[1]))[:3]:
                yield self.nf(app(w["e11"], g))

    # -- reductions

    def check_reduction(self, e: Term, X: TV, Y: TV, budget: Optional[int] = None,
                        fuel: Optional[int] = None, samples: Optional[Sequence[Term]] = None
                        ) -> Verdict:
        """Test e : X ~> Y on sampled members of X."""
        fuel = fuel or self.fuel
        xs = list(samples) if samples is not None else self.sample(X)
        if budget is not None:
            xs = xs[:budget]
        unknown = ""
        proved = 0
        for a in xs:
            r = self.apply(e, a, fuel)
            if r is None:
                if self.apply(e, a, 2 * fuel) is None:
                    return Verdict("Refuted", a, f"application diverges at fuel {fuel} and {2 * fuel}",
                                   len(xs), proved)
                r = self.apply(e, a, 2 * fuel)
            m = self.mem(Y, r)
            if m is Tri.OUT:
                return Verdict("Refuted", a, "image lies outside the consequent", len(xs), proved)
            if m is Tri.UNKNOWN:
                unknown = unknown or f"membership undecided for {to_sexpr(a, 60)}"
            elif m is Tri.IN:
                proved += 1
        if unknown:
            return Verdict("Inconclusive", None, unknown, len(xs), proved)
        return Verdict("Confirmed", None, "", len(xs), proved)

    def check_equiv(self, e: Term, f: Term, X: TV, Y: TV) -> Verdict:
        return combine([self.check_reduction(e, X, Y), self.check_reduction(f, Y, X)])


_EVAL_AT = lam(r"\a f. f a")
_SWAP = lam(r"\c. p (p1 c) (p0 c)", std_env())
_MODUS = lam(r"\c. (p1 c) (p0 c)", std_env())


def _interleave(xs: Sequence[Term], ys: Sequence[Term]) -> list[tuple[Term, Term]]:
    out = []
    for s in range(len(xs) + len(ys)):
        for i in range(s + 1):
            j = s - i
            if i < len(xs) and j < len(ys):
                out.append((xs[i], ys[j]))
    return out


def _round_robin(lists: Sequence[Sequence[Term]]) -> list[Term]:
    out = []
    for i in range(max((len(x) for x in lists), default=0)):
        for xs in lists:
            if i < len(xs):
                out.append(xs[i])
    return out


# ---------------------------------------------------------------- sample family

def q_value(probes: Sequence[TV]) -> TV:
    """Intersection over probes Z of (T => Z) => (T => Z)."""
    return big_meet([imp(imp(TOP, z), imp(TOP, z)) for z in probes])


def standard_family(extra: Sequence[TV] = ()) -> list[TV]:
    fam = [TOP, BOT] + [numeral_set(n) for n in range(6)] + [
        numeral_set(0, 1), imp(TOP, numeral_set(2)), q_value([BOT, TOP, numeral_set(0)]),
    ]
    fam += [x for x in extra if x not in fam]
    return fam


def instantiations(names: Sequence[str], count: int, seed: int,
                   family: Optional[Sequence[TV]] = None) -> list[dict[str, TV]]:
    """Seeded assignments of family members to metavariables."""
    fam = list(family or standard_family())
    rng = random.Random(seed)
    return [{v: rng.choice(fam) for v in names} for _ in range(count)]
