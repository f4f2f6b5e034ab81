"""Backend contract, bracket abstraction and the closed-term model.

Every backend represents its elements as interned ``Term`` values built from
S, K and (for the Scott and stream backends) opaque native atoms.  What
differs between backends is what ``apply`` returns and how ``equal`` decides
canonical equality; everything above this layer only sees that interface.
"""

from __future__ import annotations

import enum
import os
import re
from dataclasses import dataclass
from typing import Iterable, Optional, Protocol, Sequence, Union

from .terms import (
    K, S, Term, app, apps, digest, is_normal, normalize, to_sexpr, var,
)


def default_fuel() -> int:
    raw = os.environ.get("REALMOD_FUEL", "")
    if raw.strip():
        value = int(raw)
        if value <= 0:
            raise ValueError("REALMOD_FUEL must be positive")
        return value
    return 100_000


# ---------------------------------------------------------------- tri-state

class Tri(enum.IntEnum):
    """Membership answers, ordered so that meet is ``min`` and join is ``max``.

    UNREF is a positive answer that was not proved but survived every test
    (an implication with no failing sample, or equality up to truncation).
    """

    OUT = 0
    UNKNOWN = 1
    UNREF = 2
    IN = 3

    @property
    def positive(self) -> bool:
        return self >= Tri.UNREF


def tri_and(*xs: Tri) -> Tri:
    return min(xs, default=Tri.IN)


def tri_or(*xs: Tri) -> Tri:
    return max(xs, default=Tri.OUT)


# ---------------------------------------------------------------- results

@dataclass(frozen=True)
class Defined:
    value: Term
    steps: int = 0

    @property
    def ok(self) -> bool:
        return True


@dataclass(frozen=True)
class FuelExhausted:
    fuel: int

    @property
    def ok(self) -> bool:
        return False


AppResult = Union[Defined, FuelExhausted]


class Backend(Protocol):
    name: str
    fuel: int

    def apply(self, a: Term, b: Term, fuel: Optional[int] = None) -> AppResult: ...
    def equal(self, a: Term, b: Term) -> Tri: ...
    def element(self, t: Term) -> Term: ...
    def universe(self) -> list[Term]: ...
    def show(self, a: Term) -> str: ...
    def flags(self) -> dict: ...


# ---------------------------------------------------------------- abstraction

I = app(app(S, K), K)


class AbstractionError(ValueError):
    pass


def _abstract(x: str, m: Term) -> Term:
    """[x]m, rebuilding bottom-up so that deep terms do not recurse."""
    memo: dict[int, Term] = {}
    todo: list[tuple[Term, bool]] = [(m, False)]
    while todo:
        t, expanded = todo.pop()
        if id(t) in memo:
            continue
        if x not in t.fv:
            if t.kind != "app" or (t.is_closed and is_normal(t)):
                memo[id(t)] = app(K, t)
                continue
        if t.kind == "var":
            memo[id(t)] = I
            continue
        if not expanded:
            todo.append((t, True))
            todo.append((t.fun, False))
            todo.append((t.arg, False))
            continue
        memo[id(t)] = app(app(S, memo[id(t.fun)]), memo[id(t.arg)])
    return memo[id(m)]


def compile_abstraction(t: Term, vars: Sequence[str]) -> Term:
    """Closed f with ``f a1 .. an`` reducing to t[a/vars]; partial applications are normal."""
    extra = set(t.fv) - set(vars)
    if extra:
        raise AbstractionError(f"unlisted free variables: {sorted(extra)}")
    if len(set(vars)) != len(vars):
        raise AbstractionError("repeated abstraction variable")
    out = t
    for x in reversed(vars):
        out = _abstract(x, out)
    return out


# ---------------------------------------------------------------- lambda text

_TOKEN = re.compile(r"\s*(?:(\\|λ)|(\.)|(\()|(\))|([A-Za-z_][A-Za-z0-9_']*))")


def lam(text: str, env: Optional[dict[str, Term]] = None) -> Term:
    """Compile ``\\x y. y x``-style text; free names must be S, K, I or in env."""
    env = env or {}
    toks: list[str] = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise SyntaxError(f"bad lambda text at {pos}: {text[pos:pos + 10]!r}")
        toks.append(next(g for g in m.groups() if g is not None))
        pos = m.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
    i = 0

    def peek() -> Optional[str]:
        return toks[i] if i < len(toks) else None

    def expr(bound: tuple) -> Term:
        nonlocal i
        if peek() in ("\\", "λ"):
            i += 1
            names = []
            while peek() not in (".", None):
                names.append(toks[i])
                i += 1
            if peek() != "." or not names:
                raise SyntaxError("lambda needs names and a dot")
            i += 1
            body = expr(bound + tuple(names))
            return compile_abstraction(body, names) if not (set(body.fv) - set(names)) \
                else _partial(body, names)
        head: Optional[Term] = None
        while peek() not in (None, ")"):
            if peek() in ("\\", "λ"):
                a = expr(bound)
            else:
                a = atom(bound)
            head = a if head is None else app(head, a)
        if head is None:
            raise SyntaxError("empty expression")
        return head

    def atom(bound: tuple) -> Term:
        nonlocal i
        tok = peek()
        if tok == "(":
            i += 1
            e = expr(bound)
            if peek() != ")":
                raise SyntaxError("missing ')'")
            i += 1
            return e
        if tok in (None, ")", "."):
            raise SyntaxError(f"unexpected {tok!r}")
        i += 1
        if tok in bound:
            return var(tok)
        if tok in env:
            return env[tok]
        if tok == "S":
            return S
        if tok == "K":
            return K
        if tok == "I":
            return I
        raise SyntaxError(f"unknown name {tok!r}")

    out = expr(())
    if i != len(toks):
        raise SyntaxError("trailing tokens in lambda text")
    return out


def _partial(body: Term, names: list[str]) -> Term:
    # inner lambda that still mentions outer variables
    out = body
    for x in reversed(names):
        out = _abstract(x, out)
    return out


# ---------------------------------------------------------------- standard elements

@dataclass(frozen=True)
class Standard:
    k: Term
    s: Term
    i: Term
    p: Term
    p0: Term
    p1: Term
    kbar: Term

    def env(self) -> dict[str, Term]:
        return {"k": self.k, "s": self.s, "i": self.i, "p": self.p,
                "p0": self.p0, "p1": self.p1, "kbar": self.kbar}


def _build_standard() -> Standard:
    kbar = lam(r"\x y. y")
    p = lam(r"\x y z. z x y")
    p0 = lam(r"\c. c K")
    p1 = lam(r"\c. c kbar", {"kbar": kbar})
    return Standard(k=K, s=S, i=lam(r"\x. x"), p=p, p0=p0, p1=p1, kbar=kbar)


STANDARD = _build_standard()


def standard_elements() -> Standard:
    return STANDARD


_NUMERALS: list[Term] = [STANDARD.i]


def numeral(n: int) -> Term:
    """Curry numeral: 0 is skk and n+1 is the normal form of p kbar n."""
    if n < 0:
        raise ValueError("numerals are for naturals")
    while len(_NUMERALS) <= n:
        nf, _ = normalize(apps(STANDARD.p, STANDARD.kbar, _NUMERALS[-1]), 10_000)
        assert nf is not None
        _NUMERALS.append(nf)
    return _NUMERALS[n]


def numeral_value(t: Term, limit: int = 64) -> Optional[int]:
    """Inverse of ``numeral`` on its image (syntactic)."""
    for n in range(limit):
        if numeral(n) == t:
            return n
    return None


def fixpoint(f: Term) -> Term:
    """Normal z with ``z a`` and ``f z a`` sharing their normal form."""
    env = {"f": f}
    w = lam(r"\w. f (S (S (K w) (K w)) I)", env)
    return apps(S, apps(S, app(K, w), app(K, w)), I)


def std_env(**extra: Term) -> dict[str, Term]:
    env = STANDARD.env()
    env.update(extra)
    return env


# ---------------------------------------------------------------- term model

class TermBackend:
    """Closed SK terms under weak reduction; equality is identity of normal forms."""

    name = "term"

    def __init__(self, fuel: Optional[int] = None):
        self.fuel = fuel or default_fuel()
        self.std = STANDARD

    def apply(self, a: Term, b: Term, fuel: Optional[int] = None) -> AppResult:
        budget = fuel or self.fuel
        nf, steps = normalize(app(a, b), budget)
        if nf is None:
            return FuelExhausted(budget)
        return Defined(nf, steps)

    def apply_chain(self, f: Term, *args: Term, fuel: Optional[int] = None) -> AppResult:
        budget = fuel or self.fuel
        nf, steps = normalize(apps(f, *args), budget)
        if nf is None:
            return FuelExhausted(budget)
        return Defined(nf, steps)

    def element(self, t: Term) -> Term:
        if not t.is_closed:
            raise AbstractionError("elements must be closed")
        nf, _ = normalize(t, self.fuel)
        if nf is None:
            raise ValueError("term has no normal form within fuel")
        return nf

    def equal(self, a: Term, b: Term) -> Tri:
        return Tri.IN if a == b else Tri.OUT

    def universe(self) -> list[Term]:
        st = self.std
        return [numeral(n) for n in range(6)] + [st.k, st.s, st.kbar, st.p, st.p0, st.p1]

    def show(self, a: Term) -> str:
        return to_sexpr(a)

    def key(self, a: Term) -> str:
        return digest(a)

    def flags(self) -> dict:
        return {"backend": self.name, "fuel": self.fuel}
