"""Kleene's second model: application of lazy Baire-space streams.

A stream ``alpha`` acts on ``beta`` by searching for the least prefix length
``l`` with ``alpha(code((n) ++ beta | l)) = m + 1``, all shorter prefixes
giving 0; the answer at ``n`` is then ``m``.  Streams are terms over S, K and
native stream atoms.  Partial applications of S and K denote the streams
built from their curried behaviour by the finite-prefix graph construction:
position ``code((n) ++ sigma)`` holds ``G(sigma)(n) + 1`` once the finite
prefix ``sigma`` determines the answer and 0 while it does not.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

from .coding import decode_seq, encode_seq
from .kernel import AppResult, Defined, FuelExhausted, STANDARD, Tri, default_fuel, numeral
from .terms import K, S, Term, app, native, normalize, spine, to_sexpr, whnf, iter_subterms

Stream = Callable[[int], int]


class NeedMore(Exception):
    """A finite prefix was read past its end."""

    def __init__(self, prefix: Term):
        super().__init__(prefix.name)
        self.prefix = prefix


class StreamFuel(Exception):
    """A search or reduction ran out of budget."""


class SearchHorizon(StreamFuel):
    """A prefix search passed its length or code-size horizon."""


_CODE_BITS = 1 << 12


@dataclass(frozen=True)
class Generator:
    label: str
    fn: Callable[[int], int]


@dataclass(frozen=True)
class Prefix:
    values: tuple


@dataclass(frozen=True)
class GraphStream:
    """gamma built from a continuous G with a modulus (prefix length per output)."""
    label: str
    G: Callable = field(compare=False)
    modulus: Callable[[int], int] = field(compare=False)


def _const(c: int) -> Callable[[int], int]:
    return lambda n: c


REGISTRY: dict[str, Callable[[], Callable[[int], int]]] = {
    "id": lambda: (lambda n: n),
    "shift": lambda: (lambda n: n + 1),
}


def generator(label: str) -> Term:
    """Registry stream: ``const c``, ``id`` (n) or ``shift`` (n + 1)."""
    label = " ".join(label.split())
    if label.startswith("const "):
        fn = _const(int(label.split()[1]))
    elif label in REGISTRY:
        fn = REGISTRY[label]()
    else:
        raise KeyError(f"unknown stream generator {label!r}")
    return native(label, Generator(label, fn))


def prefix(values: Sequence[int], depth: int = 0) -> Term:
    vals = tuple(int(v) for v in values)
    return native(f"prefix:{depth}:{list(vals)}", Prefix(vals))


def k2_graph_from_continuous(label: str, G: Callable[[Stream], Stream],
                             modulus: Callable[[int], int], arity: int = 1,
                             domain: Optional[object] = None) -> Term:
    """gamma with (gamma beta)(n) = G(beta)(n), for total G on all of Baire space."""
    if arity != 1:
        raise NotImplementedError("only single-argument functionals are supported")
    if domain is not None:
        raise NotImplementedError("partial domains are not supported")
    return native(f"graph:{label}", GraphStream(label, G, modulus))


class K2Backend:
    name = "k2"

    def __init__(self, fuel: Optional[int] = None, prefix_len: int = 8, search: int = 64):
        self.fuel = fuel or default_fuel()
        self.prefix_len = prefix_len
        self.search = search
        self.std = STANDARD
        self._val: dict = {}
        self._eq: dict = {}
        self._depth = 0
        self._work = 0
        self._nest = 0

    # -- contract

    def apply(self, a: Term, b: Term, fuel: Optional[int] = None) -> AppResult:
        budget = fuel or self.fuel
        t = app(a, b)
        nf, steps = normalize(t, budget)
        if nf is None:
            return FuelExhausted(budget)
        if _has_native(nf):
            try:
                self.prefix_of(nf, self.prefix_len)
            except (StreamFuel, NeedMore):
                return FuelExhausted(budget)
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
        out = Tri.IN if na == nb else self.compare(na, nb, self.prefix_len)
        self._eq[key] = out
        return out

    def compare(self, a: Term, b: Term, length: int) -> Tri:
        unknown = False
        for j in range(length):
            try:
                x = self.value(a, j)
                y = self.value(b, j)
            except (StreamFuel, NeedMore):
                unknown = True
                continue
            if x != y:
                return Tri.OUT
        return Tri.UNKNOWN if unknown else Tri.UNREF

    def universe(self) -> list[Term]:
        st = self.std
        return [numeral(n) for n in range(6)] + [
            st.k, st.s, st.kbar, st.p, st.p0, st.p1,
            generator("const 3"), generator("id"), generator("shift"),
        ]

    def show(self, a: Term) -> str:
        return to_sexpr(a)

    def flags(self) -> dict:
        return {"backend": self.name, "fuel": self.fuel, "prefix": self.prefix_len}

    # -- streams

    def prefix_of(self, t: Term, length: int) -> list[int]:
        return [self.value(t, j) for j in range(length)]

    def value(self, t: Term, j: int) -> int:
        """Position j of the stream denoted by t."""
        hit = self._val.get((t, j))
        if hit is not None:
            return hit
        if self._nest == 0:
            self._work = 0
        self._nest += 1
        try:
            return self._value(t, j)
        finally:
            self._nest -= 1

    def _value(self, t: Term, j: int) -> int:
        key = (t, j)
        hit = self._val.get(key)
        if hit is not None:
            return hit
        self._work += 1
        if self._work > self.fuel:
            raise StreamFuel("stream evaluation budget")
        h, _ = whnf(t, self.fuel)
        if h is None:
            raise StreamFuel("reduction budget")
        head, args = spine(h)
        if head is K or head is S:
            v = self._graph_value(h, j)
        elif head.kind != "nat":
            raise TypeError("open term in the stream model")
        elif not args:
            v = self._native_value(head, j)
        else:
            v = self._search(h.fun, h.arg, j, self.search)
        self._val[key] = v
        return v

    def _graph_value(self, h: Term, j: int) -> int:
        seq = decode_seq(j)
        if not seq:
            return 0
        n, sigma = seq[0], seq[1:]
        self._depth += 1
        p = prefix(sigma, self._depth)
        try:
            return self._value(app(h, p), n) + 1
        except NeedMore as e:
            if e.prefix is p:
                return 0
            raise
        except SearchHorizon:
            # not settled by this prefix within the horizon: leave undetermined
            return 0
        finally:
            self._depth -= 1

    def _native_value(self, head: Term, j: int) -> int:
        pl = head.payload
        if isinstance(pl, Generator):
            return pl.fn(j)
        if isinstance(pl, Prefix):
            if j < len(pl.values):
                return pl.values[j]
            raise NeedMore(head)
        if isinstance(pl, GraphStream):
            seq = decode_seq(j)
            if not seq:
                return 0
            n, sigma = seq[0], seq[1:]
            if len(sigma) < pl.modulus(n):
                return 0

            def beta(i: int) -> int:
                if i < len(sigma):
                    return sigma[i]
                raise ValueError(f"modulus of {pl.label} too small at {n}")

            return pl.G(beta)(n) + 1
        raise TypeError(f"unknown native {pl!r}")

    def _search(self, f: Term, x: Term, n: int, limit: int) -> int:
        """(f x)(n) by the least-prefix search."""
        seq = [n]
        for ell in range(limit + 1):
            if ell > len(seq):
                seq.append(self._value(x, ell - 2))
            code = encode_seq(seq[:ell])
            if code.bit_length() > _CODE_BITS:
                break
            v = self._value(f, code)
            if v > 0:
                return v - 1
        raise SearchHorizon("prefix search horizon")


def _has_native(t: Term) -> bool:
    return any(u.kind == "nat" for u in iter_subterms(t))


def k2_apply(backend: K2Backend, alpha: Term, beta: Term, n: int,
             fuel: int) -> Union[int, FuelExhausted]:
    """The literal search: least l <= fuel with alpha(((n) ++ beta) | l) = m + 1."""
    seq = [n]
    for ell in range(fuel + 1):
        if ell > len(seq):
            seq.append(backend.value(beta, ell - 2))
        code = encode_seq(seq[:ell])
        if code.bit_length() > _CODE_BITS:
            break
        v = backend.value(alpha, code)
        if v > 0:
            return v - 1
    return FuelExhausted(fuel)


def stream_of(fn: Callable[[int], int], label: str) -> Term:
    """Wrap an arbitrary deterministic function as a stream element."""
    return native(f"fn:{label}", Generator(label, fn))
