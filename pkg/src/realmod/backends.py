"""Backend registry and the pca-law sweep shared by all three models."""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional

from .heyting import Verdict
from .k2 import K2Backend, StreamFuel, NeedMore, k2_apply, stream_of
from .kernel import Backend, TermBackend, Tri
from .scott import ScottBackend, scott_apply
from .terms import K, S, Term, app, apps, digest, enumerate_closed_terms

BACKENDS = ("term", "scott", "k2")


@dataclass(frozen=True)
class BackendConfig:
    name: str = "term"
    fuel: Optional[int] = None
    trunc: int = 1 << 10        # Scott truncation
    prefix: int = 8             # K2 prefix length


def get_backend(name: str, fuel: Optional[int] = None, trunc: int = 1 << 10,
                prefix: int = 8) -> Backend:
    if name == "term":
        return TermBackend(fuel)
    if name == "scott":
        return ScottBackend(fuel, trunc=trunc)
    if name == "k2":
        return K2Backend(fuel, prefix_len=prefix)
    raise ValueError(f"unknown backend {name!r}; expected one of {', '.join(BACKENDS)}")


def from_config(cfg: BackendConfig) -> Backend:
    return get_backend(cfg.name, cfg.fuel, cfg.trunc, cfg.prefix)


def sample_pool(backend: Backend, extra: int = 12) -> list[Term]:
    """The backend's universe plus the smallest closed terms."""
    out = list(backend.universe())
    out += [t for t in enumerate_closed_terms(extra) if t not in out]
    return out


def random_triples(backend: Backend, count: int, seed: int) -> list[tuple[Term, Term, Term]]:
    pool = sample_pool(backend)
    rng = random.Random(seed)
    return [(rng.choice(pool), rng.choice(pool), rng.choice(pool)) for _ in range(count)]


# ---------------------------------------------------------------- literal cross-checks

def _scott_literal(sb: ScottBackend, a: Term, b: Term, c: Term) -> tuple[bool, bool]:
    """No code below the truncation is IN one side and OUT of the other, literally applied."""
    kab = scott_apply(scott_apply(K, a), b)
    sabc = scott_apply(scott_apply(scott_apply(S, a), b), c)
    rhs = scott_apply(scott_apply(a, c), scott_apply(b, c))
    return (_no_clash(sb, kab, a), _no_clash(sb, sabc, rhs))


def _no_clash(sb: ScottBackend, x: Term, y: Term, bound: int = 64) -> bool:
    for m in range(min(bound, sb.trunc)):
        u, v = sb.mem(x, m), sb.mem(y, m)
        if {u, v} == {Tri.IN, Tri.OUT}:
            return False
    return True


def _k2_literal(kb: K2Backend, a: Term, b: Term) -> bool:
    """(k a) b read by the prefix search at each of the first positions."""
    kst = stream_of(lambda j: kb.value(K, j), "K-stream")
    ka = stream_of(lambda n: _k2_val(kb, kst, a, n), f"K-stream.{digest(a)}")
    seen = 0
    for n in range(kb.prefix_len):
        try:
            got = k2_apply(kb, ka, b, n, 60)
            want = kb.value(a, n)
        except (StreamFuel, NeedMore):
            continue
        if isinstance(got, int):
            if got != want:
                return False
            seen += 1
    return seen > 0


def _k2_val(kb: K2Backend, f: Term, x: Term, n: int) -> int:
    r = k2_apply(kb, f, x, n, 60)
    if not isinstance(r, int):
        raise StreamFuel("literal search budget")
    return r


def _same(backend: Backend, x: Term, y: Term) -> bool:
    try:
        nx, ny = backend.element(x), backend.element(y)
    except ValueError:
        return False
    return backend.equal(nx, ny) in (Tri.IN, Tri.UNREF)


def pca_law_check(backend: Backend, count: int = 50, seed: int = 0, literal: bool = True) -> dict:
    """k a b = a and s a b c = (a c)(b c) on seeded random triples.

    Equality is the backend's canonical one (normal forms, then the graph or
    stream comparison at the backend's truncation).  With ``literal`` the
    Scott and K2 backends also apply the model's own application operation
    and look for a separating code or position.
    """
    rows = []
    fails = 0
    for a, b, c in random_triples(backend, count, seed):
        k_ok = _same(backend, apps(K, a, b), a)
        s_ok = _same(backend, apps(S, a, b, c), app(app(a, c), app(b, c)))
        lit = None
        if literal and isinstance(backend, ScottBackend):
            lit = all(_scott_literal(backend, a, b, c))
        elif literal and isinstance(backend, K2Backend):
            lit = _k2_literal(backend, a, b)
        ok = k_ok and s_ok and lit is not False
        fails += not ok
        rows.append({"a": backend.show(a), "b": backend.show(b), "c": backend.show(c),
                     "k": k_ok, "s": s_ok, "literal": lit})
    v = Verdict("Confirmed", None, "", count, count - fails) if not fails else \
        Verdict("Refuted", None, f"{fails} of {count} triples fail", count, count - fails)
    return {"backend": backend.name, "rows": rows, "failures": fails, "verdict": v}
