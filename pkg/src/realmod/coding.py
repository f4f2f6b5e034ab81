"""Natural-number codings: Cantor pairing, finite-set codes, finite-sequence codes."""

from __future__ import annotations

from math import isqrt
from typing import Iterator, Sequence


def pair(n: int, m: int) -> int:
    """Cantor pairing <n, m>."""
    s = n + m
    return s * (s + 1) // 2 + m


def unpair(z: int) -> tuple[int, int]:
    w = (isqrt(8 * z + 1) - 1) // 2
    m = z - w * (w + 1) // 2
    return w - m, m


def finite_set(n: int) -> frozenset[int]:
    """d_n: the set of bit positions set in n."""
    out = []
    i = 0
    while n:
        if n & 1:
            out.append(i)
        n >>= 1
        i += 1
    return frozenset(out)


def set_code(xs) -> int:
    """Inverse of finite_set."""
    n = 0
    for x in xs:
        n |= 1 << x
    return n


def subcodes(n: int) -> Iterator[int]:
    """All codes l with d_l a subset of d_n, in increasing order."""
    sub = 0
    while True:
        yield sub
        if sub == n:
            return
        sub = (sub - n) & n


def encode_seq(seq: Sequence[int]) -> int:
    """Bijective code of a finite sequence: () -> 0, s+(x,) -> 1 + <code(s), x>."""
    c = 0
    for x in seq:
        c = 1 + pair(c, x)
    return c


def decode_seq(c: int) -> tuple[int, ...]:
    out = []
    while c:
        c, x = unpair(c - 1)
        out.append(x)
    out.reverse()
    return tuple(out)


def nested_unpair(z: int, k: int) -> tuple[list[int], int]:
    """Split z = <n1, <n2, ... <nk, m>>> into ([n1..nk], m)."""
    ns = []
    for _ in range(k):
        n, z = unpair(z)
        ns.append(n)
    return ns, z


def nested_pair(ns: Sequence[int], m: int) -> int:
    z = m
    for n in reversed(ns):
        z = pair(n, z)
    return z
