"""Hash-consed combinatory terms and fuel-bounded weak reduction.

Terms are built from the constants S and K, variables, opaque native atoms
(used by the Scott and Kleene-second-model backends) and binary application.
Application nodes are interned, so structurally equal terms are usually the
same Python object; equality still falls back to a structural comparison so
that trimming the intern table never changes semantics.

Weak reduction has exactly two rules, ``K a b -> a`` and ``S a b c -> a c (b c)``.
Normalisation is leftmost-outermost: reduce the head until it is stuck, then
normalise the arguments left to right.  Step counts are compositional, which
lets every node memoise its normal form together with the number of steps that
produced it; a cached result is only reused when the caller has that much fuel
left, so answers never depend on evaluation history.
"""

from __future__ import annotations

import hashlib
from typing import Any, Iterable, Iterator, Optional

_CONST_S = "S"
_CONST_K = "K"
_VAR = "var"
_NAT = "nat"
_APP = "app"

_EMPTY: frozenset = frozenset()


class Term:
    __slots__ = (
        "kind", "fun", "arg", "name", "payload", "_hash", "fv", "size",
        "_nf", "_cost", "_fail", "_hnf", "_hcost", "_hfail", "__weakref__",
    )

    def __init__(self, kind: str, fun=None, arg=None, name: str = "", payload: Any = None):
        self.kind = kind
        self.fun = fun
        self.arg = arg
        self.name = name
        self.payload = payload
        self._nf = None
        self._cost = 0
        self._fail = -1
        self._hnf = None
        self._hcost = 0
        self._hfail = -1
        if kind is _APP:
            self._hash = hash((_APP, fun._hash, arg._hash))
            ffv, xfv = fun.fv, arg.fv
            self.fv = ffv | xfv if (ffv or xfv) else _EMPTY
            self.size = fun.size + arg.size
        else:
            self._hash = hash((kind, name))
            self.fv = frozenset([name]) if kind is _VAR else _EMPTY
            self.size = 1

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if not isinstance(other, Term) or self._hash != other._hash:
            return False
        return _struct_eq(self, other)

    def __ne__(self, other) -> bool:
        return not self.__eq__(other)

    def __repr__(self) -> str:
        return f"Term({to_sexpr(self, limit=200)})"

    def __str__(self) -> str:
        return to_sexpr(self)

    @property
    def is_app(self) -> bool:
        return self.kind is _APP

    @property
    def is_closed(self) -> bool:
        return not self.fv

    def __call__(self, *args: "Term") -> "Term":
        t = self
        for a in args:
            t = app(t, a)
        return t


def _struct_eq(a: Term, b: Term) -> bool:
    todo = [(a, b)]
    seen = set()
    while todo:
        x, y = todo.pop()
        if x is y:
            continue
        if x._hash != y._hash or x.kind != y.kind:
            return False
        if x.kind is _APP:
            key = (id(x), id(y))
            if key in seen:
                continue
            seen.add(key)
            todo.append((x.fun, y.fun))
            todo.append((x.arg, y.arg))
        elif x.name != y.name:
            return False
    return True


S = Term(_CONST_S, name="S")
K = Term(_CONST_K, name="K")

_APPS: dict = {}
_ATOMS: dict = {}
_TRIM_AT = 1_500_000


def app(f: Term, x: Term) -> Term:
    key = (f, x)
    node = _APPS.get(key)
    if node is None:
        if len(_APPS) > _TRIM_AT:
            _APPS.clear()
        node = Term(_APP, f, x)
        _APPS[key] = node
    return node


def var(name: str) -> Term:
    key = (_VAR, name)
    node = _ATOMS.get(key)
    if node is None:
        node = _ATOMS[key] = Term(_VAR, name=name)
    return node


def native(name: str, payload: Any) -> Term:
    """An opaque atom; ``name`` must determine ``payload`` uniquely."""
    key = (_NAT, name)
    node = _ATOMS.get(key)
    if node is None:
        node = _ATOMS[key] = Term(_NAT, name=name, payload=payload)
    return node


def apps(f: Term, *xs: Term) -> Term:
    for x in xs:
        f = app(f, x)
    return f


def spine(t: Term) -> tuple[Term, list[Term]]:
    args = []
    while t.kind is _APP:
        args.append(t.arg)
        t = t.fun
    args.reverse()
    return t, args


def is_const(t: Term) -> bool:
    return t is S or t is K


def is_native(t: Term) -> bool:
    return t.kind is _NAT


def is_var(t: Term) -> bool:
    return t.kind is _VAR


def is_normal(t: Term) -> bool:
    """True when no K a b or S a b c redex occurs anywhere in t."""
    todo = [t]
    seen = set()
    while todo:
        u = todo.pop()
        if u.kind is not _APP or id(u) in seen:
            continue
        seen.add(id(u))
        h, args = spine(u)
        if (h is K and len(args) >= 2) or (h is S and len(args) >= 3):
            return False
        todo.extend(args)
    return True


def clear_memo() -> None:
    """Drop the intern table (normal forms cached on live nodes survive)."""
    _APPS.clear()


# ---------------------------------------------------------------- reduction

class _Fail(Exception):
    pass


def normalize(t: Term, fuel: int) -> tuple[Optional[Term], int]:
    """Weak normal form of t within ``fuel`` steps: (nf, steps) or (None, steps)."""
    used = 0
    stack: list[list] = []
    node = t
    val: Optional[Term] = None
    while True:
        remaining = fuel - used
        nf = node._nf
        if nf is not None:
            if node._cost > remaining:
                return _fail(stack, node, remaining, fuel)
            used += node._cost
            val = nf
        elif node._fail >= remaining:
            return _fail(stack, node, remaining, fuel)
        else:
            start = used
            args: list[Term] = []
            cur = node
            while True:
                kind = cur.kind
                if kind is _APP:
                    args.append(cur.arg)
                    cur = cur.fun
                elif kind is _CONST_K and len(args) >= 2:
                    if used >= fuel:
                        return _fail(stack, node, remaining, fuel)
                    used += 1
                    x = args.pop()
                    args.pop()
                    cur = x
                elif kind is _CONST_S and len(args) >= 3:
                    if used >= fuel:
                        return _fail(stack, node, remaining, fuel)
                    used += 1
                    a = args.pop()
                    b = args.pop()
                    c = args.pop()
                    args.append(app(b, c))
                    args.append(c)
                    cur = a
                else:
                    break
            if not args:
                node._nf = cur
                node._cost = used - start
                val = cur
            else:
                args.reverse()
                stack.append([node, cur, args, [], start, remaining])
                node = args[0]
                continue
        # return val to the enclosing frames
        while stack:
            fr = stack[-1]
            done = fr[3]
            done.append(val)
            if len(done) < len(fr[2]):
                node = fr[2][len(done)]
                break
            r = fr[1]
            for a in done:
                r = app(r, a)
            orig = fr[0]
            orig._nf = r
            orig._cost = used - fr[4]
            stack.pop()
            val = r
        else:
            return val, used


def _fail(stack, node, remaining, fuel):
    if node._fail < remaining:
        node._fail = remaining
    for fr in stack:
        if fr[0]._fail < fr[5]:
            fr[0]._fail = fr[5]
    return None, fuel


def whnf(t: Term, fuel: int) -> tuple[Optional[Term], int]:
    """Head-reduce t until its head is stuck; (term, steps) or (None, steps)."""
    if t._hnf is not None:
        if t._hcost <= fuel:
            return t._hnf, t._hcost
        return None, fuel
    if t._hfail >= fuel:
        return None, fuel
    used = 0
    args: list[Term] = []
    cur = t
    while True:
        kind = cur.kind
        if kind is _APP:
            args.append(cur.arg)
            cur = cur.fun
        elif kind is _CONST_K and len(args) >= 2:
            if used >= fuel:
                t._hfail = fuel
                return None, fuel
            used += 1
            x = args.pop()
            args.pop()
            cur = x
        elif kind is _CONST_S and len(args) >= 3:
            if used >= fuel:
                t._hfail = fuel
                return None, fuel
            used += 1
            a = args.pop()
            b = args.pop()
            c = args.pop()
            args.append(app(b, c))
            args.append(c)
            cur = a
        else:
            break
    for a in reversed(args):
        cur = app(cur, a)
    t._hnf = cur
    t._hcost = used
    return cur, used


# ---------------------------------------------------------------- syntax

def to_sexpr(t: Term, limit: int = 4000) -> str:
    """S-expression text, e.g. ``(S (K S) K)``; huge terms print as a digest."""
    if t.size > limit:
        return f"<term size={t.size} sha={digest(t)}>"
    out: list[str] = []
    todo: list = [t]
    while todo:
        u = todo.pop()
        if isinstance(u, str):
            out.append(u)
            continue
        if u.kind is not _APP:
            out.append(u.name)
            continue
        h, args = spine(u)
        todo.append(")")
        for a in reversed(args):
            todo.append(a)
            todo.append(" ")
        todo.append(h)
        todo.append("(")
    return "".join(out)


def digest(t: Term) -> str:
    """Stable short hash of a term's structure (independent of process hash seeds)."""
    memo: dict[int, bytes] = {}
    todo = [t]
    while todo:
        u = todo[-1]
        if id(u) in memo:
            todo.pop()
            continue
        if u.kind is not _APP:
            memo[id(u)] = hashlib.sha1(("A" + u.kind + ":" + u.name).encode()).digest()
            todo.pop()
            continue
        f, x = memo.get(id(u.fun)), memo.get(id(u.arg))
        if f is None:
            todo.append(u.fun)
            continue
        if x is None:
            todo.append(u.arg)
            continue
        memo[id(u)] = hashlib.sha1(b"P" + f + x).digest()
        todo.pop()
    return memo[id(t)].hex()[:12]


class SexprError(ValueError):
    def __init__(self, msg: str, pos: int):
        super().__init__(f"{msg} at position {pos}")
        self.pos = pos


def _tokens(text: str) -> Iterator[tuple[str, int]]:
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
        elif c in "()":
            yield c, i
            i += 1
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in "()":
                j += 1
            yield text[i:j], i
            i = j


def parse_sexpr(text: str, env: Optional[dict[str, Term]] = None) -> Term:
    """Parse ``(S (K S) K)``-style text; names other than S, K, I come from env."""
    env = env or {}
    toks = list(_tokens(text))
    if not toks:
        raise SexprError("empty term", 0)
    pos = 0

    def atom(tok: str, at: int) -> Term:
        if tok == "S":
            return S
        if tok == "K":
            return K
        if tok == "I":
            return app(app(S, K), K)
        if tok in env:
            return env[tok]
        raise SexprError(f"unknown atom {tok!r}", at)

    def parse() -> Term:
        nonlocal pos
        if pos >= len(toks):
            raise SexprError("unexpected end of input", len(text))
        tok, at = toks[pos]
        pos += 1
        if tok == ")":
            raise SexprError("unexpected ')'", at)
        if tok != "(":
            return atom(tok, at)
        items = []
        while True:
            if pos >= len(toks):
                raise SexprError("unclosed '('", at)
            if toks[pos][0] == ")":
                pos += 1
                break
            items.append(parse())
        if not items:
            raise SexprError("empty application", at)
        return apps(items[0], *items[1:])

    t = parse()
    if pos != len(toks):
        raise SexprError("trailing input", toks[pos][1])
    return t


# ---------------------------------------------------------------- enumeration

def closed_terms_of_size(n: int) -> list[Term]:
    """Closed SK terms with n leaves, ordered by (left, right) with K before S."""
    return list(_of_size(n))


_BY_SIZE: dict[int, list[Term]] = {}


def _of_size(n: int) -> list[Term]:
    got = _BY_SIZE.get(n)
    if got is not None:
        return got
    if n == 1:
        out = [K, S]
    else:
        out = []
        for left in range(1, n):
            for f in _of_size(left):
                for x in _of_size(n - left):
                    out.append(app(f, x))
    _BY_SIZE[n] = out
    return out


def enumerate_closed_terms(count: int) -> list[Term]:
    """The ``count`` smallest closed SK terms, by size then the fixed order above."""
    out: list[Term] = []
    n = 1
    while len(out) < count:
        out.extend(_of_size(n)[: count - len(out)])
        n += 1
    return out


def iter_subterms(t: Term) -> Iterable[Term]:
    seen = set()
    todo = [t]
    while todo:
        u = todo.pop()
        if id(u) in seen:
            continue
        seen.add(id(u))
        yield u
        if u.kind is _APP:
            todo.append(u.fun)
            todo.append(u.arg)
