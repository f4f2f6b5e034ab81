"""First-order modal formulas: AST, parser, printer and sort checking.

Grammar (loosest binding first)::

    formula  := quant | iff
    quant    := ('forall' | 'exists') binder (',' binder)* '.' formula
    binder   := NAME [':' SORT] | NAME '<' term | NAME 'in' term
    iff      := imp ['<->' imp]
    imp      := disj ['->' imp]
    disj     := conj ('|' conj)*
    conj     := unary ('&' unary)*
    unary    := '~' unary | 'box' unary | 'dia' unary | quant | atom | '(' formula ')'
    atom     := 'false' | 'true' | term ('=' | '!=' | '<' | 'in') term | NAME '(' terms ')' | NAME
    term     := NAME ['(' terms ')'] | DIGITS

Negation, diamond, ``true``, ``!=``, ``<->`` and the bounded binders are sugar
over the core connectives, so printing and reparsing yields the same tree.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from typing import Iterator, Mapping, Optional, Sequence, Union


# ---------------------------------------------------------------- terms

@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Fn:
    name: str
    args: tuple = ()


TermAst = Union[Var, Fn]


# ---------------------------------------------------------------- formulas

@dataclass(frozen=True)
class Atom:
    rel: str                 # "=" for equality
    args: tuple


@dataclass(frozen=True)
class Bot:
    pass


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Imp:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Forall:
    var: str
    sort: Optional[str]
    body: "Formula"


@dataclass(frozen=True)
class Exists:
    var: str
    sort: Optional[str]
    body: "Formula"


@dataclass(frozen=True)
class Box:
    body: "Formula"


Formula = Union[Atom, Bot, And, Or, Imp, Forall, Exists, Box]
BOT = Bot()
TRUE = Imp(BOT, BOT)


def eq(a: TermAst, b: TermAst) -> Atom:
    return Atom("=", (a, b))


def neg(a: Formula) -> Formula:
    return Imp(a, BOT)


def diamond(a: Formula) -> Formula:
    return neg(Box(neg(a)))


# ---------------------------------------------------------------- traversal

def term_vars(t: TermAst) -> set[str]:
    if isinstance(t, Var):
        return {t.name}
    out: set[str] = set()
    for a in t.args:
        out |= term_vars(a)
    return out


def free_vars(f: Formula) -> set[str]:
    if isinstance(f, Atom):
        out: set[str] = set()
        for a in f.args:
            out |= term_vars(a)
        return out
    if isinstance(f, Bot):
        return set()
    if isinstance(f, (And, Or, Imp)):
        return free_vars(f.left) | free_vars(f.right)
    if isinstance(f, (Forall, Exists)):
        return free_vars(f.body) - {f.var}
    return free_vars(f.body)


def free_vars_ordered(f: Formula) -> list[str]:
    """Free variables in order of first occurrence."""
    out: list[str] = []

    def term(t: TermAst, bound: frozenset) -> None:
        if isinstance(t, Var):
            if t.name not in bound and t.name not in out:
                out.append(t.name)
        else:
            for a in t.args:
                term(a, bound)

    def walk(g: Formula, bound: frozenset) -> None:
        if isinstance(g, Atom):
            for a in g.args:
                term(a, bound)
        elif isinstance(g, (And, Or, Imp)):
            walk(g.left, bound)
            walk(g.right, bound)
        elif isinstance(g, (Forall, Exists)):
            walk(g.body, bound | {g.var})
        elif isinstance(g, Box):
            walk(g.body, bound)

    walk(f, frozenset())
    return out


def is_modal(f: Formula) -> bool:
    if isinstance(f, Box):
        return True
    if isinstance(f, (And, Or, Imp)):
        return is_modal(f.left) or is_modal(f.right)
    if isinstance(f, (Forall, Exists)):
        return is_modal(f.body)
    return False


def subformulas(f: Formula) -> Iterator[Formula]:
    yield f
    if isinstance(f, (And, Or, Imp)):
        yield from subformulas(f.left)
        yield from subformulas(f.right)
    elif isinstance(f, (Forall, Exists, Box)):
        yield from subformulas(f.body)


def _fresh(base: str, avoid: set[str]) -> str:
    i = 1
    while f"{base}{i}" in avoid:
        i += 1
    return f"{base}{i}"


def subst_term(t: TermAst, x: str, s: TermAst) -> TermAst:
    if isinstance(t, Var):
        return s if t.name == x else t
    return Fn(t.name, tuple(subst_term(a, x, s) for a in t.args))


def substitute(f: Formula, x: str, s: TermAst) -> Formula:
    """Capture-avoiding f[s/x]."""
    if isinstance(f, Atom):
        return Atom(f.rel, tuple(subst_term(a, x, s) for a in f.args))
    if isinstance(f, Bot):
        return f
    if isinstance(f, (And, Or, Imp)):
        return type(f)(substitute(f.left, x, s), substitute(f.right, x, s))
    if isinstance(f, Box):
        return Box(substitute(f.body, x, s))
    if f.var == x or x not in free_vars(f):
        return f
    fv = term_vars(s)
    if f.var in fv:
        y = _fresh(f.var, fv | free_vars(f.body) | {x})
        body = substitute(f.body, f.var, Var(y))
        return type(f)(y, f.sort, substitute(body, x, s))
    return type(f)(f.var, f.sort, substitute(f.body, x, s))


# ---------------------------------------------------------------- printing

_PREC = {"quant": 0, "iff": 1, "imp": 2, "or": 3, "and": 4, "unary": 5}


def show_term(t: TermAst) -> str:
    if isinstance(t, Var):
        return t.name
    if not t.args:
        return t.name
    return f"{t.name}(" + ", ".join(show_term(a) for a in t.args) + ")"


def show(f: Formula) -> str:
    return _show(f, 0)


def _wrap(s: str, mine: int, ctx: int) -> str:
    return f"({s})" if mine < ctx else s


def _show(f: Formula, ctx: int) -> str:
    if isinstance(f, Bot):
        return "false"
    if f == TRUE:
        return "true"
    if isinstance(f, Atom):
        if f.rel in ("=", "<", "in") and len(f.args) == 2:
            return f"{show_term(f.args[0])} {f.rel} {show_term(f.args[1])}"
        if not f.args:
            return f.rel
        return f"{f.rel}(" + ", ".join(show_term(a) for a in f.args) + ")"
    if isinstance(f, Imp) and isinstance(f.right, Bot):
        return "~" + _show(f.left, _PREC["unary"])
    if isinstance(f, Box):
        return "box " + _show(f.body, _PREC["unary"])
    if isinstance(f, And):
        s = _show(f.left, _PREC["and"]) + " & " + _show(f.right, _PREC["and"] + 1)
        return _wrap(s, _PREC["and"], ctx)
    if isinstance(f, Or):
        s = _show(f.left, _PREC["or"]) + " | " + _show(f.right, _PREC["or"] + 1)
        return _wrap(s, _PREC["or"], ctx)
    if isinstance(f, Imp):
        s = _show(f.left, _PREC["imp"] + 1) + " -> " + _show(f.right, _PREC["imp"])
        return _wrap(s, _PREC["imp"], ctx)
    q = "forall" if isinstance(f, Forall) else "exists"
    binder = f.var if f.sort is None else f"{f.var}:{f.sort}"
    s = f"{q} {binder}. " + _show(f.body, 0)
    # a quantifier swallows everything to its right, so it is wrapped unless it ends its context
    return s if ctx == 0 else f"({s})"


# ---------------------------------------------------------------- parsing

class ParseError(ValueError):
    def __init__(self, msg: str, pos: int, text: str = ""):
        line = text.count("\n", 0, pos) + 1
        col = pos - (text.rfind("\n", 0, pos) + 1) + 1
        super().__init__(f"{msg} at line {line}, column {col}")
        self.pos = pos
        self.line = line
        self.column = col


_TOK = re.compile(r"\s*(?:(<->|->|!=|[()=<,.:&|~])|([A-Za-z_][A-Za-z0-9_']*)|([0-9]+))")
_KEYWORDS = {"forall", "exists", "box", "dia", "in", "true", "false"}


@dataclass
class _Tok:
    kind: str      # op | name | num | end
    text: str
    pos: int


def _lex(text: str) -> list[_Tok]:
    out: list[_Tok] = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            out.append(_Tok("end", "", pos))
            return out
        m = _TOK.match(text, pos)
        if m is None or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", pos, text)
        start = m.start(m.lastindex)
        if m.group(1):
            out.append(_Tok("op", m.group(1), start))
        elif m.group(2):
            out.append(_Tok("name", m.group(2), start))
        else:
            out.append(_Tok("num", m.group(3), start))
        pos = m.end()


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _lex(text)
        self.i = 0

    def peek(self, k: int = 0) -> _Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def err(self, msg: str, tok: Optional[_Tok] = None) -> ParseError:
        tok = tok or self.peek()
        found = "end of input" if tok.kind == "end" else repr(tok.text)
        return ParseError(f"{msg}, found {found}", tok.pos, self.text)

    def take(self) -> _Tok:
        t = self.peek()
        self.i += 1
        return t

    def at(self, text: str) -> bool:
        t = self.peek()
        return t.kind in ("op", "name") and t.text == text

    def expect(self, text: str) -> _Tok:
        if not self.at(text):
            raise self.err(f"expected {text!r}")
        return self.take()

    def name(self, what: str) -> str:
        t = self.peek()
        if t.kind != "name" or t.text in _KEYWORDS:
            raise self.err(f"expected {what}")
        return self.take().text

    # -- formulas

    def formula(self) -> Formula:
        if self.at("forall") or self.at("exists"):
            return self.quant()
        return self.iff()

    def quant(self) -> Formula:
        q = self.take().text
        binders = [self.binder()]
        while self.at(","):
            self.take()
            binders.append(self.binder())
        self.expect(".")
        body = self.formula()
        for var, sort, guard in reversed(binders):
            if guard is None:
                body = Forall(var, sort, body) if q == "forall" else Exists(var, sort, body)
            elif q == "forall":
                body = Forall(var, sort, Imp(guard, body))
            else:
                body = Exists(var, sort, And(guard, body))
        return body

    def binder(self) -> tuple[str, Optional[str], Optional[Formula]]:
        var = self.name("a bound variable")
        if self.at(":"):
            self.take()
            return var, self.name("a sort name"), None
        if self.at("<") or self.at("in"):
            rel = self.take().text
            return var, None, Atom(rel, (Var(var), self.term()))
        return var, None, None

    def iff(self) -> Formula:
        a = self.imp()
        if self.at("<->"):
            self.take()
            b = self.imp()
            return And(Imp(a, b), Imp(b, a))
        return a

    def imp(self) -> Formula:
        a = self.disj()
        if self.at("->"):
            self.take()
            if self.at("forall") or self.at("exists"):
                return Imp(a, self.quant())
            return Imp(a, self.imp())
        return a

    def disj(self) -> Formula:
        a = self.conj()
        while self.at("|"):
            self.take()
            a = Or(a, self.conj())
        return a

    def conj(self) -> Formula:
        a = self.unary()
        while self.at("&"):
            self.take()
            a = And(a, self.unary())
        return a

    def unary(self) -> Formula:
        if self.at("~"):
            self.take()
            return neg(self.unary())
        if self.at("box"):
            self.take()
            return Box(self.unary())
        if self.at("dia"):
            self.take()
            return diamond(self.unary())
        if self.at("forall") or self.at("exists"):
            return self.quant()
        if self.at("("):
            save = self.i
            self.take()
            try:
                f = self.formula()
                self.expect(")")
                if not self.peek().text in ("=", "!=", "<", "in"):
                    return f
            except ParseError:
                pass
            self.i = save
        return self.atom()

    def atom(self) -> Formula:
        if self.at("false"):
            self.take()
            return BOT
        if self.at("true"):
            self.take()
            return TRUE
        start = self.peek()
        if start.kind not in ("name", "num") or start.text in _KEYWORDS:
            raise self.err("expected a formula")
        t = self.term()
        op = self.peek()
        if op.text in ("=", "!=", "<", "in") and op.kind in ("op", "name"):
            self.take()
            s = self.term()
            if op.text == "!=":
                return neg(Atom("=", (t, s)))
            return Atom(op.text, (t, s))
        if isinstance(t, Fn) and start.kind == "name":
            return Atom(t.name, t.args)
        if isinstance(t, Var):
            return Atom(t.name, ())
        raise self.err("expected a relation", start)

    # -- terms

    def term(self) -> TermAst:
        t = self.peek()
        if t.kind == "num":
            self.take()
            return Fn(t.text)
        if t.kind == "op" and t.text == "(":
            self.take()
            inner = self.term()
            self.expect(")")
            return inner
        name = self.name("a term")
        if self.at("("):
            self.take()
            args = [self.term()]
            while self.at(","):
                self.take()
                args.append(self.term())
            self.expect(")")
            return Fn(name, tuple(args))
        return Var(name)


def parse_formula(text: str, signature: Optional["Signature"] = None) -> Formula:
    """Parse, then resolve names and sorts against ``signature`` when given."""
    p = _Parser(text)
    f = p.formula()
    if p.peek().kind != "end":
        raise p.err("unexpected trailing input")
    if signature is not None:
        f = signature.check(f, text=text)
    return f


def parse_term(text: str) -> TermAst:
    p = _Parser(text)
    t = p.term()
    if p.peek().kind != "end":
        raise p.err("unexpected trailing input")
    return t


# ---------------------------------------------------------------- signatures

class SortError(ValueError):
    pass


@dataclass(frozen=True)
class Signature:
    """Sorts plus symbol arities; digit literals have ``literal_sort``.

    Names in a parsed formula are variables by default; a bare name that is a
    declared 0-ary function becomes a constant during ``check``.
    """

    sorts: tuple
    functions: Mapping[str, tuple] = field(default_factory=dict)   # name -> (arg sorts, result)
    relations: Mapping[str, tuple] = field(default_factory=dict)   # name -> arg sorts
    literal_sort: Optional[str] = None

    def __post_init__(self) -> None:
        if not self.sorts:
            raise SortError("a signature needs at least one sort")
        for name, (args, res) in self.functions.items():
            for s in (*args, res):
                if s not in self.sorts:
                    raise SortError(f"function {name} uses unknown sort {s}")
        for name, args in self.relations.items():
            if name == "=":
                raise SortError("equality is built in at every sort")
            for s in args:
                if s not in self.sorts:
                    raise SortError(f"relation {name} uses unknown sort {s}")

    @property
    def default_sort(self) -> str:
        return self.sorts[0]

    def extend(self, relations: Mapping[str, tuple]) -> "Signature":
        clash = set(relations) & (set(self.relations) | set(self.functions))
        if clash:
            raise SortError(f"symbol already declared: {sorted(clash)}")
        return replace(self, relations={**self.relations, **relations})

    def check(self, f: Formula, env: Optional[Mapping[str, str]] = None, text: str = "") -> Formula:
        """Well-sortedness; fills omitted binder sorts and turns constants into Fn nodes."""
        return self._formula(f, dict(env or {}), text)

    def _err(self, msg: str, text: str) -> SortError:
        return SortError(f"{msg} in {text!r}" if text else msg)

    def _term(self, t: TermAst, env: dict, text: str) -> tuple[TermAst, str]:
        if isinstance(t, Var):
            if t.name in env:
                return t, env[t.name]
            spec = self.functions.get(t.name)
            if spec is not None and not spec[0]:
                return Fn(t.name), spec[1]
            # free variables take the default sort
            env[t.name] = self.default_sort
            return t, self.default_sort
        if t.name.isdigit():
            if self.literal_sort is None:
                raise self._err(f"numeral literal {t.name} has no sort", text)
            return t, self.literal_sort
        spec = self.functions.get(t.name)
        if spec is None:
            raise self._err(f"unknown function symbol {t.name}", text)
        args, res = spec
        if len(args) != len(t.args):
            raise self._err(f"{t.name} expects {len(args)} arguments, got {len(t.args)}", text)
        new = []
        for a, want in zip(t.args, args):
            a2, got = self._term(a, env, text)
            if got != want:
                raise self._err(f"argument of {t.name} has sort {got}, expected {want}", text)
            new.append(a2)
        return Fn(t.name, tuple(new)), res

    def _formula(self, f: Formula, env: dict, text: str) -> Formula:
        if isinstance(f, Bot):
            return f
        if isinstance(f, Atom):
            typed = [self._term(a, env, text) for a in f.args]
            args = tuple(a for a, _ in typed)
            sorts = [s for _, s in typed]
            if f.rel == "=":
                if sorts[0] != sorts[1]:
                    raise self._err(f"equality between sorts {sorts[0]} and {sorts[1]}", text)
                return Atom("=", args)
            spec = self.relations.get(f.rel)
            if spec is None:
                raise self._err(f"unknown relation symbol {f.rel}", text)
            if len(spec) != len(args):
                raise self._err(f"{f.rel} expects {len(spec)} arguments, got {len(args)}", text)
            for got, want in zip(sorts, spec):
                if got != want:
                    raise self._err(f"argument of {f.rel} has sort {got}, expected {want}", text)
            return Atom(f.rel, args)
        if isinstance(f, (And, Or, Imp)):
            return type(f)(self._formula(f.left, env, text), self._formula(f.right, env, text))
        if isinstance(f, Box):
            return Box(self._formula(f.body, env, text))
        sort = f.sort or self.default_sort
        if sort not in self.sorts:
            raise self._err(f"unknown sort {sort}", text)
        inner = dict(env)
        inner[f.var] = sort
        body = self._formula(f.body, inner, text)
        for k, v in inner.items():
            if k != f.var and k not in env:
                env[k] = v
        return type(f)(f.var, sort, body)
