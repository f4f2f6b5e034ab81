"""Quantifier-free natural deduction over Heyting prealgebra terms.

Formulas are built from reductions ``t <= s`` with conjunction, disjunction,
implication and falsum.  A derivation is an explicit tree; ``validate``
checks every rule instance and ``extract`` turns a valid derivation into a
closed combinator that realizes its conclusion.  Contexts are realized by
left-nested pairs, so the hypothesis added last sits in ``p1 x``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Mapping, Optional, Sequence, Union

from . import heyting as H
from .heyting import TV, Heyting, Verdict, WITNESS_TERMS, combine, instantiations
from .kernel import STANDARD, compile_abstraction, lam
from .sexp import Sexp, dump, read_all
from .terms import K, S, Term, app, apps, normalize, var

# ---------------------------------------------------------------- terms and formulas


@dataclass(frozen=True)
class HVar:
    name: str


@dataclass(frozen=True)
class HConst:
    name: str          # top | bot


@dataclass(frozen=True)
class HBin:
    op: str            # and | or | imp
    left: "HTerm"
    right: "HTerm"


HTerm = Union[HVar, HConst, HBin]
TOP, BOT = HConst("top"), HConst("bot")


def hand(a: HTerm, b: HTerm) -> HTerm:
    return HBin("and", a, b)


def hor(a: HTerm, b: HTerm) -> HTerm:
    return HBin("or", a, b)


def himp(a: HTerm, b: HTerm) -> HTerm:
    return HBin("imp", a, b)


def om(d: HTerm, x: HTerm) -> HTerm:
    """The generalized double negation (x => d) => d."""
    return himp(himp(x, d), d)


@dataclass(frozen=True)
class Le:
    left: HTerm
    right: HTerm


@dataclass(frozen=True)
class Falsum:
    pass


@dataclass(frozen=True)
class Conn:
    op: str            # conj | disj | then
    left: "Formula"
    right: "Formula"


Formula = Union[Le, Falsum, Conn]
FALSUM = Falsum()


def conj(a: Formula, b: Formula) -> Formula:
    return Conn("conj", a, b)


def disj(a: Formula, b: Formula) -> Formula:
    return Conn("disj", a, b)


def then(a: Formula, b: Formula) -> Formula:
    return Conn("then", a, b)


x_, y_, z_, d_ = HVar("x"), HVar("y"), HVar("z"), HVar("d")


def term_vars(t: HTerm) -> set[str]:
    if isinstance(t, HVar):
        return {t.name}
    if isinstance(t, HConst):
        return set()
    return term_vars(t.left) | term_vars(t.right)


def formula_vars(f: Formula) -> set[str]:
    if isinstance(f, Le):
        return term_vars(f.left) | term_vars(f.right)
    if isinstance(f, Falsum):
        return set()
    return formula_vars(f.left) | formula_vars(f.right)


def subst_term(t: HTerm, m: Mapping[str, HTerm]) -> HTerm:
    if isinstance(t, HVar):
        return m.get(t.name, t)
    if isinstance(t, HConst):
        return t
    return HBin(t.op, subst_term(t.left, m), subst_term(t.right, m))


def subst_formula(f: Formula, m: Mapping[str, HTerm]) -> Formula:
    if isinstance(f, Le):
        return Le(subst_term(f.left, m), subst_term(f.right, m))
    if isinstance(f, Falsum):
        return f
    return Conn(f.op, subst_formula(f.left, m), subst_formula(f.right, m))


# ---------------------------------------------------------------- printing / parsing

def term_sexp(t: HTerm) -> Sexp:
    if isinstance(t, HVar):
        return t.name
    if isinstance(t, HConst):
        return t.name
    if t.op == "imp" and isinstance(t.left, HBin) and t.left.op == "imp" and t.left.right == t.right:
        return ["om", term_sexp(t.right), term_sexp(t.left.left)]
    return [t.op, term_sexp(t.left), term_sexp(t.right)]


def formula_sexp(f: Formula) -> Sexp:
    if isinstance(f, Le):
        return ["le", term_sexp(f.left), term_sexp(f.right)]
    if isinstance(f, Falsum):
        return "false"
    return [f.op, formula_sexp(f.left), formula_sexp(f.right)]


class ParseError(ValueError):
    pass


def parse_term(s: Sexp) -> HTerm:
    if isinstance(s, str):
        if s in ("top", "bot"):
            return HConst(s)
        if not s.isidentifier():
            raise ParseError(f"bad term atom {s!r}")
        return HVar(s)
    if len(s) == 2 and s[0] == "neg":
        return himp(parse_term(s[1]), BOT)
    if len(s) != 3:
        raise ParseError(f"bad term form {dump(s)}")
    if s[0] == "om":
        return om(parse_term(s[1]), parse_term(s[2]))
    if s[0] not in ("and", "or", "imp"):
        raise ParseError(f"unknown term connective {s[0]!r}")
    return HBin(s[0], parse_term(s[1]), parse_term(s[2]))


def parse_formula(s: Sexp) -> Formula:
    if s == "false":
        return FALSUM
    if isinstance(s, str) or len(s) != 3:
        raise ParseError(f"bad formula {dump(s) if not isinstance(s, str) else s}")
    if s[0] == "le":
        return Le(parse_term(s[1]), parse_term(s[2]))
    if s[0] not in ("conj", "disj", "then"):
        raise ParseError(f"unknown formula connective {s[0]!r}")
    return Conn(s[0], parse_formula(s[1]), parse_formula(s[2]))


def show_term(t: HTerm) -> str:
    return dump(term_sexp(t), width=10_000)


def show_formula(f: Formula) -> str:
    return dump(formula_sexp(f), width=10_000)


# ---------------------------------------------------------------- axioms

AXIOMS: dict[str, tuple[Formula, str]] = {
    "refl": (Le(x_, x_), "e9"),
    "trans": (then(conj(Le(x_, y_), Le(y_, z_)), Le(x_, z_)), "e10"),
    "meet_l": (Le(hand(x_, y_), x_), "e5"),
    "meet_r": (Le(hand(x_, y_), y_), "e6"),
    "meet_univ": (then(conj(Le(z_, x_), Le(z_, y_)), Le(z_, hand(x_, y_))), "e4"),
    "join_l": (Le(x_, hor(x_, y_)), "e1"),
    "join_r": (Le(y_, hor(x_, y_)), "e2"),
    "join_univ": (then(conj(Le(x_, z_), Le(y_, z_)), Le(hor(x_, y_), z_)), "e3"),
    "top": (Le(x_, TOP), "e7"),
    "bot": (Le(BOT, x_), "e8"),
    "curry": (then(Le(hand(x_, y_), z_), Le(y_, himp(x_, z_))), "e11"),
    "uncurry": (then(Le(y_, himp(x_, z_)), Le(hand(x_, y_), z_)), "e12"),
}


# ---------------------------------------------------------------- derivations

@dataclass(frozen=True)
class Ax:
    name: str


@dataclass(frozen=True)
class Hyp:
    index: int


@dataclass(frozen=True)
class Lemma:
    name: str


@dataclass(frozen=True)
class Subst:
    body: "Deriv"
    mapping: tuple          # ((var, HTerm), ...)


@dataclass(frozen=True)
class AndI:
    left: "Deriv"
    right: "Deriv"


@dataclass(frozen=True)
class AndE:
    side: int
    body: "Deriv"


@dataclass(frozen=True)
class OrI:
    side: int
    body: "Deriv"
    other: Formula


@dataclass(frozen=True)
class OrE:
    body: "Deriv"
    left: "Deriv"
    right: "Deriv"


@dataclass(frozen=True)
class ImpI:
    hyp: Formula
    body: "Deriv"


@dataclass(frozen=True)
class ImpE:
    fun: "Deriv"
    arg: "Deriv"


@dataclass(frozen=True)
class ExFalso:
    body: "Deriv"
    goal: Formula


Deriv = Union[Ax, Hyp, Lemma, Subst, AndI, AndE, OrI, OrE, ImpI, ImpE, ExFalso]


class RuleError(ValueError):
    def __init__(self, path: str, msg: str):
        super().__init__(f"{path}: {msg}")
        self.path = path


def subst(d: Deriv, **m: HTerm) -> Subst:
    return Subst(d, tuple(sorted(m.items())))


def _expect_conn(f: Formula, op: str, path: str, rule: str) -> Conn:
    if not isinstance(f, Conn) or f.op != op:
        raise RuleError(path, f"{rule} needs a {op} formula, got {show_formula(f)}")
    return f


def conclusion(d: Deriv, ctx: Sequence[Formula] = (), lemmas: Optional[Mapping[str, Formula]] = None,
               path: str = "root") -> Formula:
    """The conclusion of d in context ctx, raising RuleError on a bad rule instance."""
    lemmas = LAWS if lemmas is None else lemmas
    if isinstance(d, Ax):
        if d.name not in AXIOMS:
            raise RuleError(path, f"unknown axiom {d.name!r}")
        return AXIOMS[d.name][0]
    if isinstance(d, Hyp):
        if not 0 <= d.index < len(ctx):
            raise RuleError(path, f"hypothesis {d.index} not in a context of {len(ctx)}")
        return ctx[d.index]
    if isinstance(d, Lemma):
        if d.name not in lemmas:
            raise RuleError(path, f"unknown lemma {d.name!r}")
        return lemmas[d.name]
    if isinstance(d, Subst):
        inner = conclusion(d.body, ctx, lemmas, path + "/subst")
        names = {v for v, t in d.mapping if t != HVar(v)}
        clash = set()
        if ctx and _uses_hyp(d.body):
            clash = names & set().union(*(formula_vars(f) for f in ctx))
        if clash:
            raise RuleError(path, f"substituted variables {sorted(clash)} occur in open hypotheses")
        return subst_formula(inner, dict(d.mapping))
    if isinstance(d, AndI):
        return conj(conclusion(d.left, ctx, lemmas, path + "/l"),
                    conclusion(d.right, ctx, lemmas, path + "/r"))
    if isinstance(d, AndE):
        f = _expect_conn(conclusion(d.body, ctx, lemmas, path + "/e"), "conj", path, "and-elim")
        return f.left if d.side == 0 else f.right
    if isinstance(d, OrI):
        f = conclusion(d.body, ctx, lemmas, path + "/i")
        return disj(f, d.other) if d.side == 0 else disj(d.other, f)
    if isinstance(d, OrE):
        f = _expect_conn(conclusion(d.body, ctx, lemmas, path + "/c"), "disj", path, "or-elim")
        a = conclusion(d.left, list(ctx) + [f.left], lemmas, path + "/l")
        b = conclusion(d.right, list(ctx) + [f.right], lemmas, path + "/r")
        if a != b:
            raise RuleError(path, f"or-elim branches disagree: {show_formula(a)} vs {show_formula(b)}")
        return a
    if isinstance(d, ImpI):
        return then(d.hyp, conclusion(d.body, list(ctx) + [d.hyp], lemmas, path + "/b"))
    if isinstance(d, ImpE):
        f = _expect_conn(conclusion(d.fun, ctx, lemmas, path + "/f"), "then", path, "imp-elim")
        a = conclusion(d.arg, ctx, lemmas, path + "/a")
        if a != f.left:
            raise RuleError(path, f"imp-elim argument proves {show_formula(a)}, "
                                  f"expected {show_formula(f.left)}")
        return f.right
    if isinstance(d, ExFalso):
        f = conclusion(d.body, ctx, lemmas, path + "/b")
        if not isinstance(f, Falsum):
            raise RuleError(path, f"ex falso needs falsum, got {show_formula(f)}")
        return d.goal
    raise RuleError(path, f"unknown node {type(d).__name__}")


def _uses_hyp(d: Deriv) -> bool:
    if isinstance(d, Hyp):
        return True
    if isinstance(d, (Ax, Lemma)):
        return False
    if isinstance(d, ImpI):
        return True  # conservative: the body may use outer hypotheses
    kids = [getattr(d, f) for f in ("body", "left", "right", "fun", "arg") if hasattr(d, f)]
    return any(_uses_hyp(k) for k in kids if not isinstance(k, (Le, Falsum, Conn)))


def validate_derivation(d: Deriv, expected: Optional[Formula] = None,
                        lemmas: Optional[Mapping[str, Formula]] = None) -> Formula:
    """Check a closed derivation, optionally against its stated conclusion."""
    f = conclusion(d, (), lemmas)
    if expected is not None and f != expected:
        raise RuleError("root", f"proves {show_formula(f)}, stated {show_formula(expected)}")
    return f


# ---------------------------------------------------------------- extraction

_X, _Y = var("x"), var("y")
_P, _P0, _P1 = STANDARD.p, STANDARD.p0, STANDARD.p1
_IOTA = lam(r"\a b c. a b c")


def _lam_x(body: Term) -> Term:
    return compile_abstraction(body, ["x"])


def extract_open(d: Deriv, ctx: Sequence[Formula] = (),
                 lemma_witness: Optional[Mapping[str, Term]] = None) -> Term:
    """tau with tau applied to a context realizer giving a realizer of the conclusion."""
    lw = lemma_witness if lemma_witness is not None else LEMMA_WITNESSES
    if isinstance(d, Ax):
        return app(K, WITNESS_TERMS[AXIOMS[d.name][1]])
    if isinstance(d, Hyp):
        t = _X
        for _ in range(len(ctx) - 1 - d.index):
            t = app(_P0, t)
        return _lam_x(app(_P1, t))
    if isinstance(d, Lemma):
        return app(K, lw[d.name])
    if isinstance(d, Subst):
        return extract_open(d.body, ctx, lw)
    if isinstance(d, AndI):
        a, b = extract_open(d.left, ctx, lw), extract_open(d.right, ctx, lw)
        return _lam_x(apps(_P, app(a, _X), app(b, _X)))
    if isinstance(d, AndE):
        a = extract_open(d.body, ctx, lw)
        return _lam_x(app(_P0 if d.side == 0 else _P1, app(a, _X)))
    if isinstance(d, OrI):
        a = extract_open(d.body, ctx, lw)
        tag = STANDARD.k if d.side == 0 else STANDARD.kbar
        return _lam_x(apps(_P, tag, app(a, _X)))
    if isinstance(d, OrE):
        f = conclusion(d.body, ctx, None)
        s = extract_open(d.body, ctx, lw)
        a = extract_open(d.left, list(ctx) + [f.left], lw)
        b = extract_open(d.right, list(ctx) + [f.right], lw)
        sx = app(s, _X)
        return _lam_x(apps(_IOTA, app(_P0, sx), a, b, apps(_P, _X, app(_P1, sx))))
    if isinstance(d, ImpI):
        t = extract_open(d.body, list(ctx) + [d.hyp], lw)
        return compile_abstraction(app(t, apps(_P, _X, _Y)), ["x", "y"])
    if isinstance(d, ImpE):
        return apps(S, extract_open(d.fun, ctx, lw), extract_open(d.arg, ctx, lw))
    if isinstance(d, ExFalso):
        return extract_open(d.body, ctx, lw)
    raise TypeError(type(d).__name__)


def extract(d: Deriv, lemma_witness: Optional[Mapping[str, Term]] = None,
            fuel: int = 200_000) -> Term:
    """Closed realizer of the conclusion of a closed derivation (normal form)."""
    validate_derivation(d)
    tau = extract_open(d, (), lemma_witness)
    nf, _ = normalize(app(tau, STANDARD.i), fuel)
    if nf is None:
        raise RuntimeError("extracted realizer did not normalize")
    return nf


# ---------------------------------------------------------------- derived rules

class Proof:
    """Builder for derivations in a fixed context; each step knows its conclusion."""

    def __init__(self, ctx: Sequence[Formula] = ()):
        self.ctx = list(ctx)

    def c(self, d: Deriv) -> Formula:
        return conclusion(d, self.ctx)

    def le(self, d: Deriv) -> Le:
        f = self.c(d)
        assert isinstance(f, Le), show_formula(f)
        return f

    def refl(self, t: HTerm) -> Deriv:
        return subst(Ax("refl"), x=t)

    def meet_l(self, a: HTerm, b: HTerm) -> Deriv:
        return subst(Ax("meet_l"), x=a, y=b)

    def meet_r(self, a: HTerm, b: HTerm) -> Deriv:
        return subst(Ax("meet_r"), x=a, y=b)

    def top(self, t: HTerm) -> Deriv:
        return subst(Ax("top"), x=t)

    def trans(self, *ds: Deriv) -> Deriv:
        out = ds[0]
        for nxt in ds[1:]:
            a, b = self.le(out), self.le(nxt)
            assert a.right == b.left, (show_term(a.right), show_term(b.left))
            out = ImpE(subst(Ax("trans"), x=a.left, y=a.right, z=b.right), AndI(out, nxt))
        return out

    def pairing(self, d1: Deriv, d2: Deriv) -> Deriv:
        a, b = self.le(d1), self.le(d2)
        assert a.left == b.left
        return ImpE(subst(Ax("meet_univ"), x=a.right, y=b.right, z=a.left), AndI(d1, d2))

    def cases(self, d1: Deriv, d2: Deriv) -> Deriv:
        a, b = self.le(d1), self.le(d2)
        assert a.right == b.right
        return ImpE(subst(Ax("join_univ"), x=a.left, y=b.left, z=a.right), AndI(d1, d2))

    def curry(self, d: Deriv) -> Deriv:
        f = self.le(d)
        assert isinstance(f.left, HBin) and f.left.op == "and"
        return ImpE(subst(Ax("curry"), x=f.left.left, y=f.left.right, z=f.right), d)

    def uncurry(self, d: Deriv) -> Deriv:
        f = self.le(d)
        assert isinstance(f.right, HBin) and f.right.op == "imp"
        return ImpE(subst(Ax("uncurry"), x=f.right.left, y=f.left, z=f.right.right), d)

    def use(self, name: str, *hyps: Deriv, **m: HTerm) -> Deriv:
        out: Deriv = subst(Lemma(name), **m) if m else Lemma(name)
        for h in hyps:
            out = ImpE(out, h)
        return out

    def project(self, src: HTerm, tgt: HTerm) -> Deriv:
        """src <= tgt where tgt is a meet-combination of conjuncts of src."""
        if src == tgt:
            return self.refl(src)
        if isinstance(tgt, HBin) and tgt.op == "and" and not _has_conjunct(src, tgt):
            return self.pairing(self.project(src, tgt.left), self.project(src, tgt.right))
        path = _conjunct_path(src, tgt)
        if path is None:
            if isinstance(tgt, HBin) and tgt.op == "and":
                return self.pairing(self.project(src, tgt.left), self.project(src, tgt.right))
            raise ValueError(f"{show_term(tgt)} is not a conjunct of {show_term(src)}")
        out: Optional[Deriv] = None
        cur = src
        for side in path:
            assert isinstance(cur, HBin)
            step = self.meet_l(cur.left, cur.right) if side == 0 else self.meet_r(cur.left, cur.right)
            out = step if out is None else self.trans(out, step)
            cur = cur.left if side == 0 else cur.right
        assert out is not None
        return out


def _conjunct_path(src: HTerm, tgt: HTerm) -> Optional[list[int]]:
    if src == tgt:
        return []
    if isinstance(src, HBin) and src.op == "and":
        for side, sub in ((0, src.left), (1, src.right)):
            p = _conjunct_path(sub, tgt)
            if p is not None:
                return [side] + p
    return None


def _has_conjunct(src: HTerm, tgt: HTerm) -> bool:
    return _conjunct_path(src, tgt) is not None


# ---------------------------------------------------------------- laws

def _law_table() -> dict[str, Formula]:
    x, y, z, d = x_, y_, z_, d_
    o = lambda t: om(d, t)  # noqa: E731
    return {
        "help1": Le(hand(x, himp(x, z)), z),
        "help2": then(Le(x, y), Le(himp(y, z), himp(x, z))),
        "help3": Le(hand(himp(x, y), himp(y, z)), himp(x, z)),
        "d1": then(Le(x, y), Le(o(x), o(y))),
        "d2": Le(x, o(x)),
        "d3": Le(o(o(x)), o(x)),
        "d4.lr": Le(o(o(x)), o(x)),
        "d4.rl": Le(o(x), o(o(x))),
        "d5": Le(o(himp(x, y)), himp(o(x), o(y))),
        "d6": Le(hor(o(x), o(y)), o(hor(x, y))),
        "d7.lr": Le(o(hand(x, y)), hand(o(x), o(y))),
        "d7.rl": Le(hand(o(x), o(y)), o(hand(x, y))),
        "d8": Le(o(d), d),
        "d9": Le(d, o(x)),
        "d10.lr": Le(himp(o(x), d), himp(x, d)),
        "d10.rl": Le(himp(x, d), himp(o(x), d)),
        "d11.lr": Le(o(TOP), TOP),
        "d11.rl": Le(TOP, o(TOP)),
    }


LAWS: dict[str, Formula] = _law_table()
LAW_ORDER = list(LAWS)


def law_family(law_id: str) -> str:
    """``d7.rl`` belongs to law ``d7``."""
    return law_id.split(".")[0]


def build_library() -> dict[str, Deriv]:
    """Derivations of every law, in dependency order."""
    x, y, z, d = x_, y_, z_, d_
    o = lambda t: om(d, t)  # noqa: E731
    P = Proof()
    lib: dict[str, Deriv] = {}

    lib["help1"] = ImpE(subst(Ax("uncurry"), y=himp(x, z)), subst(Ax("refl"), x=himp(x, z)))

    # x <= y  |-  (y => z) <= (x => z)
    Q = Proof([Le(x, y)])
    step = Q.pairing(Q.trans(Q.meet_l(x, himp(y, z)), Hyp(0)), Q.meet_r(x, himp(y, z)))
    body = Q.curry(Q.trans(step, Q.use("help1", x=y, z=z)))
    lib["help2"] = ImpI(Le(x, y), body)

    q = hand(himp(x, y), himp(y, z))
    to_y = P.trans(P.project(hand(x, q), hand(x, himp(x, y))), P.use("help1", x=x, z=y))
    both = P.pairing(to_y, P.project(hand(x, q), himp(y, z)))
    lib["help3"] = P.curry(P.trans(both, P.use("help1", x=y, z=z)))

    # x <= y  |-  om x <= om y, by help2 twice
    Q = Proof([Le(x, y)])
    inner = Q.use("help2", Hyp(0), x=x, y=y, z=d)
    lib["d1"] = ImpI(Le(x, y), Q.use("help2", inner, x=himp(y, d), y=himp(x, d), z=d))

    swap = P.project(hand(himp(x, d), x), hand(x, himp(x, d)))
    lib["d2"] = P.curry(P.trans(swap, P.use("help1", x=x, z=d)))

    unit = P.use("d2", x=himp(x, d))
    lib["d3"] = P.use("help2", unit, x=himp(x, d), y=himp(o(x), d), z=d)
    lib["d4.lr"] = Lemma("d3")
    lib["d4.rl"] = P.use("d2", x=o(x))

    mono = lambda dv: P.use("d1", dv, x=P.le(dv).left, y=P.le(dv).right)  # noqa: E731
    lib["d7.lr"] = P.pairing(mono(P.meet_l(x, y)), mono(P.meet_r(x, y)))

    # om x & om y <= om (x & y)
    w = himp(hand(x, y), d)
    a1 = P.project(hand(y, hand(x, w)), hand(hand(x, y), w))
    a2 = P.trans(a1, P.use("help1", x=hand(x, y), z=d))          # y & (x & w) <= d
    xw_to = P.curry(a2)                                          # x & w <= y => d
    b_src = hand(x, hand(w, o(y)))
    b1 = P.pairing(P.trans(P.project(b_src, hand(x, w)), xw_to), P.project(b_src, o(y)))
    b2 = P.trans(b1, P.use("help1", x=himp(y, d), z=d))           # x & (w & om y) <= d
    wy_to = P.curry(b2)                                          # w & om y <= x => d
    c_src = hand(w, hand(o(x), o(y)))
    c1 = P.pairing(P.trans(P.project(c_src, hand(w, o(y))), wy_to), P.project(c_src, o(x)))
    c2 = P.trans(c1, P.use("help1", x=himp(x, d), z=d))           # w & (om x & om y) <= d
    lib["d7.rl"] = P.curry(c2)

    mp = P.use("help1", x=x, z=y)
    lib["d5"] = P.curry(P.trans(P.use("d7.rl", x=x, y=himp(x, y)),
                                P.use("d1", mp, x=hand(x, himp(x, y)), y=y)))

    lib["d6"] = P.cases(mono(subst(Ax("join_l"), x=x, y=y)), mono(subst(Ax("join_r"), x=x, y=y)))

    dd = P.curry(P.meet_l(d, TOP))                                # top <= d => d
    lib["d8"] = P.trans(P.pairing(P.trans(P.top(o(d)), dd), P.refl(o(d))),
                        P.use("help1", x=himp(d, d), z=d))
    lib["d9"] = P.curry(P.meet_r(himp(x, d), d))
    lib["d10.lr"] = P.use("help2", P.use("d2", x=x), x=x, y=o(x), z=d)
    lib["d10.rl"] = P.use("d2", x=himp(x, d))
    lib["d11.lr"] = P.top(o(TOP))
    lib["d11.rl"] = P.use("d2", x=TOP)
    return {k: lib[k] for k in LAW_ORDER}


# ---------------------------------------------------------------- serialization

def deriv_sexp(dv: Deriv) -> Sexp:
    if isinstance(dv, Ax):
        return ["ax", dv.name]
    if isinstance(dv, Hyp):
        return ["hyp", str(dv.index)]
    if isinstance(dv, Lemma):
        return ["lemma", dv.name]
    if isinstance(dv, Subst):
        return ["subst", deriv_sexp(dv.body)] + [[v, term_sexp(t)] for v, t in dv.mapping]
    if isinstance(dv, AndI):
        return ["andI", deriv_sexp(dv.left), deriv_sexp(dv.right)]
    if isinstance(dv, AndE):
        return ["andE", str(dv.side), deriv_sexp(dv.body)]
    if isinstance(dv, OrI):
        return ["orI", str(dv.side), deriv_sexp(dv.body), formula_sexp(dv.other)]
    if isinstance(dv, OrE):
        return ["orE", deriv_sexp(dv.body), deriv_sexp(dv.left), deriv_sexp(dv.right)]
    if isinstance(dv, ImpI):
        return ["impI", formula_sexp(dv.hyp), deriv_sexp(dv.body)]
    if isinstance(dv, ImpE):
        return ["impE", deriv_sexp(dv.fun), deriv_sexp(dv.arg)]
    if isinstance(dv, ExFalso):
        return ["efq", deriv_sexp(dv.body), formula_sexp(dv.goal)]
    raise TypeError(type(dv).__name__)


def parse_deriv(s: Sexp) -> Deriv:
    if isinstance(s, str) or not s:
        raise ParseError(f"bad derivation form {s!r}")
    tag, args = s[0], s[1:]
    try:
        if tag == "ax":
            return Ax(args[0])
        if tag == "hyp":
            return Hyp(int(args[0]))
        if tag == "lemma":
            return Lemma(args[0])
        if tag == "subst":
            return Subst(parse_deriv(args[0]), tuple(sorted((v, parse_term(t)) for v, t in args[1:])))
        if tag == "andI":
            return AndI(parse_deriv(args[0]), parse_deriv(args[1]))
        if tag == "andE":
            return AndE(int(args[0]), parse_deriv(args[1]))
        if tag == "orI":
            return OrI(int(args[0]), parse_deriv(args[1]), parse_formula(args[2]))
        if tag == "orE":
            return OrE(parse_deriv(args[0]), parse_deriv(args[1]), parse_deriv(args[2]))
        if tag == "impI":
            return ImpI(parse_formula(args[0]), parse_deriv(args[1]))
        if tag == "impE":
            return ImpE(parse_deriv(args[0]), parse_deriv(args[1]))
        if tag == "efq":
            return ExFalso(parse_deriv(args[0]), parse_formula(args[1]))
    except (IndexError, ValueError) as exc:
        raise ParseError(f"malformed {tag} node: {exc}") from exc
    raise ParseError(f"unknown rule tag {tag!r}")


PROOF_DIR = Path(__file__).resolve().parent / "corpus" / "proofs"


def dump_library(lib: Mapping[str, Deriv], directory: Path = PROOF_DIR) -> list[Path]:
    directory.mkdir(parents=True, exist_ok=True)
    out = []
    for name, dv in lib.items():
        form = ["derivation", name, formula_sexp(LAWS[name]), deriv_sexp(dv)]
        path = directory / f"{name}.sexp"
        path.write_text(dump(form, width=96) + "\n")
        out.append(path)
    return out


def load_derivations(directory: Path = PROOF_DIR) -> dict[str, tuple[Formula, Deriv]]:
    found: dict[str, tuple[Formula, Deriv]] = {}
    for path in sorted(directory.glob("*.sexp")):
        for form in read_all(path.read_text()):
            if not isinstance(form, list) or len(form) != 4 or form[0] != "derivation":
                raise ParseError(f"{path.name}: expected (derivation NAME FORMULA TREE)")
            found[form[1]] = (parse_formula(form[2]), parse_deriv(form[3]))
    return found


def canned_library(directory: Path = PROOF_DIR) -> dict[str, Deriv]:
    """The shipped derivations, validated against the law table in order."""
    loaded = load_derivations(directory)
    out: dict[str, Deriv] = {}
    for name in LAW_ORDER:
        if name not in loaded:
            raise ParseError(f"missing derivation for {name}")
        stated, dv = loaded[name]
        if stated != LAWS[name]:
            raise ParseError(f"{name}: stated conclusion differs from the law table")
        out[name] = dv
    return out


def lemmas_used(d: Deriv) -> set[str]:
    if isinstance(d, Lemma):
        return {d.name}
    if isinstance(d, (Ax, Hyp)):
        return set()
    kids = [getattr(d, f) for f in ("body", "left", "right", "fun", "arg") if hasattr(d, f)]
    return set().union(*(lemmas_used(k) for k in kids if not isinstance(k, (Le, Falsum, Conn))))


def _lemma_witnesses(lib: Mapping[str, Deriv]) -> dict[str, Term]:
    out: dict[str, Term] = {}

    def need(name: str, trail: tuple) -> None:
        if name in out:
            return
        if name in trail:
            raise RuleError(name, "circular lemma use")
        for dep in sorted(lemmas_used(lib[name])):
            need(dep, trail + (name,))
        out[name] = extract(lib[name], out)

    for name in LAW_ORDER:
        if name in lib:
            need(name, ())
    return {k: out[k] for k in LAW_ORDER if k in out}


def _initial_witnesses() -> dict[str, Term]:
    return _lemma_witnesses(build_library())


LEMMA_WITNESSES: dict[str, Term] = {}
LEMMA_WITNESSES.update(_initial_witnesses())


def extracted_witnesses(lib: Optional[Mapping[str, Deriv]] = None) -> dict[str, Term]:
    return _lemma_witnesses(lib if lib is not None else canned_library())


# ---------------------------------------------------------------- semantics

def interpret(t: HTerm, env: Mapping[str, TV]) -> TV:
    if isinstance(t, HVar):
        return env[t.name]
    if isinstance(t, HConst):
        return H.TOP if t.name == "top" else H.BOT
    a, b = interpret(t.left, env), interpret(t.right, env)
    if t.op == "and":
        return H.meet(a, b)
    if t.op == "or":
        return H.join(a, b)
    if isinstance(t.left, HBin) and t.left.op == "imp" and t.left.right == t.right:
        return H.ominus(b, interpret(t.left.left, env))
    return H.imp(a, b)


def realizers(f: Formula, env: Mapping[str, TV]) -> TV:
    """Truth value of realizers of a formula: reductions become implications."""
    if isinstance(f, Le):
        return H.imp(interpret(f.left, env), interpret(f.right, env))
    if isinstance(f, Falsum):
        return H.BOT
    a, b = realizers(f.left, env), realizers(f.right, env)
    return {"conj": H.meet, "disj": H.join, "then": H.imp}[f.op](a, b)


def law_reduction(f: Formula, env: Mapping[str, TV]) -> tuple[TV, TV]:
    """(antecedent, consequent) a realizer of f must map between."""
    if isinstance(f, Le):
        return interpret(f.left, env), interpret(f.right, env)
    if isinstance(f, Conn) and f.op == "then":
        return realizers(f.left, env), realizers(f.right, env)
    raise ValueError("law must be a reduction or a conditional")


def check_law(h: Heyting, law_id: str, witness: Term, count: int = 50, seed: int = 0,
              family: Optional[Sequence[TV]] = None) -> Verdict:
    f = LAWS[law_id]
    names = sorted(formula_vars(f))
    vs = []
    for env in instantiations(names, count, seed, family):
        X, Y = law_reduction(f, env)
        vs.append(h.check_reduction(witness, X, Y))
    return combine(vs)
