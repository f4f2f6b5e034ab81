"""Boolean prealgebras of double-negation-stable maps, and the box operator.

A ``ModalTruth`` is a map f(x, D) from a finite point domain and a parameter
D to truth values, given by a rule that works for any D.  Everything that
ranges over all D is finitized by a ``ProbeFamily``: ``inf`` intersects over
the probes only, so the resulting box is a superset of the true one.  Each
ModalTruth carries a certificate ``cert`` realizing om_D f(x,D) ~> f(x,D),
assembled from the extracted law witnesses.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Hashable, Iterable, Iterator, Mapping, Optional, Sequence

from . import heyting as H
from .ehp import LEMMA_WITNESSES
from .heyting import BOT, TOP, TV, Heyting, Verdict, combine, ominus, show_tv
from .kernel import STANDARD, Tri, lam, std_env
from .sexp import read_all, unquote
from .terms import K, Term, app, apps, to_sexpr

Point = Hashable
PointMap = Mapping[Point, TV]

BOX_CAVEAT = "probe-approximation: superset-of-true-box"
PROBE_DIR = Path(__file__).parent / "corpus" / "probes"


def W(law: str) -> Term:
    """Extracted witness of a named law."""
    return LEMMA_WITNESSES[law]


def _env(**extra: Term) -> dict[str, Term]:
    env = std_env(**extra)
    for name, law in (("d1", "d1"), ("d2", "d2"), ("d3", "d3"), ("d5", "d5"), ("d6", "d6"),
                      ("d7lr", "d7.lr"), ("d7rl", "d7.rl"), ("d8", "d8"), ("d9", "d9")):
        env.setdefault(name, W(law))
    return env


def compose(text: str, **extra: Term) -> Term:
    """Lambda text over the law witnesses (d1, d2, ..., d7lr, d7rl) and ``extra``."""
    return lam(text, _env(**extra))


MODUS = lam(r"\c. (p1 c) (p0 c)", std_env())


# ---------------------------------------------------------------- probes

@dataclass(frozen=True)
class ProbeFamily:
    """Finite stand-in for all parameters D; always holds Bot and Top."""

    values: tuple
    labels: tuple

    @classmethod
    def of(cls, values: Iterable[TV] = (), labels: Optional[Iterable[str]] = None) -> "ProbeFamily":
        vals = list(values)
        labs = list(labels) if labels is not None else [show_tv(v, 4) for v in vals]
        out_v: list[TV] = [BOT, TOP]
        out_l: list[str] = ["F", "T"]
        for v, lab in zip(vals, labs):
            if any(v is u for u in out_v):
                continue
            out_v.append(v)
            out_l.append(lab)
        return cls(tuple(out_v), tuple(out_l))

    def extend(self, more: Iterable[TV], labels: Optional[Iterable[str]] = None) -> "ProbeFamily":
        more = list(more)
        labs = list(labels) if labels is not None else [show_tv(v, 4) for v in more]
        return ProbeFamily.of(list(self.values) + more, list(self.labels) + labs)

    def __iter__(self) -> Iterator[TV]:
        return iter(self.values)

    def __len__(self) -> int:
        return len(self.values)

    def __contains__(self, v: object) -> bool:
        return any(v is u for u in self.values)

    def describe(self) -> list[str]:
        return list(self.labels)


def default_probes(extra: Iterable[TV] = ()) -> ProbeFamily:
    """Bot, Top, a singleton, the pair {0~,1~} and an arrow set, plus ``extra``."""
    base = [H.numeral_set(0), H.numeral_set(0, 1), H.imp(TOP, H.numeral_set(2))]
    return ProbeFamily.of(base + list(extra))


def parse_tv(s: Any, base: Sequence[TV] = ()) -> TV:
    """``top``, ``bot``, ``(nums 0 1)``, ``(meet a b)``, ``(join a b)``,
    ``(imp a b)``, ``(om d x)``, ``(neg a)`` and ``q`` (the Q-set over ``base``)."""
    if isinstance(s, str):
        if s == "top":
            return TOP
        if s == "bot":
            return BOT
        if s == "q":
            return H.q_value(list(base) or [BOT, TOP])
        raise ValueError(f"unknown truth value atom {s!r}")
    if not s:
        raise ValueError("empty truth value form")
    head, args = s[0], s[1:]
    if head == "nums":
        return H.numeral_set(*(int(a) for a in args))
    sub = [parse_tv(a, base) for a in args]
    if head == "neg" and len(sub) == 1:
        return H.neg(sub[0])
    if head == "om" and len(sub) == 2:
        return ominus(sub[0], sub[1])
    ops = {"meet": H.meet, "join": H.join, "imp": H.imp}
    if head in ops and len(sub) == 2:
        return ops[head](*sub)
    raise ValueError(f"bad truth value form {head!r}")


def _family(form: list) -> ProbeFamily:
    vals: list[TV] = []
    labs: list[str] = []
    for entry in form[2:]:
        vals.append(parse_tv(entry[1], vals))
        labs.append(unquote(entry[0]))
    return ProbeFamily.of(vals, labs)


def load_probes(label: str, directory: Path = PROBE_DIR) -> ProbeFamily:
    """Probe family ``(probes LABEL (NAME TV) ...)`` from the corpus."""
    for path in sorted(directory.glob("*.sexp")):
        for form in read_all(path.read_text()):
            if isinstance(form, list) and form[:1] == ["probes"] and unquote(form[1]) == label:
                return _family(form)
    raise KeyError(f"no probe family {label!r}")


def load_probe_file(path: Path, label: Optional[str] = None) -> ProbeFamily:
    """The first family in a file, or the one named ``label``."""
    for form in read_all(Path(path).read_text()):
        if isinstance(form, list) and form[:1] == ["probes"]:
            if label is None or unquote(form[1]) == label:
                return _family(form)
    raise KeyError(f"no probe family in {path}")


def probe_labels(directory: Path = PROBE_DIR) -> list[str]:
    out = []
    for path in sorted(directory.glob("*.sexp")):
        for form in read_all(path.read_text()):
            if isinstance(form, list) and form[:1] == ["probes"]:
                out.append(unquote(form[1]))
    return out


# ---------------------------------------------------------------- modal truths

@dataclass(frozen=True, eq=False)
class ModalTruth:
    points: tuple
    rule: Callable[[Point, TV], TV] = field(repr=False)
    cert: Optional[Term] = field(default=None, repr=False)
    label: str = ""
    flags: tuple = ()

    def at(self, x: Point, D: TV) -> TV:
        return self.rule(x, D)

    def table(self, probes: ProbeFamily) -> dict:
        return {(x, i): self.rule(x, D) for x in self.points for i, D in enumerate(probes)}

    def show(self, probes: ProbeFamily) -> dict:
        return {f"{x!r}@{probes.labels[i]}": show_tv(v, 5) for (x, i), v in self.table(probes).items()}


def _flags(*fs: ModalTruth, extra: Sequence[str] = ()) -> tuple:
    out: list[str] = []
    for f in fs:
        out += [x for x in f.flags if x not in out]
    out += [x for x in extra if x not in out]
    return tuple(out)


def point_map(points: Sequence[Point], fn: Callable[[Point], TV]) -> dict:
    return {x: fn(x) for x in points}


def const_map(points: Sequence[Point], v: TV) -> dict:
    return {x: v for x in points}


def mu(h: PointMap, label: str = "") -> ModalTruth:
    """mu(h)(x, D) = om_D h(x)."""
    hh = dict(h)
    return ModalTruth(tuple(hh), lambda x, D: ominus(D, hh[x]), W("d3"), label or "mu")


def lift(points: Sequence[Point], rule: Callable[[Point, TV], TV], cert: Optional[Term],
         label: str = "") -> ModalTruth:
    return ModalTruth(tuple(points), rule, cert, label)


def top_m(points: Sequence[Point]) -> ModalTruth:
    return ModalTruth(tuple(points), lambda x, D: TOP, STANDARD.k, "T")


def bot_pi(points: Sequence[Point]) -> ModalTruth:
    """The falsum of the prealgebra, om_D Bot."""
    return ModalTruth(tuple(points), lambda x, D: ominus(D, BOT), W("d3"), "F^pi")


def proj(points: Sequence[Point]) -> ModalTruth:
    """pi(x, D) = D."""
    return ModalTruth(tuple(points), lambda x, D: D, W("d8"), "pi")


def inf_op(f: ModalTruth, probes: ProbeFamily) -> dict:
    """(inf f)(x) = intersection of f(x, Z) over the probes Z."""
    return {x: H.big_meet([f.at(x, Z) for Z in probes]) for x in f.points}


def box(f: ModalTruth, probes: ProbeFamily) -> ModalTruth:
    """mu . inf over the probe family."""
    points = f.points
    memo: dict = {}

    def inner(x: Point) -> TV:
        if x not in memo:
            memo[x] = H.big_meet([f.at(x, Z) for Z in probes])
        return memo[x]

    return ModalTruth(points, lambda x, D: ominus(D, inner(x)), W("d3"),
                      f"box({f.label})", _flags(f, extra=[BOX_CAVEAT]))


def m_meet(f: ModalTruth, g: ModalTruth) -> ModalTruth:
    cert = None
    if f.cert is not None and g.cert is not None:
        cert = compose(r"\c. p (cf (p0 (d7lr c))) (cg (p1 (d7lr c)))", cf=f.cert, cg=g.cert)
    return ModalTruth(f.points, lambda x, D: H.meet(f.at(x, D), g.at(x, D)), cert,
                      f"({f.label} & {g.label})", _flags(f, g))


def m_join(f: ModalTruth, g: ModalTruth) -> ModalTruth:
    """The prealgebra join om_D (f v g)."""
    return ModalTruth(f.points, lambda x, D: ominus(D, H.join(f.at(x, D), g.at(x, D))), W("d3"),
                      f"({f.label} v {g.label})", _flags(f, g))


def m_imp(q: ModalTruth, g: ModalTruth) -> ModalTruth:
    """q => g; certified whenever g is, whatever q is."""
    cert = None if g.cert is None else compose(r"\c a. cg (d5 c (d2 a))", cg=g.cert)
    return ModalTruth(g.points, lambda x, D: H.imp(q.at(x, D), g.at(x, D)), cert,
                      f"({q.label} => {g.label})", _flags(q, g))


def m_neg(f: ModalTruth) -> ModalTruth:
    return m_imp(f, bot_pi(f.points))


def m_bigmeet(fs: Sequence[ModalTruth], label: str = "") -> ModalTruth:
    """Pointwise intersection; certified when the family shares one certificate."""
    if not fs:
        raise ValueError("m_bigmeet needs a nonempty family")
    certs = {f.cert for f in fs}
    cert = None
    if len(certs) == 1 and fs[0].cert is not None:
        cert = uniform_closure_cert(fs[0].cert)
    return ModalTruth(fs[0].points, lambda x, D: H.big_meet([f.at(x, D) for f in fs]), cert,
                      label or "/\\[" + ", ".join(f.label for f in fs) + "]", _flags(*fs))


def m_bigjoin(fs: Sequence[ModalTruth], label: str = "") -> ModalTruth:
    return ModalTruth(fs[0].points,
                      lambda x, D: ominus(D, H.big_join([f.at(x, D) for f in fs])), W("d3"),
                      label or "\\/[" + ", ".join(f.label for f in fs) + "]", _flags(*fs))


def dia(f: ModalTruth, probes: ProbeFamily) -> ModalTruth:
    return m_neg(box(m_neg(f), probes))


def uniform_closure_cert(e: Term) -> Term:
    """From e : om g_i ~> g_i for all i, a certificate for the intersection."""
    return compose(r"\c. e (d1 I c)", e=e)


# ---------------------------------------------------------------- checking

def cells(f: ModalTruth, probes: ProbeFamily) -> Iterator[tuple[Point, TV]]:
    for x in f.points:
        for D in probes:
            yield x, D


def check_cert(h: Heyting, f: ModalTruth, probes: ProbeFamily) -> Verdict:
    """The certificate on every tabulated cell."""
    if f.cert is None:
        return Verdict("Inconclusive", None, f"{f.label} carries no certificate")
    return combine(h.check_reduction(f.cert, ominus(D, f.at(x, D)), f.at(x, D))
                   for x, D in cells(f, probes))


def check_modal(h: Heyting, e: Term, f: ModalTruth, g: ModalTruth, probes: ProbeFamily) -> Verdict:
    """e : f(x,D) ~> g(x,D) on every tabulated cell."""
    return combine(h.check_reduction(e, f.at(x, D), g.at(x, D)) for x, D in cells(f, probes))


def check_point(h: Heyting, e: Term, f: PointMap, g: PointMap) -> Verdict:
    return combine(h.check_reduction(e, f[x], g[x]) for x in f)


def check_valid(h: Heyting, e: Term, f: ModalTruth, probes: ProbeFamily) -> Verdict:
    """e realizes f everywhere: every sampled ``a`` in Top maps into f."""
    return check_modal(h, app(K, e), top_m(f.points), f, probes)


# ---------------------------------------------------------------- S4

def s4_witnesses(cert: Optional[Term] = None) -> dict[str, Term]:
    """K, T and 4 as reductions; T uses the certificate of its argument."""
    c = cert if cert is not None else W("d3")
    return {
        "K": compose(r"\c. d1 m (d7rl c)", m=MODUS),
        "T": compose(r"\c. cf (d1 I c)", cf=c),
        "Four": compose(r"d1 d2"),
    }


def necessitation(e: Term) -> Term:
    """From e : T ~> phi uniformly, a realizer of T ~> box phi."""
    return compose(r"\a. d2 (e a)", e=e)


def box_monotone(e: Term) -> Term:
    """From e : f ~> g uniformly, box f ~> box g."""
    return compose(r"d1 e", e=e)


def check_s4(h: Heyting, f: ModalTruth, g: ModalTruth, probes: ProbeFamily) -> dict[str, Verdict]:
    w = s4_witnesses(f.cert)
    bf, bg = box(f, probes), box(g, probes)
    return {
        "K": check_modal(h, w["K"], m_meet(bf, box(m_imp(f, g), probes)), bg, probes),
        "T": check_modal(h, w["T"], bf, f, probes),
        "Four": check_modal(h, w["Four"], bf, box(bf, probes), probes),
    }


# ---------------------------------------------------------------- embedding laws

def mu_laws(h: Heyting, f: PointMap, g: PointMap, probes: ProbeFamily,
            e_fg: Optional[Term] = None) -> dict[str, Verdict]:
    """Monotonicity both ways, meets, joins, top and bottom under mu."""
    probes = probes.extend(g.values(), [f"g({x!r})" for x in g])
    mf, mg = mu(f, "mu f"), mu(g, "mu g")
    pts = tuple(f)
    out: dict[str, Verdict] = {}
    if e_fg is not None:
        fwd = compose(r"d1 e", e=e_fg)
        out["mono.fwd"] = check_modal(h, fwd, mf, mg, probes)
        back = compose(r"\a. d8 (u (d2 a))", u=fwd)
        out["mono.bwd"] = check_point(h, back, f, g)
    fg = mu({x: H.meet(f[x], g[x]) for x in pts})
    both = m_meet(mf, mg)
    out["meet.fwd"] = check_modal(h, W("d7.lr"), fg, both, probes)
    out["meet.bwd"] = check_modal(h, W("d7.rl"), both, fg, probes)
    jn = mu({x: H.join(f[x], g[x]) for x in pts})
    jpi = m_join(mf, mg)
    out["join.fwd"] = check_modal(h, compose(r"d1 (\c. p (p0 c) (d2 (p1 c)))"), jn, jpi, probes)
    out["join.bwd"] = check_modal(h, compose(r"\c. d3 (d1 d6 c)"), jpi, jn, probes)
    mt, t = mu(const_map(pts, TOP)), top_m(pts)
    out["top.fwd"] = check_modal(h, W("d11.lr"), mt, t, probes)
    out["top.bwd"] = check_modal(h, W("d11.rl"), t, mt, probes)
    mb, pi = mu(const_map(pts, BOT)), proj(pts)
    out["bot.fwd"] = check_modal(h, compose(r"\c. d8 (d1 I c)"), mb, pi, probes)
    out["bot.bwd"] = check_modal(h, W("d9"), pi, mb, probes)
    out["bot.pi"] = check_modal(h, STANDARD.i, mb, bot_pi(pts), probes)
    return out


def conditional_witnesses() -> tuple[Term, Term]:
    """mu(f=>g) ~> box(mu f => mu g) and back."""
    u = compose(r"\c a. d1 m (d7rl (p a c))", m=MODUS)
    fwd = compose(r"\c. d1 u (d1 d2 c)", u=u)
    v = compose(r"\c a. d8 (c (d2 a))")
    return fwd, compose(r"d1 v", v=v)


def intersection_witnesses() -> tuple[Term, Term]:
    """mu(/\\ f_i) ~> box(/\\ mu f_i) and back."""
    return compose(r"d1 d2"), compose(r"d1 d8")


def embedding_laws(h: Heyting, f: PointMap, g: PointMap, probes: ProbeFamily,
                   family: Optional[Sequence[PointMap]] = None) -> dict:
    """Both directions of the conditional and intersection laws for mu."""
    pts = tuple(f)
    fam = list(family) if family is not None else [f, g]
    extra = [m[x] for m in [g] + fam for x in pts]
    probes = probes.extend(extra)
    mf, mg = mu(f), mu(g)
    lhs = mu({x: H.imp(f[x], g[x]) for x in pts})
    rhs = box(m_imp(mf, mg), probes)
    cf, cb = conditional_witnesses()
    out: dict[str, Any] = {
        "conditional.fwd": check_modal(h, cf, lhs, rhs, probes),
        "conditional.bwd": check_modal(h, cb, rhs, lhs, probes),
    }
    mus = [mu(m) for m in fam]
    inter = m_bigmeet(mus)
    out["intersection.cert"] = check_cert(h, inter, probes)
    lhs_i = mu({x: H.big_meet([m[x] for m in fam]) for x in pts})
    rhs_i = box(inter, probes)
    i_f, i_b = intersection_witnesses()
    out["intersection.fwd"] = check_modal(h, i_f, lhs_i, rhs_i, probes)
    out["intersection.bwd"] = check_modal(h, i_b, rhs_i, lhs_i, probes)
    out["probes"] = probes.describe()
    return out


# ---------------------------------------------------------------- S5

@dataclass
class S5Analysis:
    m: dict
    classification: dict
    evidence: dict
    q: TV
    boxdiamond: ModalTruth
    probes: ProbeFamily

    def report(self) -> dict:
        return {
            "classification": {repr(x): c for x, c in self.classification.items()},
            "evidence": {repr(x): e for x, e in self.evidence.items()},
            "q": show_tv(self.q, 4),
            "probes": self.probes.describe(),
        }


def q_set(probes: ProbeFamily) -> TV:
    return H.q_value(list(probes))


def observe_empty(h: Heyting, X: TV) -> tuple[str, str]:
    """``bot-observed`` when X has no sample and every constant function
    ``K u`` over the universe is refuted."""
    sample = h.sample(X)
    if sample:
        return "nonempty", f"member {to_sexpr(sample[0], 80)}"
    consts = [h.nf(app(K, u)) for u in h.backend.universe()]
    for c in consts:
        if c is not None and h.mem(X, c) is not Tri.OUT:
            return "inconclusive", f"constant function {to_sexpr(c, 80)} not refuted"
    return "bot-observed", f"no sample; {len(consts)} constant functions refuted"


def s5_analysis(h: Heyting, f: ModalTruth, probes: ProbeFamily) -> S5Analysis:
    """M_f = inf(f => F^pi) and the predicted form of box-diamond f."""
    q = q_set(probes)
    probes = probes.extend([q], ["Q"])
    neg_f = m_imp(f, bot_pi(f.points))
    m = inf_op(neg_f, probes)
    cls: dict = {}
    ev: dict = {}
    for x in f.points:
        cls[x], ev[x] = observe_empty(h, m[x])

    def rule(x: Point, D: TV) -> TV:
        return ominus(D, q) if cls[x] == "bot-observed" else ominus(D, BOT)

    bd = ModalTruth(f.points, rule, W("d3"), f"box dia {f.label}", _flags(f, extra=[BOX_CAVEAT]))
    return S5Analysis(m, cls, ev, q, bd, probes)


def f_top(points: Sequence[Point] = ((),)) -> ModalTruth:
    return top_m(points)


def f_arrow(points: Sequence[Point] = ((),)) -> ModalTruth:
    """f(x, D) = T => D."""
    return m_imp(top_m(points), proj(points))


def singleton_s5_witness(h: Heyting, f: ModalTruth, probes: ProbeFamily) -> tuple[Optional[Term], Verdict]:
    """A realizer of f ~> box dia f over a one-point domain, checked on the
    probes against the box-diamond built from the operators."""
    if len(f.points) != 1:
        raise ValueError("the construction needs a one-point domain")
    an = s5_analysis(h, f, probes)
    (x,) = f.points
    bd = box(dia(f, an.probes), an.probes)
    c = an.classification[x]
    if c == "nonempty":
        w = h.sample(an.m[x])[0]
    elif c == "bot-observed":
        w = app(K, app(W("d2"), STANDARD.i))
    else:
        return None, Verdict("Inconclusive", None, an.evidence[x])
    return w, check_modal(h, w, f, bd, an.probes)


@dataclass
class RefutationEntry:
    candidate: Term
    verdict: str
    trace: str
    fuel: int

    def as_dict(self) -> dict:
        return {"candidate": to_sexpr(self.candidate, 200), "verdict": self.verdict,
                "trace": self.trace, "fuel": self.fuel}


def s5_refute_one(h: Heyting, e: Term, a: Term, b: Term, fuel: int) -> RefutationEntry:
    """Replay: e' = K a lies in T => {a}, m = K b lies in Q => {b}; a uniform
    S5 realizer e would need e e' m equal to both a and b."""
    be = h.backend
    e1 = h.nf(app(K, a))
    m = h.nf(app(K, b))
    ee = be.apply(e, e1, fuel)
    if not ee.ok:
        return RefutationEntry(e, "Inconclusive", f"e e' undefined at fuel {fuel}", fuel)
    r = be.apply(ee.value, m, fuel)
    if not r.ok:
        return RefutationEntry(e, "Inconclusive", f"e e' m undefined at fuel {fuel}", fuel)
    v = r.value
    is_a, is_b = be.equal(v, a), be.equal(v, b)
    if is_b is Tri.OUT:
        return RefutationEntry(e, "Refuted", f"e e' m = {be.show(v)} is not b: fails f0 ~> box dia f0 at D={{b}}", fuel)
    if is_a is Tri.OUT:
        return RefutationEntry(e, "Refuted", f"e e' m = {be.show(v)} is not a: fails f1 ~> box dia f1 at D={{a}}", fuel)
    return RefutationEntry(e, "Inconclusive", f"e e' m = {be.show(v)} not separated from a and b", fuel)


def s5_refuter(h: Heyting, candidates: Sequence[Term], a: Optional[Term] = None,
               b: Optional[Term] = None, fuel: Optional[int] = None, retries: int = 1) -> dict:
    """Refute each candidate as a uniform S5 realizer; inconclusive ones are
    retried with doubled fuel."""
    a = a if a is not None else STANDARD.k
    b = b if b is not None else STANDARD.kbar
    if h.backend.equal(a, b) is not Tri.OUT:
        raise ValueError("a and b must be separated by the backend")
    fuel = fuel or h.fuel
    entries = []
    for e in candidates:
        f = fuel
        ent = s5_refute_one(h, e, a, b, f)
        for _ in range(retries):
            if ent.verdict != "Inconclusive":
                break
            f *= 2
            ent = s5_refute_one(h, e, a, b, f)
        entries.append(ent)
    counts = {k: sum(1 for x in entries if x.verdict == k) for k in ("Refuted", "Inconclusive", "Confirmed")}
    return {"entries": entries, "counts": counts, "a": to_sexpr(a), "b": to_sexpr(b)}
