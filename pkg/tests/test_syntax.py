import pytest
from hypothesis import given, strategies as hs

from realmod import syntax as Sx

VARS = ["x", "y", "z"]


@hs.composite
def terms(draw):
    if draw(hs.booleans()):
        return Sx.Var(draw(hs.sampled_from(VARS)))
    return Sx.Fn("S", (Sx.Var(draw(hs.sampled_from(VARS))),))


@hs.composite
def formulas(draw, depth=3):
    if depth == 0 or draw(hs.integers(0, 3)) == 0:
        return draw(hs.sampled_from([Sx.eq(draw(terms()), draw(terms())), Sx.BOT,
                                     Sx.Atom("<", (draw(terms()), draw(terms())))]))
    sub = formulas(depth=depth - 1)
    k = draw(hs.integers(0, 5))
    if k == 0:
        return Sx.And(draw(sub), draw(sub))
    if k == 1:
        return Sx.Or(draw(sub), draw(sub))
    if k == 2:
        return Sx.Imp(draw(sub), draw(sub))
    if k == 3:
        return Sx.Box(draw(sub))
    q = Sx.Forall if k == 4 else Sx.Exists
    return q(draw(hs.sampled_from(VARS)), None, draw(sub))


@given(formulas())
def test_show_parse_round_trip(f):
    assert Sx.parse_formula(Sx.show(f)) == f


@given(formulas())
def test_substitution_removes_variable(f):
    g = Sx.substitute(f, "x", Sx.Fn("0", ()))
    assert "x" not in Sx.free_vars(g)


def test_parse_error():
    with pytest.raises(Sx.ParseError):
        Sx.parse_formula("forall . x")
