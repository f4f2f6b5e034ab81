import pytest
from hypothesis import given, strategies as hs

from realmod.terms import (
    K, S, SexprError, app, digest, enumerate_closed_terms, parse_sexpr, to_sexpr, var,
)

POOL = enumerate_closed_terms(120)


@hs.composite
def trees(draw, depth=4):
    if depth == 0 or draw(hs.booleans()):
        return draw(hs.sampled_from([S, K, var("x"), var("y")]))
    return app(draw(trees(depth=depth - 1)), draw(trees(depth=depth - 1)))


@given(trees())
def test_sexpr_round_trip(t):
    assert parse_sexpr(to_sexpr(t), {"x": var("x"), "y": var("y")}) == t


@given(hs.sampled_from(POOL))
def test_closed_round_trip(t):
    # equality is structural; identity only holds until the intern table is trimmed
    assert parse_sexpr(to_sexpr(t)) == t


@given(trees(), trees())
def test_interning_gives_identity(a, b):
    assert app(a, b) is app(a, b)
    assert (digest(app(a, b)) == digest(app(b, a))) == (a is b)


def test_enumeration_is_distinct_and_ordered():
    assert len(set(map(id, POOL))) == len(POOL)
    assert POOL[:2] == [S, K] or set(POOL[:2]) == {S, K}
    assert enumerate_closed_terms(50) == POOL[:50]


@pytest.mark.parametrize("bad", ["(S", "(S K))", ")", ""])
def test_malformed_sexpr(bad):
    with pytest.raises(SexprError):
        parse_sexpr(bad)
