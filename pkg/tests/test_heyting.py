from hypothesis import given, settings, strategies as hs

from realmod import heyting as H
from realmod.heyting import BOT, TOP, Heyting, Verdict, combine, standard_family
from realmod.kernel import STANDARD as st, TermBackend, Tri, numeral
from realmod.terms import K, app

FAMILY = standard_family()
tvs = hs.sampled_from(FAMILY)
h = Heyting(TermBackend(20_000), fuel=20_000)
LAWS = H.witness_laws()


@settings(max_examples=25)
@given(hs.sampled_from(sorted(LAWS)), tvs, tvs, tvs)
def test_uniform_witnesses(name, X, Y, Z):
    A, B = LAWS[name](X, Y, Z)
    assert h.check_reduction(H.WITNESS_TERMS[name], A, B).kind != "Refuted"


@given(tvs, tvs)
def test_constructors_are_interned(X, Y):
    assert H.meet(X, Y) is H.meet(X, Y)
    assert H.imp(X, Y) is H.imp(X, Y)


def test_membership_basics():
    assert h.mem(TOP, st.k) is Tri.IN
    assert h.mem(BOT, st.k) is Tri.OUT
    assert h.mem(H.numeral_set(2), numeral(2)) is Tri.IN
    assert h.mem(H.numeral_set(2), numeral(3)) is Tri.OUT


def test_pair_membership_in_meet():
    X = H.meet(H.numeral_set(1), H.numeral_set(2))
    good = h.nf(app(app(st.p, numeral(1)), numeral(2)))
    bad = h.nf(app(app(st.p, numeral(2)), numeral(1)))
    assert h.mem(X, good) is Tri.IN
    assert h.mem(X, bad) is Tri.OUT


def test_wrong_witness_is_refuted():
    # K sends every a to a constant function, which is not a numeral
    v = h.check_reduction(K, H.numeral_set(0), H.numeral_set(0))
    assert v.kind == "Refuted" and v.counterexample is not None


def test_combine_priority():
    ok, maybe, bad = Verdict("Confirmed", tested=2), Verdict("Inconclusive", tested=1), Verdict("Refuted", tested=3)
    assert combine([ok, maybe]).kind == "Inconclusive"
    assert combine([ok, maybe, bad]).kind == "Refuted"
    assert combine([ok, ok]).tested == 4
    assert combine([]).kind == "Confirmed"


def test_samples_are_genuine_members():
    for X in FAMILY:
        for e in h.sample(X):
            assert h.mem(X, e) is not Tri.OUT
