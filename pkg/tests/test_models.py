import pytest
from hypothesis import given, strategies as hs

from realmod.heyting import Heyting
from realmod.kernel import TermBackend
from realmod.models import arith as A
from realmod.models import scott_structure as SC
from realmod.models import sets as Z
from realmod.scott import ScottBackend

CANDS = A.candidates(40)
h = Heyting(TermBackend(50_000), fuel=50_000)


@given(hs.integers(0, 4))
def test_ordinal_rank(n):
    assert Z.ordinal(n).rank == n


@given(hs.integers(0, 3))
def test_default_domain_closed_under_children(r):
    dom = Z.default_domain(r)
    assert all(c in dom for x in dom for c in x.children())
    assert max(x.rank for x in dom) == r


def test_rank_invariant_small():
    hz = Heyting(TermBackend(200_000), fuel=200_000)
    S = Z.set_structure(Z.default_domain(2))
    Z.attach(hz, S)
    assert Z.rank_invariant(hz, S.model, S.domain()).kind == "Confirmed"


def test_numeral_table_small():
    hz = Heyting(TermBackend(200_000), fuel=200_000)
    assert Z.numeral_table(hz, 3).exact


def test_domain_must_be_closed():
    with pytest.raises(ValueError):
        Z.set_structure([Z.ordinal(2)])


@pytest.mark.parametrize("refute", [
    lambda e: A.existence_refute_one(h, e).verdict,
    lambda e: A.barcan_refute_one(h, e, 8).verdict,
    lambda e: Z.negated_atomic_refute_one(h, e).verdict,
])
def test_refuters_never_confirm(refute):
    kinds = {refute(e) for e in CANDS}
    assert "Confirmed" not in kinds
    assert "Refuted" in kinds


def test_parity_control_is_a_genuine_decider():
    S = A.arith_structure(8)
    assert A.barcan_refute_one(h, A.PARITY, 8).verdict == "Unrefuted"
    assert A.barcan_experiment(S, h, CANDS[:5])["control"] == "IN"


def test_scott_refuters_never_confirm():
    sb = ScottBackend(trunc=1 << 10)
    S = SC.scott_structure(sb, cutoff=3)
    hs_ = SC.heyting_for(S)
    for e in CANDS[:20]:
        assert SC.meyer_scott_refute_one(sb, e).verdict != "Confirmed"
        assert SC.neq_instability_refute_one(S, hs_, e).verdict != "Confirmed"


@pytest.mark.parametrize("text", ["x = 0", "exists y. y < x", "Even(x) | ~Even(x)"])
def test_arith_parse(text):
    S = A.arith_structure(6)
    assert A.parse(S, text) is not None
