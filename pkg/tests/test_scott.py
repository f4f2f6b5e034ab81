from hypothesis import given, strategies as hs

from realmod.backends import pca_law_check
from realmod.kernel import Tri
from realmod.scott import ALL, EMPTY, ScottBackend, fin, meyer_scott_counterexample, pairs, scott_apply
from realmod.terms import K, S, apps

sb = ScottBackend(20_000, trunc=64)
small = hs.frozensets(hs.integers(0, 12), max_size=4)
graphs = hs.lists(hs.tuples(hs.integers(0, 12), hs.integers(0, 12)), min_size=1, max_size=5)


@given(graphs, small, small)
def test_application_is_monotone(ps, x, extra):
    f = pairs(ps)
    lo, _ = sb.members(scott_apply(f, fin(x)), 32)
    hi, _ = sb.members(scott_apply(f, fin(x | extra)), 32)
    assert set(lo) <= set(hi)


@given(small)
def test_finite_sets_are_exact(xs):
    got, exact = sb.members(fin(xs), 16)
    assert exact and set(got) == {x for x in xs if x < 16}


def test_empty_and_all():
    assert sb.mem(EMPTY, 5) is Tri.OUT
    assert sb.mem(ALL, 5) is Tri.IN


def test_k_law_on_native_sets():
    a, b = fin([1, 4]), fin([2])
    assert sb.equal(sb.element(apps(K, a, b)), sb.element(a)) in (Tri.IN, Tri.UNREF)


def test_pca_laws_small_sweep():
    r = pca_law_check(ScottBackend(20_000, trunc=256), count=8, seed=1)
    assert r["failures"] == 0


def test_meyer_scott_counterexample_certified():
    _, _, rep = meyer_scott_counterexample(ScottBackend(trunc=1 << 10))
    assert rep.certified
