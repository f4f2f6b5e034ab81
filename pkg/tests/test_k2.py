from hypothesis import given, strategies as hs

from realmod.backends import pca_law_check
from realmod.k2 import K2Backend, generator, k2_apply, k2_graph_from_continuous, prefix

kb = K2Backend(20_000)
ID = k2_graph_from_continuous("id", lambda beta: beta, lambda n: n + 1)


@given(hs.lists(hs.integers(0, 50), min_size=8, max_size=8), hs.integers(0, 7))
def test_identity_graph_on_prefixes(vals, n):
    beta = prefix(vals)
    assert k2_apply(kb, ID, beta, n, 64) == vals[n]


def test_identity_graph_on_generators():
    for label in ("id", "shift", "const 3"):
        beta = generator(label)
        assert [k2_apply(kb, ID, beta, n, 64) for n in range(8)] == [kb.value(beta, n) for n in range(8)]


def test_pca_laws():
    assert pca_law_check(kb, count=20, seed=2)["failures"] == 0
