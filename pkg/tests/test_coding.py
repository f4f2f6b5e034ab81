from hypothesis import given, strategies as hs

from realmod import coding

nat = hs.integers(0, 10_000)


@given(nat, nat)
def test_pairing_inverts(n, m):
    assert coding.unpair(coding.pair(n, m)) == (n, m)


@given(nat)
def test_unpairing_inverts(z):
    assert coding.pair(*coding.unpair(z)) == z


@given(hs.frozensets(hs.integers(0, 40)))
def test_finite_set_codes(xs):
    assert coding.finite_set(coding.set_code(xs)) == xs


@given(hs.integers(0, 4096))
def test_subcodes_are_subsets(n):
    d = coding.finite_set(n)
    subs = list(coding.subcodes(n))
    assert subs == sorted(subs)
    assert all(coding.finite_set(l) <= d for l in subs)
    assert len(subs) == 2 ** len(d)


@given(hs.lists(hs.integers(0, 20), max_size=5))
def test_sequence_codes(seq):
    assert coding.decode_seq(coding.encode_seq(seq)) == tuple(seq)


@given(hs.lists(hs.integers(0, 15), max_size=3), hs.integers(0, 15))
def test_nested_pairs(ns, m):
    z = coding.nested_pair(ns, m)
    assert coding.nested_unpair(z, len(ns)) == (list(ns), m)
