import pytest
from hypothesis import given, strategies as hs

from realmod.kernel import (
    STANDARD as st, TermBackend, Tri, default_fuel, fixpoint, lam, numeral, numeral_value, std_env,
)
from realmod.terms import K, S, app, apps, enumerate_closed_terms, normalize, var

SMALL = enumerate_closed_terms(40)
terms = hs.sampled_from(SMALL)


@given(terms, terms)
def test_k_law(a, b):
    assert normalize(apps(K, a, b), 1000)[0] == normalize(a, 1000)[0]


@given(terms, terms, terms)
def test_s_law(a, b, c):
    lhs, _ = normalize(apps(S, a, b, c), 5000)
    rhs, _ = normalize(app(app(a, c), app(b, c)), 5000)
    assert lhs == rhs


def test_omega_runs_out_of_fuel():
    omega = lam(r"(\x. x x) (\x. x x)")
    nf, steps = normalize(omega, 500)
    assert nf is None and steps >= 500


@given(hs.integers(0, 30))
def test_numerals_decode(n):
    assert numeral_value(numeral(n)) == n


def test_bracket_abstraction_applies():
    x, y = var("x"), var("y")
    swap = lam(r"\a b. b a")
    assert normalize(apps(swap, x, y), 100)[0] == app(y, x)


def test_pairing_projections():
    x, y = var("x"), var("y")
    pr = apps(st.p, x, y)
    assert normalize(app(st.p0, pr), 100)[0] == x
    assert normalize(app(st.p1, pr), 100)[0] == y


def test_env_reference_to_standard_elements():
    t = lam(r"\c. p1 c", std_env())
    assert normalize(app(t, apps(st.p, var("u"), var("v"))), 100)[0] == var("v")


def test_fixpoint_unfolds():
    f = lam(r"\r n. n")
    y = fixpoint(f)
    assert normalize(app(y, var("z")), 1000)[0] == var("z")


def test_default_fuel_env(monkeypatch):
    monkeypatch.delenv("REALMOD_FUEL", raising=False)
    assert default_fuel() == 100_000
    monkeypatch.setenv("REALMOD_FUEL", "1234")
    assert default_fuel() == 1234
    assert TermBackend().fuel == 1234
    monkeypatch.setenv("REALMOD_FUEL", "-3")
    with pytest.raises(ValueError):
        default_fuel()


def test_term_backend_separates_k_and_kbar():
    b = TermBackend(1000)
    assert b.equal(st.k, st.kbar) is Tri.OUT
    assert b.equal(st.k, st.k) is Tri.IN
