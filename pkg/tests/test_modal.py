import pytest

from realmod import heyting as H
from realmod import modal as M
from realmod.heyting import Heyting
from realmod.kernel import STANDARD as st, TermBackend
from realmod.terms import enumerate_closed_terms

h = Heyting(TermBackend(50_000), fuel=50_000)
F = {0: H.numeral_set(3), 1: H.numeral_set(0, 1)}
G = {0: H.numeral_set(3), 1: H.TOP}


def test_probe_corpus_labels():
    assert set(M.probe_labels()) >= {"default", "minimal", "wide"}
    for label in M.probe_labels():
        fam = M.load_probes(label)
        assert fam.describe()[:2] == ["F", "T"]


def test_probe_file_round_trip(tmp_path):
    p = tmp_path / "mine.sexp"
    p.write_text('(probes mine ("{3~}" (nums 3)) ("T=>{3~}" (imp top (nums 3))))\n')
    fam = M.load_probe_file(p)
    assert fam.describe() == ["F", "T", "{3~}", "T=>{3~}"]
    with pytest.raises(KeyError):
        M.load_probe_file(p, "other")


def test_s4_on_mu():
    probes = M.default_probes()
    f, g = M.mu(F), M.mu(G)
    out = M.check_s4(h, f, g, probes)
    assert {k: v.kind for k, v in out.items()} == {"K": "Confirmed", "T": "Confirmed", "Four": "Confirmed"}


def test_mu_laws_both_directions():
    out = M.mu_laws(h, F, G, M.default_probes(), e_fg=st.i)
    assert all(v.kind == "Confirmed" for v in out.values()), {k: v.kind for k, v in out.items()}


def test_box_is_below_its_argument():
    probes = M.default_probes()
    f = M.mu(F)
    assert M.check_modal(h, M.s4_witnesses(f.cert)["T"], M.box(f, probes), f, probes).kind == "Confirmed"


def test_s5_refuter_never_confirms():
    r = M.s5_refuter(h, enumerate_closed_terms(40))
    assert all(e.verdict in ("Refuted", "Inconclusive") for e in r["entries"])
    assert r["counts"]["Refuted"] >= 38


def test_singleton_needs_one_point():
    with pytest.raises(ValueError):
        M.singleton_s5_witness(h, M.mu(F), M.default_probes())
