import pytest

from realmod import ehp as E
from realmod.heyting import Heyting
from realmod.kernel import TermBackend
from realmod.sexp import dump, read


def test_library_has_all_laws():
    lib = E.canned_library()
    assert sorted(lib) == sorted(E.LAWS)


@pytest.mark.parametrize("name", E.LAW_ORDER)
def test_canned_derivation_validates(name):
    lib = E.canned_library()
    assert E.validate_derivation(lib[name], E.LAWS[name]) == E.LAWS[name]


@pytest.mark.parametrize("name", E.LAW_ORDER)
def test_derivation_sexp_round_trip(name):
    dv = E.build_library()[name]
    again = E.parse_deriv(read(dump(E.deriv_sexp(dv))))
    assert E.validate_derivation(again, E.LAWS[name]) == E.LAWS[name]


def test_wrong_conclusion_is_rejected():
    lib = E.canned_library()
    with pytest.raises(E.RuleError):
        E.validate_derivation(lib["d1"], E.LAWS["d2"])


@pytest.mark.parametrize("name", ["d1", "d5", "d7.lr", "d10.rl"])
def test_extracted_witness_realizes_law(name):
    h = Heyting(TermBackend(50_000), fuel=50_000)
    ws = E.extracted_witnesses()
    assert E.check_law(h, name, ws[name], count=10, seed=5).kind == "Confirmed"
