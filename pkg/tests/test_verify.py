from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from opcalc import verify as V
from opcalc import bv
from opcalc.algebra import builtin, monoid_bimodule, self_ibimodule
from opcalc.complex import homology


@pytest.mark.parametrize("k", [0, 1, 2, 3])
def test_delta_chart(k):
    r = V.verify_delta(k)
    assert r.ok, [c for c in r.checks if not c.ok]
    assert r.witnesses == []


def test_delta_reports_each_tree():
    r = V.verify_delta(3)
    assert r.trees
    for info in r.trees.values():
        assert set(info["verdicts"].values()) == {True}


@pytest.mark.parametrize("name, k", [("comm", 2), ("assoc", 2), ("assoc", 3)])
def test_gamma(name, k):
    r = V.verify_gamma(builtin(name, k + 1), k=k, samples=150, seed=3)
    assert r.ok, [c for c in r.checks if not c.ok]


def test_gamma_comm_refinement_counts():
    r = V.verify_gamma(builtin("comm", 3), k=2, samples=20)
    got = {c.name: c.got for c in r.checks}
    assert got["top cells of the pearled complex"] == 3
    assert got["top cells after the refinement"] == 5
    assert got["pieces per top cell"] == [1, 1, 3]


@pytest.mark.parametrize("name, k", [("assoc", 1), ("assoc", 2), ("comm", 2), ("assoc", 3)])
def test_xi(name, k):
    r = V.verify_xi(builtin(name, k + 1), k=k, samples=60, pairs=120, seed=1)
    assert r.ok, [c for c in r.checks if not c.ok]


def test_xi_fails_without_the_restriction(monkeypatch):
    monkeypatch.setattr(V, "tau", lambda a, ib, i: a)
    r = V.verify_xi(builtin("assoc", 3), k=2, samples=60, pairs=120, seed=1)
    assert not r.ok


def test_xi_table_keeps_the_boundary_at_the_basepoint():
    o = builtin("assoc", 3)
    fam = bv.Family("IbBar", o)
    kmod = monoid_bimodule(o)
    point = sorted(V.boundary_points(fam))[0]
    other = next(e for e in kmod.elements(1) if e != "01")
    with pytest.raises(ValueError):
        V.XiTable(fam, kmod, "01", {point: other})
    table = V.hashed_table(fam, kmod, "01")
    assert table(point) == "01"


def test_xi_needs_a_basepoint_for_a_custom_target():
    o = builtin("assoc", 3)
    with pytest.raises(ValueError):
        V.verify_xi(o, m=monoid_bimodule(o), k=2)


@pytest.mark.parametrize("i", [1, 2, 3])
def test_cubical_retraction(i):
    r = V.verify_retraction("cubical", {"i": i}, samples=100, seed=2)
    assert r.ok, [c for c in r.checks if not c.ok]


@given(st.lists(st.fractions(0, 1, max_denominator=12), min_size=3, max_size=3), st.integers(0, 2))
def test_cubical_projection_endpoints(x, c):
    x = tuple(x)
    assert V.cubical_homotopy(x, c, Fraction(0)) == x
    assert V.cubical_homotopy(x, c, Fraction(1)) == V.cubical_projection(x, c)


@pytest.mark.parametrize("k", [2, 3])
def test_d1_retraction(k):
    r = V.verify_retraction("d1", {"operad": builtin("comm", k + 1), "k": k}, samples=60, seed=0)
    assert r.ok, [c for c in r.checks if not c.ok]


def test_d1_fails_without_the_stop(monkeypatch):
    monkeypatch.setattr(V, "d1_stop_time", lambda x: None)
    r = V.verify_retraction("d1", {"operad": builtin("comm", 4), "k": 3}, samples=60, seed=0)
    assert not r.ok


def test_d1_needs_two_inputs():
    with pytest.raises(ValueError):
        V.verify_retraction("d1", {"operad": builtin("comm", 2), "k": 1})


def test_unknown_retraction():
    with pytest.raises(ValueError):
        V.verify_retraction("spiral", {})


@pytest.mark.parametrize("mode, betti", [("coherent", [2, 2, 0]), ("strong", [2, 0, 0])])
def test_coherence_assoc(mode, betti):
    r = V.coherence_check(self_ibimodule(builtin("assoc", 3)), 2, mode)
    assert r.ok
    assert r.verdict.startswith("homologically")
    assert r.source["betti"] == betti or r.target["betti"] == betti


def test_coherence_rejects_unknown_mode():
    with pytest.raises(ValueError):
        V.coherence_check(self_ibimodule(builtin("assoc", 3)), 2, "weak")


@pytest.mark.parametrize("name", ["comm", "assoc"])
def test_models_agree(name):
    r = V.compare_models(builtin(name, 3), 2)
    assert r.ok, [c for c in r.checks if not c.ok]


def test_mapping_cone_of_assoc():
    assert homology(V.mapping_cone(self_ibimodule(builtin("assoc", 3)))).betti == [1, 1]


def test_fm_strata():
    r = V.fm_strata("F", 3)
    assert len(r.strata) == 4
    assert r.data["by_codim"] == {0: 1, 1: 3}
    assert V.fm_strata("F", 1).strata == [("V(1)", 0)] or len(V.fm_strata("F", 1).strata) == 1


@pytest.mark.parametrize("k", [2, 3, 4])
def test_preimage_of_the_corolla(k):
    r = V.fm_strata("IF", k, preimage_of="corolla")
    assert r.ok
    assert [len(r.preimage[t]) for t in ("I", "II", "III", "IV")] == [1, k + 1, 1, k + 1]


def test_preimage_of_unknown_tree():
    with pytest.raises(ValueError):
        V.fm_strata("IF", 3, preimage_of="V(1,2)")


def test_jsonable():
    assert V.jsonable({"a": Fraction(1, 2), "b": Fraction(4, 2), "c": [Fraction(1, 3)]}) == {"a": "1/2", "b": "2", "c": ["1/3"]}
