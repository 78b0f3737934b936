import pytest
from hypothesis import given, strategies as st

from opcalc.algebra import (
    El,
    StructureError,
    bimodule_map_check,
    builtin,
    induced_ibimodule,
    lambda_seq_of,
    matching_object,
    monoid_bimodule,
    perm_compose,
    perm_from_order,
    perm_identity,
    perm_inverse,
    perms,
    rho_diagram,
    self_bimodule,
    self_ibimodule,
    t2_mul,
    truncate,
    validate_structure,
    T2,
)
from opcalc.psi import build_psi


def perm_st(n):
    return st.permutations(list(range(1, n + 1))).map(tuple)


@given(st.integers(0, 5).flatmap(lambda n: st.tuples(perm_st(n), perm_st(n), perm_st(n))))
def test_permutation_group_laws(sts):
    s, t, u = sts
    n = len(s)
    e = perm_identity(n)
    assert perm_compose(s, e) == s == perm_compose(e, s)
    assert perm_compose(s, perm_inverse(s)) == e
    assert perm_compose(perm_compose(s, t), u) == perm_compose(s, perm_compose(t, u))


@given(st.integers(0, 5).flatmap(perm_st))
def test_perm_from_order_inverts(order):
    assert perm_from_order(list(order)) == perm_inverse(order)


@pytest.mark.parametrize("name", ["comm", "assoc", "lambda"])
def test_builtins_satisfy_the_axioms(name):
    o = builtin(name, 4)
    assert validate_structure(o).ok
    assert validate_structure(self_ibimodule(o)).ok
    assert validate_structure(self_bimodule(o), 3).ok


def test_builtin_sizes():
    a = builtin("assoc", 4)
    assert [a.size(n) for n in range(5)] == [1, 1, 2, 6, 24]
    assert a.doubly_reduced
    lam = builtin("lambda", 3)
    assert [lam.size(n) for n in range(4)] == [1, 1, 0, 0]


def test_assoc_composition_of_words():
    a = builtin("assoc", 3)
    assert a.compose(El(2, "2.1"), 1, El(2, "1.2")) == El(3, "3.1.2")


def test_monoid_bimodule():
    a = builtin("assoc", 3)
    k = monoid_bimodule(a)
    assert validate_structure(k, 3).ok
    eta = lambda x: El(x.n, "01")  # noqa: E731
    assert bimodule_map_check(a, k, eta, 3) == []
    with pytest.raises(ValueError):
        monoid_bimodule(builtin("comm", 3))


@given(st.sampled_from(T2), st.sampled_from(T2), st.sampled_from(T2))
def test_t2_is_a_monoid(a, b, c):
    assert t2_mul(t2_mul(a, b), c) == t2_mul(a, t2_mul(b, c))
    assert t2_mul("01", a) == a == t2_mul(a, "01")


def test_monoid_left_action_reads_the_word():
    k = monoid_bimodule(builtin("assoc", 2))
    # x = 2.1 multiplies the second input first
    got = k.left(El(2, "2.1"), [El(1, "10"), El(1, "00")])
    assert got.id == t2_mul(t2_mul("01", "00"), "10")


def test_missing_entry_is_named():
    a = builtin("assoc", 3)
    key = next(iter(sorted(a.comp)))
    del a.comp[key]
    with pytest.raises(StructureError) as e:
        validate_structure(a)
    assert e.value.code == "E_INCOMPLETE"
    assert e.value.witness == key


def test_broken_associativity_is_reported():
    a = builtin("assoc", 3)
    a.comp[(2, "1.2", 1, 2, "1.2")] = "2.1.3"
    rep = validate_structure(a)
    assert not rep.ok
    assert "operad:assoc" in rep.failures()


def test_truncation():
    a = truncate(builtin("assoc", 4), 2)
    assert a.max_arity == 2
    assert validate_structure(a).ok
    assert all(n <= 2 for n in a.spaces)


def test_matching_objects():
    a = lambda_seq_of(builtin("assoc", 3))
    assert len(matching_object(a, 3)) == 8
    # in arity 2 the family lives on A(1) x A(1), a point
    assert len(matching_object(a, 2)) == 1
    c = lambda_seq_of(builtin("comm", 4))
    assert [len(matching_object(c, r)) for r in range(5)] == [1, 1, 1, 1, 1]


def test_induced_ibimodule_of_the_operad_is_itself():
    a = builtin("assoc", 3)
    n = induced_ibimodule(self_bimodule(a), lambda x: x)
    ref = self_ibimodule(a)
    assert n.left_tab == ref.left_tab
    assert validate_structure(n).ok


def test_rho_diagram_is_functorial():
    for name in ("assoc", "comm"):
        for k in (2, 3):
            rho = rho_diagram(self_ibimodule(builtin(name, k + 1)), k)
            assert rho.check_functorial() == []


def test_rho_sizes_at_corolla():
    psi = build_psi(3)
    rho = rho_diagram(self_ibimodule(builtin("assoc", 4)), 3)
    assert len(rho.values[psi.c_k]) == 6
    assert all(len(v) >= 1 for v in rho.values.values())


def test_perms_count():
    assert [len(perms(n)) for n in range(5)] == [1, 1, 2, 6, 24]
