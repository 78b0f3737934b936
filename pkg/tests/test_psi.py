import pytest

from opcalc.psi import (
    SELECTORS,
    build_psi,
    in_lower,
    in_upper,
    initial_in_boundary_U,
    lower_by_reachability,
    restrict,
    under_category,
    upper_by_reachability,
)


def test_sizes():
    assert [len(build_psi(k).objects) for k in range(5)] == [1, 2, 8, 52, 472]


def test_boundary_U_zigzag_k2():
    cat = restrict(build_psi(2), "boundary_U")
    assert len(cat.objects) == 5
    pairs = cat.covering_pairs()
    assert len(pairs) == 4
    # a zigzag: two sources of degree two, three sinks with the middle one of degree two
    out_deg = {o: sum(1 for a, _ in pairs if a == o) for o in cat.objects}
    in_deg = {o: sum(1 for _, b in pairs if b == o) for o in cat.objects}
    assert sorted(out_deg.values()) == [0, 0, 0, 2, 2]
    assert sorted(in_deg.values()) == [0, 0, 1, 1, 2]


def test_UL_k2():
    cat = restrict(build_psi(2), "UL")
    assert len(cat.objects) == 2
    assert len(cat.arrows()) == 1


def test_prime_drops_one_arrow():
    psi = build_psi(3)
    p = restrict(psi, "prime")
    assert len(p.arrows()) == len(psi.base.arrows()) - 1
    assert not p.leq(psi.c_prime_k, psi.c_k)
    assert p.composition_closed()


def test_corolla_is_terminal():
    for k in range(4):
        psi = build_psi(k)
        assert psi.base.terminal_objects() == [psi.c_k]


@pytest.mark.parametrize("k", [2, 3])
def test_upper_and_lower_are_closed(k):
    psi = build_psi(k)
    up = {o for o in psi.objects if in_upper(psi.tree(o))}
    low = {o for o in psi.objects if in_lower(psi.tree(o))}
    assert up == upper_by_reachability(psi)
    assert low == lower_by_reachability(psi)


def test_selectors_need_k2():
    psi = build_psi(1)
    assert restrict(psi, "boundary").objects == tuple(o for o in psi.objects if o != psi.c_k)
    for s in SELECTORS:
        if s != "boundary":
            with pytest.raises(ValueError):
                restrict(psi, s)


def test_under_category_is_a_cube():
    psi = build_psi(3)
    for o in psi.objects:
        u = under_category(psi, o)
        n = psi.tree(o).n_inner_edges
        assert len(u.subsets) == 2 ** n


def test_initial_object_in_boundary_U():
    psi = build_psi(2)
    cat = restrict(psi, "boundary_U")
    for o in cat.objects:
        first = initial_in_boundary_U(psi, o)
        assert first is None or first in cat.objects
