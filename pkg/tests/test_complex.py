from fractions import Fraction
from itertools import combinations
from math import factorial

import pytest
from hypothesis import given, strategies as st

from opcalc._poset import Poset
from opcalc.complex import (
    CellularCosheaf,
    category_of_elements,
    cell_structure,
    constant_cosheaf,
    det,
    f_vector,
    homology,
    induced_homology_map,
    nerve,
    order_polytope_simplices,
    pullback_cosheaf,
    realize_cosheaf,
    simplicial_complex,
    smith,
    staircase,
)
from opcalc.psi import RelCategory


def sphere(n):
    return simplicial_complex(combinations(range(n + 2), n + 1))


def rp2():
    # six-vertex real projective plane
    tris = [(0, 1, 2), (0, 2, 3), (0, 3, 4), (0, 4, 5), (0, 5, 1), (1, 2, 4), (2, 3, 5), (3, 4, 1), (4, 5, 2), (5, 1, 3)]
    return simplicial_complex(tris)


def test_spheres_and_point():
    assert homology(simplicial_complex([(0,)])).betti == [1]
    for n in range(1, 4):
        h = homology(sphere(n))
        assert h.betti == [1] + [0] * (n - 1) + [1]
        assert h.euler() == 1 + (-1) ** n


def test_torsion_of_projective_plane():
    h = homology(rp2())
    assert h.betti == [1, 0, 0]
    assert h.torsion[1] == [2]


def test_simplex_is_acyclic_and_empty_is_not():
    assert homology(simplicial_complex([tuple(range(4))])).is_acyclic
    assert not homology(simplicial_complex([])).is_acyclic


def test_relative_homology_of_disk_rel_boundary():
    disk = simplicial_complex([(0, 1, 2)])
    bnd = {k for k in disk.keys() if len(k) < 3}
    assert homology(disk, bnd).betti == [0, 0, 1]


def test_induced_map_on_inclusion():
    x = sphere(2)
    a = {s for s in x.keys() if 3 not in s}  # a disk
    m = induced_homology_map(x, a)
    assert m.source.betti == [1, 0, 0]
    assert m.iso[0]
    assert m.target.betti == [1, 0, 1]


def test_f_vector_and_faces():
    x = sphere(2)
    assert f_vector(x) == [4, 6, 4]
    x.check()


def _int_matrices():
    return st.integers(1, 4).flatmap(
        lambda m: st.integers(1, 4).flatmap(
            lambda n: st.lists(st.lists(st.integers(-6, 6), min_size=n, max_size=n), min_size=m, max_size=m)
        )
    )


def _mul(a, b):
    return [[sum(x * y for x, y in zip(r, c)) for c in zip(*b)] for r in a]


@given(_int_matrices())
def test_smith_form_properties(a):
    s, L, Li, R, Ri = smith(a)
    assert _mul(_mul(L, a), R) == s
    m, n = len(a), len(a[0])
    assert _mul(L, Li) == [[int(i == j) for j in range(m)] for i in range(m)]
    assert _mul(R, Ri) == [[int(i == j) for j in range(n)] for i in range(n)]
    diag = [s[i][i] for i in range(min(m, n))]
    assert all(s[i][j] == 0 for i in range(m) for j in range(n) if i != j)
    nz = [d for d in diag if d]
    assert all(d > 0 for d in nz)
    assert all(nz[i + 1] % nz[i] == 0 for i in range(len(nz) - 1))
    if m == n:
        p = 1
        for d in diag:
            p *= d
        assert abs(det(a)) == p


@given(st.lists(st.lists(st.fractions(min_value=-3, max_value=3, max_denominator=5), min_size=3, max_size=3), min_size=3, max_size=3))
def test_det_multiplicative_under_row_swap(m):
    swapped = [m[1], m[0], m[2]]
    assert det(swapped) == -det(m)


def _random_posets():
    return st.integers(1, 5).flatmap(
        lambda n: st.sets(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)).filter(lambda p: p[0] < p[1])).map(
            lambda cs: Poset(tuple(range(n)), frozenset(cs))
        )
    )


@given(_random_posets())
def test_order_polytope_volume_is_number_of_extensions(p):
    simplices, total = order_polytope_simplices(p)
    d = len(p.elements)
    assert total == Fraction(len(p.linear_extensions()), factorial(d))
    assert all(s.volume == Fraction(1, factorial(d)) for s in simplices)


def test_staircase_chain():
    assert staircase(("a", "b")) == [
        {"a": 0, "b": 0},
        {"a": 0, "b": 1},
        {"a": 1, "b": 1},
    ]


def test_nerve_of_a_poset_with_top_is_contractible():
    cat = RelCategory(("a", "b", "c"), frozenset({("a", "c"), ("b", "c")}))
    assert homology(nerve(cat)).is_acyclic
    no_top = RelCategory(("a", "b", "c", "d"), frozenset({("a", "c"), ("b", "c"), ("a", "d"), ("b", "d")}))
    assert homology(nerve(no_top)).betti == [1, 1]


def test_forbidden_arrow_removes_simplices():
    cat = RelCategory(("a", "b", "c"), frozenset({("a", "b"), ("b", "c")}), frozenset({("a", "c")}))
    assert f_vector(nerve(cat)) == [3, 2]


class _Diagram:
    def __init__(self, values, maps):
        self.values, self._maps = values, maps

    def index_map(self, a, b):
        return self._maps[(a, b)]


def test_category_of_elements_counts():
    base = RelCategory(("a", "b"), frozenset({("a", "b")}))
    d = _Diagram({"a": [0, 1], "b": [0]}, {("a", "b"): [0, 0]})
    cat = category_of_elements(base, d)
    assert len(cat.objects) == 3
    assert homology(nerve(cat)).is_acyclic


def test_constant_cosheaf_realizes_the_cell_poset():
    x = sphere(1)
    dims, faces, members = cell_structure(x, lambda k: k)
    cs = constant_cosheaf(dims, faces)
    assert homology(realize_cosheaf(cs)).betti == [1, 1]
    two = constant_cosheaf(dims, faces, 2)
    assert homology(realize_cosheaf(two)).betti == [2, 2]


def test_identity_pullback_is_the_same_cosheaf():
    x = sphere(1)
    dims, faces, _ = cell_structure(x, lambda k: k)
    cs = constant_cosheaf(dims, faces, 2)
    pb = pullback_cosheaf(cs, dims, faces, {c: c for c in dims})
    assert pb.values == cs.values
    assert homology(realize_cosheaf(pb)).same_groups(homology(realize_cosheaf(cs)))


def test_cosheaf_with_bad_map_is_rejected():
    dims = {"e": 1, "v": 0}
    faces = {"e": ("v",), "v": ()}
    with pytest.raises(ValueError):
        CellularCosheaf(dims, faces, {"e": [0], "v": [0]}, {("e", "v"): [3]}).check()
