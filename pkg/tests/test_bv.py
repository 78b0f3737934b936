import random
from fractions import Fraction

import pytest
from hypothesis import assume, given, strategies as st

from opcalc import bv
from opcalc.algebra import builtin, perm_compose
from opcalc.trees import Node

ASSOC = builtin("assoc", 5)
COMM = builtin("comm", 5)

FAMS = {
    ("IbLambda", "assoc"): bv.Family("IbLambda", ASSOC),
    ("IbLambda", "comm"): bv.Family("IbLambda", COMM),
    ("IbSigma", "assoc"): bv.Family("IbSigma", ASSOC),
    ("BLambda", "assoc"): bv.Family("BLambda", ASSOC),
    ("BSigma", "comm"): bv.Family("BSigma", COMM),
    ("IbBar", "assoc"): bv.Family("IbBar", ASSOC),
    ("IbBar", "comm"): bv.Family("IbBar", COMM),
}

seeds = st.integers(0, 10 ** 6)
fam_keys = st.sampled_from(sorted(FAMS))


def sample(key, k, seed):
    fam = FAMS[key]
    # trees with section have pearls of arity at least one
    assume(not (fam.base == "B" and k == 0))
    rng = random.Random(seed)
    return fam, bv.random_element(fam, k, rng), rng


@given(fam_keys, st.integers(0, 3), seeds)
def test_normalize_is_idempotent(key, k, seed):
    fam, x, _ = sample(key, k, seed)
    assert fam.normalize(x).code == x.code


@given(fam_keys, st.integers(0, 3), seeds)
def test_normal_form_ignores_the_representative(key, k, seed):
    fam, x, rng = sample(key, k, seed)
    y = bv.perturb(x, fam, rng)
    assert fam.normalize(y).code == x.code
    assert fam.normalize(y, rng=rng).code == x.code


@given(st.sampled_from(["assoc", "comm"]), st.integers(0, 3), seeds)
def test_gamma_roundtrip(name, k, seed):
    fam = FAMS[("IbBar", name)]
    x = bv.random_element(fam.ib, k, random.Random(seed))
    y = fam.gamma_forward(x)
    assert fam.gamma_inverse(y).code == x.code
    assert bv.filtration_index(x, fam.ib) == bv.filtration_index(y, fam)


@given(st.sampled_from([("IbLambda", "assoc"), ("IbLambda", "comm"), ("BLambda", "assoc")]),
       st.integers(1, 3), seeds, st.data())
def test_symmetric_action_is_a_right_action(key, k, seed, data):
    fam, x, _ = sample(key, k, seed)
    perm = st.permutations(list(range(1, k + 1))).map(tuple)
    s, t = data.draw(perm), data.draw(perm)
    lhs = bv.act_sigma(bv.act_sigma(x, fam, s), fam, t)
    assert lhs.code == bv.act_sigma(x, fam, perm_compose(s, t)).code


@given(st.sampled_from([("IbLambda", "assoc"), ("IbLambda", "comm")]), st.integers(1, 3), seeds, st.data())
def test_projection_is_equivariant(key, k, seed, data):
    fam, x, _ = sample(key, k, seed)
    s = data.draw(st.permutations(list(range(1, k + 1))).map(tuple))
    lhs = bv.project_mu(bv.act_sigma(x, fam, s), fam)
    assert lhs == fam.operad.act(bv.project_mu(x, fam), s)


@given(st.sampled_from(["assoc", "comm"]), st.integers(1, 3), seeds)
def test_projection_of_pairs_from_parts(name, k, seed):
    fam = FAMS[("IbBar", name)]
    x = fam.gamma_forward(bv.random_element(fam.ib, k, random.Random(seed)))
    assert bv.project_mu(x, fam) == bv.project_mu_pair(x, fam)


@given(st.integers(1, 3), seeds)
def test_unit_is_neutral_for_the_right_action(k, seed):
    fam, x, _ = sample(("IbLambda", "assoc"), k, seed)
    u = ASSOC.els(1)[0]
    for i in range(1, k + 1):
        assert bv.act(x, fam, "right", u, i).code == x.code


def test_unit_elements():
    for key in [("IbLambda", "assoc"), ("BLambda", "assoc"), ("IbBar", "comm")]:
        fam = FAMS[key]
        u = bv.unit_element(fam)
        assert u.arity == 1
        assert fam.normalize(u).code == u.code


def test_parameters_are_validated():
    fam = FAMS[("IbLambda", "assoc")]
    ok = Node("p", (Node("v", (1, 2), "1.2", Fraction(1, 2)),), "1")
    fam.validate(fam.element(ok))
    with pytest.raises(ValueError):
        fam.validate(fam.element(Node("p", (Node("v", (1, 2), "1.2", Fraction(3, 2)),), "1")))
    with pytest.raises(ValueError):
        fam.validate(fam.element(Node("p", (Node("v", (1, 2), "9.9", Fraction(1, 2)),), "1")))


def test_sigma_families_are_not_complexes():
    with pytest.raises(ValueError):
        bv.build_family_complex(FAMS[("IbSigma", "assoc")], 2)


def test_operad_arity_guard():
    with pytest.raises(ValueError):
        bv.build_family_complex(bv.Family("IbLambda", builtin("assoc", 2)), 2)


@pytest.mark.parametrize(
    "fam, name, k, betti",
    [
        ("IbLambda", "assoc", 2, [2, 0, 0]),
        ("IbLambda", "assoc", 3, [6, 0, 0, 0]),
        ("IbLambda", "comm", 2, [1, 0, 0]),
        ("IbLambda", "comm", 3, [1, 0, 0, 0]),
        ("BLambda", "assoc", 2, [2, 0]),
        ("IbBar", "comm", 2, [1, 0, 0]),
        ("IbBar", "comm", 3, [1, 0, 0, 0]),
    ],
)
def test_family_complex_homology(fam, name, k, betti):
    fc = bv.build_family_complex(bv.Family(fam, builtin(name, k + 1)), k)
    assert fc.homology().betti == betti


def test_comm_pearled_cells_in_arity_two():
    fc = bv.build_family_complex(bv.Family("IbLambda", builtin("comm", 3)), 2)
    assert len(fc.maximal_cells(2)) == 3
    fb = bv.build_family_complex(bv.Family("IbBar", builtin("comm", 3)), 2)
    assert len(fb.maximal_cells(2)) == 5


def test_w_construction():
    assert bv.w_construction(builtin("assoc", 3), "W", 3).homology().betti == [6, 0]
    assert bv.w_construction(builtin("assoc", 1), "W1", 1).homology().betti == [1]
    with pytest.raises(ValueError):
        bv.w_construction(builtin("assoc", 3), "V", 3)
