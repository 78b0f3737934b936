import random

import pytest
from hypothesis import given, strategies as st

from opcalc.trees import (
    Node,
    PearledTree,
    contract_edges,
    contract_node,
    contraction_map,
    corolla,
    enumerate_tree_classes,
    leaves,
    parse_tree,
    pearled_corolla,
    shape_code,
    tree_class,
)

# rooted trees with labelled leaves and vertices of arity >= 2: 1, 1, 4, 26 (k = 1..4)
# pearled trees: 1, 2, 8, 52, 472 (k = 0..4)
COUNTS = {"rooted": [0, 1, 1, 4, 26], "pearled": [1, 2, 8, 52, 472]}


@pytest.mark.parametrize("kind", sorted(COUNTS))
def test_enumeration_counts(kind):
    assert [len(enumerate_tree_classes(kind, k)) for k in range(5)] == COUNTS[kind]


def test_codes_are_distinct_and_canonical():
    for k in range(4):
        cs = enumerate_tree_classes("pearled", k)
        assert len({c.code for c in cs}) == len(cs)
        for c in cs:
            assert tree_class(c.root, "pearled").code == c.code


def _shuffle(x, rng):
    if isinstance(x, int):
        return x
    kids = [_shuffle(c, rng) for c in x.kids]
    rng.shuffle(kids)
    return x._replace(kids=tuple(kids))


@given(st.integers(0, 3), st.integers(0, 10**6), st.integers(0, 1000))
def test_class_ignores_planar_order(k, pick, seed):
    cs = enumerate_tree_classes("pearled", k)
    c = cs[pick % len(cs)]
    shuffled = _shuffle(c.root, random.Random(seed))
    assert tree_class(shuffled, "pearled").code == c.code


def test_parse_roundtrip():
    for c in enumerate_tree_classes("pearled", 3):
        assert shape_code(parse_tree(c.code)) == c.code


def test_pearled_tree_structure():
    t = PearledTree(parse_tree("V(P(),V(1,2))"))
    assert t.nodes[t.pearl].kind == "p"
    assert t.trunk == (t.pearl, 0)
    assert t.dist[0] == 1
    # the vertex off the trunk has the root as its toward-pearl neighbour
    w = next(v for v in range(t.n_vertices) if v not in t.trunk)
    assert t.toward[w] == 0


def test_contraction_keeps_the_pearl():
    root = parse_tree("V(1,P(2))")
    merged = contract_node(root, (1,))
    assert merged.kind == "p"
    assert sorted(leaves(merged)) == [1, 2]


@given(st.integers(0, 10**6), st.data())
def test_partial_contractions_compose(pick, data):
    cs = [c for c in enumerate_tree_classes("pearled", 3) if c.n_vertices > 2]
    c = cs[pick % len(cs)]
    edges = list(range(1, c.n_vertices))
    chosen = data.draw(st.lists(st.sampled_from(edges), unique=True, min_size=1))
    part = contract_edges(c, chosen)
    assert part.n_vertices == c.n_vertices - len(chosen)
    assert len(set(contraction_map(c.representative, chosen))) == part.n_vertices
    # contracting what is left reaches the pearled corolla
    assert contract_edges(part, range(1, part.n_vertices)).code == tree_class(pearled_corolla(3), "pearled").code


def test_corollas():
    assert tree_class(corolla(3), "rooted").code == "V(1,2,3)"
    assert tree_class(pearled_corolla(2), "pearled").code == "P(1,2)"


def test_bad_codes_rejected():
    with pytest.raises(ValueError):
        parse_tree("V(1,2))")
    with pytest.raises((ValueError, IndexError)):
        parse_tree("V(1,")


def test_node_leaves():
    assert leaves(Node("v", (2, Node("v", (1, 3))))) == [2, 1, 3]
