"""Rooted trees, pearled trees and trees with section.

Trees are immutable nested ``Node`` values.  Leaves are positive integers
(their labels) and the output edge is implicit, so leaves and the root edge
are half-open.  Vertex kinds are short tags: ``"v"`` for an ordinary vertex
and ``"p"`` for a pearl.  Other modules attach operad labels and real
parameters through the ``label`` and ``t`` fields.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import permutations, product
from typing import NamedTuple, Union

from ._poset import Poset

PEARL_KINDS = frozenset({"p", "bp"})


class Node(NamedTuple):
    kind: str
    kids: tuple = ()
    label: str | None = None
    t: Fraction | None = None

    @property
    def arity(self) -> int:
        return len(self.kids)

    @property
    def is_pearl(self) -> bool:
        return self.kind in PEARL_KINDS


Child = Union[Node, int]


def is_leaf(x: Child) -> bool:
    return isinstance(x, int)


def leaves(x: Child) -> list[int]:
    """Leaf labels in planar order."""
    if isinstance(x, int):
        return [x]
    out: list[int] = []
    for c in x.kids:
        out.extend(leaves(c))
    return out


def vertices(x: Child) -> list[Node]:
    """Vertices in preorder."""
    if isinstance(x, int):
        return []
    out = [x]
    for c in x.kids:
        out.extend(vertices(c))
    return out


def fmt_q(q: Fraction | None) -> str:
    if q is None:
        return ""
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def shape_code(x: Child) -> str:
    """Label-free code of the non-planar class; children codes are sorted."""
    if isinstance(x, int):
        return str(x)
    return x.kind.upper() + "(" + ",".join(sorted(shape_code(c) for c in x.kids)) + ")"


def full_code(x: Child) -> str:
    """Planar code including labels and parameters (no sorting)."""
    if isinstance(x, int):
        return str(x)
    head = x.kind.upper()
    if x.label is not None or x.t is not None:
        head += "[" + (x.label or "") + ("@" + fmt_q(x.t) if x.t is not None else "") + "]"
    return head + "(" + ",".join(full_code(c) for c in x.kids) + ")"


def sort_shape(x: Child) -> tuple[Child, list[int]]:
    """Sort children by shape code.  Returns the sorted tree and the leaf order map.

    The list ``perm`` satisfies ``leaves(sorted)[q] == leaves(x)[perm[q]]``.
    """
    s, perm, _ = _sort_shape(x)
    return s, perm


def _sort_shape(x: Child) -> tuple[Child, list[int], str]:
    # the shape code travels upwards so each subtree is encoded once
    if isinstance(x, int):
        return x, [0], str(x)
    parts = []
    offset = 0
    for c in x.kids:
        sc, p, code = _sort_shape(c)
        parts.append((code, sc, [offset + i for i in p]))
        offset += len(p)
    parts.sort(key=lambda r: r[0])
    perm: list[int] = []
    for _, _, p in parts:
        perm.extend(p)
    code = x.kind.upper() + "(" + ",".join(r[0] for r in parts) + ")"
    return x._replace(kids=tuple(r[1] for r in parts)), perm, code


# ---------------------------------------------------------------------------
# planar views


@dataclass(frozen=True)
class PlanarTree:
    """Indexed view of a tree: vertices in preorder, root is vertex 0."""

    root: Node

    @cached_property
    def nodes(self) -> tuple[Node, ...]:
        return tuple(vertices(self.root))

    @cached_property
    def _index(self):
        parent: list[int] = []
        children: list[tuple] = []
        paths: list[tuple] = []

        def walk(node, par, path):
            me = len(parent)
            parent.append(par)
            children.append(None)
            paths.append(path)
            kids = []
            for pos, c in enumerate(node.kids):
                if isinstance(c, int):
                    kids.append(("l", c))
                else:
                    kids.append(("v", walk(c, me, path + (pos,))))
            children[me] = tuple(kids)
            return me

        walk(self.root, -1, ())
        return tuple(parent), tuple(children), tuple(paths)

    @property
    def parent(self) -> tuple[int, ...]:
        return self._index[0]

    @property
    def children(self) -> tuple[tuple, ...]:
        return self._index[1]

    @property
    def paths(self) -> tuple[tuple, ...]:
        return self._index[2]

    @property
    def n_vertices(self) -> int:
        return len(self.nodes)

    @property
    def leaf_labels(self) -> tuple[int, ...]:
        return tuple(leaves(self.root))

    def arity(self, v: int) -> int:
        return len(self.children[v])

    def valence(self, v: int) -> int:
        return self.arity(v) + 1

    def inner_edges(self) -> list[int]:
        """Inner edges, each named by its upper (child) vertex."""
        return [v for v in range(1, self.n_vertices)]

    def vertex_children(self, v: int) -> list[int]:
        return [i for tag, i in self.children[v] if tag == "v"]

    def position_in_parent(self, v: int) -> int:
        return self.paths[v][-1]

    def neighbours(self, v: int) -> list[int]:
        out = self.vertex_children(v)
        if self.parent[v] >= 0:
            out.append(self.parent[v])
        return out

    def depth(self) -> int:
        best = 0
        for v in range(self.n_vertices):
            best = max(best, len(self.paths[v]) + 1)
        return best


@dataclass(frozen=True)
class PearledTree(PlanarTree):
    """Planar tree with exactly one pearl (kind ``"p"``)."""

    @cached_property
    def pearl(self) -> int:
        ids = [i for i, n in enumerate(self.nodes) if n.kind == "p"]
        if len(ids) != 1:
            raise ValueError(f"expected exactly one pearl, found {len(ids)}")
        return ids[0]

    @cached_property
    def trunk(self) -> tuple[int, ...]:
        """Vertices from the pearl down to the root."""
        path = [self.pearl]
        while self.parent[path[-1]] >= 0:
            path.append(self.parent[path[-1]])
        return tuple(path)

    @cached_property
    def dist(self) -> tuple[int, ...]:
        d = [-1] * self.n_vertices
        d[self.pearl] = 0
        frontier = [self.pearl]
        while frontier:
            nxt = []
            for v in frontier:
                for w in self.neighbours(v):
                    if d[w] < 0:
                        d[w] = d[v] + 1
                        nxt.append(w)
            frontier = nxt
        return tuple(d)

    @cached_property
    def toward(self) -> tuple[int, ...]:
        """Neighbour of each non-pearl vertex on its path to the pearl."""
        out = [-1] * self.n_vertices
        for v in range(self.n_vertices):
            if v != self.pearl:
                out[v] = next(w for w in self.neighbours(v) if self.dist[w] == self.dist[v] - 1)
        return tuple(out)

    @cached_property
    def max_set(self) -> frozenset[int]:
        """Maximal elements of the toward-pearl order on the non-pearl vertices."""
        has_farther = set(self.toward[v] for v in range(self.n_vertices) if v != self.pearl)
        return frozenset(v for v in range(self.n_vertices) if v != self.pearl and v not in has_farther)

    @cached_property
    def trunk_arity(self) -> int:
        return sum(self.arity(v) for v in self.trunk) - (len(self.trunk) - 1)

    @cached_property
    def junction(self) -> tuple[int, ...]:
        """For each vertex, the closest trunk vertex (the pearl for vertices above it)."""
        on_trunk = set(self.trunk)
        out = [-1] * self.n_vertices
        for v in range(self.n_vertices):
            w = v
            while w not in on_trunk:
                w = self.toward[w]
            out[v] = w
        return tuple(out)

    def poset(self) -> Poset:
        """Toward-pearl order on the non-pearl vertices: closer to the pearl is smaller."""
        elems = tuple(v for v in range(self.n_vertices) if v != self.pearl)
        covers = frozenset((self.toward[v], v) for v in elems if self.toward[v] != self.pearl)
        return Poset(elems, covers)


@dataclass(frozen=True)
class SectionTree(PlanarTree):
    """Planar tree whose pearls form a section."""

    def __post_init__(self):
        for lab, path in self._leaf_paths():
            hits = sum(1 for v in path if self.nodes[v].kind == "p")
            if hits != 1:
                raise ValueError(f"path to leaf {lab} meets {hits} pearls")
        for v in range(self.n_vertices):
            if self.arity(v) == 0 and self.nodes[v].kind != "p":
                path = self._path_to_root(v)
                if sum(1 for w in path if self.nodes[w].kind == "p") != 1:
                    raise ValueError("path from a univalent vertex misses the section")

    def _path_to_root(self, v):
        out = [v]
        while self.parent[out[-1]] >= 0:
            out.append(self.parent[out[-1]])
        return out

    def _leaf_paths(self):
        for v in range(self.n_vertices):
            for tag, x in self.children[v]:
                if tag == "l":
                    yield x, self._path_to_root(v)

    @cached_property
    def pearls(self) -> frozenset[int]:
        return frozenset(i for i, n in enumerate(self.nodes) if n.kind == "p")

    @cached_property
    def side(self) -> tuple[str, ...]:
        """``"pearl"``, ``"above"`` or ``"below"`` for each vertex."""
        out = []
        for v in range(self.n_vertices):
            if v in self.pearls:
                out.append("pearl")
            elif any(w in self.pearls for w in self._path_to_root(v)[1:]):
                out.append("above")
            else:
                out.append("below")
        return tuple(out)

    def poset(self) -> Poset:
        """Order on non-pearl vertices: closer to the section is smaller."""
        elems = tuple(v for v in range(self.n_vertices) if v not in self.pearls)
        covers = set()
        for v in elems:
            p = self.parent[v]
            if p < 0 or p in self.pearls:
                continue
            if self.side[v] == "above":
                covers.add((p, v))
            else:
                covers.add((v, p))
        return Poset(elems, frozenset(covers))


# ---------------------------------------------------------------------------
# classes


@dataclass(frozen=True)
class TreeClass:
    """Non-planar isomorphism class with its canonical planar representative."""

    code: str
    representative: PlanarTree
    kind: str = "rooted"

    @property
    def root(self) -> Node:
        return self.representative.root

    @property
    def n_inner_edges(self) -> int:
        return self.representative.n_vertices - 1

    @property
    def n_vertices(self) -> int:
        return self.representative.n_vertices

    @property
    def arity(self) -> int:
        return len(self.representative.leaf_labels)

    def pearled(self) -> PearledTree:
        return PearledTree(self.root)

    def section(self) -> SectionTree:
        return SectionTree(self.root)

    def __lt__(self, other: TreeClass) -> bool:
        return self.code < other.code


def _kind_of(root: Node) -> str:
    n = sum(1 for v in vertices(root) if v.kind == "p")
    if n == 0:
        return "rooted"
    if n == 1 and any(v.kind == "p" for v in PlanarTree(root).nodes[:1]) is False:
        return "pearled"
    return "pearled" if n == 1 else "section"


def canonicalize(tree: PlanarTree | Node, kind: str | None = None) -> tuple[TreeClass, tuple[int, ...]]:
    """Canonical class of a planar tree.

    Returns the class and the permutation ``perm`` (0-based) with
    ``canonical_leaves[q] == input_leaves[perm[q]]``.
    """
    root = tree.root if isinstance(tree, PlanarTree) else tree
    root = _strip(root)
    s, perm, code = _sort_shape(root)
    if kind is None:
        kind = _kind_of(s)
    rep = {"pearled": PearledTree, "section": SectionTree}.get(kind, PlanarTree)(s)
    return TreeClass(code, rep, kind), tuple(perm)


def _strip(x: Child) -> Child:
    if isinstance(x, int):
        return x
    return Node(x.kind, tuple(_strip(c) for c in x.kids))


def tree_class(root: Node, kind: str | None = None) -> TreeClass:
    return canonicalize(root, kind)[0]


def canonical_labelled(x: Child, relabel) -> Child:
    """Canonical planar form of a labelled tree.

    Children are sorted by shape code, then by their full code.  When a
    vertex's children are reordered as ``c'_q = c_{pi(q)}`` its label is
    replaced by ``relabel(node, pi)`` (the label acted on by ``pi``).  Equal
    children (necessarily leafless) are permuted by brute force and the
    smallest resulting code is kept.  The shape of the result is the
    representative chosen by ``canonicalize``.
    """
    if isinstance(x, int):
        return x
    kids = [canonical_labelled(c, relabel) for c in x.kids]
    keys = [(shape_code(c), full_code(c)) for c in kids]
    order = sorted(range(len(kids)), key=lambda q: keys[q])
    groups: list[list[int]] = []
    for q in order:
        if groups and keys[groups[-1][0]] == keys[q]:
            groups[-1].append(q)
        else:
            groups.append([q])
    candidates = []
    for choice in product(*(permutations(g) for g in groups)):
        new_order = [q for g in choice for q in g]
        pi = tuple(q + 1 for q in new_order)
        label = x.label
        if pi != tuple(range(1, len(pi) + 1)):
            label = relabel(x, pi)
        node = x._replace(kids=tuple(kids[q] for q in new_order), label=label)
        candidates.append((full_code(node), node))
    return min(candidates, key=lambda r: r[0])[1]


def labelled_contract(root: Node, child_path: tuple, merge) -> Node:
    """Contract the edge above ``child_path``; ``merge(parent, pos, child)`` gives the merged node.

    ``pos`` is the 1-based input of the parent receiving the child.  The
    returned node's kids are ignored.
    """
    c = node_at(root, child_path)
    p = node_at(root, child_path[:-1])
    return contract_node(root, child_path, merge(p, child_path[-1] + 1, c))


# ---------------------------------------------------------------------------
# edge contraction


def replace_at(root: Node, path: tuple, new: Child) -> Child:
    if not path:
        return new
    kids = list(root.kids)
    kids[path[0]] = replace_at(kids[path[0]], path[1:], new)
    return root._replace(kids=tuple(kids))


def node_at(root: Child, path: tuple) -> Child:
    for i in path:
        root = root.kids[i]
    return root


def contract_node(root: Node, child_path: tuple, merged: Node | None = None) -> Node:
    """Contract the edge from the vertex at ``child_path`` to its parent.

    The merged vertex keeps the parent's data unless ``merged`` (a node whose
    kids are ignored) is given; it is a pearl when either endpoint is.
    """
    if not child_path:
        raise ValueError("the root has no edge below it to contract")
    c = node_at(root, child_path)
    if isinstance(c, int):
        raise ValueError("cannot contract an external edge")
    ppath, pos = child_path[:-1], child_path[-1]
    p = node_at(root, ppath)
    kids = p.kids[:pos] + c.kids + p.kids[pos + 1:]
    if merged is None:
        kind = "p" if "p" in (p.kind, c.kind) else p.kind
        merged = p._replace(kind=kind)
    return replace_at(root, ppath, merged._replace(kids=kids))


def contract_edge(t: TreeClass, e: int) -> TreeClass:
    """Contract inner edge ``e`` (named by its upper vertex id) of the representative."""
    rep = t.representative
    if not 0 < e < rep.n_vertices:
        raise ValueError(f"{e} does not name an inner edge")
    return canonicalize(contract_node(rep.root, rep.paths[e]), t.kind)[0]


def contract_edges(t: TreeClass, edges) -> TreeClass:
    """Contract a set of inner edges at once."""
    rep = t.representative
    root = rep.root
    # contract deepest first so that paths of the remaining edges stay valid
    for e in sorted(edges, key=lambda v: rep.paths[v], reverse=True):
        root = contract_node(root, rep.paths[e])
    return canonicalize(root, t.kind)[0]


def contraction_map(rep: PlanarTree, edges) -> list[int]:
    """Vertex map T -> T/E as representative-independent groups.

    Returns, for each vertex of ``rep``, the id of the smallest vertex in its
    group; groups are the connected components of the contracted edges.
    """
    group = list(range(rep.n_vertices))

    def find(x):
        while group[x] != x:
            group[x] = group[group[x]]
            x = group[x]
        return x

    for e in edges:
        a, b = find(e), find(rep.parent[e])
        if a != b:
            group[max(a, b)] = min(a, b)
    return [find(v) for v in range(rep.n_vertices)]


# ---------------------------------------------------------------------------
# enumeration


def set_partitions(items: list):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for p in set_partitions(rest):
        yield [[first]] + p
        for i in range(len(p)):
            yield p[:i] + [[first] + p[i]] + p[i + 1:]


_PEARL = 0  # placeholder for the pearl in a block of inputs


class _Gen:
    def __init__(self, min_arity: int, min_pearl_arity: int):
        self.m = min_arity
        self.mp = min_pearl_arity
        self._plain: dict = {}
        self._pearled: dict = {}
        self._above: dict = {}
        self._below: dict = {}
        self._prooted: dict = {}

    def child(self, block: tuple) -> list:
        if len(block) == 1:
            return [block[0]]
        return self.plain(block)

    def plain(self, s: tuple) -> list[Node]:
        if s in self._plain:
            return self._plain[s]
        out = []
        for blocks in set_partitions(list(s)):
            if len(blocks) < self.m:
                continue
            for kids in product(*[self.child(tuple(b)) for b in blocks]):
                out.append(Node("v", tuple(kids)))
        self._plain[s] = out
        return out

    def pearled(self, s: tuple) -> list[Node]:
        if s in self._pearled:
            return self._pearled[s]
        out = []
        # the pearl is the root of this subtree
        parts = [[]] if not s else list(set_partitions(list(s)))
        for blocks in parts:
            if len(blocks) < self.mp:
                continue
            for kids in product(*[self.child(tuple(b)) for b in blocks]):
                out.append(Node("p", tuple(kids)))
        # an ordinary vertex is the root; one block carries the pearl
        for blocks in set_partitions(list(s) + [_PEARL]):
            if len(blocks) < self.m:
                continue
            options = []
            for b in blocks:
                if _PEARL in b:
                    options.append(self.pearled(tuple(x for x in b if x != _PEARL)))
                else:
                    options.append(self.child(tuple(b)))
            for kids in product(*options):
                out.append(Node("v", tuple(kids)))
        self._pearled[s] = out
        return out

    def pearl_rooted(self, s: tuple) -> list[Node]:
        if s in self._prooted:
            return self._prooted[s]
        out = []
        parts = [[]] if not s else list(set_partitions(list(s)))
        for blocks in parts:
            if len(blocks) < self.mp:
                continue
            for kids in product(*[self.child(tuple(b)) for b in blocks]):
                out.append(Node("p", tuple(kids)))
        self._prooted[s] = out
        return out

    def below(self, s: tuple) -> list[Node]:
        if s in self._below:
            return self._below[s]
        out = []
        for blocks in set_partitions(list(s)):
            if len(blocks) < self.m:
                continue
            for kids in product(*[self.sectioned(tuple(b)) for b in blocks]):
                out.append(Node("v", tuple(kids)))
        self._below[s] = out
        return out

    def sectioned(self, s: tuple) -> list[Node]:
        return self.pearl_rooted(s) + (self.below(s) if len(s) >= 2 else [])


def enumerate_tree_classes(kind: str, k: int, *, min_arity: int = 2, min_pearl_arity: int | None = None) -> list[TreeClass]:
    """All non-planar classes with leaves labelled 1..k, sorted by code.

    ``kind`` is ``"rooted"``, ``"pearled"`` or ``"section"``.  Ordinary
    vertices have arity at least ``min_arity``; pearls at least
    ``min_pearl_arity`` (default 0 for pearled trees, 1 for trees with
    section).  For rooted trees with k = 1 the trivial tree is encoded by a
    unary corolla.
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    if kind not in ("rooted", "pearled", "section"):
        raise ValueError(f"unknown tree kind {kind!r}")
    if min_pearl_arity is None:
        min_pearl_arity = 1 if kind == "section" else 0
    if min_arity < 2:
        raise ValueError("ordinary vertices need arity >= 2 for a finite enumeration")
    if min_pearl_arity < 0:
        raise ValueError("pearl arity bound must be non-negative")
    gen = _Gen(min_arity, min_pearl_arity)
    s = tuple(range(1, k + 1))
    if kind == "rooted":
        roots = [Node("v", (1,))] if k == 1 else (gen.plain(s) if k >= 2 else [])
    elif kind == "pearled":
        roots = gen.pearled(s)
    else:
        roots = gen.sectioned(s)
    found: dict[str, TreeClass] = {}
    for r in roots:
        tc = canonicalize(r, kind)[0]
        if tc.code in found:
            raise AssertionError(f"duplicate class {tc.code} in enumeration")
        if kind == "pearled" and min_arity >= 2 and tc.n_vertices - 1 > k:
            raise AssertionError("vertex bound |V - p| <= k violated")
        found[tc.code] = tc
    return [found[c] for c in sorted(found)]


# ---------------------------------------------------------------------------
# derived quantities on classes


def trunk_arity(t: TreeClass | PearledTree | Node) -> int:
    return _as_pearled(t).trunk_arity


def toward_pearl_poset(t: TreeClass | PearledTree | Node) -> Poset:
    return _as_pearled(t).poset()


def _as_pearled(t) -> PearledTree:
    if isinstance(t, TreeClass):
        return t.pearled()
    if isinstance(t, PearledTree):
        return t
    if isinstance(t, PlanarTree):
        return PearledTree(t.root)
    return PearledTree(t)


def corolla(k: int, kind: str = "v") -> Node:
    return Node(kind, tuple(range(1, k + 1)))


def pearled_corolla(k: int) -> Node:
    """The pearled k-corolla c_k."""
    return Node("p", tuple(range(1, k + 1)))


def pearled_subcorolla(k: int) -> Node:
    """c'_k: a pearled root of arity one under a k-corolla."""
    return Node("p", (Node("v", tuple(range(1, k + 1))),))


def parse_tree(text: str) -> Node:
    """Parse codes such as ``V(P(),V(1,2))`` (labels and parameters are not read)."""
    pos = 0

    def parse():
        nonlocal pos
        if text[pos].isdigit():
            start = pos
            while pos < len(text) and text[pos].isdigit():
                pos += 1
            return int(text[start:pos])
        start = pos
        while text[pos].isalpha():
            pos += 1
        kind = text[start:pos].lower()
        if text[pos] != "(":
            raise ValueError(f"expected '(' at {pos}")
        pos += 1
        kids = []
        while text[pos] != ")":
            kids.append(parse())
            if text[pos] == ",":
                pos += 1
        pos += 1
        return Node(kind, tuple(kids))

    text = text.replace(" ", "")
    out = parse()
    if pos != len(text):
        raise ValueError("trailing characters in tree code")
    return out
