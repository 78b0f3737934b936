"""Boardman-Vogt type resolutions of bimodules, infinitesimal bimodules and operads.

Elements are labelled planar trees (``Node`` values) carrying exact rational
parameters.  Families and their vertex kinds:

``BSigma`` / ``BLambda``
    Trees with section.  Pearls (``"p"``) carry bimodule labels, ordinary
    vertices (``"v"``) operad labels and a parameter in [0, 1] that grows away
    from the section.
``IbSigma`` / ``IbLambda``
    Pearled trees.  The pearl carries an infinitesimal bimodule label; the
    parameters grow away from the pearl.
``W`` / ``W1``
    Rooted trees with operad labels.  The parameter of a non-root vertex is
    the length of the edge below it.
``IbBar``
    Pairs ``[a{b_1, ..., b_n}; sigma]`` stored as one nested tree: ``a`` is a
    pearled tree (kinds ``"v"``/``"p"``) whose leaves are replaced by trees with
    section ``b_i`` (kinds ``"bv"``/``"bp"``) whose pearls carry operad labels.
    Parameters of ``a`` are the rescaled ``t^0`` and those of ``b_i`` the
    rescaled ``t^j``.

Normalization applies the identifications of each family as a rewrite
system (unit removal, contraction at parameter zero, merging of equal
adjacent parameters, the arity-zero rules) and then picks the canonical
planar representative.  Elements of the ``IbBar`` family are normalized
through the homeomorphism ``gamma`` with the pearled picture.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations, product

from ._poset import Poset
from .algebra import (
    El,
    FinBimodule,
    FinIbimodule,
    FinOperad,
    perm_inverse,
    rho_values,
    self_bimodule,
    self_ibimodule,
)
from .complex import DeltaComplex, homology
from .psi import in_upper
from .trees import (
    Node,
    PearledTree,
    PlanarTree,
    SectionTree,
    canonical_labelled,
    enumerate_tree_classes,
    full_code,
    labelled_contract,
    leaves,
    node_at,
    replace_at,
    set_partitions,
    tree_class,
    vertices,
)

FAMILIES = ("BSigma", "BLambda", "IbSigma", "IbLambda", "W", "W1", "IbBar")
LAMBDA_FAMILIES = ("BLambda", "IbLambda", "W", "W1", "IbBar")
ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass(frozen=True)
class BVElement:
    family: str
    root: Node

    @property
    def code(self) -> str:
        return full_code(self.root)

    @property
    def arity(self) -> int:
        return len(leaves(self.root))

    @property
    def sigma(self) -> tuple[int, ...]:
        """Leaf labels in planar order."""
        return tuple(leaves(self.root))

    def __str__(self) -> str:
        return f"{self.family}:{self.code}"


def _el(node: Node) -> El:
    return El(node.arity, node.label)


def _q(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


def _with_t(root, fn):
    """Copy of ``root`` with every vertex parameter replaced by ``fn(node, path)``."""

    def walk(x, path):
        if isinstance(x, int):
            return x
        kids = tuple(walk(c, path + (i,)) for i, c in enumerate(x.kids))
        return Node(x.kind, kids, x.label, fn(x, path))

    return walk(root, ())


def _relabel_leaves(root, fn):
    if isinstance(root, int):
        return fn(root)
    return root._replace(kids=tuple(_relabel_leaves(c, fn) for c in root.kids))


def _pearl_ancestor_flags(root) -> dict:
    """Path -> whether a pearl lies strictly below the vertex (towards the root)."""
    out = {}

    def walk(x, path, seen):
        if isinstance(x, int):
            return
        out[path] = seen
        for i, c in enumerate(x.kids):
            walk(c, path + (i,), seen or x.is_pearl)

    walk(root, (), False)
    return out


# ---------------------------------------------------------------------------
# families


class Family:
    """A family together with its base structures.

    ``module`` is an infinitesimal bimodule for the ``Ib`` and ``IbBar``
    families (default: the operad over itself) and a bimodule for the ``B``
    families (default: the operad over itself).
    """

    def __init__(self, name: str, operad: FinOperad, module=None):
        if name not in FAMILIES:
            raise ValueError(f"unknown family {name!r}")
        self.name = name
        self.operad = operad
        if name in ("IbSigma", "IbLambda", "IbBar"):
            module = module if module is not None else self_ibimodule(operad)
            if not isinstance(module, FinIbimodule):
                raise TypeError(f"{name} needs an infinitesimal bimodule")
        elif name in ("BSigma", "BLambda"):
            module = module if module is not None else self_bimodule(operad)
            if not isinstance(module, FinBimodule):
                raise TypeError(f"{name} needs a bimodule")
        elif module is not None:
            raise TypeError(f"{name} takes no module")
        self.module = module
        self._memo: dict = {}
        if name == "IbBar":
            self.ib = Family("IbLambda", operad, module)

    def __repr__(self):
        mod = f", {self.module.name}" if self.module is not None else ""
        return f"Family({self.name}, {self.operad.name}{mod})"

    @property
    def is_lambda(self) -> bool:
        return self.name in LAMBDA_FAMILIES

    @property
    def base(self) -> str:
        return {"BSigma": "B", "BLambda": "B", "IbSigma": "Ib", "IbLambda": "Ib", "W": "W", "W1": "W", "IbBar": "IbBar"}[self.name]

    def element(self, root: Node) -> BVElement:
        return BVElement(self.name, root)

    # -- validation -----------------------------------------------------

    def validate(self, x: BVElement) -> None:
        if x.family != self.name:
            raise ValueError(f"element of {x.family} given to {self.name}")
        root = x.root
        if not isinstance(root, Node):
            raise ValueError("an element is a tree with at least one vertex")
        labs = leaves(root)
        if sorted(labs) != list(range(1, len(labs) + 1)):
            raise ValueError(f"leaf labels {labs} are not 1..{len(labs)}")
        getattr(self, "_validate_" + self.base)(root)

    def _check_label(self, node: Node, space, what: str):
        if node.label not in space.elements(node.arity):
            raise ValueError(f"label {node.label!r} is not an element of {what}({node.arity})")

    def _check_t(self, node: Node):
        if not isinstance(node.t, Fraction) or not 0 <= node.t <= 1:
            raise ValueError(f"parameter {node.t!r} of {full_code(node)} is not a rational in [0, 1]")

    def _validate_Ib(self, root):
        pt = PlanarTree(root)
        ps = [v for v, n in enumerate(pt.nodes) if n.kind == "p"]
        if len(ps) != 1 or any(n.kind not in ("v", "p") for n in pt.nodes):
            raise ValueError("a pearled tree needs exactly one pearl and ordinary vertices")
        pt = PearledTree(root)
        for v, n in enumerate(pt.nodes):
            if n.kind == "p":
                self._check_label(n, self.module, self.module.name)
                if n.t is not None:
                    raise ValueError("the pearl carries no parameter")
                continue
            self._check_label(n, self.operad, self.operad.name)
            self._check_t(n)
            if self.is_lambda and n.arity == 0:
                raise ValueError("the Lambda grammar has no univalent ordinary vertices")
            w = pt.toward[v]
            if pt.nodes[w].kind != "p" and pt.nodes[w].t > n.t:
                raise ValueError("parameters must not decrease away from the pearl")

    def _validate_B(self, root, vk="v", pk="p", pearl_space=None):
        pearl_space = pearl_space or self.module
        st = PlanarTree(root)
        if any(n.kind not in (vk, pk) for n in st.nodes):
            raise ValueError("unexpected vertex kind in a tree with section")
        SectionTree(_kinds_to(root, {vk: "v", pk: "p"}))  # section condition
        above = _pearl_ancestor_flags(root)
        for v, n in enumerate(st.nodes):
            path = st.paths[v]
            if n.kind == pk:
                self._check_label(n, pearl_space, getattr(pearl_space, "name", "M"))
                if n.t is not None:
                    raise ValueError("pearls carry no parameter")
                continue
            self._check_label(n, self.operad, self.operad.name)
            self._check_t(n)
            if self.is_lambda and n.arity == 0:
                raise ValueError("the Lambda grammar has no univalent ordinary vertices")
            par = st.parent[v]
            if par >= 0 and st.nodes[par].kind == vk:
                lo, hi = (st.nodes[par].t, n.t) if above[path] else (n.t, st.nodes[par].t)
                if lo > hi:
                    raise ValueError("parameters must not decrease away from the section")

    def _validate_W(self, root):
        st = PlanarTree(root)
        for v, n in enumerate(st.nodes):
            if n.kind != "v":
                raise ValueError("W trees have ordinary vertices only")
            self._check_label(n, self.operad, self.operad.name)
            if v == 0:
                if n.t is not None:
                    raise ValueError("the root edge has no length")
            else:
                self._check_t(n)

    def _validate_IbBar(self, root):
        a, slots = _split_pair(root)
        self._validate_Ib(a)
        for path, b in slots:
            self._validate_B(b, "bv", "bp", self.operad)

    # -- normalization --------------------------------------------------

    def normalize(self, x: BVElement, rng: random.Random | None = None, validate: bool = True) -> BVElement:
        """Canonical representative.  With ``rng`` the redexes are chosen at random."""
        if validate:
            self.validate(x)
        if rng is None and x.code in self._memo:
            return self._memo[x.code]
        if self.base == "IbBar":
            y = self.gamma_forward(self.ib.normalize(self.ib.element(_gamma_inverse_raw(self, x.root)), rng, validate=False))
            out = self.element(y.root)
        else:
            root = x.root
            while True:
                reds = getattr(self, "_redexes_" + self.base)(root)
                if not reds:
                    break
                r = rng.choice(reds) if rng is not None else min(reds)
                root = getattr(self, "_apply_" + self.base)(root, r)
            out = self.element(self.canonical(root))
        if rng is None:
            self._memo[x.code] = out
        return out

    def canonical(self, root: Node) -> Node:
        o, m = self.operad, self.module

        def relabel(node, pi):
            space = m if node.is_pearl and node.kind == "p" and m is not None else o
            return space.act(_el(node), pi).id

        return canonical_labelled(root, relabel)

    def _unit(self, node: Node) -> bool:
        return node.arity == 1 and node.label == self.operad.unit

    # Redexes are tuples ``(priority, depth, path, rule, extra)``; the
    # deterministic order takes the smallest one.  Priorities follow the
    # order unit removal, nullary rules, contraction at zero, merging.

    def _redexes_Ib(self, root):
        pt = PlanarTree(root)
        nodes, paths, parent = pt.nodes, pt.paths, pt.parent
        pearl = next(v for v, n in enumerate(nodes) if n.kind == "p")
        trunk = set()
        w = pearl
        while w >= 0:
            trunk.add(w)
            w = parent[w]
        out = []
        for v, n in enumerate(nodes):
            if n.kind == "p":
                continue
            p = paths[v]
            if self._unit(n):
                out.append((0, len(p), p, "unit", None))
            if n.arity == 0 and self.is_lambda and v not in trunk:
                out.append((1, len(p), p, "nullary", None))
            if n.t == 0:
                if v in trunk:
                    toward = next(c for c in pt.vertex_children(v) if c in trunk)
                else:
                    toward = parent[v]
                if nodes[toward].kind == "p":
                    out.append((2, len(p), p, "zero", paths[toward]))
            u = parent[v]
            if u >= 0 and nodes[u].kind != "p" and nodes[u].t == n.t:
                out.append((3, len(p), p, "merge", None))
        return out

    def _apply_Ib(self, root, r):
        _, _, path, rule, extra = r
        o, n = self.operad, self.module
        node = node_at(root, path)
        if rule == "unit":
            return replace_at(root, path, node.kids[0])
        if rule == "nullary":
            def merge(p, i, c):
                lab = n.right(_el(p), i, _el(c)) if p.kind == "p" else o.compose(_el(p), i, _el(c))
                return Node(p.kind, (), lab.id, p.t)
            return labelled_contract(root, path, merge)
        if rule == "zero":
            if len(extra) < len(path):  # the pearl is the parent
                return labelled_contract(root, path, lambda p, i, c: Node("p", (), n.right(_el(p), i, _el(c)).id, None))
            return labelled_contract(root, extra, lambda p, i, c: Node("p", (), n.inf_left(_el(p), i, _el(c)).id, None))
        if rule == "merge":
            return labelled_contract(root, path, lambda p, i, c: Node(p.kind, (), o.compose(_el(p), i, _el(c)).id, p.t))
        raise AssertionError(rule)

    # B rules (also used with the kinds of the b-part of a pair)

    def _redexes_B(self, root, vk="v", pk="p"):
        st = PlanarTree(root)
        nodes, paths, parent = st.nodes, st.paths, st.parent
        above = _pearl_ancestor_flags(root)
        out = []
        for v, n in enumerate(nodes):
            p = paths[v]
            u = parent[v]
            if n.kind == pk:
                if n.arity == 0 and u >= 0:
                    out.append((1, len(p), p, "nullary_pearl", None))
                continue
            up = above[p]
            if self._unit(n):
                out.append((0, len(p), p, "unit", None))
            if n.arity == 0:
                if up and self.is_lambda:
                    out.append((1, len(p), p, "nullary_above", None))
                elif not up:
                    out.append((1, len(p), p, "nullary_below", None))
            if n.t == 0:
                if up and u >= 0 and nodes[u].kind == pk:
                    out.append((2, len(p), p, "zero_above", None))
                if not up and n.arity > 0 and all(not isinstance(c, int) and c.kind == pk for c in n.kids):
                    out.append((2, len(p), p, "zero_below", None))
            if u >= 0 and nodes[u].kind == vk and nodes[u].t == n.t:
                out.append((3, len(p), p, "merge", None))
        return out

    def _apply_B(self, root, r, vk="v", pk="p", pearl_space=None):
        _, _, path, rule, _ = r
        o = self.operad
        m = pearl_space or self.module
        node = node_at(root, path)
        if rule == "unit":
            return replace_at(root, path, node.kids[0])
        if rule == "nullary_pearl":
            star = o.arity_zero()
            return labelled_contract(root, path, lambda p, i, c: Node(p.kind, (), o.compose(_el(p), i, star).id, p.t))
        if rule == "nullary_above":
            def merge(p, i, c):
                lab = m.right(_el(p), i, _el(c)) if p.kind == pk else o.compose(_el(p), i, _el(c))
                return Node(p.kind, (), lab.id, p.t)
            return labelled_contract(root, path, merge)
        if rule == "nullary_below":
            return replace_at(root, path, Node(pk, (), m.left(_el(node), []).id, None))
        if rule == "zero_above":
            return labelled_contract(root, path, lambda p, i, c: Node(pk, (), m.right(_el(p), i, _el(c)).id, None))
        if rule == "zero_below":
            kids = tuple(x for c in node.kids for x in c.kids)
            lab = m.left(_el(node), [_el(c) for c in node.kids])
            return replace_at(root, path, Node(pk, kids, lab.id, None))
        if rule == "merge":
            return labelled_contract(root, path, lambda p, i, c: Node(vk, (), o.compose(_el(p), i, _el(c)).id, p.t))
        raise AssertionError(rule)

    # W rules: parameters are lengths of the edge below a vertex

    def _redexes_W(self, root):
        st = PlanarTree(root)
        out = []
        for v, n in enumerate(st.nodes):
            p = st.paths[v]
            if self._unit(n) and not (v == 0 and isinstance(n.kids[0], int)):
                out.append((0, len(p), p, "unit", None))
            if n.arity == 0 and v > 0:
                out.append((1, len(p), p, "nullary", None))
            if v > 0 and n.t == 0:
                out.append((2, len(p), p, "zero", None))
        return out

    def _apply_W(self, root, r):
        _, _, path, rule, _ = r
        o = self.operad
        node = node_at(root, path)
        if rule == "unit":
            c = node.kids[0]
            if isinstance(c, int):
                return replace_at(root, path, c)
            # the two edges around a unit vertex join; the longer length survives
            t = None if not path else max(node.t, c.t)
            return replace_at(root, path, c._replace(t=t))
        if rule in ("nullary", "zero"):
            return labelled_contract(root, path, lambda p, i, c: Node("v", (), o.compose(_el(p), i, _el(c)).id, p.t))
        raise AssertionError(rule)

    # -- the homeomorphism gamma between pearled trees and pairs ----------

    def gamma_forward(self, x: BVElement) -> BVElement:
        """Cut a canonical ``IbLambda`` element into a pair ``[a{b_1, ..., b_n}]``."""
        if self.base != "IbBar":
            raise ValueError("gamma lives on the IbBar family")
        return self.element(_gamma_forward_root(self, x.root))

    def gamma_inverse(self, x: BVElement, normalize: bool = True) -> BVElement:
        """Reassemble a pair into a pearled tree (normalized unless asked otherwise)."""
        if self.base != "IbBar":
            raise ValueError("gamma lives on the IbBar family")
        y = self.ib.element(_gamma_inverse_raw(self, x.root))
        return self.ib.normalize(y, validate=False) if normalize else y


def _cuts(tj: Fraction) -> tuple[Fraction, Fraction]:
    return (2 * tj + 1) / 3, (tj + 2) / 3


def _gamma_forward_root(fam: Family, root: Node) -> Node:
    pt = PearledTree(root)
    nodes = pt.nodes
    trunk = set(pt.trunk)
    junction = pt.junction
    unit = fam.operad.unit

    def tval(v):
        return ZERO if nodes[v].kind == "p" else nodes[v].t

    def where(v):
        if v in trunk:
            return "a"
        tj = tval(junction[v])
        c1, c2 = _cuts(tj)
        t = nodes[v].t
        if t < c1:
            return "a"
        if tj == 1:
            raise AssertionError("a vertex hangs on a trunk vertex at 1; the element is not normalized")
        if t < c2:
            return "below"
        return "pearl" if t == c2 else "above"

    def star(x):
        return Node("bp", (x,), unit, None)

    def above(v):
        tj = tval(junction[v])
        kids = tuple(c if tag == "l" else above(c) for tag, c in _kids(pt, v))
        return Node("bv", kids, nodes[v].label, (3 * nodes[v].t - tj - 2) / (1 - tj))

    def pearl(v):
        kids = tuple(c if tag == "l" else above(c) for tag, c in _kids(pt, v))
        return Node("bp", kids, nodes[v].label, None)

    def below(v):
        tj = tval(junction[v])
        kids = []
        for tag, c in _kids(pt, v):
            kids.append(star(c) if tag == "l" else b_root(c))
        return Node("bv", tuple(kids), nodes[v].label, (3 * nodes[v].t - tj - 2) / (tj - 1))

    def b_root(v):
        w = where(v)
        if w == "below":
            return below(v)
        if w == "pearl":
            return pearl(v)
        if w == "above":
            return star(above(v))
        raise AssertionError("an a-vertex above the first cut")

    def a_part(v):
        n = nodes[v]
        kids = []
        for tag, c in _kids(pt, v):
            if tag == "l":
                kids.append(star(c))
            elif where(c) == "a":
                kids.append(a_part(c))
            else:
                kids.append(b_root(c))
        if n.kind == "p":
            t = None
        elif v in trunk:
            t = n.t
        else:
            t = 3 * n.t - 2 * tval(junction[v])
        return Node(n.kind, tuple(kids), n.label, t)

    return a_part(0)


def _kids(pt: PlanarTree, v: int):
    return pt.children[v]


def _gamma_inverse_raw(fam: Family, root: Node) -> Node:
    """Pearled tree of a pair, with the unit pearls of the b-part removed."""
    unit = fam.operad.unit
    # trunk: the vertices of the a-part on the way from the root to the pearl
    trunk_paths = set()

    def find(x, path):
        if isinstance(x, int) or x.kind in ("bv", "bp"):
            return False
        hit = x.kind == "p" or any(find(c, path + (i,)) for i, c in enumerate(x.kids))
        if hit:
            trunk_paths.add(path)
        return hit

    if not find(root, ()):
        raise ValueError("the pearled part has no pearl")

    def b_part(x, tj, side):
        if isinstance(x, int):
            return x
        if x.kind == "bp":
            kids = tuple(b_part(c, tj, "above") for c in x.kids)
            if x.arity == 1 and x.label == unit:
                return kids[0]
            return Node("v", kids, x.label, (tj + 2) / 3)
        kids = tuple(b_part(c, tj, side) for c in x.kids)
        if side == "below":
            t = ((tj - 1) * x.t + tj + 2) / 3
        else:
            t = ((1 - tj) * x.t + tj + 2) / 3
        return Node("v", kids, x.label, t)

    def a_part(x, path, tj):
        if x.kind in ("bv", "bp"):
            return b_part(x, tj, "below")
        if path in trunk_paths:
            tj = ZERO if x.kind == "p" else x.t
            t = x.t
        else:
            t = (x.t + 2 * tj) / 3
        kids = tuple(a_part(c, path + (i,), tj) for i, c in enumerate(x.kids))
        return Node(x.kind, kids, x.label, t)

    return a_part(root, (), ZERO)



# ---------------------------------------------------------------------------
# module-level operations


def normalize(x: BVElement, fam: Family, rng: random.Random | None = None) -> BVElement:
    return fam.normalize(x, rng)


def _leaf_path(root, label):
    def walk(x, path):
        if isinstance(x, int):
            return path if x == label else None
        for i, c in enumerate(x.kids):
            r = walk(c, path + (i,))
            if r is not None:
                return r
        return None

    return walk(root, ())


def _shift(root, after: int, by: int):
    return _relabel_leaves(root, lambda l: l + by if l > after else l)


def act_sigma(x: BVElement, fam: Family, sigma: tuple[int, ...]) -> BVElement:
    """Right symmetric action ``x . sigma``: leaf ``l`` is renamed ``sigma^{-1}(l)``."""
    if sorted(sigma) != list(range(1, x.arity + 1)):
        raise ValueError("sigma must be a permutation of the inputs")
    inv = perm_inverse(tuple(sigma))
    return fam.normalize(fam.element(_relabel_leaves(x.root, lambda l: inv[l - 1])), validate=False)


def act(x: BVElement, fam: Family, op: str, datum, position: int, others: list | None = None) -> BVElement:
    """Module actions on elements.

    ``right``: graft the corolla labelled ``datum`` on leaf ``position`` with
    parameter 1.  ``inf_left`` (Ib families): put ``x`` in input ``position``
    of a new root labelled ``datum`` at 1.  ``left`` (B and W families): a new
    root labelled ``datum`` with ``x`` in input ``position`` and ``others``
    (default units) in the remaining inputs.  ``lambda_zero``: the action of
    the arity-zero element at ``position`` (a label rewrite).
    """
    if fam.base == "IbBar":
        y = fam.gamma_inverse(x)
        return fam.gamma_forward(act(y, fam.ib, op, datum, position, others))
    k = x.arity
    if op == "right":
        if not 1 <= position <= k:
            raise ValueError(f"position {position} out of range 1..{k}")
        a = datum
        if fam.is_lambda and a.n == 0:
            return act(x, fam, "lambda_zero", None, position)
        root = _shift(x.root, position, a.n - 1)
        new = Node("v", tuple(range(position, position + a.n)), a.id, ONE)
        root = replace_at(root, _leaf_path(x.root, position), new)
        return fam.normalize(fam.element(root), validate=False)
    if op == "inf_left":
        if fam.base != "Ib":
            raise ValueError("the infinitesimal left action is defined on the Ib families")
        a = datum
        if not 1 <= position <= a.n:
            raise ValueError(f"position {position} out of range 1..{a.n}")
        kids = []
        for q in range(1, a.n + 1):
            if q < position:
                kids.append(q)
            elif q == position:
                kids.append(_relabel_leaves(x.root, lambda l: l + position - 1))
            else:
                kids.append(q + k - 1)
        return fam.normalize(fam.element(Node("v", tuple(kids), a.id, ONE)), validate=False)
    if op == "left":
        if fam.base not in ("B", "W"):
            raise ValueError("the left action is defined on the B and W families")
        a = datum
        if not 1 <= position <= a.n:
            raise ValueError(f"position {position} out of range 1..{a.n}")
        if others is None:
            others = [unit_element(fam) for _ in range(a.n - 1)]
        if len(others) != a.n - 1:
            raise ValueError("left action needs one element per remaining input")
        ins = others[: position - 1] + [x] + others[position - 1:]
        kids, off = [], 0
        for y in ins:
            r = _relabel_leaves(y.root, lambda l, off=off: l + off)
            if fam.base == "W":
                r = r.kids[0] if _is_trivial_w(r, fam) else r._replace(t=ONE)
            kids.append(r)
            off += y.arity
        t = None if fam.base == "W" else ONE
        return fam.normalize(fam.element(Node("v", tuple(kids), a.id, t)), validate=False)
    if op == "lambda_zero":
        if not fam.is_lambda:
            raise ValueError("the arity-zero action belongs to the Lambda families")
        if not 1 <= position <= k:
            raise ValueError(f"position {position} out of range 1..{k}")
        path = _leaf_path(x.root, position)
        holder = node_at(x.root, path[:-1])
        j = path[-1] + 1
        star = fam.operad.arity_zero()
        if holder.is_pearl:
            lab = fam.module.right(_el(holder), j, star)
        else:
            lab = fam.operad.compose(_el(holder), j, star)
        new = holder._replace(kids=holder.kids[: j - 1] + holder.kids[j:], label=lab.id)
        root = _shift(replace_at(x.root, path[:-1], new), position, -1)
        return fam.normalize(fam.element(root), validate=False)
    raise ValueError(f"unknown action {op!r}")


def _is_trivial_w(root, fam) -> bool:
    return root.arity == 1 and isinstance(root.kids[0], int) and root.label == fam.operad.unit


def unit_element(fam: Family, arity: int = 1) -> BVElement:
    """The unit: a pearled 1-corolla, a unit pearl, or the trivial tree."""
    o = fam.operad
    if fam.base == "Ib":
        if o.unit not in fam.module.elements(1):
            raise ValueError("the module has no unit element")
        return fam.element(Node("p", (1,), o.unit))
    if fam.base == "B":
        if o.unit not in fam.module.elements(1):
            raise ValueError("the bimodule has no element named like the unit in arity 1")
        return fam.element(Node("p", (1,), o.unit))
    if fam.base == "W":
        return fam.element(Node("v", (1,), o.unit))
    return fam.gamma_forward(unit_element(fam.ib))


# ---------------------------------------------------------------------------
# prime components and filtration


def _component_tree(root, keep, start_path, fresh):
    """Subtree of kept vertices from ``start_path``; cut branches become fresh leaves."""

    def walk(x, path):
        if isinstance(x, int):
            return fresh(x, path)
        kids = []
        for i, c in enumerate(x.kids):
            p = path + (i,)
            if isinstance(c, int) or p in keep:
                kids.append(walk(c, p))
            else:
                kids.append(fresh(None, p))
        return Node(x.kind, tuple(kids), x.label, x.t)

    return walk(node_at(root, start_path), start_path)


def _renumber(root):
    order = {}

    def walk(x):
        if isinstance(x, int):
            order[x] = len(order) + 1
            return
        for c in x.kids:
            walk(c)

    walk(root)
    return _relabel_leaves(root, lambda l: order[l])


def prime_decompose(x: BVElement, fam: Family) -> tuple[list[BVElement], int]:
    """Prime components (vertices at parameter 1 deleted) and the filtration index.

    The index is the largest number of geometric inputs of a component:
    leaves plus univalent ordinary vertices.
    """
    if fam.base == "IbBar":
        return _prime_pair(x, fam)
    root = x.root
    st = PlanarTree(root)
    nodes, paths, parent = st.nodes, st.paths, st.parent
    if fam.base == "W":
        # edges of length 1 are cut
        starts = [v for v in range(st.n_vertices) if v == 0 or nodes[v].t == 1]
        same = lambda v: v != 0 and nodes[v].t != 1  # noqa: E731
    else:
        gone = {v for v in range(st.n_vertices) if not nodes[v].is_pearl and nodes[v].t == 1}
        kept = [v for v in range(st.n_vertices) if v not in gone]
        starts = [v for v in kept if parent[v] < 0 or parent[v] in gone]
        same = lambda v: v not in gone  # noqa: E731
    comps = []
    for s in starts:
        keep = set()
        stack = [s]
        while stack:
            v = stack.pop()
            keep.add(paths[v])
            stack.extend(c for c in st.vertex_children(v) if same(c))
        tag = iter(range(10 ** 6, 2 * 10 ** 6))
        tree = _component_tree(root, keep, paths[s], lambda l, p: l if l is not None else next(tag))
        comps.append(_renumber(tree))
    if fam.base == "Ib":
        comps = [c for c in comps if any(v.kind == "p" for v in vertices(c))]
    out, index = [], 0
    for c in comps:
        geo = len(leaves(c)) + sum(1 for v in vertices(c) if not v.is_pearl and v.arity == 0)
        index = max(index, geo)
        out.append(fam.normalize(fam.element(c), validate=False))
    return out, index


def filtration_index(x: BVElement, fam: Family) -> int:
    return prime_decompose(x, fam)[1]


def _prime_pair(x: BVElement, fam: Family) -> tuple[list[BVElement], int]:
    """Prime component of a pair.

    The root of ``a`` is removed when it sits at 1, with the b's on its
    leaves; vertices above the section of the remaining b's at 1 are removed.
    """
    root = x.root
    a, slots = _split_pair(root)
    start = ()
    if a.kind == "v" and a.t == 1:
        pos = next(i for i, c in enumerate(root.kids) if not isinstance(c, int) and _contains_pearl(c))
        start = (pos,)
    keep = set()

    def walk(y, path, above):
        if isinstance(y, int):
            return
        if y.kind == "bv" and above and y.t == 1:
            return
        keep.add(path)
        for i, c in enumerate(y.kids):
            walk(c, path + (i,), above or y.kind == "bp")

    walk(node_at(root, start), start, False)
    tag = iter(range(10 ** 6, 2 * 10 ** 6))
    tree = _renumber(_component_tree(root, keep, start, lambda l, p: l if l is not None else next(tag)))
    return [fam.normalize(fam.element(tree), validate=False)], len(leaves(tree))


def _contains_pearl(x) -> bool:
    return any(v.kind == "p" for v in vertices(x))


def project_mu(x: BVElement, fam: Family) -> El:
    """Send every parameter to 0 and read the label of the resulting corolla."""
    if fam.base == "IbBar":
        return project_mu(fam.gamma_inverse(x), fam.ib)
    root = _with_t(x.root, lambda n, p: None if (n.is_pearl or (fam.base == "W" and not p)) else ZERO)
    y = fam.normalize(fam.element(root), validate=False).root
    if any(isinstance(c, Node) for c in y.kids):
        raise AssertionError(f"projection did not reach a corolla: {full_code(y)}")
    return El(y.arity, y.label)


def project_mu_pair(x: BVElement, fam: Family) -> El:
    """The projection of a pair computed from its parts: ``mu(a)`` acted on by the ``mu(b_i)``."""
    a, slots = _split_pair(x.root)
    ib = fam.ib
    bfam = Family("BLambda", fam.operad)
    top = project_mu(ib.element(a), ib)
    parts = []
    for _, b in slots:
        labs = sorted(leaves(b))
        ren = {l: i + 1 for i, l in enumerate(labs)}
        bb = _kinds_to(_relabel_leaves(b, lambda l: ren[l]), {"bv": "v", "bp": "p"})
        parts.append((project_mu(bfam.element(bb), bfam), labs))
    # the pearled corolla of mu(a) carrying corollas of the mu(b_i): contract at 0
    kids = tuple(Node("v", tuple(labs), m.id, ZERO) for m, labs in parts)
    tree = Node("p", kids, top.id)
    y = ib.normalize(ib.element(tree), validate=False).root
    return El(y.arity, y.label)



# ---------------------------------------------------------------------------
# complexes


def cell_code(root) -> str:
    """Code of the open cell of a normalized element: parameters in (0, 1) become ``*``."""
    if isinstance(root, int):
        return str(root)
    head = root.kind.upper()
    if root.label is not None or root.t is not None:
        t = "" if root.t is None else ("@*" if 0 < root.t < 1 else "@" + str(root.t))
        head += "[" + (root.label or "") + t + "]"
    return head + "(" + ",".join(cell_code(c) for c in root.kids) + ")"


def _levels(root) -> int:
    return len({v.t for v in vertices(root) if v.t is not None and 0 < v.t < 1})


def cell_dim(root) -> int:
    """Dimension of the open cell: number of parameters strictly between 0 and 1."""
    return sum(1 for v in vertices(root) if v.t is not None and 0 < v.t < 1)


@dataclass(frozen=True)
class CellTemplate:
    """A closed cell before identifications: a labelled tree and a parameter poset.

    ``params`` lists the paths of the parametrized vertices; the poset lives
    on their indices and ``i < j`` means ``t_i <= t_j``.
    """

    root: Node
    params: tuple
    poset: Poset

    def point(self, values) -> Node:
        table = dict(zip(self.params, values))
        return _with_t(self.root, lambda n, p: table.get(p, n.t))


def _labelled(rep_root, labels):
    it = iter(labels)

    def walk(x):
        if isinstance(x, int):
            return x
        lab = next(it)
        return Node(x.kind, tuple(walk(c) for c in x.kids), lab, None)

    return walk(rep_root)


def _vertex_paths(root):
    out = []

    def walk(x, path):
        if isinstance(x, int):
            return
        out.append((path, x))
        for i, c in enumerate(x.kids):
            walk(c, path + (i,))

    walk(root, ())
    return out


def _poset_on_indices(ids, vposet):
    idx = {v: i for i, v in enumerate(ids)}
    return Poset(tuple(range(len(ids))), frozenset((idx[a], idx[b]) for a, b in vposet.covers))


def _templates_Ib(fam: Family, k: int):
    for tc in enumerate_tree_classes("pearled", k):
        pt = tc.pearled()
        ids = [v for v in range(pt.n_vertices) if v != pt.pearl]
        poset = _poset_on_indices(ids, pt.poset())
        for labs in rho_values(fam.module, tc):
            yield CellTemplate(_labelled(tc.root, labs), tuple(pt.paths[v] for v in ids), poset)


def _labels_B(fam: Family, rep_root, pearl_space):
    spaces = [pearl_space.elements(v.arity) if v.is_pearl else fam.operad.elements(v.arity) for v in vertices(rep_root)]
    return [tuple(c) for c in product(*spaces)]


def _templates_B(fam: Family, k: int):
    for tc in enumerate_tree_classes("section", k):
        st = tc.section()
        ids = [v for v in range(st.n_vertices) if v not in st.pearls]
        poset = _poset_on_indices(ids, st.poset())
        for labs in _labels_B(fam, tc.root, fam.module):
            yield CellTemplate(_labelled(tc.root, labs), tuple(st.paths[v] for v in ids), poset)


def _templates_W(fam: Family, k: int):
    if k == 0:
        # no inner edges survive in arity 0: one point per element of O(0)
        for x in fam.operad.els(0):
            yield CellTemplate(Node("v", (), x.id), (), Poset((), frozenset()))
        return
    for tc in enumerate_tree_classes("rooted", k):
        rep = tc.representative
        ids = list(range(1, rep.n_vertices))
        poset = Poset(tuple(range(len(ids))), frozenset())
        for labs in _labels_B(fam, tc.root, fam.operad):
            yield CellTemplate(_labelled(tc.root, labs), tuple(rep.paths[v] for v in ids), poset)


def _ordered_partitions(items, n):
    for blocks in set_partitions(list(items)):
        if len(blocks) != n:
            continue
        for order in permutations(blocks):
            yield [sorted(b) for b in order]


def _templates_IbBar(fam: Family, k: int):
    o = fam.operad
    seen = set()
    b_options = {}
    for m in range(1, k + 1):
        opts = []
        for tc in enumerate_tree_classes("section", m):
            st = tc.section()
            ids = [v for v in range(st.n_vertices) if v not in st.pearls]
            for labs in _labels_B(fam, tc.root, o):
                root = _kinds_to(_labelled(tc.root, labs), {"v": "bv", "p": "bp"})
                opts.append((root, [st.paths[v] for v in ids], _poset_on_indices(ids, st.poset())))
        b_options[m] = opts
    for n in range(0 if k == 0 else 1, k + 1):
        for ac in enumerate_tree_classes("pearled", n):
            pt = ac.pearled()
            a_ids = [v for v in range(pt.n_vertices) if v != pt.pearl]
            a_poset = _poset_on_indices(a_ids, pt.poset())
            slot_path = {q: _leaf_path(ac.root, q) for q in range(1, n + 1)}
            for alabs in rho_values(fam.module, ac):
                a_root = _labelled(ac.root, alabs)
                for blocks in _ordered_partitions(range(1, k + 1), n) if n else [[]]:
                    for choice in product(*[b_options[len(b)] for b in blocks]):
                        root = a_root
                        params = [pt.paths[v] for v in a_ids]
                        covers = set(a_poset.covers)
                        for q, (block, (broot, bpaths, bposet)) in enumerate(zip(blocks, choice), start=1):
                            ren = {i + 1: lab for i, lab in enumerate(block)}
                            root = replace_at(root, slot_path[q], _relabel_leaves(broot, lambda l: ren[l]))
                            off = len(params)
                            params.extend(slot_path[q] + p for p in bpaths)
                            covers |= {(a + off, b + off) for a, b in bposet.covers}
                        tmpl = CellTemplate(root, tuple(params), Poset(tuple(range(len(params))), frozenset(covers)))
                        # one template per open cell: test a generic interior point
                        ext = tmpl.poset.linear_extension()
                        vals = [None] * len(params)
                        for r, i in enumerate(ext):
                            vals[i] = Fraction(r + 1, len(params) + 1)
                        y = fam.normalize(fam.element(tmpl.point(vals)), validate=False).root
                        code = cell_code(y)
                        if code in seen or cell_dim(y) != len(params):
                            continue
                        seen.add(code)
                        yield tmpl


def _filters(poset: Poset) -> list[frozenset]:
    d = len(poset.elements)
    out = []
    for mask in range(1 << d):
        s = frozenset(i for i in range(d) if mask >> i & 1)
        if all(b in s for a in s for b in poset.up_set(a)):
            out.append(s)
    out.sort(key=lambda s: (len(s), sorted(s)))
    return out


def _chains(filters: list[frozenset]) -> list[tuple]:
    bigger = {f: [g for g in filters if f < g] for f in filters}
    out = []

    def ext(ch):
        out.append(tuple(ch))
        for g in bigger[ch[-1]]:
            ch.append(g)
            ext(ch)
            ch.pop()

    for f in filters:
        ext([f])
    return out


@dataclass
class FamilyComplexSpec:
    family: Family
    k: int
    grammar: str = ""


@dataclass
class FamilyComplex:
    """Triangulated family space with normalized barycenters of its simplices."""

    family: Family
    k: int
    complex: DeltaComplex
    elements: dict  # simplex key -> normalized barycenter
    cell_of: dict  # simplex key -> open cell code
    subcomplexes: dict = field(default_factory=dict)
    degenerate: int = 0

    def open_cells(self) -> dict:
        dims: dict = {}
        for key, c in self.cell_of.items():
            dims[c] = max(dims.get(c, -1), self.complex.dim_of(key))
        return dims

    def maximal_cells(self, dim: int | None = None) -> list[str]:
        dims = self.open_cells()
        top = self.complex.dim if dim is None else dim
        return sorted(c for c, d in dims.items() if d == top)

    def homology(self, sub: str | None = None):
        return homology(self.complex, self.subcomplexes[sub] if sub else None)


def build_family_complex(spec, k: int | None = None) -> FamilyComplex:
    """Triangulate the family space in arity ``k``.

    Each closed cell (labelled tree class with the order polytope of its
    parameters) is cut into the simplices of chains of up-sets; every
    simplex is named by the normal form of its barycenter, so identified
    faces of different cells coincide.  Simplices whose image has smaller
    dimension (a collapse that only happens for pairs) are recorded as
    degenerate and left out.
    """
    fam = spec.family if isinstance(spec, FamilyComplexSpec) else spec
    k = spec.k if isinstance(spec, FamilyComplexSpec) else k
    if fam.base in ("Ib", "B") and not fam.is_lambda:
        raise ValueError(f"{fam.name} has infinitely many cells; use the Lambda family")
    if fam.name in ("W", "W1") and not fam.operad.doubly_reduced:
        raise ValueError("the W complexes are built for doubly reduced operads")
    need = k + 1 if fam.base in ("Ib", "IbBar") else k
    if fam.operad.max_arity < need:
        raise ValueError(f"{fam.name} in arity {k} needs the operad up to arity {need} (a univalent pearl fills an input)")
    gen = {"Ib": _templates_Ib, "B": _templates_B, "W": _templates_W, "IbBar": _templates_IbBar}[fam.base]
    pair = fam.base == "IbBar"
    reg: dict = {}  # key -> (dim, vertex keys, facet keys)
    elements: dict = {}
    degenerate: set = set()
    vertex_keys: set = set()
    pending = []
    for tmpl in gen(fam, k):
        filters = _filters(tmpl.poset)
        d = len(tmpl.params)
        vkey = {}
        for f in filters:
            y = fam.normalize(fam.element(tmpl.point([ONE if i in f else ZERO for i in range(d)])), validate=False)
            vkey[f] = y.code
            elements[y.code] = y.root
            vertex_keys.add(y.code)
        local = {}
        for ch in _chains(filters):
            s = len(ch) - 1
            vals = [Fraction(sum(1 for f in ch if i in f), s + 1) for i in range(d)]
            y = fam.normalize(fam.element(tmpl.point(vals)), validate=False)
            lv = _levels(y.root)
            if lv < s:
                if not pair:
                    raise AssertionError(f"collapsed simplex in {fam.name}: {y.code}")
                local[ch] = None
                degenerate.add(y.code)
                continue
            if lv != s:
                raise AssertionError(f"barycenter of a {s}-simplex has {lv} levels: {y.code}")
            local[ch] = y.code
            elements[y.code] = y.root
        pending.append((vkey, local))
    order = {v: i for i, v in enumerate(sorted(vertex_keys))}
    for vkey, local in pending:
        for ch, key in local.items():
            if key is None:
                continue
            pos = sorted(range(len(ch)), key=lambda i: (order[vkey[ch[i]]], i))
            verts = tuple(vkey[ch[i]] for i in pos)
            if not pair and len(set(verts)) != len(verts):
                raise AssertionError(f"repeated vertex in simplex {key}")
            facets = tuple(local[ch[:i] + ch[i + 1:]] for i in pos) if len(ch) > 1 else ()
            if key in reg:
                if reg[key][:2] != (len(ch) - 1, verts):
                    raise AssertionError(f"simplex {key} has inconsistent vertices across cells")
                if len(set(verts)) == len(verts) and reg[key][2] != facets:
                    raise AssertionError(f"simplex {key} has inconsistent facets across cells")
                continue
            reg[key] = (len(ch) - 1, verts, facets)
    top = max((r[0] for r in reg.values()), default=-1)
    cells = [[] for _ in range(top + 1)]
    for key in sorted(reg):
        cells[reg[key][0]].append(key)
    x = DeltaComplex(cells, {key: r[2] for key, r in reg.items()}, {}, {key: r[1] for key, r in reg.items()})
    elements = {key: elements[key] for key in reg}
    out = FamilyComplex(fam, k, x, elements, {key: cell_code(elements[key]) for key in reg}, {}, len(degenerate))
    _attach_subcomplexes(out)
    return out


def _attach_subcomplexes(fc: FamilyComplex) -> None:
    fam, k = fc.family, fc.k
    keys = fc.complex.keys()
    idx = {key: filtration_index(fam.element(fc.elements[key]), fam) for key in keys}
    bnd = {key for key in keys if idx[key] < k}
    fc.subcomplexes["boundary"] = bnd
    if fam.base == "Ib" and fam.is_lambda:
        some_one = {key for key in keys if any(v.t == 1 for v in vertices(fc.elements[key]) if not v.is_pearl)}
        if some_one != bnd:
            raise AssertionError("index below k and 'some parameter is 1' disagree")
        if k >= 2:
            up = {key for key in keys if in_upper(tree_class(fc.elements[key], "pearled"))}
            fc.subcomplexes["boundary_prime"] = bnd | up
    if fam.base == "IbBar" and k >= 2:
        by_cut = {key for key in keys if key in bnd or in_boundary_1(fam.element(fc.elements[key]), fam)}
        by_arity = {key for key in keys if key in bnd or _a_has_two_slots(fc.elements[key])}
        if by_cut != by_arity:
            raise AssertionError("the two descriptions of the d1 boundary disagree")
        fc.subcomplexes["boundary_1"] = by_cut
    for sub in fc.subcomplexes.values():
        fc.complex.subcomplex(sub)


def _a_has_two_slots(root) -> bool:
    """``|a| >= 2``, allowing the equivalent form with a b-root at 1 below the section moved into ``a``."""
    a, slots = _split_pair(root)
    n = len(slots)
    for _, b in slots:
        if b.kind == "bv" and b.t == 1:
            n += b.arity - 1
    return n >= 2


def in_boundary_1(x: BVElement, fam: Family) -> bool:
    """The cut condition on the pearled picture: trunk arity 2 or more, or ``t_W <= (2 t_r + 1) / 3``."""
    y = fam.gamma_inverse(x).root if fam.base == "IbBar" else x.root
    pt = PearledTree(y)
    if pt.trunk_arity >= 2:
        return True
    trunk = set(pt.trunk)
    r = pt.trunk[-1]
    for tag, c in pt.children[r]:
        if tag == "v" and c not in trunk:
            tr = ZERO if pt.nodes[r].kind == "p" else pt.nodes[r].t
            return pt.nodes[c].t <= (2 * tr + 1) / 3
    return False



def w_construction(o: FinOperad, variant: str, k: int) -> FamilyComplex:
    """The W (or W1) complex of a doubly reduced operad in arity ``k``."""
    if variant not in ("W", "W1"):
        raise ValueError("variant is W or W1")
    if not o.reduced:
        raise ValueError("the W construction is built for reduced operads")
    return build_family_complex(Family(variant, o), k)


def zeta(a: BVElement, b: BVElement, fam: Family) -> BVElement:
    """The pair ``a{b}`` of an arity-one pearled element and a tree with section."""
    if fam.base != "IbBar":
        raise ValueError("zeta takes values in the IbBar family")
    if a.arity != 1:
        raise ValueError("a must have arity one")
    b_root = _kinds_to(b.root, {"v": "bv", "p": "bp"})
    root = replace_at(a.root, _leaf_path(a.root, 1), b_root)
    return fam.normalize(fam.element(root))


# ---------------------------------------------------------------------------
# random elements and perturbed representatives


def random_point(poset: Poset, rng: random.Random, denominator: int = 12, special: float = 0.3) -> list[Fraction]:
    """A rational point of the order polytope; with probability ``special`` per
    coordinate, a value is copied from a neighbour or set to 0 or 1 (exercising
    the identifications)."""
    ext = poset.linear_extension()
    vals = sorted(Fraction(rng.randint(0, denominator), denominator) for _ in ext)
    out = [None] * len(ext)
    for i, v in zip(ext, vals):
        out[i] = v
    for i in ext:
        if rng.random() < special:
            lo = max((out[j] for j in ext if poset.less(j, i)), default=ZERO)
            hi = min((out[j] for j in ext if poset.less(i, j)), default=ONE)
            out[i] = rng.choice([lo, hi])
    return out


def random_element(fam: Family, k: int, rng: random.Random, denominator: int = 12, special: float = 0.3, templates=None) -> BVElement:
    """A normalized element of a random closed cell at a random rational point."""
    if templates is None:
        templates = cell_templates(fam, k)
    tmpl = rng.choice(templates)
    return fam.normalize(fam.element(tmpl.point(random_point(tmpl.poset, rng, denominator, special))), validate=False)


_TEMPLATE_CACHE: dict = {}


def cell_templates(fam: Family, k: int) -> list[CellTemplate]:
    key = (fam.name, fam.operad.name, getattr(fam.module, "name", None), id(fam), k)
    if key not in _TEMPLATE_CACHE:
        gen = {"Ib": _templates_Ib, "B": _templates_B, "W": _templates_W, "IbBar": _templates_IbBar}[fam.base]
        _TEMPLATE_CACHE[key] = list(gen(fam, k))
    return _TEMPLATE_CACHE[key]


def _factorizations(o: FinOperad, x: El):
    """Ways of writing ``x = u o_i w`` with both factors of arity at least 2."""
    out = []
    for a in range(2, x.n):
        b = x.n - a + 1
        for u in o.els(a):
            for w in o.els(b):
                for i in range(1, a + 1):
                    if o.compose(u, i, w) == x:
                        out.append((u, i, w))
    return out


def perturb(x: BVElement, fam: Family, rng: random.Random, moves: int = 3) -> BVElement:
    """A non-normalized representative of the class of ``x``.

    Moves: insert a unit vertex, split an ordinary vertex into two with the
    same parameter (length 0 for W), split off a vertex at 0 from the pearl
    (Ib), reorder the children of a vertex (acting on its label), and for
    pairs move a b-root at 1 into ``a``.
    """
    root = x.root
    o = fam.operad
    for _ in range(moves):
        vp = _vertex_paths(root)
        move = rng.choice(["unit", "split", "pearl", "reorder", "lift"])
        path, node = rng.choice(vp)
        if move == "unit" and fam.base in ("Ib", "W") and node.kids:
            kids = list(node.kids)
            i = rng.randrange(len(kids))
            c = kids[i]
            if fam.base == "W":
                t = c.t if isinstance(c, Node) else ONE
                kids[i] = Node("v", (c,), o.unit, t)
            else:
                tp = ZERO if node.kind == "p" else node.t
                tc = ONE if isinstance(c, int) else (ZERO if c.kind == "p" else c.t)
                lo, hi = (tc, tp) if not isinstance(c, int) and _contains_pearl(c) else (tp, tc)
                kids[i] = Node("v", (c,), o.unit, (lo + hi) / 2)
            root = replace_at(root, path, node._replace(kids=tuple(kids)))
        elif move == "split" and not node.is_pearl and node.arity >= 3:
            facs = _factorizations(o, _el(node))
            if not facs:
                continue
            u, i, w = rng.choice(facs)
            kids = node.kids
            inner = Node(node.kind, kids[i - 1:i - 1 + w.n], w.id, node.t if fam.base != "W" else ZERO)
            outer = node._replace(kids=kids[: i - 1] + (inner,) + kids[i - 1 + w.n:], label=u.id)
            root = replace_at(root, path, outer)
        elif move == "pearl" and fam.base == "Ib" and node.kind == "p" and node.arity >= 2:
            n = fam.module
            opts = []
            for a in range(2, node.arity + 1):
                for m in n.els(node.arity - a + 1):
                    for u in o.els(a):
                        for i in range(1, m.n + 1):
                            if n.right(m, i, u) == _el(node):
                                opts.append((m, i, u))
            if not opts:
                continue
            m, i, u = rng.choice(opts)
            kids = node.kids
            inner = Node("v", kids[i - 1:i - 1 + u.n], u.id, ZERO)
            root = replace_at(root, path, Node("p", kids[: i - 1] + (inner,) + kids[i - 1 + u.n:], m.id, None))
        elif move == "reorder" and node.arity >= 2:
            pi = list(range(1, node.arity + 1))
            rng.shuffle(pi)
            pi = tuple(pi)
            # children c'_q = c_{pi(q)} with the label acted on by pi describe the same class
            space = fam.module if node.kind == "p" and fam.module is not None else o
            lab = space.act(_el(node), pi)
            kids = tuple(node.kids[pi[q] - 1] for q in range(len(pi)))
            root = replace_at(root, path, node._replace(kids=kids, label=lab.id))
        elif move == "lift" and fam.base == "IbBar" and node.kind == "bv" and node.t == 1:
            parent = node_at(root, path[:-1]) if path else None
            if parent is None or parent.kind not in ("v", "p"):
                continue
            # a b-root at 1 below the section equals a vertex of a at 1 (right action on a)
            root = replace_at(root, path, Node("v", node.kids, node.label, ONE))
    return fam.element(root)

def _kinds_to(root, mapping):
    if isinstance(root, int):
        return root
    return Node(mapping.get(root.kind, root.kind), tuple(_kinds_to(c, mapping) for c in root.kids), root.label, root.t)


def _split_pair(root):
    """The ``a`` part of a nested pair (slots become leaves 1..n) and the slot subtrees."""
    slots = []

    def walk(x, path):
        if isinstance(x, int):
            raise ValueError("a leaf of the pearled part must carry a tree with section")
        if x.kind in ("bv", "bp"):
            slots.append((path, x))
            return len(slots)
        if x.kind not in ("v", "p"):
            raise ValueError(f"unexpected vertex kind {x.kind!r}")
        return x._replace(kids=tuple(walk(c, path + (i,)) for i, c in enumerate(x.kids)))

    a = walk(root, ())
    if isinstance(a, int):
        raise ValueError("the pearled part is empty")
    return a, slots
