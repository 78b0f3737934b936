"""The categories of pearled trees and their sub-categories.

A category here has at most one morphism between two objects, so it is a
poset given by covering pairs, possibly with some ordered pairs whose arrow
is deleted.  Objects of the pearled-tree categories are ``TreeClass`` codes
ordered by inner edge contraction (``T <= T'`` when ``T'`` is a contraction
of ``T``).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations

from ._poset import Poset
from .trees import (
    TreeClass,
    contract_edge,
    contract_edges,
    enumerate_tree_classes,
    pearled_corolla,
    pearled_subcorolla,
    tree_class,
)


@dataclass(frozen=True)
class RelCategory:
    """Thin category: a poset on ``objects`` minus the arrows in ``forbidden``."""

    objects: tuple
    covers: frozenset
    forbidden: frozenset = frozenset()
    name: str = ""

    @cached_property
    def poset(self) -> Poset:
        return Poset(self.objects, self.covers)

    def leq(self, a, b) -> bool:
        """Whether an arrow ``a -> b`` exists (identities included)."""
        if a == b:
            return True
        return self.poset.less(a, b) and (a, b) not in self.forbidden

    def arrows(self) -> list[tuple]:
        """Non-identity arrows."""
        return [(a, b) for a in self.objects for b in self.poset.up_set(a) if b != a and (a, b) not in self.forbidden]

    def covering_pairs(self) -> list[tuple]:
        return sorted(
            (a, b) for a, b in self.covers
            if (a, b) not in self.forbidden
            and not any(self.poset.less(a, c) and self.poset.less(c, b) for c in self.objects)
        )

    def full_subcategory(self, keep, name: str = "") -> RelCategory:
        keep = set(keep)
        objs = tuple(o for o in self.objects if o in keep)
        # covers of the restriction: all order relations between kept objects
        covers = frozenset((a, b) for a in objs for b in self.poset.up_set(a) if b != a and b in keep)
        forb = frozenset((a, b) for a, b in self.forbidden if a in keep and b in keep)
        return RelCategory(objs, covers, forb, name or self.name)

    def composition_closed(self) -> bool:
        arr = set(self.arrows())
        for a, b in arr:
            for c in self.poset.up_set(b):
                if c != b and (b, c) in arr and (a, c) not in arr:
                    return False
        return True

    def terminal_objects(self) -> list:
        return [t for t in self.objects if all(self.leq(o, t) for o in self.objects)]


@dataclass(frozen=True)
class PsiCat:
    k: int
    base: RelCategory
    classes: dict
    c_k: str
    c_prime_k: str | None

    @property
    def objects(self) -> tuple:
        return self.base.objects

    def tree(self, code: str) -> TreeClass:
        return self.classes[code]


@dataclass(frozen=True)
class UnderCube:
    source: str
    objects: tuple
    shape: str
    subsets: dict = field(default_factory=dict)  # frozenset of edge ids -> object
    tau: str | None = None
    tau_prime: str | None = None


_PSI_CACHE: dict[int, PsiCat] = {}


def build_psi(k: int) -> PsiCat:
    """Pearled trees with ``k`` labelled leaves ordered by edge contraction."""
    if k < 0:
        raise ValueError("k must be non-negative")
    if k in _PSI_CACHE:
        return _PSI_CACHE[k]
    classes = {t.code: t for t in enumerate_tree_classes("pearled", k)}
    covers = set()
    for code, t in classes.items():
        for e in range(1, t.n_vertices):
            r = contract_edge(t, e)
            if r.code not in classes:
                raise AssertionError(f"contraction left the category: {r.code}")
            covers.add((code, r.code))
    base = RelCategory(tuple(sorted(classes)), frozenset(covers), frozenset(), f"Psi_{k}")
    c_k = tree_class(pearled_corolla(k), "pearled").code
    cp = tree_class(pearled_subcorolla(k), "pearled").code if k >= 2 else None
    psi = PsiCat(k, base, classes, c_k, cp)
    _PSI_CACHE[k] = psi
    return psi


def in_upper(t: TreeClass) -> bool:
    """Trunk of arity at least two."""
    return t.pearled().trunk_arity >= 2


def in_lower(t: TreeClass) -> bool:
    """Pearled root, or a univalent pearl on a trunk with two vertices."""
    pt = t.pearled()
    if pt.pearl == 0:
        return True
    return pt.arity(pt.pearl) == 0 and len(pt.trunk) == 2


def in_upper_lower(t: TreeClass) -> bool:
    pt = t.pearled()
    if pt.pearl == 0:
        return pt.arity(0) >= 2
    return pt.arity(pt.pearl) == 0 and len(pt.trunk) == 2 and pt.arity(0) >= 3


SELECTORS = ("boundary", "prime", "U", "L", "UL", "boundary_U", "boundary_L", "boundary_UL")


def restrict(psi: PsiCat, selector: str) -> RelCategory:
    if selector not in SELECTORS:
        raise ValueError(f"unknown selector {selector!r}")
    if selector != "boundary" and psi.k < 2:
        raise ValueError(f"selector {selector!r} needs k >= 2")
    base = psi.base
    if selector == "boundary":
        return base.full_subcategory([o for o in base.objects if o != psi.c_k], f"dPsi_{psi.k}")
    if selector == "prime":
        return RelCategory(base.objects, base.covers, frozenset({(psi.c_prime_k, psi.c_k)}), f"Psi'_{psi.k}")
    part, bnd = (selector[9:], True) if selector.startswith("boundary_") else (selector, False)
    test = {"U": in_upper, "L": in_lower, "UL": in_upper_lower}[part]
    keep = [o for o in base.objects if test(psi.tree(o)) and not (bnd and o == psi.c_k)]
    return base.full_subcategory(keep, ("d" if bnd else "") + f"Psi_{psi.k}^{part}")


def upper_by_reachability(psi: PsiCat) -> set:
    return {o for o in psi.objects if not psi.base.leq(o, psi.c_prime_k)}


def lower_by_reachability(psi: PsiCat) -> set:
    below = [o for o in psi.objects if psi.base.leq(o, psi.c_prime_k)]
    return {o for o in psi.objects if any(psi.base.leq(b, o) for b in below)}


def under_category(psi: PsiCat, t: str, within: RelCategory | None = None) -> UnderCube:
    """``T`` under ``within`` compared with the cube of inner-edge subsets of ``T``."""
    within = within or psi.base
    if t not in within.objects:
        raise ValueError("T is not an object of the category")
    tc = psi.tree(t)
    edges = list(range(1, tc.n_vertices))
    subsets = {}
    for r in range(len(edges) + 1):
        for es in combinations(edges, r):
            subsets[frozenset(es)] = contract_edges(tc, es).code if es else t
    objs = tuple(sorted(o for o in within.objects if within.leq(t, o)))
    if len(set(subsets.values())) != len(subsets):
        raise AssertionError("distinct edge subsets gave the same tree")
    reached = {s: o for s, o in subsets.items() if o in objs}
    missing = []
    for s, o in reached.items():
        for s2, o2 in reached.items():
            if s < s2 and not within.leq(o, o2):
                missing.append((o, o2))
    full = frozenset(edges)
    if len(reached) == len(subsets) and not missing:
        return UnderCube(t, objs, "cubical", subsets)
    if len(reached) == len(subsets) and len(missing) == 1 and missing[0][1] == subsets[full]:
        return UnderCube(t, objs, "almost_cubical", subsets, missing[0][1], missing[0][0])
    if full not in reached and len(reached) == len(subsets) - 1 and not missing:
        return UnderCube(t, objs, "subcubical", subsets)
    return UnderCube(t, objs, "other", subsets)


def initial_in_boundary_U(psi: PsiCat, t: str) -> str | None:
    """Minimum of ``T`` under the boundary of the upper part, or ``None`` if empty."""
    if psi.k < 2:
        raise ValueError("needs k >= 2")
    part = restrict(psi, "boundary_U")
    over = [o for o in part.objects if psi.base.leq(t, o)]
    if not over:
        if t not in (psi.c_k, psi.c_prime_k):
            raise AssertionError(f"{t}: empty under-category outside the two corollas")
        return None
    mins = [o for o in over if all(psi.base.leq(o, x) for x in over)]
    if len(mins) != 1:
        raise AssertionError(f"{t}: no initial element in the under-category")
    return mins[0]
