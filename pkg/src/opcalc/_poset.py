"""Small finite posets given by covering pairs."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property


@dataclass(frozen=True)
class Poset:
    """A finite poset on hashable elements.

    ``covers`` holds pairs ``(a, b)`` with ``a < b``; the order is their
    reflexive-transitive closure.  The pairs need not be irredundant.
    """

    elements: tuple
    covers: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        known = set(self.elements)
        for a, b in self.covers:
            if a not in known or b not in known:
                raise ValueError(f"cover ({a!r}, {b!r}) uses an unknown element")

    @cached_property
    def _up(self) -> dict:
        succ = {x: set() for x in self.elements}
        for a, b in self.covers:
            succ[a].add(b)
        up = {}
        for x in self.elements:
            seen, stack = {x}, [x]
            while stack:
                y = stack.pop()
                for z in succ[y]:
                    if z not in seen:
                        seen.add(z)
                        stack.append(z)
            up[x] = frozenset(seen)
        for x in self.elements:
            for y in up[x]:
                if y != x and x in up[y]:
                    raise ValueError("covering pairs contain a cycle")
        return up

    def leq(self, a, b) -> bool:
        return b in self._up[a]

    def less(self, a, b) -> bool:
        return a != b and b in self._up[a]

    def up_set(self, a) -> frozenset:
        return self._up[a]

    def minimal(self) -> list:
        return [x for x in self.elements if not any(self.less(y, x) for y in self.elements)]

    def maximal(self) -> list:
        return [x for x in self.elements if not any(self.less(x, y) for y in self.elements)]

    def height(self) -> int:
        """Number of elements in a longest chain."""
        best = {}
        for x in self.linear_extension():
            best[x] = 1 + max((best[y] for y in self.elements if y in best and self.less(y, x)), default=0)
        return max(best.values(), default=0)

    def linear_extension(self) -> list:
        order, placed = [], set()
        while len(order) < len(self.elements):
            for x in self.elements:
                if x not in placed and all(y in placed for y in self.elements if self.less(y, x)):
                    order.append(x)
                    placed.add(x)
                    break
        return order

    def linear_extensions(self) -> list[tuple]:
        """All linear extensions, in lexicographic order of element positions."""
        below = {x: {y for y in self.elements if self.less(y, x)} for x in self.elements}
        out: list[tuple] = []

        def rec(prefix, placed):
            if len(prefix) == len(self.elements):
                out.append(tuple(prefix))
                return
            for x in self.elements:
                if x not in placed and below[x] <= placed:
                    placed.add(x)
                    prefix.append(x)
                    rec(prefix, placed)
                    prefix.pop()
                    placed.remove(x)

        rec([], set())
        return out

    def is_antichain(self) -> bool:
        return all(not self.less(a, b) for a in self.elements for b in self.elements)
