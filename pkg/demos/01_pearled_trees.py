#!/usr/bin/env python3
"""Pearled trees, the category they form under edge contraction, and its small pieces.

Run:  python demos/01_pearled_trees.py
"""

from opcalc.algebra import builtin, rho_diagram, self_ibimodule
from opcalc.psi import build_psi, restrict
from opcalc.trees import enumerate_tree_classes


def main():
    print("Pearled trees with k labelled leaves:")
    for k in range(5):
        print(f"  k={k}: {len(enumerate_tree_classes('pearled', k))} classes")

    psi = build_psi(2)
    print("\nThe eight objects with two leaves, each with the trees it contracts to:")
    for code in psi.objects:
        down = sorted(b for a, b in psi.base.covering_pairs() if a == code)
        print(f"  {code:16} -> {', '.join(down) if down else '(terminal)'}")

    zig = restrict(psi, "boundary_U")
    rho = rho_diagram(self_ibimodule(builtin("assoc", 3)), 2)
    print("\nThe boundary of the upper part is a zigzag of five objects.")
    print("Labels by Assoc (the size of each value of the diagram):")
    for a, b in sorted(zig.covering_pairs()):
        print(f"  {a} ({len(rho.values[a])}) -> {b} ({len(rho.values[b])})")

    ul = restrict(psi, "UL")
    print(f"\nUpper and lower at once: {len(ul.objects)} objects, {len(ul.arrows())} arrow")


if __name__ == "__main__":
    main()
