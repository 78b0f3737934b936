#!/usr/bin/env python3
"""The pearled-tree resolution of Comm in arity two, and how cutting it into pairs refines it.

Run:  python demos/02_three_triangles.py
"""

from fractions import Fraction

from opcalc import bv
from opcalc.algebra import builtin
from opcalc.trees import Node
from opcalc.verify import gamma_refinement


def main():
    comm = builtin("comm", 3)
    ib = bv.build_family_complex(bv.Family("IbLambda", comm), 2)
    print("Maximal cells of the resolution of Comm with two inputs:")
    for code in ib.maximal_cells(2):
        print(f"  {code}")
    h = ib.homology()
    f = [len(c) for c in ib.complex.cells]
    print(f"simplices by dimension {f}, Betti numbers {h.betti}: a contractible union of triangles")

    bar = bv.build_family_complex(bv.Family("IbBar", comm), 2)
    dims, faces, ref = gamma_refinement(bar, ib)
    print(f"\nAfter cutting every element into a pair a{{b_1, ..., b_n}} there are {len(bar.maximal_cells(2))} maximal cells.")
    for cell in ib.maximal_cells(2):
        pieces = [c for c in bar.maximal_cells(2) if ref[c] == cell]
        print(f"  {cell}: {len(pieces)} piece(s)")
    print("The triangle with a vertex off the trunk is cut at both cut values, so it falls into three pieces.")

    # a vertex at height 1/2 just above the pearl, and one at 3/4 above that
    tree = Node("p", (Node("v", (1, Node("v", (2, 3), "c", Fraction(3, 4))), "c", Fraction(1, 2)),), "c")
    fam = bv.Family("IbBar", builtin("comm", 4))
    x = fam.ib.normalize(fam.ib.element(tree))
    y = fam.gamma_forward(x)
    print(f"\nA sample element {x.code}\n  as a pair: {y.code}\n  and back:  {fam.gamma_inverse(y).code}")


if __name__ == "__main__":
    main()
