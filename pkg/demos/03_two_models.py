#!/usr/bin/env python3
"""Two models of the same space, and the coherence of Assoc.

The homotopy colimit of the label diagram over pearled trees is computed as the
nerve of its category of elements; the tree resolution is triangulated
directly.  Their homology agrees, and so does the homology of the boundary
parts.  The same nerves decide whether an infinitesimal bimodule is coherent.

Run:  python demos/03_two_models.py
"""

from opcalc.algebra import builtin, self_ibimodule
from opcalc.verify import coherence_check, compare_models


def main():
    for name in ("comm", "assoc"):
        for k in range(1, 4):
            r = compare_models(builtin(name, k + 1), k)
            whole = next(c for c in r.checks if c.name == "whole space")
            print(f"{name:5} k={k}: {'agree' if r.ok else 'DISAGREE'}; Betti numbers {whole.got['betti']}, "
                  f"{r.data['nerve_cells']} nerve simplices against {r.data['complex_cells']} in the complex")

    print()
    n = self_ibimodule(builtin("assoc", 4))
    for k in (2, 3):
        for mode in ("coherent", "strong"):
            r = coherence_check(n, k, mode)
            print(f"Assoc k={k} {mode:9}: {r.verdict}; source {r.source['betti']}, target {r.target['betti']}")
    lam = coherence_check(self_ibimodule(builtin("lambda", 3)), 2)
    print(f"Lambda k=2: {', '.join(c.name for c in lam.checks)}")


if __name__ == "__main__":
    main()
