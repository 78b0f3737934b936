#!/usr/bin/env python3
"""Explicit homotopies and the evaluation map on pairs, checked on exact rational samples.

Run:  python demos/04_retractions_and_xi.py
"""

from fractions import Fraction

from opcalc.algebra import builtin
from opcalc.verify import cubical_homotopy, verify_retraction, verify_xi


def show(r):
    print(f"{r.title}: {'pass' if r.ok else 'FAIL'}")
    for c in r.checks:
        print(f"    [{'PASS' if c.ok else 'FAIL'}] {c.name}")


def main():
    x = (Fraction(1, 2), Fraction(3, 4), Fraction(1, 3))
    print("Straight-line retraction of the cube with one arrow missing, from", [str(v) for v in x])
    for t in (0, Fraction(1, 2), 1):
        print(f"  t={t}: {[str(v) for v in cubical_homotopy(x, 0, Fraction(t))]}")
    print()
    show(verify_retraction("cubical", {"i": 3}, samples=200))
    show(verify_retraction("d1", {"operad": builtin("assoc", 4), "k": 3}, samples=200))
    r = verify_xi(builtin("assoc", 3), k=2, pairs=500)
    show(r)
    print(f"    target {r.data['K']}, pairs by kind {r.data['pairs']}")


if __name__ == "__main__":
    main()
