"""Acceptance criteria 1 to 10.

Every criterion is one test that computes exact values, compares them with
``==`` and stays within its time budget.  Each test prints one line
``criterion N: PASS|FAIL: ...``; the lines are repeated in the terminal
summary, and ``python tests/test_acceptance.py`` prints them directly.
"""

import math
import sys
import time


from opcalc import bv
from opcalc import verify as V
from opcalc.algebra import builtin, lambda_seq_of, matching_object, rho_diagram, self_ibimodule
from opcalc.psi import build_psi, restrict

RESULTS: dict = {}


class Criterion:
    """Collects exact comparisons and the elapsed time of one criterion."""

    def __init__(self, number: int, title: str, budget: float):
        self.number, self.title, self.budget = number, title, budget
        self.failures: list[str] = []
        self.count = 0

    def eq(self, what, expected, got):
        self.count += 1
        if expected != got:
            self.failures.append(f"{what}: expected {expected!r}, got {got!r}")

    def true(self, what, cond):
        self.eq(what, True, bool(cond))

    def report(self, r):
        for c in r.checks:
            self.count += 1
            if not c.ok:
                self.failures.append(f"{r.title}: {c.name}: expected {c.expected!r}, got {c.got!r}")

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.seconds = time.perf_counter() - self.t0
        if exc[0] is not None:
            self.failures.append(f"raised {exc[0].__name__}: {exc[1]}")
        if self.seconds >= self.budget:
            self.failures.append(f"took {self.seconds:.2f} s, budget {self.budget:g} s")
        verdict = "PASS" if not self.failures else "FAIL"
        line = f"criterion {self.number}: {verdict}: {self.title} ({self.count} exact checks, {self.seconds:.2f} s)"
        RESULTS[self.number] = line
        print(line)
        for f in self.failures[:5]:
            print(f"    {f}")
        return True

    def verdict(self):
        assert not self.failures, "\n".join(self.failures)


def betti_acyclic(h, components):
    """Exactly ``components`` components, each with vanishing reduced homology."""
    return h.betti == [components] + [0] * (len(h.betti) - 1) and all(t == [] for t in h.torsion)


def test_criterion_1_psi_enumeration():
    with Criterion(1, "Psi enumeration and the arity-two subcategories", 1.0) as c:
        c.eq("|Psi_0|, |Psi_1|, |Psi_2|", [1, 2, 8], [len(build_psi(k).objects) for k in range(3)])
        psi = build_psi(2)
        zig = restrict(psi, "boundary_U")
        pairs = zig.covering_pairs()
        c.eq("objects of the boundary of Psi_2^U", 5, len(zig.objects))
        c.eq("generating arrows of the boundary of Psi_2^U", 4, len(pairs))
        c.eq("no composite arrows", sorted(pairs), sorted(zig.arrows()))
        # walk the underlying graph: it must be a path whose arrows alternate
        nbr = {o: [] for o in zig.objects}
        for a, b in pairs:
            nbr[a].append(b)
            nbr[b].append(a)
        ends = sorted(o for o, ns in nbr.items() if len(ns) == 1)
        c.eq("two ends", 2, len(ends))
        path, prev = [ends[0]], None
        while len(path) < len(zig.objects):
            nxt = [o for o in nbr[path[-1]] if o != prev]
            if len(nxt) != 1:
                break
            prev = path[-1]
            path.append(nxt[0])
        c.eq("underlying graph is a path", 5, len(set(path)))
        sources = [o for o in path if all((o, n) in pairs for n in nbr[o])]
        sinks = [o for o in path if all((n, o) in pairs for n in nbr[o])]
        c.eq("alternating directions: sources", [path[1], path[3]], sources)
        c.eq("alternating directions: sinks", [path[0], path[2], path[4]], sinks)
        rho = rho_diagram(self_ibimodule(builtin("assoc", 3)), 2)
        c.eq("Assoc labels along the zigzag", [2, 4, 6, 4, 2], [len(rho.values[o]) for o in path])
        ul = restrict(psi, "UL")
        c.eq("objects of Psi_2^UL", 2, len(ul.objects))
        c.eq("morphisms of Psi_2^UL", 1, len(ul.arrows()))
    c.verdict()


def test_criterion_2_contractibility():
    with Criterion(2, "homology of the tree resolutions", 60.0) as c:
        for k in range(5):
            h = bv.build_family_complex(bv.Family("IbLambda", builtin("comm", k + 1)), k).homology()
            c.true(f"IbLambda(Comm)({k}) has vanishing reduced homology", betti_acyclic(h, 1))
        for k in range(4):
            h = bv.build_family_complex(bv.Family("IbLambda", builtin("assoc", k + 1)), k).homology()
            c.true(f"IbLambda(Assoc)({k}) is {math.factorial(k)} acyclic components", betti_acyclic(h, math.factorial(k)))
        h = bv.build_family_complex(bv.Family("BLambda", builtin("assoc", 2)), 2).homology()
        c.true("BLambda(Assoc)(2) is 2 acyclic components", betti_acyclic(h, 2))
        for k in range(5):
            h = bv.w_construction(builtin("assoc", max(k, 1)), "W", k).homology()
            c.true(f"W(Assoc)({k}) is {math.factorial(k)} acyclic components", betti_acyclic(h, math.factorial(k)))
        w1 = bv.w_construction(builtin("assoc", 1), "W1", 1)
        c.eq("W1 in arity 1: cells", 1, w1.complex.n_cells())
        c.true("W1 in arity 1 is a point", betti_acyclic(w1.homology(), 1))
    c.verdict()


def test_criterion_3_cell_counts():
    with Criterion(3, "maximal cells over Comm in arity two", 1.0) as c:
        fi = bv.build_family_complex(bv.Family("IbLambda", builtin("comm", 3)), 2)
        fb = bv.build_family_complex(bv.Family("IbBar", builtin("comm", 3)), 2)
        c.eq("maximal 2-cells of IbLambda(Comm)(2)", 3, len(fi.maximal_cells(2)))
        c.eq("maximal 2-cells after the gamma refinement", 5, len(fb.maximal_cells(2)))
        c.eq("no cell above dimension two", [2, 2], [fi.complex.dim, fb.complex.dim])
    c.verdict()


def test_criterion_4_models():
    with Criterion(4, "nerve of the category of elements against the family complex", 60.0) as c:
        for name in ("comm", "assoc"):
            for k in range(4):
                c.report(V.compare_models(builtin(name, k + 1), k))
    c.verdict()


def test_criterion_5_delta():
    with Criterion(5, "the chart delta on every tree up to four leaves", 60.0) as c:
        trees = 0
        for k in range(5):
            r = V.verify_delta(k)
            c.report(r)
            trees += len(r.trees)
        c.eq("trees covered", sum(len(build_psi(k).objects) for k in range(5)), trees)
    c.verdict()


def test_criterion_6_coherence():
    with Criterion(6, "homological coherence and strong coherence", 300.0) as c:
        n = self_ibimodule(builtin("assoc", 4))
        for k in (2, 3):
            for mode in ("coherent", "strong"):
                r = V.coherence_check(n, k, mode)
                c.report(r)
                c.true(f"{mode} k={k}: isomorphism in every degree", r.iso and all(r.iso))
        strong = V.coherence_check(n, 2, "strong")
        c.eq("Betti_0 of the strong side at k=2", 2, strong.target["betti"][0])
        c.eq("Betti_0 of the upper side at k=2", 2, strong.source["betti"][0])
        lam = V.coherence_check(self_ibimodule(builtin("lambda", 3)), 2)
        c.report(lam)
        c.eq("Lambda at k=2: both sides empty", ["both sides empty"], [x.name for x in lam.checks])
    c.verdict()


def test_criterion_7_gamma_roundtrip():
    with Criterion(7, "gamma roundtrip on 1000 random elements per case", 30.0) as c:
        for name in ("comm", "assoc"):
            for k in (2, 3):
                r = V.verify_gamma(builtin(name, k + 1), k=k, samples=1000, seed=7)
                c.report(r)
                c.eq(f"samples {name} k={k}", 1000, r.data["samples"])
    c.verdict()


def test_criterion_8_retractions():
    with Criterion(8, "cubical and d1 retractions", 30.0) as c:
        for i in (1, 2, 3):
            r = V.verify_retraction("cubical", {"i": i}, samples=200, seed=8)
            c.report(r)
            c.true(f"cubical i={i}: at least 200 samples", r.data["samples"] >= 200)
        for name in ("comm", "assoc"):
            for k in (2, 3):
                r = V.verify_retraction("d1", {"operad": builtin(name, k + 1), "k": k}, samples=200, seed=8)
                c.report(r)
                types = r.data["types"]
                c.true(f"d1 {name} k={k}: at least 200 samples", sum(types.values()) >= 200)
                c.true(f"d1 {name} k={k}: all three types", all(types[t] > 0 for t in (1, 2, 3)))
    c.verdict()


def test_criterion_9_xi():
    with Criterion(9, "the evaluation of xi on pairs", 30.0) as c:
        for name in ("assoc", "comm"):
            for k in (2, 3):
                r = V.verify_xi(builtin(name, k + 1), k=k, samples=200, pairs=500, seed=9)
                c.report(r)
                names = [x.name for x in r.checks]
                c.true(f"xi {name} k={k}: constant table checked", any(x.startswith("constant table") for x in names))
                c.true(f"xi {name} k={k}: tau membership checked", "tau in the boundary exactly on leaves of a root at 1" in names)
                c.true(f"xi {name} k={k}: at least 500 pairs", sum(r.data["pairs"].values()) >= 500)
    c.verdict()


def test_criterion_10_strata():
    with Criterion(10, "strata bookkeeping and the matching object", 1.0) as c:
        f3 = V.fm_strata("F", 3)
        c.eq("strata of F(3)", 4, len(f3.strata))
        c.eq("codimensions of F(3)", {0: 1, 1: 3}, f3.data["by_codim"])
        for k in range(2, 6):
            r = V.fm_strata("IF", k, preimage_of="corolla")
            c.report(r)
            c.eq(f"preimage counts over the {k}-corolla", [1, k + 1, 1, k + 1],
                 [len(r.preimage[t]) for t in ("I", "II", "III", "IV")])
        c.eq("matching object of Assoc in arity 3", 8, len(matching_object(lambda_seq_of(builtin("assoc", 3)), 3)))
    c.verdict()


if __name__ == "__main__":
    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_criterion_")]
    failed = 0
    for t in sorted(tests, key=lambda f: int(f.__name__.split("_")[2])):
        try:
            t()
        except AssertionError:
            failed += 1
    sys.exit(1 if failed else 0)
