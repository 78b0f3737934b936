"""Semi-simplicial complexes, integer homology, nerves and cellular cosheaves.

A ``DeltaComplex`` stores, for every simplex key, the ordered tuple of its
facets (facet ``i`` omits vertex ``i``).  A facet may be ``None`` when it is
degenerate (collapsed to a lower-dimensional simplex); such facets are left
out of the normalized chains.  Homology is computed over the
integers: first ``+-1`` pivots are eliminated (never pairing a cell of a
marked subcomplex with a cell outside it), then the remaining small
boundary matrices go through a Smith normal form with transforms.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Callable, Iterable

from ._poset import Poset


# ---------------------------------------------------------------------------
# complexes


@dataclass
class DeltaComplex:
    cells: list[list] = field(default_factory=list)  # per dimension, simplex keys
    faces: dict = field(default_factory=dict)  # key -> tuple of facet keys
    labels: dict = field(default_factory=dict)
    vertices: dict = field(default_factory=dict)  # key -> tuple of vertex keys (optional)

    def __post_init__(self):
        self._dim_of = {k: d for d, ks in enumerate(self.cells) for k in ks}

    @property
    def dim(self) -> int:
        for d in range(len(self.cells) - 1, -1, -1):
            if self.cells[d]:
                return d
        return -1

    def dim_of(self, key) -> int:
        return self._dim_of[key]

    def __contains__(self, key) -> bool:
        return key in self._dim_of

    def keys(self) -> list:
        return [k for ks in self.cells for k in ks]

    def n_cells(self) -> int:
        return len(self._dim_of)

    def check(self) -> None:
        """Face-of-face identities ``d_i d_j = d_{j-1} d_i`` for ``i < j``."""
        for d, ks in enumerate(self.cells):
            for k in ks:
                fs = self.faces.get(k, ())
                if len(fs) != (d + 1 if d > 0 else 0):
                    raise ValueError(f"simplex {k!r} of dimension {d} has {len(fs)} facets")
                for f in fs:
                    if f is not None and self._dim_of.get(f) != d - 1:
                        raise ValueError(f"facet {f!r} of {k!r} has the wrong dimension")
                if d >= 2:
                    for j in range(d + 1):
                        for i in range(j):
                            if fs[i] is None or fs[j] is None:
                                continue
                            if self.faces[fs[j]][i] != self.faces[fs[i]][j - 1]:
                                raise ValueError(f"face identity fails on {k!r} at ({i}, {j})")

    def subcomplex(self, keep) -> DeltaComplex:
        keep = set(keep)
        for k in keep:
            for f in self.faces.get(k, ()):
                if f is not None and f not in keep:
                    raise ValueError(f"{k!r} is kept but its facet {f!r} is not")
        cells = [[k for k in ks if k in keep] for ks in self.cells]
        faces = {k: v for k, v in self.faces.items() if k in keep}
        return DeltaComplex(cells, faces, {k: v for k, v in self.labels.items() if k in keep},
                            {k: v for k, v in self.vertices.items() if k in keep})

    def closure(self, keys) -> set:
        out, stack = set(), list(keys)
        while stack:
            k = stack.pop()
            if k in out:
                continue
            out.add(k)
            stack.extend(f for f in self.faces.get(k, ()) if f is not None)
        return out

    def maximal(self) -> list:
        used = {f for fs in self.faces.values() for f in fs if f is not None}
        return [k for k in self.keys() if k not in used]


def simplicial_complex(simplices: Iterable[tuple], order: Callable | None = None, labels: dict | None = None) -> DeltaComplex:
    """Ordered simplicial complex generated by vertex tuples (closed under faces)."""
    key = order or (lambda v: v)
    seen: set = set()
    for s in simplices:
        s = tuple(sorted(s, key=key))
        if len(set(s)) != len(s):
            raise ValueError(f"repeated vertex in {s!r}")
        if s in seen:
            continue
        stack = [s]
        while stack:
            t = stack.pop()
            if t in seen:
                continue
            seen.add(t)
            if len(t) > 1:
                stack.extend(t[:i] + t[i + 1:] for i in range(len(t)))
    top = max((len(s) for s in seen), default=0)
    cells = [[] for _ in range(top)]
    for s in seen:
        cells[len(s) - 1].append(s)
    for ks in cells:
        ks.sort(key=lambda t: tuple(key(v) for v in t))
    faces = {s: tuple(s[:i] + s[i + 1:] for i in range(len(s))) if len(s) > 1 else () for s in seen}
    return DeltaComplex(cells, faces, labels or {}, {s: s for s in seen})


def f_vector(x: DeltaComplex) -> list[int]:
    return [len(ks) for ks in x.cells[: x.dim + 1]]


# ---------------------------------------------------------------------------
# Smith normal form


def _copy(m):
    return [list(r) for r in m]


def _ident(n):
    return [[int(i == j) for j in range(n)] for i in range(n)]


def smith(a: list[list[int]]):
    """Smith normal form ``L a R = S`` with unimodular ``L`` and ``R``.

    Returns ``(S, L, Linv, R, Rinv)``; the diagonal of ``S`` holds the
    invariant factors ``d_1 | d_2 | ...`` followed by zeros.
    """
    m = len(a)
    n = len(a[0]) if m else 0
    s = _copy(a)
    L, Li, R, Ri = _ident(m), _ident(m), _ident(n), _ident(n)

    def row_op(i, j, c):  # row_i += c row_j
        if c == 0:
            return
        s[i] = [x + c * y for x, y in zip(s[i], s[j])]
        L[i] = [x + c * y for x, y in zip(L[i], L[j])]
        for r in Li:  # Li <- Li E^-1: col_j -= c col_i
            r[j] -= c * r[i]

    def row_swap(i, j):
        s[i], s[j] = s[j], s[i]
        L[i], L[j] = L[j], L[i]
        for r in Li:
            r[i], r[j] = r[j], r[i]

    def row_neg(i):
        s[i] = [-x for x in s[i]]
        L[i] = [-x for x in L[i]]
        for r in Li:
            r[i] = -r[i]

    def col_op(i, j, c):  # col_i += c col_j
        if c == 0:
            return
        for r in s:
            r[i] += c * r[j]
        for r in R:
            r[i] += c * r[j]
        Ri[j] = [x - c * y for x, y in zip(Ri[j], Ri[i])]  # Ri <- E^-1 Ri

    def col_swap(i, j):
        for r in s:
            r[i], r[j] = r[j], r[i]
        for r in R:
            r[i], r[j] = r[j], r[i]
        Ri[i], Ri[j] = Ri[j], Ri[i]

    t = 0
    while t < min(m, n):
        # pivot: smallest nonzero absolute value in the remaining block
        best = None
        for i in range(t, m):
            for j in range(t, n):
                v = s[i][j]
                if v and (best is None or abs(v) < best[0]):
                    best = (abs(v), i, j)
                    if best[0] == 1:
                        break
            if best and best[0] == 1:
                break
        if best is None:
            break
        _, i, j = best
        row_swap(t, i)
        col_swap(t, j)
        while True:
            done = True
            for i in range(t + 1, m):
                if s[i][t]:
                    q = s[i][t] // s[t][t]
                    row_op(i, t, -q)
                    if s[i][t]:
                        row_swap(t, i)
                        done = False
            for j in range(t + 1, n):
                if s[t][j]:
                    q = s[t][j] // s[t][t]
                    col_op(j, t, -q)
                    if s[t][j]:
                        col_swap(t, j)
                        done = False
            if done:
                # divisibility of the rest of the block
                bad = None
                for i in range(t + 1, m):
                    for j in range(t + 1, n):
                        if s[i][j] % s[t][t]:
                            bad = i
                            break
                    if bad is not None:
                        break
                if bad is None:
                    break
                row_op(t, bad, 1)
        if s[t][t] < 0:
            row_neg(t)
        t += 1
    return s, L, Li, R, Ri


def _matvec(m, v):
    return [sum(a * b for a, b in zip(row, v)) for row in m]


def _rank_of(s) -> int:
    r = 0
    while r < min(len(s), len(s[0]) if s else 0) and s[r][r]:
        r += 1
    return r


# ---------------------------------------------------------------------------
# chain complexes and reduction


@dataclass
class ChainComplex:
    """Sparse integer boundaries: ``bd[cell] = {facet: coefficient}``."""

    dims: dict  # cell -> dimension
    bd: dict  # cell -> dict

    @classmethod
    def of(cls, x: DeltaComplex) -> ChainComplex:
        bd = {}
        for k in x.keys():
            col: dict = {}
            for i, f in enumerate(x.faces.get(k, ())):
                if f is not None:
                    col[f] = col.get(f, 0) + (-1) ** i
            bd[k] = {f: c for f, c in col.items() if c}
        return cls({k: x.dim_of(k) for k in x.keys()}, bd)

    def check(self) -> bool:
        """``d o d = 0``."""
        for k, col in self.bd.items():
            acc: dict = {}
            for f, c in col.items():
                for g, e in self.bd.get(f, {}).items():
                    acc[g] = acc.get(g, 0) + c * e
            if any(acc.values()):
                return False
        return True


def _reduce(cc: ChainComplex, level: dict, order: list):
    """Eliminate unit pivots inside each level; returns surviving cells and boundaries."""
    bd = {k: dict(v) for k, v in cc.bd.items()}
    cob: dict = {k: set() for k in bd}
    for k, col in bd.items():
        for f in col:
            cob[f].add(k)
    alive = set(bd)
    changed = True
    while changed:
        changed = False
        for tau in order:
            if tau not in alive:
                continue
            col = bd[tau]
            best = None
            for sig, c in col.items():
                if abs(c) == 1 and level[sig] == level[tau]:
                    w = len(cob[sig])
                    if best is None or w < best[0]:
                        best = (w, sig, c)
            if best is None:
                continue
            _, sig, u = best
            btau = dict(col)
            for tp in list(cob[sig]):
                if tp == tau:
                    continue
                c = bd[tp][sig]
                fac = c * u
                colp = bd[tp]
                for rho, v in btau.items():
                    nv = colp.get(rho, 0) - fac * v
                    if nv:
                        if rho not in colp:
                            cob[rho].add(tp)
                        colp[rho] = nv
                    elif rho in colp:
                        del colp[rho]
                        cob[rho].discard(tp)
            for rho in bd[sig]:
                cob[rho].discard(sig)
            for rho in bd[tau]:
                cob[rho].discard(tau)
            for om in cob[tau]:
                del bd[om][tau]
            for c in (sig, tau):
                del bd[c]
                del cob[c]
                alive.discard(c)
            changed = True
    return alive, bd


@dataclass
class HomologyResult:
    betti: list[int]
    torsion: list[list[int]]

    @property
    def components(self) -> int:
        return self.betti[0] if self.betti else 0

    def reduced_betti(self) -> list[int]:
        b = list(self.betti) or [0]
        b[0] = max(b[0] - 1, 0)
        return b

    @property
    def is_acyclic(self) -> bool:
        """Reduced homology vanishes (the empty complex is not acyclic)."""
        return self.components == 1 and not any(self.betti[1:]) and not any(self.torsion)

    @property
    def is_zero(self) -> bool:
        return not any(self.betti) and not any(self.torsion)

    def euler(self) -> int:
        return sum((-1) ** d * b for d, b in enumerate(self.betti))

    def as_dict(self) -> dict:
        return {"betti": list(self.betti), "torsion": [list(t) for t in self.torsion]}

    def same_groups(self, other: HomologyResult) -> bool:
        n = max(len(self.betti), len(other.betti))
        pad = lambda v, z: list(v) + [z] * (n - len(v))
        return pad(self.betti, 0) == pad(other.betti, 0) and pad(self.torsion, []) == pad(other.torsion, [])


class _Degree:
    """Homology in one degree of a small dense complex, with coordinates."""

    def __init__(self, d_n, d_n1, n_cells):
        # d_n: C_n -> C_{n-1} as rows x cols; d_n1: C_{n+1} -> C_n
        self.n = n_cells
        if n_cells == 0:
            self.rank_n, self.Ri, self.R, self.kdim = 0, [], [], 0
            self.factors, self.Lw, self.Lwi = [], [], []
            return
        if d_n and d_n[0]:
            s, _, _, R, Ri = smith(d_n)
            r = _rank_of(s)
        else:
            R, Ri, r = _ident(n_cells), _ident(n_cells), 0
        self.rank_n = r
        self.Ri = Ri
        self.R = R
        kdim = n_cells - r
        cols = len(d_n1[0]) if d_n1 else 0
        w = [[0] * cols for _ in range(kdim)]
        for j in range(cols):
            z = [d_n1[i][j] for i in range(n_cells)]
            c = _matvec(Ri, z)
            if any(c[:r]):
                raise AssertionError("boundary is not a cycle")
            for i in range(kdim):
                w[i][j] = c[r + i]
        if kdim and cols:
            sw, Lw, Lwi, _, _ = smith(w)
            rw = _rank_of(sw)
            self.factors = [sw[i][i] for i in range(rw)]
        else:
            Lw, Lwi = _ident(kdim), _ident(kdim)
            self.factors = []
        self.Lw, self.Lwi = Lw, Lwi
        self.kdim = kdim

    @property
    def betti(self) -> int:
        return (self.n - self.rank_n) - len(self.factors) if self.n else 0

    @property
    def torsion(self) -> list[int]:
        return [f for f in self.factors if f > 1]

    def coords(self, z: list[int]) -> list[int]:
        """Coordinates of a cycle in the basis torsion generators then free generators."""
        c = _matvec(self.Ri, z)[self.rank_n:]
        c = _matvec(self.Lw, c)
        out = []
        for i, f in enumerate(self.factors):
            if f > 1:
                out.append(c[i] % f)
        out.extend(c[len(self.factors):])
        return out

    def generators(self) -> list[list[int]]:
        """Cycles representing the same basis as ``coords``."""
        r = self.rank_n
        K = [[self.R[i][r + j] for j in range(self.kdim)] for i in range(self.n)] if self.n else []
        gens = []
        idx = [i for i, f in enumerate(self.factors) if f > 1] + list(range(len(self.factors), self.kdim))
        for j in idx:
            v = [self.Lwi[i][j] for i in range(self.kdim)]
            gens.append(_matvec(K, v))
        return gens

    @property
    def relations(self) -> list[int]:
        """Order of each coordinate (0 for free)."""
        return self.torsion + [0] * self.betti


def _dense(cells_by_dim, bd, n):
    rows = cells_by_dim.get(n - 1, [])
    cols = cells_by_dim.get(n, [])
    ri = {c: i for i, c in enumerate(rows)}
    m = [[0] * len(cols) for _ in rows]
    for j, c in enumerate(cols):
        for f, v in bd.get(c, {}).items():
            if f in ri:
                m[ri[f]][j] = v
    return m


def _degrees(cells_by_dim, bd, top):
    out = []
    for n in range(top + 1):
        cn = cells_by_dim.get(n, [])
        d_n = _dense(cells_by_dim, bd, n) if n > 0 else []
        d_n1 = _dense(cells_by_dim, bd, n + 1)
        out.append(_Degree(d_n if cells_by_dim.get(n - 1) else [], d_n1 if cells_by_dim.get(n + 1) else [], len(cn)))
    return out


def _result(degs) -> HomologyResult:
    return HomologyResult([d.betti for d in degs], [d.torsion for d in degs])


def _prepare(x: DeltaComplex, sub=None):
    cc = ChainComplex.of(x)
    sub = set(sub) if sub is not None else set()
    level = {k: (0 if k in sub else 1) for k in cc.bd}
    order = x.keys()
    alive, bd = _reduce(cc, level, order)
    return cc, level, alive, bd


def _group_by_dim(cells, dims, order_index):
    out: dict = {}
    for c in sorted(cells, key=lambda k: order_index[k]):
        out.setdefault(dims[c], []).append(c)
    return out


def homology(x: DeltaComplex, sub=None) -> HomologyResult:
    """Integral homology; relative to the subcomplex ``sub`` when given."""
    if sub is not None:
        x.subcomplex(sub)  # validates closedness
    cc, level, alive, bd = _prepare(x, sub)
    oi = {k: i for i, k in enumerate(x.keys())}
    top = max(x.dim, 0)
    if sub is None:
        cells = _group_by_dim(alive, cc.dims, oi)
        return _result(_degrees(cells, bd, top))
    keep = {c for c in alive if level[c] == 1}
    rel = {c: {f: v for f, v in bd[c].items() if level[f] == 1} for c in keep}
    return _result(_degrees(_group_by_dim(keep, cc.dims, oi), rel, top))


@dataclass
class InducedMap:
    source: HomologyResult
    target: HomologyResult
    relative: HomologyResult
    matrices: list  # per degree: rows = target coordinates, cols = source generators
    iso: list[bool]

    @property
    def iso_all(self) -> bool:
        return all(self.iso)


def _exact_solvable_kernel_in(m_rows, rel_x, rel_a):
    """Injectivity and surjectivity of ``Z^a/R_a -> Z^x/R_x`` given by ``m``."""
    nx = len(rel_x)
    na = len(rel_a)
    # surjective: [M | R_X] has nx unit invariant factors
    big = [list(m_rows[i]) + [rel_x[i] if j == i else 0 for j in range(nx)] for i in range(nx)]
    if nx:
        s, *_ = smith(big) if big and big[0] else ([[0]],)
        units = sum(1 for i in range(min(len(s), len(s[0]))) if abs(s[i][i]) == 1)
        surj = units == nx
    else:
        surj = True
    # injective: kernel of [M | -R_X] projected to the source lies in R_A
    cols = na + nx
    if cols == 0:
        return surj, True
    if nx == 0:
        ker = _ident(na)
    else:
        mat = [list(m_rows[i]) + [-rel_x[i] if j == i else 0 for j in range(nx)] for i in range(nx)]
        s, _, _, R, _ = smith(mat)
        r = _rank_of(s)
        ker = [[R[i][j] for i in range(cols)] for j in range(r, cols)]
    inj = True
    for v in ker:
        for i in range(na):
            a = v[i]
            if rel_a[i] == 0:
                if a != 0:
                    inj = False
            elif a % rel_a[i]:
                inj = False
    return surj, inj


def induced_homology_map(x: DeltaComplex, sub) -> InducedMap:
    """Map induced on homology by the inclusion of the subcomplex ``sub`` into ``x``."""
    sub = set(sub)
    a = x.subcomplex(sub)
    cc, level, alive, bd = _prepare(x, sub)
    oi = {k: i for i, k in enumerate(x.keys())}
    top = max(x.dim, 0)
    cells_x = _group_by_dim(alive, cc.dims, oi)
    cells_a = _group_by_dim({c for c in alive if level[c] == 0}, cc.dims, oi)
    bd_a = {c: bd[c] for c in alive if level[c] == 0}
    degs_x = _degrees(cells_x, bd, top)
    degs_a = _degrees(cells_a, bd_a, top)
    keep = {c for c in alive if level[c] == 1}
    rel = {c: {f: v for f, v in bd[c].items() if level[f] == 1} for c in keep}
    relative = _result(_degrees(_group_by_dim(keep, cc.dims, oi), rel, top))
    mats, iso = [], []
    for n in range(top + 1):
        dx, da = degs_x[n], degs_a[n]
        pos_x = {c: i for i, c in enumerate(cells_x.get(n, []))}
        cols = []
        for g in da.generators():
            z = [0] * len(pos_x)
            for c, v in zip(cells_a.get(n, []), g):
                z[pos_x[c]] = v
            cols.append(dx.coords(z))
        nx = len(dx.relations)
        m_rows = [[cols[j][i] for j in range(len(cols))] for i in range(nx)]
        mats.append(m_rows)
        surj, inj = _exact_solvable_kernel_in(m_rows, dx.relations, da.relations)
        iso.append(surj and inj)
    del a
    return InducedMap(_result(degs_a), _result(degs_x), relative, mats, iso)


# ---------------------------------------------------------------------------
# nerves and categories of elements


def chains(cat) -> list[tuple]:
    """All non-empty chains ``x_0 < ... < x_d`` with an arrow between every pair."""
    objs = list(cat.objects)
    idx = {o: i for i, o in enumerate(objs)}
    ups = {o: sorted((b for b in cat.poset.up_set(o) if b != o and cat.leq(o, b)), key=idx.get) for o in objs}
    out = []

    def ext(ch):
        out.append(tuple(ch))
        last = ch[-1]
        for b in ups[last]:
            if all(cat.leq(c, b) for c in ch[:-1]):
                ch.append(b)
                ext(ch)
                ch.pop()

    for o in objs:
        ext([o])
    return out


def nerve(cat) -> DeltaComplex:
    idx = {o: i for i, o in enumerate(cat.objects)}
    return simplicial_complex(chains(cat), order=idx.get)


def category_of_elements(base, diagram):
    """Objects ``(T, i)`` for the ``i``-th element of ``diagram.values[T]``."""
    from .psi import RelCategory

    objs = tuple((t, i) for t in base.objects for i in range(len(diagram.values[t])))
    covers = set()
    for a, b in base.covering_pairs() + sorted(base.forbidden):
        f = diagram.index_map(a, b)
        for i in range(len(diagram.values[a])):
            covers.add(((a, i), (b, f[i])))
    forb = frozenset(
        ((a, i), (b, j))
        for a, b in base.forbidden
        for i in range(len(diagram.values[a]))
        for j in range(len(diagram.values[b]))
    )
    return RelCategory(objs, frozenset(covers), forb, "elements")


def hocolim_nerve(base, diagram) -> DeltaComplex:
    return nerve(category_of_elements(base, diagram))


# ---------------------------------------------------------------------------
# order polytopes


@dataclass(frozen=True)
class PolytopeSimplex:
    extension: tuple
    vertices: tuple  # tuple of dicts element -> Fraction, as tuples of pairs
    volume: Fraction


def staircase(extension: tuple) -> list[dict]:
    """Vertices ``x_0 .. x_d`` of the simplex ``t_{v_1} <= ... <= t_{v_d}``."""
    d = len(extension)
    return [{v: Fraction(int(i + 1 > d - q)) for i, v in enumerate(extension)} for q in range(d + 1)]


def det(m: list[list[Fraction]]) -> Fraction:
    a = [list(map(Fraction, r)) for r in m]
    n = len(a)
    out = Fraction(1)
    for c in range(n):
        p = next((r for r in range(c, n) if a[r][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            a[c], a[p] = a[p], a[c]
            out = -out
        out *= a[c][c]
        for r in range(c + 1, n):
            f = a[r][c] / a[c][c]
            if f:
                for j in range(c, n):
                    a[r][j] -= f * a[c][j]
    return out


def simplex_volume(points: list[list[Fraction]]) -> Fraction:
    """Unsigned volume of a full-dimensional simplex given by its vertex list."""
    d = len(points) - 1
    if d == 0:
        return Fraction(1)
    m = [[points[i + 1][j] - points[0][j] for j in range(d)] for i in range(d)]
    return abs(det(m)) / factorial(d)


def order_polytope_simplices(p: Poset) -> tuple[list[PolytopeSimplex], Fraction]:
    """Canonical triangulation of the order polytope: one simplex per linear extension."""
    elems = list(p.elements)
    out = []
    total = Fraction(0)
    for ext in p.linear_extensions():
        verts = staircase(ext)
        pts = [[v[e] for e in elems] for v in verts]
        vol = simplex_volume(pts)
        total += vol
        out.append(PolytopeSimplex(tuple(ext), tuple(tuple(sorted(v.items(), key=lambda kv: elems.index(kv[0]))) for v in verts), vol))
    return out, total


# ---------------------------------------------------------------------------
# cellular cosheaves


@dataclass
class CellularCosheaf:
    """Values on a cell poset with maps from a cell to each of its faces.

    ``faces`` maps a cell to the set of cells in its boundary (all of them,
    not only codimension one); ``maps[(c, f)]`` sends the index of an
    element of ``values[c]`` to an index in ``values[f]``.
    """

    dims: dict
    faces: dict
    values: dict
    maps: dict

    def map(self, c, f):
        if c == f:
            return list(range(len(self.values[c])))
        return self.maps[(c, f)]

    def check(self) -> None:
        for c, fs in self.faces.items():
            for f in fs:
                if self.dims[f] >= self.dims[c]:
                    raise ValueError(f"face {f!r} of {c!r} does not have smaller dimension")
                if (c, f) not in self.maps:
                    raise ValueError(f"missing attachment {c!r} -> {f!r}")
                a = self.maps[(c, f)]
                if len(a) != len(self.values[c]) or any(not 0 <= j < len(self.values[f]) for j in a):
                    raise ValueError(f"attachment {c!r} -> {f!r} is not a map of the value sets")
                for g in self.faces.get(f, ()):
                    if g not in fs:
                        raise ValueError("face relation is not transitive")
                    a = self.maps[(c, f)]
                    b = self.maps[(f, g)]
                    direct = self.maps[(c, g)]
                    if any(b[a[i]] != direct[i] for i in range(len(a))):
                        raise ValueError(f"attachments are not functorial on {c!r} > {f!r} > {g!r}")


def realize_cosheaf(f: CellularCosheaf, check: bool = True) -> DeltaComplex:
    """Order complex of the poset of pairs (cell, element).

    For a regular cell structure this is a subdivision of the realization.
    """
    if check:
        f.check()
    pts = [(c, i) for c in f.dims for i in range(len(f.values[c]))]
    below = {}
    for c, i in pts:
        below[(c, i)] = [(g, f.maps[(c, g)][i]) for g in f.faces.get(c, ())]
    dim_of = {p: f.dims[p[0]] for p in pts}
    out = []

    def ext(ch):
        out.append(tuple(ch))
        for q in below[ch[-1]]:
            if all(q in set(below[c]) for c in ch[:-1]):
                ch.append(q)
                ext(ch)
                ch.pop()

    for p in pts:
        ext([p])
    order = {p: (dim_of[p], repr(p)) for p in pts}
    return simplicial_complex(out, order=order.get)


def pullback_cosheaf(f: CellularCosheaf, new_dims: dict, new_faces: dict, refinement: dict) -> CellularCosheaf:
    """Pull ``f`` back along a refinement that sends each new cell into an old one."""
    for c, old in refinement.items():
        if old not in f.dims:
            raise ValueError(f"{c!r} is sent to an unknown cell")
        if f.dims[old] < new_dims[c]:
            raise ValueError(f"{c!r} has larger dimension than its ambient cell {old!r}")
    values = {c: f.values[refinement[c]] for c in new_dims}
    maps = {}
    for c, fs in new_faces.items():
        for g in fs:
            a, b = refinement[c], refinement[g]
            if a != b and b not in f.faces.get(a, ()):
                raise ValueError(f"refinement does not respect faces at {c!r} > {g!r}")
            maps[(c, g)] = f.map(a, b)
    return CellularCosheaf(dict(new_dims), {c: set(v) for c, v in new_faces.items()}, values, maps)


def constant_cosheaf(dims: dict, faces: dict, n: int = 1) -> CellularCosheaf:
    maps = {(c, g): list(range(n)) for c, fs in faces.items() for g in fs}
    return CellularCosheaf(dict(dims), {c: set(v) for c, v in faces.items()}, {c: list(range(n)) for c in dims}, maps)


def cell_structure(x: DeltaComplex, cell_of: Callable) -> tuple[dict, dict, dict]:
    """Group the simplices of ``x`` into open cells named by ``cell_of``.

    Returns ``(dims, faces, members)``: a cell's dimension is the largest
    dimension of its simplices; ``g`` is a face of ``c`` when a simplex of
    ``g`` is a face of a simplex of ``c``.
    """
    members: dict = {}
    for k in x.keys():
        members.setdefault(cell_of(k), []).append(k)
    dims = {c: max(x.dim_of(k) for k in ks) for c, ks in members.items()}
    name = {k: cell_of(k) for k in x.keys()}
    faces: dict = {c: set() for c in members}
    for k in x.keys():
        c = name[k]
        for g in x.closure([k]):
            if name[g] != c:
                faces[c].add(name[g])
    return dims, faces, members
