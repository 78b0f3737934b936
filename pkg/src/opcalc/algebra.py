"""Finite discrete operads, bimodules, infinitesimal bimodules and Lambda-sequences.

Every structure stores its operations as explicit tables keyed by element
ids.  Elements are addressed as ``El(n, id)`` where ``n`` is the arity and
``id`` a string unique within that arity.  Permutations are 1-based tuples
of images ``(s(1), ..., s(n))`` and act on the right through

    (f . s)(x_1, ..., x_n) = f(x_{s^-1(1)}, ..., x_{s^-1(n)}),

so that ``(f . s) . t = f . (s t)`` with ``(s t)(i) = s(t(i))``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, permutations, product
from typing import Callable, NamedTuple


class El(NamedTuple):
    n: int
    id: str


class StructureError(ValueError):
    """Incomplete or inconsistent structure tables."""

    def __init__(self, code: str, message: str, witness=None):
        super().__init__(message)
        self.code = code
        self.witness = witness


# ---------------------------------------------------------------------------
# permutations


def perm_identity(n: int) -> tuple[int, ...]:
    return tuple(range(1, n + 1))


def perm_inverse(s: tuple[int, ...]) -> tuple[int, ...]:
    out = [0] * len(s)
    for i, v in enumerate(s, 1):
        out[v - 1] = i
    return tuple(out)


def perm_compose(s: tuple[int, ...], t: tuple[int, ...]) -> tuple[int, ...]:
    """``(s t)(i) = s(t(i))``."""
    return tuple(s[t[i] - 1] for i in range(len(t)))


def perms(n: int) -> list[tuple[int, ...]]:
    return [tuple(p) for p in permutations(range(1, n + 1))]


def perm_from_order(order: list[int]) -> tuple[int, ...]:
    """Permutation ``p`` with ``p^-1(q) = order[q-1]`` (1-based entries)."""
    return perm_inverse(tuple(order))


def block_perm(sigma: tuple[int, ...], i: int, m: int) -> tuple[int, ...]:
    """``p`` with ``(f . sigma) o_i g = (f o_{sigma(i)} g) . p`` for ``|g| = m``."""
    n = len(sigma)
    sinv = perm_inverse(sigma)
    starts = {}
    pos = 1
    for a in range(1, n + 1):
        starts[a] = pos
        pos += m if a == i else 1
    order = []
    for b in range(1, n + 1):
        a = sinv[b - 1]
        if a == i:
            order.extend(range(starts[a], starts[a] + m))
        else:
            order.append(starts[a])
    return perm_from_order(order)


def inner_perm(n: int, i: int, tau: tuple[int, ...]) -> tuple[int, ...]:
    """``p`` with ``f o_i (g . tau) = (f o_i g) . p`` for ``|f| = n``."""
    m = len(tau)
    tinv = perm_inverse(tau)
    order = list(range(1, i))
    order.extend(i - 1 + tinv[c] for c in range(m))
    order.extend(range(i + m, n + m))
    return perm_from_order(order)


def sum_perm(blocks: list[int], sigma: tuple[int, ...]) -> tuple[int, ...]:
    """Block permutation for ``gamma(x . sigma; y) = gamma(x; y_{sigma^-1}) . p``."""
    n = len(sigma)
    sinv = perm_inverse(sigma)
    starts, pos = [], 1
    for a in range(n):
        starts.append(pos)
        pos += blocks[a]
    order = []
    for b in range(n):
        a = sinv[b] - 1
        order.extend(range(starts[a], starts[a] + blocks[a]))
    return perm_from_order(order)


def direct_sum(taus: list[tuple[int, ...]]) -> tuple[int, ...]:
    out, off = [], 0
    for t in taus:
        out.extend(off + v for v in t)
        off += len(t)
    return tuple(out)


# ---------------------------------------------------------------------------
# structures


@dataclass
class FinOperad:
    """A finite operad given by its partial compositions and symmetric actions."""

    name: str
    max_arity: int
    spaces: dict[int, tuple[str, ...]]
    unit: str
    comp: dict = field(default_factory=dict)  # (n, x, i, m, y) -> id
    sigma: dict = field(default_factory=dict)  # (n, x, perm) -> id

    def elements(self, n: int) -> tuple[str, ...]:
        return self.spaces.get(n, ())

    def els(self, n: int) -> list[El]:
        return [El(n, x) for x in self.elements(n)]

    def size(self, n: int) -> int:
        return len(self.elements(n))

    @property
    def unit_el(self) -> El:
        return El(1, self.unit)

    @property
    def reduced(self) -> bool:
        return self.size(0) == 1

    @property
    def doubly_reduced(self) -> bool:
        return self.reduced and self.size(1) == 1

    def compose(self, x: El, i: int, y: El) -> El:
        key = (x.n, x.id, i, y.n, y.id)
        try:
            return El(x.n + y.n - 1, self.comp[key])
        except KeyError:
            raise StructureError("E_INCOMPLETE", f"{self.name}: missing composition {key}", key) from None

    def act(self, x: El, s: tuple[int, ...]) -> El:
        if s == perm_identity(x.n):
            return x
        key = (x.n, x.id, tuple(s))
        try:
            return El(x.n, self.sigma[key])
        except KeyError:
            raise StructureError("E_INCOMPLETE", f"{self.name}: missing symmetric action {key}", key) from None

    def gamma(self, x: El, ys: list[El]) -> El:
        """Full composition ``x(y_1, ..., y_n)`` built from partial ones."""
        if len(ys) != x.n:
            raise ValueError("gamma needs one input per slot")
        # arity-zero inputs first so that no intermediate exceeds the final arity
        out = x
        rest = []
        for i in range(x.n, 0, -1):
            if ys[i - 1].n == 0:
                out = self.compose(out, i, ys[i - 1])
            else:
                rest.append(ys[i - 1])
        rest.reverse()
        for i in range(len(rest), 0, -1):
            out = self.compose(out, i, rest[i - 1])
        return out

    def arity_zero(self) -> El:
        if not self.reduced:
            raise ValueError(f"{self.name} is not reduced")
        return El(0, self.elements(0)[0])


@dataclass
class FinBimodule:
    """A bimodule over ``operad`` with left action ``gamma_l`` and right action."""

    name: str
    operad: FinOperad
    max_arity: int
    spaces: dict[int, tuple[str, ...]]
    right_tab: dict = field(default_factory=dict)  # (n, m, i, a.n, a.id) -> id
    left_tab: dict = field(default_factory=dict)  # (x.n, x.id, ((n, id), ...)) -> id
    sigma: dict = field(default_factory=dict)
    right_fn: Callable | None = None
    left_fn: Callable | None = None

    def elements(self, n: int) -> tuple[str, ...]:
        return self.spaces.get(n, ())

    def els(self, n: int) -> list[El]:
        return [El(n, x) for x in self.elements(n)]

    def right(self, m: El, i: int, a: El) -> El:
        key = (m.n, m.id, i, a.n, a.id)
        if key in self.right_tab:
            return El(m.n + a.n - 1, self.right_tab[key])
        if self.right_fn is not None:
            return self.right_fn(m, i, a)
        raise StructureError("E_INCOMPLETE", f"{self.name}: missing right action {key}", key)

    def left(self, x: El, ms: list[El]) -> El:
        key = (x.n, x.id, tuple(ms))
        if key in self.left_tab:
            return El(sum(m.n for m in ms), self.left_tab[key])
        if self.left_fn is not None:
            return self.left_fn(x, list(ms))
        raise StructureError("E_INCOMPLETE", f"{self.name}: missing left action {key}", key)

    def act(self, m: El, s: tuple[int, ...]) -> El:
        if s == perm_identity(m.n):
            return m
        key = (m.n, m.id, tuple(s))
        try:
            return El(m.n, self.sigma[key])
        except KeyError:
            raise StructureError("E_INCOMPLETE", f"{self.name}: missing symmetric action {key}", key) from None


@dataclass
class FinIbimodule:
    """An infinitesimal bimodule over ``operad``."""

    name: str
    operad: FinOperad
    max_arity: int
    spaces: dict[int, tuple[str, ...]]
    right_tab: dict = field(default_factory=dict)  # (m.n, m.id, i, a.n, a.id) -> id
    left_tab: dict = field(default_factory=dict)  # (x.n, x.id, i, m.n, m.id) -> id
    sigma: dict = field(default_factory=dict)

    def elements(self, n: int) -> tuple[str, ...]:
        return self.spaces.get(n, ())

    def els(self, n: int) -> list[El]:
        return [El(n, x) for x in self.elements(n)]

    def size(self, n: int) -> int:
        return len(self.elements(n))

    def right(self, m: El, i: int, a: El) -> El:
        key = (m.n, m.id, i, a.n, a.id)
        try:
            return El(m.n + a.n - 1, self.right_tab[key])
        except KeyError:
            raise StructureError("E_INCOMPLETE", f"{self.name}: missing right action {key}", key) from None

    def inf_left(self, x: El, i: int, m: El) -> El:
        key = (x.n, x.id, i, m.n, m.id)
        try:
            return El(x.n + m.n - 1, self.left_tab[key])
        except KeyError:
            raise StructureError("E_INCOMPLETE", f"{self.name}: missing infinitesimal left action {key}", key) from None

    def act(self, m: El, s: tuple[int, ...]) -> El:
        if s == perm_identity(m.n):
            return m
        key = (m.n, m.id, tuple(s))
        try:
            return El(m.n, self.sigma[key])
        except KeyError:
            raise StructureError("E_INCOMPLETE", f"{self.name}: missing symmetric action {key}", key) from None


# ---------------------------------------------------------------------------
# builtins


def _word(w: str) -> tuple[int, ...]:
    return () if w == "-" else tuple(int(c) for c in w.split("."))


def _wid(w) -> str:
    return "-" if not w else ".".join(str(c) for c in w)


def _assoc_comp(u: tuple, i: int, v: tuple) -> tuple:
    m = len(v)
    out = []
    for c in u:
        if c < i:
            out.append(c)
        elif c == i:
            out.extend(i - 1 + d for d in v)
        else:
            out.append(c + m - 1)
    return tuple(out)


def _assoc_act(u: tuple, s: tuple) -> tuple:
    sinv = perm_inverse(s)
    return tuple(sinv[c - 1] for c in u)


def _fill(name, nmax, spaces, unit, comp_fn, act_fn) -> FinOperad:
    comp, sig = {}, {}
    for n in range(nmax + 1):
        for m in range(nmax + 1):
            if n == 0 or n + m - 1 > nmax:
                continue
            for x in spaces.get(n, ()):
                for y in spaces.get(m, ()):
                    for i in range(1, n + 1):
                        r = comp_fn(x, i, y)
                        if r is not None:
                            comp[(n, x, i, m, y)] = r
        for x in spaces.get(n, ()):
            for s in perms(n):
                sig[(n, x, s)] = act_fn(x, s)
    return FinOperad(name, nmax, spaces, unit, comp, sig)


def builtin(name: str, nmax: int = 4) -> FinOperad:
    """``comm``, ``assoc`` or ``lambda`` up to arity ``nmax``."""
    if nmax < 1:
        raise ValueError("nmax must be at least 1")
    if name == "comm":
        spaces = {n: ("c",) for n in range(nmax + 1)}
        return _fill("comm", nmax, spaces, "c", lambda x, i, y: "c", lambda x, s: "c")
    if name == "assoc":
        spaces = {n: tuple(sorted(_wid(p) for p in perms(n))) for n in range(nmax + 1)}
        return _fill(
            "assoc", nmax, spaces, "1",
            lambda x, i, y: _wid(_assoc_comp(_word(x), i, _word(y))),
            lambda x, s: _wid(_assoc_act(_word(x), s)),
        )
    if name == "lambda":
        spaces = {n: (("*0",) if n == 0 else ("*1",) if n == 1 else ()) for n in range(nmax + 1)}
        return _fill(
            "lambda", nmax, spaces, "*1",
            lambda x, i, y: "*0" if y == "*0" else "*1",
            lambda x, s: x,
        )
    raise ValueError(f"unknown builtin operad {name!r}")


def self_ibimodule(o: FinOperad) -> FinIbimodule:
    """``o`` as an infinitesimal bimodule over itself."""
    right, left = {}, {}
    for (n, x, i, m, y), r in o.comp.items():
        right[(n, x, i, m, y)] = r
        left[(n, x, i, m, y)] = r
    return FinIbimodule(o.name, o, o.max_arity, dict(o.spaces), right, left, dict(o.sigma))


def self_bimodule(o: FinOperad) -> FinBimodule:
    """``o`` as a bimodule over itself; the left action is full composition."""
    right = dict(o.comp)

    def left(x: El, ms: list[El]) -> El:
        return o.gamma(x, ms)

    return FinBimodule(o.name, o, o.max_arity, dict(o.spaces), right, {}, dict(o.sigma), None, left)


# transformation monoid of {0, 1}: maps written as the pair (f(0), f(1))
T2 = ("01", "10", "00", "11")


def t2_mul(a: str, b: str) -> str:
    """Product ``a * b`` meaning "first apply b, then a"."""
    return "".join(a[int(b[x])] for x in range(2))


def monoid_bimodule(o: FinOperad) -> FinBimodule:
    """Bimodule ``K(n) = T2`` over an operad with word-valued elements.

    The left action multiplies the inputs in the order in which the word of
    ``x`` reads them; the right and symmetric actions are trivial.  Only
    meaningful for ``assoc``, where words encode input orders.
    """
    if o.name != "assoc":
        raise ValueError("the monoid bimodule needs word-valued operations")
    spaces = {n: T2 for n in range(o.max_arity + 1)}
    sig = {(n, k, s): k for n in range(o.max_arity + 1) for k in T2 for s in perms(n)}

    def left(x: El, ms: list[El]) -> El:
        acc = "01"
        for c in _word(x.id):
            acc = t2_mul(acc, ms[c - 1].id)
        return El(sum(m.n for m in ms), acc)

    def right(m: El, i: int, a: El) -> El:
        return El(m.n + a.n - 1, m.id)

    return FinBimodule("T2", o, o.max_arity, spaces, {}, {}, sig, right, left)


def bimodule_map_check(o: FinOperad, k: FinBimodule, eta: Callable[[El], El], up_to: int) -> list[str]:
    """Failures of ``eta: o -> k`` as a bimodule map (empty list when it is one)."""
    bad = []
    src = self_bimodule(o)
    for n in range(up_to + 1):
        for x in o.els(n):
            for s in perms(n):
                if eta(o.act(x, s)) != k.act(eta(x), s):
                    bad.append(f"sigma {x} {s}")
            for m in range(up_to + 1 - n + 1):
                if n == 0 or n + m - 1 > up_to:
                    continue
                for y in o.els(m):
                    for i in range(1, n + 1):
                        if eta(o.compose(x, i, y)) != k.right(eta(x), i, y):
                            bad.append(f"right {x} {i} {y}")
    for n in range(up_to + 1):
        for x in o.els(n):
            for ar in _arity_tuples(n, up_to):
                for ys in product(*[o.els(a) for a in ar]):
                    if eta(src.left(x, list(ys))) != k.left(x, [eta(y) for y in ys]):
                        bad.append(f"left {x} {ys}")
    return bad


def _arity_tuples(n: int, total: int):
    """Tuples of ``n`` arities with sum at most ``total``."""
    if n == 0:
        yield ()
        return
    for a in range(total + 1):
        for rest in _arity_tuples(n - 1, total - a):
            yield (a,) + rest


def induced_ibimodule(m: FinBimodule, eta: Callable[[El], El], up_to: int | None = None) -> FinIbimodule:
    """Infinitesimal bimodule of a bimodule under ``eta: O -> M``.

    ``x o_i y = gamma_l(x; eta(1), ..., y, ..., eta(1))`` with ``y`` in slot ``i``.
    """
    o = m.operad
    up_to = m.max_arity if up_to is None else up_to
    bad = bimodule_map_check(o, m, eta, min(up_to, 3))
    if bad:
        raise StructureError("E_AXIOM", f"eta is not a bimodule map: {bad[0]}", bad[0])
    e1 = eta(o.unit_el)
    right, left = {}, {}
    for n in range(up_to + 1):
        for a in range(up_to + 1):
            if n == 0 or n + a - 1 > up_to:
                continue
            for x in m.els(n):
                for y in o.els(a):
                    for i in range(1, n + 1):
                        right[(n, x.id, i, a, y.id)] = m.right(x, i, y).id
            for x in o.els(n):
                for y in m.els(a):
                    for i in range(1, n + 1):
                        ins = [e1] * n
                        ins[i - 1] = y
                        left[(n, x.id, i, a, y.id)] = m.left(x, ins).id
    sig = {}
    for n in range(up_to + 1):
        for x in m.els(n):
            for s in perms(n):
                sig[(n, x.id, s)] = m.act(x, s).id
    return FinIbimodule(m.name + "_inf", o, up_to, {n: m.elements(n) for n in range(up_to + 1)}, right, left, sig)


# ---------------------------------------------------------------------------
# validation


@dataclass
class Report:
    """Pass/fail per axiom with one witness on failure."""

    checks: dict = field(default_factory=dict)  # axiom -> (ok, witness)

    @property
    def ok(self) -> bool:
        return all(v[0] for v in self.checks.values())

    def record(self, axiom: str, ok: bool, witness=None):
        prev = self.checks.get(axiom)
        if prev is None or (prev[0] and not ok):
            self.checks[axiom] = (ok, witness)

    def failures(self) -> dict:
        return {k: v[1] for k, v in self.checks.items() if not v[0]}


def _partial_axioms(rep: Report, tag: str, first, second_of: FinOperad, comp, act1, act2, up_to: int):
    """Associativity, unit and equivariance for a right-type partial action.

    ``first(n)`` lists the elements acted upon, ``comp(x, i, y)`` composes
    ``y`` (an operad element) into slot ``i`` of ``x``, ``act1`` and
    ``act2`` are the symmetric actions on the two sides.
    """
    o = second_of
    ar = range(up_to + 1)
    rep.record(f"{tag}:assoc", True)
    rep.record(f"{tag}:unit", True)
    rep.record(f"{tag}:equivariance", True)
    for a in ar:
        for x in first(a):
            for i in range(1, a + 1):
                ok = comp(x, i, o.unit_el) == x
                rep.record(f"{tag}:unit", ok, (x, i))
    for a in ar:
        for b in ar:
            for c in ar:
                if a == 0 or max(a + b - 1, a + c - 1, b + c - 1, a + b + c - 2) > up_to:
                    continue
                for x in first(a):
                    for y in o.els(b):
                        for j in range(1, a + 1):
                            xy = comp(x, j, y)
                            for z in o.els(c):
                                for i in range(1, a + b):
                                    lhs = comp(xy, i, z)
                                    if i < j:
                                        rhs = comp(comp(x, i, z), j + c - 1, y)
                                    elif i < j + b:
                                        rhs = comp(x, j, o.compose(y, i - j + 1, z))
                                    else:
                                        rhs = comp(comp(x, i - b + 1, z), j, y)
                                    rep.record(f"{tag}:assoc", lhs == rhs, (x, j, y, i, z))
    for a in ar:
        for b in ar:
            if a == 0 or a + b - 1 > up_to:
                continue
            for x in first(a):
                for y in o.els(b):
                    for i in range(1, a + 1):
                        for s in perms(a):
                            lhs = comp(act1(x, s), i, y)
                            rhs = act2(comp(x, s[i - 1], y), block_perm(s, i, b))
                            rep.record(f"{tag}:equivariance", lhs == rhs, (x, s, i, y))
                        for t in perms(b):
                            lhs = comp(x, i, o.act(y, t))
                            rhs = act2(comp(x, i, y), inner_perm(a, i, t))
                            rep.record(f"{tag}:equivariance", lhs == rhs, (x, i, y, t))


def _sigma_axioms(rep: Report, tag: str, first, act, up_to: int):
    rep.record(f"{tag}:sigma", True)
    for n in range(up_to + 1):
        ps = perms(n)
        for x in first(n):
            for s in ps:
                for t in ps:
                    ok = act(act(x, s), t) == act(x, perm_compose(s, t))
                    rep.record(f"{tag}:sigma", ok, (x, s, t))


def validate_structure(s, up_to: int | None = None) -> Report:
    """Exhaustive axiom check up to arity ``up_to``.

    Raises ``StructureError("E_INCOMPLETE")`` naming a missing table entry.
    """
    rep = Report()
    if isinstance(s, FinOperad):
        up = s.max_arity if up_to is None else min(up_to, s.max_arity)
        if s.unit not in s.elements(1):
            raise StructureError("E_INCOMPLETE", "unit is not an element of arity one", s.unit)
        _sigma_axioms(rep, "operad", s.els, s.act, up)
        _partial_axioms(rep, "operad", s.els, s, s.compose, s.act, s.act, up)
        for n in range(1, up + 1):
            for x in s.els(n):
                rep.record("operad:unit", s.compose(s.unit_el, 1, x) == x, ("left unit", x))
        return rep
    if isinstance(s, FinIbimodule):
        o = s.operad
        up = s.max_arity if up_to is None else min(up_to, s.max_arity)
        _sigma_axioms(rep, "ibimodule", s.els, s.act, up)
        _partial_axioms(rep, "ibimodule:right", s.els, o, s.right, s.act, s.act, up)
        _inf_left_axioms(rep, s, up)
        return rep
    if isinstance(s, FinBimodule):
        up = s.max_arity if up_to is None else min(up_to, s.max_arity)
        _sigma_axioms(rep, "bimodule", s.els, s.act, up)
        _partial_axioms(rep, "bimodule:right", s.els, s.operad, s.right, s.act, s.act, up)
        _left_axioms(rep, s, up)
        return rep
    raise TypeError(f"cannot validate {type(s).__name__}")


def _inf_left_axioms(rep: Report, s: FinIbimodule, up: int):
    o = s.operad
    ar = range(up + 1)
    for tag in ("assoc", "unit", "equivariance", "compat"):
        rep.record(f"ibimodule:left:{tag}", True)
    for n in range(up + 1):
        for m in s.els(n):
            rep.record("ibimodule:left:unit", s.inf_left(o.unit_el, 1, m) == m, m)
    # (x o_j y) o_i m for operad x, y and module m
    for a in ar:
        for b in ar:
            for c in ar:
                if a == 0 or max(a + b - 1, a + c - 1, b + c - 1, a + b + c - 2) > up:
                    continue
                for x in o.els(a):
                    for y in o.els(b):
                        for j in range(1, a + 1):
                            xy = o.compose(x, j, y)
                            for m in s.els(c):
                                for i in range(1, a + b):
                                    lhs = s.inf_left(xy, i, m)
                                    if i < j:
                                        rhs = s.right(s.inf_left(x, i, m), j + c - 1, y)
                                    elif i < j + b:
                                        rhs = s.inf_left(x, j, s.inf_left(y, i - j + 1, m))
                                    else:
                                        rhs = s.right(s.inf_left(x, i - b + 1, m), j, y)
                                    rep.record("ibimodule:left:assoc", lhs == rhs, (x, j, y, i, m))
    # (x o_i m) o^j y for module m
    for a in ar:
        for c in ar:
            for b in ar:
                if a == 0 or max(a + b - 1, a + c - 1, b + c - 1, a + b + c - 2) > up:
                    continue
                for x in o.els(a):
                    for m in s.els(c):
                        for i in range(1, a + 1):
                            xm = s.inf_left(x, i, m)
                            for y in o.els(b):
                                for j in range(1, a + c):
                                    lhs = s.right(xm, j, y)
                                    if j < i:
                                        rhs = s.inf_left(o.compose(x, j, y), i + b - 1, m)
                                    elif j < i + c:
                                        rhs = s.inf_left(x, i, s.right(m, j - i + 1, y))
                                    else:
                                        rhs = s.inf_left(o.compose(x, j - c + 1, y), i, m)
                                    rep.record("ibimodule:left:compat", lhs == rhs, (x, i, m, j, y))
    for a in ar:
        for c in ar:
            if a == 0 or a + c - 1 > up:
                continue
            for x in o.els(a):
                for m in s.els(c):
                    for i in range(1, a + 1):
                        for sg in perms(a):
                            lhs = s.inf_left(o.act(x, sg), i, m)
                            rhs = s.act(s.inf_left(x, sg[i - 1], m), block_perm(sg, i, c))
                            rep.record("ibimodule:left:equivariance", lhs == rhs, (x, sg, i, m))
                        for t in perms(c):
                            lhs = s.inf_left(x, i, s.act(m, t))
                            rhs = s.act(s.inf_left(x, i, m), inner_perm(a, i, t))
                            rep.record("ibimodule:left:equivariance", lhs == rhs, (x, i, m, t))


def _left_axioms(rep: Report, s: FinBimodule, up: int):
    o = s.operad
    for tag in ("assoc", "unit", "equivariance", "compat"):
        rep.record(f"bimodule:left:{tag}", True)
    for n in range(up + 1):
        for m in s.els(n):
            rep.record("bimodule:left:unit", s.left(o.unit_el, [m]) == m, m)

    def inputs(n, total):
        for ar in _arity_tuples(n, total):
            for ms in product(*[s.els(a) for a in ar]):
                yield list(ms)

    for a in range(up + 1):
        for x in o.els(a):
            for ms in inputs(a, up):
                tot = sum(m.n for m in ms)
                val = s.left(x, ms)
                for sg in perms(a):
                    sinv = perm_inverse(sg)
                    lhs = s.left(o.act(x, sg), ms)
                    moved = [ms[sinv[b] - 1] for b in range(a)]
                    rhs = s.act(s.left(x, moved), sum_perm([m.n for m in ms], sg))
                    rep.record("bimodule:left:equivariance", lhs == rhs, (x, sg, ms))
                for q in range(a):
                    for t in perms(ms[q].n):
                        ms2 = list(ms)
                        ms2[q] = s.act(ms[q], t)
                        taus = [t if r == q else perm_identity(ms[r].n) for r in range(a)]
                        rhs = s.act(val, direct_sum(taus))
                        rep.record("bimodule:left:equivariance", s.left(x, ms2) == rhs, (x, ms, q, t))
                for j in range(1, tot + 1):
                    for b in range(up + 2 - tot):
                        if tot + b - 1 > up:
                            continue
                        for y in o.els(b):
                            lhs = s.right(val, j, y)
                            q, off = 0, 0
                            while off + ms[q].n < j:
                                off += ms[q].n
                                q += 1
                            ms2 = list(ms)
                            ms2[q] = s.right(ms[q], j - off, y)
                            rhs = s.left(x, ms2)
                            rep.record("bimodule:left:compat", lhs == rhs, (x, ms, j, y))
    # gamma_l(x o_i y; m) = gamma_l(x; ..., gamma_l(y; ...), ...)
    for a in range(1, up + 1):
        for b in range(up + 1):
            if a + b - 1 > up:
                continue
            for x in o.els(a):
                for y in o.els(b):
                    for i in range(1, a + 1):
                        xy = o.compose(x, i, y)
                        for ms in inputs(a + b - 1, up):
                            lhs = s.left(xy, ms)
                            inner = s.left(y, ms[i - 1:i - 1 + b])
                            rhs = s.left(x, ms[:i - 1] + [inner] + ms[i - 1 + b:])
                            rep.record("bimodule:left:assoc", lhs == rhs, (x, i, y, ms))


# ---------------------------------------------------------------------------
# truncation


def truncate(s, k: int):
    """Restriction to arities at most ``k`` with the surviving operations."""
    if k < 0:
        raise ValueError("k must be non-negative")
    spaces = {n: v for n, v in s.spaces.items() if n <= k}

    def keep_partial(tab):
        return {key: r for key, r in tab.items() if key[0] <= k and key[3] <= k and key[0] + key[3] - 1 <= k}

    sig = {key: r for key, r in s.sigma.items() if key[0] <= k}
    if isinstance(s, FinOperad):
        return FinOperad(s.name, min(k, s.max_arity), spaces, s.unit, keep_partial(s.comp), sig)
    if isinstance(s, FinIbimodule):
        return FinIbimodule(s.name, truncate(s.operad, k), min(k, s.max_arity), spaces,
                            keep_partial(s.right_tab), keep_partial(s.left_tab), sig)
    if isinstance(s, FinBimodule):
        left = {key: r for key, r in s.left_tab.items() if sum(m.n for m in key[2]) <= k and key[0] <= k}
        return FinBimodule(s.name, truncate(s.operad, k), min(k, s.max_arity), spaces,
                           keep_partial(s.right_tab), left, sig, s.right_fn, s.left_fn)
    raise TypeError(f"cannot truncate {type(s).__name__}")


# ---------------------------------------------------------------------------
# Lambda-sequences and matching objects


@dataclass
class LambdaSeq:
    """Sequence with restrictions ``u^*: X(r) -> X(i)`` along injections ``u``.

    Injections are increasing tuples of images; the restriction of a
    non-increasing injection composes with the symmetric action.
    """

    name: str
    spaces: dict[int, tuple[str, ...]]
    restrict_fn: Callable[[El, tuple[int, ...]], El]
    act_fn: Callable[[El, tuple[int, ...]], El] | None = None

    def els(self, n: int) -> list[El]:
        return [El(n, x) for x in self.spaces.get(n, ())]

    def restrict(self, x: El, u: tuple[int, ...]) -> El:
        return self.restrict_fn(x, tuple(u))


def lambda_seq_of(o: FinOperad | FinIbimodule) -> LambdaSeq:
    """Right Lambda-structure of a reduced operad (or of a module over one).

    ``u^*`` plugs the arity-zero element into every input outside the image of ``u``.
    """
    base = o if isinstance(o, FinOperad) else o.operad
    star0 = base.arity_zero()
    right = o.compose if isinstance(o, FinOperad) else o.right

    def restrict(x: El, u: tuple[int, ...]) -> El:
        if list(u) != sorted(u):
            raise ValueError("restriction expects an increasing injection")
        keep = set(u)
        out = x
        for j in range(x.n, 0, -1):
            if j not in keep:
                out = right(out, j, star0)
        return out

    return LambdaSeq(o.name, {n: v for n, v in o.spaces.items()}, restrict, o.act)


def increasing_injections(i: int, r: int) -> list[tuple[int, ...]]:
    from itertools import combinations
    return [tuple(c) for c in combinations(range(1, r + 1), i)]


def matching_object(x: LambdaSeq, r: int) -> list[dict]:
    """Compatible families over the proper increasing injections into ``r``.

    Each family maps an injection ``u: i -> r`` (``i < r``) to an element of
    ``X(i)`` such that ``v^* x_u = x_{u v}``.  Families are determined by
    their values on the injections of size ``r - 1``; compatibility is
    checked on every composable pair.
    """
    us = [u for i in range(r) for u in increasing_injections(i, r)]
    top = [u for u in us if len(u) == r - 1] if r >= 1 else []
    if r == 0:
        return [{}]
    out = []

    def compose(u, v):
        return tuple(u[c - 1] for c in v)

    for choice in product(*[x.els(r - 1) for _ in top]):
        fam = dict(zip(top, choice))
        ok = True
        for u in us:
            if u in fam:
                continue
            # extend through the first top injection containing u
            w = next(t for t in top if set(u) <= set(t))
            v = tuple(w.index(c) + 1 for c in u)
            fam[u] = x.restrict(fam[w], v)
        for u in us:
            for i in range(len(u)):
                for v in increasing_injections(i, len(u)):
                    if x.restrict(fam[u], v) != fam[compose(u, v)]:
                        ok = False
                        break
                if not ok:
                    break
            if not ok:
                break
        if ok:
            out.append(fam)
    return out


# ---------------------------------------------------------------------------
# set-valued diagrams over pearled trees


@dataclass
class SetDiagram:
    """Finite sets over the objects of a thin category with maps along its arrows.

    ``arrow(a, b)`` returns the map as a list of indices into ``values[b]``.
    Maps are computed on demand by ``arrow_fn`` and cached.
    """

    base: object
    values: dict
    arrow_fn: Callable
    name: str = ""
    _cache: dict = field(default_factory=dict, repr=False)

    def index_map(self, a, b) -> list[int]:
        if a == b:
            return list(range(len(self.values[a])))
        key = (a, b)
        if key not in self._cache:
            self._cache[key] = self.arrow_fn(a, b)
        return self._cache[key]

    def sizes(self) -> dict:
        return {o: len(v) for o, v in self.values.items()}

    def check_functorial(self) -> list[tuple]:
        """Composable pairs of coverings whose composite disagrees with the direct arrow."""
        covers = self.base.covering_pairs()
        out_of: dict = {}
        for a, b in covers:
            out_of.setdefault(a, []).append(b)
        bad = []
        for a, b in covers:
            f = self.index_map(a, b)
            for c in out_of.get(b, ()):
                if not self.base.leq(a, c):
                    continue
                g = self.index_map(b, c)
                h = self.index_map(a, c)
                if any(g[f[i]] != h[i] for i in range(len(f))):
                    bad.append((a, b, c))
        return bad


def _labelled_tree(x, labels, pos=None):
    from .trees import Node

    pos = pos if pos is not None else [0]
    if isinstance(x, int):
        return x
    lab = labels[pos[0]]
    pos[0] += 1
    kids = tuple(_labelled_tree(c, labels, pos) for c in x.kids)
    return Node(x.kind, kids, lab, x.t)


def _rho_ops(n: FinIbimodule):
    from .trees import Node

    o = n.operad

    def merge(p, i, c):
        if p.is_pearl:
            lab = n.right(El(p.arity, p.label), i, El(c.arity, c.label))
            return Node(p.kind, (), lab.id, p.t)
        if c.is_pearl:
            lab = n.inf_left(El(p.arity, p.label), i, El(c.arity, c.label))
            return Node(c.kind, (), lab.id, c.t)
        lab = o.compose(El(p.arity, p.label), i, El(c.arity, c.label))
        return Node(p.kind, (), lab.id, p.t)

    def relabel(node, pi):
        space = n if node.is_pearl else o
        return space.act(El(node.arity, node.label), pi).id

    return merge, relabel


def rho_values(n: FinIbimodule, tree) -> list[tuple]:
    """Label tuples (preorder of the representative) for a pearled tree class."""
    rep = tree.representative
    spaces = [n.elements(v.arity) if v.is_pearl else n.operad.elements(v.arity) for v in rep.nodes]
    return [tuple(c) for c in product(*spaces)]


def rho_diagram(n: FinIbimodule, k: int, base=None, classes: dict | None = None) -> SetDiagram:
    """Labels of pearled trees: ``N(|p|)`` on the pearl and ``O(|v|)`` elsewhere.

    Arrows contract edges and compose the labels; the result is written on
    the canonical representative of the target.
    """
    from .psi import build_psi
    from .trees import canonical_labelled, contract_node, shape_code, vertices

    psi = build_psi(k)
    base = base if base is not None else psi.base
    classes = classes or psi.classes
    merge, relabel = _rho_ops(n)
    values = {t: rho_values(n, classes[t]) for t in base.objects}
    index = {t: {v: i for i, v in enumerate(vals)} for t, vals in values.items()}
    edge_sets: dict = {}

    def edges_to(a, b):
        if (a, b) not in edge_sets:
            ta = classes[a]
            from .trees import contract_edges
            found = None
            for r in range(1, ta.n_vertices):
                for es in combinations(range(1, ta.n_vertices), r):
                    if contract_edges(ta, es).code == b:
                        found = es
                        break
                if found:
                    break
            if found is None:
                raise ValueError(f"{b} is not a contraction of {a}")
            edge_sets[(a, b)] = found
        return edge_sets[(a, b)]

    def apply(a, b, val):
        ta = classes[a]
        rep = ta.representative
        root = _labelled_tree(rep.root, val)
        for e in sorted(edges_to(a, b), key=lambda v: rep.paths[v], reverse=True):
            path = rep.paths[e]
            c = _node_at(root, path)
            p = _node_at(root, path[:-1])
            root = contract_node(root, path, merge(p, path[-1] + 1, c))
        root = canonical_labelled(root, relabel)
        if shape_code(root) != b:
            raise AssertionError(f"contraction of {a} gave {shape_code(root)}, not {b}")
        return tuple(v.label for v in vertices(root))

    def arrow(a, b):
        if not base.leq(a, b):
            raise ValueError(f"no arrow {a} -> {b}")
        return [index[b][apply(a, b, v)] for v in values[a]]

    return SetDiagram(base, values, arrow, f"rho_{k}^{n.name}")


def _node_at(root, path):
    for i in path:
        root = root.kids[i]
    return root
