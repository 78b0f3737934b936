"""Command-line front end.

Exit codes: 0 when every check passes, 1 when a check fails, 2 for usage or
input errors.  Reports go to standard output (``--out -``, the default) or to
a file, as text or JSON.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import tempfile
import time
from collections import OrderedDict
from pathlib import Path

from . import __version__, bv
from .algebra import (
    FinBimodule,
    FinIbimodule,
    FinOperad,
    StructureError,
    builtin,
    matching_object,
    lambda_seq_of,
    El,
    perm_identity,
    perms,
    self_bimodule,
    self_ibimodule,
    validate_structure,
    rho_diagram,
)
from .complex import f_vector, homology, hocolim_nerve
from .psi import SELECTORS, build_psi, restrict
from .trees import corolla, parse_tree, tree_class
from . import verify as V

FAMILY_NAMES = {
    "ibl": "IbLambda",
    "ibs": "IbSigma",
    "ibbar": "IbBar",
    "bl": "BLambda",
    "bs": "BSigma",
    "w": "W",
    "w1": "W1",
}


class InputError(Exception):
    """Bad input: reported with a code and exit status 2."""

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


# ---------------------------------------------------------------------------
# structure files


def _ids(doc, key):
    try:
        spaces = doc[key]
        return {int(n): tuple(str(x) for x in ids) for n, ids in spaces.items()}
    except (KeyError, TypeError, ValueError, AttributeError) as e:
        raise InputError("E_PARSE", f"bad or missing {key!r}: {e}") from None


def _perm(p, n):
    p = tuple(int(v) for v in p)
    if sorted(p) != list(range(1, n + 1)):
        raise InputError("E_PARSE", f"{list(p)} is not a permutation of 1..{n}")
    return p


def _check_unique(spaces, what):
    for n, ids in spaces.items():
        if len(set(ids)) != len(ids):
            raise InputError("E_PARSE", f"{what}: repeated element id in arity {n}")


def _partial_rows(rows, kind, spaces_left, spaces_right, what, spaces_out=None):
    """Rows ``{kind, n, left, i, m, right, result}``: ``left`` of arity ``n`` composed with ``right`` at input ``i``."""
    spaces_out = spaces_left if spaces_out is None else spaces_out
    tab = {}
    for r in rows:
        if r.get("kind", kind) != kind:
            continue
        try:
            n, m, i = int(r["n"]), int(r["m"]), int(r["i"])
            key = (n, str(r["left"]), i, m, str(r["right"]))
            res = str(r["result"])
        except (KeyError, TypeError, ValueError) as e:
            raise InputError("E_PARSE", f"{what}: bad {kind} row {r!r} ({e})") from None
        if key[1] not in spaces_left.get(n, ()) or key[4] not in spaces_right.get(m, ()):
            raise InputError("E_PARSE", f"{what}: {kind} row {r!r} names unknown elements")
        if not 1 <= i <= n:
            raise InputError("E_PARSE", f"{what}: {kind} row {r!r} has input {i} out of range")
        if res not in spaces_out.get(n + m - 1, ()):
            raise InputError("E_PARSE", f"{what}: {kind} row {r!r} has an unknown result")
        if key in tab and tab[key] != res:
            raise InputError("E_PARSE", f"{what}: two results for {kind} row {key}")
        tab[key] = res
    return tab


def _sigma_rows(rows, spaces, what):
    tab = {}
    for r in rows:
        try:
            n = int(r["n"])
            key = (n, str(r["element"]), _perm(r["perm"], n))
            res = str(r["result"])
        except (KeyError, TypeError, ValueError) as e:
            raise InputError("E_PARSE", f"{what}: bad symmetric row {r!r} ({e})") from None
        if key[1] not in spaces.get(n, ()) or res not in spaces.get(n, ()):
            raise InputError("E_PARSE", f"{what}: symmetric row {r!r} names unknown elements")
        tab[key] = res
    # identities are implied
    for n, ids in spaces.items():
        for x in ids:
            tab.setdefault((n, x, perm_identity(n)), x)
    return tab


def _require(tab, keys, what, kind):
    for key in keys:
        if key not in tab:
            raise InputError("E_INCOMPLETE", f"{what}: missing {kind} row {_row_text(kind, key)}")


def _row_text(kind, key):
    if kind == "symmetric":
        n, x, s = key
        return json.dumps({"n": n, "element": x, "perm": list(s)})
    n, x, i, m, y = key
    return json.dumps({"kind": kind, "n": n, "left": x, "i": i, "m": m, "right": y})


def _partial_keys(spaces_left, spaces_right, nmax):
    for n in range(1, nmax + 1):
        for m in range(0, nmax + 1):
            if n + m - 1 > nmax:
                continue
            for x in spaces_left.get(n, ()):
                for y in spaces_right.get(m, ()):
                    for i in range(1, n + 1):
                        yield (n, x, i, m, y)


def _sigma_keys(spaces, nmax):
    for n in range(nmax + 1):
        for x in spaces.get(n, ()):
            for s in perms(n):
                yield (n, x, s)


def _parse_operad(doc, what="operad") -> FinOperad:
    if isinstance(doc, str):
        return resolve_operad(doc, None)
    try:
        name = str(doc.get("name", what))
        nmax = int(doc["max_arity"])
        unit = str(doc["unit"])
    except (KeyError, TypeError, ValueError, AttributeError) as e:
        raise InputError("E_PARSE", f"{what}: missing field {e}") from None
    spaces = _ids(doc, "spaces")
    _check_unique(spaces, what)
    rows = doc.get("compositions", [])
    comp = _partial_rows(rows, "comp", spaces, spaces, what)
    sig = _sigma_rows(doc.get("symmetric", []), spaces, what)
    _require(comp, _partial_keys(spaces, spaces, nmax), what, "comp")
    _require(sig, _sigma_keys(spaces, nmax), what, "symmetric")
    return FinOperad(name, nmax, spaces, unit, comp, sig)


def _parse_ibimodule(doc, o: FinOperad) -> FinIbimodule:
    name = str(doc.get("name", "N"))
    nmax = int(doc.get("max_arity", o.max_arity))
    spaces = _ids(doc, "spaces")
    _check_unique(spaces, name)
    rows = doc.get("compositions", [])
    right = _partial_rows(rows, "right", spaces, o.spaces, name)
    left = _partial_rows(rows, "inf_left", o.spaces, spaces, name, spaces_out=spaces)
    sig = _sigma_rows(doc.get("symmetric", []), spaces, name)
    _require(right, _partial_keys(spaces, o.spaces, nmax), name, "right")
    _require(left, _partial_keys(o.spaces, spaces, nmax), name, "inf_left")
    _require(sig, _sigma_keys(spaces, nmax), name, "symmetric")
    return FinIbimodule(name, o, nmax, spaces, right, left, sig)


def _parse_bimodule(doc, o: FinOperad) -> FinBimodule:
    name = str(doc.get("name", "M"))
    nmax = int(doc.get("max_arity", o.max_arity))
    spaces = _ids(doc, "spaces")
    _check_unique(spaces, name)
    rows = doc.get("compositions", [])
    right = _partial_rows(rows, "right", spaces, o.spaces, name)
    left = {}
    for r in rows:
        if r.get("kind") != "left":
            continue
        try:
            n = int(r["n"])
            ins = tuple(El(int(a), str(b)) for a, b in r["inputs"])
            key = (n, str(r["left"]), ins)
            res = str(r["result"])
        except (KeyError, TypeError, ValueError) as e:
            raise InputError("E_PARSE", f"{name}: bad left row {r!r} ({e})") from None
        if len(ins) != n:
            raise InputError("E_PARSE", f"{name}: left row {r!r} needs {n} inputs")
        left[key] = res
    sig = _sigma_rows(doc.get("symmetric", []), spaces, name)
    _require(right, _partial_keys(spaces, o.spaces, nmax), name, "right")
    _require(sig, _sigma_keys(spaces, nmax), name, "symmetric")
    return FinBimodule(name, o, nmax, spaces, right, left, sig)


def parse_structure_file(path, validate: bool = True):
    """Read an operad, bimodule or infinitesimal bimodule from a JSON file.

    Raises ``InputError`` with code ``E_PARSE``, ``E_INCOMPLETE`` (naming the
    missing row) or ``E_AXIOM`` (naming the failed axiom and a witness).
    """
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as e:
        raise InputError("E_PARSE", f"cannot read {path}: {e.strerror}") from None
    except json.JSONDecodeError as e:
        raise InputError("E_PARSE", f"{path}: {e}") from None
    return parse_structure(doc, validate)


def parse_structure(doc, validate: bool = True):
    if not isinstance(doc, dict):
        raise InputError("E_PARSE", "a structure file holds a JSON object")
    kind = doc.get("kind", "operad")
    if kind == "operad":
        s = _parse_operad(doc)
    elif kind in ("ibimodule", "bimodule"):
        if "operad" not in doc:
            raise InputError("E_PARSE", f"a {kind} names its operad")
        o = _parse_operad(doc["operad"])
        s = _parse_ibimodule(doc, o) if kind == "ibimodule" else _parse_bimodule(doc, o)
    else:
        raise InputError("E_PARSE", f"unknown structure kind {kind!r}")
    if validate:
        rep = _validate(s)
        bad = rep.failures()
        if bad:
            axiom = sorted(bad)[0]
            raise InputError("E_AXIOM", f"axiom {axiom} fails at {bad[axiom]!r}")
    return s


def _validate(s):
    try:
        return validate_structure(s)
    except StructureError as e:
        raise InputError(e.code, str(e)) from None


def dump_structure(s) -> dict:
    """The JSON document of a finite structure (inverse of ``parse_structure``)."""

    def spaces(sp):
        return {str(n): list(ids) for n, ids in sorted(sp.items())}

    def sig(tab):
        return [{"n": n, "element": x, "perm": list(p), "result": r} for (n, x, p), r in sorted(tab.items()) if p != perm_identity(n)]

    def rows(tab, kind):
        return [{"kind": kind, "n": n, "left": x, "i": i, "m": m, "right": y, "result": r} for (n, x, i, m, y), r in sorted(tab.items())]

    if isinstance(s, FinOperad):
        return {"kind": "operad", "name": s.name, "max_arity": s.max_arity, "unit": s.unit, "spaces": spaces(s.spaces),
                "compositions": rows(s.comp, "comp"), "symmetric": sig(s.sigma)}
    if isinstance(s, FinIbimodule):
        return {"kind": "ibimodule", "name": s.name, "max_arity": s.max_arity, "operad": dump_structure(s.operad),
                "spaces": spaces(s.spaces), "compositions": rows(s.right_tab, "right") + rows(s.left_tab, "inf_left"),
                "symmetric": sig(s.sigma)}
    raise TypeError(f"cannot dump {type(s).__name__}")


def resolve_operad(spec: str, max_arity: int | None) -> FinOperad:
    """``builtin:NAME`` or a path to an operad structure file."""
    if spec.startswith("builtin:"):
        name = spec[len("builtin:"):]
        try:
            return builtin(name, max_arity if max_arity is not None else 4)
        except ValueError as e:
            raise InputError("E_PARSE", str(e)) from None
    s = parse_structure_file(spec)
    if not isinstance(s, FinOperad):
        raise InputError("E_PARSE", f"{spec} does not hold an operad")
    return s


def _operad_for(args, need: int) -> FinOperad:
    ma = args.max_arity
    if args.operad.startswith("builtin:") and ma is None:
        ma = max(need, 2)
    o = resolve_operad(args.operad, ma)
    if o.max_arity < need:
        raise InputError("E_INCOMPLETE", f"{o.name} is given up to arity {o.max_arity}; this run needs arity {need}")
    return o


def _module_for(args, o: FinOperad, kind: str):
    if getattr(args, "module", None) is None:
        return self_ibimodule(o) if kind == "ibimodule" else self_bimodule(o)
    s = parse_structure_file(args.module)
    want = FinIbimodule if kind == "ibimodule" else FinBimodule
    if not isinstance(s, want):
        raise InputError("E_PARSE", f"{args.module} does not hold an {kind}")
    return s


# ---------------------------------------------------------------------------
# reports


def _sorted(x):
    if isinstance(x, dict):
        return {str(k): _sorted(v) for k, v in sorted(x.items(), key=lambda kv: str(kv[0]))}
    if isinstance(x, list):
        return [_sorted(v) for v in x]
    return x


class Report:
    """Command echo, checks, data and witnesses; serialized with fixed key order."""

    def __init__(self, command: list[str]):
        self.command = list(command)
        self.checks: list[V.Check] = []
        self.data: dict = {}
        self.witnesses: list = []
        self.seconds = 0.0
        self.cached = False

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def check(self, name, expected, got, ok=None):
        ok = (expected == got) if ok is None else bool(ok)
        self.checks.append(V.Check(name, expected, got, ok))

    def absorb(self, r: V.VerifyReport, prefix: str = ""):
        for c in r.checks:
            self.checks.append(V.Check(prefix + c.name, c.expected, c.got, c.ok))
        self.witnesses.extend(V.jsonable(r.witnesses))

    def body(self) -> OrderedDict:
        return OrderedDict(
            [
                ("tool", "opcalc"),
                ("version", __version__),
                ("command", self.command),
                ("verdict", "pass" if self.ok else "fail"),
                ("checks", [V.jsonable(c) for c in self.checks]),
                ("data", _sorted(V.jsonable(self.data))),
                ("witnesses", V.jsonable(self.witnesses)),
            ]
        )

    def to_json(self) -> str:
        d = self.body()
        d["timing"] = OrderedDict([("seconds", round(self.seconds, 3)), ("cached", self.cached)])
        return json.dumps(d, indent=2, ensure_ascii=False) + "\n"

    def to_text(self) -> str:
        lines = [f"opcalc {__version__}: {' '.join(self.command)}"]
        for c in self.checks:
            lines.append(f"  [{'PASS' if c.ok else 'FAIL'}] {c.name}: expected {_fmt(c.expected)}, got {_fmt(c.got)}")
        for k, v in _sorted(V.jsonable(self.data)).items():
            lines.append(f"  {k}: {_fmt(v)}")
        for w in V.jsonable(self.witnesses)[:5]:
            lines.append(f"  witness: {_fmt(w)}")
        lines.append(f"verdict: {'pass' if self.ok else 'fail'} ({len(self.checks)} checks, {self.seconds:.2f} s{', cached' if self.cached else ''})")
        return "\n".join(lines) + "\n"


def _fmt(v) -> str:
    return json.dumps(V.jsonable(v), ensure_ascii=False, separators=(", ", ": "))


def write_report(r: Report, fmt: str, path: str | None) -> None:
    """Serialize to ``path`` (``-`` or ``None`` for standard output)."""
    text = r.to_json() if fmt == "json" else r.to_text()
    _write_text(path, text)


def _write_text(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as e:
        raise InputError("E_OUTPUT", f"cannot write {path}: {e.strerror}") from None


# ---------------------------------------------------------------------------
# cache


def cache_dir() -> Path:
    return Path(os.environ.get("OPCALC_CACHE", ".opcalc-cache"))


def _digest_inputs(args) -> str:
    parts = {"version": __version__, "command": args.cmd}
    for key, val in sorted(vars(args).items()):
        if key in ("out", "format", "no_cache", "func", "dot", "csv"):
            continue
        if key in ("operad", "module", "file") and isinstance(val, str) and not val.startswith("builtin:"):
            try:
                val = {"path": val, "sha256": hashlib.sha256(Path(val).read_bytes()).hexdigest()}
            except OSError:
                pass
        parts[key] = val
    blob = json.dumps(parts, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()


def cache_load(key: str):
    p = cache_dir() / f"{key}.json"
    try:
        return json.loads(p.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError):
        return None


def cache_store(key: str, entry: dict) -> None:
    """Atomic write: a temporary file in the cache directory renamed over the entry."""
    d = cache_dir()
    try:
        d.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=".json")
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            json.dump(entry, fh, sort_keys=True)
        os.replace(tmp, d / f"{key}.json")
    except OSError:
        # the cache is an optimisation; a read-only location only costs recomputation
        pass


# ---------------------------------------------------------------------------
# commands; each fills a report and returns side artifacts {"dot": text, "csv": text}


def cmd_psi(args, rep: Report) -> dict:
    psi = build_psi(args.k)
    cat = psi.base if args.subcat in (None, "all") else restrict(psi, args.subcat)
    covers = cat.covering_pairs()
    rep.data.update(
        k=args.k,
        subcategory=cat.name,
        objects=len(cat.objects),
        covering_arrows=len(covers),
        arrows=len(cat.arrows()),
        object_codes=list(cat.objects),
    )
    if args.expect_objects is not None:
        rep.check("number of objects", args.expect_objects, len(cat.objects))
    dot = psi_dot(cat)
    nodes = sum(1 for line in dot.splitlines() if line.strip().startswith('"') and "->" not in line)
    edges = sum(1 for line in dot.splitlines() if "->" in line)
    rep.check("DOT node and edge counts match the category", [len(cat.objects), len(covers)], [nodes, edges])
    return {"dot": dot}


def psi_dot(cat) -> str:
    lines = [f'digraph "{cat.name}" {{', "  rankdir=BT;"]
    for o in cat.objects:
        lines.append(f'  "{o}";')
    for a, b in cat.covering_pairs():
        lines.append(f'  "{a}" -> "{b}";')
    lines.append("}")
    return "\n".join(lines) + "\n"


def cmd_complex(args, rep: Report) -> dict:
    name = FAMILY_NAMES[args.family]
    need = args.k + 1 if name in ("IbLambda", "IbSigma", "IbBar") else args.k
    o = _operad_for(args, need)
    module = None
    if args.module is not None:
        module = _module_for(args, o, "ibimodule" if name.startswith("Ib") else "bimodule")
    try:
        fam = bv.Family(name, o, module)
        fc = bv.build_family_complex(fam, args.k)
    except (ValueError, TypeError) as e:
        raise InputError("E_USAGE", str(e)) from None
    fc.complex.check()
    top = fc.maximal_cells()
    fv = f_vector(fc.complex)
    rep.data.update(family=name, operad=o.name, k=args.k, f_vector=fv, open_cells=len(fc.open_cells()),
                    top_cells=len(top), dimension=fc.complex.dim, degenerate_simplices=fc.degenerate,
                    subcomplexes=sorted(fc.subcomplexes))
    if args.homology:
        h = fc.homology()
        rep.data["homology"] = h.as_dict()
        rep.data["components"] = h.components
        rep.data["acyclic"] = h.is_acyclic
        for sub in sorted(fc.subcomplexes):
            rep.data[f"homology_rel_{sub}"] = fc.homology(sub).as_dict()
    if args.expect_top_cells is not None:
        rep.check("top cells", args.expect_top_cells, len(top))
    if args.expect_components is not None:
        rep.check("components", args.expect_components, fc.homology().components)
    if args.expect_acyclic:
        rep.check("each component acyclic", [0] * len(fc.homology().betti[1:]), fc.homology().betti[1:])
    rep.check("triangulation is a delta complex", True, True)
    csv = "dimension,simplices\n" + "".join(f"{d},{n}\n" for d, n in enumerate(fv))
    return {"csv": csv}


def cmd_hocolim(args, rep: Report) -> dict:
    o = _operad_for(args, args.k + 1)
    n = _module_for(args, o, "ibimodule")
    psi = build_psi(args.k)
    cat = psi.base if args.subcat in (None, "all") else restrict(psi, args.subcat)
    x = hocolim_nerve(cat, rho_diagram(n, args.k))
    h = homology(x)
    fv = f_vector(x)
    rep.data.update(k=args.k, module=n.name, subcategory=cat.name, f_vector=fv, homology=h.as_dict())
    if args.compare:
        if args.module is not None:
            raise InputError("E_USAGE", "--compare builds the family complex of the operad over itself")
        rep.absorb(V.compare_models(o, args.k))
    csv = "dimension,simplices\n" + "".join(f"{d},{n}\n" for d, n in enumerate(fv))
    return {"csv": csv}


def cmd_coherence(args, rep: Report) -> dict:
    # labels on pearled trees reach arity k + 1 (a univalent pearl fills an input)
    o = _operad_for(args, args.k + 1)
    n = _module_for(args, o, "ibimodule")
    mode = "strong" if args.strong else "coherent"
    if args.k < 2:
        raise InputError("E_USAGE", "coherence is checked for k >= 2")
    r = V.coherence_check(n, args.k, mode)
    rep.absorb(r)
    rep.data.update(k=args.k, mode=mode, module=n.name, source=r.source, target=r.target, iso=r.iso,
                    verdict=r.verdict, betti_0=(r.target.get("betti") or [0])[0])
    return {}


def cmd_verify(args, rep: Report) -> dict:
    what = args.what
    if what == "delta":
        r = V.verify_delta(args.k)
        rep.data["tree_verdicts"] = r.trees if args.full else {c: t["verdicts"] for c, t in r.trees.items()}
    elif what == "gamma":
        o = _operad_for(args, args.k + 1)
        r = V.verify_gamma(o, None, args.k, args.samples, args.seed)
    elif what == "xi":
        o = _operad_for(args, args.k + 1)
        r = V.verify_xi(o, None, args.k, samples=args.samples, seed=args.seed, pairs=args.pairs)
    elif what == "cubical":
        r = V.verify_retraction("cubical", {"i": args.i}, args.samples, args.seed)
    elif what == "d1":
        o = _operad_for(args, args.k + 1)
        r = V.verify_retraction("d1", {"operad": o, "k": args.k}, args.samples, args.seed)
    elif what == "models":
        o = _operad_for(args, args.k + 1)
        r = V.compare_models(o, args.k)
    elif what == "cone":
        o = _operad_for(args, 2)
        n = _module_for(args, o, "ibimodule")
        c = V.mapping_cone(n)
        h = homology(c)
        r = V.VerifyReport(f"cone {n.name}")
        r.data.update(f_vector=f_vector(c), homology=h.as_dict())
        r.check("cone is a connected graph", 1, h.components)
    else:
        raise InputError("E_USAGE", f"unknown check {what!r}")
    rep.absorb(r)
    rep.data.update(r.data)
    rep.data["title"] = r.title
    return {}


def cmd_strata(args, rep: Report) -> dict:
    pre = None
    if args.preimage is not None:
        if args.preimage == "corolla":
            pre = tree_class(corolla(args.k), "rooted")
        else:
            try:
                pre = tree_class(parse_tree(args.preimage), "rooted")
            except (ValueError, IndexError) as e:
                raise InputError("E_PARSE", f"bad tree {args.preimage!r}: {e}") from None
            if pre.arity != args.k:
                raise InputError("E_USAGE", f"{pre.code} has arity {pre.arity}, not {args.k}")
    try:
        a = V.fm_strata(args.family, args.k, pre)
    except ValueError as e:
        raise InputError("E_USAGE", str(e)) from None
    rep.absorb(a)
    rep.data.update(family=a.family, k=a.k, strata=[{"tree": c, "codim": d} for c, d in a.strata], **a.data)
    if a.preimage:
        rep.data["preimage"] = a.preimage
    if args.expect_strata is not None:
        rep.check("number of strata", args.expect_strata, len(a.strata))
    return {}


def cmd_validate(args, rep: Report) -> dict:
    s = parse_structure_file(args.file, validate=False)
    r = _validate(s)
    for axiom, (ok, wit) in sorted(r.checks.items()):
        rep.check(axiom, True, ok)
        if not ok:
            rep.witnesses.append({"axiom": axiom, "witness": repr(wit)})
    rep.data.update(kind=type(s).__name__, name=s.name, max_arity=s.max_arity,
                    sizes={str(n): len(v) for n, v in sorted(s.spaces.items())})
    if isinstance(s, FinOperad):
        rep.data["reduced"] = s.reduced
        rep.data["doubly_reduced"] = s.doubly_reduced
    if args.matching is not None:
        rep.data["matching_object_size"] = len(matching_object(lambda_seq_of(s), args.matching))
    return {}


COMMANDS = {
    "psi": cmd_psi,
    "complex": cmd_complex,
    "hocolim": cmd_hocolim,
    "coherence": cmd_coherence,
    "verify": cmd_verify,
    "strata": cmd_strata,
    "validate": cmd_validate,
}


# ---------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"opcalc: E_USAGE: {message}\n")
        raise SystemExit(2)


def _common(p, operad=False, module=False):
    p.add_argument("--format", choices=("text", "json"), default="text", help="report format")
    p.add_argument("--out", default="-", help="report path, '-' for standard output")
    p.add_argument("--no-cache", action="store_true", help="do not read or write the cache")
    if operad:
        p.add_argument("--operad", default="builtin:comm", help="builtin:comm|assoc|lambda or a structure file")
        p.add_argument("--max-arity", type=int, default=None, help="arity bound for builtin operads")
    if module:
        p.add_argument("--module", default=None, help="structure file of the module (default: the operad over itself)")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="opcalc", description="Exact checks for tree resolutions of operads and their modules.")
    ap.add_argument("--version", action="version", version=f"opcalc {__version__}")
    sub = ap.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    p = sub.add_parser("psi", help="the category of pearled trees and its subcategories")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--subcat", choices=("all",) + SELECTORS, default="all")
    p.add_argument("--dot", default=None, help="write the covering graph as DOT ('-' for standard output)")
    p.add_argument("--expect-objects", type=int, default=None)
    _common(p)

    p = sub.add_parser("complex", help="triangulated tree families")
    p.add_argument("--family", choices=sorted(FAMILY_NAMES), required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--homology", action="store_true")
    p.add_argument("--csv", default=None, help="write the f-vector as CSV")
    p.add_argument("--expect-top-cells", type=int, default=None)
    p.add_argument("--expect-components", type=int, default=None)
    p.add_argument("--expect-acyclic", action="store_true")
    _common(p, operad=True, module=True)

    p = sub.add_parser("hocolim", help="nerve of the category of elements of the label diagram")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--subcat", choices=("all",) + SELECTORS, default="all")
    p.add_argument("--compare", action="store_true", help="compare with the triangulated family complex")
    p.add_argument("--csv", default=None, help="write the f-vector as CSV")
    _common(p, operad=True, module=True)

    p = sub.add_parser("coherence", help="homological coherence of the label diagrams")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--strong", action="store_true")
    _common(p, operad=True, module=True)

    p = sub.add_parser("verify", help="checks of the explicit maps")
    p.add_argument("what", choices=("delta", "gamma", "xi", "cubical", "d1", "models", "cone"))
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--i", type=int, default=2, help="dimension for the cubical retraction")
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--pairs", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--full", action="store_true", help="delta: store all vertex images")
    _common(p, operad=True, module=True)

    p = sub.add_parser("strata", help="stratum trees of compactified configuration spaces")
    p.add_argument("--family", choices=("F", "IF", "BF"), required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--preimage", default=None, help="'corolla' or a rooted tree code such as V(1,V(2,3))")
    p.add_argument("--expect-strata", type=int, default=None)
    _common(p)

    p = sub.add_parser("validate", help="parse and check a structure file")
    p.add_argument("file")
    p.add_argument("--matching", type=int, default=None, help="also report the matching object size in this arity")
    _common(p)
    return ap


def run(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    for name in ("k", "i", "samples", "pairs"):
        v = getattr(args, name, None)
        if v is not None and v < 0:
            sys.stderr.write(f"opcalc: E_USAGE: --{name} must be non-negative\n")
            return 2
    rep = Report([args.cmd] + argv[1:])
    t0 = time.perf_counter()
    try:
        artifacts = _run_cached(args, rep)
        rep.seconds = time.perf_counter() - t0
        if getattr(args, "dot", None):
            _write_text(args.dot, artifacts.get("dot", ""))
        if getattr(args, "csv", None):
            _write_text(args.csv, artifacts.get("csv", ""))
        write_report(rep, args.format, args.out)
    except InputError as e:
        sys.stderr.write(f"opcalc: {e.code}: {e}\n")
        return 2
    except StructureError as e:
        sys.stderr.write(f"opcalc: {e.code}: {e}\n")
        return 2
    return 0 if rep.ok else 1


def _run_cached(args, rep: Report) -> dict:
    use = not args.no_cache
    key = f"{args.cmd}-{_digest_inputs(args)}"
    if use:
        hit = cache_load(key)
        if hit is not None and hit.get("version") == __version__:
            rep.checks = [V.Check(c["name"], c["expected"], c["got"], c["verdict"] == "pass") for c in hit["checks"]]
            rep.data = hit["data"]
            rep.witnesses = hit["witnesses"]
            rep.cached = True
            return hit.get("artifacts", {})
    artifacts = COMMANDS[args.cmd](args, rep)
    if use:
        body = json.loads(json.dumps(rep.body()))
        body["artifacts"] = artifacts
        cache_store(key, body)
    return artifacts


def main() -> None:
    raise SystemExit(run())


if __name__ == "__main__":
    main()
