import json
import subprocess
import sys

import pytest

from opcalc.algebra import builtin, self_ibimodule
from opcalc.cli import InputError, dump_structure, parse_structure, parse_structure_file, run


def run_json(capsys, *argv):
    code = run(list(argv) + ["--format", "json"])
    out = capsys.readouterr()
    return code, json.loads(out.out) if out.out.strip() else None, out.err


def without_timing(doc):
    doc = dict(doc)
    doc.pop("timing")
    return doc


def write(tmp_path, name, doc):
    p = tmp_path / name
    p.write_text(json.dumps(doc), encoding="utf-8")
    return str(p)


def test_coherence_strong_assoc(capsys):
    code, doc, _ = run_json(capsys, "coherence", "--operad", "builtin:assoc", "--k", "2", "--strong")
    assert code == 0
    assert doc["verdict"] == "pass"
    assert doc["data"]["source"]["betti"][0] == 2


def test_complex_comm_two(capsys):
    code, doc, _ = run_json(capsys, "complex", "--family", "ibl", "--operad", "builtin:comm", "--k", "2", "--homology")
    assert code == 0
    assert doc["data"]["top_cells"] == 3
    assert doc["data"]["acyclic"] is True


def test_failed_expectation_exits_one(capsys):
    code, doc, _ = run_json(capsys, "complex", "--family", "ibl", "--operad", "builtin:comm", "--k", "2",
                            "--expect-top-cells", "4")
    assert code == 1
    assert doc["verdict"] == "fail"


def test_psi_dot(tmp_path, capsys):
    dot = tmp_path / "out.dot"
    code, doc, _ = run_json(capsys, "psi", "--k", "2", "--subcat", "boundary_U", "--dot", str(dot))
    assert code == 0
    text = dot.read_text()
    assert text.startswith("digraph")
    assert text.count("->") == 4
    assert sum(1 for line in text.splitlines() if line.strip().startswith('"') and "->" not in line) == 5
    assert doc["data"]["objects"] == 5


def test_complex_csv(tmp_path, capsys):
    csv = tmp_path / "f.csv"
    code, doc, _ = run_json(capsys, "complex", "--family", "ibl", "--operad", "builtin:assoc", "--k", "2", "--csv", str(csv))
    assert code == 0
    rows = csv.read_text().strip().splitlines()
    assert rows[0].split(",")[0] == "dimension"
    assert len(rows) == 4


def test_report_is_deterministic_and_cached(capsys, tmp_path):
    argv = ["strata", "--family", "F", "--k", "3", "--expect-strata", "4"]
    code1, cold, _ = run_json(capsys, *argv)
    code2, warm, _ = run_json(capsys, *argv)
    assert code1 == code2 == 0
    assert cold["timing"]["cached"] is False
    assert warm["timing"]["cached"] is True
    assert without_timing(cold) == without_timing(warm)
    assert list(cold) == ["tool", "version", "command", "verdict", "checks", "data", "witnesses", "timing"]
    code3, fresh, _ = run_json(capsys, *argv, "--no-cache")
    fresh, cold = without_timing(fresh), without_timing(cold)
    assert fresh.pop("command") != cold.pop("command")
    assert json.dumps(fresh) == json.dumps(cold)


def test_text_report_has_one_row_per_check(capsys):
    assert run(["verify", "cubical", "--i", "2", "--samples", "50"]) == 0
    out = capsys.readouterr().out
    rows = [l for l in out.splitlines() if l.strip().startswith(("[PASS]", "[FAIL]"))]
    code, doc, _ = run_json(capsys, "verify", "cubical", "--i", "2", "--samples", "50")
    assert len(rows) == len(doc["checks"])


def test_report_to_file(tmp_path, capsys):
    out = tmp_path / "r.json"
    assert run(["strata", "--family", "F", "--k", "2", "--format", "json", "--out", str(out)]) == 0
    assert capsys.readouterr().out == ""
    assert json.loads(out.read_text())["verdict"] == "pass"


def test_unwritable_output(tmp_path, capsys):
    code = run(["strata", "--family", "F", "--k", "2", "--out", str(tmp_path / "no" / "such" / "r.txt")])
    assert code == 2
    assert "E_OUTPUT" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    ["psi", "--k", "2", "--bogus"],
    ["nosuch"],
    ["psi"],
    ["psi", "--k", "-1"],
    ["complex", "--family", "zz", "--k", "2"],
])
def test_usage_errors(argv, capsys):
    assert run(argv) == 2
    assert "E_USAGE" in capsys.readouterr().err


def test_structure_roundtrip(tmp_path):
    for s in (builtin("comm", 3), builtin("assoc", 3), self_ibimodule(builtin("assoc", 3))):
        doc = dump_structure(s)
        back = parse_structure(json.loads(json.dumps(doc)))
        assert dump_structure(back) == doc


def test_minimal_comm_file_is_doubly_reduced(tmp_path, capsys):
    path = write(tmp_path, "comm.json", dump_structure(builtin("comm", 3)))
    o = parse_structure_file(path)
    assert o.doubly_reduced
    code, doc, _ = run_json(capsys, "validate", path)
    assert code == 0
    assert doc["data"]["doubly_reduced"] is True


def test_matching_object_from_a_file(tmp_path, capsys):
    path = write(tmp_path, "assoc.json", dump_structure(builtin("assoc", 3)))
    code, doc, _ = run_json(capsys, "validate", path, "--matching", "3")
    assert code == 0
    assert doc["data"]["matching_object_size"] == 8


def test_missing_row_is_named(tmp_path, capsys):
    doc = dump_structure(builtin("assoc", 3))
    row = doc["compositions"].pop(7)
    path = write(tmp_path, "holes.json", doc)
    with pytest.raises(InputError) as e:
        parse_structure_file(path)
    assert e.value.code == "E_INCOMPLETE"
    code, _, err = run_json(capsys, "validate", path)
    assert code == 2
    assert "E_INCOMPLETE" in err
    assert row["left"] in err and row["right"] in err and row["result"] not in ("",)


def test_broken_associativity(tmp_path, capsys):
    doc = dump_structure(builtin("assoc", 3))
    row = next(r for r in doc["compositions"] if r["n"] == 2 and r["m"] == 2)
    others = [x for x in doc["spaces"]["3"] if x != row["result"]]
    row["result"] = others[0]
    path = write(tmp_path, "broken.json", doc)
    with pytest.raises(InputError) as e:
        parse_structure_file(path)
    assert e.value.code == "E_AXIOM"
    code, out, _ = run_json(capsys, "validate", path)
    assert code == 1
    assert out["verdict"] == "fail"
    assert out["witnesses"]
    code, _, err = run_json(capsys, "complex", "--family", "ibl", "--operad", path, "--k", "2")
    assert code == 2
    assert "E_AXIOM" in err


def test_malformed_file(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text("{not json", encoding="utf-8")
    code, _, err = run_json(capsys, "validate", str(p))
    assert code == 2
    assert "E_PARSE" in err


def test_operad_too_small(capsys):
    code, _, err = run_json(capsys, "complex", "--family", "ibl", "--operad", "builtin:comm", "--max-arity", "2", "--k", "2")
    assert code == 2
    assert "E_INCOMPLETE" in err


@pytest.mark.parametrize("what", ["delta", "gamma", "xi", "cubical", "d1", "models", "cone"])
def test_verify_subcommands(what, capsys):
    code, doc, _ = run_json(capsys, "verify", what, "--operad", "builtin:assoc", "--k", "2", "--samples", "40", "--pairs", "40")
    assert code == 0, doc["checks"]


def test_hocolim_compare(capsys):
    code, doc, _ = run_json(capsys, "hocolim", "--operad", "builtin:assoc", "--k", "2", "--compare")
    assert code == 0


def test_entry_point():
    out = subprocess.run([sys.executable, "-m", "opcalc.cli", "--version"], capture_output=True, text=True)
    assert out.returncode == 0
    assert out.stdout.strip() == "opcalc 0.1.0"
