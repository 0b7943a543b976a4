import json
import subprocess
import sys

import pytest

from drsolve.cli import main


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_decide_sat(capsys):
    code, out, _ = run(["decide", "--sat", "c0 c1 x * -c1 c0 x"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["verdict"] == "SAT"
    assert len(doc["certificate"]["witness"]["points"]) == 3
    assert "millis" not in doc["stats"]


def test_decide_unsat_trace(capsys):
    code, out, _ = run(["decide", "--sat", "x * -c0 x", "--trace"], capsys)
    doc = json.loads(out)
    assert doc["verdict"] == "UNSAT" and doc["certificate"]["trace"]
    code, out, _ = run(["decide", "--sat", "x * -c0 x", "--timing"], capsys)
    doc = json.loads(out)
    assert "certificate" not in doc and "millis" in doc["stats"]


def test_decide_eq_and_valid(capsys):
    _, out, _ = run(["decide", "--eq", "c0 c1 x", "c1 c0 x"], capsys)
    assert json.loads(out)["verdict"] == "INVALID"
    _, out, _ = run(["decide", "--valid", "x + -x"], capsys)
    assert json.loads(out)["verdict"] == "VALID"


def test_witness_files(tmp_path, capsys):
    out_path, dot_path = tmp_path / "w.json", tmp_path / "w.dot"
    code, out, _ = run(["decide", "--sat", "c0 x * c0 -x", "--out", str(out_path),
                        "--dot", str(dot_path)], capsys)
    assert code == 0
    assert json.loads(out_path.read_text())["n"] == 2
    assert dot_path.read_text().startswith("graph")


def test_witness_from_form(tmp_path, capsys):
    _, out, _ = run(["forms", "--enumerate", "x", "2", "1"], capsys)
    doc = json.loads(out)
    assert len(doc["roots"]) == 32 and len(doc["consistent"]) == 8
    form_file = tmp_path / "forms.json"
    form_file.write_text(json.dumps({"variables": doc["variables"], "forms": doc["forms"],
                                     "root": doc["consistent"][0]}))
    code, out, _ = run(["witness", "--form", str(form_file)], capsys)
    assert code == 0 and json.loads(out)["points"]


def test_forms_count(capsys):
    _, out, _ = run(["forms", "--count", "1", "2", "1"], capsys)
    assert json.loads(out) == {"count": 32}


def test_split(tmp_path, capsys):
    path = tmp_path / "split.json"
    code, out, _ = run(["split", "c0 x", "--out", str(path)], capsys)
    doc = json.loads(path.read_text())
    assert code == 0 and doc == json.loads(out)
    assert doc["checks"] == {"aSat": "SAT", "bSat": "SAT", "disjoint": True}
    assert doc["degree"] == 3


def test_zerodim(capsys):
    _, out, _ = run(["zerodim", "x"], capsys)
    doc = json.loads(out)
    assert doc["indices"] == [1, 0] and not doc["zeroDimensional"]
    _, out, _ = run(["zerodim", "x + -x"], capsys)
    assert json.loads(out)["zeroDimensional"]


def test_oracle(capsys):
    _, out, _ = run(["oracle", "--check-axioms", "--max-base", "2"], capsys)
    assert json.loads(out) == {"units": 16, "failures": 0}
    _, out, _ = run(["oracle", "--sat", "x * -c0 x"], capsys)
    assert not json.loads(out)["found"]


def test_gam(tmp_path, capsys):
    model = {"domain": ["a", "b"], "relations": {"R": [["a", "b"]]},
             "assignments": [["a", "b"], ["a", "a"]]}
    path = tmp_path / "m.json"
    path.write_text(json.dumps(model))
    _, out, _ = run(["gam", "--eval", str(path), "exists v1. R(v0,v1)"], capsys)
    doc = json.loads(out)
    assert doc["coherent"] and [r["value"] for r in doc["values"]] == [True, True]
    _, out, _ = run(["gam", "--valid",
                     "(exists v0. exists v1. R(v0,v1)) <-> (exists v1. exists v0. R(v0,v1))"], capsys)
    assert json.loads(out)["verdict"] == "INVALID"


@pytest.mark.parametrize("argv", [
    [],
    ["decide"],
    ["decide", "--sat", "c0 (x *"],
    ["decide", "--sat", "x", "--dim", "1"],
    ["gam", "--valid", "v0 = v1"],
    ["witness"],
    ["split", "x * -x"],
    ["forms", "--enumerate", "x", "2", "2"],
    ["witness", "--form", "/nonexistent/forms.json"],
])
def test_usage_errors(argv, capsys):
    code, out, err = run(argv, capsys)
    assert code == 1 and out == "" and err


def test_console_script_and_determinism(tmp_path):
    outputs = []
    for k in range(2):
        path = tmp_path / f"split{k}.json"
        proc = subprocess.run([sys.executable, "-m", "drsolve.cli", "split", "x * c1 x",
                               "--out", str(path)], capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        outputs.append(path.read_bytes())
    assert outputs[0] == outputs[1]
    proc = subprocess.run([sys.executable, "-m", "drsolve.cli", "decide", "--sat", "x *"],
                          capture_output=True, text=True)
    assert proc.returncode == 1 and "parse error" in proc.stderr
