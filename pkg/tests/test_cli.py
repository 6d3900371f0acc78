import json
import subprocess
import sys
from pathlib import Path

import pydot
import pytest

from torus_height.cli import main

INSTANCES = Path(__file__).resolve().parent.parent / "instances"


def run(args, capsys):
    code = main([str(a) for a in args])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize(
    "name,code,verdict",
    [
        ("shift", 0, "negative_immersions"),
        ("chain", 0, "negative_immersions"),
        ("two_loops", 0, "negative_immersions"),
        ("fixed_loop", 3, "zero_euler_witness"),
        ("ascending", 3, "zero_euler_witness"),
    ],
)
def test_analyze_exit_codes(capsys, name, code, verdict):
    rc, out, _ = run(["analyze", INSTANCES / f"{name}.json"], capsys)
    assert rc == code
    assert json.loads(out)["certificate"]["verdict"] == verdict


def test_analyze_not_injective(capsys):
    rc, out, err = run(["analyze", INSTANCES / "folded_circle.json"], capsys)
    assert rc == 4
    assert "not π1-injective" in err
    assert json.loads(out)["certificate"] is None


def test_analyze_text_and_output_file(capsys, tmp_path):
    rc, out, _ = run(["analyze", INSTANCES / "two_loops.json", "--format", "text"], capsys)
    assert rc == 0 and "c = 1/288" in out and "c' = 1/72" in out
    dest = tmp_path / "r.json"
    rc, out, _ = run(["analyze", INSTANCES / "shift.json", "-o", dest], capsys)
    assert rc == 0 and out == ""
    assert json.loads(dest.read_text())["directed_height"] == 1


def test_cap_environment_override(capsys, tmp_path, monkeypatch):
    inst = {"rank": 2, "basis": ["a", "b"], "H_generators": ["a"], "images": {"a": "abB"}}
    p = tmp_path / "backtrack.json"
    p.write_text(json.dumps(inst))
    rc, _, _ = run(["analyze", p], capsys)
    assert rc == 0
    monkeypatch.setenv("TORUS_HEIGHT_CAP", "1")
    rc, out, err = run(["analyze", p], capsys)
    assert rc == 4 and "cap 1" in err
    monkeypatch.setenv("TORUS_HEIGHT_CAP", "lots")
    rc, _, err = run(["analyze", p], capsys)
    assert rc == 2


def test_input_errors(capsys, tmp_path):
    rc, _, err = run(["analyze", tmp_path / "nope.json"], capsys)
    assert rc == 2 and "error" in err
    bad = tmp_path / "bad.json"
    bad.write_text('{"rank": 1}')
    rc, _, _ = run(["analyze", bad], capsys)
    assert rc == 2


def test_audit(capsys, tmp_path):
    rc, out, _ = run(["audit", INSTANCES / "two_loops.json", "-K", "3"], capsys)
    rep = json.loads(out)
    assert rc == 0 and rep["ok"] and rep["count"] > 0 and "elapsed" not in rep
    rc, out, _ = run(["audit", INSTANCES / "two_loops.json", INSTANCES / "shift.json", "-K", "2", "--jobs", "2", "--timing"], capsys)
    reps = json.loads(out)["reports"]
    assert rc == 0 and len(reps) == 2 and all("elapsed" in r for r in reps)
    rc, out, _ = run(["audit", INSTANCES / "two_loops.json", "-K", "2", "--isolated", "1"], capsys)
    assert rc == 0 and json.loads(out)["isolated_edges_allowed"] == 1


@pytest.mark.parametrize("name", ["fixed_loop", "folded_circle"])
def test_audit_refuses_without_finite_height(capsys, name):
    rc, _, err = run(["audit", INSTANCES / f"{name}.json"], capsys)
    assert rc == 2 and err


def test_fold(capsys):
    rc, out, _ = run(["fold", INSTANCES / "folded_circle.json"], capsys)
    d = json.loads(out)
    assert rc == 0 and d["pi1_injective"] is False and len(d["moves"]) == 1
    rc, out2, _ = run(["fold", INSTANCES / "folded_circle.json", "--seed", "7"], capsys)
    assert rc == 0 and json.loads(out2)["pi1_injective"] is False


def test_export(capsys, tmp_path):
    rc, out, _ = run(["export", INSTANCES / "two_loops.json", "--dot", tmp_path, "--json"], capsys)
    assert rc == 0
    for name in ("F", "H", "X"):
        (g,) = pydot.graph_from_dot_file(str(tmp_path / f"{name}.dot"))
        assert g.get_edges()
    assert json.loads((tmp_path / "X.json").read_text())["faces"]


def test_random(capsys, tmp_path):
    rc, out, _ = run(["random", "--seed", "5", "--petals", "3", "--h-edges", "2"], capsys)
    a = json.loads(out)
    rc2, out2, _ = run(["random", "--seed", "5", "--petals", "3", "--h-edges", "2"], capsys)
    assert rc == rc2 == 0 and json.loads(out2) == a
    rc, _, _ = run(["random", "--count", "3", "--output-dir", tmp_path], capsys)
    assert rc == 0 and len(list(tmp_path.glob("*.json"))) == 3
    for p in tmp_path.glob("*.json"):
        assert run(["analyze", p], capsys)[0] in (0, 3)
    rc, _, _ = run(["random", "--petals", "1", "--h-edges", "2"], capsys)
    assert rc == 2


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "torus_height", "analyze", str(INSTANCES / "shift.json")], capture_output=True, text=True)
    assert out.returncode == 0 and json.loads(out.stdout)["directed_height"] == 1
    out = subprocess.run([sys.executable, "-m", "torus_height", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and "0.1.0" in out.stdout
