import json
import shutil
import subprocess
from pathlib import Path

import numpy as np
import pytest

from svx.binary_sv import curve_from_csv, curve_gap
from svx.cli import main
from svx.io import joint_from_obj, spec_from_obj

DATA = Path(__file__).resolve().parent.parent / "demos" / "data"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_analyze_binary(capsys):
    code, out, _ = run(capsys, "analyze", DATA / "binary_third.json")
    rep = json.loads(out)
    assert code == 1
    assert rep["verdict"] == "IMPOSSIBLE"
    assert rep["certificate"]["delta"] == "2/3"
    assert rep["certificate"]["epsilon"] == "1/12"
    assert rep["schema"] == 1


def test_analyze_three_symbol(capsys):
    code, out, _ = run(capsys, "analyze", DATA / "three_symbol.json")
    rep = json.loads(out)
    assert code == 0
    assert rep["verdict"] == "EXTRACTABLE"
    assert rep["psi"]["values"] == ["1/3", "1/3", -1]


def test_analyze_gap_exit_code(capsys, tmp_path):
    # degenerate spec where neither test decides
    p = tmp_path / "gap.json"
    p.write_text(json.dumps({"alphabet": 3, "dice": [[1, 0, 0], [0, "1/2", "1/2"], ["1/2", "1/2", 0]]}))
    code, out, _ = run(capsys, "analyze", p)
    assert code == {"EXTRACTABLE": 0, "IMPOSSIBLE": 1, "GAP": 2}[json.loads(out)["verdict"]]


def test_malformed_and_invalid_inputs(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"alphabet": 2,\n "dice": [[0.5, 0.5]\n')
    code, _, err = run(capsys, "analyze", bad)
    assert code == 64
    assert "line" in err
    wrong = tmp_path / "wrong.json"
    wrong.write_text(json.dumps({"alphabet": 2, "dice": [[0.5, 0.6]]}))
    code, _, err = run(capsys, "analyze", wrong)
    assert code == 64 and "sum" in err
    code, _, _ = run(capsys, "analyze", tmp_path / "missing.json")
    assert code == 3


def test_unknown_subcommand_and_suite(capsys):
    assert run(capsys, "frobnicate")[0] == 64
    code, _, err = run(capsys, "verify", "nope")
    assert code == 64 and "unknown suite" in err


def test_reports_byte_identical(capsys, tmp_path):
    for argv in (["analyze", DATA / "binary_third.json"],
                 ["extract", DATA / "three_symbol.json", "--k", "20", "--n", "500", "--seed", "4"],
                 ["adversary", DATA / "binary_third.json", DATA / "prefix_table_n3_x3.json"],
                 ["distributed", DATA / "copied_three_symbol.json", "--n", "200", "--trials", "10"]):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        run(capsys, *argv, "--out", a)
        run(capsys, *argv, "--out", b)
        assert a.read_bytes() == b.read_bytes()


def test_extract_stdout_and_k_zero(capsys):
    code, out, _ = run(capsys, "extract", DATA / "three_symbol.json", "--k", "40", "--n", "300", "--seed", "2")
    lines = out.splitlines()
    assert code == 0
    assert len(lines[0]) == 40 and set(lines[0]) <= {"0", "1"}
    stats = json.loads("\n".join(lines[1:]))["stats"]
    assert stats["k"] == 40
    code, out, _ = run(capsys, "extract", DATA / "three_symbol.json", "--k", "0")
    assert code == 0 and out.splitlines()[0] == ""


def test_extract_from_stream(capsys, tmp_path):
    s = tmp_path / "s.txt"
    s.write_text("0 0 0 2 2 2\n")
    code, out, _ = run(capsys, "extract", DATA / "three_symbol.json", "--k", "2", "--n", "3", "--M", "1",
                       "--stream", s)
    assert code == 0
    assert out.splitlines()[0] == "10"
    code, _, err = run(capsys, "extract", DATA / "three_symbol.json", "--k", "3", "--n", "3", "--stream", s)
    assert code == 3 and "need 9 symbols" in err


def test_extract_refuses_impossible(capsys):
    code, _, err = run(capsys, "extract", DATA / "binary_third.json")
    assert code == 1 and "IMPOSSIBLE" in err


def test_adversary_exact(capsys):
    code, out, _ = run(capsys, "adversary", DATA / "binary_third.json", DATA / "prefix_table_n3_x3.json")
    rep = json.loads(out)
    assert code == 0
    assert rep["alpha"] == "5/27" and rep["beta"] == "16/27"


def test_adversary_complement(capsys, tmp_path):
    t = tmp_path / "t.json"
    t.write_text(json.dumps({"n": 3, "labels": "11100000"}))
    rep = json.loads(run(capsys, "adversary", DATA / "binary_third.json", t)[1])
    assert rep["alpha"] == "11/27"  # 1 - beta of the complement 00011111


def test_adversary_budget(capsys, tmp_path):
    t = tmp_path / "t.json"
    t.write_text(json.dumps({"n": 6, "labels": "0" * 64}))
    code, _, err = run(capsys, "adversary", DATA / "binary_third.json", t, "--budget", "32")
    assert code == 3 and "budget" in err


def test_curve_csv_roundtrip(capsys, tmp_path):
    out = tmp_path / "c.csv"
    code, stdout, _ = run(capsys, "curve", "--delta", "1/3", "--n", "12", "--out", out)
    rep = json.loads(stdout)
    pts = curve_from_csv(out.read_text())
    assert code == 0
    assert len(pts) == 4097
    assert np.any(np.all(np.isclose(pts, [1 / 3, 2 / 3], atol=1e-15), axis=1))
    assert rep["gap"] == pytest.approx(curve_gap(pts))
    assert rep["gap"] > 0


def test_curve_range_errors(capsys):
    assert run(capsys, "curve", "--delta", "0.5")[0] == 64
    assert run(capsys, "curve", "--delta", "0.3", "--n", "21")[0] == 64


def test_curve_near_half(capsys):
    code, out, err = run(capsys, "curve", "--delta", "0.49", "--n", "10")
    assert code == 0
    assert 0 < curve_gap(curve_from_csv(out)) < 0.02


def test_distributed_commands(capsys):
    code, out, _ = run(capsys, "distributed", DATA / "erasure.json")
    assert code == 1
    assert "certificate" in json.loads(out)
    code, out, _ = run(capsys, "distributed", DATA / "merging_pair.json")
    assert json.loads(out)["common_part"]["num_nonsingleton"] == 2
    code, out, _ = run(capsys, "distributed", DATA / "copied_three_symbol.json", "--n", "300", "--trials", "20")
    rep = json.loads(out)
    assert code == 0
    assert rep["verdict"] == "COMMON-EXTRACTABLE"
    assert rep["demo"]["agreement"] == 1.0


def test_json_inputs_roundtrip():
    from svx.io import joint_to_obj, spec_to_obj
    for name in ("binary_third.json", "three_symbol.json"):
        obj = json.loads((DATA / name).read_text())
        spec = spec_from_obj(obj)
        assert spec_from_obj(json.loads(json.dumps(spec_to_obj(spec)))) == spec
    obj = json.loads((DATA / "erasure.json").read_text())
    js = joint_from_obj(obj)
    assert joint_from_obj(json.loads(json.dumps(joint_to_obj(js)))) == js


def test_verify_suites(capsys):
    code, out, _ = run(capsys, "verify", "adversary")
    assert code == 0
    assert all(line.startswith("PASS") for line in out.splitlines())
    code, out, _ = run(capsys, "verify", "witsenhausen")
    assert code == 0


@pytest.mark.skipif(shutil.which("svx") is None, reason="console script not installed")
def test_console_script():
    p = subprocess.run(["svx", "analyze", str(DATA / "three_symbol.json")], capture_output=True, text=True)
    assert p.returncode == 0
    assert json.loads(p.stdout)["verdict"] == "EXTRACTABLE"
    assert "svx analyze:" in p.stderr
