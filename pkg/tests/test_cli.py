import json
import subprocess
import sys

import pytest

from dilation_spaces.cli import run

F2 = '{"type": 1, "params": {"n": 2, "a": 1, "b": 2}}'
F6 = '{"type": 1, "params": {"n": 6, "a": 1.5, "b": 3}}'


def _run(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_space_make(capsys):
    code, out, _ = _run(capsys, "space", "make", "--type", "1", "--n", "6", "--a", "1", "--b", "2")
    assert code == 0
    obj = json.loads(out)
    assert obj["type"] == 1 and obj["params"]["n"] == 6
    assert [(f["p"], f["k"]) for f in obj["fields"]] == [(2, 1), (3, 1)]


def test_invalid_descriptor_exit_1(capsys):
    code, _, err = _run(capsys, "space", "make", "--type", "1", "--n", "2", "--a", "3", "--b", "2")
    assert code == 1
    assert json.loads(err)["error"]


def test_unknown_command_exit_1(capsys):
    assert _run(capsys, "frobnicate")[0] == 1


def test_sample_is_seeded(capsys):
    first = _run(capsys, "space", "sample", "--space", F2, "--count", "6", "--seed", "4")[1]
    second = _run(capsys, "space", "sample", "--space", F2, "--count", "6", "--seed", "4")[1]
    assert first == second
    assert len(json.loads(first)["points"]) == 6


def test_seed_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("DILATION_SPACES_SEED", "4")
    env = _run(capsys, "space", "sample", "--space", F2, "--count", "6")[1]
    monkeypatch.delenv("DILATION_SPACES_SEED")
    flag = _run(capsys, "space", "sample", "--space", F2, "--count", "6", "--seed", "4")[1]
    assert env == flag


def test_distmat_then_classify(capsys, tmp_path):
    csv_path, car = tmp_path / "m.csv", tmp_path / "m.json"
    code, _, _ = _run(capsys, "space", "distmat", "--space", F6, "--count", "30", "--out", str(csv_path),
                      "--sidecar", str(car))
    assert code == 0
    code, out, _ = _run(capsys, "classify", "--input", str(csv_path), "--sidecar", str(car))
    assert code == 0
    rep = json.loads(out)
    assert rep["detected_type"] == 1
    assert rep["params"] == {"type": 1, "params": {"n": 6, "a": 1.5, "b": 3.0}}
    assert all(w.startswith("p") for w in rep["clique_witness"])
    code, out, _ = _run(capsys, "classify", "--input", str(csv_path))
    assert code == 0 and json.loads(out)["params"]["params"]["n"] == 6


def test_classify_failure_exit_2(capsys, tmp_path):
    path = tmp_path / "path.csv"
    path.write_text("x,y,z\n0,1,4\n1,0,2\n4,2,0\n")
    code, _, err = _run(capsys, "classify", "--input", str(path))
    assert code == 2
    assert "diagnostics" in json.loads(err)


def test_classify_missing_file_exit_1(capsys, tmp_path):
    assert _run(capsys, "classify", "--input", str(tmp_path / "absent.csv"))[0] == 1


def test_verify_table_and_json(capsys):
    code, out, _ = _run(capsys, "verify", "--property", "ultrametric", "--property", "gamma", "--space", F2,
                        "--count", "30", "--depth", "3")
    assert code == 0
    assert "ultrametric" in out and "PASS" in out
    code, out, _ = _run(capsys, "verify", "--property", "coding", "--space", F6, "--count", "40", "--depth", "4",
                        "--format", "json")
    assert code == 0
    res = json.loads(out)["results"][0]
    assert res["property"] == "coding" and res["violations"] == 0


def test_verify_explain(capsys):
    code, out, _ = _run(capsys, "verify", "--explain")
    assert code == 0
    assert "ultrametric:" in out and "two-point:" in out


def test_verify_wrong_space_type_exit_1(capsys):
    code, _, _ = _run(capsys, "verify", "--property", "coding", "--space", '{"type": 2, "params": {"n": 2, "alpha": 0.5}}')
    assert code == 1


def test_dilate(capsys):
    a = '[{"v0": 0, "coeffs": [[0]], "prec": 1, "zero": true}]'
    b = '[{"v0": 0, "coeffs": [[1], [0], [0], [0]], "prec": 4, "zero": false}]'
    c = '[{"v0": -1, "coeffs": [[1], [1], [0], [0]], "prec": 4, "zero": false}]'
    code, out, _ = _run(capsys, "dilate", "--space", F2, "--fix", a, "--map", b, c)
    assert code == 0
    obj = json.loads(out)
    # |c - a| = 2 and |b - a| = 1, so the scale is 2
    assert obj["scale"]["value"] == 2.0
    assert obj["image_of_fixed"][0]["zero"] is True


def test_extend(capsys, tmp_path):
    pts_path = tmp_path / "pts.json"
    _, out, _ = _run(capsys, "space", "sample", "--space", F2, "--count", "8", "--seed", "1")
    pts_path.write_text(out)
    pts = json.loads(out)["points"]
    partial = json.dumps({"pairs": [[pts[0], pts[0]], [pts[1], pts[1]]]})
    code, out, _ = _run(capsys, "extend", "--space", F2, "--partial", partial, "--sample", str(pts_path))
    assert code == 0
    obj = json.loads(out)
    assert obj["violations"] == 0 and obj["pairs_checked"] == 28


def test_product_commands(capsys):
    code, out, _ = _run(capsys, "product", "--op", "sup", "--spaces", F2, '{"type": 1, "params": {"n": 3, "a": 1, "b": 2}}')
    assert code == 0 and json.loads(out)["product"]["params"]["n"] == 6
    r1 = '{"type": 2, "params": {"n": 1, "alpha": 1}}'
    code, out, _ = _run(capsys, "product", "--op", "euclidean", "--spaces", r1, r1)
    assert code == 0 and json.loads(out)["max_relative_error"] < 1e-12
    code, out, _ = _run(capsys, "product", "--op", "probe", "--spaces", r1, r1, "--rule", "lp", "--samples", "20")
    assert code == 0 and json.loads(out)["max_equidistant_clique_size"] == 4


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "dilation_spaces", "space", "make", "--type", "0", "--size", "3",
                           "--r", "2"], capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout) == {"type": 0, "params": {"size": 3, "r": 2.0}}


@pytest.mark.parametrize("argv", [["--help"], ["space", "--help"]])
def test_help_exits_cleanly(capsys, argv):
    assert _run(capsys, *argv)[0] == 0
