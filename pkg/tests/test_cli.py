import csv
import io
import json
import math
import subprocess
import sys

import pytest

from corrgap.bounds import ONE_MINUS_INV_E
from corrgap.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_bound_girth_two(capsys):
    code, out, _ = run(capsys, "bound", "--rank", "5", "--girth", "2", "--format", "json")
    assert code == 0
    assert json.loads(out)["lower_bound"] == pytest.approx(0.6321205588, abs=1e-10)


def test_bound_rank3_girth4(capsys):
    code, out, _ = run(capsys, "bound", "--rank", "3", "--girth", "4")
    assert code == 0
    assert "lower_bound: 0.7759581923" in out
    assert "upper_bound_union" in out


def test_bound_bad_params(capsys):
    code, out, err = run(capsys, "bound", "--rank", "2", "--girth", "5")
    assert code == 2 and out == "" and "error" in err


def test_bound_table_csv(capsys):
    code, out, _ = run(capsys, "bound-table", "--rho-max", "4")
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["rho", "gamma", "bound"]
    assert len(rows) == 1 + sum(r for r in range(1, 5))


def test_grid_shapes(tmp_path, capsys):
    path = tmp_path / "fig.csv"
    code, _, _ = run(capsys, "figure1", "--out", str(path))
    assert code == 0
    rows = [(int(r["rho"]), int(r["gamma"]), float(r["bound"])) for r in csv.DictReader(path.open())]
    table = {(r, g): b for r, g, b in rows}
    for (r, g), b in table.items():
        if (r + 1, g) in table:
            assert table[(r + 1, g)] <= b
        if (r, g + 1) in table:
            assert table[(r, g + 1)] >= b
        if g == 2:
            assert b == pytest.approx(ONE_MINUS_INV_E, abs=1e-10)
    # ten significant digits
    assert all(len(line.split(",")[2].replace(".", "").lstrip("0")) <= 10 for line in path.read_text().splitlines()[1:])


def test_grid_command_unwritable(capsys):
    code, _, err = run(capsys, "figure1", "--out", "/nonexistent/dir/fig.csv")
    assert code == 2 and "error" in err


def _write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return str(p)


def test_gap_uniform_rank_one(tmp_path, capsys):
    m = _write(tmp_path, "m.json", {"type": "uniform", "n": 8, "rank": 1})
    code, out, _ = run(capsys, "gap", "--matroid", m)
    assert code == 0
    assert json.loads(out)["ratio"] == pytest.approx(1 - (7 / 8) ** 8, abs=1e-4)
    _, again, _ = run(capsys, "gap", "--matroid", m)
    assert out == again


def test_gap_weighted_not_lower(tmp_path, capsys):
    m = _write(tmp_path, "m.json", {"type": "graphic", "vertices": 4, "edges": [[0, 1], [1, 2], [2, 0], [0, 3]]})
    w = _write(tmp_path, "w.json", {"weights": [0.3, 2.0, 1.0, 0.7]})
    _, plain, _ = run(capsys, "gap", "--matroid", m)
    _, weighted, _ = run(capsys, "gap", "--matroid", m, "--weights", w)
    assert json.loads(weighted)["ratio"] >= json.loads(plain)["ratio"] - 1e-6


def test_gap_parse_error_reports_position(tmp_path, capsys):
    m = _write(tmp_path, "bad.json", '{"type": "uniform",\n "n": 8,,}')
    code, _, err = run(capsys, "gap", "--matroid", m)
    assert code == 2
    assert "line 2" in err and "column" in err


def test_gap_capacity(tmp_path, capsys):
    m = _write(tmp_path, "m.json", {"type": "uniform", "n": 30, "rank": 2})
    code, _, _ = run(capsys, "gap", "--matroid", m)
    assert code == 3


def test_verify_identities(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "identities")
    assert code == 0
    lines = out.strip().splitlines()
    assert all(line.startswith("PASS") for line in lines)
    ids = [line.split()[1] for line in lines]
    assert ids == sorted(ids)


def test_verify_clock_seed7(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "clock", "--seed", "7")
    assert code == 0, out


def test_verify_unknown_suite(capsys):
    code, _, err = run(capsys, "verify", "--suite", "nope")
    assert code == 2 and "unknown suite" in err


def test_maximize(tmp_path, capsys):
    inst = {
        "constraint": {"type": "uniform", "n": 5, "rank": 2},
        "objectives": [
            {"type": "coverage", "support": [0, 1, 2], "phi": [0, 1, 1]},
            {"type": "coverage", "support": [2, 3, 4], "phi": [0, 1, 1]},
        ],
    }
    code, out, _ = run(capsys, "maximize", "--instance", _write(tmp_path, "i.json", inst))
    rec = json.loads(out)
    assert code == 0
    assert rec["value"] == rec["opt"] == 2.0


def test_console_script_exit_codes():
    r = subprocess.run([sys.executable, "-m", "corrgap.cli", "bound", "--rank", "2", "--girth", "5"], capture_output=True, text=True)
    assert r.returncode == 2
    r = subprocess.run([sys.executable, "-m", "corrgap.cli", "bound"], capture_output=True, text=True)
    assert r.returncode == 2
    r = subprocess.run([sys.executable, "-m", "corrgap.cli", "bound", "--rank", "4", "--girth", "3", "--format", "csv"], capture_output=True, text=True)
    assert r.returncode == 0
    assert not math.isnan(float(r.stdout.splitlines()[1].split(",")[2]))
