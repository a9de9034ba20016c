import csv
import io
import json
import subprocess
import sys

import pytest

from metineq.cli import run

SMALL = {
    "growth": ["growth", "--radius", "6"],
    "gasket-decay": ["gasket-decay", "--level", "5", "--deltas", "0.25,0.125"],
    "riesz": ["riesz", "--levels", "3", "--angles", "16", "--x", "0.3,0.1"],
    "weaktype": ["weaktype", "--cells", "101", "--tcount", "3"],
    "isoperimetric": ["isoperimetric", "--shape", "cube", "--n", "3"],
    "sphere-poincare": ["sphere-poincare", "--n", "3", "--kind", "cr", "--samples", "5000", "--seed", "7"],
    "padic": ["padic", "--p", "3", "--series-k", "4"],
    "padic-norms": ["padic-norms", "--p", "2", "--trials", "5", "--vertices", "8", "--seed", "1"],
}


def invoke(argv):
    out = io.StringIO()
    code = run(argv, out)
    return code, out.getvalue()


def rows(text):
    return list(csv.reader(io.StringIO(text)))


@pytest.mark.parametrize("name", sorted(SMALL))
def test_subcommand_runs_and_is_deterministic(name):
    code1, a = invoke(SMALL[name] + ["--workers", "1"])
    code8, b = invoke(SMALL[name] + ["--workers", "8"])
    assert code1 == code8 == 0
    assert a == b and a


def test_growth_output():
    code, text = invoke(["growth", "--radius", "2"])
    assert code == 0
    assert rows(text) == [["radius", "size"], ["0", "1"], ["1", "5"], ["2", "17"]]
    code, text = invoke(["growth", "--group", "lattice", "--rank", "2", "--radius", "3", "--format", "json"])
    doc = json.loads(text)
    assert doc["rows"][-1] == [3, 25]
    code, text = invoke(["growth", "--group", "box", "--bounds=-2:2,0:1", "--radius", "6"])
    assert rows(text)[-1] == ["6", "10"]


def test_gasket_decay_columns():
    _, text = invoke(SMALL["gasket-decay"])
    table = rows(text)
    assert table[0] == ["delta", "eps", "integral_D_eps", "mean_oscillation", "ratio"]
    assert [float(r[0]) for r in table[1:]] == [0.25, 0.125]


def test_isoperimetric_ball_is_one():
    _, text = invoke(["isoperimetric", "--shape", "ball", "--n", "4", "--r", "2.5"])
    row = dict(zip(*rows(text)))
    assert abs(float(row["ratio"]) - 1) <= 1e-12


def test_padic_output_exact():
    _, text = invoke(["padic", "--p", "3", "--series-k", "2"])
    last = rows(text)[-1]
    assert last == ["3", "2", "26", "26", "true", "1/27", "exact"]


def test_padic_norms_from_files(tmp_path):
    g = tmp_path / "g.json"
    m = tmp_path / "m.json"
    g.write_text(json.dumps({"n_points": 2, "edges": [[0, 1]]}))
    m.write_text(json.dumps([[0, 1, 4, 1], [1, 1, 6, 1]]))
    code, text = invoke(["padic-norms", "--graph", str(g), "--matrix", str(m), "--trials", "3"])
    assert code == 0
    doc = json.loads(text)
    assert doc["all_hold"] is True
    assert doc["sharpness"] == {"sup_witnesses_equal": True, "sum_witnesses_equal": True}
    assert all("/" in t["sup"]["lhs"] for t in doc["trials"])
    assert invoke(["padic-norms", "--graph", str(g)])[0] == 2


def test_config_and_flag_precedence(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"radius": 3, "group": "lattice"}))
    _, text = invoke(["growth", "--config", str(cfg)])
    assert rows(text)[-1] == ["3", "7"]
    _, text = invoke(["growth", "--config", str(cfg), "--radius", "1"])
    assert rows(text)[-1] == ["1", "3"]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"nonsense": 1}))
    assert invoke(["growth", "--config", str(bad)])[0] == 2


def test_output_file(tmp_path):
    out = tmp_path / "o.csv"
    code, text = invoke(["padic", "--p", "2", "--series-k", "1", "--output", str(out)])
    assert code == 0 and text == ""
    assert out.read_text().startswith("p,k,lhs")


def test_exit_codes():
    assert invoke(["growth", "--radius", "30", "--rank", "2", "--max-elements", "1000"])[0] == 3
    assert invoke(["gasket-decay", "--level", "12", "--max-vertices", "1000"])[0] == 3
    assert invoke(["sphere-poincare", "--samples", "100", "--max-samples", "10"])[0] == 3
    assert invoke(["growth", "--bogus"])[0] == 2
    assert invoke(["padic", "--p", "4"])[0] == 2
    assert invoke(["gasket-decay", "--level", "3", "--deltas", "0.125"])[0] == 2
    assert invoke(["riesz", "--n", "2", "--x", "0,0,0"])[0] == 2
    assert invoke(["growth", "--workers", "0"])[0] == 2
    assert invoke(["sphere-poincare", "--n", "2", "--kind", "cr", "--samples", "100"])[0] == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "metineq", "padic", "--p", "2", "--series-k", "0"],
                         capture_output=True, text=True, check=True)
    assert res.stdout.splitlines()[-1] == "2,0,1,1,true,1/2,exact"
