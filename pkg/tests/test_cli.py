import csv
import io
import json
import subprocess
import sys

import pytest

from multcover.cli import dispatch, run


def _call(argv):
    out, err = io.StringIO(), io.StringIO()
    code = dispatch(argv, out, err)
    return code, out.getvalue(), err.getvalue()


def test_verdict_example():
    code, out, _ = _call(["verdict", "--d", "2", "--s", "1.7", "--psi", "q^-2",
                          "--mode", "homogeneous"])
    assert code == 0
    rep = json.loads(out)
    assert rep["results"]["value"] == "Zero"
    assert rep["schema_version"] == 1 and rep["subcommand"] == "verdict"


def test_gap_verdict_example():
    code, out, _ = _call(["verdict", "--d", "3", "--s", "2.5", "--psi", "gap:alpha=1.5",
                          "--mode", "inhomogeneous", "--theta", "0.3,0.4,0.5", "--json"])
    res = json.loads(out)["results"]
    assert code == 0 and res["value"] == "Zero"
    names = {r["name"]: r["classification"] for r in res["series"]}
    assert names["BV_conv"] == "Divergent" and names["BV_div"] == "Convergent"


def test_cover_materialize_emits_four_cubes(tmp_path):
    path = tmp_path / "cover.csv"
    code, out, _ = _call(["cover", "--d", "2", "--s", "1.5", "--N", "2", "--materialize",
                          "--emit", str(path)])
    assert code == 0 and out == ""
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["center_1", "center_2", "side"]
    assert len(rows) - 1 == 4
    rep = json.loads((tmp_path / "cover.csv.json").read_text())
    assert rep["results"]["total_cost"] == 4.0


def test_usage_errors_exit_64():
    assert _call([])[0] == 64
    assert _call(["cover", "--d", "2"])[0] == 64
    assert _call(["verdict", "--bogus"])[0] == 64
    assert _call(["estimate", "--what", "tail", "--d", "2", "--psi", "q^-2",
                  "--Q1", "2", "--Q2", "5"])[0] == 64


def test_domain_errors_exit_2():
    code, _, err = _call(["verdict", "--d", "2", "--s", "2", "--psi", "q^-2"])
    assert code == 2 and "domain error" in err
    assert _call(["cover", "--d", "3", "--s", "2.5", "--N", "2"])[0] == 2
    assert _call(["cost", "--d", "2", "--psi", "q^-2", "--dimfn", "x^2.5", "--Q", "10"])[0] == 2


def test_cap_exceeded_names_count():
    code, _, err = _call(["cover", "--d", "2", "--s", "1.5", "--N", "12", "--materialize",
                          "--cap", "10"])
    assert code != 0 and "exceeds cap 10" in err


@pytest.mark.parametrize("argv", [
    ["cover-scan", "--d", "2", "--s", "1.5", "--N-min", "2", "--N-max", "12"],
    ["cost", "--d", "2", "--psi", "q^-3", "--dimfn", "x^1.6", "--Q", "40", "--theta", "0.5,0.3"],
    ["cost", "--mode", "double", "--d", "2", "--psi", "q^-3", "--dimfn", "x^1.6", "--Q", "20"],
    ["estimate", "--what", "hits", "--d", "2", "--psi", "q^-1", "--x", "1/2,1/2", "--Q", "10"],
    ["estimate", "--what", "tail", "--d", "2", "--psi", "q^-2", "--Q1", "5", "--Q2", "20",
     "--samples", "20000", "--seed", "42"],
    ["estimate", "--what", "boxdim", "--d", "2", "--psi", "q^-2", "--theta", "0,0", "--Q1", "16",
     "--Q2", "32", "--j-min", "4", "--j-max", "8", "--seed", "42"],
])
def test_round_trip_from_echoed_argv(argv, tmp_path):
    path = tmp_path / "r.csv"
    assert _call(argv + ["--emit", str(path)])[0] == 0
    rep = json.loads((tmp_path / "r.csv.json").read_text())
    again = json.loads(json.dumps(run(rep["argv"]), default=float))
    assert again["results"] == rep["results"]
    assert rep["provenance"]


def test_hits_output():
    code, out, _ = _call(["estimate", "--what", "hits", "--d", "2", "--psi", "q^-3",
                          "--x", "0.5,0.5", "--Q", "10"])
    assert json.loads(out)["results"]["hits"] == [2, 4, 6, 8, 10]


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "multcover", "verdict", "--d", "2", "--psi",
                           "q^-1"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["results"]["value"] == "One"
