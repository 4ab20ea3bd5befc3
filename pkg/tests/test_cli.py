import csv
import json
import os
import subprocess
import sys

import numpy as np
import pytest

from wavejunction.cli import main
from wavejunction.diagnostics import DiagnosticReport
from wavejunction.full_field import parse_field_grid
from wavejunction.quadrant import parse_coefficients
from wavejunction.smatrix import SMatrix
from wavejunction.time_domain import read_index

WIDE_CFG = """
[geometry]
a1 = 3
a2 = 3
b1 = 5
b2 = 5

[run]
mode = solve
k = 5
bc = NN, DD, ND, DN
parity = even
N = 100
nx = 25
ny = 25
"""

SQUARE = ["--set", "geometry.a1=2", "--set", "geometry.a2=2", "--set", "geometry.b1=2", "--set", "geometry.b2=2"]
SKEW = ["--set", "geometry.a1=2", "--set", "geometry.a2=3", "--set", "geometry.b1=5", "--set", "geometry.b2=4"]


def manifest(out):
    with open(os.path.join(out, "manifest.json")) as fh:
        return json.load(fh)


def test_wide_solve(tmp_path):
    cfg = tmp_path / "wide.cfg"
    cfg.write_text(WIDE_CFG)
    out = str(tmp_path / "out")
    assert main(["solve", "--config", str(cfg), "--out", out]) == 0
    files = set(os.listdir(out))
    for bc in ("NN", "DD", "ND", "DN"):
        assert {f"field_{bc}.csv", f"coeffs_{bc}.csv", f"diagnostics_{bc}.json"} <= files
    assert {"energy.json", "field_full_even.csv", "manifest.json"} <= files
    energy = json.load(open(os.path.join(out, "energy.json")))
    assert energy["NN"]["energy_defect"] < 1e-4
    assert energy["full"]["flux_defect"] < 1e-3
    m = manifest(out)
    assert m["version"] and m["wall_time_s"] >= 0 and m["exit_status"] == 0
    assert m["config"]["N"] == 100
    assert sorted(m["files"]) == sorted(f for f in files if f != "manifest.json")


def test_outputs_round_trip(tmp_path):
    out = str(tmp_path)
    assert main(["solve"] + SKEW + ["--set", "run.k=3", "--set", "run.bc=ND", "--set", "run.N=20",
                                      "--set", "run.nx=11", "--set", "run.ny=11", "--out", out]) == 0
    coeffs = parse_coefficients(open(os.path.join(out, "coeffs_ND.csv")).read())
    assert len(coeffs["A"]) == 20
    rep = DiagnosticReport.from_json(open(os.path.join(out, "diagnostics_ND.json")).read())
    assert rep.bc == "ND" and rep.N == 20
    grid = parse_field_grid(open(os.path.join(out, "field_ND.csv")).read())
    assert grid.meta["bc"] == "ND"


def test_validate_square(tmp_path, capsys):
    assert main(["validate"] + SQUARE + ["--set", "run.k=4", "--set", "run.N=40", "--seed", "3", "--out", str(tmp_path)]) == 0
    text = capsys.readouterr().out
    assert "S unitarity" in text and "S reciprocity" in text
    report = json.load(open(tmp_path / "validate.json"))
    assert all(c["passed"] for c in report["checks"])


def test_timedomain_pulse(tmp_path):
    out = str(tmp_path)
    args = ["timedomain"] + SKEW + ["--set", "run.parity=even", "--set", "run.times=-5,0,5,10,15,20",
                                      "--set", "run.N=20", "--set", "run.N_k=24", "--set", "run.nx=15",
                                      "--set", "run.ny=15", "--out", out]
    assert main(args) == 0
    entries = read_index(os.path.join(out, "frames", "index.txt"))
    assert [t for _, t in entries] == [-5, 0, 5, 10, 15, 20]
    g = parse_field_grid(open(os.path.join(out, "frames", entries[0][0])).read())
    assert float(g.meta["t"]) == -5.0


def test_smatrix_and_sweep(tmp_path):
    out = str(tmp_path / "s")
    assert main(["smatrix"] + SQUARE + ["--set", "run.k=4", "--set", "run.N=30", "--out", out]) == 0
    s = SMatrix.from_json(open(os.path.join(out, "smatrix_flux.json")).read())
    assert s.unitarity_defect() < 1e-3
    out = str(tmp_path / "w")
    assert main(["sweep"] + SQUARE + ["--set", "run.k_min=1", "--set", "run.k_max=3", "--set", "run.N_k=3",
                                      "--set", "run.N=20", "--out", out]) == 0
    rows = list(csv.DictReader(open(os.path.join(out, "sweep.csv"))))
    assert len(rows) == 12 and {r["status"] for r in rows} == {"ok"}
    assert os.path.exists(os.path.join(out, "smatrix_sweep.csv"))


def test_exit_codes(tmp_path):
    assert main(["solve", "--out", str(tmp_path / "a")]) == 1
    assert main(["solve", "--config", str(tmp_path / "missing.cfg")]) == 3
    # k on the first even cut-on of a1 = 2
    assert main(["smatrix"] + SQUARE + ["--set", "run.k=1.5707963267948966", "--set", "run.N=10",
                                        "--out", str(tmp_path / "b")]) == 2
    assert manifest(str(tmp_path / "b"))["exit_status"] == 2
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main(["smatrix"] + SQUARE + ["--set", "run.k=4", "--set", "run.N=10", "--out", str(blocker / "x")]) == 3


def test_deterministic_and_parallel(tmp_path):
    base = ["sweep"] + SQUARE + ["--set", "run.k_min=1", "--set", "run.k_max=4.5", "--set", "run.N_k=4", "--set", "run.N=20"]
    outs = []
    for name, jobs in (("a", 1), ("b", 1), ("c", 3)):
        out = str(tmp_path / name)
        assert main(base + ["--out", out, "--jobs", str(jobs)]) == 0
        outs.append(open(os.path.join(out, "sweep.csv")).read())
    assert outs[0] == outs[1]
    a = [r for r in csv.reader(outs[0].splitlines())][1:]
    c = [r for r in csv.reader(outs[2].splitlines())][1:]
    for ra, rc in zip(a, c):
        for va, vc in zip(ra[3:12], rc[3:12]):
            if va:
                assert float(va) == pytest.approx(float(vc), rel=1e-12, abs=1e-15)


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "wavejunction", "solve", "--set", "run.k=1"],
                         capture_output=True, text=True)
    assert res.returncode == 1
    assert "geometry: missing a1, a2, b1, b2" in res.stderr
