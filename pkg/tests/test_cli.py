import csv
import subprocess
import sys

import numpy as np
import pytest

from infodesign.cli import CSV_COLUMNS, main
from infodesign.moments import import_sdpa


def _rows(path):
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def test_equilibrium_prior(capsys):
    assert main(["equilibrium", "two_link_affine", "--nu", "0"]) == 0
    assert "y = (4.1667, 0.8333)" in capsys.readouterr().out


def test_equilibrium_full_information(capsys):
    assert main(["equilibrium", "two_link_affine", "--policy", "full-info", "--nu", "0.25"]) == 0
    out = capsys.readouterr().out
    y = [float(v) for v in out.split("y = (")[1].split(")")[0].split(",")]
    np.testing.assert_allclose(y, [3.23, 0.52], atol=5e-3)


def test_equilibrium_matrix_policy_and_csv(tmp_path, capsys):
    out = tmp_path / "eq.csv"
    assert main(["equilibrium", "two_link_affine", "--policy", "0.5,0.5;0,1", "--nu", "0.5", "--csv", str(out)]) == 0
    text = out.read_text()
    assert text.startswith("# infodesign ")
    assert "# scenario sha256 " in text
    rows = _rows(out)
    assert list(rows[0]) == CSV_COLUMNS


def test_input_errors(tmp_path, capsys):
    assert main(["equilibrium", str(tmp_path / "missing.scn")]) == 1
    bad = tmp_path / "bad.scn"
    bad.write_text("states: [a, b]\nprior: [1.0, 0.0]\n")
    assert main(["first-best", str(bad)]) == 1
    assert main(["equilibrium", "two_link_affine", "--nu", "1.5"]) == 1
    assert main(["equilibrium", "two_link_affine", "--policy", "1,x"]) == 1
    with pytest.raises(SystemExit) as exc:
        main(["design", "two_link_affine", "--nu", "abc"])
    assert exc.value.code == 1
    assert "error" in capsys.readouterr().err


def test_first_best(capsys):
    assert main(["first-best", "two_link_affine"]) == 0
    assert "expected cost" in capsys.readouterr().out


def test_design_certified(tmp_path, capsys):
    out = tmp_path / "d.csv"
    code = main(["design", "two_link_affine", "--mode", "diagonal", "--nu", "1", "--starts", "100", "--seed", "7",
                 "--certify", "--csv", str(out)])
    assert code == 0
    row = _rows(out)[0]
    cost, lb = float(row["cost"]), float(row["lower_bound"])
    assert (cost - lb) / cost <= 1e-3
    assert row["wall_ms"] == "0"
    text = capsys.readouterr().out
    assert "participant flows (columns = atoms)" in text
    assert "4.08" in text and "2.13" in text


def test_design_public_single_message(capsys):
    assert main(["design", "two_link_affine", "--mode", "public", "--atoms", "1", "--nu", "0.5", "--starts", "2"]) == 0
    assert "cost = 113.333333" in capsys.readouterr().out


def test_sweep_at_zero_participation(tmp_path):
    out = tmp_path / "s.csv"
    assert main(["sweep", "two_link_affine", "--grid", "0", "--modes", "diagonal,private,public", "--starts", "3",
                 "--out", str(out)]) == 0
    rows = _rows(out)
    costs = {r["mode"]: float(r["cost"]) for r in rows}
    assert set(costs) == {"first-best", "diagonal", "private", "public", "full-info", "no-info"}
    design = [costs[k] for k in ("diagonal", "private", "public", "full-info", "no-info")]
    assert np.ptp(design) <= 1e-6
    assert costs["first-best"] <= min(design)


def test_sweep_rejects_bad_grid(tmp_path):
    assert main(["sweep", "two_link_affine", "--grid", "0,2", "--out", str(tmp_path / "x.csv")]) == 1


def test_sweep_is_byte_identical(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["sweep", "two_link_affine", "--grid", "0.5,1", "--modes", "diagonal,private", "--starts", "10", "--seed", "3"]
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b), "--threads", "2"]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_export_sdpa(tmp_path, capsys):
    out = tmp_path / "p.dat-s"
    assert main(["export-sdpa", "two_link_affine", "--nu", "1", "--out", str(out), "--solve"]) == 0
    prob = import_sdpa(out)
    assert prob.block_sizes[0] == (2 + 1) * 2 + 1
    assert "value = 109.6481" in capsys.readouterr().out


def test_certify(capsys):
    assert main(["certify", "two_link_affine", "--mode", "diagonal", "--nu", "1", "--starts", "20"]) == 0
    assert "rank check: rank-1-admissible" in capsys.readouterr().out


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "infodesign.cli", "--version"], capture_output=True, text=True)
    assert res.returncode == 0
    assert res.stdout.strip() == "infodesign 0.1.0"
