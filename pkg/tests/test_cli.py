import csv
import json
import subprocess
import sys

import pytest

from initjump.cli import main

ORACLE = {"Q": "1", "A": "1", "B": "0", "F": "0", "K0": "0", "K1": "0",
          "pi0": "1", "pi1": "1", "t_end": 1.0, "x0_min": 0.0, "x0_max": 1.0,
          "solver": {"fan_size": 5}}


def _write(tmp_path, doc, name="problem.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc) if isinstance(doc, dict) else doc)
    return str(path)


def _header(path):
    with open(path, newline="") as fh:
        return next(csv.reader(fh))


def _column(path, name):
    with open(path, newline="") as fh:
        return [float(row[name]) for row in csv.DictReader(fh)]


def test_validate_constants(tmp_path, capsys):
    doc = dict(ORACLE, A="2")
    assert main(["validate", _write(tmp_path, doc)]) == 0
    assert "gamma=2.0" in capsys.readouterr().out


def test_validate_sign_change(tmp_path):
    assert main(["validate", _write(tmp_path, dict(ORACLE, A="t - 0.5"))]) == 1


@pytest.mark.parametrize("text", ["{not json", json.dumps(dict(ORACLE, colour="red")),
                                  json.dumps({"Q": "1"}), json.dumps(dict(ORACLE, A="2x"))])
def test_bad_documents(tmp_path, text):
    assert main(["validate", _write(tmp_path, text)]) == 64


def test_missing_file(tmp_path):
    assert main(["validate", str(tmp_path / "absent.json")]) == 64


def test_bad_arguments():
    with pytest.raises(SystemExit) as info:
        main(["converge"])
    assert info.value.code == 64


def test_converge_paper(tmp_path):
    out = tmp_path / "out"
    assert main(["converge", _write(tmp_path, ORACLE), "--out", str(out), "--threads", "2"]) == 0
    path = out / "convergence.csv"
    assert _header(path) == ["epsilon", "t0", "sup_y", "sup_yt", "sup_yx", "defect",
                             "w_at_t0", "ratio"]
    ratios = _column(path, "ratio")
    assert all(b < a for a, b in zip(ratios, ratios[1:]))
    verdict = json.loads((out / "verdict.json").read_text())
    assert verdict["pass"] is True and verdict["jumps_mode"] == "paper"


def test_converge_zero_jumps(tmp_path):
    out = tmp_path / "out"
    code = main(["converge", _write(tmp_path, ORACLE), "--jumps", "zero", "--out", str(out)])
    assert code == 2
    assert all(v >= 0.9 for v in _column(out / "convergence.csv", "sup_y"))


def test_converge_without_pi1(tmp_path):
    out = tmp_path / "out"
    doc = dict(ORACLE, pi1="0")
    assert main(["converge", _write(tmp_path, doc), "--out", str(out)]) == 1
    assert main(["converge", _write(tmp_path, doc), "--no-strict", "--out", str(out)]) == 0
    assert json.loads((out / "verdict.json").read_text())["fitted_K"] < 1e-12


def test_numerical_failure(tmp_path, capsys):
    doc = dict(ORACLE, F="exp(800*t)")
    code = main(["converge", _write(tmp_path, doc), "--out", str(tmp_path)])
    assert code == 65
    assert "label=" in capsys.readouterr().err


def test_eps_list_must_decrease(tmp_path):
    assert main(["converge", _write(tmp_path, ORACLE), "--eps", "1e-3,1e-2",
                 "--out", str(tmp_path)]) == 64


def test_determinism_across_threads(tmp_path):
    doc = dict(ORACLE, A="2 + sin(t)", K1="exp(-(t-s))", Q="1 + 0.3*x",
               solver={"fan_size": 9})
    src = _write(tmp_path, doc)
    for n in (1, 8):
        assert main(["converge", src, "--threads", str(n), "--out", str(tmp_path / f"t{n}"),
                     "--eps", "1e-2,1e-3"]) == 0
    for name in ("convergence.csv", "verdict.json"):
        assert (tmp_path / "t1" / name).read_bytes() == (tmp_path / "t8" / name).read_bytes()


def test_output_headers(tmp_path):
    src = _write(tmp_path, ORACLE)
    out = str(tmp_path)
    assert main(["solve", src, "--epsilon", "0.05", "--out", out]) == 0
    assert _header(tmp_path / "trajectories.csv") == ["epsilon", "label", "t", "x", "z", "w"]
    assert main(["jumps", src, "--out", out]) == 0
    assert _header(tmp_path / "jumps_delta0.csv") == ["label", "delta0"]
    assert _header(tmp_path / "jumps_delta.csv") == ["t", "label", "delta"]
    assert main(["compare", src, "--epsilon", "0.01", "--out", out]) == 0
    assert _header(tmp_path / "difference.csv")[0] == "epsilon"
    assert main(["fan", src, "--out", out]) == 0


def test_degenerate_solve_has_empty_epsilon(tmp_path):
    assert main(["solve", _write(tmp_path, ORACLE), "--out", str(tmp_path)]) == 0
    with open(tmp_path / "trajectories.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert rows[0]["epsilon"] == ""
    assert float(rows[-1]["z"]) == 2.0


def test_jumps_defect_printed(tmp_path, capsys):
    doc = dict(ORACLE, K1="1", jumps={"mode": "custom", "delta0_expr": "0.5",
                                      "delta_expr": "0"})
    assert main(["jumps", _write(tmp_path, doc), "--out", str(tmp_path)]) == 0
    assert "defect=0.5" in capsys.readouterr().out


def test_oracle_command(capsys):
    args = ["oracle", "--A", "1", "--B", "0", "--F", "0", "--pi0", "1", "--pi1", "1",
            "--epsilon", "0.1", "--t", "0.2"]
    assert main(args) == 0
    assert "z=1.8646647167633872" in capsys.readouterr().out


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "initjump", "validate",
                           _write(tmp_path, ORACLE)], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("gamma=1.0")
