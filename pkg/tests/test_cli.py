import json
import os
import shutil

import numpy as np
import pytest

from rotopulsator import io as rio
from rotopulsator.cli import main

CONFIGS = os.path.join(os.path.dirname(__file__), os.pardir, "configs")


def cfg(name):
    return os.path.join(CONFIGS, name)


def run(tmp_path, *argv):
    return main(list(argv) + ["--out", str(tmp_path)])


def write(tmp_path, text, name="c.ini"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_config_error_exit_code(tmp_path, capsys):
    path = write(tmp_path, "[shape]\nalphas = 0, pi\nbetas = 0, 0, 0\n")
    assert run(tmp_path, "verify", "--config", path) == 2
    assert "line 3" in capsys.readouterr().err


def test_bad_tolerance_flag(tmp_path):
    assert run(tmp_path, "solve-masses", "--config", cfg("irregular_quad.ini"), "--tol-feas", "-1") == 2


def test_antipodal_exit_code(tmp_path, capsys):
    assert run(tmp_path, "simulate", "--config", cfg("antipodal.ini")) == 3
    assert capsys.readouterr().err.startswith("singular configuration")


def test_two_body_simulation(tmp_path):
    assert run(tmp_path, "simulate", "--config", cfg("two_body_rest.ini")) == 0
    header, rows = rio.read_csv(tmp_path / "trajectory.csv")
    data = np.array(rows, dtype=float)
    assert header[0] == "t" and header[-1] == "drift" and len(header) == 1 + 2 * 8 + 6 + 1
    assert np.all(np.diff(data[:, 0]) > 0)
    assert data[-1, 0] == 0.5
    assert data[:, -1].max() < 1e-9
    diag = json.loads((tmp_path / "simulate.json").read_text())
    assert "reproducibility" in diag


def test_simulation_is_deterministic_and_round_trips(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(a, "simulate", "--config", cfg("triangle.ini")) == 0
    assert run(b, "simulate", "--config", cfg("triangle.ini")) == 0
    raw = (a / "trajectory.csv").read_bytes()
    assert raw == (b / "trajectory.csv").read_bytes()
    header, rows = rio.read_csv(a / "trajectory.csv")
    rio.write_csv(tmp_path / "copy.csv", header, rows)
    assert (tmp_path / "copy.csv").read_bytes() == raw


def test_reduce(tmp_path):
    assert run(tmp_path, "reduce", "--config", cfg("triangle.ini")) == 0
    header, rows = rio.read_csv(tmp_path / "reduced.csv")
    assert header == rio.REDUCED_HEADER
    r = np.array(rows, dtype=float)[:, 1]
    assert r.max() - r.min() > 0.05


def test_verify_triangle(tmp_path):
    assert run(tmp_path, "verify", "--config", cfg("triangle.ini")) == 0
    v = json.loads((tmp_path / "verify.json").read_text())["verdict"]
    assert v["pass"] is True and v["vacuous"] is False


def test_verify_constant_size_class(tmp_path):
    assert run(tmp_path, "verify", "--config", cfg("constant_size_pentagon.ini")) == 0
    v = json.loads((tmp_path / "verify.json").read_text())["verdict"]
    assert v["vacuous"] is True


def test_verify_irregular_quad(tmp_path):
    assert run(tmp_path, "verify", "--config", cfg("irregular_quad.ini")) == 0
    v = json.loads((tmp_path / "verify.json").read_text())["verdict"]
    assert v["solver_status"] == "Infeasible" and v["pass"] is False


def test_solve_masses(tmp_path):
    assert run(tmp_path, "solve-masses", "--config", cfg("triangle.ini")) == 0
    doc = json.loads((tmp_path / "solve.json").read_text())
    assert doc["status"] == "Feasible"
    assert np.allclose(doc["masses"], 1 / 3, atol=1e-10)


def test_check_lemmas(tmp_path):
    assert run(tmp_path, "check-lemmas", "--config", cfg("triangle.ini")) == 0
    doc = json.loads((tmp_path / "lemmas.json").read_text())
    assert "reproducibility" in doc


def test_sweep_oracle(tmp_path):
    assert run(tmp_path, "sweep", "--config", cfg("triangle_sweep.ini")) == 0
    header, rows = rio.read_csv(tmp_path / "sweep.csv")
    assert header[-4:] == ["status", "residual_norm", "alpha_regular", "beta_regular"]
    assert len(rows) == 360
    status = {int(row[0]): row[header.index("status")] for row in rows}
    assert {k for k, s in status.items() if s in ("Feasible", "Underdetermined")} == {240}
    assert {k for k, s in status.items() if s == "Singular"} == {0, 120}
    assert rows[240][header.index("alpha_regular")] == 1.0


def test_sweep_threads_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(a, "sweep", "--config", cfg("triangle_sweep.ini"), "--threads", "1") == 0
    assert run(b, "sweep", "--config", cfg("triangle_sweep.ini"), "--threads", "8") == 0
    assert (a / "sweep.csv").read_bytes() == (b / "sweep.csv").read_bytes()


def test_empty_sweep_writes_header_only(tmp_path):
    path = write(tmp_path, "[shape]\nalphas = 0, 2/3 pi, 0\n[sweep]\nalpha3 = 0, 2 pi, 0\n")
    assert run(tmp_path, "sweep", "--config", path) == 0
    header, rows = rio.read_csv(tmp_path / "sweep.csv")
    assert rows == [] and header[0] == "cell"


def test_r_grid_flag(tmp_path):
    assert run(tmp_path, "solve-masses", "--config", cfg("triangle.ini"), "--r-grid", "0.2,0.4,0.6,0.8") == 0
    doc = json.loads((tmp_path / "solve.json").read_text())
    assert doc["grid"] == [0.2, 0.4, 0.6, 0.8]
    assert run(tmp_path, "solve-masses", "--config", cfg("triangle.ini"), "--r-grid", "0.2,1.2") == 2


def test_console_script_installed():
    assert shutil.which("rotopulsator") is not None
