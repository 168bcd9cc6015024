import csv
import json
import os
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from curvham import cli
from curvham.errors import ConfigurationError, ConvergenceError

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

RING = {
    "surface": {"kind": "ring", "a": 1.0},
    "grid": {"N1": 256},
    "field": {"potential": {"kind": "flux", "alpha": 0.0}},
    "solver": {"k": 5},
}


def _write(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg), encoding="utf-8")
    return path


def _rows(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def _run(tmp_path, cfg, *extra, out="out"):
    path = _write(tmp_path, cfg)
    return cli.main(["run", str(path), "--out", str(tmp_path / out), *extra])


class TestRun:
    def test_ring_first_energy(self, tmp_path):
        assert _run(tmp_path, RING) == 0
        rows = _rows(tmp_path / "out" / "eigenvalues.csv")
        assert list(rows[0]) == ["index", "energy", "residual", "degeneracy_group"]
        assert float(rows[0]["energy"]) == pytest.approx(-0.125, abs=1e-5)
        assert [int(r["degeneracy_group"]) for r in rows] == [0, 1, 1, 2, 2]

    def test_gauge_check(self, tmp_path, capsys):
        assert _run(tmp_path, RING, "--verify", "gauge") == 0
        report = json.loads((tmp_path / "out" / "report.json").read_text())
        assert report["gauge_max_drift"] <= 1e-12
        assert "gauge_max_drift" in json.loads(capsys.readouterr().out)

    @pytest.mark.parametrize("name", ["pauli_cylinder.json", "torus_tabulated.json", "sphere.json"])
    def test_gauge_check_on_shipped_configs(self, tmp_path, name):
        assert cli.main(["run", str(CONFIGS / name), "--out", str(tmp_path), "--verify", "gauge"]) == 0
        report = json.loads(next(tmp_path.glob("*report.json")).read_text())
        assert report["gauge_max_drift"] <= 1e-12
        assert report["hermiticity_residual"] <= 1e-13 * report["scale"]

    def test_report_contents(self, tmp_path):
        assert _run(tmp_path, RING) == 0
        report = json.loads((tmp_path / "out" / "report.json").read_text())
        for key in ("config", "dimension", "backend", "hermiticity_residual", "max_residual", "eigenvalues", "timings"):
            assert key in report
        assert report["dimension"] == 256
        assert report["max_residual"] <= 1e-10 * report["scale"]

    def test_config_echo_round_trip(self, tmp_path):
        cfg = json.loads((CONFIGS / "torus_tabulated.json").read_text())
        assert _run(tmp_path, cfg) == 0
        echo = json.loads((tmp_path / "out" / "report.json").read_text())["config"]
        assert echo == cfg
        assert cli.RunConfig.from_dict(echo) == cli.RunConfig.from_dict(cfg)

    def test_deterministic_csv(self, tmp_path):
        cfg = json.loads((CONFIGS / "sphere.json").read_text())
        assert _run(tmp_path, cfg, out="a") == 0
        assert _run(tmp_path, cfg, out="b") == 0
        for name in ("sphere_eigenvalues.csv", "sphere_states.csv"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_shortest_round_trip_floats(self, tmp_path):
        assert _run(tmp_path, RING) == 0
        report = json.loads((tmp_path / "out" / "report.json").read_text())
        energies = [r["energy"] for r in _rows(tmp_path / "out" / "eigenvalues.csv")]
        assert energies == [repr(e) for e in report["eigenvalues"]]

    def test_seed_override_is_echoed(self, tmp_path):
        cfg = json.loads((CONFIGS / "sphere.json").read_text())
        assert _run(tmp_path, cfg, "--seed", "7") == 0
        report = json.loads((tmp_path / "out" / "sphere_report.json").read_text())
        assert report["config"]["solver"]["seed"] == 7

    def test_pauli_eigenvectors(self, tmp_path):
        assert cli.main(["run", str(CONFIGS / "pauli_cylinder.json"), "--out", str(tmp_path)]) == 0
        rows = _rows(tmp_path / "states.csv")
        assert list(rows[0]) == ["state", "q1", "q2", "re", "im", "spin"]
        assert len(rows) == 2 * 24 * 12
        amp = np.array([float(r["re"]) + 1j * float(r["im"]) for r in rows])
        q1 = np.array([float(r["q1"]) for r in rows])
        q2 = np.array([float(r["q2"]) for r in rows])
        assert np.unique(q1).size == 24 and np.unique(q2).size == 12
        # weighted norm on the cylinder: a dtheta dz per node
        w = (2 * np.pi / 24) * (np.pi / 13)
        assert np.sum(w * np.abs(amp) ** 2) == pytest.approx(1.0, abs=1e-10)

    def test_convergence_against_oracle(self, tmp_path):
        cfg = dict(RING, checks={"convergence": {"sizes": [64, 128, 256]}}, solver={"k": 3})
        assert _run(tmp_path, cfg) == 0
        conv = json.loads((tmp_path / "out" / "report.json").read_text())["convergence"]
        assert conv["reference"] == "oracle"
        assert conv["slope"] == pytest.approx(2.0, abs=0.1)

    def test_convergence_without_reference(self, tmp_path):
        cfg = json.loads((CONFIGS / "torus_tabulated.json").read_text())
        cfg["checks"] = {"convergence": {"sizes": [8, 16, 32]}}
        assert _run(tmp_path, cfg) == 2
        cfg["checks"] = {"convergence": {"sizes": [8, 16, 32, 64]}}
        cfg["solver"] = {"k": 2}
        assert _run(tmp_path, cfg) == 0
        conv = json.loads((tmp_path / "out" / "report.json").read_text())["convergence"]
        assert conv["reference"] == "finest grid"

    def test_solver_failure_exit_code(self, tmp_path, monkeypatch, capsys):
        def fail(*args, **kwargs):
            raise ConvergenceError("no convergence", eigenvalues=np.zeros(2), residuals=np.array([1e-3, 2e-3]))

        monkeypatch.setattr(cli.spc, "eigen_lowest", fail)
        assert _run(tmp_path, RING) == 1
        err = capsys.readouterr().err
        assert "solver failure" in err and "0.002" in err


class TestConfigErrors:
    @pytest.mark.parametrize(
        "patch,field",
        [
            ({"surface": {"kind": "cone", "a": 1.0}}, "surface.kind"),
            ({"surface": {"kind": "ring", "a": 1.0, "b": 2}}, "surface"),
            ({"surface": {"kind": "cylinder", "a": 1.0}, "grid": {"N1": 8, "N2": 8}}, "surface.L"),
            ({"solver": {"k": 500}}, "solver.k"),
            ({"grid": {"N1": 2}}, "grid.N1"),
            ({"particle": "spin0", "field": {"soc": {"E": [0, 0, 1]}}}, "field.soc"),
        ],
    )
    def test_invalid_config(self, tmp_path, capsys, patch, field):
        assert _run(tmp_path, {**RING, **patch}) == 2
        err = capsys.readouterr().err
        assert err.startswith("configuration error: ")
        assert field in err

    def test_unknown_top_level_key(self):
        with pytest.raises(ConfigurationError, match="extra"):
            cli.RunConfig.from_dict({**RING, "extra": 1})

    def test_pauli_custom_potential_needs_field(self):
        cfg = json.loads((CONFIGS / "torus_tabulated.json").read_text())
        cfg["particle"] = "pauli"
        with pytest.raises(ConfigurationError) as info:
            cli.RunConfig.from_dict(cfg)
        assert info.value.field == "field.potential.b_cart"
        cfg["field"]["potential"]["b_cart"] = [0.0, 0.0, 0.1]
        cli.RunConfig.from_dict(cfg)

    def test_bad_json_reports_line(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text('{\n  "surface": {"kind": "ring"},\n  "grid": {"N1": 8,}\n}\n')
        assert cli.main(["run", str(path)]) == 2
        assert "line 3" in capsys.readouterr().err

    def test_table_shape_mismatch(self):
        cfg = json.loads((CONFIGS / "torus_tabulated.json").read_text())
        cfg["field"]["V"]["values"] = [0.0, 1.0]
        with pytest.raises(ConfigurationError) as info:
            cli.RunConfig.from_dict(cfg)
        assert info.value.field == "field.V.values"

    def test_states_beyond_k(self, tmp_path):
        cfg = dict(RING, outputs={"eigenvectors": "v.csv", "states": [9]})
        assert _run(tmp_path, cfg) == 2


class TestVerify:
    def test_curvature_suite(self, tmp_path, capsys):
        out = tmp_path / "curv.json"
        assert cli.main(["verify", "curvature", "--out", str(out)]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert all(line.startswith("PASS") for line in lines)
        report = json.loads(out.read_text())
        assert report["suite"] == "curvature" and report["passed"]
        assert all("measured" in c and "expected" in c for c in report["checks"])

    def test_unknown_suite(self):
        with pytest.raises(SystemExit) as info:
            cli.main(["verify", "nonsense"])
        assert info.value.code == 2


def test_console_script_with_worker_cap(tmp_path):
    path = _write(tmp_path, dict(RING, grid={"N1": 32}))
    env = dict(os.environ, CURVHAM_WORKERS="1")
    proc = subprocess.run(
        [sys.executable, "-m", "curvham.cli", "run", str(path), "--out", str(tmp_path / "o")],
        env=env, capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0, proc.stderr
    assert json.loads(proc.stdout)["dimension"] == 32


def test_invalid_worker_cap(tmp_path):
    path = _write(tmp_path, dict(RING, grid={"N1": 32}))
    env = dict(os.environ, CURVHAM_WORKERS="many")
    proc = subprocess.run(
        [sys.executable, "-m", "curvham.cli", "run", str(path), "--out", str(tmp_path / "o")],
        env=env, capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 2
    assert "CURVHAM_WORKERS" in proc.stderr
