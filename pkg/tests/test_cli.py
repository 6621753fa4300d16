from __future__ import annotations

import json
import math
import xml.etree.ElementTree as ET
from pathlib import Path

import numpy as np
import pytest

from esdsim import gates as G
from esdsim.cli import DIAGNOSE_LAMBDAS, main
from esdsim.entanglement import InitialState
from esdsim.output import (
    ANALYTIC_COLUMNS,
    DIAGNOSTIC_COLUMNS,
    SERIES_COLUMNS,
    CSVFormatError,
    read_csv,
    write_series_csv,
)
from esdsim.protocol import ExperimentConfig, run_experiment
from esdsim.svgplot import Curve, Figure, PointSeries, render

DATA = Path(__file__).parent / "data"

SMALL_RUN = """\
shots: 500
repetitions: 3
seed: 11
mitigation: true
grid: {min: 0.0, max: 1.5, points: 4}
noise: {p1: 0.001, p2: 0.01, readout: [0.02, 0.03]}
sets:
  - {name: a2, alpha: 1/sqrt(2), qubits: [0, 1, 2, 3, 4]}
  - {name: a5, alpha: 1/sqrt(5), qubits: [10, 9, 8, 7, 6]}
"""


def write(path: Path, text: str) -> Path:
    path.write_text(text, encoding="utf-8")
    return path


def svg_circles(path: Path) -> list:
    root = ET.parse(path).getroot()
    return [el for el in root.iter() if el.tag.endswith("circle")]


class TestRun:
    def test_outputs(self, tmp_path):
        cfg = write(tmp_path / "run.yaml", SMALL_RUN)
        assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "out")]) == 0
        cols = read_csv(tmp_path / "out" / "a2.csv", SERIES_COLUMNS)
        assert len(cols["gamma_t"]) == 4 and np.all(cols["mitigated"] == 1)
        manifest = json.loads((tmp_path / "out" / "manifest.json").read_text())
        assert [s["name"] for s in manifest["sets"]] == ["a2", "a5"]
        a5 = manifest["sets"][1]
        assert a5["t_d"] == pytest.approx(math.log(2)) and a5["qubits"] == [10, 9, 8, 7, 6]
        assert manifest["sets"][0]["t_d"] == "none"
        assert len(a5["seeds"]["system"]) == 4 and len(a5["seeds"]["calibration"]) == 3

    def test_rerun_byte_identical(self, tmp_path):
        cfg = write(tmp_path / "run.yaml", SMALL_RUN)
        for name in ("x", "y"):
            assert main(["run", "--config", str(cfg), "--out", str(tmp_path / name)]) == 0
        for f in ("a2.csv", "a5.csv", "manifest.json"):
            assert (tmp_path / "x" / f).read_bytes() == (tmp_path / "y" / f).read_bytes()

    def test_seed_override_changes_output(self, tmp_path):
        cfg = write(tmp_path / "run.yaml", SMALL_RUN)
        main(["run", "--config", str(cfg), "--out", str(tmp_path / "x")])
        main(["run", "--config", str(cfg), "--out", str(tmp_path / "y"), "--seed", "12"])
        assert (tmp_path / "x" / "a2.csv").read_bytes() != (tmp_path / "y" / "a2.csv").read_bytes()

    def test_sets_and_no_mitigation(self, tmp_path):
        cfg = write(tmp_path / "run.yaml", SMALL_RUN)
        assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o"), "--sets", "1", "--no-mitigation"]) == 0
        assert not (tmp_path / "o" / "a5.csv").exists()
        assert np.all(read_csv(tmp_path / "o" / "a2.csv")["mitigated"] == 0)

    def test_empty_grid(self, tmp_path, capsys):
        cfg = write(tmp_path / "run.yaml", "alpha: 0.5\ngrid: {values: []}\n")
        assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
        assert "grid must be non-empty" in capsys.readouterr().err

    def test_unknown_key(self, tmp_path, capsys):
        cfg = write(tmp_path / "run.yaml", "alpha: 0.5\nshotz: 10\n")
        assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
        assert "shotz" in capsys.readouterr().err

    def test_missing_config(self, tmp_path):
        assert main(["run", "--config", str(tmp_path / "nope.yaml"), "--out", str(tmp_path / "o")]) == 3

    def test_missing_argument(self):
        assert main(["run"]) == 2


class TestAnalytic:
    @pytest.mark.parametrize(
        "alpha, td, tb",
        [
            ("1/sqrt(5)", math.log(2), math.log(2)),
            ("1/sqrt(3)", -math.log(1 - 1 / math.sqrt(2)), math.log(math.sqrt(2))),
            ("1/sqrt(2)", "none", "none"),
        ],
    )
    def test_times(self, tmp_path, alpha, td, tb):
        out = tmp_path / "a.csv"
        assert main(["analytic", "--alpha", alpha, "--out", str(out)]) == 0
        manifest = json.loads(out.with_suffix(".manifest.json").read_text())
        assert manifest["t_d"] == (td if td == "none" else pytest.approx(td, abs=1e-9))
        assert manifest["t_b"] == (tb if tb == "none" else pytest.approx(tb, abs=1e-9))

    def test_lambda_and_grid(self, tmp_path):
        out = tmp_path / "a.csv"
        assert main(["analytic", "--lambda", str(math.pi / 2), "--grid", "0:2:5", "--out", str(out)]) == 0
        cols = read_csv(out, ANALYTIC_COLUMNS)
        np.testing.assert_allclose(cols["c_sys"], np.exp(-2 * cols["gamma_t"]), atol=1e-14)

    def test_bad_alpha(self, tmp_path):
        assert main(["analytic", "--alpha", "two", "--out", str(tmp_path / "a.csv")]) == 2

    def test_bad_grid(self, tmp_path):
        assert main(["analytic", "--alpha", "0.5", "--grid", "0:1", "--out", str(tmp_path / "a.csv")]) == 2


class TestPlot:
    def _series(self, tmp_path, name, grid):
        cfg = ExperimentConfig(InitialState.from_alpha(0.5), grid=grid, shots=200, repetitions=2)
        path = tmp_path / f"{name}.csv"
        write_series_csv(path, run_experiment(cfg))
        return path

    def test_single_point(self, tmp_path):
        csv = tmp_path / "one.csv"
        cfg = ExperimentConfig(InitialState.from_alpha(0.5), grid=(0.5,), shots=200, repetitions=2, target="system")
        write_series_csv(csv, run_experiment(cfg))
        out = tmp_path / "f.svg"
        assert main(["plot", str(csv), "--out", str(out)]) == 0
        assert len(svg_circles(out)) == 1 + 1  # marker plus its legend swatch

    def test_mismatched_grids(self, tmp_path):
        a = self._series(tmp_path, "a", (0.0, 1.0))
        b = self._series(tmp_path, "b", (0.25, 0.5, 2.0))
        analytic = tmp_path / "an.csv"
        main(["analytic", "--alpha", "0.5", "--grid", "0:2:9", "--out", str(analytic)])
        out = tmp_path / "f.svg"
        assert main(["plot", str(a), str(b), "--analytic", str(analytic), "--title", "x<y", "--out", str(out)]) == 0
        assert len(svg_circles(out)) == 2 * 2 + 2 * 3 + 4
        assert "x&lt;y" in out.read_text()

    def test_deterministic(self, tmp_path):
        a = self._series(tmp_path, "a", (0.0, 1.0))
        main(["plot", str(a), "--out", str(tmp_path / "1.svg")])
        main(["plot", str(a), "--out", str(tmp_path / "2.svg")])
        assert (tmp_path / "1.svg").read_bytes() == (tmp_path / "2.svg").read_bytes()

    def test_golden(self):
        fig = Figure(
            title="golden",
            points=[PointSeries([0.0, 1.0, 2.0], [0.8, 0.3, 0.0], [0.02, 0.03, 0.0], "#1f77b4", "system")],
            curves=[Curve([0.0, 1.0, 2.0], [0.0, 0.2, 0.5], "#ff7f0e", "theory environment")],
        )
        assert render(fig) == (DATA / "golden.svg").read_text(encoding="utf-8")

    def test_bad_csv(self, tmp_path):
        bad = write(tmp_path / "bad.csv", "x,y\n1,2\n")
        assert main(["plot", str(bad), "--out", str(tmp_path / "f.svg")]) == 2


class TestDiagnose:
    def test_default_noise(self, tmp_path):
        out = tmp_path / "d.csv"
        assert main(["diagnose", "--out", str(out)]) == 0
        cols = read_csv(out, DIAGNOSTIC_COLUMNS)
        np.testing.assert_allclose(cols["lambda_over_pi"], DIAGNOSE_LAMBDAS)
        assert np.all(cols["p0"] < 1)

    def test_noiseless(self, tmp_path):
        cfg = write(tmp_path / "n.yaml", "noise: null\n")
        out = tmp_path / "d.csv"
        assert main(["diagnose", "--config", str(cfg), "--out", str(out)]) == 0
        np.testing.assert_allclose(read_csv(out)["p0"], 1.0, atol=1e-10)

    def test_sampled_rerun_identical(self, tmp_path):
        cfg = write(tmp_path / "n.yaml", "shots: 2000\nseed: 4\n")
        for name in ("1.csv", "2.csv"):
            assert main(["diagnose", "--config", str(cfg), "--out", str(tmp_path / name)]) == 0
        assert (tmp_path / "1.csv").read_bytes() == (tmp_path / "2.csv").read_bytes()

    def test_unknown_key(self, tmp_path):
        cfg = write(tmp_path / "n.yaml", "alpha: 0.5\n")
        assert main(["diagnose", "--config", str(cfg), "--out", str(tmp_path / "d.csv")]) == 2


class TestTranspileCheck:
    def test_passes(self, capsys):
        assert main(["transpile-check", "--seed", "3", "--n", "200"]) == 0
        assert "200/200" in capsys.readouterr().out

    def test_zero(self):
        assert main(["transpile-check", "--n", "0"]) == 2

    def test_corrupted_dressing(self, monkeypatch, capsys):
        broken = tuple(r for r in G.CX_TO_ECR if r[0] is not G.GateKind.RZ)
        monkeypatch.setattr(G, "CX_TO_ECR", broken)
        assert main(["transpile-check", "--seed", "3", "--n", "20"]) == 1
        captured = capsys.readouterr()
        assert "FAIL" in captured.out and "failing circuit seed" in captured.err


class TestCSV:
    def test_round_trip_exact(self, tmp_path):
        cfg = ExperimentConfig(InitialState.from_alpha(0.5), grid=(0.0, 0.1, 0.7), shots=300, repetitions=3)
        series = run_experiment(cfg)
        path = tmp_path / "s.csv"
        write_series_csv(path, series)
        cols = read_csv(path, SERIES_COLUMNS)
        np.testing.assert_array_equal(cols["c_sys_mean"], series.system.mean)
        np.testing.assert_array_equal(cols["c_env_stderr"], series.environment.stderr)
        np.testing.assert_array_equal(cols["gamma_t"], cfg.grid)

    def test_lf_only(self, tmp_path):
        cfg = ExperimentConfig(InitialState.from_alpha(0.5), grid=(0.0,), exact=True, target="environment")
        path = tmp_path / "s.csv"
        write_series_csv(path, run_experiment(cfg))
        raw = path.read_bytes()
        assert b"\r" not in raw and raw.endswith(b"\n")
        assert np.isnan(read_csv(path)["c_sys_mean"][0])

    def test_header_checked(self, tmp_path):
        path = write(tmp_path / "s.csv", "gamma_t,c_sys,c_env\n0,1,0\n")
        with pytest.raises(CSVFormatError):
            read_csv(path, SERIES_COLUMNS)

    def test_bad_cell(self, tmp_path):
        path = write(tmp_path / "s.csv", "gamma_t,c_sys,c_env\n0,x,0\n")
        with pytest.raises(CSVFormatError):
            read_csv(path)
