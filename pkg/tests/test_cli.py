import json
import os
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from graphflame import cycle
from graphflame.cli import main, run_experiment
from graphflame.config import parse_config
from graphflame.io import write_graph

SQUARE = """
[graph]
family = complete
args = 2

[source]
kind = power
p = 2

[datum]
kind = constant
value = 1.0

[run]
horizon = 2
n_times = 11
"""

ZERO = """
[graph]
family = cycle
args = 6

[source]
kind = zero

[datum]
kind = indicator
value = 2.0
vertices = v0

[run]
horizon = 3
n_times = 7
phi_vertex = v3
"""


def _csv(path):
    lines = Path(path).read_text().splitlines()
    return lines[0].split(","), [row.split(",") for row in lines[1:]]


@pytest.fixture(scope="module")
def blowup_report(tmp_path_factory):
    out = tmp_path_factory.mktemp("sq")
    return run_experiment(parse_config(SQUARE), out), out


def test_blowup_config(blowup_report):
    report, out = blowup_report
    assert report.ok, report.errors
    assert report.detector["verdict"] == "blowup"
    assert abs(report.detector["t_est"] - 1.0) <= 0.02
    assert report.classification["verdict"] in ("blowup_all_data", "out_of_theory")
    for name, p in report.manifest.items():
        assert name == "phi_trace.csv" or Path(p).is_file()


def test_reciprocal_csv_extrapolates_to_t_est(blowup_report):
    report, out = blowup_report
    header, rows = _csv(out / "reciprocal_norm.csv")
    assert header == ["t", "norm", "reciprocal", "fit"]
    t = np.array([float(r[0]) for r in rows[-2:]])
    fit = np.array([float(r[3]) for r in rows[-2:]])
    zero = t[0] - fit[0] * (t[1] - t[0]) / (fit[1] - fit[0])
    assert zero == pytest.approx(report.detector["t_est"], rel=1e-9)


def test_phi_omission_is_noted(blowup_report):
    report, out = blowup_report
    assert report.manifest["phi_trace.csv"].startswith("omitted")
    assert not (out / "phi_trace.csv").exists()
    assert json.loads((out / "report.json").read_text())["manifest"]["phi_trace.csv"].startswith("omitted")


def test_zero_source_bounded(tmp_path):
    report = run_experiment(parse_config(ZERO), tmp_path)
    assert report.ok, report.errors
    det = report.detector
    assert det["verdict"] == "bounded" and det["sup_norm"] <= 2.0
    header, rows = _csv(tmp_path / "norm_trace.csv")
    assert header == ["t", "norm"] and float(rows[-1][1]) <= det["supersolution_sup"] + 1e-12
    header, rows = _csv(tmp_path / "phi_trace.csv")
    phi = np.array([float(r[1]) for r in rows])
    assert header == ["t", "phi"] and np.ptp(phi) <= 1e-8
    header, rows = _csv(tmp_path / "solution.csv")
    assert header == ["t", "vertex", "value"] and len(rows) == 7 * 6
    assert _csv(tmp_path / "spectral_trace.csv")[0] == ["R", "lambda1", "residual"]


def test_outputs_are_byte_stable(tmp_path):
    cfg = parse_config(ZERO)
    run_experiment(cfg, tmp_path / "a")
    run_experiment(cfg, tmp_path / "b")
    names = sorted(p.name for p in (tmp_path / "a").glob("*.csv"))
    assert len(names) == 5
    for n in names:
        assert (tmp_path / "a" / n).read_bytes() == (tmp_path / "b" / n).read_bytes()


def test_missing_graph_file_is_an_ingest_error(tmp_path):
    cfg = parse_config("[graph]\nfile = /nonexistent/g.txt\n")
    report = run_experiment(cfg, tmp_path)
    assert not report.ok and report.errors[0]["stage"] == "ingest"
    assert report.detector is None
    assert json.loads((tmp_path / "report.json").read_text())["errors"][0]["stage"] == "ingest"
    (tmp_path / "exp.cfg").write_text("[graph]\nfile = missing.txt\n")
    assert main(["run", "--config", str(tmp_path / "exp.cfg"), "--out", str(tmp_path)]) == 1


def test_stage_failure_exit_code(tmp_path, capsys):
    (tmp_path / "exp.cfg").write_text(ZERO)
    code = main(["run", "--config", str(tmp_path / "exp.cfg"), "--out", str(tmp_path / "o"),
                 "--set", "phi_vertex=nowhere"])
    assert code == 2
    summary = json.loads(capsys.readouterr().out)
    assert summary["errors"][0]["stage"] == "detect"
    # stages before the failure still produce their traces
    assert (tmp_path / "o" / "solution.csv").is_file()


def test_run_subcommand_with_overrides(tmp_path, capsys):
    (tmp_path / "exp.cfg").write_text(ZERO)
    code = main(["run", "--config", str(tmp_path / "exp.cfg"), "--out", str(tmp_path / "o"),
                 "--set", "datum.value=0.5"])
    assert code == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["detector"]["sup_norm"] <= 0.5


def test_validate_spectrum_classify(tmp_path, capsys):
    write_graph(cycle(8), tmp_path / "c8.txt")
    assert main(["validate", "--graph", str(tmp_path / "c8.txt")]) == 0
    assert "8 vertices, 8 edges" in capsys.readouterr().out
    (tmp_path / "bad.txt").write_text("graph v2\nnode a 1\nnode a 1\n")
    assert main(["validate", "--graph", str(tmp_path / "bad.txt")]) == 1
    assert "line 3" in capsys.readouterr().err
    assert main(["spectrum", "--graph", str(tmp_path / "c8.txt"), "--center", "v0", "--radii", "1,2,3"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "R,lambda1,residual" and len(lines) == 4
    lams = [float(ln.split(",")[1]) for ln in lines[1:]]
    assert all(b <= a * (1 + 1e-10) for a, b in zip(lams, lams[1:]))
    (tmp_path / "exp.cfg").write_text(SQUARE)
    assert main(["classify", "--config", str(tmp_path / "exp.cfg")]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["verdict"] in ("blowup_all_data", "out_of_theory") and out["hypotheses"]


def test_manifest_with_jobs(tmp_path, capsys):
    (tmp_path / "zero.cfg").write_text(ZERO)
    (tmp_path / "zero2.cfg").write_text(ZERO.replace("value = 2.0", "value = 1.0"))
    (tmp_path / "all.txt").write_text("# configs\nzero.cfg\nzero2.cfg\n")
    code = main(["run", "--manifest", str(tmp_path / "all.txt"), "--jobs", "2", "--out", str(tmp_path / "o")])
    assert code == 0
    assert "zero2.cfg: ok" in capsys.readouterr().out
    for stem in ("zero", "zero2"):
        assert (tmp_path / "o" / stem / "report.json").is_file()


def test_log_level_env(tmp_path):
    (tmp_path / "exp.cfg").write_text(ZERO)
    env = dict(os.environ, GRAPHFLAME_LOG="info")
    proc = subprocess.run([sys.executable, "-m", "graphflame", "run", "--config", str(tmp_path / "exp.cfg"),
                           "--out", str(tmp_path / "o")], env=env, capture_output=True, text=True)
    assert proc.returncode == 0
    assert "stage spectrum" in proc.stderr
    env["GRAPHFLAME_LOG"] = "error"
    proc = subprocess.run([sys.executable, "-m", "graphflame", "validate", "--graph", str(tmp_path / "none.txt")],
                          env=env, capture_output=True, text=True)
    assert proc.returncode == 1 and "stage" not in proc.stderr
