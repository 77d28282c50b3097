"""Batch front end: run experiments from config files and emit reports and CSV traces."""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .blowup import Detection, classify, detect_blowup, phi_trace
from .config import ConfigError, ExperimentConfig, build_datum, build_graph, build_source, load_config
from .graph import ball, linf_norm, validate_graph
from .io import (GraphFormatError, norm_rows, phi_rows, read_graph, reciprocal_rows, solution_rows,
                 spectral_rows, write_csv)
from .semilinear import (BallSup, GlobalWeighted, MildSpaceParams, datum_admissibility, exhaust_solve,
                         picard_solve)
from .spectral import (SpectralEstimate, bottom_eigenpair, dirichlet_generator, full_generator,
                       lambda1_estimate)

__all__ = ["RunReport", "run_experiment", "emit_plot_data", "main"]

log = logging.getLogger("graphflame")

EXIT_OK, EXIT_CONFIG, EXIT_STAGE = 0, 1, 2


class StageError(RuntimeError):
    pass


@dataclass
class RunReport:
    config: ExperimentConfig
    spectral: dict | None = None
    classification: dict | None = None
    solver: dict | None = None
    detector: dict | None = None
    timings: dict = field(default_factory=dict)
    manifest: dict = field(default_factory=dict)
    errors: list = field(default_factory=list)  # [{"stage", "error"}]
    # in-memory results used by emit_plot_data
    estimate: SpectralEstimate | None = field(default=None, repr=False)
    path: object = field(default=None, repr=False)
    t_grid: np.ndarray | None = field(default=None, repr=False)
    detection: Detection | None = field(default=None, repr=False)
    phi: object = field(default=None, repr=False)

    @property
    def ok(self) -> bool:
        return not self.errors

    def as_dict(self) -> dict:
        return _jsonable({
            "config": self.config.to_text(),
            "spectral": self.spectral,
            "classification": self.classification,
            "solver": self.solver,
            "detector": self.detector,
            "timings": self.timings,
            "manifest": self.manifest,
            "errors": self.errors,
        })


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


class _Stages:
    def __init__(self, report: RunReport):
        self.report = report

    def __call__(self, name):
        return _Stage(self.report, name)


class _Stage:
    def __init__(self, report, name):
        self.report, self.name = report, name

    def __enter__(self):
        self.t0 = time.perf_counter()
        log.info("stage %s", self.name)
        return self

    def __exit__(self, exc_type, exc, tb):
        self.report.timings[self.name] = time.perf_counter() - self.t0
        if exc is not None:
            log.error("stage %s failed: %s", self.name, exc)
            self.report.errors.append({"stage": self.name, "error": f"{exc_type.__name__}: {exc}"})
            raise StageError(self.name) from exc
        return False


def _spectrum(g, center, radii):
    if radii:
        est = lambda1_estimate(g, center, radii)
        gen = dirichlet_generator(g, ball(g, center, radii[-1]))
    else:
        gen = full_generator(g)
        lam, vec, res, _ = bottom_eigenpair(gen)
        est = SpectralEstimate(lam, 0, res, [(0, lam, res)], vec)
    return est, gen


def run_experiment(cfg: ExperimentConfig, out_dir=None, emit: bool = True) -> RunReport:
    """validate -> lambda1 -> classify -> solve -> detect -> emit.

    Stage failures are recorded in the report (never raised); later stages
    are skipped and whatever was computed is still emitted.
    """
    report = RunReport(cfg)
    stage = _Stages(report)
    try:
        with stage("ingest"):
            g = build_graph(cfg)
            src = build_source(cfg)
        with stage("validate"):
            violations = validate_graph(g)
            if violations:
                raise ValueError("; ".join(violations))
        with stage("spectrum"):
            center = cfg.center if cfg.center is not None else g.ids[0]
            est, gen = _spectrum(g, center, cfg.radii)
            report.estimate = est
            report.spectral = {"lambda1": est.lambda1, "radius_used": est.radius_used, "residual": est.residual,
                               "trace": [list(r) for r in est.monotone_trace], "monotone": est.monotone,
                               "vertices": gen.n}
        with stage("datum"):
            u0_full = build_datum(cfg, g, est.eigenvector, gen.ball.members)
            u0 = gen.restrict(u0_full)
            sup0 = linf_norm(u0)
            delta = cfg.delta if cfg.delta is not None else (sup0 if sup0 > 0 else 1.0)
        with stage("classify"):
            cls = classify(g, src, u0, est, delta, gen=gen, horizon=cfg.horizon, x0=center, t_under=cfg.t_under)
            report.classification = cls.as_dict()
        t_grid = np.linspace(0.0, cfg.horizon, cfg.n_times)
        report.t_grid = t_grid
        cap = cfg.cap if cfg.cap is not None else 1e4 * max(sup0, 1.0)
        ball_result = None
        with stage("solve"):
            use_exhaust = cfg.solver == "exhaust" or (
                cfg.solver == "auto" and len(cfg.radii) >= 2
                and cls.verdict in ("global_small_data", "critical_global_small_data"))
            if use_exhaust:
                ex = exhaust_solve(g, src, u0_full, center, cfg.radii, t_grid, delta=cfg.delta,
                                   tol=1e-8, quad_tol=cfg.quad_tol)
                report.path = ex.path
                report.solver = {"solver": "exhaust", "radii": ex.radii, "gaps": ex.gaps,
                                 "gap_decreasing": ex.gap_decreasing, "monotone_violation": ex.monotone_violation,
                                 "comparison_violation": ex.comparison_violation,
                                 "supersolution_sup": ex.supersolution.sup}
            elif cfg.mode == "global_weighted":
                M = cfg.M
                if M is None:
                    adm = datum_admissibility(gen, src, u0, MildSpaceParams(1.0, cfg.gamma), est.lambda1, cfg.delta)
                    M = 2.0 * adm["epsilon_min"] if math.isfinite(adm["epsilon_min"]) else 1.0
                mode = GlobalWeighted(MildSpaceParams(M, cfg.gamma), est.lambda1, cfg.delta)
                res = picard_solve(gen, src, u0, t_grid, mode, tol=cfg.tol, quad_tol=cfg.quad_tol,
                                   delta=cfg.delta)
                report.path = res.path
                report.solver = dict(res.diagnostics(), solver="picard")
            else:
                ball_result = picard_solve(gen, src, u0, t_grid, BallSup(), tol=cfg.tol, quad_tol=cfg.quad_tol,
                                           delta=cfg.delta, stop_above=cap)
                report.path = ball_result.path
                report.solver = dict(ball_result.diagnostics(), solver="picard")
        with stage("detect"):
            det = detect_blowup(gen, src, u0, cfg.horizon, cap, delta=cfg.delta, result=ball_result,
                                tol=cfg.tol, quad_tol=cfg.quad_tol)
            report.detection = det
            report.detector = det.as_dict()
            if cfg.phi_vertex is not None:
                path = det.result.path
                report.phi = phi_trace(gen, path, cfg.phi_vertex, float(path.times[-1]))
        if emit:
            with stage("emit"):
                emit_plot_data(report, out_dir if out_dir is not None else cfg.out)
    except StageError:
        if emit and report.errors[-1]["stage"] != "emit":
            # partial outputs plus the error record
            try:
                emit_plot_data(report, out_dir if out_dir is not None else cfg.out)
            except OSError as exc:
                log.error("could not write partial report: %s", exc)
    return report


def _grid_subpath(path, t_grid):
    """The path restricted to the output grid (nodes past the path's end are dropped)."""
    t = t_grid[t_grid <= path.times[-1] * (1 + 1e-12)]
    try:
        return path.at(t)
    except ValueError:
        return path


def emit_plot_data(report: RunReport, out_dir) -> dict:
    """Write CSV traces and report.json; returns the manifest ``{name: path or note}``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if not os.access(out, os.W_OK):
        raise PermissionError(f"output directory {out} is not writable")
    manifest = {}

    def emit(name, header, rows):
        p = out / name
        write_csv(p, header, rows)
        manifest[name] = str(p)

    if report.estimate is not None:
        emit("spectral_trace.csv", ["R", "lambda1", "residual"], spectral_rows(report.estimate))
    if report.path is not None:
        sub = _grid_subpath(report.path, report.t_grid) if report.t_grid is not None else report.path
        emit("solution.csv", ["t", "vertex", "value"], solution_rows(sub))
    if report.detection is not None:
        emit("norm_trace.csv", ["t", "norm"], norm_rows(report.detection.result.path))
        emit("reciprocal_norm.csv", ["t", "norm", "reciprocal", "fit"], reciprocal_rows(report.detection))
    if report.phi is not None:
        emit("phi_trace.csv", ["t", "phi"], phi_rows(report.phi))
    else:
        manifest["phi_trace.csv"] = "omitted: no phi_vertex configured"
    report.manifest = manifest
    (out / "report.json").write_text(json.dumps(report.as_dict(), indent=2, sort_keys=True) + "\n")
    manifest["report.json"] = str(out / "report.json")
    return manifest


# -- command line -------------------------------------------------------------


def _configure_logging():
    level = os.environ.get("GRAPHFLAME_LOG", "error").lower()
    logging.basicConfig(level={"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}.get(
        level, logging.ERROR), format="%(levelname)s %(name)s: %(message)s")


def _run_one(args):
    path, overrides, out = args
    cfg = load_config(path, overrides)
    report = run_experiment(cfg, out)
    return str(path), report.ok, report.errors


def _cmd_run(ns) -> int:
    if ns.manifest:
        lines = Path(ns.manifest).read_text().splitlines()
        configs = [Path(ns.manifest).parent / ln.strip() for ln in lines if ln.strip() and not ln.startswith("#")]
        base = Path(ns.out) if ns.out else None
        jobs = [(c, ns.set, str(base / c.stem) if base else None) for c in configs]
        try:
            for c in configs:
                load_config(c, ns.set)
        except ConfigError as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        with ProcessPoolExecutor(max_workers=max(1, ns.jobs)) as pool:
            results = list(pool.map(_run_one, jobs))
        status = EXIT_OK
        for name, ok, errors in results:
            print(f"{name}: {'ok' if ok else 'failed'}")
            for e in errors:
                print(f"  {e['stage']}: {e['error']}", file=sys.stderr)
            status = status if ok else EXIT_STAGE
        return status
    cfg = load_config(ns.config, ns.set)
    report = run_experiment(cfg, ns.out)
    summary = {"classification": (report.classification or {}).get("verdict"),
               "detector": report.detector, "errors": report.errors, "manifest": report.manifest}
    print(json.dumps(_jsonable(summary), indent=2, sort_keys=True))
    return EXIT_OK if report.ok else EXIT_STAGE


def _cmd_validate(ns) -> int:
    g = read_graph(ns.graph)
    violations = validate_graph(g)
    if violations:
        for v in violations:
            print(v)
        return EXIT_STAGE
    print(f"ok: {g.n} vertices, {sum(1 for _ in g.edges())} edges")
    return EXIT_OK


def _cmd_spectrum(ns) -> int:
    g = read_graph(ns.graph)
    radii = [int(r) for r in ns.radii.split(",") if r.strip()]
    est = lambda1_estimate(g, ns.center, radii)
    sys.stdout.write(write_csv(None, ["R", "lambda1", "residual"], spectral_rows(est)))
    return EXIT_OK


def _cmd_classify(ns) -> int:
    cfg = load_config(ns.config, ns.set)
    g = build_graph(cfg)
    src = build_source(cfg)
    center = cfg.center if cfg.center is not None else g.ids[0]
    est, gen = _spectrum(g, center, cfg.radii)
    u0 = gen.restrict(build_datum(cfg, g, est.eigenvector, gen.ball.members))
    sup0 = linf_norm(u0)
    delta = cfg.delta if cfg.delta is not None else (sup0 if sup0 > 0 else 1.0)
    cls = classify(g, src, u0, est, delta, gen=gen, horizon=cfg.horizon, x0=center, t_under=cfg.t_under)
    print(json.dumps(_jsonable(cls.as_dict()), indent=2, sort_keys=True))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="graphflame", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run an experiment")
    grp = r.add_mutually_exclusive_group(required=True)
    grp.add_argument("--config")
    grp.add_argument("--manifest", help="file listing one config path per line")
    r.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    r.add_argument("--out")
    r.add_argument("--jobs", type=int, default=1)
    r.set_defaults(func=_cmd_run)
    v = sub.add_parser("validate", help="check graph axioms")
    v.add_argument("--graph", required=True)
    v.set_defaults(func=_cmd_validate)
    s = sub.add_parser("spectrum", help="bottom Dirichlet eigenvalue on a radius ladder")
    s.add_argument("--graph", required=True)
    s.add_argument("--center", required=True)
    s.add_argument("--radii", required=True)
    s.set_defaults(func=_cmd_spectrum)
    c = sub.add_parser("classify", help="decide which regime a config falls in")
    c.add_argument("--config", required=True)
    c.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    c.set_defaults(func=_cmd_classify)
    return p


def main(argv=None) -> int:
    _configure_logging()
    ns = build_parser().parse_args(argv)
    try:
        return ns.func(ns)
    except (ConfigError, GraphFormatError, FileNotFoundError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # stage failure outside run_experiment's own capture
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_STAGE


if __name__ == "__main__":
    sys.exit(main())
