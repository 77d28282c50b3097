"""Experiment configuration: bracketed sections of ``key = value`` lines.

Example::

    [graph]
    family = regular_tree
    args = 3, 6

    [source]
    kind = linear_plus_power
    a = 0.03
    p = 2
    b = 1

    [datum]
    kind = eigenfunction
    value = 0.01

    [run]
    center = v000
    radii = 4, 6
    horizon = 100
"""

from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import sources
from .graph import WeightedGraph, generate_graph
from .io import read_graph

__all__ = ["ConfigError", "ExperimentConfig", "load_config", "parse_config", "build_source", "build_graph",
           "build_datum"]


class ConfigError(ValueError):
    pass


_SOURCE_KEYS = {
    "zero": (),
    "power": ("p", "coef"),
    "linear": ("a",),
    "linear_plus_power": ("a", "p", "b"),
    "clamped_linear": ("a", "cap"),
    "table": ("points",),
}
_DATUM_KINDS = ("constant", "indicator", "eigenfunction", "file")
_MODES = ("ball_sup", "global_weighted")
_SOLVERS = ("auto", "picard", "exhaust")


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.replace(",", " ").split()]


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    if isinstance(x, (list, tuple)):
        return ", ".join(_fmt(v) for v in x)
    return str(x)


@dataclass
class ExperimentConfig:
    # graph: either a file or a generator family with numeric arguments
    graph_file: str | None = None
    family: str | None = None
    family_args: list = field(default_factory=list)
    # source
    source: str = "zero"
    source_params: dict = field(default_factory=dict)
    # datum
    datum: str = "constant"
    datum_value: float = 1.0
    datum_vertices: list = field(default_factory=list)
    datum_file: str | None = None
    # run
    center: str | None = None
    radii: list = field(default_factory=list)
    delta: float | None = None
    gamma: float = 1.0
    horizon: float = 1.0
    n_times: int = 21
    t_under: float = 1.0
    mode: str = "ball_sup"
    solver: str = "auto"
    M: float | None = None
    tol: float = 1e-12
    quad_tol: float = 1e-8
    cap: float | None = None
    phi_vertex: str | None = None
    seed: int = 0
    out: str = "out"

    def validate(self, check_files: bool = True) -> None:
        if (self.graph_file is None) == (self.family is None):
            raise ConfigError("[graph] needs exactly one of 'file' or 'family'")
        if check_files and self.graph_file is not None and not Path(self.graph_file).is_file():
            raise ConfigError(f"graph file {self.graph_file!r} does not exist")
        if self.source not in _SOURCE_KEYS:
            raise ConfigError(f"unknown source kind {self.source!r}")
        missing = [k for k in _SOURCE_KEYS[self.source] if k not in self.source_params
                   and not (self.source == "power" and k == "coef")]
        if missing:
            raise ConfigError(f"source {self.source!r} is missing {', '.join(missing)}")
        if self.datum not in _DATUM_KINDS:
            raise ConfigError(f"unknown datum kind {self.datum!r}")
        if self.datum == "indicator" and not self.datum_vertices:
            raise ConfigError("indicator datum needs 'vertices'")
        if self.datum == "file":
            if self.datum_file is None:
                raise ConfigError("file datum needs 'path'")
            if check_files and not Path(self.datum_file).is_file():
                raise ConfigError(f"datum file {self.datum_file!r} does not exist")
        if not self.horizon > 0:
            raise ConfigError("horizon must be positive")
        if any(b <= a for a, b in zip(self.radii, self.radii[1:])) or any(r < 1 for r in self.radii):
            raise ConfigError("radii must be positive and increasing")
        for name in ("tol", "quad_tol", "gamma", "t_under"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.n_times < 2:
            raise ConfigError("n_times must be >= 2")
        if self.delta is not None and not self.delta > 0:
            raise ConfigError("delta must be positive")
        if self.mode not in _MODES:
            raise ConfigError(f"mode must be one of {', '.join(_MODES)}")
        if self.solver not in _SOLVERS:
            raise ConfigError(f"solver must be one of {', '.join(_SOLVERS)}")
        if self.datum == "eigenfunction" and not self.radii:
            raise ConfigError("eigenfunction datum needs a radii ladder")

    # -- text form ---------------------------------------------------------

    def to_text(self) -> str:
        sections = {"graph": {}, "source": {"kind": self.source}, "datum": {"kind": self.datum}, "run": {}}
        if self.graph_file is not None:
            sections["graph"]["file"] = self.graph_file
        else:
            sections["graph"]["family"] = self.family
            sections["graph"]["args"] = _fmt(self.family_args)
        for k in sorted(self.source_params):
            v = self.source_params[k]
            sections["source"][k] = "; ".join(f"{_fmt(a)} {_fmt(b)}" for a, b in v) if k == "points" else _fmt(v)
        if self.datum in ("constant", "indicator", "eigenfunction"):
            sections["datum"]["value"] = _fmt(self.datum_value)
        if self.datum == "indicator":
            sections["datum"]["vertices"] = ", ".join(self.datum_vertices)
        if self.datum == "file":
            sections["datum"]["path"] = self.datum_file
        run = sections["run"]
        for f in dataclasses.fields(self):
            if f.name in ("graph_file", "family", "family_args", "source", "source_params", "datum",
                          "datum_value", "datum_vertices", "datum_file"):
                continue
            v = getattr(self, f.name)
            if v is None or (isinstance(v, list) and not v):
                continue
            run[f.name] = _fmt(v)
        out = []
        for name, kv in sections.items():
            out.append(f"[{name}]")
            out += [f"{k} = {v}" for k, v in kv.items()]
            out.append("")
        return "\n".join(out)

    def set(self, key: str, value: str) -> None:
        """Apply a ``section.key=value`` or bare ``key=value`` override."""
        section, _, name = key.rpartition(".")
        parser = _parser(self.to_text())
        if not section:
            section = next((s for s in parser.sections() if parser.has_option(s, name)), None)
            if section is None:
                section = "source" if name in {k for ks in _SOURCE_KEYS.values() for k in ks} else "run"
        if not parser.has_section(section):
            parser.add_section(section)
        parser.set(section, name, value)
        new = _from_parser(parser)
        for f in dataclasses.fields(self):
            setattr(self, f.name, getattr(new, f.name))


def _parser(text: str) -> configparser.ConfigParser:
    p = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    p.optionxform = str
    try:
        p.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None
    return p


def _from_parser(p: configparser.ConfigParser) -> ExperimentConfig:
    cfg = ExperimentConfig()
    known = {"graph", "source", "datum", "run"}
    extra = set(p.sections()) - known
    if extra:
        raise ConfigError(f"unknown section(s): {', '.join(sorted(extra))}")
    try:
        if p.has_section("graph"):
            g = p["graph"]
            cfg.graph_file = g.get("file")
            cfg.family = g.get("family")
            if "args" in g:
                cfg.family_args = [int(x) if float(x).is_integer() and "." not in x else float(x)
                                   for x in g["args"].replace(",", " ").split()]
        if p.has_section("source"):
            s = dict(p["source"])
            cfg.source = s.pop("kind", "zero")
            for k, v in s.items():
                if k == "points":
                    cfg.source_params[k] = [tuple(_floats(pt)) for pt in v.split(";") if pt.strip()]
                else:
                    cfg.source_params[k] = float(v)
        if p.has_section("datum"):
            d = p["datum"]
            cfg.datum = d.get("kind", "constant")
            cfg.datum_value = float(d.get("value", "1.0"))
            if "vertices" in d:
                cfg.datum_vertices = [v.strip() for v in d["vertices"].split(",") if v.strip()]
            cfg.datum_file = d.get("path")
        if p.has_section("run"):
            for k, v in p["run"].items():
                f = {fl.name: fl for fl in dataclasses.fields(ExperimentConfig)}.get(k)
                if f is None or k in ("graph_file", "family", "family_args", "source", "source_params"):
                    raise ConfigError(f"unknown [run] key {k!r}")
                if k == "radii":
                    cfg.radii = [int(x) for x in _floats(v)]
                elif k in ("n_times", "seed"):
                    setattr(cfg, k, int(v))
                elif k in ("center", "mode", "solver", "phi_vertex", "out"):
                    setattr(cfg, k, v)
                else:
                    setattr(cfg, k, float(v))
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad value: {exc}") from None
    return cfg


def parse_config(text: str, check_files: bool = False) -> ExperimentConfig:
    cfg = _from_parser(_parser(text))
    cfg.validate(check_files=check_files)
    return cfg


def load_config(path, overrides=(), check_files: bool = True) -> ExperimentConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file {str(path)!r} does not exist")
    cfg = _from_parser(_parser(path.read_text()))
    base = path.parent
    for item in overrides:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"override {item!r} is not key=value")
        cfg.set(key.strip(), value.strip())
    # relative paths are resolved against the config's directory
    if cfg.graph_file is not None and not Path(cfg.graph_file).is_absolute():
        cfg.graph_file = str(base / cfg.graph_file)
    if cfg.datum_file is not None and not Path(cfg.datum_file).is_absolute():
        cfg.datum_file = str(base / cfg.datum_file)
    cfg.validate(check_files=check_files)
    return cfg


# -- builders -----------------------------------------------------------------


def build_source(cfg: ExperimentConfig) -> sources.NonlinearSource:
    p = cfg.source_params
    kind = cfg.source
    if kind == "zero":
        return sources.zero()
    if kind == "power":
        return sources.power(p["p"], p.get("coef", 1.0))
    if kind == "linear":
        return sources.linear(p["a"])
    if kind == "linear_plus_power":
        return sources.linear_plus_power(p["a"], p["p"], p["b"])
    if kind == "clamped_linear":
        return sources.clamped_linear(p["a"], p["cap"])
    if kind == "table":
        return sources.table(p["points"])
    raise ConfigError(f"unknown source kind {kind!r}")


def build_graph(cfg: ExperimentConfig) -> WeightedGraph:
    if cfg.graph_file is not None:
        return read_graph(cfg.graph_file)
    return generate_graph(cfg.family, *cfg.family_args)


def build_datum(cfg: ExperimentConfig, g: WeightedGraph, eigenvector=None, members=None) -> np.ndarray:
    """Graph-wide datum. ``eigenvector`` lives on the ball ``members``."""
    if cfg.datum == "constant":
        return np.full(g.n, cfg.datum_value)
    if cfg.datum == "indicator":
        return cfg.datum_value * g.function({v: 1.0 for v in cfg.datum_vertices})
    if cfg.datum == "eigenfunction":
        u = np.zeros(g.n)
        u[members] = cfg.datum_value * eigenvector
        return u
    values = {}
    for lineno, line in enumerate(Path(cfg.datum_file).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line or line.lower().startswith("vertex"):
            continue
        parts = line.replace(",", " ").split()
        if len(parts) != 2:
            raise ConfigError(f"{cfg.datum_file}:{lineno}: expected 'vertex,value'")
        values[parts[0]] = float(parts[1])
    return g.function(values)
