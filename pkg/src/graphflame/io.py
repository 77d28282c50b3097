"""Text formats: the ``graph v2`` edge-list file and the CSV traces."""

from __future__ import annotations

import csv
import io as _io
import math
from pathlib import Path

import numpy as np

from .graph import WeightedGraph

__all__ = [
    "GraphFormatError",
    "read_graph",
    "parse_graph",
    "write_graph",
    "format_float",
    "write_csv",
    "kernel_rows",
    "spectral_rows",
    "solution_rows",
    "phi_rows",
    "norm_rows",
    "reciprocal_rows",
]

HEADER = "graph v2"


class GraphFormatError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


def parse_graph(text: str) -> WeightedGraph:
    """Parse the line-oriented format.

    Blank lines and ``#`` comments are ignored. Edges are undirected; a pair
    listed twice (in either order) is an error, as is an edge naming an
    undeclared node.
    """
    mu, edges, seen = {}, [], {}
    header_seen = False
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if not header_seen:
            if line != HEADER:
                raise GraphFormatError(lineno, f"expected header {HEADER!r}, got {line!r}")
            header_seen = True
            continue
        parts = line.split()
        kind = parts[0]
        try:
            if kind == "node" and len(parts) == 3:
                if parts[1] in mu:
                    raise GraphFormatError(lineno, f"duplicate node {parts[1]!r}")
                mu[parts[1]] = float(parts[2])
            elif kind == "edge" and len(parts) == 4:
                a, b = parts[1], parts[2]
                key = (min(a, b), max(a, b))
                if key in seen:
                    raise GraphFormatError(lineno, f"duplicate edge {a}-{b} (first on line {seen[key]})")
                seen[key] = lineno
                edges.append((lineno, a, b, float(parts[3])))
            else:
                raise GraphFormatError(lineno, f"cannot parse {line!r}")
        except ValueError as exc:
            if isinstance(exc, GraphFormatError):
                raise
            raise GraphFormatError(lineno, f"bad number in {line!r}") from None
    if not header_seen:
        raise GraphFormatError(1, "empty graph file")
    for lineno, a, b, _ in edges:
        for v in (a, b):
            if v not in mu:
                raise GraphFormatError(lineno, f"edge references undeclared node {v!r}")
    return WeightedGraph.from_edges(mu, [(a, b, w) for _, a, b, w in edges])


def read_graph(path) -> WeightedGraph:
    return parse_graph(Path(path).read_text())


def write_graph(g: WeightedGraph, path=None) -> str:
    lines = [HEADER]
    lines += [f"node {v} {format_float(m)}" for v, m in zip(g.ids, g.mu)]
    lines += [f"edge {a} {b} {format_float(w)}" for a, b, w in g.edges()]
    text = "\n".join(lines) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


def format_float(x) -> str:
    """Shortest round-trip repr; fixed spellings for non-finite values."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


def write_csv(path, header, rows) -> str:
    """Write rows (floats via `format_float`) with ``\\n`` line endings; returns the text."""
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format_float(v) if isinstance(v, (float, np.floating)) else v for v in row])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


def kernel_rows(gen, times, pairs=None):
    """(t, x, y, p) rows; ``pairs`` defaults to every (x, y) in the truncation."""
    from .spectral import kernel_matrix

    ids = gen.ids
    for t in times:
        p = kernel_matrix(gen, float(t))
        if pairs is None:
            for i, x in enumerate(ids):
                for j, y in enumerate(ids):
                    yield float(t), x, y, float(p[i, j])
        else:
            for x, y in pairs:
                yield float(t), x, y, float(p[gen.local_index(x), gen.local_index(y)])


def spectral_rows(estimate):
    for r, lam, res in estimate.monotone_trace:
        yield int(r), float(lam), float(res)


def solution_rows(path):
    for t, state in zip(path.times, path.states):
        for v, val in zip(path.ids, state):
            yield float(t), v, float(val)


def phi_rows(trace):
    for t, v in zip(trace.times, trace.values):
        yield float(t), float(v)


def norm_rows(path):
    for t, v in zip(path.times, path.norm_trace):
        yield float(t), float(v)


def reciprocal_rows(detection):
    """(t, norm, reciprocal, fit) on segment endpoints; ``fit`` is the extrapolation line or nan."""
    slope, intercept = detection.fit if detection.fit is not None else (math.nan, math.nan)
    for t, n in zip(detection.times, detection.norms):
        yield float(t), float(n), 1.0 / float(n) if n > 0 else math.inf, slope * float(t) + intercept
