"""Weighted graphs (G, omega, mu), the weighted Laplacian, distances, balls and cutoffs.

Vertex functions are plain numpy arrays aligned with ``WeightedGraph.ids``
(identifiers in sorted order). Functions living on a ball are aligned with
``Ball.members``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

__all__ = [
    "WeightedGraph",
    "Ball",
    "DistanceUndefinedError",
    "validate_graph",
    "laplacian_apply",
    "graph_distance",
    "distances_from",
    "ball",
    "cutoff_zeta",
    "generate_graph",
    "regular_tree",
    "lattice_line",
    "complete",
    "cycle",
    "weighted_line",
    "linf_norm",
    "l1_norm",
]

MAX_TREE_VERTICES = 2_000_000


class DistanceUndefinedError(ValueError):
    """Raised when two vertices are not joined by any path."""


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """Finite weighted graph.

    Parameters
    ----------
    ids : tuple of str
        Vertex identifiers, sorted. Index ``i`` of every vertex function
        refers to ``ids[i]``.
    weights : scipy.sparse.csr_matrix
        Edge weights omega(x, y). Stored as given, so asymmetric or
        loop-carrying inputs survive long enough for `validate_graph`
        to report them.
    mu : ndarray
        Node measure.
    """

    ids: tuple[str, ...]
    weights: sparse.csr_matrix
    mu: np.ndarray
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_index", {v: i for i, v in enumerate(self.ids)})
        w = sparse.csr_matrix(self.weights, dtype=float)
        w.sort_indices()
        object.__setattr__(self, "weights", w)
        mu = np.asarray(self.mu, dtype=float).copy()
        mu.setflags(write=False)
        object.__setattr__(self, "mu", mu)
        if w.shape != (len(self.ids), len(self.ids)) or mu.shape != (len(self.ids),):
            raise ValueError("weights/mu shapes do not match the vertex count")

    @classmethod
    def from_edges(cls, mu, edges):
        """Build an undirected graph.

        ``mu`` maps identifier -> measure; ``edges`` is an iterable of
        ``(x, y, omega)`` triples, each stored in both directions.
        """
        ids = tuple(sorted(str(v) for v in mu))
        index = {v: i for i, v in enumerate(ids)}
        rows, cols, vals = [], [], []
        for x, y, w in edges:
            i, j = index[str(x)], index[str(y)]
            rows += [i, j] if i != j else [i]
            cols += [j, i] if i != j else [i]
            vals += [float(w), float(w)] if i != j else [float(w)]
        n = len(ids)
        weights = sparse.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
        return cls(ids, weights, np.array([float(mu[v]) for v in ids]))

    @classmethod
    def from_matrix(cls, weights, mu, ids=None):
        n = weights.shape[0]
        if ids is None:
            width = len(str(max(n - 1, 0)))
            ids = tuple(f"v{i:0{width}d}" for i in range(n))
        if list(ids) != sorted(ids):
            order = np.argsort(np.asarray(ids, dtype=object).astype(str))
            w = sparse.csr_matrix(weights)[order][:, order]
            return cls(tuple(np.asarray(ids)[order].tolist()), w, np.asarray(mu)[order])
        return cls(tuple(ids), sparse.csr_matrix(weights), np.asarray(mu))

    @property
    def n(self) -> int:
        return len(self.ids)

    def index(self, vertex) -> int:
        try:
            return self._index[vertex]
        except KeyError:
            raise KeyError(f"unknown vertex {vertex!r}") from None

    def degree(self) -> np.ndarray:
        """Weighted degree sum_y omega(x, y)."""
        return np.asarray(self.weights.sum(axis=1)).ravel()

    def edges(self):
        """Yield undirected edges ``(x, y, omega)`` with ``x < y``."""
        upper = sparse.triu(self.weights, k=1).tocoo()
        for i, j, w in sorted(zip(upper.row, upper.col, upper.data)):
            yield self.ids[i], self.ids[j], float(w)

    def function(self, values, default=0.0) -> np.ndarray:
        """Vertex function from a ``{id: value}`` mapping."""
        u = np.full(self.n, float(default))
        for k, v in values.items():
            u[self.index(k)] = v
        return u


@dataclass(frozen=True)
class Ball:
    """B_R(x0) = {x : d(x, x0) < R}; ``members`` are sorted vertex indices."""

    center: int
    radius: int
    members: np.ndarray
    distances: np.ndarray  # d(x0, x) for each member

    def __len__(self):
        return len(self.members)

    def __contains__(self, index):
        return bool(np.any(self.members == index))


def validate_graph(g: WeightedGraph) -> list[str]:
    """List every violated axiom; empty when the graph is admissible."""
    report = []
    w = g.weights
    if w.nnz and not np.all(np.isfinite(w.data)):
        report.append("finite sum: omega has non-finite entries")
    elif not np.all(np.isfinite(g.degree())):
        report.append("finite sum: sum_y omega(x, y) is not finite")
    if w.nnz and np.any(w.data < 0):
        report.append("nonnegativity: omega has negative entries")
    asym = abs(w - w.T)
    if asym.nnz and asym.max() > 0:
        report.append("symmetry: omega(x, y) != omega(y, x) for some pair")
    if np.any(w.diagonal() != 0):
        bad = [g.ids[i] for i in np.flatnonzero(w.diagonal())]
        report.append(f"zero diagonal: loops at {', '.join(bad[:5])}")
    if np.any(~np.isfinite(g.mu)) or np.any(g.mu <= 0):
        report.append("measure: mu must be positive and finite at every vertex")
    # locally finite holds automatically for a finite carrier; kept for completeness
    if g.n > 0 and np.any(np.diff(w.indptr) > g.n):
        report.append("local finiteness: a vertex has infinitely many neighbours")
    if g.n > 1:
        ncomp, _ = csgraph.connected_components(w > 0, directed=False)
        if ncomp > 1:
            report.append(f"connectivity: graph has {ncomp} components")
    return report


def laplacian_apply(g: WeightedGraph, u) -> np.ndarray:
    """(Delta u)(x) = (1/mu(x)) sum_y (u(y) - u(x)) omega(x, y)."""
    u = np.asarray(u, dtype=float)
    return (g.weights @ u - g.degree() * u) / g.mu


def distances_from(g: WeightedGraph, x) -> np.ndarray:
    """Hop distances from ``x`` over positive-weight edges; ``inf`` if unreachable."""
    i = g.index(x) if not isinstance(x, (int, np.integer)) else int(x)
    adj = (g.weights > 0).astype(float)
    return csgraph.shortest_path(adj, directed=False, unweighted=True, indices=i)


def graph_distance(g: WeightedGraph, x, y) -> int:
    d = distances_from(g, x)[g.index(y)]
    if not np.isfinite(d):
        raise DistanceUndefinedError(f"no path between {x!r} and {y!r}")
    return int(d)


def ball(g: WeightedGraph, x0, R: int) -> Ball:
    if R < 1:
        raise ValueError("ball radius must be >= 1")
    center = g.index(x0)
    d = distances_from(g, center)
    members = np.flatnonzero(d < R)
    return Ball(center, int(R), members, d[members].astype(int))


def cutoff_zeta(g: WeightedGraph, x0, R: int) -> np.ndarray:
    """Piecewise-linear cutoff: 1 on B_{R/2}(x0), 0 off B_R(x0), linear ramp in between."""
    if R < 2:
        raise ValueError("cutoff radius must be >= 2")
    d = distances_from(g, g.index(x0))
    return np.clip((R - d) / (R - math.ceil(R / 2)), 0.0, 1.0)


def linf_norm(u) -> float:
    u = np.asarray(u, dtype=float)
    return float(np.max(np.abs(u))) if u.size else 0.0


def l1_norm(u, mu=None) -> float:
    """sum |u|, or sum |u| mu when ``mu`` is given."""
    u = np.abs(np.asarray(u, dtype=float))
    return float(np.sum(u if mu is None else u * np.asarray(mu)))


# -- generators ---------------------------------------------------------------


def _from_index_edges(n, edges, mu, prefix="v"):
    width = len(str(max(n - 1, 0)))
    ids = [f"{prefix}{i:0{width}d}" for i in range(n)]
    return WeightedGraph.from_edges(
        dict(zip(ids, mu)), ((ids[i], ids[j], w) for i, j, w in edges)
    )


def regular_tree(d: int, depth: int) -> WeightedGraph:
    """Ball of the d-regular tree truncated at ``depth``.

    Unit weights; mu = d at every vertex, i.e. the degree each vertex has
    in the infinite tree (leaves included).
    """
    if d < 2 or depth < 0:
        raise ValueError("regular_tree needs d >= 2 and depth >= 0")
    count = 1 + sum(d * (d - 1) ** (k - 1) for k in range(1, depth + 1))
    if count > MAX_TREE_VERTICES:
        raise ValueError(f"regular_tree({d}, {depth}) would have {count} vertices")
    edges = []
    frontier, nxt = [0], 1
    for level in range(depth):
        new = []
        for parent in frontier:
            for _ in range(d if level == 0 else d - 1):
                edges.append((parent, nxt, 1.0))
                new.append(nxt)
                nxt += 1
        frontier = new
    # ids are zero-padded so sorted order = breadth-first order, root first
    return _from_index_edges(count, edges, [float(d)] * count)


def lattice_line(n: int) -> WeightedGraph:
    """Path on n vertices, unit weights, mu = 2 (degree in Z)."""
    if n < 1:
        raise ValueError("lattice_line needs n >= 1")
    return _from_index_edges(n, [(i, i + 1, 1.0) for i in range(n - 1)], [2.0] * n)


def complete(n: int) -> WeightedGraph:
    """Complete graph on n vertices, unit weights and unit measure."""
    if n < 1:
        raise ValueError("complete needs n >= 1")
    edges = [(i, j, 1.0) for i in range(n) for j in range(i + 1, n)]
    return _from_index_edges(n, edges, [1.0] * n)


def cycle(n: int) -> WeightedGraph:
    """Cycle on n >= 3 vertices, unit weights, mu = degree = 2."""
    if n < 3:
        raise ValueError("cycle needs n >= 3")
    return _from_index_edges(n, [(i, (i + 1) % n, 1.0) for i in range(n)], [2.0] * n)


def weighted_line(n: int, ratio: float) -> WeightedGraph:
    """Path with omega(i, i+1) = ratio**i and unit measure.

    For ratio > 1 the Dirichlet truncations have a bottom eigenvalue bounded
    away from zero.
    """
    if n < 2 or ratio <= 0:
        raise ValueError("weighted_line needs n >= 2 and ratio > 0")
    edges = [(i, i + 1, float(ratio) ** i) for i in range(n - 1)]
    return _from_index_edges(n, edges, [1.0] * n)


_FAMILIES = {
    "regular_tree": regular_tree,
    "lattice_line": lattice_line,
    "complete": complete,
    "cycle": cycle,
    "weighted_line": weighted_line,
}


def generate_graph(family: str, *args) -> WeightedGraph:
    """``generate_graph("regular_tree", 3, 2)`` and friends."""
    try:
        return _FAMILIES[family](*args)
    except KeyError:
        raise ValueError(f"unknown graph family {family!r}") from None
