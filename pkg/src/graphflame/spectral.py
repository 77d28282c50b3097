"""Dirichlet truncations of -Delta, the heat semigroup and heat-kernel diagnostics."""

from __future__ import annotations

import threading
import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.linalg
from scipy import sparse
from scipy.sparse.linalg import expm_multiply, splu

from .graph import Ball, WeightedGraph, ball as make_ball

__all__ = [
    "TruncatedGenerator",
    "KernelEntry",
    "SpectralEstimate",
    "DecayFit",
    "EigenSolverError",
    "dirichlet_generator",
    "full_generator",
    "semigroup_apply",
    "kernel_entry",
    "kernel_column",
    "kernel_matrix",
    "bottom_eigenpair",
    "lambda1_estimate",
    "decay_rate_fit",
    "mass_defect",
    "kernel_bound_constant",
]

DENSE_LIMIT = 400
UNDERFLOW = 1e-300


class EigenSolverError(RuntimeError):
    def __init__(self, message, iterations):
        super().__init__(f"{message} (after {iterations} iterations)")
        self.iterations = iterations


@dataclass(eq=False)
class TruncatedGenerator:
    """The operator A = -Delta acting on functions that vanish off ``ball``.

    ``matrix`` is indexed by ball members. Eigen-data of the symmetrised
    form S = M^{1/2} A M^{-1/2} is computed on first use and shared by every
    consumer (semigroup, kernel, solvers).
    """

    graph: WeightedGraph
    ball: Ball
    matrix: sparse.csr_matrix
    mu: np.ndarray
    dense_limit: int = DENSE_LIMIT
    _cache: dict = field(default_factory=dict, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    @property
    def n(self) -> int:
        return len(self.mu)

    @property
    def ids(self) -> list[str]:
        return [self.graph.ids[i] for i in self.ball.members]

    @cached_property
    def _local(self) -> dict:
        return {v: k for k, v in enumerate(self.ids)}

    def local_index(self, vertex) -> int:
        """Position of a vertex id (or graph index) inside the ball."""
        if isinstance(vertex, (int, np.integer)):
            hits = np.flatnonzero(self.ball.members == vertex)
            if not hits.size:
                raise KeyError(f"vertex index {vertex} outside the ball")
            return int(hits[0])
        try:
            return self._local[vertex]
        except KeyError:
            raise KeyError(f"vertex {vertex!r} outside the ball") from None

    @property
    def is_full(self) -> bool:
        """True when the ball is the whole graph (no Dirichlet boundary)."""
        return self.n == self.graph.n

    def restrict(self, u) -> np.ndarray:
        """Graph-wide vertex function -> values on the ball."""
        return np.asarray(u, dtype=float)[self.ball.members]

    def extend(self, u) -> np.ndarray:
        """Ball function -> graph-wide function, zero outside."""
        out = np.zeros(self.graph.n)
        out[self.ball.members] = u
        return out

    @cached_property
    def symmetric(self) -> sparse.csr_matrix:
        s = np.sqrt(self.mu)
        sym = sparse.diags(s) @ self.matrix @ sparse.diags(1.0 / s)
        return sparse.csr_matrix((sym + sym.T) * 0.5)

    @cached_property
    def eig(self):
        """(eigenvalues, Q) of the symmetrised generator, ascending."""
        evals, q = scipy.linalg.eigh(self.symmetric.toarray())
        return np.maximum(evals, 0.0), q

    @property
    def dense(self) -> bool:
        return self.n <= self.dense_limit

    @cached_property
    def lambda_max(self) -> float:
        if self.dense:
            return float(self.eig[0][-1])
        # Gershgorin bound on the row-scaled generator
        return float(2.0 * self.matrix.diagonal().max())

    def to_modes(self, u) -> np.ndarray:
        """Coefficients in the mu-orthonormal eigenbasis; rows of a 2-D input are states."""
        return (np.sqrt(self.mu) * np.asarray(u, dtype=float)) @ self.eig[1]

    def from_modes(self, c) -> np.ndarray:
        return (np.asarray(c) @ self.eig[1].T) / np.sqrt(self.mu)

    def cached_column(self, y: int, t: float):
        with self._lock:
            return self._cache.get((y, t))

    def store_column(self, y: int, t: float, col: np.ndarray):
        col.setflags(write=False)
        with self._lock:
            self._cache.setdefault((y, t), col)


def dirichlet_generator(g: WeightedGraph, b: Ball, dense_limit: int = DENSE_LIMIT) -> TruncatedGenerator:
    """Restriction of -Delta to the ball with u = 0 outside.

    Edges leaving the ball keep their weight on the diagonal, so they act
    as pure decay terms.
    """
    if len(b) == 0:
        raise ValueError("empty ball")
    m = b.members
    mu = np.asarray(g.mu)[m]
    w_in = g.weights[m][:, m].tolil()
    w_in.setdiag(0.0)
    w_in = w_in.tocsr()
    deg = g.degree()[m] - g.weights.diagonal()[m]
    a = sparse.diags(1.0 / mu) @ (sparse.diags(deg) - w_in)
    return TruncatedGenerator(g, b, sparse.csr_matrix(a), mu, dense_limit)


def full_generator(g: WeightedGraph, dense_limit: int = DENSE_LIMIT) -> TruncatedGenerator:
    """-Delta on the whole finite graph (no boundary)."""
    members = np.arange(g.n)
    b = Ball(0, g.n + 1, members, np.zeros(g.n, dtype=int))
    return dirichlet_generator(g, b, dense_limit)


def semigroup_apply(gen: TruncatedGenerator, u0, t: float) -> np.ndarray:
    """e^{t Delta} u0 on the truncation, i.e. e^{-tA} u0."""
    if t < 0:
        raise ValueError("semigroup time must be nonnegative")
    u0 = np.asarray(u0, dtype=float)
    if t == 0:
        return u0.copy()
    if gen.dense:
        evals, _ = gen.eig
        return gen.from_modes(np.exp(-evals * t) * gen.to_modes(u0))
    return expm_multiply(-t * gen.matrix, u0, traceA=-t * gen.matrix.diagonal().sum())


@dataclass(frozen=True)
class KernelEntry:
    x: str
    y: str
    t: float
    value: float


def kernel_column(gen: TruncatedGenerator, y, t: float) -> np.ndarray:
    """x -> p_R(x, y, t) over the ball (cached)."""
    if t <= 0:
        raise ValueError("kernel time must be positive")
    j = gen.local_index(y)
    col = gen.cached_column(j, float(t))
    if col is None:
        delta = np.zeros(gen.n)
        delta[j] = 1.0 / gen.mu[j]
        col = semigroup_apply(gen, delta, t)
        gen.store_column(j, float(t), col)
    return col


def kernel_entry(gen: TruncatedGenerator, x, y, t: float) -> KernelEntry:
    col = kernel_column(gen, y, t)
    return KernelEntry(str(x), str(y), float(t), float(col[gen.local_index(x)]))


def kernel_matrix(gen: TruncatedGenerator, t: float) -> np.ndarray:
    """All entries p_R(x, y, t); dense truncations only."""
    if t <= 0:
        raise ValueError("kernel time must be positive")
    evals, q = gen.eig
    phi = q / np.sqrt(gen.mu)[:, None]
    return (phi * np.exp(-evals * t)) @ phi.T


@dataclass
class SpectralEstimate:
    lambda1: float
    radius_used: int
    residual: float
    monotone_trace: list = field(default_factory=list)  # (R, lambda1_R, residual)
    eigenvector: np.ndarray | None = None  # positive, sup-normalised, on the largest ball

    @property
    def monotone(self) -> bool:
        vals = [lam for _, lam, _ in self.monotone_trace]
        return all(b <= a * (1 + 1e-9) + 1e-12 for a, b in zip(vals, vals[1:]))


def bottom_eigenpair(gen: TruncatedGenerator, tol: float = 1e-10, max_iter: int = 20000):
    """Smallest eigenvalue of A by shifted inverse iteration.

    Returns ``(lambda1, eigenfunction, residual, iterations)``; the
    eigenfunction is positive and normalised to sup = 1.
    """
    s_mat = gen.symmetric
    n = gen.n
    scale = max(1.0, float(abs(s_mat).sum(axis=1).max()))
    sigma = -1e-6 * scale
    lu = splu(sparse.csc_matrix(s_mat - sigma * sparse.identity(n)))
    v = np.sqrt(gen.mu)
    v /= np.linalg.norm(v)
    rho, res = np.inf, np.inf
    for it in range(1, max_iter + 1):
        v = lu.solve(v)
        v /= np.linalg.norm(v)
        sv = s_mat @ v
        rho = float(v @ sv)
        res = float(np.linalg.norm(sv - rho * v))
        if res <= tol:
            break
    else:
        raise EigenSolverError(f"inverse iteration stalled at residual {res:.3e}", max_iter)
    f = v / np.sqrt(gen.mu)
    f *= np.sign(f[np.argmax(np.abs(f))])
    return max(rho, 0.0), f / np.max(f), res, it


def lambda1_estimate(g: WeightedGraph, x0, radii, tol: float = 1e-10, max_iter: int = 20000) -> SpectralEstimate:
    """Bottom Dirichlet eigenvalue on B_R(x0) for each radius in ``radii``."""
    radii = [int(r) for r in radii]
    if not radii or any(b <= a for a, b in zip(radii, radii[1:])):
        raise ValueError("radii must be a nonempty increasing list")
    trace, vec = [], None
    for r in radii:
        gen = dirichlet_generator(g, make_ball(g, x0, r))
        lam, vec, res, _ = bottom_eigenpair(gen, tol, max_iter)
        trace.append((r, lam, res))
    r, lam, res = trace[-1]
    return SpectralEstimate(lam, r, res, trace, vec)


@dataclass
class DecayFit:
    slope: float
    intercept: float
    c_under: float  # smallest C with p <= C exp(slope t) on the grid
    t_under: float
    times: np.ndarray
    values: np.ndarray
    dropped: int


def decay_rate_fit(gen: TruncatedGenerator, x, y, t_grid, tail_fraction: float = 1.0) -> DecayFit:
    """Least-squares slope of log p(x, y, t) against t."""
    t = np.asarray(t_grid, dtype=float)
    if t.size < 4 or np.any(np.diff(t) <= 0):
        raise ValueError("t_grid must be increasing with at least 4 points")
    p = np.array([kernel_entry(gen, x, y, s).value for s in t])
    keep = p > UNDERFLOW
    dropped = int(np.count_nonzero(~keep))
    if dropped:
        warnings.warn(f"kernel underflow: dropped {dropped} grid points below {UNDERFLOW:g}")
        t, p = t[keep], p[keep]
    if t.size < 2:
        raise ValueError("too few grid points above the underflow floor")
    start = int(np.floor((1.0 - tail_fraction) * t.size))
    tt, lp = t[start:], np.log(p[start:])
    slope, intercept = np.polyfit(tt, lp, 1)
    c_under = float(np.max(p * np.exp(-slope * t)))
    return DecayFit(float(slope), float(intercept), c_under, float(t[0]), t, p, dropped)


def mass_defect(gen: TruncatedGenerator, x, t: float) -> float:
    """1 - sum_y p_R(x, y, t) mu(y)."""
    if t <= 0:
        raise ValueError("time must be positive")
    mass = semigroup_apply(gen, np.ones(gen.n), t)[gen.local_index(x)]
    return float(min(max(1.0 - mass, 0.0), 1.0))


def kernel_bound_constant(gen: TruncatedGenerator, t_under: float, lambda1: float) -> float:
    """Smallest C with p_R(x, y, t) <= C exp(-lambda1 t) for all x, y and t >= t_under.

    By Cauchy-Schwarz p(x, y, t) <= sqrt(p(x, x, t) p(y, y, t)), so the sup
    over pairs sits on the diagonal, and e^{lambda1 t} p(x, x, t) is a sum of
    nonincreasing exponentials when lambda1 is at most the bottom
    eigenvalue. The sup is therefore attained at t = t_under. Infinite
    when ``lambda1`` exceeds the bottom of the truncation's spectrum.
    """
    if t_under <= 0:
        raise ValueError("t_under must be positive")
    evals, q = gen.eig
    if lambda1 > evals[0] * (1 + 1e-12) + 1e-14:
        return np.inf
    weights = np.exp(-(evals - lambda1) * t_under)
    diag = (q**2 @ weights) / gen.mu
    return float(diag.max())
