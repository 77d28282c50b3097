"""Mild solutions of u_t = Delta u + f(u) on truncated graphs.

All time stepping happens in the mu-orthonormal eigenbasis of the
truncated generator. The Duhamel integral

    int_0^t e^{-(t-s)A} f(u(s)) ds

is discretised by the product trapezoidal rule: f(u(s)) is interpolated
linearly between nodes and the exponential factor is integrated exactly,
so accuracy does not depend on lambda_max * dt. The plain trapezoidal rule
is available as ``rule="trapezoid"`` and refuses stiff steps.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter

from .graph import WeightedGraph, ball as make_ball, cutoff_zeta, linf_norm
from .sources import NonlinearSource
from .spectral import (
    UNDERFLOW,
    TruncatedGenerator,
    dirichlet_generator,
    kernel_bound_constant,
)

__all__ = [
    "MildSpaceParams",
    "GlobalWeighted",
    "BallSup",
    "SolutionPath",
    "PicardResult",
    "SupersolutionResult",
    "ExhaustionResult",
    "StiffnessError",
    "PicardDivergenceError",
    "LeftSpaceError",
    "ExhaustionError",
    "psi_apply",
    "picard_solve",
    "weighted_norm",
    "mild_weight",
    "datum_admissibility",
    "choose_anchor",
    "supersolution_path",
    "exhaust_solve",
]

log = logging.getLogger(__name__)

STIFF_LIMIT = 0.5
RATIO_NOISE = 1e-11
MAX_SEGMENTS = 200_000
OVERFLOW_GUARD = 1e100
COLLAPSE = 1e-9  # segment length relative to the horizon


class StiffnessError(ValueError):
    """Plain trapezoidal quadrature asked to take a step with lambda_max * dt too large."""


class PicardDivergenceError(RuntimeError):
    def __init__(self, message, ratios):
        super().__init__(message)
        self.ratios = list(ratios)


class LeftSpaceError(RuntimeError):
    """A ball-mode iterate left the set 0 <= u <= M."""


class ExhaustionError(RuntimeError):
    pass


@dataclass
class MildSpaceParams:
    """Parameters of the weighted space {0 <= u(x,t) <= M p(x, y0, t + gamma) e^{lambda1 t}}."""

    M: float
    gamma: float = 1.0
    y0: str | None = None
    epsilon: float | None = None


@dataclass(frozen=True)
class GlobalWeighted:
    params: MildSpaceParams
    lambda1: float
    delta: float | None = None


@dataclass(frozen=True)
class BallSup:
    """Sup-norm contraction on chained segments of length ``T``.

    ``T=None`` picks T = 0.5 / L(f, M) at every segment start, with
    M = 2 * ||u(start)||.
    """

    T: float | None = None
    M: float | None = None


@dataclass
class SolutionPath:
    times: np.ndarray
    states: np.ndarray  # (len(times), n)
    iterations: list = field(default_factory=list)
    ids: list | None = None

    @property
    def norm_trace(self) -> np.ndarray:
        return np.max(np.abs(self.states), axis=1) if self.states.size else np.zeros(len(self.times))

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def at(self, t_grid) -> "SolutionPath":
        """Sub-path on the nodes closest to ``t_grid`` (which must be nodes)."""
        t_grid = np.asarray(t_grid, dtype=float)
        idx = np.searchsorted(self.times, t_grid)
        idx = np.clip(idx, 0, len(self.times) - 1)
        left = np.clip(idx - 1, 0, None)
        pick = np.where(np.abs(self.times[left] - t_grid) < np.abs(self.times[idx] - t_grid), left, idx)
        scale = max(1.0, float(np.max(np.abs(t_grid)))) if t_grid.size else 1.0
        if np.any(np.abs(self.times[pick] - t_grid) > 1e-9 * scale):
            raise ValueError("requested times are not nodes of this path")
        return SolutionPath(self.times[pick], self.states[pick], self.iterations, self.ids)

    def scaled(self, c: float) -> "SolutionPath":
        return SolutionPath(self.times, c * self.states, self.iterations, self.ids)


@dataclass
class PicardResult:
    path: SolutionPath
    mode: str
    ratios: list
    segments: list
    residual: float
    clamp_events: int = 0
    admissibility: dict | None = None
    stopped: str | None = None
    quad_error: float = 0.0

    @property
    def max_ratio(self) -> float:
        return max(self.ratios) if self.ratios else 0.0

    def diagnostics(self) -> dict:
        return {
            "mode": self.mode,
            "iterations": list(self.path.iterations),
            "contraction_ratios": [float(r) for r in self.ratios],
            "max_ratio": float(self.max_ratio),
            "residual": float(self.residual),
            "quadrature_error": float(self.quad_error),
            "clamp_events": int(self.clamp_events),
            "segments": len(self.segments),
            "stopped": self.stopped,
            "admissibility": self.admissibility,
        }


# -- quadrature ---------------------------------------------------------------


_K = np.arange(12)[:, None]
_PHI1_COEF = np.array([(-1.0) ** k / math.factorial(k + 1) for k in range(12)])
_PSI_COEF = np.array([(-1.0) ** k * (k + 1) / math.factorial(k + 2) for k in range(12)])


def _step_weights(evals, h, rule="product"):
    """Per-mode (decay, weight of left node, weight of right node) for one step."""
    z = evals * h
    decay = np.exp(-z)
    if rule == "trapezoid":
        return decay, 0.5 * h * decay, np.full_like(z, 0.5 * h)
    small = z < 0.1
    powers = np.where(small, z, 0.0)[None, :] ** _K
    phi1_s = _PHI1_COEF @ powers
    psi_s = _PSI_COEF @ powers
    zl = np.where(small, 1.0, z)
    phi1_l = -np.expm1(-zl) / zl
    psi_l = (phi1_l - np.exp(-zl)) / zl
    phi1 = np.where(small, phi1_s, phi1_l)
    psi = np.where(small, psi_s, psi_l)
    return decay, h * psi, h * (phi1 - psi)


def _duhamel(evals, g_modes, times, rule="product"):
    """Mode coefficients of int_{t0}^{t_k} e^{-(t_k - s)A} g(s) ds at every node."""
    n_t, n = g_modes.shape
    out = np.zeros_like(g_modes)
    hs = np.diff(times)
    state = np.zeros(n)
    k = 0
    while k < n_t - 1:
        h = hs[k]
        j = k
        while j + 1 < n_t - 1 and abs(hs[j + 1] - h) <= 1e-9 * h:
            j += 1
        h = (times[j + 1] - times[k]) / (j - k + 1)
        decay, wa, wb = _step_weights(evals, h, rule)
        b = wa * g_modes[k:j + 1] + wb * g_modes[k + 1:j + 2]
        steps = j - k + 1
        if steps <= 2 * n:
            run = np.empty_like(b)
            for s in range(steps):
                state = decay * state + b[s]
                run[s] = state
        else:
            run = np.empty_like(b)
            for mode in range(n):
                run[:, mode], _ = lfilter([1.0], [1.0, -decay[mode]], b[:, mode],
                                          zi=[decay[mode] * state[mode]])
            state = run[-1].copy()
        out[k + 1:j + 2] = run
        k = j + 1
    return out


def _check_stiffness(gen, times, rule):
    if rule != "trapezoid" or len(times) < 2:
        return
    h = float(np.max(np.diff(times)))
    if gen.lambda_max * h > STIFF_LIMIT:
        raise StiffnessError(
            f"lambda_max*dt = {gen.lambda_max * h:.3g} exceeds {STIFF_LIMIT}; "
            f"refine the grid to dt <= {STIFF_LIMIT / gen.lambda_max:.3g} or use rule='product'"
        )


class _SourceEval:
    """f with optional linear continuation above ``cap``; counts clamped evaluations."""

    def __init__(self, src: NonlinearSource, cap: float | None = None):
        self.src, self.cap, self.events = src, cap, 0
        if cap is not None:
            self.f_cap = float(src(np.array([cap]))[0])
            self.l_cap = src.lipschitz(cap)

    def __call__(self, u):
        if self.cap is None:
            return self.src(u)
        over = u > self.cap
        if not over.any():
            return self.src(u)
        self.events += int(np.count_nonzero(over))
        return np.where(over, self.f_cap + self.l_cap * (u - self.cap), self.src(np.minimum(u, self.cap)))


def _psi_modes(gen, fe, lin_modes, states, times, rule):
    g = gen.to_modes(fe(states))
    return gen.from_modes(lin_modes + _duhamel(gen.eig[0], g, times, rule))


def _linear_modes(gen, u_start, times):
    evals = gen.eig[0]
    return np.exp(-np.outer(times - times[0], evals)) * gen.to_modes(u_start)


def psi_apply(gen: TruncatedGenerator, src: NonlinearSource, u0, u_path: SolutionPath,
              t_grid=None, rule: str = "product") -> SolutionPath:
    """Duhamel image (Psi u)(t) = e^{-tA} u0 + int_0^t e^{-(t-s)A} f(u(s)) ds on the path's nodes."""
    times = np.asarray(u_path.times if t_grid is None else t_grid, dtype=float)
    if times.shape[0] != u_path.states.shape[0]:
        raise ValueError("path states do not match the time grid")
    _check_stiffness(gen, times, rule)
    lin = _linear_modes(gen, np.asarray(u0, dtype=float), times)
    states = _psi_modes(gen, _SourceEval(src), lin, u_path.states, times, rule)
    return SolutionPath(times.copy(), states, [], gen.ids)


# -- weighted space -----------------------------------------------------------


def choose_anchor(gen: TruncatedGenerator, u0) -> str:
    """Vertex maximising u0; ties go to the smallest identifier."""
    u0 = np.asarray(u0, dtype=float)
    if not np.any(u0 > 0):
        raise ValueError("datum has no positive value to anchor the weighted space")
    top = np.flatnonzero(u0 == u0.max())
    ids = gen.ids
    return min(ids[i] for i in top)


def _resolved(w) -> np.ndarray:
    """Mask of kernel values above both the underflow floor and eigenbasis roundoff."""
    w = np.asarray(w)
    floor = max(UNDERFLOW, 64 * np.finfo(float).eps * float(np.max(np.abs(w), initial=0.0)))
    return w > floor


def mild_weight(gen: TruncatedGenerator, y0, gamma: float, lambda1: float, times) -> np.ndarray:
    """w(t, x) = p(x, y0, t + gamma) e^{lambda1 t} on the given times, shape (len(times), n)."""
    evals, q = gen.eig
    j = gen.local_index(y0)
    phi = q / np.sqrt(gen.mu)[:, None]
    times = np.asarray(times, dtype=float)
    decay = np.exp(-np.outer(times + gamma, evals) + lambda1 * times[:, None])
    return (decay * phi[j]) @ phi.T


def weighted_norm(u_path: SolutionPath, gen: TruncatedGenerator, params: MildSpaceParams,
                  lambda1: float) -> float:
    """sup |u(x,t)| / (p(x, y0, t + gamma) e^{lambda1 t}) over the path's nodes."""
    y0 = params.y0 if params.y0 is not None else gen.ids[0]
    w = mild_weight(gen, y0, params.gamma, lambda1, u_path.times)
    ok = _resolved(w)
    if not ok.all():
        warnings.warn(f"weighted norm: {int((~ok).sum())} points excluded for kernel underflow")
    if not ok.any():
        return 0.0
    return float(np.max(np.abs(u_path.states)[ok] / w[ok]))


def datum_admissibility(gen, src, u0, params: MildSpaceParams, lambda1: float,
                        delta: float | None = None) -> dict:
    """Check 0 <= u0 <= eps p(., y0, gamma) with eps <= (1 - L/lambda1) M, and M C e^{-lambda1 gamma} <= delta."""
    u0 = np.asarray(u0, dtype=float)
    y0 = params.y0 if params.y0 is not None else choose_anchor(gen, u0)
    w0 = mild_weight(gen, y0, params.gamma, 0.0, [0.0])[0]
    pos = u0 > 0
    if np.any(pos & ~_resolved(w0)):
        eps_min = math.inf
    else:
        eps_min = float(np.max(u0[pos] / w0[pos])) if pos.any() else 0.0
    c_under = kernel_bound_constant(gen, params.gamma, lambda1)
    amplitude = params.M * c_under * math.exp(-lambda1 * params.gamma)
    if delta is None:
        delta = amplitude
    lip = src.lipschitz(delta) if delta > 0 else 0.0
    eps_bound = (1.0 - lip / lambda1) * params.M if lambda1 > 0 else -math.inf
    eps = params.epsilon if params.epsilon is not None else eps_min
    return {
        "y0": y0,
        "gamma": params.gamma,
        "M": params.M,
        "delta": delta,
        "L": lip,
        "lambda1": lambda1,
        "epsilon_min": eps_min,
        "epsilon": eps,
        "epsilon_bound": eps_bound,
        "C_under": c_under,
        "amplitude_bound": amplitude,
        "contraction_hypothesis": bool(lip < lambda1),
        "datum_bound": bool(eps_min <= eps <= eps_bound),
        "amplitude_within_delta": bool(amplitude <= delta * (1 + 1e-12)),
        "admissible": bool(lip < lambda1 and eps_min <= eps <= eps_bound and math.isfinite(eps_min)),
    }


# -- Picard iteration ---------------------------------------------------------


def _iterate(gen, fe, lin, times, guess, norm, tol, max_iter, rule, space_check=None):
    u = guess
    diffs, ratios = [], []
    for it in range(1, max_iter + 1):
        new = _psi_modes(gen, fe, lin, u, times, rule)
        if space_check is not None:
            space_check(new)
        d = norm(new - u)
        scale = max(norm(new), 1e-300)
        if diffs and diffs[-1] > RATIO_NOISE * scale:
            ratios.append(d / diffs[-1])
        diffs.append(d)
        u = new
        if d <= tol * scale:
            return u, it, ratios
    raise PicardDivergenceError(
        f"Picard iteration did not converge in {max_iter} iterations "
        f"(last ratios {[round(r, 4) for r in ratios[-5:]]})", ratios)


def _refine(base, m):
    pieces = [np.linspace(a, b, m + 1)[:-1] for a, b in zip(base[:-1], base[1:])]
    return np.concatenate(pieces + [base[-1:]])


def _interp_states(t_new, t_old, states):
    return np.column_stack([np.interp(t_new, t_old, states[:, i]) for i in range(states.shape[1])])


def _solve_on(gen, fe, u_start, base, norm_for, tol, qtol, max_iter, rule, m0, m_max, space_check=None):
    """Picard on ``base`` refined by m substeps per interval; m doubled until the
    Richardson estimate |u_2m - u_m| / 3 falls below qtol * ||u||."""
    m = m0
    prev = None
    ratios_first = None
    total_it = 0
    while True:
        times = _refine(base, m)
        _check_stiffness(gen, times, rule)
        lin = _linear_modes(gen, u_start, times)
        if prev is None:
            guess = gen.from_modes(lin)
        else:
            guess = _interp_states(times, prev[0], prev[1])
        u, it, ratios = _iterate(gen, fe, lin, times, guess, norm_for(times), tol, max_iter, rule,
                                 space_check)
        total_it += it
        if ratios_first is None:
            ratios_first = ratios
        if prev is not None:
            err = float(np.max(np.abs(u[::2] - prev[1]))) / 3.0
            if err <= qtol * max(float(np.max(np.abs(u))), 1e-300) or m >= m_max:
                if m >= m_max and err > qtol * float(np.max(np.abs(u))):
                    log.warning("quadrature estimate %.3e above target at m=%d", err, m)
                return times, u, total_it, ratios_first + ratios, err
        prev = (times, u)
        m *= 2


def _sup(x):
    return float(np.max(np.abs(x))) if x.size else 0.0


def picard_solve(gen: TruncatedGenerator, src: NonlinearSource, u0, t_grid, mode=None, *,
                 tol: float = 1e-12, quad_tol: float = 1e-8, max_iter: int = 500,
                 substeps: int = 4, max_substeps: int = 1024, rule: str = "product",
                 delta: float | None = None, stop_above: float | None = None,
                 max_segments: int = MAX_SEGMENTS) -> PicardResult:
    """Fixed point of the Duhamel map on the truncation.

    ``mode`` is ``GlobalWeighted(params, lambda1)`` (one contraction on the
    whole horizon in the weighted norm) or ``BallSup(T, M)`` (sup-norm
    contraction on chained segments). ``delta`` switches on the linear
    continuation of f above 10 * delta. ``stop_above`` halts a ball-mode
    run once ||u||_inf exceeds it.
    """
    mode = BallSup() if mode is None else mode
    u0 = np.asarray(u0, dtype=float)
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.size < 2 or t_grid[0] != 0.0 or np.any(np.diff(t_grid) <= 0):
        raise ValueError("t_grid must start at 0 and increase")
    fe = _SourceEval(src, 10.0 * delta if delta is not None else None)

    if isinstance(mode, GlobalWeighted):
        adm = datum_admissibility(gen, src, u0, mode.params, mode.lambda1, mode.delta)
        if math.isfinite(adm["epsilon_min"]):
            return _solve_global(gen, src, fe, u0, t_grid, mode, adm, tol, quad_tol, max_iter,
                                 substeps, max_substeps, rule)
        log.info("global weighted mode inadmissible (no finite epsilon); using ball mode")
        res = _solve_ball(gen, src, fe, u0, t_grid, BallSup(), tol, quad_tol, max_iter, substeps,
                          max_substeps, rule, stop_above, max_segments)
        res.admissibility = dict(adm, fallback="ball_sup")
        return res
    return _solve_ball(gen, src, fe, u0, t_grid, mode, tol, quad_tol, max_iter, substeps,
                       max_substeps, rule, stop_above, max_segments)


def _solve_global(gen, src, fe, u0, t_grid, mode, adm, tol, quad_tol, max_iter, substeps,
                  max_substeps, rule):
    params = MildSpaceParams(mode.params.M, mode.params.gamma, adm["y0"], mode.params.epsilon)

    def norm_for(times):
        w = mild_weight(gen, params.y0, params.gamma, mode.lambda1, times)
        inv = np.where(_resolved(w), 1.0 / np.maximum(w, UNDERFLOW), 0.0)
        return lambda x: float(np.max(np.abs(x) * inv))

    times, u, iters, ratios, err = _solve_on(gen, fe, u0, t_grid, norm_for, tol, quad_tol, max_iter, rule,
                                             substeps, max_substeps)
    path = SolutionPath(times, u, [iters], gen.ids)
    residual = _sup(psi_apply(gen, src, u0, path, rule=rule).states - u)
    seg = {"t0": 0.0, "t1": float(t_grid[-1]), "L": adm["L"], "substeps": (len(times) - 1) // (len(t_grid) - 1),
           "iterations": iters, "norm_end": _sup(u[-1]), "quad_error": err}
    return PicardResult(path, "global_weighted", ratios, [seg], residual, fe.events, adm, None, err)


def _solve_ball(gen, src, fe, u0, t_grid, mode, tol, quad_tol, max_iter, substeps, max_substeps,
                rule, stop_above, max_segments):
    all_t, all_u = [np.array([0.0])], [u0[None, :]]
    iterations, ratios, segments = [], [], []
    state, t = u0.copy(), 0.0
    stopped = None
    max_err = 0.0
    warned_T = False
    m_hint = substeps
    for t_next in t_grid[1:]:
        while t < t_next * (1 - 1e-14) and stopped is None:
            if len(segments) >= max_segments:
                raise PicardDivergenceError(f"more than {max_segments} segments before t={t_next}", ratios)
            eps = _sup(state)
            M, lip, T = _segment_params(src, eps, mode)
            if lip * T >= 1 and not warned_T:
                log.warning("segment length T=%.3g violates T < 1/L (L=%.3g)", T, lip)
                warned_T = True
            t_end = min(t + T, t_next)
            if t_next - t_end < 1e-9 * max(T, 1e-300):
                t_end = t_next
            base = np.array([t, t_end])
            check = _space_checker(M) if math.isfinite(M) else None
            times, u, it, seg_ratios, err = _solve_on(gen, fe, state, base, lambda _: _sup, tol, quad_tol, max_iter,
                                                      rule, m_hint, max_substeps, check)
            m_hint = max(substeps, min((len(times) - 1) // 8, max_substeps // 2))
            all_t.append(times[1:])
            all_u.append(u[1:])
            iterations.append(it)
            ratios.extend(seg_ratios)
            max_err = max(max_err, err) if math.isfinite(err) else max_err
            segments.append({"t0": t, "t1": t_end, "L": lip, "T": T, "M": M, "iterations": it,
                             "substeps": len(times) - 1, "norm_end": _sup(u[-1]), "quad_error": err})
            state, t = u[-1].copy(), t_end
            if stop_above is not None and _sup(state) > stop_above:
                stopped = "cap"
            elif not _sup(state) < OVERFLOW_GUARD or T < COLLAPSE * t_grid[-1]:
                raise PicardDivergenceError(
                    f"||u|| = {_sup(state):.3e} at t = {t:.6g} with segment length {T:.3e}: "
                    "finite-time blow-up suspected; pass stop_above to halt earlier", ratios)
        if stopped:
            break
    times = np.concatenate(all_t)
    states = np.concatenate(all_u)
    path = SolutionPath(times, states, iterations, gen.ids)
    residual = _sup(psi_apply(gen, src, u0, path, rule=rule).states - states) if len(times) > 1 else 0.0
    return PicardResult(path, "ball_sup", ratios, segments, residual, fe.events, None, stopped, max_err)


def _segment_params(src, eps, mode: BallSup):
    """(M, L, T) for a ball-mode segment starting from a state of sup norm eps."""
    if mode.T is None:
        M = mode.M if mode.M is not None else max(2.0 * eps, 1e-300)
        lip = src.lipschitz(M)
        T = 0.5 / lip if lip > 0 else math.inf
        return M, lip, T
    T = float(mode.T)
    if mode.M is not None:
        return mode.M, src.lipschitz(mode.M), T
    M = max(2.0 * eps, 1e-300)
    for _ in range(3):
        lip = src.lipschitz(M)
        if lip * T >= 1:
            return math.inf, lip, T
        M = max(eps / (1.0 - lip * T), 1e-300)
    return M, src.lipschitz(M), T


def _space_checker(M):
    def check(u):
        hi = float(np.max(u)) if u.size else 0.0
        lo = float(np.min(u)) if u.size else 0.0
        if hi > M * (1 + 1e-8) + 1e-300 or lo < -1e-10 * M:
            raise LeftSpaceError(f"iterate left V_R: range [{lo:.3e}, {hi:.3e}] vs bound M={M:.3e}")
    return check


# -- supersolution and exhaustion -------------------------------------------------


@dataclass
class SupersolutionResult:
    path: SolutionPath
    L: float
    delta: float | None
    first_violation: tuple | None  # (t, vertex, value) with value > delta
    datum_condition: bool | None  # ||u0||_inf <= delta e^{-L t_under}, if t_under given

    @property
    def sup(self) -> float:
        return float(np.max(self.path.states)) if self.path.states.size else 0.0


def supersolution_path(gen: TruncatedGenerator, src: NonlinearSource | None, u0, t_grid, L: float,
                       delta: float | None = None, t_under: float | None = None) -> SupersolutionResult:
    """ubar(x, t) = e^{Lt} (e^{t Delta} u0)(x) on the grid, with the bound ubar <= delta checked."""
    u0 = np.asarray(u0, dtype=float)
    times = np.asarray(t_grid, dtype=float)
    lin = gen.from_modes(_linear_modes(gen, u0, times)) if len(times) else np.zeros((0, gen.n))
    states = np.exp(L * times)[:, None] * lin
    violation = None
    if delta is not None:
        bad = np.argwhere(states > delta * (1 + 1e-12))
        if bad.size:
            k, i = bad[0]
            violation = (float(times[k]), gen.ids[i], float(states[k, i]))
    cond = None
    if t_under is not None and delta is not None:
        cond = bool(linf_norm(u0) <= delta * math.exp(-L * t_under) * (1 + 1e-12))
    return SupersolutionResult(SolutionPath(times, states, [], gen.ids), L, delta, violation, cond)


@dataclass
class ExhaustionResult:
    path: SolutionPath
    radii: list
    paths: dict  # R -> SolutionPath on t_grid
    generators: dict
    gaps: list  # sup |u_{R_{k+1}} - u_{R_k}| on B_{R_k}
    supersolution: SupersolutionResult
    monotone_violation: float
    comparison_violation: float
    results: dict

    @property
    def gap_decreasing(self) -> bool:
        return all(b < a for a, b in zip(self.gaps, self.gaps[1:]))


def _common(small, big):
    return np.searchsorted(big.ball.members, small.ball.members)


def exhaust_solve(g: WeightedGraph, src: NonlinearSource, u0, x0, radii, t_grid, *,
                  L: float | None = None, delta: float | None = None, tol: float = 1e-8,
                  mode: BallSup | None = None, **solver_kw) -> ExhaustionResult:
    """Ball problems with data zeta_R u0 on an increasing radius ladder.

    ``u0`` is a graph-wide vertex function. The supersolution is built on
    the largest ball from the uncut datum with rate ``L`` (default
    L(f, delta)).
    """
    radii = [int(r) for r in radii]
    if not radii or any(b <= a for a, b in zip(radii, radii[1:])):
        raise ValueError("radii must be increasing")
    u0 = np.asarray(u0, dtype=float)
    t_grid = np.asarray(t_grid, dtype=float)
    gens, paths, results = {}, {}, {}
    for r in radii:
        gen = dirichlet_generator(g, make_ball(g, x0, r))
        datum = gen.restrict(cutoff_zeta(g, x0, r) * u0) if r >= 2 else gen.restrict(u0)
        res = picard_solve(gen, src, datum, t_grid, mode or BallSup(), **solver_kw)
        gens[r], results[r], paths[r] = gen, res, res.path.at(t_grid)

    top = gens[radii[-1]]
    if L is None:
        L = src.lipschitz(delta if delta is not None else max(linf_norm(u0), 1e-300))
    sup = supersolution_path(top, src, top.restrict(u0), t_grid, L, delta)

    mono, gaps = 0.0, []
    for a, b in zip(radii, radii[1:]):
        idx = _common(gens[a], gens[b])
        diff = paths[b].states[:, idx] - paths[a].states
        mono = max(mono, float(np.max(-diff)))
        gaps.append(float(np.max(np.abs(diff))))
    if mono > tol:
        raise ExhaustionError(f"u_R not monotone in R: violation {mono:.3e} > {tol:g}")

    comp = 0.0
    for r in radii:
        idx = _common(gens[r], top)
        st = paths[r].states
        comp = max(comp, float(np.max(st - sup.path.states[:, idx])), float(np.max(-st)))
    if comp > tol:
        raise ExhaustionError(f"comparison 0 <= u_R <= ubar violated by {comp:.3e}")
    return ExhaustionResult(paths[radii[-1]], radii, paths, gens, gaps, sup, mono, comp, results)
