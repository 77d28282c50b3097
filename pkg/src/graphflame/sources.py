"""Source terms f(u), their convex minorants h, and the scalar quantities built on them."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate

__all__ = [
    "NonlinearSource",
    "OsgoodResult",
    "lipschitz_on_interval",
    "right_derivative_at_zero",
    "osgood_integral",
    "reciprocal_tail_integral",
    "zero",
    "power",
    "linear",
    "linear_plus_power",
    "clamped_linear",
    "table",
]

Scalar = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class NonlinearSource:
    """f : [0, inf) -> [0, inf) with optional convex minorant h.

    ``lipschitz_exact(delta)`` and ``alpha_exact`` short-circuit the
    numerical estimates when a closed form is known. ``params`` is only
    used to echo the source in reports and configs.
    """

    name: str
    f: Scalar
    h: Scalar | None = None
    lipschitz_exact: Callable[[float], float] | None = None
    alpha_exact: float | None = None
    params: dict = field(default_factory=dict)

    def __call__(self, u):
        return self.f(np.asarray(u, dtype=float))

    def lipschitz(self, delta: float) -> float:
        return lipschitz_on_interval(self, delta)

    @property
    def alpha(self) -> float | None:
        """h'(0) (right derivative), or None without a minorant."""
        if self.h is None:
            return None
        if self.alpha_exact is not None:
            return self.alpha_exact
        return right_derivative_at_zero(self.h)

    def osgood(self, of: str = "h") -> "OsgoodResult":
        fn = self.h if of == "h" else self.f
        if fn is None:
            raise ValueError(f"source {self.name!r} has no {of}")
        return osgood_integral(fn)


def _one_sided_limit(quotient, h0: float, rtol: float, max_halvings: int = 40):
    """lim_{h->0+} quotient(h) from halved steps, Richardson-accelerated (first order)."""
    h = h0
    q_prev = quotient(h)
    best = q_prev
    est_prev = None
    for _ in range(max_halvings):
        h /= 2
        q = quotient(h)
        best = max(best, q)
        est = 2 * q - q_prev
        if est_prev is not None and abs(est - est_prev) <= rtol * max(1.0, abs(est)):
            return est, best
        q_prev, est_prev = q, est
    return est_prev, best


def lipschitz_on_interval(src: NonlinearSource, delta: float, rtol: float = 1e-10,
                          n0: int = 4096, zoom: int = 64) -> float:
    """L(f, delta) = sup_{0 <= s < s' <= delta} (f(s') - f(s)) / (s' - s).

    Every cell quotient is a lower bound for L, so the search keeps the
    largest one seen: a uniform grid locates the steepest cell, which is
    then zoomed into. When the steepest cell touches an end of [0, delta]
    the one-sided quotient converges only at first order and is
    Richardson-extrapolated instead.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    if src.lipschitz_exact is not None:
        return float(src.lipschitz_exact(delta))

    def quotients(s):
        fs = src(s)
        if not np.all(np.isfinite(fs)):
            raise ValueError(f"f is not finite on [0, {delta}]")
        return np.diff(fs) / np.diff(s)

    s = np.linspace(0.0, delta, n0 + 1)
    q = quotients(s)
    k = int(np.argmax(q))
    best = float(q[k])
    if k == n0 - 1 or k == 0:
        f_end = float(src(np.array([s[k + 1] if k else 0.0]))[0])
        if k:
            quot = lambda h: (f_end - float(src(np.array([delta - h]))[0])) / h
        else:
            quot = lambda h: (float(src(np.array([h]))[0]) - f_end) / h
        est, seen = _one_sided_limit(quot, delta / n0, rtol)
        return max(best, seen, est)
    lo, hi = s[k - 1], s[k + 2]
    while hi - lo > 1e-7 * delta:
        ss = np.linspace(lo, hi, zoom + 1)
        qq = quotients(ss)
        j = int(np.argmax(qq))
        gain = float(qq[j]) - best
        best = max(best, float(qq[j]))
        lo, hi = ss[max(j - 1, 0)], ss[min(j + 2, zoom)]
        if 0 <= gain <= rtol * abs(best):
            break
    return best


def right_derivative_at_zero(fn: Scalar, h0: float = 1e-2, rtol: float = 1e-10) -> float:
    """fn'(0+) from halved right difference quotients, Richardson-accelerated."""
    f0 = float(fn(np.array([0.0]))[0])
    step = h0
    q_prev = (float(fn(np.array([step]))[0]) - f0) / step
    est_prev = None
    for _ in range(60):
        step /= 2
        q = (float(fn(np.array([step]))[0]) - f0) / step
        est = 2 * q - q_prev
        if est_prev is not None and abs(est - est_prev) <= rtol * max(1.0, abs(est)):
            return est
        q_prev, est_prev = q, est
    return est_prev


@dataclass(frozen=True)
class OsgoodResult:
    finite: bool
    value: float | None
    tail_log_slope: float

    def __str__(self):
        return f"finite({self.value:.12g})" if self.finite else "divergent"


def _recip(fn):
    return lambda s: 1.0 / float(fn(np.array([s]))[0])


def reciprocal_tail_integral(fn: Scalar, a: float, v_max: float = 80.0) -> float:
    """int_a^inf dz / fn(z), integrated in v = log z with a power-law tail in v."""
    if a <= 0:
        raise ValueError("lower limit must be positive")
    g = _recip(fn)

    def integrand(v):
        z = math.exp(v)
        return z * g(z)

    v0 = math.log(a)
    v1 = max(v_max, v0 + 1.0)
    value, _ = integrate.quad(integrand, v0, v1, limit=500, epsabs=1e-14, epsrel=1e-12)
    # tail beyond v1: fit integrand ~ c v^-k from two nearby samples
    ga, gb = integrand(v1 - 1.0), integrand(v1)
    if gb <= 0 or ga <= 0:
        return value
    k = math.log(ga / gb) / math.log(v1 / (v1 - 1.0))
    if k > 1:
        value += gb * v1 / (k - 1)
    else:
        return math.inf
    return value


def osgood_integral(fn: Scalar, slope_window=(1e8, 1e16)) -> OsgoodResult:
    """int_1^inf ds / fn(s); divergent when 1/fn decays like 1/s or slower.

    The decay is measured as the log-log slope of 1/fn across
    ``slope_window``; a slope >= -1 - 1e-3 is declared divergent.
    """
    probe = np.geomspace(1.0, slope_window[1], 200)
    vals = fn(probe)
    if np.any(~np.isfinite(vals)) or np.any(vals <= 0):
        raise ValueError("h must be positive and finite on [1, inf)")
    lo, hi = slope_window
    slope = -math.log(float(fn(np.array([hi]))[0]) / float(fn(np.array([lo]))[0])) / math.log(hi / lo)
    if slope >= -1.0 - 1e-3:
        return OsgoodResult(False, None, slope)
    return OsgoodResult(True, reciprocal_tail_integral(fn, 1.0), slope)


# -- registry -----------------------------------------------------------------


def zero() -> NonlinearSource:
    return NonlinearSource("zero", lambda u: np.zeros_like(u), lipschitz_exact=lambda d: 0.0,
                           params={"kind": "zero"})


def power(p: float, coef: float = 1.0) -> NonlinearSource:
    """f = h = coef * u**p with p > 1 (h convex, h'(0) = 0)."""
    if p <= 1 or coef <= 0:
        raise ValueError("power source needs p > 1 and coef > 0")
    fn = lambda u: coef * np.power(np.maximum(u, 0.0), p)
    return NonlinearSource(f"power(p={p:g}, coef={coef:g})", fn, h=fn,
                           lipschitz_exact=lambda d: coef * p * d ** (p - 1), alpha_exact=0.0,
                           params={"kind": "power", "p": p, "coef": coef})


def linear(a: float) -> NonlinearSource:
    if a < 0:
        raise ValueError("linear source needs a >= 0")
    fn = lambda u: a * np.asarray(u, dtype=float)
    return NonlinearSource(f"linear(a={a:g})", fn, h=fn, lipschitz_exact=lambda d: a,
                           alpha_exact=float(a), params={"kind": "linear", "a": a})


def linear_plus_power(a: float, p: float = 2.0, b: float = 1.0) -> NonlinearSource:
    """f = h = a u + b u**p: convex, f(0) = 0, f'(0) = a, Osgood-finite for p > 1."""
    if a < 0 or p <= 1 or b <= 0:
        raise ValueError("linear_plus_power needs a >= 0, p > 1, b > 0")
    fn = lambda u: a * np.asarray(u, dtype=float) + b * np.power(np.maximum(u, 0.0), p)
    return NonlinearSource(f"linear_plus_power(a={a:g}, p={p:g}, b={b:g})", fn, h=fn,
                           lipschitz_exact=lambda d: a + b * p * d ** (p - 1), alpha_exact=float(a),
                           params={"kind": "linear_plus_power", "a": a, "p": p, "b": b})


def clamped_linear(a: float, cap: float) -> NonlinearSource:
    """f = a * min(u, cap): Lipschitz constant a on every [0, delta], and f(s) <= a s."""
    if a < 0 or cap <= 0:
        raise ValueError("clamped_linear needs a >= 0 and cap > 0")
    fn = lambda u: a * np.minimum(np.asarray(u, dtype=float), cap)
    return NonlinearSource(f"clamped_linear(a={a:g}, cap={cap:g})", fn,
                           lipschitz_exact=lambda d: float(a),
                           params={"kind": "clamped_linear", "a": a, "cap": cap})


def table(points) -> NonlinearSource:
    """Piecewise-linear f through ``(u, f(u))`` points, extended with the last slope."""
    pts = sorted((float(x), float(y)) for x, y in points)
    xs = np.array([p[0] for p in pts])
    ys = np.array([p[1] for p in pts])
    if xs[0] != 0.0 or len(xs) < 2:
        raise ValueError("table needs at least two points starting at u = 0")
    last = (ys[-1] - ys[-2]) / (xs[-1] - xs[-2])

    def fn(u):
        u = np.asarray(u, dtype=float)
        return np.where(u <= xs[-1], np.interp(u, xs, ys), ys[-1] + last * (u - xs[-1]))

    return NonlinearSource("table", fn, params={"kind": "table", "points": pts})
