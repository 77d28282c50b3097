"""Blow-up side: the backward-kernel pairing Phi, comparison-ODE bounds, the
hypothesis classifier and a numerical blow-up detector."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .graph import WeightedGraph, l1_norm, linf_norm, validate_graph
from .semilinear import BallSup, PicardResult, SolutionPath, picard_solve, supersolution_path
from .sources import NonlinearSource, OsgoodResult, osgood_integral, reciprocal_tail_integral
from .spectral import SpectralEstimate, TruncatedGenerator, kernel_bound_constant, mass_defect, semigroup_apply

__all__ = [
    "PhiTrace",
    "ComparisonBound",
    "Hypothesis",
    "Classification",
    "Detection",
    "BlowupCertificate",
    "phi_trace",
    "jensen_gaps",
    "heat_lower_bound",
    "osgood_integral",
    "ode_comparison_bound",
    "blowup_time_upper_bound",
    "classify",
    "detect_blowup",
    "blowup_certificate",
    "VERDICTS",
]

VERDICTS = ("blowup_all_data", "global_small_data", "critical_global_small_data", "out_of_theory")


@dataclass
class PhiTrace:
    x: str
    T: float
    times: np.ndarray
    values: np.ndarray
    phi0: float

    def is_nondecreasing(self, tol: float = 1e-6) -> bool:
        return bool(np.all(np.diff(self.values) >= -tol * max(1.0, float(np.max(np.abs(self.values))))))


def _backward_pairing(gen, states, times, x, T):
    """sum_z p(x, z, T - t) u(z, t) mu(z) for each row of ``states``."""
    evals, q = gen.eig
    row = q[gen.local_index(x)] / math.sqrt(gen.mu[gen.local_index(x)])
    coeffs = gen.to_modes(states)
    return (coeffs * np.exp(-np.outer(T - times, evals))) @ row


def phi_trace(gen: TruncatedGenerator, u_path: SolutionPath, x, T: float) -> PhiTrace:
    """Phi_x(t) = sum_z p(x, z, T - t) u(z, t) mu(z) on the path's nodes in [0, T]."""
    times = np.asarray(u_path.times, dtype=float)
    if times[0] != 0 or times[-1] < T * (1 - 1e-12):
        raise ValueError(f"path covers [{times[0]}, {times[-1]}], not [0, {T}]")
    keep = times <= T * (1 + 1e-12)
    t = np.minimum(times[keep], T)
    values = _backward_pairing(gen, u_path.states[keep], t, x, T)
    return PhiTrace(str(x), float(T), t, values, float(values[0]))


def jensen_gaps(gen: TruncatedGenerator, u_path: SolutionPath, x, T: float, h) -> np.ndarray:
    """sum_y p(x,y,T-t) h(u(y,t)) mu(y) - m h(Phi/m), m = sum_y p(x,y,T-t) mu(y).

    For convex h with h(0) = 0, m h(Phi/m) >= h(Phi), so nonnegative gaps
    also certify the uncorrected inequality on Dirichlet truncations.
    """
    times = np.asarray(u_path.times, dtype=float)
    keep = times <= T * (1 + 1e-12)
    t = np.minimum(times[keep], T)
    states = u_path.states[keep]
    phi = _backward_pairing(gen, states, t, x, T)
    hu = _backward_pairing(gen, h(states), t, x, T)
    mass = _backward_pairing(gen, np.ones_like(states), t, x, T)
    mass = np.clip(mass, 1e-300, 1.0)
    return hu - mass * h(phi / mass)


def heat_lower_bound(gen: TruncatedGenerator, u0, x0, times, lambda1: float, eps: float) -> dict:
    """Single-term bound (e^{t Delta}u0)(x0) >= u0(x0) mu(x0) p(x0,x0,t) and the time t0
    after which p(x0, x0, t) >= exp(-(lambda1 + eps) t) on the grid."""
    u0 = np.asarray(u0, dtype=float)
    j = gen.local_index(x0)
    times = np.asarray(times, dtype=float)
    delta = np.zeros(gen.n)
    delta[j] = 1.0 / gen.mu[j]
    heat = np.array([semigroup_apply(gen, u0, t)[j] for t in times])
    pdiag = np.array([semigroup_apply(gen, delta, t)[j] for t in times])
    c1 = u0[j] * gen.mu[j]
    single = heat - c1 * pdiag
    above = pdiag >= np.exp(-(lambda1 + eps) * times)
    bad = np.flatnonzero(~above)
    t0 = float(times[bad[-1]]) if bad.size else 0.0
    return {"C1": float(c1), "single_term_gap": single, "min_single_term_gap": float(single.min()),
            "p_diag": pdiag, "t0": t0, "holds_after_t0": bool(bad.size == 0 or bad[-1] < len(times) - 1)}


@dataclass(frozen=True)
class ComparisonBound:
    applicable: bool
    alpha: float
    tbar: float | None = None
    H: float | None = None
    tstar_upper: float | None = None
    reason: str = ""


def ode_comparison_bound(src: NonlinearSource, phi0: float, delta: float) -> ComparisonBound:
    """Upper bound on the blow-up time of Phi' >= h(Phi), Phi(0) = phi0.

    Phi grows at least like phi0 e^{alpha t} until it reaches delta, at
    tbar = log(delta / phi0) / alpha; from there it needs at most
    H = int_delta^inf dz / h(z).
    """
    if src.h is None:
        return ComparisonBound(False, math.nan, reason="no convex minorant h registered")
    alpha = float(src.alpha)
    if not alpha > 0:
        return ComparisonBound(False, alpha, reason="alpha = h'(0) must be positive")
    if phi0 <= 0:
        return ComparisonBound(False, alpha, reason="phi0 must be positive")
    osg = osgood_integral(src.h)
    if not osg.finite:
        return ComparisonBound(False, alpha, reason="Osgood integral diverges")
    if phi0 >= delta:
        H = reciprocal_tail_integral(src.h, phi0)
        return ComparisonBound(True, alpha, 0.0, H, H)
    tbar = (math.log(delta) - math.log(phi0)) / alpha
    H = reciprocal_tail_integral(src.h, delta)
    return ComparisonBound(True, alpha, tbar, H, tbar + H)


def blowup_time_upper_bound(gen: TruncatedGenerator, src: NonlinearSource, u0, x, delta: float,
                            T_grid) -> float | None:
    """Smallest T on the grid whose comparison bound from Phi_x^T(0) = (e^{T Delta}u0)(x) is below T.

    Phi_x^T satisfies Phi' >= h(Phi) on (0, T) for any mild solution, so the
    solution cannot survive past such a T.
    """
    for T in np.asarray(T_grid, dtype=float):
        phi0 = float(semigroup_apply(gen, u0, T)[gen.local_index(x)])
        b = ode_comparison_bound(src, phi0, delta)
        if b.applicable and b.tstar_upper < T:
            return float(T)
    return None


# -- classifier ---------------------------------------------------------------


@dataclass
class Hypothesis:
    name: str
    passed: bool
    value: object = None
    detail: str = ""


@dataclass
class Classification:
    verdict: str
    checked: list = field(default_factory=list)

    def hypothesis(self, name) -> Hypothesis:
        for h in self.checked:
            if h.name == name:
                return h
        raise KeyError(name)

    def as_dict(self) -> dict:
        def clean(v):
            if isinstance(v, (np.floating, np.integer, np.bool_)):
                return v.item()
            if isinstance(v, float) and not math.isfinite(v):
                return str(v)
            return v

        return {"verdict": self.verdict,
                "hypotheses": [{"name": h.name, "passed": bool(h.passed), "value": clean(h.value),
                                "detail": h.detail} for h in self.checked]}


def _sample_grid(delta, u0):
    top = max(float(delta), linf_norm(u0), 1e-12) * 10.0
    return np.linspace(0.0, top, 4001)


def classify(g: WeightedGraph, src: NonlinearSource, u0, lambda1, delta: float, *,
             gen: TruncatedGenerator | None = None, horizon: float | None = None, x0=None,
             t_under: float = 1.0, mass_tol: float = 0.01, crit_rtol: float = 1e-6) -> Classification:
    """Decide which of the three regimes (if any) the data falls under.

    ``u0`` is aligned with ``gen`` when a truncation is given, otherwise
    with ``g``. Every branch records what it measured.
    """
    lam = float(lambda1.lambda1 if isinstance(lambda1, SpectralEstimate) else lambda1)
    u0 = np.asarray(u0, dtype=float)
    mu = gen.mu if gen is not None else g.mu
    checked = []

    def check(name, passed, value=None, detail=""):
        checked.append(Hypothesis(name, bool(passed), value, detail))
        return bool(passed)

    violations = validate_graph(g)
    base = check("graph_axioms", not violations, len(violations), "; ".join(violations))
    base &= check("lambda1_nonnegative", lam >= 0, lam)
    base &= check("datum_nonnegative", bool(np.all(u0 >= 0)), float(u0.min()) if u0.size else 0.0)
    s = _sample_grid(delta, u0)
    fs = src(s)
    base &= check("f_zero_at_zero", abs(fs[0]) <= 1e-14, float(fs[0]))
    base &= check("f_nonnegative_increasing", bool(np.all(fs >= 0) and np.all(np.diff(fs) >= -1e-12)))

    # blow-up branch
    blow = base
    if src.h is not None:
        hs = src.h(s)
        d1, d2 = np.diff(hs), np.diff(hs, 2)
        scale = max(1.0, float(np.max(np.abs(hs))))
        blow &= check("h_convex_increasing", abs(hs[0]) <= 1e-14 and np.all(d1 >= -1e-12 * scale)
                      and np.all(d2 >= -1e-10 * scale), detail="sampled on [0, 10 max(delta, |u0|)]")
        blow &= check("h_below_f", bool(np.all(hs <= fs + 1e-12 * scale)))
        osg: OsgoodResult = osgood_integral(src.h)
        blow &= check("osgood_finite", osg.finite, osg.value if osg.finite else "divergent",
                      f"tail log-slope {osg.tail_log_slope:.4f}")
        alpha = float(src.alpha)
        blow &= check("alpha_above_lambda1", alpha > lam, alpha, f"alpha={alpha:.6g} vs lambda1={lam:.6g}")
    else:
        blow = check("h_present", False, detail="no convex minorant registered")
    blow &= check("datum_nontrivial", bool(np.any(u0 > 0)))
    if gen is None or horizon is None:
        blow &= check("stochastic_completeness_proxy", False,
                      detail="hypothesis unverifiable at this truncation (no truncation/horizon given)")
    else:
        x = x0 if x0 is not None else gen.ids[int(np.argmax(u0))]
        times = np.linspace(horizon / 20.0, horizon, 20)
        worst = max(mass_defect(gen, x, t) for t in times)
        ok = check("stochastic_completeness_proxy", worst <= mass_tol, worst,
                   f"max mass defect at {x} up to t={horizon:g}")
        if not ok:
            checked[-1].detail += "; hypothesis unverifiable at this truncation"
        blow &= ok
    if blow:
        return Classification("blowup_all_data", checked)

    lip = src.lipschitz(delta)
    critical = lam > 0 and abs(lip - lam) <= crit_rtol * lam
    sup0 = linf_norm(u0)
    check("L_below_lambda1", lip < lam and not critical, lip, f"L(f, {delta:g}) = {lip:.6g} vs lambda1={lam:.6g}")
    check("datum_linf_below_delta", sup0 <= delta, sup0)
    check("lambda1_positive", lam > 0, lam)
    if base and lam > 0 and lip < lam and not critical and sup0 <= delta:
        return Classification("global_small_data", checked)

    check("L_equals_lambda1", critical, lip, f"relative tolerance {crit_rtol:g}")
    b12 = sup0 <= delta * math.exp(-lip * t_under)
    check("datum_linf_critical", b12, sup0, f"<= delta e^(-L t_under) = {delta * math.exp(-lip * t_under):.6g}")
    l1 = l1_norm(u0, mu)
    if gen is None:
        c_under, b12c = math.inf, False
        check("datum_l1_critical", False, l1, "kernel constant unavailable without a truncation")
    else:
        c_under = kernel_bound_constant(gen, t_under, lam)
        b12c = math.isfinite(c_under) and l1 <= delta / c_under
        check("datum_l1_critical", b12c, l1, f"mu-weighted l1 vs delta/C = {delta / c_under:.6g}, C={c_under:.6g}")
    if base and lam > 0 and critical and b12 and b12c:
        return Classification("critical_global_small_data", checked)
    return Classification("out_of_theory", checked)


# -- detector -----------------------------------------------------------------


@dataclass
class Detection:
    verdict: str  # blowup | bounded | inconclusive
    t_est: float | None
    t_halfwidth: float | None
    sup_norm: float
    supersolution_sup: float | None
    times: np.ndarray  # segment endpoints
    norms: np.ndarray
    result: PicardResult
    fit: tuple | None = None  # (slope, intercept) of 1/||u|| against t

    def as_dict(self) -> dict:
        return {"verdict": self.verdict, "t_est": self.t_est, "t_halfwidth": self.t_halfwidth,
                "sup_norm": self.sup_norm, "supersolution_sup": self.supersolution_sup,
                "segments": len(self.times) - 1}


def _reciprocal_fit(times, norms, n_fit):
    t = np.asarray(times[-n_fit:], dtype=float)
    r = 1.0 / np.asarray(norms[-n_fit:], dtype=float)
    slope, intercept = np.polyfit(t, r, 1)
    resid = r - (slope * t + intercept)
    return float(slope), float(intercept), float(np.max(np.abs(resid)))


def detect_blowup(gen: TruncatedGenerator, src: NonlinearSource, u0, horizon: float,
                  cap: float | None = None, *, delta: float | None = None, n_fit: int = 5,
                  bound_tol: float = 1e-6, result: PicardResult | None = None, **solver_kw) -> Detection:
    """Run the chained ball solver until ``horizon`` or until ||u||_inf > cap.

    Blow-up is declared when the cap is crossed and 1/||u|| over the last
    ``n_fit`` segment endpoints extrapolates linearly to zero; bounded when
    the horizon is reached with sup ||u|| <= sup ubar + bound_tol, where
    ubar = e^{Lt} e^{t Delta} u0 and L = L(f, delta).
    """
    u0 = np.asarray(u0, dtype=float)
    sup0 = linf_norm(u0)
    if cap is None:
        cap = 1e4 * max(sup0, 1.0)
    if not cap > 10 * sup0:
        raise ValueError("cap must exceed 10 * ||u0||_inf")
    if result is None:
        result = picard_solve(gen, src, u0, [0.0, float(horizon)], BallSup(), stop_above=cap, **solver_kw)
    times = np.array([0.0] + [s["t1"] for s in result.segments])
    norms = np.array([sup0] + [s["norm_end"] for s in result.segments])
    sup_norm = float(np.max(result.path.norm_trace))

    if result.stopped == "cap":
        if len(times) < max(n_fit, 2):
            return Detection("inconclusive", None, None, sup_norm, None, times, norms, result)
        slope, intercept, resid = _reciprocal_fit(times, norms, n_fit)
        if slope < 0:
            t_est = -intercept / slope
            return Detection("blowup", t_est, resid / abs(slope), sup_norm, None, times, norms, result,
                             (slope, intercept))
        return Detection("inconclusive", None, None, sup_norm, None, times, norms, result)

    d = delta if delta is not None else max(sup0, 1e-300)
    lip = src.lipschitz(d)
    with np.errstate(over="ignore"):
        sup_bar = supersolution_path(gen, src, u0, result.path.times, lip).sup
    verdict = "bounded" if sup_norm <= sup_bar + bound_tol else "inconclusive"
    return Detection(verdict, None, None, sup_norm, sup_bar, times, norms, result)


@dataclass
class BlowupCertificate:
    mode: str  # theoretical | numerical | none
    alpha: float | None
    lambda1: float
    tstar_upper: float | None
    evidence: dict = field(default_factory=dict)


def blowup_certificate(cls: Classification, lambda1: float, src: NonlinearSource,
                       detection: Detection | None = None, tstar_upper: float | None = None) -> BlowupCertificate:
    alpha = float(src.alpha) if src.h is not None else None
    evidence = {"verdict": cls.verdict}
    if detection is not None:
        evidence["detector"] = detection.as_dict()
    if cls.verdict == "blowup_all_data":
        finite = cls.hypothesis("osgood_finite").passed
        return BlowupCertificate("theoretical", alpha, lambda1, tstar_upper if finite else None, evidence)
    if detection is not None and detection.verdict == "blowup":
        return BlowupCertificate("numerical", alpha, lambda1, tstar_upper, evidence)
    return BlowupCertificate("none", alpha, lambda1, None, evidence)
