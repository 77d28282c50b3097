import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import graph_seeds, random_graph
from graphflame import (NonlinearSource, SolutionPath, ball, blowup_certificate, blowup_time_upper_bound,
                        classify, complete, cycle, detect_blowup, dirichlet_generator, full_generator,
                        heat_lower_bound, jensen_gaps, linear, linear_plus_power, ode_comparison_bound,
                        phi_trace, picard_solve, power, regular_tree, semigroup_apply, zero)


@pytest.fixture(scope="module")
def tree():
    g = regular_tree(3, 6)
    gen = dirichlet_generator(g, ball(g, g.ids[0], 6))
    lam = gen.eig[0][0]
    phi = gen.eig[1][:, 0] / np.sqrt(gen.mu)
    phi = np.abs(phi)
    return g, gen, lam, phi / phi.max()


# -- Phi ------------------------------------------------------------------------


def test_phi_of_zero_path_is_zero():
    gen = full_generator(cycle(5))
    times = np.linspace(0, 1, 5)
    tr = phi_trace(gen, SolutionPath(times, np.zeros((5, 5)), [], gen.ids), gen.ids[0], 1.0)
    assert np.all(tr.values == 0) and tr.phi0 == 0


def test_phi_constant_for_linear_flow_and_endpoint_values():
    g = cycle(6)
    gen = full_generator(g)
    u0 = np.linspace(0.1, 1.0, 6)
    T = 2.0
    res = picard_solve(gen, zero(), u0, np.linspace(0, T, 9))
    tr = phi_trace(gen, res.path, g.ids[2], T)
    assert np.ptp(tr.values) <= 1e-8
    assert tr.phi0 == pytest.approx(semigroup_apply(gen, u0, T)[2], abs=1e-12)
    assert tr.values[-1] == pytest.approx(res.path.final[2], abs=1e-12)
    with pytest.raises(ValueError):
        phi_trace(gen, res.path, g.ids[2], 3.0)


def test_phi_monotone_and_jensen_for_nonlinear_flow(tree):
    g = cycle(6)
    gen = full_generator(g)
    u0 = np.linspace(0.1, 0.6, 6)
    res = picard_solve(gen, power(2), u0, np.linspace(0, 1, 5))
    tr = phi_trace(gen, res.path, g.ids[0], 1.0)
    assert tr.is_nondecreasing(1e-6) and np.all(tr.values > 0)
    assert jensen_gaps(gen, res.path, g.ids[0], 1.0, power(2).h).min() >= -1e-8
    # Dirichlet truncation: the defect-corrected pairing keeps the inequality
    _, tgen, lam, phi = tree
    src = linear_plus_power(lam, 2, 1)
    res = picard_solve(tgen, src, 0.2 * phi, np.linspace(0, 2, 5))
    assert jensen_gaps(tgen, res.path, tgen.ids[0], 2.0, src.h).min() >= -1e-8
    assert phi_trace(tgen, res.path, tgen.ids[0], 2.0).is_nondecreasing(1e-6)


def test_single_term_lower_bound():
    g = regular_tree(3, 4)
    gen = full_generator(g)
    u0 = np.random.default_rng(0).uniform(0, 1, g.n)
    out = heat_lower_bound(gen, u0, g.ids[0], np.linspace(0.1, 200, 100), lambda1=0.0, eps=0.05)
    assert out["min_single_term_gap"] >= 0
    assert out["C1"] == pytest.approx(u0[0] * 3)
    assert out["holds_after_t0"]


# -- comparison ODE -----------------------------------------------------------------


def test_comparison_bound_examples():
    b = ode_comparison_bound(power(2), 1.0, 1.0)
    assert not b.applicable and "alpha" in b.reason
    sq = NonlinearSource("sq", power(2).f, h=power(2).h, alpha_exact=1e-300)
    b = ode_comparison_bound(sq, 1.0, 1.0)
    assert b.applicable and b.tbar == 0 and b.tstar_upper == pytest.approx(1.0, rel=1e-9)
    b = ode_comparison_bound(linear_plus_power(1.0), 0.5, 1.0)
    assert b.tbar == pytest.approx(math.log(2), rel=1e-12)
    assert b.H == pytest.approx(math.log(2), rel=1e-9)
    assert b.tstar_upper == pytest.approx(2 * math.log(2), abs=1e-6)
    assert not ode_comparison_bound(linear(1.0), 0.5, 1.0).applicable


def test_blowup_time_upper_bound_dominates_true_time():
    gen = full_generator(complete(2))
    src = linear_plus_power(1.0)
    u0 = np.full(2, 1.0)  # u' = u + u^2 blows up at log 2
    tb = blowup_time_upper_bound(gen, src, u0, gen.ids[0], 2.0, np.linspace(0.05, 5, 100))
    assert tb is not None and tb >= math.log(2)


# -- classifier ---------------------------------------------------------------------


def test_classify_small_power_is_global(tree):
    g, gen, lam, phi = tree
    delta = 0.1 * lam
    cls = classify(g, power(2), delta * phi, lam, delta, gen=gen, horizon=1.0)
    assert cls.verdict == "global_small_data"
    assert cls.hypothesis("alpha_above_lambda1").passed is False


def test_classify_linear_above_lambda_is_out_of_theory(tree):
    g, gen, lam, phi = tree
    cls = classify(g, linear(2 * lam), 0.01 * phi, lam, 0.01, gen=gen, horizon=1.0)
    assert cls.verdict == "out_of_theory"
    assert not cls.hypothesis("osgood_finite").passed


def test_classify_boundary_alpha_equal_lambda(tree):
    g, gen, lam, phi = tree
    delta = 1e-3
    cls = classify(g, linear_plus_power(lam), 1e-4 * phi, lam, delta, gen=gen, horizon=1.0)
    assert cls.verdict == "out_of_theory"
    assert cls.hypothesis("L_below_lambda1").value == pytest.approx(lam + 2 * delta)


def test_classification_is_json_ready(tree):
    import json

    g, gen, lam, phi = tree
    d = classify(g, linear(2 * lam), 0.01 * phi, lam, 0.01, gen=gen).as_dict()
    json.dumps(d)
    assert any("unverifiable" in h["detail"] for h in d["hypotheses"])


# -- detector ------------------------------------------------------------------------


def test_detector_scalar_blowup():
    gen = full_generator(cycle(4))
    det = detect_blowup(gen, power(2), np.ones(4), horizon=2.0)
    assert det.verdict == "blowup" and 0.98 <= det.t_est <= 1.02
    assert det.t_halfwidth < 1e-3


def test_detector_zero_source_bounded(tree):
    _, gen, _, phi = tree
    det = detect_blowup(gen, zero(), phi, horizon=20.0)
    assert det.verdict == "bounded" and det.sup_norm <= 1.0 + 1e-12


def test_detector_small_quadratic_bounded(tree):
    _, gen, lam, phi = tree
    delta = 0.2 * lam
    det = detect_blowup(gen, power(2), delta * phi, horizon=50 / lam, delta=delta)
    assert det.verdict == "bounded" and det.sup_norm <= det.supersolution_sup + 1e-6


def test_detector_cap_precondition(tree):
    _, gen, _, phi = tree
    with pytest.raises(ValueError):
        detect_blowup(gen, power(2), phi, horizon=1.0, cap=5.0)


def test_certificate_modes(tree):
    g, gen, lam, phi = tree
    src = linear_plus_power(1.5 * lam)
    cls = classify(g, src, 0.01 * phi, lam, 0.01, gen=gen, horizon=1.0)
    assert cls.verdict == "blowup_all_data"
    cert = blowup_certificate(cls, lam, src, tstar_upper=12.0)
    assert cert.mode == "theoretical" and cert.tstar_upper == 12.0
    cls2 = classify(g, linear(2 * lam), 0.01 * phi, lam, 0.01, gen=gen, horizon=1.0)
    assert blowup_certificate(cls2, lam, linear(2 * lam)).mode == "none"


@given(graph_seeds, st.integers(4, 30), st.floats(0.05, 0.5))
def test_phi_monotone_property(seed, n, scale):
    g = random_graph(seed, n)
    gen = dirichlet_generator(g, ball(g, g.ids[0], 2)) if seed % 2 else full_generator(g)
    u0 = scale * np.random.default_rng(seed).uniform(0, 1, gen.n)
    src = linear_plus_power(0.5, 2, 1)
    res = picard_solve(gen, src, u0, np.linspace(0, 0.5, 3))
    x = gen.ids[int(np.argmax(u0))]
    tr = phi_trace(gen, res.path, x, 0.5)
    assert tr.is_nondecreasing(1e-9 * max(1.0, tr.values.max()))
    assert jensen_gaps(gen, res.path, x, 0.5, src.h).min() >= -1e-8
