"""Blow-up versus global existence on a truncated tree, switching only f'(0) relative to lambda1."""

import numpy as np

from graphflame import ball, classify, detect_blowup, dirichlet_generator, linear_plus_power, regular_tree

g = regular_tree(3, 6)
gen = dirichlet_generator(g, ball(g, g.ids[0], 6))
lam = gen.eig[0][0]
phi = np.abs(gen.eig[1][:, 0] / np.sqrt(gen.mu))
phi /= phi.max()
print(f"lambda1 = {lam:.5f}")

src = linear_plus_power(1.5 * lam)
det = detect_blowup(gen, src, 0.01 * phi, horizon=100 / lam)
cls = classify(g, src, 0.01 * phi, lam, 0.01, gen=gen, horizon=1.0)
print(f"alpha = 1.5 lambda1: classifier {cls.verdict}; detector {det.verdict}, t_est = {det.t_est:.3f}")

delta = 0.1 * lam
src = linear_plus_power(0.5 * lam)
det = detect_blowup(gen, src, delta * phi, horizon=50 / lam, delta=delta)
cls = classify(g, src, delta * phi, lam, delta, gen=gen, horizon=1.0)
print(f"alpha = 0.5 lambda1, L(f, delta) = {src.lipschitz(delta) / lam:.2f} lambda1: classifier {cls.verdict}; "
      f"detector {det.verdict}, sup |u| = {det.sup_norm:.4g} <= sup ubar = {det.supersolution_sup:.4g}")
