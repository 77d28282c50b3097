"""Bottom Dirichlet eigenvalue on growing balls, and the exponential decay rate of the kernel."""

import numpy as np

from graphflame import ball, decay_rate_fit, dirichlet_generator, lambda1_estimate, regular_tree

g = regular_tree(3, 9)
root = g.ids[0]
est = lambda1_estimate(g, root, [2, 4, 6, 8])
for r, lam, res in est.monotone_trace:
    print(f"R={r}: lambda1 = {lam:.6f} (residual {res:.1e})")
# with mu = degree the infinite 3-regular tree has bottom spectrum 1 - 2 sqrt(2) / 3
print(f"limit for the infinite tree: {1 - 2 * np.sqrt(2) / 3:.6f}")

gen = dirichlet_generator(g, ball(g, root, 8))
lam = est.lambda1
fit = decay_rate_fit(gen, root, root, np.linspace(20 / lam, 40 / lam, 41))
print(f"fitted log-slope of p(x0, x0, t): {fit.slope:.6f}  (-lambda1 = {-lam:.6f})")
