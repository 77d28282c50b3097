"""Critical case f(u) = lambda1 u clamped at delta: ball solutions increase with the radius and stay
below the supersolution."""

import logging
import math

import numpy as np

from graphflame import (ball, clamped_linear, dirichlet_generator, exhaust_solve, kernel_bound_constant,
                        lambda1_estimate, regular_tree)

# the quadrature reports when it stalls just short of its target; the comparison check still runs
logging.getLogger("graphflame").setLevel(logging.ERROR)

g = regular_tree(3, 9)
root = g.ids[0]
radii = [3, 5, 7]
lam = lambda1_estimate(g, root, radii).lambda1
gen = dirichlet_generator(g, ball(g, root, radii[-1]))
C = kernel_bound_constant(gen, 1.0, lam)
amp = min(math.exp(-lam), 1 / (C * g.mu[0]))
u0 = amp * g.function({root: 1.0})
ex = exhaust_solve(g, clamped_linear(lam, 1.0), u0, root, radii, np.linspace(0, 20, 11), L=lam, delta=1.0)
print(f"lambda1 = {lam:.5f}, kernel constant C = {C:.4f}, spike height {amp:.4f}")
for (a, b), gap in zip(zip(radii, radii[1:]), ex.gaps):
    print(f"sup |u_{b} - u_{a}| = {gap:.3e}")
print(f"monotone violation {ex.monotone_violation:.1e}, comparison violation {ex.comparison_violation:.1e}")
