"""Heat kernel on a small weighted graph: symmetry, mass loss under truncation, semigroup law."""

import numpy as np

from graphflame import ball, dirichlet_generator, full_generator, kernel_matrix, mass_defect, regular_tree

g = regular_tree(3, 5)
root = g.ids[0]
full = full_generator(g)
trunc = dirichlet_generator(g, ball(g, root, 3))
print(f"tree with {g.n} vertices; radius-3 ball has {trunc.n}")

for t in (0.1, 1.0, 10.0):
    p = kernel_matrix(trunc, t)
    sym = np.max(np.abs(p - p.T))
    semi = np.max(np.abs((kernel_matrix(trunc, t / 2) * trunc.mu) @ kernel_matrix(trunc, t / 2) - p))
    print(f"t={t:5.1f}  asymmetry {sym:.1e}  semigroup error {semi:.1e}  "
          f"mass left at root: full {1 - mass_defect(full, root, t):.6f}, ball {1 - mass_defect(trunc, root, t):.6f}")
