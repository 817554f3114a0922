"""Repulsive case (a < 0 < c): continue from the scaled identity to the full problem."""

import numpy as np

from discrete_ep2 import Dirichlet, Parameters, homotopy_solve

for data in [(0.0, 0.0), (1.0, 1.0), (0.5, 2.0)]:
    params, bc = Parameters(-1.0, 0.0, 1.0, 8), Dirichlet(*data)
    rep = homotopy_solve(params, bc)
    lo, R = rep.info["box"]
    steps = len(rep.info["lambda_path"]) - 1
    smallest = min(v[1:-1].min() for v in rep.path)
    print(f"D={data}: {steps} continuation steps, residual {rep.residual_inf:.1e}, "
          f"box (0, {R:.3f}), smallest iterate {smallest:.4f}")
    print("   u =", np.round(rep.solution, 5))
