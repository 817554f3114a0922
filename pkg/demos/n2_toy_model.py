"""The two-interval problem reduces to one polynomial; count its positive roots."""

import numpy as np

from discrete_ep2 import Dirichlet, Parameters, enumerate_solutions, n2_analysis

bc = Dirichlet(1.0, 1.0)
cs = np.geomspace(1e-3, 1e3, 30)

for b in (0.0, 3.0):
    counts = []
    for c in cs:
        params = Parameters(-2.0, b, float(c), 2)
        rep, roots = n2_analysis(params, bc)
        assert rep.details["root_count"] == len(enumerate_solutions(params, bc))
        counts.append(rep.details["root_count"])
    print(f"b = {b}: threshold T = {rep.details['T']:.4f}")
    print("   root counts over c:", counts)

# first few c at b = 3 give three solutions; show them
rep, roots = n2_analysis(Parameters(-2.0, 3.0, float(cs[0]), 2), bc)
print("interior values at c = 1e-3:", np.round(roots, 6))
