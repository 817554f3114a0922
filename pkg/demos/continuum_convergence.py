"""Refining the grid under the continuum scaling a = A/N^2, b = B/N^3, c = C/N^2."""

from discrete_ep2 import ContinuousParameters, convergence_study
from discrete_ep2.continuum import limiting_uniqueness_margin, scaled_uniqueness_margin

cp = ContinuousParameters(A=1.0, B=1.0, C=-1.0, y0=1.0, y1=1.0)
table = convergence_study(cp, (16, 32, 64, 128, 256))

print("   N   sup diff      ratio")
for n, diff, ratio in table.rows():
    print(f"{n:4d}   {diff:.3e}   {ratio:.3f}")

limit = limiting_uniqueness_margin(cp)
for n in (16, 64, 256, 1024):
    print(f"N={n:5d}: margin * N^3 = {scaled_uniqueness_margin(cp, n):.5f}  (limit {limit:.5f})")
