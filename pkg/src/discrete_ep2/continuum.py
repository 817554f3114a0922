"""Map the continuous equation ``y'' = A y^3 + B z y + C / y^3`` on [0, 1] to the grid.

With ``z = x / N`` and ``y(x / N) ~ u_x`` the second difference carries a
factor ``1 / N^2``, which gives ``a = A / N^2``, ``b = B / N^3`` and
``c = C / N^2``.  Convergence here means self-consistency across N: there is
no independent ODE solver, only comparisons of discrete solutions on nested
grids.
"""

from dataclasses import dataclass
import math

import numpy as np

from . import analysis, solvers
from .model import Dirichlet, Parameters

__all__ = [
    "ContinuousParameters",
    "ConvergenceTable",
    "discretize",
    "convergence_study",
    "scaled_uniqueness_margin",
    "limiting_uniqueness_margin",
    "beta_cond_failure_threshold",
]


@dataclass(frozen=True)
class ContinuousParameters:
    A: float
    B: float
    C: float
    y0: float = 0.0
    y1: float = 0.0

    def __post_init__(self):
        for name in ("A", "B", "C", "y0", "y1"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, value)
        if self.y0 < 0 or self.y1 < 0:
            raise ValueError("boundary data y(0), y(1) must be >= 0")


def discretize(cp, n):
    """Discrete parameters and Dirichlet data for grid size ``n``."""
    if int(n) != n or n < 2:
        raise ValueError(f"N must be an integer >= 2, got {n!r}")
    n = int(n)
    params = Parameters(cp.A / n ** 2, cp.B / n ** 3, cp.C / n ** 2, n)
    return params, Dirichlet(cp.y0, cp.y1)


@dataclass
class ConvergenceTable:
    """Per-N solutions plus Cauchy differences between consecutive grids.

    ``differences[k]`` is the sup-norm gap between the solutions on
    ``ns[k]`` and ``ns[k + 1]``, measured on the nodes of the finer grid;
    ``ratios[k] = differences[k] / differences[k + 1]`` (nan when the
    denominator vanishes).
    """

    ns: list
    solutions: list
    reports: list
    differences: list
    ratios: list

    def rows(self):
        """``(N, sup-difference to the previous N, ratio)`` with blanks as nan."""
        out = []
        for k, n in enumerate(self.ns):
            diff = self.differences[k - 1] if k > 0 else math.nan
            ratio = self.ratios[k - 2] if k > 1 else math.nan
            out.append((n, diff, ratio))
        return out


def convergence_study(cp, ns, cfg=None, method="auto"):
    """Solve the scaled problem for each N and compare consecutive grids.

    Solutions are compared by interpolating the coarser one piecewise
    linearly onto the finer grid ``x / N``.  A failed solve raises
    :class:`solvers.SolverError` whose message names the offending N and
    whose ``report`` attribute holds the partial table.
    """
    ns = [int(n) for n in ns]
    if len(ns) < 1:
        raise ValueError("need at least one N")
    sols, reports = [], []
    for n in ns:
        params, bc = discretize(cp, n)
        try:
            rep = solvers.solve(params, bc, method=method, cfg=cfg)
        except (solvers.SolverError, solvers.HypothesisError, ValueError) as err:
            partial = _table(ns[:len(sols)], sols, reports)
            raise solvers.SolverError(f"continuum solve failed at N={n}: {err}", partial) from err
        sols.append(rep.solution)
        reports.append(rep)
    return _table(ns, sols, reports)


def _table(ns, sols, reports):
    diffs = []
    for k in range(len(sols) - 1):
        coarse, fine = sols[k], sols[k + 1]
        z_c = np.linspace(0.0, 1.0, len(coarse))
        z_f = np.linspace(0.0, 1.0, len(fine))
        if len(coarse) > len(fine):
            coarse, fine, z_c, z_f = fine, coarse, z_f, z_c
        diffs.append(float(np.max(np.abs(np.interp(z_f, z_c, coarse) - fine))))
    ratios = [d0 / d1 if d1 > 0 else math.nan for d0, d1 in zip(diffs, diffs[1:])]
    return ConvergenceTable(list(ns), sols, reports, diffs, ratios)


def scaled_uniqueness_margin(cp, n):
    """``N^3`` times the discrete Dirichlet uniqueness margin (needs A > 0 > C)."""
    params, _ = discretize(cp, n)
    return analysis.uniqueness_condition(params).margin * n ** 3


def limiting_uniqueness_margin(cp):
    """``B - 9 (A^2 C / 4)^(1/3) + pi^2``, the N -> infinity limit of the above."""
    return cp.B - 9.0 * float(np.cbrt(cp.A ** 2 * cp.C / 4.0)) + math.pi ** 2


def beta_cond_failure_threshold(cp):
    """Smallest N beyond which ``4 b^3 + 27 c a^2 < 0`` for every larger grid.

    The scaled margin is ``(4 B^3 / N^3 + 27 C A^2) / N^6``, negative exactly
    when ``N^3 > 4 B^3 / (27 |C| A^2)``.  Returns the smallest integer
    ``N0 >= 2`` with the margin negative for all ``N >= N0``.
    """
    if not (cp.A < 0 < cp.B and cp.C < 0):
        raise ValueError("the beta-cond threshold is defined for A < 0 < B, C < 0")
    cube = 4.0 * cp.B ** 3 / (27.0 * abs(cp.C) * cp.A ** 2)
    n0 = max(2, math.floor(np.cbrt(cube)) + 1)
    # floor of the cube root can be off by one in floating point
    while n0 > 2 and (n0 - 1) ** 3 > cube:
        n0 -= 1
    while n0 ** 3 <= cube:
        n0 += 1
    return n0
