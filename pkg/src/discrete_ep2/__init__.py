"""Positive solutions of the discrete Ermakov-Painleve II boundary value problem.

``Delta^2 u_{x-1} = a u_x^3 + b x u_x + c / u_x^3`` for x = 1, ..., N-1 with
Dirichlet or nonlinear Robin data at x = 0 and x = N.
"""

from .analysis import (ConditionReport, beta_cond_check, b_star, c_star, enumerate_solutions,
                       homogeneous_regime, interval_Ic, n2_analysis, uniqueness_condition)
from .continuum import ContinuousParameters, convergence_study, discretize
from .model import Dirichlet, DomainError, Parameters, Robin, RobinFunction, residual
from .solvers import (HypothesisError, SolveReport, SolverConfig, SolverError, homotopy_solve,
                      lower_upper_solve, newton_solve, small_c_homotopy_solve, solve,
                      variational_solve, homogeneous_limit_solve, build_bounds)

__version__ = "0.1.0"

__all__ = [
    "Parameters", "Dirichlet", "Robin", "RobinFunction", "DomainError", "residual",
    "SolverConfig", "SolveReport", "SolverError", "HypothesisError", "solve", "newton_solve",
    "build_bounds", "lower_upper_solve", "homotopy_solve", "small_c_homotopy_solve",
    "variational_solve", "homogeneous_limit_solve",
    "ConditionReport", "uniqueness_condition", "beta_cond_check", "interval_Ic", "b_star",
    "c_star", "homogeneous_regime", "enumerate_solutions", "n2_analysis",
    "ContinuousParameters", "discretize", "convergence_study",
]
