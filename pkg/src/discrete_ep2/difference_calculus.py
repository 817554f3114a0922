"""Discrete derivatives, norms and the first Dirichlet eigenvalue on {0, ..., N}.

A grid function is a 1-D float array ``u`` of length ``N + 1`` holding
``u_0, ..., u_N``.  Operators return plain arrays: ``delta(u)`` has length
``N`` and ``delta2(u)`` has length ``N - 1`` with ``delta2(u)[x - 1]`` the
centred second difference at the interior node ``x``.
"""

import numpy as np

__all__ = [
    "grid_function",
    "grid_size",
    "delta",
    "delta2",
    "norm2",
    "lambda1",
    "summation_by_parts_residual",
    "dirichlet_eigenvector",
]


def grid_function(values, positive=False):
    """Validate ``values`` as a grid function and return it as a float array.

    Parameters
    ----------
    values : array_like
        The ``N + 1`` nodal values.
    positive : bool
        Require every entry to be strictly positive.

    Raises
    ------
    ValueError
        If the array is not 1-D, has fewer than 2 entries, is not finite, or
        violates positivity.
    """
    u = np.asarray(values, dtype=float)
    if u.ndim != 1:
        raise ValueError(f"grid function must be 1-D, got shape {u.shape}")
    if u.size < 2:
        raise ValueError("grid function needs at least two nodes (N >= 1)")
    if not np.all(np.isfinite(u)):
        raise ValueError("grid function has non-finite entries")
    if positive and np.any(u <= 0):
        bad = int(np.flatnonzero(u <= 0)[0])
        raise ValueError(f"grid function must be positive, u[{bad}] = {u[bad]!r}")
    return u


def grid_size(u):
    """Return N for a grid function with N + 1 nodes."""
    return len(u) - 1


def delta(u):
    """Forward difference ``u[x+1] - u[x]`` for x = 0, ..., N-1."""
    u = np.asarray(u, dtype=float)
    return u[1:] - u[:-1]


def delta2(u):
    """Second difference ``u[x+1] - 2 u[x] + u[x-1]`` for x = 1, ..., N-1."""
    u = np.asarray(u, dtype=float)
    if u.size < 3:
        raise ValueError("second difference needs N >= 2")
    return u[2:] - 2.0 * u[1:-1] + u[:-2]


def norm2(v):
    """Euclidean norm of any sequence (u, its differences, ...)."""
    v = np.asarray(v, dtype=float)
    if v.size == 0:
        raise ValueError("norm of an empty sequence")
    return float(np.sqrt(np.dot(v, v)))


def lambda1(n):
    """First eigenvalue ``4 sin^2(pi / 2N)`` of ``-Delta^2`` with zero Dirichlet data."""
    if int(n) != n or n < 2:
        raise ValueError(f"lambda1 needs an integer N >= 2, got {n!r}")
    return 4.0 * np.sin(np.pi / (2 * n)) ** 2


def dirichlet_eigenvector(n):
    """The eigenvector ``sin(pi x / N)`` attaining ``lambda1(n)``."""
    x = np.arange(n + 1)
    v = np.sin(np.pi * x / n)
    v[0] = v[-1] = 0.0
    return v


def summation_by_parts_residual(u):
    """Absolute defect of the discrete summation-by-parts identity.

    Left side: ``sum_{x=1}^{N-1} Delta^2 u_{x-1} u_x``.  Right side:
    ``Delta u_{N-1} u_{N-1} - Delta u_0 u_1 - sum_{x=1}^{N-2} (Delta u_x)^2``.
    The identity is exact, so the result is pure rounding.
    """
    u = np.asarray(u, dtype=float)
    n = grid_size(u)
    if n < 2:
        raise ValueError("summation by parts needs N >= 2")
    d = delta(u)
    lhs = float(np.dot(delta2(u), u[1:-1]))
    rhs = d[n - 1] * u[n - 1] - d[0] * u[1] - float(np.dot(d[1:n - 1], d[1:n - 1]))
    return abs(lhs - rhs)
