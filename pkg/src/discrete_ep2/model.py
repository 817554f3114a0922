"""The discrete Ermakov-Painleve II problem.

Interior equation, for x = 1, ..., N-1::

    Delta^2 u_{x-1} = a u_x^3 + b x u_x + c / u_x^3

closed either by Dirichlet data ``u_0 = D0, u_N = DN`` or by the nonlinear
Robin relations ``Delta u_0 = f0(u_0), Delta u_{N-1} = fN(u_N)``.

Besides the residual this module carries the two equivalent formulations
used by the solvers: the polynomial system ``P`` obtained by clearing the
``u_x^3`` denominator, and the energy functional whose critical points are
the positive solutions.
"""

from dataclasses import dataclass, field, replace
import math

import numpy as np

__all__ = [
    "DomainError",
    "Parameters",
    "RobinFunction",
    "Dirichlet",
    "Robin",
    "G",
    "G_prime",
    "residual",
    "residual_inf",
    "residual_jacobian",
    "P",
    "Q",
    "functional_value",
    "functional_gradient",
    "functional_hessian",
    "identity_scale",
]

MONOTONICITY = ("nondecreasing", "nonincreasing", "none")


class DomainError(ValueError):
    """An argument lies outside the domain where the problem is defined."""


@dataclass(frozen=True)
class Parameters:
    """Coefficients ``a, b, c`` and grid size ``n`` (the N of the equation)."""

    a: float
    b: float
    c: float
    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"grid size N must be an integer >= 2, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        for name in ("a", "b", "c"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValueError(f"coefficient {name} must be finite")
            object.__setattr__(self, name, value)

    @property
    def regime(self):
        if self.c < 0:
            return "attractive"
        if self.c > 0:
            return "repulsive"
        return "degenerate"

    @property
    def interior(self):
        """Interior node indices 1, ..., N-1."""
        return np.arange(1, self.n)

    def with_(self, **changes):
        return replace(self, **changes)


@dataclass(frozen=True)
class RobinFunction:
    """Generalized polynomial ``f(s) = sum_k p_k s^{e_k}`` on s > 0.

    ``terms`` is a sequence of ``(coefficient, exponent)`` pairs with integer
    exponents in -3..3.  ``monotonicity`` is declared metadata; it is checked
    numerically against the sign of ``f'`` on a log grid when set.
    """

    terms: tuple = ()
    monotonicity: str = "none"

    def __post_init__(self):
        terms = []
        for coef, exp in self.terms:
            if int(exp) != exp or not -3 <= exp <= 3:
                raise ValueError(f"Robin exponent must be an integer in -3..3, got {exp!r}")
            terms.append((float(coef), int(exp)))
        object.__setattr__(self, "terms", tuple(terms))
        if self.monotonicity not in MONOTONICITY:
            raise ValueError(f"monotonicity must be one of {MONOTONICITY}")
        if self.monotonicity != "none" and not self.monotonicity_consistent():
            raise ValueError(
                f"declared {self.monotonicity} Robin function has a derivative "
                "of the wrong sign on (1e-6, 1e6)")

    @classmethod
    def constant(cls, value, monotonicity="none"):
        return cls(((value, 0),), monotonicity)

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        out = np.zeros_like(s)
        for coef, exp in self.terms:
            out = out + coef * s ** exp
        return out if out.ndim else float(out)

    def derivative(self, s):
        s = np.asarray(s, dtype=float)
        out = np.zeros_like(s)
        for coef, exp in self.terms:
            if exp != 0:
                out = out + coef * exp * s ** (exp - 1)
        return out if out.ndim else float(out)

    def antiderivative(self, s):
        """``F(s) = int f``; base point 0 for e >= 0 and 1 for e < 0.

        The base point only shifts ``F`` by a constant, which leaves the
        gradient of the Robin functional unchanged.
        """
        s = np.asarray(s, dtype=float)
        out = np.zeros_like(s)
        for coef, exp in self.terms:
            if exp >= 0:
                out = out + coef * s ** (exp + 1) / (exp + 1)
            elif exp == -1:
                out = out + coef * np.log(s)
            else:
                out = out + coef * (s ** (exp + 1) - 1.0) / (exp + 1)
        return out if out.ndim else float(out)

    def monotonicity_consistent(self, lo=1e-6, hi=1e6, num=2001):
        if self.monotonicity == "none":
            return True
        s = np.geomspace(lo, hi, num)
        d = self.derivative(s)
        size = np.zeros_like(s)
        for coef, exp in self.terms:
            if exp != 0:
                size = size + abs(coef * exp) * s ** (exp - 1)
        slack = 1e-12 * size
        if self.monotonicity == "nondecreasing":
            return bool(np.all(d >= -slack))
        return bool(np.all(d <= slack))

    def to_dict(self):
        return {"terms": [list(t) for t in self.terms], "monotonicity": self.monotonicity}

    @classmethod
    def from_dict(cls, data):
        if isinstance(data, (int, float)):
            return cls.constant(data)
        return cls(tuple(tuple(t) for t in data["terms"]),
                   data.get("monotonicity", "none"))


@dataclass(frozen=True)
class Dirichlet:
    """Fixed boundary values ``u_0 = d0`` and ``u_N = dn``."""

    d0: float
    dn: float
    kind: str = field(default="dirichlet", init=False)

    def __post_init__(self):
        for name in ("d0", "dn"):
            value = float(getattr(self, name))
            if not math.isfinite(value) or value < 0:
                raise ValueError(f"Dirichlet datum {name} must be finite and >= 0")
            object.__setattr__(self, name, value)

    @property
    def homogeneous(self):
        return self.d0 == 0 and self.dn == 0


@dataclass(frozen=True)
class Robin:
    """Nonlinear Robin relations ``Delta u_0 = f0(u_0)``, ``Delta u_{N-1} = fN(u_N)``."""

    f0: RobinFunction
    fn: RobinFunction
    kind: str = field(default="robin", init=False)


def _check_positive(u, indices):
    bad = [int(i) for i in indices if not u[i] > 0]
    if bad:
        raise DomainError(f"u must be positive at node {bad[0]} (u[{bad[0]}] = {u[bad[0]]!r})")


def _as_full(params, u):
    u = np.asarray(u, dtype=float)
    if u.ndim != 1 or len(u) != params.n + 1:
        raise ValueError(f"expected a grid function with {params.n + 1} values, got shape {u.shape}")
    return u


def _with_dirichlet(u, bc):
    u = u.copy()
    u[0], u[-1] = bc.d0, bc.dn
    return u


def G(params, x, t):
    """Right-hand side ``a t^3 + b x t + c / t^3`` at node(s) ``x``."""
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise DomainError("G is only defined for t > 0")
    out = params.a * t ** 3 + params.b * np.asarray(x) * t + params.c / t ** 3
    return out if np.ndim(out) else float(out)


def G_prime(params, x, t):
    """Derivative of ``G`` with respect to ``t``."""
    t = np.asarray(t, dtype=float)
    out = 3 * params.a * t ** 2 + params.b * np.asarray(x) - 3 * params.c / t ** 4
    return out if np.ndim(out) else float(out)


def residual(params, bc, u):
    """Residual rows of the boundary value problem, length N + 1.

    Interior rows are ``Delta^2 u_{x-1} - G_x(u_x)``.  Dirichlet rows are
    ``u_0 - D0`` and ``u_N - DN``; Robin rows are ``Delta u_0 - f0(u_0)`` and
    ``Delta u_{N-1} - fN(u_N)``.
    """
    u = _as_full(params, u)
    n = params.n
    _check_positive(u, range(1, n))
    r = np.empty(n + 1)
    r[1:-1] = u[2:] - 2 * u[1:-1] + u[:-2] - G(params, params.interior, u[1:-1])
    if bc.kind == "dirichlet":
        r[0] = u[0] - bc.d0
        r[-1] = u[-1] - bc.dn
    else:
        _check_positive(u, (0, n))
        r[0] = (u[1] - u[0]) - bc.f0(u[0])
        r[-1] = (u[-1] - u[-2]) - bc.fn(u[-1])
    return r


def residual_inf(params, bc, u):
    return float(np.max(np.abs(residual(params, bc, u))))


def residual_jacobian(params, bc, u):
    """Jacobian of :func:`residual` in ``scipy.linalg.solve_banded`` (1, 1) layout."""
    u = _as_full(params, u)
    n = params.n
    ab = np.zeros((3, n + 1))
    ab[0, 2:] = 1.0                      # d r_x / d u_{x+1}, interior rows
    ab[2, :-2] = 1.0                     # d r_x / d u_{x-1}, interior rows
    ab[1, 1:-1] = -2.0 - G_prime(params, params.interior, u[1:-1])
    if bc.kind == "dirichlet":
        ab[1, 0] = ab[1, -1] = 1.0
    else:
        ab[1, 0] = -1.0 - bc.f0.derivative(u[0])
        ab[0, 1] = 1.0
        ab[1, -1] = 1.0 - bc.fn.derivative(u[-1])
        ab[2, -2] = -1.0
    return ab


def P(params, bc, u):
    """Polynomial rows ``a u^6 + (2 + b x) u^4 - (u_{x-1} + u_{x+1}) u^3 + c``.

    Boundary entries of ``u`` are replaced by the Dirichlet data.  For
    positive ``u_x`` one has ``P_x = -u_x^3 R_x``.
    """
    u = _with_dirichlet(_as_full(params, u), bc)
    x = params.interior
    v = u[1:-1]
    return (params.a * v ** 6 + (2 + params.b * x) * v ** 4
            - (u[:-2] + u[2:]) * v ** 3 + params.c)


def Q(params, bc, u):
    """``P`` without the constant: ``u^3 [a u^3 + (2 + b x) u - (u_{x-1} + u_{x+1})]``."""
    u = _with_dirichlet(_as_full(params, u), bc)
    x = params.interior
    v = u[1:-1]
    return v ** 3 * (params.a * v ** 3 + (2 + params.b * x) * v - (u[:-2] + u[2:]))


def functional_value(params, bc, u):
    """Energy whose critical points are the positive solutions.

    ``1/2 sum (Delta u)^2 + a/4 sum u^4 + b/2 sum x u^2 - c/2 sum u^-2`` over
    interior nodes, with Dirichlet data substituted at the ends.  Under Robin
    conditions the ends are free and ``F0(u_0) - FN(u_N)`` is added.
    """
    u = _as_full(params, u)
    if bc.kind == "dirichlet":
        u = _with_dirichlet(u, bc)
    else:
        _check_positive(u, (0, params.n))
    _check_positive(u, range(1, params.n))
    x = params.interior
    v = u[1:-1]
    d = u[1:] - u[:-1]
    value = (0.5 * np.dot(d, d) + 0.25 * params.a * np.sum(v ** 4)
             + 0.5 * params.b * np.sum(x * v ** 2) - 0.5 * params.c * np.sum(v ** -2.0))
    if bc.kind == "robin":
        value += bc.f0.antiderivative(u[0]) - bc.fn.antiderivative(u[-1])
    return float(value)


def functional_gradient(params, bc, u):
    """Gradient of :func:`functional_value`.

    Dirichlet: the N-1 interior partials.  Robin: all N+1 partials, with
    ``f0(u_0) + u_0 - u_1`` and ``-fN(u_N) + u_N - u_{N-1}`` at the ends.
    Interior rows equal minus the residual rows.
    """
    u = _as_full(params, u)
    if bc.kind == "dirichlet":
        u = _with_dirichlet(u, bc)
    _check_positive(u, range(1, params.n))
    v = u[1:-1]
    x = params.interior
    inner = (2 * v - (u[:-2] + u[2:]) + params.a * v ** 3 + params.b * x * v
             + params.c / v ** 3)
    if bc.kind == "dirichlet":
        return inner
    _check_positive(u, (0, params.n))
    g = np.empty(params.n + 1)
    g[1:-1] = inner
    g[0] = bc.f0(u[0]) + u[0] - u[1]
    g[-1] = -bc.fn(u[-1]) + u[-1] - u[-2]
    return g


def functional_hessian(params, bc, u):
    """Hessian of the functional in ``solveh_banded`` upper form (2 rows)."""
    u = _as_full(params, u)
    if bc.kind == "dirichlet":
        u = _with_dirichlet(u, bc)
    x = params.interior
    inner = 2.0 + G_prime(params, x, u[1:-1])
    if bc.kind == "dirichlet":
        diag = inner
    else:
        diag = np.concatenate(([1.0 + bc.f0.derivative(u[0])], inner,
                               [1.0 - bc.fn.derivative(u[-1])]))
    ab = np.zeros((2, len(diag)))
    ab[0, 1:] = -1.0
    ab[1] = diag
    return ab


def identity_scale(params, u):
    """Magnitude ``1 + max|u|^6 + |c| min(u_int)^-3`` for rounding tolerances."""
    u = np.asarray(u, dtype=float)
    return 1.0 + np.max(np.abs(u)) ** 6 + abs(params.c) * np.min(u[1:-1]) ** -3.0
