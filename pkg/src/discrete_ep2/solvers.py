"""Constructive solvers for positive solutions.

All solvers work on the full grid vector ``u = (u_0, ..., u_N)`` and return
a :class:`SolveReport`.  Failures raise :class:`SolverError` (numerical
trouble, budget exhausted, path lost) or :class:`HypothesisError` (the
parameters are outside the regime the method is built for).

Methods
-------
lower_upper
    Truncation between a lower and an upper solution, solved by Newton with a
    shifted Picard fallback on the tridiagonal operator ``Delta^2 - K``.
newton
    Damped Newton on the residual with a fraction-to-boundary positivity rule.
homotopy
    Continuation from ``a u^6 + c = 0`` (root ``(-c/a)^(1/6)``) to the
    polynomial form of the equation, for ``a c < 0``.
small_c_homotopy
    For ``a, c > 0``: a root of the ``c = 0`` system inside an explicit box,
    followed by continuation in ``c``.
variational
    Descent on the energy functional (its negative when ``a < 0``).
homogeneous_limit
    Zero Dirichlet data reached as the limit of data ``r_k -> 0``.
"""

from dataclasses import dataclass, field
import logging
import math

import numpy as np
from scipy.linalg import LinAlgError, solve_banded, solveh_banded

from . import analysis
from .model import (
    Dirichlet,
    DomainError,
    G,
    G_prime,
    functional_gradient,
    functional_hessian,
    functional_value,
    residual,
    residual_jacobian,
)

__all__ = [
    "SolverConfig",
    "SolveReport",
    "SolverError",
    "HypothesisError",
    "METHODS",
    "build_bounds",
    "lower_upper_solve",
    "newton_solve",
    "homotopy_solve",
    "homotopy_radius",
    "small_c_box",
    "small_c_homotopy_solve",
    "variational_solve",
    "homogeneous_limit_solve",
    "solve",
]

log = logging.getLogger(__name__)

METHODS = ("lower_upper", "newton", "homotopy", "small_c_homotopy", "variational",
           "homogeneous_limit")


@dataclass
class SolverConfig:
    tol_residual: float = 1e-10
    max_iter: int = 200
    newton_backtrack_factor: float = 0.5
    homotopy_initial_step: float = 0.05
    homotopy_min_step: float = 1e-6
    positivity_fraction: float = 0.1
    picard_max_iter: int = 5000

    def __post_init__(self):
        for name in ("tol_residual", "homotopy_initial_step", "homotopy_min_step"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.max_iter < 1 or self.picard_max_iter < 1:
            raise ValueError("iteration budgets must be positive")
        if not 0 < self.newton_backtrack_factor < 1:
            raise ValueError("newton_backtrack_factor must lie in (0, 1)")
        if not 0 < self.positivity_fraction < 1:
            raise ValueError("positivity_fraction must lie in (0, 1)")


@dataclass
class SolveReport:
    solution: np.ndarray
    method: str
    residual_inf: float
    iterations: int
    bounds_used: tuple = None
    trace: list = field(default_factory=list)
    path: list = field(default_factory=list)
    info: dict = field(default_factory=dict)

    def to_dict(self):
        bounds = None
        if self.bounds_used is not None:
            bounds = {"alpha": [float(v) for v in self.bounds_used[0]],
                      "beta": [float(v) for v in self.bounds_used[1]]}
        return {"method": self.method, "residual_inf": float(self.residual_inf),
                "iterations": int(self.iterations),
                "solution": [float(v) for v in self.solution], "bounds": bounds}


class SolverError(RuntimeError):
    """A solver ran but did not deliver a solution."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class HypothesisError(ValueError):
    """The parameters violate a hypothesis the requested method relies on."""


def _config(cfg):
    return SolverConfig() if cfg is None else cfg


def _inf(v):
    return float(np.max(np.abs(v))) if len(v) else 0.0


def _full(params, values):
    return np.broadcast_to(np.asarray(values, dtype=float), (params.n + 1,)).copy()


def _positive_nodes(params, bc):
    n = params.n
    return np.arange(1, n) if bc.kind == "dirichlet" else np.arange(0, n + 1)


# -- damped Newton ------------------------------------------------------------

def _damped_newton(fun, jac, u, cfg, keep_positive=None, max_iter=None):
    """Newton with backtracking on the sup norm of ``fun``.

    ``jac`` returns a tridiagonal matrix in (1, 1) banded layout.  Entries in
    ``keep_positive`` may shrink by at most the positivity fraction per step.
    Returns ``(u, iterations, trace, path, status)``.
    """
    max_iter = cfg.max_iter if max_iter is None else max_iter
    r = fun(u)
    res = _inf(r)
    trace, path = [res], [u.copy()]
    for it in range(max_iter):
        if res <= cfg.tol_residual:
            return _final_step(fun, jac, u, r, it, trace, path)
        try:
            with np.errstate(all="ignore"):
                step = solve_banded((1, 1), jac(u), -r)
        except (LinAlgError, ValueError):
            return u, it, trace, path, "singular"
        if not np.all(np.isfinite(step)):
            return u, it, trace, path, "singular"
        t = 1.0
        while True:
            cand = u + t * step
            if keep_positive is None or np.all(
                    cand[keep_positive] >= cfg.positivity_fraction * u[keep_positive]):
                try:
                    rc = fun(cand)
                except DomainError:
                    rc = None
                if rc is not None and np.all(np.isfinite(rc)) and _inf(rc) < res:
                    break
            t *= cfg.newton_backtrack_factor
            if t < 1e-14:
                return u, it, trace, path, "stalled"
        u, r, res = cand, rc, _inf(rc)
        trace.append(res)
        path.append(u.copy())
    status = "converged" if res <= cfg.tol_residual else "budget"
    return u, max_iter, trace, path, status


def _final_step(fun, jac, u, r, it, trace, path):
    # one more undamped step at the converged point: near-free at quadratic
    # convergence, kept only if it does not raise the residual
    res = trace[-1]
    if res > 0:
        try:
            with np.errstate(all="ignore"):
                cand = u + solve_banded((1, 1), jac(u), -r)
            rc = _inf(fun(cand))
        except (LinAlgError, ValueError):
            rc = np.inf
        if rc <= res and np.all(np.isfinite(cand)):
            u, it = cand, it + 1
            trace.append(rc)
            path.append(u.copy())
    return u, it, trace, path, "converged"


def newton_solve(params, bc, u0, cfg=None):
    """Damped Newton on the full residual from a positive starting point."""
    cfg = _config(cfg)
    u = _full(params, u0)
    if bc.kind == "dirichlet":
        u[0], u[-1] = bc.d0, bc.dn
    idx = _positive_nodes(params, bc)
    if np.any(u[idx] <= 0):
        raise DomainError("newton_solve needs a strictly positive starting point")
    u, it, trace, path, status = _damped_newton(
        lambda v: residual(params, bc, v), lambda v: residual_jacobian(params, bc, v),
        u, cfg, keep_positive=idx)
    report = SolveReport(u, "newton", trace[-1], it, trace=trace, path=path)
    if status != "converged":
        message = {"singular": "singular Jacobian", "stalled": "Newton line search stalled",
                   "budget": "iteration budget exhausted"}[status]
        raise SolverError(f"newton: {message} (residual {trace[-1]:.3e})", report)
    return report


# -- upper and lower solutions ---------------------------------------------

def _search_constant(accept, start, factor, limit=300):
    t = start
    for _ in range(limit):
        if accept(t):
            return t
        t *= factor
    return None


def build_bounds(params, bc, use_interval=True):
    """Constant lower and upper solutions for the attractive regime c < 0.

    Cases: ``a > 0`` or ``a = 0 < b`` by geometric search; ``a < 0 < b`` with
    ``4b^3 >= -27ca^2`` takes ``beta(b)``, or (with ``use_interval``) another
    point of the interval where ``a z^6 + b z^4 >= -c`` that dominates the
    data.  Returns ``(alpha, beta)`` as grid vectors.
    """
    a, b, c = params.a, params.b, params.c
    if not c < 0:
        raise HypothesisError("build_bounds needs c < 0 (attractive regime)")
    x = params.interior
    dirichlet = bc.kind == "dirichlet"
    if dirichlet and min(bc.d0, bc.dn) <= 0:
        raise HypothesisError("constant lower solution needs D0, DN > 0")

    def upper_boundary_ok(t):
        if dirichlet:
            return t >= max(bc.d0, bc.dn)
        return bc.f0(t) >= 0 >= bc.fn(t)

    def lower_boundary_ok(t):
        if dirichlet:
            return t <= min(bc.d0, bc.dn)
        return bc.f0(t) <= 0 <= bc.fn(t)

    if a > 0 or (a == 0 and b > 0):
        beta = _search_constant(
            lambda t: np.all(G(params, x, t) >= 0) and upper_boundary_ok(t), 1.0, 2.0)
        if beta is None:
            raise HypothesisError("upper solution: f0(beta) >= 0 >= fN(beta) never holds")
    elif a < 0 < b:
        margin = 4 * b ** 3 + 27 * c * a ** 2
        if margin < 0:
            raise HypothesisError("beta-cond: 4b^3 >= -27ca^2 violated")
        bb = analysis.beta_of_b(params)
        candidates = [bb]
        if use_interval:
            lo, hi = analysis.interval_Ic(params)
            candidates += [hi] + list(np.geomspace(lo, hi, 257)[1:-1]) + [lo]
        beta = next((t for t in candidates
                     if upper_boundary_ok(t) and np.all(G(params, x, t) >= 0)), None)
        if beta is None:
            if dirichlet:
                raise HypothesisError(
                    f"upper solution: beta(b) = {bb:.17g} < max(D0, DN) = {max(bc.d0, bc.dn):.17g}")
            raise HypothesisError("upper solution: no beta in I_c with f0(beta) >= 0 >= fN(beta)")
    else:
        raise HypothesisError("no constant upper solution: needs a > 0, or b > 0")

    alpha = _search_constant(
        lambda t: t <= beta and np.all(G(params, x, t) < 0) and lower_boundary_ok(t),
        min(1.0, beta), 0.5)
    if alpha is None:
        raise HypothesisError("lower solution: f0(alpha) <= 0 <= fN(alpha) never holds")
    return _full(params, alpha), _full(params, beta)


def lower_upper_solve(params, bc, alpha, beta, cfg=None, u_init=None):
    """Solve between a lower solution ``alpha`` and an upper solution ``beta``.

    The nonlinearity is clamped to ``[alpha_x, beta_x]``; the clamped system
    is solved by damped Newton from ``u_init`` (default the midpoint) and, if
    that fails, by the iteration ``(Delta^2 - K) u = G(T v) - K T v`` started
    at ``beta`` with ``K >= max(1, sup G')``, then polished by Newton.  The
    result is checked to lie in ``[alpha, beta]``, where the clamped and the
    original problems agree.
    """
    cfg = _config(cfg)
    n = params.n
    alpha, beta = _full(params, alpha), _full(params, beta)
    if np.any(alpha > beta):
        raise HypothesisError("lower solution must not exceed the upper solution")
    if np.any(alpha <= 0):
        raise HypothesisError("lower solution must be positive")
    check = analysis.check_lower_upper(params, bc, alpha, beta)
    if not check.is_lower or not check.is_upper:
        raise HypothesisError(
            f"not a lower/upper pair: lower violations {check.lower_violations}, "
            f"upper violations {check.upper_violations}")
    x = params.interior
    dirichlet = bc.kind == "dirichlet"

    def clamp(u):
        return np.minimum(np.maximum(u, alpha), beta)

    def fun(u):
        t = clamp(u)
        r = np.empty(n + 1)
        ti = t[1:-1]
        r[1:-1] = (u[2:] - 2 * u[1:-1] + u[:-2]) - u[1:-1] - (G(params, x, ti) - ti)
        if dirichlet:
            r[0], r[-1] = u[0] - bc.d0, u[-1] - bc.dn
        else:
            r[0] = u[1] - u[0] - bc.f0(t[0])
            r[-1] = u[-1] - u[-2] - bc.fn(t[-1])
        return r

    def jac(u):
        inside = (u > alpha) & (u < beta)
        ab = np.zeros((3, n + 1))
        ab[0, 2:] = 1.0
        ab[2, :-2] = 1.0
        slope = np.where(inside[1:-1], G_prime(params, x, clamp(u)[1:-1]) - 1.0, 0.0)
        ab[1, 1:-1] = -3.0 - slope
        if dirichlet:
            ab[1, 0] = ab[1, -1] = 1.0
        else:
            t = clamp(u)
            ab[1, 0] = -1.0 - (bc.f0.derivative(t[0]) if inside[0] else 0.0)
            ab[0, 1] = 1.0
            ab[1, -1] = 1.0 - (bc.fn.derivative(t[-1]) if inside[-1] else 0.0)
            ab[2, -2] = -1.0
        return ab

    u = 0.5 * (alpha + beta) if u_init is None else clamp(_full(params, u_init))
    if dirichlet:
        u[0], u[-1] = bc.d0, bc.dn
    u, it, trace, path, status = _damped_newton(fun, jac, u, cfg)
    info = {"stage": "newton"}
    if status != "converged":
        log.debug("lower_upper: Newton %s after %d steps, switching to Picard", status, it)
        u, picard_steps = _shifted_picard(params, bc, alpha, beta, cfg)
        info = {"stage": "picard", "picard_steps": picard_steps}
        u, it2, trace2, path2, status = _damped_newton(fun, jac, u, cfg)
        it += picard_steps + it2
        trace += trace2
        path += path2
    if status != "converged":
        report = SolveReport(u, "lower_upper", trace[-1], it, (alpha, beta), trace, path, info)
        raise SolverError(f"lower_upper: no convergence (best residual {trace[-1]:.3e})", report)

    slack = 1e-12 * (1 + np.abs(beta))
    if np.any(u < alpha - slack) or np.any(u > beta + slack):
        report = SolveReport(u, "lower_upper", trace[-1], it, (alpha, beta), trace, path, info)
        raise SolverError("lower_upper: solution left [alpha, beta]; "
                          "alpha/beta are not valid lower/upper solutions", report)
    u = np.minimum(np.maximum(u, alpha), beta)
    res = _inf(residual(params, bc, u))
    report = SolveReport(u, "lower_upper", res, it, (alpha, beta), trace, path, info)
    if res > cfg.tol_residual:
        raise SolverError(f"lower_upper: residual {res:.3e} above tolerance", report)
    return report


def _shifted_picard(params, bc, alpha, beta, cfg):
    """Monotone iteration from ``beta`` for the clamped problem."""
    n = params.n
    x = params.interior
    dirichlet = bc.kind == "dirichlet"
    grid = np.linspace(0.0, 1.0, 65)
    samples = alpha[1:-1, None] + grid[None, :] * (beta - alpha)[1:-1, None]
    shift = max(1.0, 1.05 * float(np.max(G_prime(params, x[:, None], samples))))
    ab = np.zeros((3, n + 1))
    ab[0, 2:] = 1.0
    ab[2, :-2] = 1.0
    ab[1, 1:-1] = -2.0 - shift
    if dirichlet:
        ab[1, 0] = ab[1, -1] = 1.0
    else:
        ab[1, 0], ab[0, 1] = -1.0, 1.0
        ab[1, -1], ab[2, -2] = 1.0, -1.0
    u = beta.copy()
    for k in range(cfg.picard_max_iter):
        t = np.minimum(np.maximum(u, alpha), beta)
        rhs = np.empty(n + 1)
        rhs[1:-1] = G(params, x, t[1:-1]) - shift * t[1:-1]
        if dirichlet:
            rhs[0], rhs[-1] = bc.d0, bc.dn
        else:
            rhs[0], rhs[-1] = bc.f0(t[0]), bc.fn(t[-1])
        new = solve_banded((1, 1), ab, rhs)
        change = _inf(new - u)
        u = new
        if change <= 1e-3 * cfg.tol_residual * (1 + _inf(u)):
            return u, k + 1
    return u, cfg.picard_max_iter


# -- continuation ------------------------------------------------------------

def _track(H, Hv, Hs, v0, s0, s1, cfg, inside):
    """Follow a root of ``H(v, s) = 0`` from ``s0`` to ``s1``.

    Tangent predictor, Newton corrector at fixed ``s``; the step doubles
    after three corrections that took at most three iterations and halves
    whenever the corrector fails or leaves ``inside``.  Returns
    ``(v, s, path, steps, lost)``.
    """
    span = s1 - s0
    h = cfg.homotopy_initial_step * span
    h_min = cfg.homotopy_min_step * span
    h_max = 0.25 * span
    v, s = v0.copy(), s0
    path = [(s, v.copy())]
    easy = steps = 0
    while s < s1:
        h = min(h, s1 - s)
        try:
            with np.errstate(all="ignore"):
                tangent = solve_banded((1, 1), Hv(v, s), -Hs(v, s))
        except (LinAlgError, ValueError):
            tangent = np.full_like(v, np.nan)
        ok = False
        if np.all(np.isfinite(tangent)):
            s_new = s + h
            w, ok, iters = _correct(H, Hv, v + h * tangent, s_new, inside)
        if ok:
            s, v = s_new, w
            path.append((s, v.copy()))
            steps += 1
            easy = easy + 1 if iters <= 3 else 0
            if easy >= 3:
                h, easy = min(2 * h, h_max), 0
        else:
            h *= 0.5
            easy = 0
            if h < h_min:
                return v, s, path, steps, True
    return v, s, path, steps, False


def _correct(H, Hv, w, s, inside, max_iter=12):
    if not inside(w):
        return w, False, 0
    prev = None
    for k in range(max_iter):
        try:
            with np.errstate(all="ignore"):
                d = solve_banded((1, 1), Hv(w, s), -H(w, s))
        except (LinAlgError, ValueError):
            return w, False, k
        if not np.all(np.isfinite(d)):
            return w, False, k
        size = _inf(d)
        if prev is not None and size > 0.5 * prev and size > 1e-13 * (1 + _inf(w)):
            return w, False, k
        w = w + d
        if not inside(w):
            return w, False, k
        if size <= 1e-12 * (1 + _inf(w)):
            return w, True, k + 1
        prev = size
    return w, False, max_iter


def _polynomial_rows(params, u, lam):
    """Rows ``a v^6 + lam[(2+bx) v^4 - (u_{x-1}+u_{x+1}) v^3] + c`` and pieces."""
    x = params.interior
    v = u[1:-1]
    nb = u[:-2] + u[2:]
    k = 2 + params.b * x
    lam_part = k * v ** 4 - nb * v ** 3
    return params.a * v ** 6 + lam * lam_part + params.c, lam_part, k, nb


def homotopy_radius(params, bc):
    """A box size R such that no row of the homotopy vanishes where u_x = R."""
    x = params.interior
    a, c = params.a, params.c
    k = 2 + params.b * x
    data = max(bc.d0, bc.dn) if bc.kind == "dirichlet" else 0.0
    u_star = (-c / a) ** (1 / 6)
    r = max(2.0 * u_star, 2.0 * data, 1.0)
    for _ in range(200):
        if a < 0:
            worst = a * r ** 6 + np.maximum(k, 0) * r ** 4 + c
            ok = np.all(worst < 0)
        else:
            worst = a * r ** 6 + (np.minimum(k, 0) - 2) * r ** 4 + c
            ok = np.all(worst > 0)
        if ok:
            return float(r)
        r *= 2.0
    raise SolverError("could not size the homotopy box")


def homotopy_solve(params, bc, cfg=None, radii=None):
    """Continuation in lambda from ``a u^6 + c = 0`` to the full polynomial system.

    Needs ``a c < 0``.  Under Robin data the end rows
    ``lam f0(u_0) + u_0 - u_1`` and ``-lam fN(u_N) + u_N - u_{N-1}`` join the
    system and the repulsive Robin hypotheses are checked numerically first
    (``radii`` is the sequence of radii along which growth is tested).
    """
    cfg = _config(cfg)
    a, c, n = params.a, params.c, params.n
    if not a * c < 0:
        raise DomainError("homotopy start root (-c/a)^(1/6) needs a*c < 0")
    u_star = (-c / a) ** (1.0 / 6.0)
    dirichlet = bc.kind == "dirichlet"
    info = {"u_star": u_star}
    if dirichlet:
        R = homotopy_radius(params, bc)
        lower = 0.0
    else:
        if not a < 0 < c:
            raise HypothesisError("Robin homotopy is built for a < 0 < c")
        growth = analysis.rob_rep_growth(params, bc, radii)
        if not growth.holds:
            raise HypothesisError(
                "Robin hypotheses not verified: need f0(eta) <= 0 <= fN(eta) for small eta, "
                "liminf f0(R)/R > -1 and limsup fN(R)/R < 1")
        info["robin_check"] = growth.to_dict()
        R = 100.0 * max(1.0, u_star)
        lower = 0.0
    info["box"] = (lower, R)

    if dirichlet:
        def expand(v):
            u = np.empty(n + 1)
            u[0], u[1:-1], u[-1] = bc.d0, v, bc.dn
            return u

        def H(v, lam):
            return _polynomial_rows(params, expand(v), lam)[0]

        def Hs(v, lam):
            return _polynomial_rows(params, expand(v), lam)[1]

        def Hv(v, lam):
            u = expand(v)
            _, _, k, nb = _polynomial_rows(params, u, lam)
            ab = np.zeros((3, n - 1))
            ab[1] = 6 * a * v ** 5 + lam * (4 * k * v ** 3 - 3 * nb * v ** 2)
            ab[0, 1:] = -lam * v[:-1] ** 3
            ab[2, :-1] = -lam * v[1:] ** 3
            return ab

        v0 = np.full(n - 1, u_star)
    else:
        expand = np.asarray

        def H(u, lam):
            rows = np.empty(n + 1)
            rows[1:-1] = _polynomial_rows(params, u, lam)[0]
            rows[0] = lam * bc.f0(u[0]) + u[0] - u[1]
            rows[-1] = -lam * bc.fn(u[-1]) + u[-1] - u[-2]
            return rows

        def Hs(u, lam):
            rows = np.empty(n + 1)
            rows[1:-1] = _polynomial_rows(params, u, lam)[1]
            rows[0] = bc.f0(u[0])
            rows[-1] = -bc.fn(u[-1])
            return rows

        def Hv(u, lam):
            _, _, k, nb = _polynomial_rows(params, u, lam)
            v = u[1:-1]
            ab = np.zeros((3, n + 1))
            ab[1, 1:-1] = 6 * a * v ** 5 + lam * (4 * k * v ** 3 - 3 * nb * v ** 2)
            ab[0, 2:] = -lam * v ** 3           # d row x / d u_{x+1}
            ab[2, :-2] = -lam * v ** 3          # d row x / d u_{x-1}
            ab[1, 0] = 1 + lam * bc.f0.derivative(u[0])
            ab[0, 1] = -1.0
            ab[1, -1] = 1 - lam * bc.fn.derivative(u[-1])
            ab[2, -2] = -1.0
            return ab

        v0 = np.full(n + 1, u_star)

    def inside(v):
        return bool(np.all(np.isfinite(v)) and np.all(v > lower) and np.all(v < R))

    v, lam, path, steps, lost = _track(H, Hv, Hs, v0, 0.0, 1.0, cfg, inside)
    info["lambda_path"] = [p[0] for p in path]
    full_path = [expand(p[1]) for p in path]
    if lost:
        report = SolveReport(expand(v), "homotopy", math.inf, steps, path=full_path, info=info)
        raise SolverError(f"homotopy: path lost at lambda = {lam:.6g}", report)
    polished = newton_solve(params, bc, expand(v), cfg)
    return SolveReport(polished.solution, "homotopy", polished.residual_inf,
                       steps + polished.iterations, trace=polished.trace, path=full_path,
                       info=info)


# -- small positive c ----------------------------------------------------------

def _first_crossing(a, k, target):
    """Smallest t > 0 with ``a t^3 + k t = target`` for a > 0."""
    if target <= 0:
        if target == 0 and k < 0:
            return math.sqrt(-k / a)
        return None

    def f(t):
        return a * t ** 3 + k * t - target

    hi = 1.0
    while f(hi) <= 0:
        hi *= 2.0
    return analysis.bisect_root(f, 0.0, hi)


def small_c_box(params, bc, r0=None, rn=None, shrink=0.99):
    """Box ``prod (eps_x, R)`` on whose faces the ``c = 0`` rows have fixed signs.

    Each ``eps_x`` is ``shrink`` times the largest admissible value of the
    recursion ``a t^3 + (2 + b x) t < eps_{x-1}`` started from D0 (or the
    mirrored recursion from DN, or from 0 when both data vanish and
    ``b < -2/(N-1)``).  Robin data use ``eps_0 = r0``, ``eps_N = rN``.
    Returns ``(eps, R)`` with ``eps`` a length N+1 vector (ends are the data
    for Dirichlet problems).
    """
    a, b, n = params.a, params.b, params.n
    if not a > 0:
        raise HypothesisError("small-c box needs a > 0")
    eps = np.zeros(n + 1)

    def level(x, target):
        t = _first_crossing(a, 2 + b * x, target)
        if t is None:
            raise HypothesisError(f"small-c box: no eps_{x} below target {target:.6g}")
        return shrink * t

    if bc.kind == "dirichlet":
        eps[0], eps[-1] = bc.d0, bc.dn
        if bc.d0 > 0:
            for x in range(1, n):
                eps[x] = level(x, eps[x - 1])
        elif bc.dn > 0:
            for x in range(n - 1, 0, -1):
                eps[x] = level(x, eps[x + 1])
        else:
            if not b < -2.0 / (n - 1):
                raise HypothesisError("small-c: D0 = DN = 0 requires b < -2/(N-1)")
            eps[n - 1] = level(n - 1, 0.0)
            for x in range(n - 2, 0, -1):
                eps[x] = level(x, eps[x + 1])
        data = max(bc.d0, bc.dn)
    else:
        if r0 is None or rn is None:
            raise HypothesisError("small-c Robin box needs r0 and rN")
        if not (bc.f0(r0) + r0 <= 0 <= bc.fn(rn) - rn):
            raise HypothesisError("small-c: f0(r0) + r0 <= 0 <= fN(rN) - rN violated")
        eps[0], eps[-1] = r0, rn
        for x in range(1, n):
            eps[x] = level(x, eps[x - 1])
        data = 0.0
    x = params.interior
    R = max(1.0, data, float(np.max(eps))) * 1.5
    for _ in range(200):
        if np.all(a * R ** 3 + (2 + b * x) * R > 2 * R):
            break
        R *= 2.0
    if bc.kind == "robin":
        # the end rows must point outward on the faces u_0 = R and u_N = R
        for _ in range(200):
            if bc.f0(R) + R > 0 and bc.fn(R) - R < 0:
                break
            R *= 2.0
    return eps, float(R)


def small_c_homotopy_solve(params, bc, cfg=None, r0=None, rn=None):
    """Existence for small c > 0 when a > 0.

    A root of the ``c = 0`` system is reached inside :func:`small_c_box` by
    the linear homotopy to ``u - v`` (``v`` the box centre); ``c`` is then
    continued from 0 to ``params.c``.  If the continuation stalls first, the
    report is returned with ``info["complete"] = False`` and
    ``info["c_max"]`` the largest c reached; its solution and residual refer
    to that c.
    """
    cfg = _config(cfg)
    a, c_target, n = params.a, params.c, params.n
    if not (a > 0 and c_target > 0):
        raise HypothesisError("small_c_homotopy needs a > 0 and c > 0")
    eps, R = small_c_box(params, bc, r0, rn)
    dirichlet = bc.kind == "dirichlet"
    x = params.interior
    k = 2 + params.b * x
    if dirichlet:
        lo = eps[1:-1]
        size = n - 1

        def expand(v):
            u = np.empty(n + 1)
            u[0], u[1:-1], u[-1] = bc.d0, v, bc.dn
            return u
    else:
        lo = eps
        size = n + 1
        expand = np.asarray
    interior = slice(None) if dirichlet else slice(1, -1)

    def q_rows(v):
        u = expand(v)
        w = u[1:-1]
        nb = u[:-2] + u[2:]
        rows = np.empty(size)
        rows[interior] = w ** 3 * (a * w ** 3 + k * w - nb)
        if not dirichlet:
            rows[0] = bc.f0(u[0]) + u[0] - u[1]
            rows[-1] = -bc.fn(u[-1]) + u[-1] - u[-2]
        return rows

    def q_jac(v):
        u = expand(v)
        w = u[1:-1]
        nb = u[:-2] + u[2:]
        ab = np.zeros((3, size))
        diag = 3 * w ** 2 * (a * w ** 3 + k * w - nb) + w ** 3 * (3 * a * w ** 2 + k)
        if dirichlet:
            ab[1] = diag
            ab[0, 1:] = -w[:-1] ** 3
            ab[2, :-1] = -w[1:] ** 3
        else:
            ab[1, 1:-1] = diag
            ab[0, 2:] = -w ** 3
            ab[2, :-2] = -w ** 3
            ab[1, 0] = bc.f0.derivative(u[0]) + 1.0
            ab[0, 1] = -1.0
            ab[1, -1] = -bc.fn.derivative(u[-1]) + 1.0
            ab[2, -2] = -1.0
        return ab

    centre = 0.5 * (lo + R)
    ident = np.zeros((3, size))
    ident[1] = 1.0

    def inside(v):
        return bool(np.all(np.isfinite(v)) and np.all(v > lo) and np.all(v < R))

    stage1, _, path1, steps1, lost = _track(
        lambda v, lam: lam * q_rows(v) + (1 - lam) * (v - centre),
        lambda v, lam: lam * q_jac(v) + (1 - lam) * ident,
        lambda v, lam: q_rows(v) - (v - centre),
        centre, 0.0, 1.0, cfg, inside)
    info = {"box_lower": expand(lo) if dirichlet else lo.copy(), "box_upper": R,
            "c_requested": c_target}
    if lost:
        raise SolverError("small_c_homotopy: path to the c = 0 root lost",
                          SolveReport(expand(stage1), "small_c_homotopy", math.inf, steps1,
                                      path=[expand(p[1]) for p in path1], info=info))
    unit = np.zeros(size)
    unit[interior] = 1.0
    v, c_reached, path2, steps2, lost = _track(
        lambda v, c: q_rows(v) + c * unit, lambda v, c: q_jac(v), lambda v, c: unit,
        stage1, 0.0, c_target, cfg, inside)
    info.update(c_max=c_reached, complete=not lost, c0_solution=expand(stage1),
                c_path=[p[0] for p in path2])
    reached = params.with_(c=c_reached)
    try:
        polished = newton_solve(reached, bc, expand(v), cfg)
    except SolverError as err:
        raise SolverError(f"small_c_homotopy: final polish failed at c = {c_reached:.6g}",
                          err.report) from err
    u = polished.solution
    info["inside_box"] = bool(inside(u[1:-1] if dirichlet else u))
    path = [expand(p[1]) for p in path1] + [expand(p[1]) for p in path2]
    if lost:
        log.info("small_c_homotopy: continuation stalled at c = %.6g < %.6g", c_reached, c_target)
    return SolveReport(u, "small_c_homotopy", polished.residual_inf,
                       steps1 + steps2 + polished.iterations, trace=polished.trace,
                       path=path, info=info)


# -- variational ---------------------------------------------------------------

def variational_solve(params, bc, cfg=None, u0=None):
    """Critical point of the energy by line-search descent.

    For ``a > 0 > c`` the energy is minimised, for ``a < 0 < c`` its negative.
    The direction is the Newton direction when the (signed) Hessian is
    positive definite and steepest descent otherwise; steps keep every
    unknown above the positivity fraction of its current value and satisfy
    the Armijo condition.  Once the energy is flat to rounding, steps that
    still reduce the gradient are accepted and flagged in
    ``info["polish_steps"]``.
    """
    cfg = _config(cfg)
    a, c, n = params.a, params.c, params.n
    if not a * c < 0:
        raise HypothesisError("variational_solve needs a*c < 0 (coercive cases)")
    sign = 1.0 if a > 0 else -1.0
    dirichlet = bc.kind == "dirichlet"
    u = _full(params, (-c / a) ** (1 / 6) if u0 is None else u0)
    if dirichlet:
        u[0], u[-1] = bc.d0, bc.dn
    free = slice(1, -1) if dirichlet else slice(None)

    def value(u):
        return sign * functional_value(params, bc, u)

    def grad(u):
        return sign * functional_gradient(params, bc, u)

    f, g = value(u), grad(u)
    values, trace, polish = [f], [_inf(g)], []
    it = 0
    for it in range(cfg.max_iter):
        if _inf(g) <= cfg.tol_residual:
            break
        d = None
        try:
            hess = functional_hessian(params, bc, u)
            hess[1] *= sign
            hess[0] *= sign
            d = solveh_banded(hess, -g)
            if not np.all(np.isfinite(d)) or np.dot(g, d) >= 0:
                d = None
        except (LinAlgError, ValueError):
            d = None
        if d is None:
            d = -g
        slope = float(np.dot(g, d))
        t = 1.0
        accepted = False
        while t >= 1e-16:
            cand = u.copy()
            cand[free] = u[free] + t * d
            if np.all(cand[free] >= cfg.positivity_fraction * u[free]):
                fc = value(cand)
                if fc <= f + 1e-4 * t * slope:
                    accepted = True
                    break
                gc = grad(cand)
                if fc <= f + 16 * np.finfo(float).eps * abs(f) and _inf(gc) < _inf(g):
                    accepted = True
                    polish.append(it + 1)
                    break
            t *= cfg.newton_backtrack_factor
        if not accepted:
            report = SolveReport(u, "variational", _inf(g), it, trace=trace,
                                 info={"values": values, "polish_steps": polish})
            raise SolverError(f"variational: descent stalled (gradient {_inf(g):.3e})", report)
        u, f, g = cand, fc, grad(cand)
        values.append(f)
        trace.append(_inf(g))
    else:
        it = cfg.max_iter
    res = _inf(residual(params, bc, u))
    report = SolveReport(u, "variational", res, it, trace=trace,
                         info={"values": values, "polish_steps": polish,
                               "functional": sign * f})
    if _inf(g) > cfg.tol_residual or res > cfg.tol_residual:
        raise SolverError(f"variational: budget exhausted (gradient {_inf(g):.3e})", report)
    return report


# -- zero Dirichlet data ---------------------------------------------------------

def homogeneous_limit_solve(params, cfg=None, r_ratio=0.5):
    """Solution with ``u_0 = u_N = 0`` and positive interior.

    Solves the Dirichlet problems with data ``r_k = r_0 * r_ratio^k`` between
    the constant lower solution ``r_k`` and a constant upper solution, each
    warm-started from the previous one, until successive interiors agree to
    the residual tolerance; the limit is then polished by Newton with the
    ends set to zero.  ``info["differences"]`` holds the successive sup
    differences.
    """
    cfg = _config(cfg)
    regime = analysis.homogeneous_regime(params)
    if not regime.holds:
        raise HypothesisError(
            "zero Dirichlet data needs a > 0 > c, or a = 0 < b with c < 0, "
            "or a, c < 0 with 4b^3 > -27ca^2 (strict)")
    x = params.interior
    if params.a < 0:
        beta = analysis.beta_of_b(params)
    else:
        beta = _search_constant(lambda t: np.all(G(params, x, t) >= 0), 1.0, 2.0)
    r0 = _search_constant(lambda t: t < beta and np.all(G(params, x, t) < 0),
                          min(1.0, 0.5 * beta), 0.5)
    if beta is None or r0 is None:
        raise SolverError("homogeneous_limit: could not build constant bounds")
    prev = None
    diffs, data, total = [], [], 0
    u = None
    for k in range(cfg.max_iter):
        r = r0 * r_ratio ** k
        bc_k = Dirichlet(r, r)
        if not analysis.check_lower_upper(params, bc_k, r, beta).is_lower:
            continue
        rep = lower_upper_solve(params, bc_k, r, beta, cfg, u_init=prev)
        total += rep.iterations
        u = rep.solution
        data.append(r)
        if prev is not None:
            diffs.append(_inf(u[1:-1] - prev[1:-1]))
            if diffs[-1] < cfg.tol_residual:
                break
        prev = u
    else:
        raise SolverError("homogeneous_limit: r_k sequence did not settle")
    limit = u.copy()
    limit[0] = limit[-1] = 0.0
    if np.min(limit[1:-1]) < 1e-14:
        raise SolverError("homogeneous_limit: interior degeneracy")
    polished = newton_solve(params, Dirichlet(0.0, 0.0), limit, cfg)
    if np.min(polished.solution[1:-1]) < 1e-14:
        raise SolverError("homogeneous_limit: interior degeneracy")
    return SolveReport(polished.solution, "homogeneous_limit", polished.residual_inf,
                       total + polished.iterations, trace=polished.trace,
                       info={"differences": diffs, "data": data, "upper": beta,
                             "case": regime.details["case"]})


# -- dispatch -----------------------------------------------------------------

def _default_start(params, bc):
    if params.a * params.c < 0:
        guess = (-params.c / params.a) ** (1 / 6)
    else:
        guess = 1.0
    return _full(params, guess)


def solve(params, bc, method="auto", cfg=None, **kwargs):
    """Run one method, or pick one by regime when ``method == "auto"``.

    Auto order: ``c == 0`` is rejected; zero Dirichlet data go to
    homogeneous_limit when its regime holds, else homotopy (a c < 0) or
    small_c_homotopy (a, c > 0); c < 0 goes to lower_upper; a < 0 < c to
    homotopy with variational as fallback; a, c > 0 to small_c_homotopy.
    """
    cfg = _config(cfg)
    if params.c == 0:
        raise HypothesisError("c must be nonzero")
    if method == "lower_upper":
        alpha, beta = build_bounds(params, bc)
        return lower_upper_solve(params, bc, alpha, beta, cfg)
    if method == "newton":
        return newton_solve(params, bc, kwargs.get("u0", _default_start(params, bc)), cfg)
    if method == "homotopy":
        return homotopy_solve(params, bc, cfg, kwargs.get("radii"))
    if method == "small_c_homotopy":
        return small_c_homotopy_solve(params, bc, cfg, kwargs.get("r0"), kwargs.get("rn"))
    if method == "variational":
        return variational_solve(params, bc, cfg)
    if method == "homogeneous_limit":
        if not (bc.kind == "dirichlet" and bc.homogeneous):
            raise HypothesisError("homogeneous_limit needs D0 = DN = 0")
        return homogeneous_limit_solve(params, cfg)
    if method != "auto":
        raise ValueError(f"unknown method {method!r}; choose from {METHODS} or 'auto'")

    a, c = params.a, params.c
    if bc.kind == "dirichlet" and bc.homogeneous:
        if analysis.homogeneous_regime(params).holds:
            return homogeneous_limit_solve(params, cfg)
        if a * c < 0:
            return homotopy_solve(params, bc, cfg)
        if a > 0 and c > 0:
            return small_c_homotopy_solve(params, bc, cfg)
        raise HypothesisError("no method for zero Dirichlet data in this regime")
    if c < 0:
        alpha, beta = build_bounds(params, bc)
        return lower_upper_solve(params, bc, alpha, beta, cfg)
    if a < 0:
        try:
            return homotopy_solve(params, bc, cfg, kwargs.get("radii"))
        except SolverError as err:
            log.info("homotopy failed (%s); trying variational", err)
            return variational_solve(params, bc, cfg)
    if a > 0:
        return small_c_homotopy_solve(params, bc, cfg, kwargs.get("r0"), kwargs.get("rn"))
    raise HypothesisError("no method for a = 0 < c")
