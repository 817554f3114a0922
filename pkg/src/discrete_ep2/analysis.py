"""Closed-form hypothesis checks, upper/lower verification and a shooting oracle.

Every checker returns a :class:`ConditionReport`.  The sign convention for
``margin`` is uniform: positive means the condition holds strictly, and the
non-strict ``beta_cond`` also holds at zero.

Root isolation is done by sign-change bracketing followed by bisection;
nothing here solves a polynomial in closed form.
"""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy.linalg import LinAlgError, solve_banded

from .difference_calculus import lambda1
from .model import DomainError, G, residual, residual_inf, residual_jacobian

__all__ = [
    "ConditionReport",
    "LowerUpperCheck",
    "bisect_root",
    "uniqueness_condition",
    "beta_of_b",
    "beta_cond_check",
    "interval_Ic",
    "b_star",
    "c_star",
    "homogeneous_regime",
    "box_small_c_condition",
    "rob_rep_growth",
    "check_lower_upper",
    "shoot",
    "enumerate_solutions",
    "n2_analysis",
    "ENUMERATION_MAX_N",
]

ENUMERATION_MAX_N = 8


@dataclass
class ConditionReport:
    condition_id: str
    holds: bool
    margin: float
    details: dict = field(default_factory=dict)

    def to_dict(self):
        return {"condition_id": self.condition_id, "holds": bool(self.holds),
                "margin": float(self.margin),
                "details": {k: _plain(v) for k, v in self.details.items()}}


def _plain(value):
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, (tuple, list, np.ndarray)):
        return [_plain(v) for v in value]
    return value


def bisect_root(f, lo, hi, xtol=0.0, maxiter=400):
    """Bisection on a sign-changing bracket, down to ``xtol`` or full precision.

    ``f`` may return nan where it is undefined; hitting such a point aborts
    and returns None, since the bracket then straddles a gap in the domain.
    """
    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if np.isnan(flo) or np.isnan(fhi) or np.sign(flo) == np.sign(fhi):
        raise ValueError("bisect_root needs values of opposite sign at the ends")
    for _ in range(maxiter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi or hi - lo <= xtol:
            break
        fmid = f(mid)
        if np.isnan(fmid):
            return None
        if fmid == 0:
            return mid
        if np.sign(fmid) == np.sign(flo):
            lo, flo = mid, fmid
        else:
            hi, fhi = mid, fmid
    return lo if abs(flo) <= abs(fhi) else hi


def _require(cond, message):
    if not cond:
        raise DomainError(message)


# -- attractive regime ------------------------------------------------------

def uniqueness_condition(params, kind="dirichlet", monotonicity_ok=True):
    """Uniqueness margin for a > 0 > c.

    ``M = -(9/(N-1)) (a^2 c / 4)^(1/3)`` with the real cube root.  Dirichlet
    margin is ``b + M + (4/(N-1)) sin^2(pi/2N)``, Robin margin is ``b + M``.
    """
    _require(params.a > 0 > params.c, "uniqueness condition needs a > 0 > c")
    n = params.n
    m = -9.0 / (n - 1) * np.cbrt(params.a ** 2 * params.c / 4.0)
    lam = lambda1(n)
    if kind == "dirichlet":
        margin = params.b + m + lam / (n - 1)
        cid = "uniq_dirichlet"
    elif kind == "robin":
        _require(monotonicity_ok, "uniq-rob needs f0 nondecreasing and fN nonincreasing")
        margin = params.b + m
        cid = "uniq_robin"
    else:
        raise ValueError(f"unknown boundary kind {kind!r}")
    return ConditionReport(cid, margin > 0, float(margin), {"M": float(m), "lambda1": lam})


def beta_of_b(params):
    """``sqrt(-2b / 3a)``, the maximiser of ``a z^6 + b z^4`` on z > 0."""
    _require(params.a < 0 < params.b, "beta(b) needs a < 0 < b")
    return math.sqrt(-2.0 * params.b / (3.0 * params.a))


def beta_cond_check(params):
    """Margin ``4 b^3 + 27 c a^2`` of the constant-upper-solution condition."""
    a, b, c = params.a, params.b, params.c
    _require(a < 0 < b and c < 0, "beta-cond is stated for a < 0 < b and c < 0")
    margin = 4 * b ** 3 + 27 * c * a ** 2
    beta = beta_of_b(params)
    g1 = G(params, 1, beta)
    details = {"beta_b": beta, "G1_at_beta": g1,
               "b_threshold": float(np.cbrt(-27 * c * a ** 2 / 4)),
               "c_star": 4 * b ** 3 / (27 * a ** 2)}
    if margin >= 0:
        lo, hi = interval_Ic(params)
        details.update(Ic_lower=lo, M_c=hi)
    return ConditionReport("beta_cond", margin >= 0, float(margin), details)


def interval_Ic(params):
    """Maximal interval ``[z_lo, M_c]`` on which ``a z^6 + b z^4 >= -c``.

    Solved in ``w = z^2`` by bracketing the cubic ``a w^3 + b w^2 + c`` on
    either side of its maximiser ``beta(b)^2``.
    """
    a, b, c = params.a, params.b, params.c
    _require(a < 0 < b and c < 0, "I_c is defined for a < 0 < b and c < 0")
    w_star = -2.0 * b / (3.0 * a)

    def cubic(w):
        return (a * w + b) * w * w + c

    peak = cubic(w_star)
    if peak < 0:
        raise DomainError("I_c empty: 4b^3 < -27ca^2")
    if peak == 0:
        z = math.sqrt(w_star)
        return z, z
    w_hi = 2.0 * w_star
    while cubic(w_hi) >= 0:
        w_hi *= 2.0
    lo = bisect_root(cubic, 0.0, w_star)
    hi = bisect_root(cubic, w_star, w_hi)
    return math.sqrt(lo), math.sqrt(hi)


def b_star(params, bc=None, beta_target=None):
    """Smallest b with ``4b^3 >= -27ca^2`` and ``beta(b) >= max(D0, DN)``.

    For Robin data pass the constant ``beta_target`` the upper solution must
    reach instead of ``bc``.
    """
    a, c = params.a, params.c
    _require(a < 0 and c < 0, "b* is defined for a, c < 0")
    if beta_target is None:
        _require(bc is not None and bc.kind == "dirichlet",
                 "b* needs Dirichlet data or an explicit beta_target")
        beta_target = max(bc.d0, bc.dn)
    from_cond = float(np.cbrt(-27.0 * c * a ** 2 / 4.0))
    from_data = -1.5 * a * beta_target ** 2
    return max(from_cond, from_data)


def c_star(params, bc=None):
    """Largest |c| keeping ``4b^3 >= -27ca^2``: ``4 b^3 / (27 a^2)``."""
    a, b = params.a, params.b
    _require(a < 0 < b, "c* is defined for a < 0 < b")
    if bc is not None and bc.kind == "dirichlet":
        beta = beta_of_b(params)
        _require(beta >= max(bc.d0, bc.dn),
                 f"beta(b) = {beta:.6g} < max(D0, DN); c* corollary does not apply")
    return 4.0 * b ** 3 / (27.0 * a ** 2)


def homogeneous_regime(params):
    """Which case (if any) of the zero-Dirichlet existence result applies.

    Cases: ``a > 0 > c``; ``a = 0, b > 0 > c``; ``a, c < 0`` with the strict
    inequality ``4b^3 > -27ca^2``.  The margin is the smallest of the strict
    inequalities of the matching case, or the most favourable negative one.
    """
    a, b, c = params.a, params.b, params.c
    candidates = {
        "a>0>c": min(a, -c),
        "a=0,b>0>c": min(b, -c) if a == 0 else -abs(a),
        "a,c<0": min(4 * b ** 3 + 27 * c * a ** 2, -a, -c),
    }
    case, margin = max(candidates.items(), key=lambda kv: kv[1])
    holds = margin > 0
    details = {"case": case if holds else None}
    if holds and case == "a>0>c":
        details["unique"] = uniqueness_condition(params).holds
    elif holds and case == "a=0,b>0>c":
        details["unique"] = True
    return ConditionReport("homogeneous_regime", holds, float(margin), details)


def box_small_c_condition(params, bc, r0=None, rn=None):
    """Preconditions of the small-c existence result for a > 0, c > 0."""
    n = params.n
    details = {}
    if params.a <= 0:
        return ConditionReport("box_small_c", False, float(params.a), {"reason": "needs a > 0"})
    if bc.kind == "dirichlet":
        if bc.d0 > 0 or bc.dn > 0:
            margin = max(bc.d0, bc.dn)
        else:
            margin = -2.0 / (n - 1) - params.b
            details["reason"] = "D0 = DN = 0 needs b < -2/(N-1)"
    else:
        if r0 is None or rn is None:
            return ConditionReport("box_small_c", False, -math.inf,
                                   {"reason": "Robin case needs r0 and rN"})
        left = -(bc.f0(r0) + r0)
        right = bc.fn(rn) - rn
        margin = min(left, right)
        details.update(r0=r0, rN=rn)
        # non-strict sign condition on the Robin data
        return ConditionReport("box_small_c", margin >= 0, float(margin), details)
    return ConditionReport("box_small_c", margin > 0, float(margin), details)


def rob_rep_growth(params, bc, radii=None, tail=8):
    """Numerical check of the repulsive Robin hypotheses.

    Searches ``eta`` on ``2^-k`` for ``f0(eta) <= 0 <= fN(eta)`` and estimates
    ``liminf f0(R)/R > -1`` and ``limsup fN(R)/R < 1`` from the last ``tail``
    members of ``radii`` (default ``2^k``, k = 1..60).  Passing is evidence,
    not proof.
    """
    _require(bc.kind == "robin", "rob_rep_growth applies to Robin data")
    eta = None
    for k in range(0, 80):
        t = 2.0 ** -k
        if bc.f0(t) <= 0 <= bc.fn(t):
            eta = t
            break
    if radii is None:
        radii = 2.0 ** np.arange(1, 61)
    radii = np.asarray(radii, dtype=float)
    last = radii[-tail:]
    lower = float(np.min(bc.f0(last) / last)) + 1.0
    upper = 1.0 - float(np.max(bc.fn(last) / last))
    margin = min(lower, upper)
    holds = eta is not None and margin > 0 and params.a < 0 < params.c
    return ConditionReport("rob_rep_growth", holds, margin,
                           {"eta": eta, "f0_ratio_margin": lower, "fN_ratio_margin": upper})


# -- upper and lower solutions ----------------------------------------------

@dataclass
class LowerUpperCheck:
    is_lower: bool
    is_upper: bool
    lower_violations: list
    upper_violations: list

    def __iter__(self):
        return iter((self.is_lower, self.is_upper))


def check_lower_upper(params, bc, alpha, beta, rtol=1e-12):
    """Check the defining inequalities of a lower (alpha) and upper (beta) solution.

    Violations are reported as ``(row, amount)`` with row in 0..N, where rows
    0 and N are the boundary inequalities.  A comparison passes when it fails
    by at most ``rtol`` times the size of the terms involved.
    """
    n = params.n
    alpha = np.broadcast_to(np.asarray(alpha, dtype=float), (n + 1,)).copy()
    beta = np.broadcast_to(np.asarray(beta, dtype=float), (n + 1,)).copy()

    def excess(v):
        # positive entries mean "Delta^2 v > G(v)"
        x = params.interior
        lap = v[2:] - 2 * v[1:-1] + v[:-2]
        rhs = G(params, x, v[1:-1])
        size = 1 + np.abs(v[2:]) + 2 * np.abs(v[1:-1]) + np.abs(v[:-2]) + np.abs(
            params.a * v[1:-1] ** 3) + np.abs(params.b * x * v[1:-1]) + np.abs(params.c / v[1:-1] ** 3)
        return lap - rhs, size

    def boundary(v):
        # (left, right) with positive meaning "v exceeds the data/flux"
        if bc.kind == "dirichlet":
            return (v[0] - bc.d0, v[-1] - bc.dn), (1 + abs(v[0]) + bc.d0, 1 + abs(v[-1]) + bc.dn)
        left = (v[1] - v[0]) - bc.f0(v[0])
        right = (v[-1] - v[-2]) - bc.fn(v[-1])
        return (left, right), (1 + abs(v[1]) + abs(v[0]) + abs(bc.f0(v[0])),
                               1 + abs(v[-1]) + abs(v[-2]) + abs(bc.fn(v[-1])))

    upper_viol, lower_viol = [], []
    ex, size = excess(beta)
    for i in np.flatnonzero(ex > rtol * size):
        upper_viol.append((int(i) + 1, float(ex[i])))
    (left, right), (sl, sr) = boundary(beta)
    if bc.kind == "dirichlet":
        if left < -rtol * sl:
            upper_viol.append((0, float(-left)))
        if right < -rtol * sr:
            upper_viol.append((n, float(-right)))
    else:
        if left > rtol * sl:
            upper_viol.append((0, float(left)))
        if right < -rtol * sr:
            upper_viol.append((n, float(-right)))

    ex, size = excess(alpha)
    for i in np.flatnonzero(ex < -rtol * size):
        lower_viol.append((int(i) + 1, float(-ex[i])))
    (left, right), (sl, sr) = boundary(alpha)
    if bc.kind == "dirichlet":
        if left > rtol * sl:
            lower_viol.append((0, float(left)))
        if right > rtol * sr:
            lower_viol.append((n, float(right)))
    else:
        if left < -rtol * sl:
            lower_viol.append((0, float(-left)))
        if right > rtol * sr:
            lower_viol.append((n, float(right)))
    return LowerUpperCheck(not lower_viol, not upper_viol, lower_viol, upper_viol)


# -- shooting oracle ---------------------------------------------------------

def shoot(params, bc, t):
    """Propagate the three-term recurrence from a shooting parameter.

    Dirichlet: ``u_0 = D0, u_1 = t``.  Robin: ``u_0 = t, u_1 = t + f0(t)``.
    Returns ``(S, u)`` where ``S`` is the mismatch of the far boundary
    condition and ``u`` has shape ``(N + 1,) + t.shape``.

    Where some node is not positive ``S`` is nan, except for Dirichlet data
    with c < 0: there ``u_x -> 0+`` drives ``u_{x+1} -> -inf``, so
    ``S -> -inf`` at every edge of the positivity domain and such samples are
    given ``-inf``.  An interior node beyond ``1e50`` settles the sign of the
    tail: ``+inf`` when the cubic term pushes it up (for Robin data only if
    ``fN`` is declared nonincreasing), a crash otherwise.
    """
    s, u, _ = _shoot(params, bc, t)
    return s, u


_VALID, _CRASH, _ESCAPE, _UNDEFINED = 0, 1, 2, 3


def _shoot(params, bc, t):
    t = np.asarray(t, dtype=float)
    n = params.n
    dirichlet = bc.kind == "dirichlet"
    u = np.empty((n + 1,) + t.shape)
    valid = np.ones(t.shape, dtype=bool)
    crashed = np.zeros(t.shape, dtype=bool)
    escaped = np.zeros(t.shape, dtype=bool)
    with np.errstate(all="ignore"):
        if dirichlet:
            u[0] = bc.d0
            u[1] = t
        else:
            valid &= t > 0
            u[0] = t
            u[1] = t + bc.f0(np.where(valid, t, 1.0))
        for x in range(1, n):
            ux = u[x]
            live = valid & ~crashed & ~escaped
            crashed |= live & ~(ux > 0)
            big = live & (ux > 1e50)
            grows = params.a > 0 or (params.a == 0 and 2 + params.b * x > 0)
            if grows:
                escaped |= big
            else:
                crashed |= big
            live = valid & ~crashed & ~escaped
            safe = np.where(live, ux, 1.0)
            u[x + 1] = (params.a * safe ** 3 + (2 + params.b * x) * safe
                        + params.c / safe ** 3 - u[x - 1])
        live = valid & ~crashed & ~escaped
        if dirichlet:
            s = u[n] - bc.dn
        else:
            crashed |= live & ~(u[n] > 0)
            live &= u[n] > 0
            s = (u[n] - u[n - 1]) - bc.fn(np.where(live, u[n], 1.0))
        live &= np.isfinite(s)
    out = np.where(live, s, np.nan)
    status = np.full(t.shape, _UNDEFINED)
    status[live] = _VALID
    status[valid & crashed] = _CRASH
    status[valid & escaped] = _ESCAPE
    if dirichlet or bc.fn.monotonicity == "nonincreasing":
        out = np.where(valid & escaped, np.inf, out)
    if dirichlet and params.c < 0:
        out = np.where(valid & crashed, -np.inf, out)
    if out.ndim == 0:
        return float(out), u, int(status)
    return out, u, status


def _zoom(params, bc, ts, s, status, depth, points=256):
    """Resample every gap whose end samples differ in kind, recursively.

    Valid windows of the shooting map can be far narrower than the scan
    resolution; they sit between samples of different kinds (crash, escape,
    valid), so those gaps are subdivided until the window is resolved or
    float spacing is reached.
    """
    extra_t, extra_s, extra_st = [ts], [s], [status]
    gaps = np.flatnonzero(status[:-1] != status[1:])
    for i in gaps:
        lo, hi = ts[i], ts[i + 1]
        if depth == 0 or hi - lo <= 64 * np.spacing(max(abs(lo), abs(hi))):
            continue
        sub = np.linspace(lo, hi, points + 2)
        ss, _, st = _shoot(params, bc, sub)
        zt, zs, zst = _zoom(params, bc, sub, ss, st, depth - 1, points)
        extra_t.append(zt)
        extra_s.append(zs)
        extra_st.append(zst)
    all_t = np.concatenate(extra_t)
    order = np.argsort(all_t, kind="stable")
    all_t = all_t[order]
    keep = np.concatenate([[True], np.diff(all_t) > 0])
    return (all_t[keep], np.concatenate(extra_s)[order][keep],
            np.concatenate(extra_st)[order][keep])


def enumerate_solutions(params, bc, t_min=1e-3, t_max=10.0, resolution=1e-3,
                        offset=0.0, accept_tol=1e-9, full_output=False, zoom_depth=5):
    """All positive solutions visible to a scan of the shooting parameter.

    The parameter (``u_1`` for Dirichlet data, ``u_0`` for Robin data) is
    sampled on ``t_min + (k + offset) * resolution``.  Gaps between samples
    of different kinds (valid, crashed, escaped) are resampled up to
    ``zoom_depth`` levels.  Sign changes of the far-boundary mismatch between
    neighbours are refined by bisection to full precision and kept when the
    residual is at most ``accept_tol`` (after a tightly bounded Newton
    touch-up when shooting is too stiff).  Roots closer than 1e-9 are merged.
    Tangential (even multiplicity) roots and valid windows enclosed by two
    samples of the same kind are invisible.
    """
    if params.n > ENUMERATION_MAX_N:
        raise DomainError(f"enumeration budget: N <= {ENUMERATION_MAX_N}, got N = {params.n}")
    if not 0 <= offset < 1:
        raise ValueError("offset is a fraction of the resolution in [0, 1)")
    count = int(math.floor((t_max - t_min) / resolution)) + 1
    ts = t_min + (np.arange(count) + offset) * resolution
    ts = ts[ts <= t_max]
    s, _, status = _shoot(params, bc, ts)
    base = ts.size
    ts, s, status = _zoom(params, bc, ts, s, status, zoom_depth)

    def scalar(t):
        return shoot(params, bc, t)[0]

    roots, brackets, rejected = [], 0, 0
    exact = np.flatnonzero(s == 0)
    roots.extend(ts[exact].tolist())
    sign = np.sign(s)
    change = np.flatnonzero((sign[:-1] * sign[1:]) < 0)
    for i in change:
        brackets += 1
        r = bisect_root(scalar, ts[i], ts[i + 1])
        if r is None:
            rejected += 1
            continue
        roots.append(float(r))

    roots.sort()
    solutions, kept, polished = [], [], 0
    for r in roots:
        if kept and abs(r - kept[-1]) < 1e-9:
            continue
        u = shoot(params, bc, r)[1].copy()
        if bc.kind == "dirichlet":
            u[-1] = bc.dn
        try:
            res = residual_inf(params, bc, u)
            if res > accept_tol:
                u, res = _refine(params, bc, u)
                polished += 1
        except (DomainError, LinAlgError):
            rejected += 1
            continue
        if res <= accept_tol:
            kept.append(r)
            solutions.append(u)
        else:
            rejected += 1
    if full_output:
        info = {"t_min": t_min, "t_max": t_max, "resolution": resolution, "offset": offset,
                "samples": base, "zoom_samples": int(ts.size - base), "brackets": brackets,
                "rejected": rejected, "refined": polished, "shooting_roots": kept}
        return solutions, info
    return solutions


def _refine(params, bc, u, steps=3, max_move=1e-6):
    """A few Newton steps on a located root; ill-conditioned shooting leaves
    the far boundary mismatch at the level of ``S'(t)`` times one ulp of t.
    Refuses to move further than ``max_move`` (relative), so it can only
    sharpen the root the scan found, never switch to another one."""
    start = u.copy()
    for _ in range(steps):
        step = solve_banded((1, 1), residual_jacobian(params, bc, u), -residual(params, bc, u))
        u = u + step
        if np.max(np.abs(u - start)) > max_move * (1 + np.max(np.abs(start))):
            return start, np.inf
    return u, residual_inf(params, bc, u)


# -- the N = 2 toy problem ---------------------------------------------------

def n2_analysis(params, bc):
    """Positive roots of ``P_1(t) = a t^6 + (2+b) t^4 - s t^3 + c`` for N = 2.

    Here ``s = D0 + D2`` and a < 0 < c.  ``P_1' = t^2 q(t)`` with
    ``q = 6a t^3 + 4(2+b) t - 3s``; the sign of ``P_1`` at the (at most two)
    positive zeros of ``q`` fixes the root count.  The margin ``T - (b+2)``
    with ``T = (9/4)(-a s^2 / 2)^(1/3)`` is positive exactly when ``q < 0`` on
    t > 0, which forces a single root whatever c > 0 is.

    Returns ``(report, roots)``.
    """
    a, b, c = params.a, params.b, params.c
    _require(params.n == 2, "n2_analysis needs N = 2")
    _require(a < 0 < c, "n2_analysis needs a < 0 < c")
    _require(bc.kind == "dirichlet", "n2_analysis needs Dirichlet data")
    s = bc.d0 + bc.dn
    _require(s > 0, "n2_analysis needs D0 + D2 > 0")
    k = 2.0 + b

    def p(t):
        return ((a * t ** 2 + k) * t - s) * t ** 3 + c

    def q(t):
        return 6 * a * t ** 3 + 4 * k * t - 3 * s

    threshold = 2.25 * float(np.cbrt(-a * s ** 2 / 2.0))
    margin = threshold - k
    details = {"T": threshold, "s": s}

    # decreasing/increasing pieces of p on (0, inf) separated by zeros of q
    critical = []
    if k > 0:
        t_peak = math.sqrt(2.0 * k / (-9.0 * a))
        q_peak = q(t_peak)
        details["q_max"] = q_peak
        if q_peak > 0:
            hi = 2.0 * t_peak
            while q(hi) > 0:
                hi *= 2.0
            critical = [bisect_root(q, 0.0, t_peak), bisect_root(q, t_peak, hi)]
        elif q_peak == 0:
            critical = [t_peak]
    knots = [0.0] + critical
    hi = max(knots) + 1.0
    while p(hi) >= 0:
        hi *= 2.0
    knots.append(hi)
    roots = []
    for lo_t, hi_t in zip(knots[:-1], knots[1:]):
        plo, phi = p(lo_t), p(hi_t)
        if plo == 0 and lo_t > 0:
            if not roots or roots[-1] != lo_t:
                roots.append(lo_t)
        elif plo * phi < 0:
            roots.append(bisect_root(p, lo_t, hi_t))
    details["critical_points"] = critical
    count = len(roots)
    if margin > 0 and count != 1:
        raise AssertionError(f"N=2 uniqueness threshold holds but {count} roots found")
    details["root_count"] = count
    return ConditionReport("n2_uniqueness", margin > 0, float(margin), details), roots
