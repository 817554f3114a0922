import math

import numpy as np
import pytest

from discrete_ep2 import analysis
from discrete_ep2.analysis import (b_star, beta_cond_check, beta_of_b, bisect_root, c_star,
                                   check_lower_upper, enumerate_solutions, homogeneous_regime,
                                   interval_Ic, n2_analysis, shoot, uniqueness_condition)
from discrete_ep2.model import Dirichlet, DomainError, G, Parameters, Robin, RobinFunction
from discrete_ep2.solvers import HypothesisError, build_bounds, solve

UNIQ_MARGIN = 3.195262145875634984            # a=1, c=-4, N=4, b=0 (exact arithmetic)
M_C = math.sqrt((1 + math.sqrt(5)) / 2)
CBRT_27_4 = 1.889881574842309747


def positive_real_roots(coeffs):
    r = np.roots(coeffs)
    return np.sort(r[(abs(r.imag) < 1e-9) & (r.real > 0)].real)


class TestBisect:
    def test_basic(self):
        assert bisect_root(lambda t: t * t - 2, 0, 2) == pytest.approx(math.sqrt(2), abs=4e-16)

    def test_bad_bracket(self):
        with pytest.raises(ValueError):
            bisect_root(lambda t: t * t + 1, -1, 1)

    def test_infinite_ends(self):
        f = lambda t: -np.inf if t < 0.1 else t - 0.5  # noqa: E731
        assert bisect_root(f, 0.0, 1.0) == pytest.approx(0.5)


class TestUniqueness:
    def test_exact_cube(self):
        rep = uniqueness_condition(Parameters(1, 0, -4, 4))
        assert rep.details["M"] == pytest.approx(3.0, abs=1e-15)
        assert rep.margin == pytest.approx(UNIQ_MARGIN, abs=1e-14)
        assert rep.holds and rep.condition_id == "uniq_dirichlet"

    def test_robin_margin(self):
        rep = uniqueness_condition(Parameters(1, -2, -4, 4), "robin")
        assert rep.margin == pytest.approx(1.0)
        with pytest.raises(DomainError):
            uniqueness_condition(Parameters(1, 0, -4, 4), "robin", monotonicity_ok=False)

    def test_wrong_regime(self):
        with pytest.raises(DomainError):
            uniqueness_condition(Parameters(-1, 0, -4, 4))

    def test_M_positive(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            p = Parameters(rng.uniform(0.01, 5), 0, -rng.uniform(0.01, 5), int(rng.integers(2, 50)))
            assert uniqueness_condition(p).details["M"] > 0


class TestBetaCond:
    def test_beta_of_b(self):
        assert beta_of_b(Parameters(-1, 1.5, -1, 3)) == 1.0

    def test_threshold(self):
        for b, holds in ((CBRT_27_4 * (1 - 1e-9), False), (CBRT_27_4 * (1 + 1e-9), True)):
            assert beta_cond_check(Parameters(-1, b, -1, 3)).holds is holds
        assert beta_cond_check(Parameters(-1, 1, -1, 3)).margin == -23.0
        zero = beta_cond_check(Parameters(-1, 1.5, -0.5, 3))
        assert zero.margin == 0.0 and zero.holds

    def test_sign_of_G_at_beta(self):
        rng = np.random.default_rng(1)
        for _ in range(200):
            p = Parameters(-rng.uniform(0.1, 3), rng.uniform(0.1, 3), -rng.uniform(0.1, 3), 3)
            rep = beta_cond_check(p)
            g = rep.details["G1_at_beta"]
            assert abs(g) < 1e-12 or np.sign(g) == np.sign(rep.margin)


class TestIntervalIc:
    def test_factorized_cubic(self):
        lo, hi = interval_Ic(Parameters(-1, 2, -1, 3))
        assert lo == pytest.approx(1.0, abs=1e-12)
        assert hi == pytest.approx(M_C, abs=1e-10)

    def test_tangency(self):
        p = Parameters(-1, 1.5, -0.5, 3)
        lo, hi = interval_Ic(p)
        assert lo == hi == pytest.approx(1.0)

    def test_empty(self):
        with pytest.raises(DomainError, match="I_c empty"):
            interval_Ic(Parameters(-1, 1, -1, 3))

    def test_membership(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            a, c = -rng.uniform(0.2, 3), -rng.uniform(0.2, 3)
            b = np.cbrt(-27 * c * a * a / 4) * rng.uniform(1.01, 2)
            p = Parameters(a, b, c, 3)
            lo, hi = interval_Ic(p)
            phi = lambda z: a * z ** 6 + b * z ** 4 + c  # noqa: E731
            z = np.linspace(lo, hi, 50)[1:-1]
            assert np.all(phi(z) >= 0)
            assert phi(lo * (1 - 1e-6)) < 0 and phi(hi * (1 + 1e-6)) < 0
            assert lo <= beta_of_b(p) <= hi


class TestThresholds:
    def test_b_star(self):
        p = Parameters(-1, 0, -1, 4)
        assert b_star(p, Dirichlet(0.5, 0.5)) == pytest.approx(CBRT_27_4, abs=1e-14)
        assert b_star(p, Dirichlet(2, 1)) == 6.0

    def test_b_star_tight(self):
        p = Parameters(-1, 0, -1, 4)
        for bc in (Dirichlet(0.5, 0.5), Dirichlet(2, 1)):
            bs = b_star(p, bc)
            build_bounds(p.with_(b=bs * (1 + 1e-6)), bc, use_interval=False)
            with pytest.raises(HypothesisError):
                build_bounds(p.with_(b=bs * (1 - 1e-6)), bc, use_interval=False)

    def test_c_star(self):
        assert c_star(Parameters(-1, 3, -1, 3)) == 4.0
        assert c_star(Parameters(-2, 3, -1, 3)) == 1.0
        p = Parameters(-1, 3, -4.0, 3)
        assert beta_cond_check(p).margin == 0.0
        assert beta_cond_check(p.with_(c=-3.9)).holds
        with pytest.raises(DomainError):
            c_star(Parameters(-1, 3, -1, 3), Dirichlet(5, 1))


class TestHomogeneousRegime:
    @pytest.mark.parametrize("params,case", [
        (Parameters(1, -3, -1, 4), "a>0>c"),
        (Parameters(0, 1, -1, 4), "a=0,b>0>c"),
        (Parameters(-1, 3, -1, 4), "a,c<0"),
    ])
    def test_cases(self, params, case):
        rep = homogeneous_regime(params)
        assert rep.holds and rep.details["case"] == case

    def test_equality_fails(self):
        assert not homogeneous_regime(Parameters(-1, 1.5, -0.5, 4)).holds


def test_box_small_c_condition():
    assert analysis.box_small_c_condition(Parameters(1, -1, 1, 3), Dirichlet(0, 0)).margin == 0.0
    assert not analysis.box_small_c_condition(Parameters(1, -1, 1, 3), Dirichlet(0, 0)).holds
    assert analysis.box_small_c_condition(Parameters(1, -1.5, 1, 3), Dirichlet(0, 0)).holds
    assert analysis.box_small_c_condition(Parameters(1, 5, 1, 3), Dirichlet(1, 0)).holds


def test_rob_rep_growth():
    good = Robin(RobinFunction(((-0.5, 1), (0.2, 0))), RobinFunction(((0.5, 1), (-0.2, 0))))
    assert analysis.rob_rep_growth(Parameters(-1, 0, 1, 4), good).holds
    steep = Robin(RobinFunction(((-2.0, 1),)), RobinFunction(((0.5, 1),)))
    assert not analysis.rob_rep_growth(Parameters(-1, 0, 1, 4), steep).holds


class TestCheckLowerUpper:
    def test_constants(self):
        p, bc = Parameters(1, 0, -1, 4), Dirichlet(1, 1)
        chk = check_lower_upper(p, bc, np.full(5, 0.5), np.full(5, 2.0))
        assert chk.is_lower and chk.is_upper
        bad = check_lower_upper(p, bc, np.full(5, 1.5), np.full(5, 0.8))
        assert not bad.is_lower and not bad.is_upper
        assert bad.lower_violations and bad.upper_violations

    def test_solution_is_both(self):
        p, bc = Parameters(1, 1, -1, 4), Dirichlet(1, 1)
        u = solve(p, bc).solution
        chk = check_lower_upper(p, bc, u, u, rtol=1e-9)
        assert chk.is_lower and chk.is_upper


class TestShooting:
    def test_recurrence(self):
        p, bc = Parameters(1, 0, -1, 3), Dirichlet(1, 1)
        s, u = shoot(p, bc, 1.0)
        assert s == 0.0
        np.testing.assert_array_equal(u, np.ones(4))

    def test_crash_is_minus_inf_for_attractive_dirichlet(self):
        s, _ = shoot(Parameters(1, 0, -1, 4), Dirichlet(1, 1), 1e-3)
        assert s == -np.inf

    @pytest.mark.parametrize("n", [2, 4, 8])
    def test_constant_solution_found(self, n):
        sols = enumerate_solutions(Parameters(1, 0, -1, n), Dirichlet(1, 1))
        assert any(np.max(np.abs(u - 1)) < 1e-9 for u in sols)

    def test_n2_matches_polynomial(self):
        rng = np.random.default_rng(3)
        for _ in range(30):
            p = Parameters(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-2, 2), 2)
            bc = Dirichlet(*rng.uniform(0.1, 2, 2))
            roots = positive_real_roots([p.a, 0, 2 + p.b, -(bc.d0 + bc.dn), 0, 0, p.c])
            roots = roots[(roots > 1e-3) & (roots < 10)]
            found = np.array([u[1] for u in enumerate_solutions(p, bc)])
            assert len(found) == len(roots)
            np.testing.assert_allclose(found, roots, atol=1e-9)

    def test_budget(self):
        with pytest.raises(DomainError, match="enumeration budget"):
            enumerate_solutions(Parameters(1, 0, -1, 9), Dirichlet(1, 1))

    def test_large_c_has_no_solution(self):
        assert enumerate_solutions(Parameters(1, 0, 50.0, 3), Dirichlet(1, 1)) == []

    def test_full_output(self):
        sols, info = enumerate_solutions(Parameters(1, 1, -1, 2), Dirichlet(1, 1), full_output=True)
        assert len(sols) == 1 and info["brackets"] >= 1
        assert info["resolution"] == 1e-3

    def test_offset_does_not_change_roots(self):
        p, bc = Parameters(-2, 3, 0.01, 2), Dirichlet(1, 1)
        a = enumerate_solutions(p, bc)
        b = enumerate_solutions(p, bc, offset=0.37)
        assert len(a) == len(b) == 3
        np.testing.assert_allclose(np.array(a), np.array(b), atol=1e-9)

    def test_robin_unique(self):
        p = Parameters(2, 1, -1, 4)
        bc = Robin(RobinFunction(((0.5, 1), (-0.5, 0)), "nondecreasing"),
                   RobinFunction(((0.3, 0), (-0.3, 1)), "nonincreasing"))
        assert uniqueness_condition(p, "robin").holds
        (u,) = enumerate_solutions(p, bc)
        np.testing.assert_allclose(u, solve(p, bc).solution, atol=1e-8)


class TestN2:
    def test_threshold(self):
        rep, _ = n2_analysis(Parameters(-2, 0, 1, 2), Dirichlet(1, 1))
        assert rep.details["T"] == pytest.approx(9 / 4 * np.cbrt(4), rel=1e-14)
        assert rep.details["T"] - 2 == pytest.approx(1.5716, abs=1e-4)
        assert rep.holds

    def test_tangency(self):
        T = 9 / 4 * np.cbrt(4)
        rep, _ = n2_analysis(Parameters(-2, T - 2, 1, 2), Dirichlet(1, 1))
        assert abs(rep.margin) < 1e-12
        assert abs(rep.details["q_max"]) < 1e-12

    def test_counts_agree_with_oracle(self):
        for b in (0.0, 1.0, 3.0, 6.0):
            for c in np.geomspace(1e-3, 1e2, 12):
                p, bc = Parameters(-2, b, c, 2), Dirichlet(1, 1)
                rep, roots = n2_analysis(p, bc)
                count = rep.details["root_count"]
                assert count <= 3 and count == len(roots)
                assert count == len(enumerate_solutions(p, bc))
                assert count == len(positive_real_roots([-2, 0, 2 + b, -2, 0, 0, c]))

    def test_regime(self):
        with pytest.raises(DomainError):
            n2_analysis(Parameters(1, 0, -1, 2), Dirichlet(1, 1))
        with pytest.raises(DomainError):
            n2_analysis(Parameters(-2, 0, 1, 3), Dirichlet(1, 1))


def test_G_sign_matches_build_bounds_beta():
    p = Parameters(-1, 3, -1, 4)
    _, beta = build_bounds(p, Dirichlet(0.5, 0.5))
    assert np.all(G(p, p.interior, beta[0]) >= 0)
