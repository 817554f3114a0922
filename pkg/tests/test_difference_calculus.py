import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from discrete_ep2.difference_calculus import (delta, delta2, dirichlet_eigenvector, grid_function,
                                              lambda1, norm2, summation_by_parts_residual)

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)
grids = st.integers(3, 40).flatmap(lambda m: arrays(np.float64, m, elements=finite))


def test_delta_examples():
    np.testing.assert_array_equal(delta([0, 0, 0]), [0, 0])
    np.testing.assert_array_equal(delta([1, 2, 4]), [1, 2])


def test_delta2_examples():
    np.testing.assert_array_equal(delta2([1, 1, 1]), [0])
    np.testing.assert_array_equal(delta2([0, 1, 4, 9]), [2, 2])


def test_delta2_needs_three_nodes():
    with pytest.raises(ValueError):
        delta2([1.0, 2.0])


@given(grids)
def test_telescoping(u):
    rebuilt = u[0] + np.concatenate(([0.0], np.cumsum(delta(u))))
    np.testing.assert_allclose(rebuilt, u, atol=1e-9 * (1 + np.max(np.abs(u))))


@given(grids)
def test_delta2_is_difference_of_delta(u):
    d = delta(u)
    np.testing.assert_allclose(delta2(u), d[1:] - d[:-1], rtol=0, atol=1e-12 * (1 + np.max(np.abs(u))))


def test_norm2():
    assert norm2([3, 4]) == 5.0
    assert norm2(np.zeros(7)) == 0.0
    with pytest.raises(ValueError):
        norm2([])


@given(arrays(np.float64, st.integers(1, 50), elements=finite))
def test_norm2_squares(v):
    assert norm2(v) ** 2 == pytest.approx(float(np.sum(v * v)), rel=1e-12, abs=1e-300)


def test_lambda1_values():
    assert lambda1(2) == pytest.approx(2.0, abs=1e-15)
    assert lambda1(3) == pytest.approx(1.0, abs=1e-15)
    assert abs(lambda1(1000) * 1000 ** 2 / np.pi ** 2 - 1) < 1e-5


@pytest.mark.parametrize("bad", [1, 0, -3, 2.5])
def test_lambda1_domain(bad):
    with pytest.raises(ValueError):
        lambda1(bad)


def test_summation_by_parts_examples():
    assert summation_by_parts_residual([1, 1, 1, 1]) == 0.0
    assert summation_by_parts_residual([0, 1, 0]) == 0.0


@settings(max_examples=300)
@given(grids)
def test_summation_by_parts_random(u):
    assert summation_by_parts_residual(u) <= 1e-12 * (1 + norm2(u) ** 2)


@pytest.mark.parametrize("n", [2, 3, 7, 32])
def test_eigenvector_attains_lambda1(n):
    v = dirichlet_eigenvector(n)
    assert lambda1(n) * norm2(v) ** 2 == pytest.approx(norm2(delta(v)) ** 2, rel=1e-10)
    # and it is an eigenvector: -delta2 v = lambda1 v on the interior
    np.testing.assert_allclose(-delta2(v), lambda1(n) * v[1:-1], atol=1e-13)


def test_grid_function_validation():
    np.testing.assert_array_equal(grid_function([1, 2]), [1.0, 2.0])
    with pytest.raises(ValueError):
        grid_function([[1, 2]])
    with pytest.raises(ValueError):
        grid_function([1.0])
    with pytest.raises(ValueError):
        grid_function([1.0, np.nan])
    with pytest.raises(ValueError, match=r"u\[1\]"):
        grid_function([1.0, 0.0, 2.0], positive=True)
