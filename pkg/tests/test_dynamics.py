import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nio.dynamics import BoundaryCondition, MapSpec, Side, fold, map_sup_distance

alphas = st.floats(1.01, 12.0)
betas = st.floats(0.05, 1.0)


def test_evaluate_examples():
    assert MapSpec(2, 1).evaluate(0.5) == pytest.approx(-0.5, abs=1e-15)
    assert MapSpec(3.3, 0.7).evaluate(0.0) == -1.0
    assert MapSpec(5, 1).evaluate(1.0) == 1.0


def test_evaluate_rejects_outside_domain():
    with pytest.raises(ValueError):
        MapSpec(2, 1).evaluate(1.5)


@pytest.mark.parametrize("alpha,beta", [(1.0, 1.0), (0.5, 1.0), (2.0, 0.0), (2.0, 1.2), (math.nan, 1.0)])
def test_invalid_parameters(alpha, beta):
    with pytest.raises(ValueError):
        MapSpec(alpha, beta)


def test_log_abs_derivative_examples():
    assert MapSpec(2, 1).log_abs_derivative(1.0) == pytest.approx(math.log(4), abs=1e-15)
    assert MapSpec(5, 1).log_abs_derivative(-1.0) == pytest.approx(math.log(10), abs=1e-15)
    assert MapSpec(3, 0.4).log_abs_derivative(0.0) == -math.inf
    assert not np.any(np.isnan(MapSpec(3, 0.4).log_abs_derivative(np.linspace(-1, 1, 11))))


def test_branch_inverse_examples():
    m = MapSpec(2, 1)
    assert m.branch_inverse(-1.0, Side.RIGHT) == 0.0
    assert m.branch_inverse(1.0, Side.LEFT) == -1.0
    assert m.branch_inverse(-0.5, Side.RIGHT) == pytest.approx(0.5, abs=1e-15)
    assert MapSpec(2, 0.5).branch_inverse(0.5, Side.RIGHT) is None


def test_fold_examples():
    assert fold(BoundaryCondition.PERIODIC, 1.5) == pytest.approx(-0.5)
    assert fold("reflecting", 1.2) == pytest.approx(0.8)
    assert fold("periodic", 0.3) == pytest.approx(0.3, abs=1e-15)
    assert fold("reflecting", 0.3) == pytest.approx(0.3, abs=1e-15)


def test_fold_parse_rejects_unknown():
    with pytest.raises(ValueError):
        fold("absorbing", 0.0)


@given(alphas, betas, st.floats(-1, 1))
def test_symmetry(alpha, beta, x):
    m = MapSpec(alpha, beta)
    assert m.evaluate(x) == m.evaluate(-x)


@given(alphas, betas, st.floats(0, 1), st.sampled_from(list(Side)))
def test_branch_round_trip(alpha, beta, t, side):
    m = MapSpec(alpha, beta)
    y = -1.0 + t * 2.0 * beta
    x = m.branch_inverse(y, side)
    assert x is not None
    assert (x >= 0) == (side is Side.RIGHT) or x == 0.0
    assert m.evaluate(x) == pytest.approx(y, abs=1e-12)


@given(st.floats(-50, 50), st.sampled_from(list(BoundaryCondition)))
def test_fold_lands_in_domain_and_is_idempotent(x, bc):
    y = fold(bc, x)
    assert -1.0 <= y <= 1.0
    assert fold(bc, y) == pytest.approx(y, abs=1e-12)


def test_reflecting_fold_periodic_and_even_on_grid():
    x = np.linspace(-7, 7, 4001)
    f = fold("reflecting", x)
    np.testing.assert_allclose(fold("reflecting", x + 4.0), f, atol=1e-12)
    np.testing.assert_allclose(fold("reflecting", 2.0 - x), f, atol=1e-12)  # even about 1
    np.testing.assert_allclose(fold("reflecting", -2.0 - x), f, atol=1e-12)  # even about -1


def test_reflecting_fold_matches_min_formula():
    x = np.linspace(-9, 9, 1001)
    i = np.arange(-5, 6)
    brute = np.min(np.abs((x[:, None] + 1) - 4 * i[None, :]), axis=1) - 1
    np.testing.assert_allclose(fold("reflecting", x), brute, atol=1e-13)


def test_periodic_fold_identity_in_domain():
    x = np.linspace(-1, 1, 101)[:-1]
    np.testing.assert_allclose(fold("periodic", x), x, atol=1e-15)


def _grid_sup(m1, m2, points=10**6):
    x = np.linspace(0.0, 1.0, points)
    return float(np.max(np.abs(m2.evaluate(x) - m1.evaluate(x))))


def test_map_sup_distance_examples():
    assert map_sup_distance(MapSpec(2, 1), MapSpec(2, 1)) == 0.0
    assert map_sup_distance(MapSpec(2, 0.9), MapSpec(2, 1.0)) == pytest.approx(0.2, abs=1e-15)
    bound = map_sup_distance(MapSpec(2, 1), MapSpec(2.5, 1))
    brute = _grid_sup(MapSpec(2, 1), MapSpec(2.5, 1))
    assert brute <= bound <= brute + 1e-9  # beta = 1: the bound is the exact sup


def test_map_sup_distance_out_of_region():
    with pytest.raises(ValueError):
        map_sup_distance(MapSpec(2, 1), MapSpec(2, 1.1))


@settings(max_examples=40, deadline=None)
@given(st.floats(1.1, 8), st.floats(0.15, 0.9), st.floats(-0.1, 0.1), st.floats(-1, 1))
def test_map_sup_distance_bounds_grid_sup(alpha, beta, h, k):
    m1 = MapSpec(alpha, beta)
    m2 = MapSpec(max(1.05, alpha + k), beta + h)
    assert _grid_sup(m1, m2, 20001) <= map_sup_distance(m1, m2) + 1e-12
    assert map_sup_distance(m1, m2) == pytest.approx(map_sup_distance(m2, m1))
