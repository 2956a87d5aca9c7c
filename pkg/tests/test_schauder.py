import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from approxfix.errors import DimensionMismatch, UncoveredPoint
from approxfix.schauder import SchauderProjection, partition_value, project
from approxfix.seminorms import AdmissibleSeminorm, LinearFunctional, build_admissible, coordinate_functionals
from approxfix.sets import ConvexBody, EpsNet, build_eps_net, sample_body


def scaled_abs(c):
    return AdmissibleSeminorm((LinearFunctional([1.0]),), np.array([c]), c)


def test_partition_at_centre():
    rho = scaled_abs(0.5)
    assert partition_value(rho, 0.6, [0.0], [0.0]) == 0.6


def test_partition_clamped():
    rho = scaled_abs(0.5)
    assert partition_value(rho, 0.6, [0.0], [2.0]) == 0.0


def test_partition_hand_value():
    assert partition_value(scaled_abs(0.5), 0.6, [0.0], [0.4]) == pytest.approx(0.4)


def test_partition_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        partition_value(scaled_abs(0.5), 0.6, [0.0], [0.4, 1.0])


def test_projection_symmetric_segment():
    net = EpsNet(np.array([[0.0], [1.0]]), 0.6, scaled_abs(1.0))
    proj = SchauderProjection(net)
    np.testing.assert_allclose(proj.partition(np.array([0.5])), [0.1, 0.1])
    np.testing.assert_allclose(project(proj, np.array([0.5])), [0.5])


def test_projection_isolated_net_point():
    net = EpsNet(np.array([[0.0], [1.0]]), 0.4, scaled_abs(1.0))
    np.testing.assert_allclose(project(SchauderProjection(net), np.array([1.0])), [1.0])


def test_uncovered_point():
    net = EpsNet(np.array([[0.0], [1.0]]), 0.4, scaled_abs(1.0))
    with pytest.raises(UncoveredPoint):
        project(SchauderProjection(net), np.array([0.5]))


@pytest.fixture(scope="module")
def square_projection():
    body = ConvexBody.box([-1, -1], [1, 1])
    rho = build_admissible(coordinate_functionals(2), body)
    return body, rho, SchauderProjection(build_eps_net(body, rho, 0.05))


def test_projection_defect_below_epsilon(square_projection):
    body, rho, proj = square_projection
    xs = sample_body(body, 1000, 11)
    defects = rho(np.array([proj(x) for x in xs]) - xs)
    assert defects.max() < proj.epsilon


def test_projection_lands_in_hull(square_projection):
    body, _, proj = square_projection
    for x in sample_body(body, 50, 2):
        assert body.contains(proj(x))


coords = st.floats(-1, 1, allow_nan=False)


@settings(max_examples=300, deadline=None)
@given(coords, coords, coords, coords)
def test_partition_lipschitz(a, b, c, d):
    rho = build_admissible(coordinate_functionals(2), ConvexBody.box([-1, -1], [1, 1]))
    p = np.array([0.1, -0.2])
    x, y = np.array([a, b]), np.array([c, d])
    gap = abs(partition_value(rho, 0.3, p, x) - partition_value(rho, 0.3, p, y))
    assert gap <= rho(x - y) + 1e-15
