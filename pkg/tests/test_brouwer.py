import numpy as np
import pytest

from approxfix.brouwer import (barycentric_lattice, confined, grid_oracle, oracle_grid, oracle_spacing,
                               solve_fixed_point)
from approxfix.errors import DimensionTooHigh, MapLeavesHull, NotConverged
from approxfix.seminorms import build_admissible, coordinate_functionals
from approxfix.sets import ConvexBody, build_eps_net

from conftest import quarter_turn

SQUARE = np.array([[-1.0, -1.0], [1.0, -1.0], [-1.0, 1.0], [1.0, 1.0]])
INTERVAL = np.array([[-1.0], [1.0]])


def test_identity_returns_start():
    res = solve_fixed_point(lambda z: z, SQUARE)
    assert res.residual_norm == 0.0
    assert res.iterations == 0
    assert res.method == "damped_iteration"
    np.testing.assert_allclose(res.point, [0.0, 0.0])


def test_constant_map_one_step():
    c = np.array([0.3, -0.7])
    res = solve_fixed_point(lambda z: c, SQUARE)
    np.testing.assert_allclose(res.point, c)
    assert res.iterations == 1


def test_rotation_centre():
    res = solve_fixed_point(quarter_turn, SQUARE, tol=1e-10)
    np.testing.assert_allclose(res.point, [0.0, 0.0], atol=1e-9)
    assert confined(SQUARE, res.point)


def test_off_centre_spiral():
    centre = np.array([0.4, -0.3])
    res = solve_fixed_point(lambda z: centre + quarter_turn(z - centre) * 0.5, SQUARE, tol=1e-9)
    np.testing.assert_allclose(res.point, centre, atol=1e-8)


def test_expanding_map_escalates():
    # the centre repels, so damped iteration stalls and the minimizer takes over
    centre = np.array([0.4, -0.3])
    f = lambda z: np.clip(centre + 3 * quarter_turn(z - centre), -1, 1)
    res = solve_fixed_point(f, SQUARE, tol=1e-9)
    assert res.method == "multistart_minimization"
    assert np.linalg.norm(f(res.point) - res.point) <= 1e-9


def test_map_leaving_hull():
    with pytest.raises(MapLeavesHull):
        solve_fixed_point(lambda z: z + 5.0, SQUARE)


def test_budget_exhaustion():
    with pytest.raises(NotConverged) as info:
        solve_fixed_point(lambda z: np.cos(3 * z[::-1]) * 0.9, SQUARE, tol=1e-14, budget=5)
    assert info.value.best_residual >= 0


def test_accepts_eps_net():
    body = ConvexBody.box([-1, -1], [1, 1])
    net = build_eps_net(body, build_admissible(coordinate_functionals(2), body), 0.25)
    res = solve_fixed_point(lambda z: 0.5 * z, net)
    assert res.residual_norm <= min(1e-8, net.epsilon / 100)


def test_seeded_reproducible():
    f = lambda z: np.array([np.cos(z[1]), 0.5 * np.sin(z[0])]) * 0.9
    a = solve_fixed_point(f, SQUARE, seed=3)
    b = solve_fixed_point(f, SQUARE, seed=3)
    np.testing.assert_array_equal(a.point, b.point)


def test_barycentric_lattice_count():
    tri = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    pts = barycentric_lattice(tri, 4)
    assert len(pts) == 15  # C(4 + 2, 2)
    assert ConvexBody(tri).contains_many(pts).all()


def test_oracle_identity_first_point():
    grid = oracle_grid(SQUARE, 10)
    np.testing.assert_array_equal(grid_oracle(lambda z: z, SQUARE, 10), grid[0])


def test_oracle_contraction():
    z = grid_oracle(lambda z: z / 2, INTERVAL, 50)
    grid = oracle_grid(INTERVAL, 50)
    np.testing.assert_allclose(z, grid[np.argmin(np.abs(grid[:, 0]))])


def test_oracle_rotation():
    z = grid_oracle(quarter_turn, SQUARE, 50)
    assert np.linalg.norm(z) <= 2 / 50 * 2 * np.sqrt(2)


def test_oracle_dimension_too_high():
    with pytest.raises(DimensionTooHigh):
        grid_oracle(lambda z: z, np.vstack([np.zeros(4), np.eye(4)]), 2)


def test_solver_matches_oracle_on_triangle():
    tri = np.array([[0.0, 0.0], [2.0, 0.0], [0.0, 2.0]])
    f = lambda z: np.array([0.5 + 0.25 * z[1], 0.4 + 0.2 * z[0]])
    res = solve_fixed_point(f, tri)
    assert np.linalg.norm(res.point - grid_oracle(f, tri, 50)) <= oracle_spacing(tri, 50) + 1e-8
