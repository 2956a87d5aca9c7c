import numpy as np
import pytest

from approxfix.errors import DimensionMismatch, EmptyInput, NetOverflow
from approxfix.seminorms import AdmissibleSeminorm, LinearFunctional, build_admissible, default_functionals
from approxfix.sets import ConvexBody, EpsNet, build_eps_net, construction_grid, sample_body


def half_abs():
    return AdmissibleSeminorm((LinearFunctional([1.0], "x"),), np.array([0.5]), 0.5)


def brute_force_covered(grid, net, rho, radius):
    # independent pairwise scan
    for x in grid:
        if min(rho(x - p) for p in net.points) >= radius:
            return False
    return True


def test_body_rejects_empty():
    with pytest.raises(EmptyInput):
        ConvexBody(np.empty((0, 2)))


def test_box_generators(square):
    assert len(square.generators) == 4
    assert square.is_box()
    assert square.diameter() == pytest.approx(2 * np.sqrt(2))


def test_membership(square):
    assert square.contains([0.3, -0.99])
    assert not square.contains([1.01, 0.0])
    with pytest.raises(DimensionMismatch):
        square.contains([0.0, 0.0, 0.0])


def test_triangle_is_not_box():
    assert not ConvexBody([[0, 0], [1, 0], [0, 1]]).is_box()


def test_sample_single_generator():
    body = ConvexBody([[2.0, -1.0]])
    np.testing.assert_array_equal(sample_body(body, 5, 0), np.tile([2.0, -1.0], (5, 1)))


def test_sample_segment_stays_inside(segment):
    s = sample_body(segment, 1000, 7)
    assert s.min() >= 0.0 and s.max() <= 1.0


def test_sample_square_mean(square):
    np.testing.assert_allclose(sample_body(square, 10_000, 0).mean(axis=0), 0.0, atol=0.05)


def test_sample_is_seeded(square):
    np.testing.assert_array_equal(sample_body(square, 10, 3), sample_body(square, 10, 3))


def test_net_of_point():
    body = ConvexBody([[0.5, 0.5]])
    rho = build_admissible(default_functionals(2), body)
    net = build_eps_net(body, rho, 0.1)
    np.testing.assert_array_equal(net.points, [[0.5, 0.5]])


def test_net_of_segment(segment):
    rho = half_abs()
    grid = np.linspace(0, 1, 101)[:, None]
    net = build_eps_net(segment, rho, 0.3, grid=grid)
    assert len(net) == 1
    np.testing.assert_allclose(net.points, [[0.5]])
    assert brute_force_covered(grid, net, rho, 0.3)


def test_square_net_coverage(square, square_rho):
    grid = construction_grid(square, square_rho, 0.05)
    net = build_eps_net(square, square_rho, 0.05, grid=grid)
    assert brute_force_covered(grid, net, square_rho, 0.05 * 0.9)
    # off-grid points are covered at the full radius
    assert net.covers(sample_body(square, 2000, 1)).all()


def test_net_points_in_body(square, square_rho):
    net = build_eps_net(square, square_rho, 0.1)
    assert square.contains_many(net.points).all()


def test_net_overflow(square, square_rho):
    with pytest.raises(NetOverflow):
        build_eps_net(square, square_rho, 0.01, cap=10)


def test_net_rejects_outside_grid(square, square_rho):
    with pytest.raises(ValueError):
        build_eps_net(square, square_rho, 0.5, grid=[[2.0, 0.0]])


def test_net_deterministic(square, square_rho):
    a = build_eps_net(square, square_rho, 0.07)
    b = build_eps_net(square, square_rho, 0.07)
    np.testing.assert_array_equal(a.points, b.points)


def test_net_csv(tmp_path, square, square_rho):
    net = build_eps_net(square, square_rho, 0.25)
    path = tmp_path / "net.csv"
    net.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# epsilon=0.25")
    assert lines[1] == "x1,x2"
    np.testing.assert_array_equal(np.loadtxt(path, delimiter=",", skiprows=2, ndmin=2), net.points)


def test_lower_dimensional_body():
    # a segment embedded in the plane
    body = ConvexBody([[0.0, 0.0], [1.0, 1.0]])
    rho = build_admissible(default_functionals(2), body)
    net = build_eps_net(body, rho, 0.1)
    assert isinstance(net, EpsNet)
    assert body.contains_many(net.points).all()
    assert net.covers(sample_body(body, 500, 0)).all()


@pytest.mark.parametrize("eps", [0.3, 0.1, 0.05])
def test_net_points_separated(square, square_rho, eps):
    net = build_eps_net(square, square_rho, eps)
    pts = net.points
    gaps = square_rho((pts[:, None, :] - pts[None, :, :]).reshape(-1, 2)).reshape(len(pts), len(pts))
    np.fill_diagonal(gaps, np.inf)
    assert gaps.min() >= eps * (1 - net.margin)
