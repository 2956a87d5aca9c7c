"""Finite-dimensional fixed point solver for self-maps of a polytope.

The polytope is the convex hull of a finite point set (usually an
epsilon-net).  Points are handled in the hull's intrinsic affine
coordinates; barycentric weights over the generating points are used only
to certify that iterates stay in the hull.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize
from scipy.spatial import Delaunay

from .errors import DimensionTooHigh, MapLeavesHull, NotConverged
from .geometry import Hull, barycentric_fit

log = logging.getLogger(__name__)

MAP_HULL_TOL = 1e-6
CONFINEMENT_TOL = 1e-10
MIN_STEP = 2.0 ** -8
METHODS = ("damped_iteration", "multistart_minimization", "grid_oracle")


@dataclass(frozen=True)
class FixedPointResult:
    point: np.ndarray
    residual_norm: float
    iterations: int
    method: str
    start_index: int = 0
    hull_residual: float = 0.0
    weights: np.ndarray = field(default=None, repr=False)


def _points_of(net):
    pts = getattr(net, "points", net)
    return np.atleast_2d(np.asarray(pts, dtype=float))


def default_tolerance(net) -> float:
    eps = getattr(net, "epsilon", None)
    return 1e-8 if eps is None else min(1e-8, eps / 100.0)


class _Budget(Exception):
    pass


class _Problem:
    """Counts map evaluations and enforces the hull check on every output."""

    def __init__(self, fmap, hull, budget):
        self.fmap = fmap
        self.hull = hull
        self.budget = budget
        self.evals = 0
        self.best = (np.inf, None)

    def image(self, z):
        if self.evals >= self.budget:
            raise _Budget
        self.evals += 1
        fz = np.asarray(self.fmap(z), dtype=float)
        viol = float(self.hull.violation(fz))
        if not viol <= MAP_HULL_TOL:
            raise MapLeavesHull(fz, viol)
        r = float(np.linalg.norm(fz - z))
        if r < self.best[0]:
            self.best = (r, z.copy())
        return fz, r


def _damped(problem, z, tol, max_steps):
    """Krasnoselskii-type iteration ``z <- (1-lam) z + lam T(z)`` with step backtracking."""
    fz, r = problem.image(z)
    steps = 0
    lam = 1.0
    while r > tol and steps < max_steps:
        cand = (1.0 - lam) * z + lam * fz
        fc, rc = problem.image(cand)
        steps += 1
        if rc < r:
            z, fz, r = cand, fc, rc
            lam = min(1.0, 2.0 * lam)
        else:
            lam *= 0.5
            if lam < MIN_STEP:
                break
    return z, r, steps


def _starts(points, hull, count, seed):
    rng = np.random.default_rng(seed)
    out = [points.mean(axis=0)]
    n_net = min(len(points), max(0, (count - 1) // 2))
    if n_net:
        idx = np.unique(np.linspace(0, len(points) - 1, n_net).round().astype(int))
        out.extend(points[idx])
    while len(out) < count:
        w = rng.dirichlet(np.ones(len(points)))
        out.append(w @ points)
    return [hull.to_coords(s) for s in out[:count]]


def solve_fixed_point(fmap, net, tol: float | None = None, budget: int = 50_000, seed: int = 0,
                      starts: int = 8) -> FixedPointResult:
    """Find ``z`` in the hull of ``net`` with ``||fmap(z) - z|| <= tol``.

    Damped iteration runs first from the centroid of the net.  If it
    stalls, Nelder-Mead minimizes the squared residual from ``starts``
    starting points (the centroid, a spread of net points and seeded
    Dirichlet samples), each result being polished by damped iteration.
    Among the candidates the lowest residual wins, then the lowest start
    index.  The reported residual comes from a fresh evaluation of
    ``fmap`` at the returned point.

    Raises
    ------
    MapLeavesHull
        If an output of ``fmap`` is not in the hull.
    NotConverged
        If ``budget`` map evaluations do not reach ``tol``.
    """
    points = _points_of(net)
    tol = default_tolerance(net) if tol is None else float(tol)
    if tol <= 0:
        raise ValueError("tol must be positive")
    hull = Hull(points)
    problem = _Problem(fmap, hull, budget)
    starts_y = _starts(points, hull, max(1, starts), seed)

    def lift(y):
        return hull.to_ambient(hull.retract(y))

    def finish(z, method, start_index, iterations):
        fz = np.asarray(fmap(z), dtype=float)
        r = float(np.linalg.norm(fz - z))
        w, fit = barycentric_fit(points, z)
        return FixedPointResult(z, r, iterations, method, start_index, fit, w)

    try:
        z0 = lift(starts_y[0])
        z, r, steps = _damped(problem, z0, tol, budget)
        if r <= tol:
            return finish(z, "damped_iteration", 0, steps)

        if hull.dim == 0:
            raise NotConverged(r, z)

        def objective(y):
            zz = lift(y)
            return problem.image(zz)[1] ** 2

        results = []
        per_start = max(200, (budget - problem.evals) // len(starts_y))
        for k, y0 in enumerate(starts_y):
            if problem.evals >= budget:
                break
            span = np.maximum(hull.upper - hull.lower, 1e-12)
            simplex = np.vstack([y0] + [y0 + 0.1 * span[i] * np.eye(hull.dim)[i] for i in range(hull.dim)])
            try:
                res = minimize(objective, y0, method="Nelder-Mead",
                               options={"initial_simplex": simplex, "xatol": tol * 1e-3,
                                        "fatol": (tol * 1e-2) ** 2,
                                        "maxfev": min(per_start, budget - problem.evals)})
                zk = lift(res.x)
                zk, rk, _ = _damped(problem, zk, tol, 200)
            except _Budget:
                break
            results.append((rk, k, zk))
            if rk <= tol:
                break
        results.sort(key=lambda item: (item[0], item[1]))
        if results and results[0][0] <= tol:
            rk, k, zk = results[0]
            return finish(zk, "multistart_minimization", k, problem.evals)
    except _Budget:
        pass
    best_r, best_z = problem.best
    raise NotConverged(best_r, best_z)


def barycentric_lattice(vertices, resolution: int) -> np.ndarray:
    """All points ``sum_i (k_i / resolution) v_i`` with nonnegative integers ``k_i``."""
    vertices = np.atleast_2d(vertices)
    m = len(vertices)
    combos = []
    for bars in itertools.combinations(range(resolution + m - 1), m - 1):
        edges = (-1,) + bars + (resolution + m - 1,)
        combos.append([edges[i + 1] - edges[i] - 1 for i in range(m)])
    return np.asarray(combos, dtype=float) / resolution @ vertices


def _oracle_cells(points):
    hull = Hull(points)
    if hull.dim > 3:
        raise DimensionTooHigh(f"hull dimension {hull.dim} exceeds 3")
    verts = points[hull.vertices]
    if len(verts) <= hull.dim + 1 or len(verts) <= 4:
        return hull, [verts]
    tri = Delaunay(hull.to_coords(verts))
    return hull, [verts[s] for s in tri.simplices]


def oracle_grid(net, resolution: int) -> np.ndarray:
    _, cells = _oracle_cells(_points_of(net))
    return np.vstack([barycentric_lattice(c, resolution) for c in cells])


def oracle_spacing(net, resolution: int) -> float:
    """Longest cell edge divided by ``resolution``."""
    _, cells = _oracle_cells(_points_of(net))
    longest = 0.0
    for c in cells:
        diff = c[:, None, :] - c[None, :, :]
        longest = max(longest, float(np.sqrt((diff ** 2).sum(-1)).max()))
    return longest / resolution


def grid_oracle(fmap, net, resolution: int = 50) -> np.ndarray:
    """Brute-force minimizer of ``||fmap(z) - z||`` over a barycentric grid.

    Hulls with more than four vertices are split into Delaunay simplices
    and each simplex gets its own lattice.  Ties go to the first grid point.
    Intended as an independent check on :func:`solve_fixed_point`.
    """
    if resolution < 1:
        raise ValueError("resolution must be positive")
    grid = oracle_grid(net, resolution)
    res = np.array([np.linalg.norm(np.asarray(fmap(z), dtype=float) - z) for z in grid])
    return grid[int(np.argmin(res))]


def confined(points, z, tol: float = CONFINEMENT_TOL) -> bool:
    w, fit = barycentric_fit(_points_of(points), z)
    return fit <= tol and abs(w.sum() - 1.0) <= tol and bool(np.all(w >= 0))
