"""Compact convex bodies given by generators, and rho-ball epsilon-nets."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DimensionMismatch, EmptyInput, NetOverflow
from .geometry import Hull, barycentric_fit, bounding_corners

MEMBERSHIP_TOL = 1e-8
DEFAULT_MARGIN = 0.1
DEFAULT_NET_CAP = 20000
DEFAULT_GRID_CAP = 2_000_000


class ConvexBody:
    """Convex hull of a finite list of generator points in R^d.

    The generators are stored as a read-only ``(m, d)`` array.  Membership
    is certified by an NNLS barycentric fit; the facet description built
    from qhull is used where many points have to be screened at once.
    """

    def __init__(self, generators):
        gens = np.atleast_2d(np.array(generators, dtype=float))
        if gens.ndim != 2 or gens.shape[0] == 0 or gens.shape[1] == 0:
            raise EmptyInput("a convex body needs at least one generator")
        if not np.all(np.isfinite(gens)):
            raise ValueError("generators must be finite")
        gens.setflags(write=False)
        self.generators = gens
        self._hull = None

    @classmethod
    def box(cls, lower, upper):
        lower = np.asarray(lower, dtype=float).ravel()
        upper = np.asarray(upper, dtype=float).ravel()
        if lower.shape != upper.shape or np.any(upper < lower):
            raise ValueError("box needs lower <= upper componentwise")
        return cls(np.unique(bounding_corners(lower, upper), axis=0))

    @property
    def dimension(self) -> int:
        return self.generators.shape[1]

    @property
    def hull(self) -> Hull:
        if self._hull is None:
            self._hull = Hull(self.generators)
        return self._hull

    def __repr__(self):
        return f"ConvexBody({len(self.generators)} generators in R^{self.dimension})"

    def barycentric(self, x):
        self._check_dim(x)
        return barycentric_fit(self.generators, x)

    def contains(self, x, tol: float = MEMBERSHIP_TOL) -> bool:
        """NNLS barycentric membership test for a single point."""
        return self.barycentric(x)[1] <= tol

    def contains_many(self, xs, tol: float = MEMBERSHIP_TOL) -> np.ndarray:
        xs = np.atleast_2d(np.asarray(xs, dtype=float))
        return np.array([self.barycentric(x)[1] <= tol for x in xs], dtype=bool)

    def is_box(self) -> bool:
        h = self.hull
        if h.dim != self.dimension or self.dimension > 12:
            return False
        lo, hi = self.generators.min(axis=0), self.generators.max(axis=0)
        return bool(np.all(h.contains(bounding_corners(lo, hi), tol=1e-12)))

    def extreme_points(self) -> np.ndarray:
        return self.generators[self.hull.vertices]

    def diameter(self) -> float:
        pts = self.extreme_points()
        if len(pts) < 2:
            return 0.0
        diff = pts[:, None, :] - pts[None, :, :]
        return float(np.sqrt((diff ** 2).sum(-1)).max())

    def _check_dim(self, x):
        if np.shape(x)[-1] != self.dimension:
            raise DimensionMismatch(f"expected dimension {self.dimension}, got shape {np.shape(x)}")


def sample_body(body: ConvexBody, count: int, seed: int) -> np.ndarray:
    """``count`` random convex combinations of the generators (flat Dirichlet weights)."""
    if count < 1:
        raise ValueError("count must be at least 1")
    rng = np.random.default_rng(seed)
    m = len(body.generators)
    if m == 1:
        return np.repeat(body.generators, count, axis=0)
    w = rng.dirichlet(np.ones(m), size=count)
    return w @ body.generators


def lattice(body: ConvexBody, spacing: float, cap: int = DEFAULT_GRID_CAP) -> np.ndarray:
    """Regular lattice of the body in its intrinsic frame, plus its extreme points.

    The lattice spans the bounding box of the body's intrinsic coordinates,
    endpoints included, and is filtered by the facet test.
    """
    h = body.hull
    if h.dim == 0:
        return body.generators[:1].copy()
    if spacing <= 0:
        raise ValueError("spacing must be positive")
    counts = [int(math.ceil((hi - lo) / spacing)) + 1 for lo, hi in zip(h.lower, h.upper)]
    total = math.prod(counts)
    if total > cap:
        raise NetOverflow(cap, spacing)
    axes = [np.linspace(lo, hi, c) for lo, hi, c in zip(h.lower, h.upper, counts)]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, h.dim)
    if h.dim >= 2:
        viol = mesh @ h.equations[:, :-1].T + h.equations[:, -1]
        mesh = mesh[viol.max(axis=1) <= 1e-12]
    pts = h.to_ambient(mesh)
    return np.vstack([pts, body.extreme_points()])


def grid_spacing(body: ConvexBody, rho, epsilon: float, margin: float = DEFAULT_MARGIN) -> float:
    """Lattice spacing whose rho-dispersion over the body is at most ``margin * epsilon``.

    On an axis-aligned box every point is within half a cell of a lattice
    node; elsewhere a full cell is allowed for boundary cells.
    """
    h = body.hull
    lip = float(rho.weights @ np.abs(rho.matrix @ h.basis.T).sum(axis=1))
    if lip <= 0:
        return 1.0
    half = 0.5 if body.is_box() else 1.0
    return margin * epsilon / (lip * half)


def construction_grid(body, rho, epsilon, margin=DEFAULT_MARGIN, cap=DEFAULT_GRID_CAP) -> np.ndarray:
    if body.hull.dim == 0:
        return body.generators[:1].copy()
    return lattice(body, grid_spacing(body, rho, epsilon, margin), cap)


@dataclass(frozen=True)
class EpsNet:
    points: np.ndarray
    epsilon: float
    rho: object = field(repr=False)
    margin: float = DEFAULT_MARGIN
    grid_size: int = 0

    def __len__(self):
        return len(self.points)

    def distances(self, xs) -> np.ndarray:
        """rho-distance from each of ``xs`` to its nearest net point."""
        xs = np.atleast_2d(np.asarray(xs, dtype=float))
        px = self.rho.pairings(xs)
        pn = self.rho.pairings(self.points)
        out = np.full(len(xs), np.inf)
        for row in pn:
            np.minimum(out, np.abs(px - row) @ self.rho.weights, out=out)
        return out

    def covers(self, xs) -> np.ndarray:
        return self.distances(xs) < self.epsilon

    def to_csv(self, path) -> None:
        path = Path(path)
        with path.open("w", newline="") as fh:
            fh.write(f"# epsilon={self.epsilon:.17g} margin={self.margin:.17g} size={len(self)}\n")
            writer = csv.writer(fh)
            writer.writerow([f"x{i + 1}" for i in range(self.points.shape[1])])
            for p in self.points:
                writer.writerow([f"{v:.17g}" for v in p])


def build_eps_net(body: ConvexBody, rho, epsilon: float, grid=None, margin: float = DEFAULT_MARGIN,
                  cap: int = DEFAULT_NET_CAP, check_grid: bool = True) -> EpsNet:
    """Greedy farthest-point epsilon-net over a finite grid of body points.

    Selection starts at the grid point nearest (Euclidean) to the centroid
    of the body's extreme points and repeatedly adds the grid point
    farthest in rho from the current net, until every grid point lies
    within ``epsilon * (1 - margin)`` of some net point.  Ties go to the
    lowest grid index, so the result is a deterministic function of the
    inputs.  When ``grid`` is None a lattice with rho-dispersion at most
    ``margin * epsilon`` is generated.

    Raises
    ------
    NetOverflow
        If more than ``cap`` points are needed.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if not 0 <= margin < 1:
        raise ValueError("margin must lie in [0, 1)")
    if grid is None:
        grid = construction_grid(body, rho, epsilon, margin)
    grid = np.atleast_2d(np.asarray(grid, dtype=float))
    if grid.size == 0:
        raise EmptyInput("empty grid")
    if grid.shape[1] != body.dimension:
        raise DimensionMismatch("grid and body dimensions differ")
    if check_grid:
        viol = body.hull.violation(grid)
        if np.any(viol > MEMBERSHIP_TOL):
            raise ValueError(f"grid point {int(np.argmax(viol))} lies outside the body")

    threshold = epsilon * (1.0 - margin)
    proj = rho.pairings(grid)
    w = rho.weights
    centre = body.extreme_points().mean(axis=0)
    first = int(np.argmin(np.linalg.norm(grid - centre, axis=1)))
    chosen = [first]
    dist = np.abs(proj - proj[first]) @ w
    while True:
        j = int(np.argmax(dist))
        if dist[j] < threshold:
            break
        if len(chosen) >= cap:
            raise NetOverflow(cap, epsilon)
        chosen.append(j)
        np.minimum(dist, np.abs(proj - proj[j]) @ w, out=dist)
    pts = grid[chosen].copy()
    pts.setflags(write=False)
    return EpsNet(pts, float(epsilon), rho, float(margin), len(grid))
