"""Convex hull helpers in an intrinsic affine frame.

Points spanning a k-dimensional affine subspace of R^d are described by
k intrinsic coordinates.  The hull is then an interval (k = 1), a qhull
polytope (k >= 2) or a single point (k = 0).  The facet description gives a
fast membership test and a continuous radial retraction onto the hull; the
slower NNLS barycentric fit is kept for certificates.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import nnls
from scipy.spatial import ConvexHull, QhullError

RANK_TOL = 1e-10


class Hull:
    def __init__(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.shape[0] == 0:
            raise ValueError("hull of an empty point set")
        self.points = pts
        self.ambient_dim = pts.shape[1]
        origin = pts.mean(axis=0)
        centered = pts - origin
        scale = max(1.0, float(np.abs(centered).max(initial=0.0)))
        if pts.shape[0] > 1:
            _, s, vt = np.linalg.svd(centered, full_matrices=False)
            k = int(np.sum(s > RANK_TOL * scale * max(1.0, np.sqrt(pts.shape[0]))))
        else:
            k = 0
        if k == self.ambient_dim:
            basis = np.eye(k)
        else:
            basis = vt[:k] if k else np.zeros((0, self.ambient_dim))
        self.dim = k
        self.origin = origin
        self.basis = basis
        self.coords = centered @ basis.T

        self.equations = None
        if k == 0:
            self.vertices = np.array([0])
            self.lower = self.upper = np.zeros(0)
        elif k == 1:
            c = self.coords[:, 0]
            self.vertices = np.array(sorted({int(np.argmin(c)), int(np.argmax(c))}))
            self.lower, self.upper = c.min(keepdims=True), c.max(keepdims=True)
        else:
            try:
                qh = ConvexHull(self.coords)
            except QhullError:
                qh = ConvexHull(self.coords, qhull_options="QJ")
            self.vertices = np.sort(qh.vertices)
            self.equations = qh.equations
            self.lower, self.upper = self.coords.min(axis=0), self.coords.max(axis=0)
        self.center = self.coords[self.vertices].mean(axis=0)

    # coordinate maps ---------------------------------------------------
    def to_coords(self, x):
        return (np.asarray(x, dtype=float) - self.origin) @ self.basis.T

    def to_ambient(self, y):
        return np.asarray(y, dtype=float) @ self.basis + self.origin

    def off_plane(self, x):
        x = np.asarray(x, dtype=float)
        back = self.to_ambient(self.to_coords(x))
        return np.linalg.norm(x - back, axis=-1)

    # membership ---------------------------------------------------------
    def violation(self, x):
        """Largest constraint violation (0 inside); shape matches the batch."""
        x = np.asarray(x, dtype=float)
        y = self.to_coords(x)
        out = self.off_plane(x)
        if self.dim == 1:
            viol = np.maximum(self.lower[0] - y[..., 0], y[..., 0] - self.upper[0])
            out = np.maximum(out, np.maximum(viol, 0.0))
        elif self.dim >= 2:
            viol = y @ self.equations[:, :-1].T + self.equations[:, -1]
            out = np.maximum(out, np.maximum(viol.max(axis=-1), 0.0))
        return out

    def contains(self, x, tol: float = 1e-9):
        return self.violation(x) <= tol

    # retraction ---------------------------------------------------------
    def retract(self, y):
        """Radial retraction of intrinsic coordinates ``y`` onto the hull.

        Points inside are returned unchanged; points outside are pulled
        along the ray towards the vertex centroid.  The map is continuous.
        """
        y = np.asarray(y, dtype=float)
        if self.dim == 0:
            return np.zeros(0)
        c = self.center
        d = y - c
        if self.dim == 1:
            return np.clip(y, self.lower, self.upper)
        normals, offsets = self.equations[:, :-1], self.equations[:, -1]
        slack = -(normals @ c + offsets)  # > 0 for an interior centre
        rate = normals @ d
        pos = rate > 0
        if not np.any(pos):
            return y
        t = float(np.min(slack[pos] / rate[pos]))
        return y if t >= 1.0 else c + max(t, 0.0) * d

    # certificates -------------------------------------------------------
    def barycentric(self, x):
        """NNLS barycentric weights of ``x`` over the hull points and the fit residual."""
        return barycentric_fit(self.points, x)


def barycentric_fit(points, x):
    """Nonnegative weights ``w`` with ``sum w = 1`` and ``points.T @ w ~= x``.

    Returns ``(w, residual)`` where ``residual`` is the Euclidean norm of the
    augmented linear system misfit.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    x = np.asarray(x, dtype=float)
    a = np.vstack([pts.T, np.ones(pts.shape[0])])
    b = np.concatenate([x, [1.0]])
    w, res = nnls(a, b, maxiter=50 * a.shape[1])
    return w, float(res)


def bounding_corners(lower, upper):
    d = len(lower)
    idx = (np.arange(2 ** d)[:, None] >> np.arange(d)) & 1
    return np.where(idx, upper, lower)
