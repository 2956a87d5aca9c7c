"""Approximate fixed point sequences, level by level.

For each level ``n`` a ``1/n`` net of the body is built, the Schauder
projection ``P_n`` onto its hull is composed with the map, and a fixed
point ``u_n`` of ``P_n o f`` is computed.  Since ``u_n - f(u_n)`` is the
projection defect at ``f(u_n)``, ``rho(u_n - f(u_n)) < 1/n``.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .brouwer import FixedPointResult, solve_fixed_point
from .errors import ApproxFixError, MapLeavesHull, NotFound
from .schauder import SchauderProjection
from .seminorms import AdmissibleSeminorm, require_admissible
from .sets import DEFAULT_MARGIN, DEFAULT_NET_CAP, ConvexBody, build_eps_net, sample_body

log = logging.getLogger(__name__)

DEFAULT_LEVELS = (1, 2, 4, 8, 16, 32, 64)
SELF_MAP_TOL = 1e-6
WEAK_SLACK = 1.5
# absolute floor below which weak residuals count as round-off
WEAK_FLOOR = 1e-12


@dataclass(frozen=True)
class SelfMap:
    evaluator: Callable
    label: str = "map"
    iterate_power: int | None = None

    def __call__(self, x):
        return np.asarray(self.evaluator(np.asarray(x, dtype=float)), dtype=float)

    def power(self, x, m: int):
        for _ in range(m):
            x = self(x)
        return x


def audit_self_map(f, body: ConvexBody, samples: int = 1000, seed: int = 0) -> float:
    """Largest barycentric re-fit residual of ``f`` over random body points."""
    pts = np.vstack([body.generators, sample_body(body, samples, seed)])
    worst = 0.0
    for x in pts:
        worst = max(worst, body.barycentric(f(x))[1])
    return worst


def weak_residuals(rho: AdmissibleSeminorm, u, fu) -> np.ndarray:
    """Unweighted ``|<a_k, u - fu>|`` for every functional of ``rho``."""
    u = np.asarray(u, dtype=float)
    fu = np.asarray(fu, dtype=float)
    return np.abs(rho.pairings(u - fu))


@dataclass(frozen=True)
class AfpLevel:
    n: int
    epsilon: float
    u: np.ndarray
    fu: np.ndarray
    rho_residual: float
    weak_residuals: np.ndarray
    net_size: int
    grid_size: int
    body_fit: float
    solver: FixedPointResult = field(repr=False)
    net: object = field(default=None, repr=False)

    def as_dict(self):
        return {
            "n": self.n,
            "epsilon": self.epsilon,
            "u": self.u.tolist(),
            "f_u": self.fu.tolist(),
            "rho_residual": self.rho_residual,
            "weak_residuals": self.weak_residuals.tolist(),
            "net_size": self.net_size,
            "grid_size": self.grid_size,
            "body_fit_residual": self.body_fit,
            "solver": {
                "method": self.solver.method,
                "residual_norm": self.solver.residual_norm,
                "iterations": self.solver.iterations,
                "start_index": self.solver.start_index,
                "hull_residual": self.solver.hull_residual,
            },
        }


def weak_decay_violations(rows, slack: float = WEAK_SLACK, floor: float = WEAK_FLOOR):
    """Check a sequence of weak-residual vectors for decay.

    Returns a list of ``(functional, index, reason)`` tuples; empty means the
    last row is no larger than the first and no row exceeds ``slack`` times
    its predecessor (both up to ``floor``).
    """
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    bad = []
    if len(rows) == 0:
        return bad
    for k in range(rows.shape[1]):
        col = rows[:, k]
        if col[-1] > col[0] + floor:
            bad.append((k, len(col) - 1, "last exceeds first"))
        for i in range(1, len(col)):
            if col[i] > slack * col[i - 1] + floor:
                bad.append((k, i, f"exceeds {slack:g}x predecessor"))
    return bad


@dataclass
class AfpTrace:
    levels: list = field(default_factory=list)
    labels: tuple = ()
    map_label: str = ""

    def __len__(self):
        return len(self.levels)

    @property
    def last(self) -> AfpLevel:
        return self.levels[-1]

    def weak_matrix(self) -> np.ndarray:
        return np.array([lv.weak_residuals for lv in self.levels])

    def audit(self, slack: float = WEAK_SLACK, floor: float = WEAK_FLOOR) -> dict[str, bool]:
        contract = all(lv.rho_residual < 1.0 / lv.n + lv.solver.residual_norm + 1e-8 for lv in self.levels)
        in_body = all(lv.body_fit < 1e-8 for lv in self.levels)
        decay = not weak_decay_violations(self.weak_matrix(), slack, floor) if self.levels else True
        return {"residual_contract": contract, "points_in_body": in_body, "weak_decay": decay}

    def csv_rows(self):
        d = len(self.levels[0].u) if self.levels else 0
        header = (["n", "epsilon", "net_size", "rho_residual", "solver_residual", "solver_method"]
                  + [f"u{i + 1}" for i in range(d)]
                  + [f"weak_{lab}" for lab in self.labels])
        yield header
        for lv in self.levels:
            yield ([str(lv.n), _fmt(lv.epsilon), str(lv.net_size), _fmt(lv.rho_residual),
                    _fmt(lv.solver.residual_norm), lv.solver.method]
                   + [_fmt(v) for v in lv.u] + [_fmt(v) for v in lv.weak_residuals])

    def to_csv(self, path) -> None:
        with Path(path).open("w", newline="") as fh:
            csv.writer(fh, lineterminator="\n").writerows(self.csv_rows())

    def as_dict(self):
        return {"map": self.map_label, "functionals": list(self.labels),
                "levels": [lv.as_dict() for lv in self.levels], "audit": self.audit()}

    def to_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.as_dict(), indent=2, sort_keys=True) + "\n")


def _fmt(v) -> str:
    return f"{float(v):.17g}"


def run_afp(body: ConvexBody, rho: AdmissibleSeminorm, f: SelfMap, levels=DEFAULT_LEVELS, *,
            margin: float = DEFAULT_MARGIN, net_cap: int = DEFAULT_NET_CAP, tol: float | None = None,
            budget: int = 50_000, starts: int = 8, seed: int = 0, audit_samples: int = 1000) -> AfpTrace:
    """Build the approximate fixed point trace of ``f`` on ``body``.

    Raises AdmissibilityFailure if ``rho`` fails its audit on ``body`` and
    MapLeavesHull if ``f`` fails the self-map audit.  NetOverflow and
    NotConverged propagate with the levels completed so far attached as
    ``err.trace``.
    """
    levels = [int(n) for n in levels]
    if not levels or levels[0] < 1 or any(b <= a for a, b in zip(levels, levels[1:])):
        raise ValueError("levels must be positive and strictly increasing")
    if not isinstance(f, SelfMap):
        f = SelfMap(f)
    require_admissible(rho, body, seed=seed)
    worst = audit_self_map(f, body, audit_samples, seed)
    if worst >= SELF_MAP_TOL:
        raise MapLeavesHull(None, worst)

    trace = AfpTrace(labels=tuple(fn.label or f"f{i + 1}" for i, fn in enumerate(rho.functionals)),
                     map_label=f.label)
    for n in levels:
        eps = 1.0 / n
        try:
            net = build_eps_net(body, rho, eps, margin=margin, cap=net_cap)
            proj = SchauderProjection(net)
            result = solve_fixed_point(lambda z: proj(f(z)), net, tol=tol, budget=budget,
                                       seed=seed, starts=starts)
        except ApproxFixError as err:
            err.trace = trace
            raise
        u = result.point
        fu = f(u)
        level = AfpLevel(n, eps, u, fu, float(rho(u - fu)), weak_residuals(rho, u, fu),
                         len(net), net.grid_size, body.barycentric(u)[1], result, net)
        log.info("level %d: net %d, rho residual %.3e", n, len(net), level.rho_residual)
        trace.levels.append(level)
    return trace


def orbit_hull_chain(f, a, depth: int, samples: int, seed: int = 0) -> list[ConvexBody]:
    """Sampled chain of convex hulls ``A_0, ..., A_depth``.

    ``A_0`` is the hull of the truncated orbit ``a, f(a), ..., f^samples(a)``;
    ``A_{k+1}`` is the hull of the images of the generators of ``A_k``
    together with ``samples`` random points of ``A_k``.  Every image is kept
    as a generator, so ``f(sample of A_k)`` lies in ``A_{k+1}`` by
    construction.
    """
    if depth < 1:
        raise ValueError("depth must be at least 1")
    if samples < 1:
        raise ValueError("samples must be at least 1")
    if not isinstance(f, SelfMap):
        f = SelfMap(f)
    x = np.asarray(a, dtype=float)
    orbit = [x]
    for _ in range(samples):
        x = f(x)
        orbit.append(x)
    chain = [ConvexBody(_dedupe(orbit))]
    for k in range(depth):
        current = chain[-1]
        pts = np.vstack([current.generators, sample_body(current, samples, seed + k)])
        images = np.array([f(p) for p in pts])
        nxt = ConvexBody(_dedupe(images))
        assert all(nxt.contains(y) for y in images[: len(current.generators)])
        chain.append(nxt)
    return chain


def _dedupe(points):
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    _, idx = np.unique(pts, axis=0, return_index=True)
    return pts[np.sort(idx)]


def chain_report(chain) -> list[dict]:
    return [{"k": k, "generators": len(b.generators), "extreme_points": len(b.extreme_points()),
             "diameter": b.diameter()} for k, b in enumerate(chain)]


def extract_fixed_point(trace: AfpTrace, f: SelfMap, tol: float):
    """Return ``p = f^m(u_n)`` (or ``u_n``) from the last level if ``||f(p) - p|| <= tol``.

    Raises NotFound carrying the candidate and its residual otherwise.
    """
    if not len(trace):
        raise ValueError("empty trace")
    if not isinstance(f, SelfMap):
        f = SelfMap(f)
    p = trace.last.u.copy()
    if f.iterate_power:
        p = f.power(p, f.iterate_power)
    r = float(np.linalg.norm(f(p) - p))
    if r > tol:
        raise NotFound(p, r)
    return p
