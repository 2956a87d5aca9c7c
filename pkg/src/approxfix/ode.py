"""Carathéodory initial value problems ``u' = f(t, u)``, ``u(0) = u0`` on R^d.

The state space is R^d with the Euclidean norm, and functions of time live
on a uniform grid.  The field is assumed to satisfy the growth bound
``||f(t, x)|| <= alpha(t) * phi(||x||)``, which confines every iterate of
the integral operator

    F(u)(t) = u0 + int_0^t f(s, u(s)) ds

to the tube ``||u(t)|| <= b(t)`` with ``b' = alpha * phi(b)``, ``b(0) = ||u0||``.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.integrate import cumulative_trapezoid, quad, trapezoid
from scipy.optimize import brentq

from .errors import BlowUp, Diverged, EstimateViolated, TubeViolation

BOUND_CAP = 1e12
TUBE_SLACK = 1e-3
LP_SLACK = 1e-6
DIVERGENCE_RUN = 5


@dataclass(frozen=True)
class OdeProblem:
    field_f: Callable
    alpha: Callable
    phi: Callable
    u0: np.ndarray
    T: float
    p_exponent: float = 2.0
    h: float | None = None
    label: str = ""

    def __post_init__(self):
        u0 = np.atleast_1d(np.asarray(self.u0, dtype=float)).copy()
        u0.setflags(write=False)
        object.__setattr__(self, "u0", u0)
        if not self.T > 0:
            raise ValueError("horizon T must be positive")
        if not 1.0 < self.p_exponent < math.inf:
            raise ValueError("p must lie in (1, inf)")
        h = self.T * 1e-3 if self.h is None else float(self.h)
        if not 0 < h <= self.T:
            raise ValueError("step h must lie in (0, T]")
        object.__setattr__(self, "h", h)

    @property
    def dimension(self) -> int:
        return self.u0.size

    @property
    def steps(self) -> int:
        return max(1, int(round(self.T / self.h)))

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(0.0, self.T, self.steps + 1)

    def f(self, t, u) -> np.ndarray:
        return np.atleast_1d(np.asarray(self.field_f(t, u), dtype=float))

    def alpha_nodes(self) -> np.ndarray:
        return np.array([float(self.alpha(t)) for t in self.grid])


@dataclass(frozen=True)
class GridFunction:
    values: np.ndarray
    grid: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim == 1:
            vals = vals[:, None]
        if len(vals) != len(self.grid):
            raise ValueError("values and grid lengths differ")
        if not np.all(np.isfinite(vals)):
            raise ValueError("grid function has non-finite entries")
        object.__setattr__(self, "values", vals)

    @classmethod
    def constant(cls, value, grid):
        value = np.atleast_1d(np.asarray(value, dtype=float))
        return cls(np.tile(value, (len(grid), 1)), grid)

    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.values, axis=1)

    def at_end(self) -> np.ndarray:
        return self.values[-1]


@dataclass(frozen=True)
class AprioriBound:
    values: np.ndarray
    grid: np.ndarray

    @property
    def sup_norm(self) -> float:
        return float(np.max(self.values))


def apriori_bound(problem: OdeProblem, cap: float = BOUND_CAP) -> AprioriBound:
    """Classical RK4 on ``b' = alpha(t) phi(b)``, ``b(0) = ||u0||``.

    Raises BlowUp once ``b`` passes ``cap`` or stops being finite.
    """
    t = problem.grid
    a, phi = problem.alpha, problem.phi
    b = np.empty_like(t)
    b[0] = np.linalg.norm(problem.u0)

    def rhs(s, y):
        return float(a(s)) * float(phi(y))

    for i in range(len(t) - 1):
        h = t[i + 1] - t[i]
        y, s = b[i], t[i]
        k1 = rhs(s, y)
        k2 = rhs(s + h / 2, y + h / 2 * k1)
        k3 = rhs(s + h / 2, y + h / 2 * k2)
        k4 = rhs(s + h, y + h * k3)
        b[i + 1] = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not (np.isfinite(b[i + 1]) and b[i + 1] <= cap):
            raise BlowUp(t[i + 1], b[i + 1])
    return AprioriBound(b, t)


def alpha_integral(problem: OdeProblem) -> np.ndarray:
    """Cumulative ``int_0^t alpha`` on the grid, Simpson's rule per step."""
    t = problem.grid
    a = problem.alpha
    steps = [(t[i + 1] - t[i]) / 6 * (a(t[i]) + 4 * a((t[i] + t[i + 1]) / 2) + a(t[i + 1]))
             for i in range(len(t) - 1)]
    return np.concatenate([[0.0], np.cumsum(steps)])


def j_integral(phi, lower: float, z: float) -> float:
    """``int_lower^z ds / phi(s)``."""
    val, _ = quad(lambda s: 1.0 / phi(s), lower, z, epsabs=1e-15, epsrel=1e-13, limit=200)
    return val


def apriori_bound_inverse(problem: OdeProblem, cap: float = BOUND_CAP) -> AprioriBound:
    """The same bound via ``b(t) = J^{-1}(int_0^t alpha)`` by root finding.

    Independent of :func:`apriori_bound`; used to cross-check it.
    """
    b0 = float(np.linalg.norm(problem.u0))
    targets = alpha_integral(problem)
    out = np.empty_like(targets)
    lo = b0
    for i, target in enumerate(targets):
        if target <= 0:
            out[i] = b0
            continue
        hi = max(lo, b0) + 1.0
        while j_integral(problem.phi, b0, hi) < target:
            hi = b0 + 2.0 * (hi - b0)
            if hi > cap:
                raise BlowUp(problem.grid[i], hi)
        lo = brentq(lambda z: j_integral(problem.phi, b0, z) - target, lo, hi, xtol=1e-15, rtol=1e-15)
        out[i] = lo
    return AprioriBound(out, problem.grid)


def osgood_check(problem: OdeProblem, cap: float = 1e12) -> dict:
    """Numerical check of ``int_0^T alpha < int_0^inf ds / phi``.

    The improper integral is evaluated on a logarithmic scale up to ``cap``
    and called divergent when its increments over the last decades have not
    started to shrink.
    """
    lhs = float(trapezoid(problem.alpha_nodes(), problem.grid))
    phi = problem.phi
    head = j_integral(phi, 0.0, 1.0)
    marks = np.logspace(0, math.log10(cap), 7)
    partial = [head]
    for a, b in zip(marks[:-1], marks[1:]):
        val, _ = quad(lambda x: math.exp(x) / phi(math.exp(x)), math.log(a), math.log(b),
                      epsabs=1e-14, epsrel=1e-12, limit=200)
        partial.append(partial[-1] + val)
    inc = np.diff(partial)
    divergent = bool(inc[-1] > 1e-9 and inc[-1] >= 0.5 * inc[-2])
    rhs = math.inf if divergent else float(partial[-1])
    return {"alpha_integral": lhs, "phi_integral": rhs, "divergent": divergent, "ok": lhs < rhs}


def audit_growth(problem: OdeProblem, bound: AprioriBound, samples: int = 64, seed: int = 0,
                 slack: float = TUBE_SLACK) -> float:
    """Largest ``||f(t, u)|| / (alpha(t) phi(||u||))`` over random tube points.

    A value above 1 means the growth bound fails somewhere in the tube.
    """
    rng = np.random.default_rng(seed)
    t = problem.grid
    nodes = np.unique(np.linspace(0, len(t) - 1, min(len(t), 21)).round().astype(int))
    d = problem.dimension
    worst = 0.0
    for i in nodes:
        radius = bound.values[i] * (1 + slack)
        dirs = rng.standard_normal((samples, d))
        dirs /= np.maximum(np.linalg.norm(dirs, axis=1, keepdims=True), 1e-300)
        pts = dirs * rng.uniform(0, radius, size=(samples, 1))
        pts = np.vstack([pts, problem.u0[None, :]])
        for u in pts:
            num = np.linalg.norm(problem.f(t[i], u))
            den = float(problem.alpha(t[i])) * float(problem.phi(np.linalg.norm(u)))
            if num == 0.0:
                continue
            worst = max(worst, math.inf if den <= 0 else num / den)
    return worst


def _tube_check(values, bound, slack):
    if bound is None:
        return
    norms = np.linalg.norm(values, axis=1)
    limit = bound.values * (1 + slack) + 1e-12
    over = np.nonzero(norms > limit)[0]
    if over.size:
        i = int(over[0])
        raise TubeViolation(i, float(norms[i]), float(bound.values[i]))


def apply_F(problem: OdeProblem, u: GridFunction, bound: AprioriBound | None = None,
            slack: float = TUBE_SLACK) -> GridFunction:
    """``u0 + int_0^t f(s, u(s)) ds`` by the composite trapezoid rule on the grid.

    With ``bound`` given, input and output are checked against the tube
    ``||u(t_i)|| <= b(t_i) (1 + slack)`` and TubeViolation is raised on exit.
    """
    t = problem.grid
    if len(u.values) != len(t):
        raise ValueError("grid function is not on the problem grid")
    _tube_check(u.values, bound, slack)
    rates = np.array([problem.f(ti, ui) for ti, ui in zip(t, u.values)])
    v = problem.u0 + cumulative_trapezoid(rates, t, axis=0, initial=0.0)
    _tube_check(v, bound, slack)
    return GridFunction(v, t)


@dataclass
class LimitingWeakSolution:
    u: GridFunction
    iterates: list
    uniform_residuals: np.ndarray
    weak_residuals: np.ndarray
    labels: tuple
    bound: AprioriBound
    tube_constant: float
    final_residual: float = math.nan

    def residual_rows(self):
        yield ["iterate", "uniform_residual"] + [f"weak_{lab}" for lab in self.labels]
        for k, (r, w) in enumerate(zip(self.uniform_residuals, self.weak_residuals)):
            yield [str(k), _fmt(r)] + [_fmt(v) for v in w]

    def solution_rows(self):
        d = self.u.values.shape[1]
        yield ["t"] + [f"u{i + 1}" for i in range(d)] + ["b"]
        for ti, ui, bi in zip(self.u.grid, self.u.values, self.bound.values):
            yield [_fmt(ti)] + [_fmt(v) for v in ui] + [_fmt(bi)]

    def to_csv(self, solution_path, residual_path) -> None:
        for path, rows in ((solution_path, self.solution_rows()), (residual_path, self.residual_rows())):
            with Path(path).open("w", newline="") as fh:
                csv.writer(fh, lineterminator="\n").writerows(rows)

    def as_dict(self):
        return {
            "u_T": self.u.at_end().tolist(),
            "uniform_residuals": self.uniform_residuals.tolist(),
            "weak_residuals": self.weak_residuals.tolist(),
            "functionals": list(self.labels),
            "bound_sup": self.bound.sup_norm,
            "tube_constant": self.tube_constant,
            "final_residual": self.final_residual,
        }

    def to_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.as_dict(), indent=2, sort_keys=True) + "\n")


def _fmt(v) -> str:
    return f"{float(v):.17g}"


def solve_limiting_weak(problem: OdeProblem, iterations: int, functionals, bound: AprioriBound | None = None,
                        slack: float = TUBE_SLACK) -> LimitingWeakSolution:
    """Picard iterates ``u_{k+1} = F(u_k)`` from the constant function ``u0``.

    Entry ``k`` of the residual records is measured on ``u_k``: the uniform
    residual ``max_t ||u_k - F(u_k)||`` and, for each functional, the weak
    residual ``max_t |<a_j, u_k - F(u_k)>|``.  The last iterate is returned
    as the solution candidate.

    Raises Diverged when the uniform residual grows five times in a row.
    """
    if iterations < 1:
        raise ValueError("iterations must be at least 1")
    funcs = list(functionals)
    mat = np.vstack([fn.coefficients for fn in funcs])
    if mat.shape[1] != problem.dimension or np.linalg.matrix_rank(mat) < problem.dimension:
        raise ValueError("functionals must separate points of the state space")
    if bound is None:
        bound = apriori_bound(problem)
    t = problem.grid
    u = GridFunction.constant(problem.u0, t)
    iterates = [u]
    uniform, weak = [], []
    excess = 0.0
    growth_run = 0
    for _ in range(iterations):
        fu = apply_F(problem, u, bound, slack)
        diff = u.values - fu.values
        uniform.append(float(np.linalg.norm(diff, axis=1).max()))
        weak.append(np.abs(diff @ mat.T).max(axis=0))
        if len(uniform) > 1 and uniform[-1] > uniform[-2]:
            growth_run += 1
            if growth_run >= DIVERGENCE_RUN:
                raise Diverged(uniform)
        else:
            growth_run = 0
        excess = max(excess, float(np.max(fu.norms() - bound.values)))
        u = fu
        iterates.append(u)
    final = float(np.linalg.norm(u.values - apply_F(problem, u).values, axis=1).max())
    labels = tuple(fn.label or f"f{i + 1}" for i, fn in enumerate(funcs))
    return LimitingWeakSolution(u, iterates, np.array(uniform), np.array(weak), labels, bound,
                                max(excess, 0.0) / problem.h, final)


@dataclass(frozen=True)
class LpReport:
    p: float
    norm_F: float
    norm_u: float
    norm_dF: float
    norm_du: float
    value_bound: float
    derivative_bound: float
    checks: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.checks.values())


def lp_norm(values, grid, p: float) -> float:
    """Discrete ``L_p`` norm of a vector-valued grid function (trapezoid rule)."""
    norms = np.linalg.norm(np.asarray(values, dtype=float).reshape(len(grid), -1), axis=1)
    return float(trapezoid(norms ** p, grid) ** (1.0 / p))


def lp_norm_cells(quotients, grid, p: float) -> float:
    """Discrete ``L_p`` norm of a piecewise-constant cell function."""
    norms = np.linalg.norm(np.asarray(quotients, dtype=float).reshape(len(grid) - 1, -1), axis=1)
    return float(np.sum(np.diff(grid) * norms ** p) ** (1.0 / p))


def verify_lp_estimates(problem: OdeProblem, u: GridFunction, bound: AprioriBound | None = None,
                        rel_slack: float = LP_SLACK, raise_on_failure: bool = True) -> LpReport:
    """Check the a priori ``L_p`` estimates for ``F(u)`` and ``u``.

    With ``B = ||b||_inf``, ``|I| = T`` and grid-quadrature norms::

        ||F(u)||_p, ||u||_p  <=  ||u0|| T^(1/p) + ||alpha||_1 phi(B) T^(1/p)
        ||dF(u)||_p, ||du||_p <=  phi(B) ||alpha||_p

    where ``d`` is the forward difference quotient.  Each inequality gets a
    relative slack ``rel_slack`` plus an ``h**2`` quadrature allowance.
    """
    if bound is None:
        bound = apriori_bound(problem)
    p = problem.p_exponent
    t = problem.grid
    T = problem.T
    fu = apply_F(problem, u)
    alpha = problem.alpha_nodes()
    phi_b = float(problem.phi(bound.sup_norm))
    a1 = float(trapezoid(np.abs(alpha), t))
    ap = float(trapezoid(np.abs(alpha) ** p, t) ** (1.0 / p))
    value_bound = (np.linalg.norm(problem.u0) + a1 * phi_b) * T ** (1.0 / p)
    deriv_bound = phi_b * ap
    dt = np.diff(t)[:, None]
    norms = {
        "norm_F": lp_norm(fu.values, t, p),
        "norm_u": lp_norm(u.values, t, p),
        "norm_dF": lp_norm_cells(np.diff(fu.values, axis=0) / dt, t, p),
        "norm_du": lp_norm_cells(np.diff(u.values, axis=0) / dt, t, p),
    }
    allow = rel_slack + problem.h ** 2
    checks = {
        "F_bound": norms["norm_F"] <= value_bound * (1 + allow),
        "u_bound": norms["norm_u"] <= value_bound * (1 + allow),
        "dF_bound": norms["norm_dF"] <= deriv_bound * (1 + allow),
        "du_bound": norms["norm_du"] <= deriv_bound * (1 + allow),
    }
    report = LpReport(p, value_bound=float(value_bound), derivative_bound=float(deriv_bound),
                      checks=checks, **norms)
    if raise_on_failure and not report.ok:
        failed = ", ".join(k for k, ok in checks.items() if not ok)
        raise EstimateViolated(f"{failed} (p={p:g})")
    return report
