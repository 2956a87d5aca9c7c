"""Admissible functions built as weighted sums of absolute linear functionals.

A finite family of functionals ``x -> |<a_n, x>|`` is rescaled so that the
n-th term (1-based) never exceeds ``2**-(n+1)`` on the target body.  The sum
of the rescaled terms is the gauge ``rho`` used everywhere else in the
package: it is subadditive, absolutely homogeneous and, when the functionals
separate the body's generators, it separates points of the body.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import AdmissibilityFailure, DimensionMismatch, EmptyInput, SeparationFailure

log = logging.getLogger(__name__)

SEPARATION_TOL = 1e-10


@dataclass(frozen=True)
class LinearFunctional:
    coefficients: np.ndarray
    label: str = ""

    def __post_init__(self):
        coeffs = np.asarray(self.coefficients, dtype=float).ravel()
        if coeffs.size == 0 or not np.any(coeffs != 0.0):
            raise ValueError("a linear functional needs at least one nonzero coefficient")
        if not np.all(np.isfinite(coeffs)):
            raise ValueError("functional coefficients must be finite")
        coeffs.setflags(write=False)
        object.__setattr__(self, "coefficients", coeffs)

    @property
    def dimension(self) -> int:
        return self.coefficients.size

    def __call__(self, x):
        return np.asarray(x, dtype=float) @ self.coefficients


def coordinate_functionals(d: int) -> list[LinearFunctional]:
    return [LinearFunctional(np.eye(d)[i], f"e{i + 1}") for i in range(d)]


def default_functionals(d: int, count: int | None = None, seed: int = 0) -> list[LinearFunctional]:
    """Coordinate functionals followed by seeded random unit directions.

    ``count`` defaults to ``2 * d``.  The first ``min(count, d)`` entries are
    the coordinate functionals, so any ``count >= d`` family separates points
    of R^d.
    """
    count = 2 * d if count is None else int(count)
    if count < 1:
        raise EmptyInput("functional count must be positive")
    out = coordinate_functionals(d)[:count]
    rng = np.random.default_rng(seed)
    k = 1
    while len(out) < count:
        v = rng.standard_normal(d)
        norm = np.linalg.norm(v)
        if norm < 1e-12:
            continue
        out.append(LinearFunctional(v / norm, f"r{k}"))
        k += 1
    return out


@dataclass(frozen=True)
class AdmissibleSeminorm:
    """``rho(x) = sum_n c_n |<a_n, x>|`` over a finite functional family.

    Instances are immutable; evaluation is pure and accepts either a single
    vector of shape ``(d,)`` or a stack of vectors of shape ``(m, d)``.
    """

    functionals: tuple
    weights: np.ndarray
    body_diameter_bound: float = float("nan")
    matrix: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        funcs = tuple(self.functionals)
        if not funcs:
            raise EmptyInput("at least one functional is required")
        dims = {f.dimension for f in funcs}
        if len(dims) != 1:
            raise DimensionMismatch(f"functionals have mixed dimensions {sorted(dims)}")
        w = np.asarray(self.weights, dtype=float).ravel()
        if w.size != len(funcs):
            raise DimensionMismatch(f"{w.size} weights for {len(funcs)} functionals")
        if not np.all(np.isfinite(w)) or np.any(w <= 0.0):
            raise ValueError("weights must be strictly positive and finite")
        w.setflags(write=False)
        mat = np.vstack([f.coefficients for f in funcs])
        mat.setflags(write=False)
        object.__setattr__(self, "functionals", funcs)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "matrix", mat)

    @property
    def dimension(self) -> int:
        return self.matrix.shape[1]

    def pairings(self, x) -> np.ndarray:
        """Raw values ``<a_n, x>``; shape ``(k,)`` or ``(m, k)``."""
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dimension:
            raise DimensionMismatch(f"expected vectors of dimension {self.dimension}, got shape {x.shape}")
        return x @ self.matrix.T

    def __call__(self, x):
        vals = np.abs(self.pairings(x)) @ self.weights
        return float(vals) if np.ndim(vals) == 0 else vals

    @property
    def lipschitz_l1(self) -> float:
        """Bound ``L`` with ``rho(x) <= L * max_i |x_i|``."""
        return float(self.weights @ np.abs(self.matrix).sum(axis=1))


def evaluate(rho: AdmissibleSeminorm, x) -> float:
    return rho(x)


def _generators(body) -> np.ndarray:
    gens = getattr(body, "generators", body)
    gens = np.atleast_2d(np.asarray(gens, dtype=float))
    if gens.size == 0:
        raise EmptyInput("body has no generators")
    return gens


def check_separation(functionals, generators, tol: float = SEPARATION_TOL) -> None:
    """Raise SeparationFailure unless every pair of distinct generators is told apart.

    Generators closer than ``tol`` in the Euclidean norm count as the same
    point and are skipped.
    """
    gens = _generators(generators)
    mat = np.vstack([f.coefficients for f in functionals])
    vals = gens @ mat.T
    m = len(gens)
    for i in range(m - 1):
        diff_x = np.linalg.norm(gens[i + 1:] - gens[i], axis=1)
        diff_f = np.max(np.abs(vals[i + 1:] - vals[i]), axis=1)
        bad = np.nonzero((diff_x > tol) & (diff_f <= tol))[0]
        if bad.size:
            raise SeparationFailure(i, i + 1 + int(bad[0]))


def build_admissible(functionals, body, tol: float = SEPARATION_TOL) -> AdmissibleSeminorm:
    """Rescale ``functionals`` into an admissible seminorm for ``body``.

    The weight of the n-th functional (1-based) is ``2**-(n+1)`` divided by
    the largest ``|<a_n, g>|`` over the body's generators.  That maximum over
    the generators is the maximum over their convex hull, so the bound is
    exact rather than sampled.  A functional vanishing on every generator
    keeps weight ``2**-(n+1)`` and triggers a warning.

    Raises
    ------
    EmptyInput
        If either argument is empty.
    SeparationFailure
        If two distinct generators agree under every functional.
    """
    funcs = list(functionals)
    if not funcs:
        raise EmptyInput("no functionals given")
    gens = _generators(body)
    if gens.shape[1] != funcs[0].dimension:
        raise DimensionMismatch(f"functionals act on R^{funcs[0].dimension}, body lives in R^{gens.shape[1]}")
    check_separation(funcs, gens, tol)

    mat = np.vstack([f.coefficients for f in funcs])
    raw_max = np.max(np.abs(gens @ mat.T), axis=0)
    targets = 2.0 ** -(np.arange(1, len(funcs) + 1) + 1.0)
    weights = np.empty_like(targets)
    for n, (peak, target) in enumerate(zip(raw_max, targets)):
        if peak <= tol:
            warnings.warn(
                f"functional {funcs[n].label or n} vanishes on the body; using weight {target:g}",
                RuntimeWarning,
                stacklevel=2,
            )
            weights[n] = target
        else:
            weights[n] = target / peak
    # rho(x - y) <= rho(x) + rho(y) <= 2 * sum_n 2^-(n+1) on the body
    diameter = float(2.0 * np.sum(weights * raw_max))
    return AdmissibleSeminorm(tuple(funcs), weights, diameter)


def audit_admissible(rho: AdmissibleSeminorm, body, samples: int = 1000, seed: int = 0,
                     tol: float = 1e-12) -> dict[str, bool]:
    """Sampled check of the admissibility axioms on ``body``.

    Returns a mapping from check name to pass/fail.  Random vectors are drawn
    from a box slightly larger than the body's bounding box.
    """
    gens = _generators(body)
    rng = np.random.default_rng(seed)
    lo, hi = gens.min(axis=0), gens.max(axis=0)
    span = np.maximum(hi - lo, 1.0)
    x = rng.uniform(lo - span, hi + span, size=(samples, gens.shape[1]))
    y = rng.uniform(lo - span, hi + span, size=(samples, gens.shape[1]))
    lam = rng.uniform(-10.0, 10.0, size=samples)

    rx, ry = rho(x), rho(y)
    scale = np.maximum(1.0, rx + ry)
    sub = bool(np.all(rho(x + y) <= rx + ry + tol * scale))
    hom = bool(np.allclose(rho(lam[:, None] * x), np.abs(lam) * rx, rtol=tol, atol=tol))
    try:
        check_separation(rho.functionals, gens)
        sep = True
    except SeparationFailure:
        sep = False
    terms = np.abs(gens @ rho.matrix.T) * rho.weights
    targets = 2.0 ** -(np.arange(1, len(rho.weights) + 1) + 1.0)
    bound = bool(np.all(terms <= targets + tol))
    result = {"subadditivity": sub, "homogeneity": hom, "separation": sep, "rescaling_bound": bound}
    log.debug("admissibility audit: %s", result)
    return result


AXIOMS = ("subadditivity", "homogeneity", "separation")


def require_admissible(rho: AdmissibleSeminorm, body, **kwargs) -> dict[str, bool]:
    """Run :func:`audit_admissible` and raise if an axiom fails.

    The rescaling bound is reported but not enforced here, since a
    hand-weighted gauge such as ``|x|`` is admissible without it.
    """
    result = audit_admissible(rho, body, **kwargs)
    if not all(result[k] for k in AXIOMS):
        raise AdmissibilityFailure({k: result[k] for k in AXIOMS})
    return result
