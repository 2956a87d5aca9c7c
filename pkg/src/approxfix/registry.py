"""Named built-in self-maps and ODE fields with their parameters."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class Entry:
    name: str
    kind: str  # "map" or "field"
    summary: str
    params: dict
    build: Callable


def _vec(value, d, default):
    if value is None:
        value = default
    arr = np.asarray(value, dtype=float)
    return np.full(d, float(arr)) if arr.ndim == 0 else arr.reshape(d)


# maps --------------------------------------------------------------------

def _identity(params, d):
    return lambda x: np.array(x, dtype=float)


def _scaling(params, d):
    s = float(params.get("factor", 0.5))
    c = _vec(params.get("center"), d, 0.0)
    return lambda x: c + s * (x - c)


def _rotation(params, d):
    if d < 2:
        raise ValueError("rotation needs dimension >= 2")
    theta = np.deg2rad(float(params.get("angle", 90.0)))
    i, j = (int(k) for k in params.get("plane", (0, 1)))
    c = _vec(params.get("center"), d, 0.0)
    rot = np.eye(d)
    rot[i, i] = rot[j, j] = np.cos(theta)
    rot[i, j], rot[j, i] = -np.sin(theta), np.sin(theta)
    # exact quarter turns keep lattice points on the lattice
    rot = np.where(np.abs(rot) < 1e-15, 0.0, rot)
    return lambda x: c + rot @ (x - c)


def _shift_and_clip(params, d):
    shift = _vec(params.get("shift"), d, 0.3)
    lo = _vec(params.get("lower"), d, -1.0)
    hi = _vec(params.get("upper"), d, 1.0)
    return lambda x: np.clip(x + shift, lo, hi)


def _polynomial(params, d):
    coeffs = np.asarray(params.get("coefficients", (0.25, 0.0, 0.5)), dtype=float)
    return lambda x: np.polynomial.polynomial.polyval(np.asarray(x, dtype=float), coeffs)


# fields ------------------------------------------------------------------
# each builder returns (f(t, u), alpha(t), phi(s)) with ||f(t, u)|| <= alpha(t) phi(||u||)

def _zero(params, d):
    return (lambda t, u: np.zeros(d), lambda t: 0.0, lambda s: 1.0)


def _linear(params, d):
    a = np.asarray(params.get("matrix", np.eye(d) * float(params.get("rate", 1.0))), dtype=float).reshape(d, d)
    c = _vec(params.get("offset"), d, 0.0)
    k = max(float(np.linalg.norm(a, 2)), float(np.linalg.norm(c)))
    return (lambda t, u: a @ u + c, lambda t: k, lambda s: 1.0 + s)


def _rotation_field(params, d):
    if d != 2:
        raise ValueError("rotation field needs dimension 2")
    w = float(params.get("omega", 1.0))
    return (lambda t, u: w * np.array([-u[1], u[0]]), lambda t: abs(w), lambda s: 1.0 + s)


def _logistic(params, d):
    r = float(params.get("rate", 1.0))
    cap = float(params.get("capacity", 10.0))
    return (lambda t, u: r * u * (1.0 - u / cap), lambda t: abs(r), lambda s: (1.0 + s) * (1.0 + s / cap))


def _saturating(params, d):
    g = float(params.get("gain", 1.0))
    return (lambda t, u: g * u / (1.0 + np.linalg.norm(u)), lambda t: abs(g), lambda s: 1.0)


ENTRIES = (
    Entry("identity", "map", "x -> x", {}, _identity),
    Entry("scaling", "map", "x -> center + factor (x - center)",
          {"factor": "contraction factor in [0, 1] (0.5)", "center": "fixed point (origin)"}, _scaling),
    Entry("rotation", "map", "rotation by angle degrees in a coordinate plane",
          {"angle": "degrees (90)", "plane": "coordinate pair (0, 1)", "center": "rotation centre (origin)"},
          _rotation),
    Entry("shift-and-clip", "map", "x -> clip(x + shift, lower, upper)",
          {"shift": "translation (0.3 per axis)", "lower": "box lower corner (-1)", "upper": "box upper corner (1)"},
          _shift_and_clip),
    Entry("polynomial", "map", "componentwise x_i -> sum_k c_k x_i^k",
          {"coefficients": "c_0, c_1, ... ((0.25, 0, 0.5))"}, _polynomial),
    Entry("zero", "field", "f(t, u) = 0; alpha = 0, phi = 1", {}, _zero),
    Entry("linear", "field", "f(t, u) = A u + c; alpha = max(|A|, |c|), phi(s) = 1 + s",
          {"matrix": "d x d matrix (rate * I)", "rate": "scalar used when matrix is absent (1)",
           "offset": "constant term c (0)"}, _linear),
    Entry("rotation", "field", "planar rotation f(t, u) = omega (-u2, u1); alpha = |omega|, phi(s) = 1 + s",
          {"omega": "angular speed (1)"}, _rotation_field),
    Entry("logistic-growth", "field",
          "f(t, u) = r u (1 - u / K) componentwise; alpha = |r|, phi(s) = (1 + s)(1 + s / K)",
          {"rate": "r (1)", "capacity": "K (10)"}, _logistic),
    Entry("saturating", "field", "f(t, u) = g u / (1 + |u|); alpha = |g|, phi = 1",
          {"gain": "g (1)"}, _saturating),
)

MAPS = {e.name: e for e in ENTRIES if e.kind == "map"}
FIELDS = {e.name: e for e in ENTRIES if e.kind == "field"}


def build_map(name: str, params: dict, d: int):
    if name not in MAPS:
        raise KeyError(f"unknown map {name!r}; known: {', '.join(MAPS)}")
    return MAPS[name].build(params or {}, d)


def build_field(name: str, params: dict, d: int):
    if name not in FIELDS:
        raise KeyError(f"unknown field {name!r}; known: {', '.join(FIELDS)}")
    return FIELDS[name].build(params or {}, d)


def list_registry(pattern: str = "") -> list[Entry]:
    pattern = (pattern or "").lower()
    return [e for e in ENTRIES if pattern in e.name.lower()]


def describe(entries) -> str:
    lines = []
    for e in entries:
        lines.append(f"{e.kind:5s}  {e.name:16s} {e.summary}")
        for key, doc in e.params.items():
            lines.append(f"{'':23s}{key}: {doc}")
    return "\n".join(lines)
