"""Partition functions and the Schauder projection onto the hull of a net."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, UncoveredPoint
from .sets import EpsNet

UNDERFLOW = 1e-14


def partition_value(rho, epsilon: float, p, x) -> float:
    """``max(epsilon - rho(x - p), 0)``."""
    p = np.asarray(p, dtype=float)
    x = np.asarray(x, dtype=float)
    if p.shape != x.shape:
        raise DimensionMismatch(f"shapes {p.shape} and {x.shape} differ")
    return max(epsilon - rho(x - p), 0.0)


@dataclass(frozen=True)
class SchauderProjection:
    net: EpsNet

    def __post_init__(self):
        object.__setattr__(self, "_pairings", self.net.rho.pairings(self.net.points))

    @property
    def rho(self):
        return self.net.rho

    @property
    def epsilon(self) -> float:
        return self.net.epsilon

    def partition(self, x) -> np.ndarray:
        """Partition values of every net point at ``x``."""
        x = np.asarray(x, dtype=float)
        dist = np.abs(self._pairings - self.rho.pairings(x)) @ self.rho.weights
        return np.maximum(self.epsilon - dist, 0.0)

    def weights(self, x) -> np.ndarray:
        """Normalized partition values: the barycentric weights of ``project(x)``."""
        g = self.partition(x)
        total = float(g.sum())
        if not total >= UNDERFLOW:
            raise UncoveredPoint(np.asarray(x, dtype=float).copy(), total)
        return g / total

    def __call__(self, x) -> np.ndarray:
        return self.weights(x) @ self.net.points


def project(proj: SchauderProjection, x) -> np.ndarray:
    return proj(x)
