"""Quadrature rules on triangles, in barycentric coordinates.

Weights are normalized to sum to one, so a rule integrates over a triangle
``T`` as ``area(T) * sum(w_q * f(x_q))``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi, roots_legendre

__all__ = ["TriangleRule", "triangle_rule", "centroid_rule", "radon7", "collapsed_gauss"]


@dataclass(frozen=True)
class TriangleRule:
    barycentric: np.ndarray  # (Q, 3)
    weights: np.ndarray  # (Q,), sum 1
    degree: int

    def points(self, corners: np.ndarray) -> np.ndarray:
        """Physical points for triangles with corner coordinates ``(T, 3, 2)`` -> ``(T, Q, 2)``."""
        return np.einsum("qi,tid->tqd", self.barycentric, corners)

    def __len__(self):
        return len(self.weights)


def centroid_rule() -> TriangleRule:
    return TriangleRule(np.full((1, 3), 1.0 / 3.0), np.ones(1), 1)


@lru_cache(maxsize=None)
def radon7() -> TriangleRule:
    """Seven-point symmetric rule, exact for polynomials of degree 5."""
    s = math.sqrt(15.0)
    a1, a2 = (6.0 - s) / 21.0, (6.0 + s) / 21.0
    w1, w2 = (155.0 - s) / 1200.0, (155.0 + s) / 1200.0
    bary = [(1 / 3, 1 / 3, 1 / 3)]
    weights = [9.0 / 40.0]
    for a, w in ((a1, w1), (a2, w2)):
        b = 1.0 - 2.0 * a
        bary += [(b, a, a), (a, b, a), (a, a, b)]
        weights += [w] * 3
    return TriangleRule(np.array(bary), np.array(weights), 5)


@lru_cache(maxsize=None)
def collapsed_gauss(m: int) -> TriangleRule:
    """``m * m`` point conical product rule, exact for degree ``2m - 1``.

    Gauss-Jacobi in the collapsed direction absorbs the Duffy Jacobian.
    """
    t, wt = roots_jacobi(m, 1.0, 0.0)
    s, ws = roots_legendre(m)
    u = 0.5 * (1.0 + t)
    v = 0.5 * (1.0 + s)
    U, V = np.meshgrid(u, v, indexing="ij")
    W = np.outer(wt, ws)
    xi = U.ravel()
    eta = (V * (1.0 - U)).ravel()
    w = W.ravel()
    w = w / w.sum()
    bary = np.column_stack([1.0 - xi - eta, xi, eta])
    return TriangleRule(bary, w, 2 * m - 1)


def triangle_rule(degree: int = 5) -> TriangleRule:
    """Cheapest rule in this module exact for the requested polynomial degree."""
    if degree <= 1:
        return centroid_rule()
    if degree <= 5:
        return radon7()
    return collapsed_gauss(math.ceil((degree + 1) / 2))
