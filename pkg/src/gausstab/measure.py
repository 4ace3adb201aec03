"""Weighted area measures e^f dA with the Gaussian weight as default."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class WeightSpec:
    """Ambient weight e^f with its first two derivatives.

    All callables are vectorized over point arrays of shape (n, d):
    ``f`` returns (n,), ``grad_f`` returns (n, d), ``hess_f`` returns
    (n, d, d) symmetric matrices.
    """

    f: Callable[[np.ndarray], np.ndarray]
    grad_f: Callable[[np.ndarray], np.ndarray]
    hess_f: Callable[[np.ndarray], np.ndarray]
    tag: str = "custom"

    def hess_quad(self, points, directions):
        """Hess_f evaluated as a quadratic form on unit directions."""
        H = self.hess_f(points)
        return np.einsum("nd,nde,ne->n", directions, H, directions)


def gaussian_weight() -> WeightSpec:
    """The Gaussian weight f = -|x|^2/4, grad f = -x/2, Hess f = -I/2."""

    def f(x):
        return -0.25 * np.einsum("nd,nd->n", x, x)

    def grad(x):
        return -0.5 * x

    def hess(x):
        d = x.shape[1]
        return np.broadcast_to(-0.5 * np.eye(d), (x.shape[0], d, d))

    return WeightSpec(f=f, grad_f=grad, hess_f=hess, tag="gaussian")


def custom_weight(f, grad_f, hess_f) -> WeightSpec:
    return WeightSpec(f=f, grad_f=grad_f, hess_f=hess_f, tag="custom")


def shifted_weight(weight: WeightSpec, c: float) -> WeightSpec:
    """Multiply the weight by the constant e^c (f -> f + c)."""
    return WeightSpec(
        f=lambda x: weight.f(x) + c,
        grad_f=weight.grad_f,
        hess_f=weight.hess_f,
        tag="custom",
    )


@dataclass(frozen=True)
class WeightedMeasure:
    """Per-vertex masses e^{f(x_v)} * vertex_area and their total."""

    vertex_weight: np.ndarray
    total: float


def weighted_measure(mesh, geom, weight) -> WeightedMeasure:
    w = np.exp(weight.f(mesh.vertices)) * geom.vertex_area
    return WeightedMeasure(vertex_weight=w, total=float(w.sum()))


def weighted_area(mesh, geom, weight) -> float:
    """Total weighted area, sum of e^{f(x_v)} * vertex_area."""
    if mesh.n_vertices == 0:
        return 0.0
    return weighted_measure(mesh, geom, weight).total


def mean_normal(mesh, geom, weight, phi) -> np.ndarray:
    """Weighted average normal N_phi = (int phi N dA_mu) / (int phi dA_mu).

    Defined as the zero vector when the denominator vanishes (phi = 0).
    """
    phi = np.asarray(phi, dtype=float)
    if np.any(phi < 0):
        raise ValueError("mean_normal requires phi >= 0")
    w = weighted_measure(mesh, geom, weight).vertex_weight * phi
    denom = w.sum()
    if denom == 0.0:
        return np.zeros(mesh.vertices.shape[1])
    return (w[:, None] * geom.normal).sum(axis=0) / denom


def radial_cutoff(mesh, R: float) -> np.ndarray:
    """Piecewise-linear cutoff of |x|: 1 inside R, 0 beyond 2R, slope 1/R."""
    if R <= 0:
        raise ValueError("cutoff radius must be > 0")
    r = np.linalg.norm(mesh.vertices, axis=1)
    return np.clip(2.0 - r / R, 0.0, 1.0)


def weighted_inner(u, v, measure: WeightedMeasure) -> float:
    return float(np.dot(measure.vertex_weight, np.asarray(u) * np.asarray(v)))


def project_mean_zero(u, measure: WeightedMeasure) -> np.ndarray:
    """Remove the weighted mean: the result pairs to zero with constants."""
    u = np.asarray(u, dtype=float)
    return u - np.dot(measure.vertex_weight, u) / measure.total
