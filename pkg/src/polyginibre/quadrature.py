"""Tensor polar quadrature: Gauss-Legendre panels in the radius, uniform angles.

Area weights are for the normalized measure ``dA = dx dy / pi``, so a polar
cell contributes ``2 s ds * (dtheta / 2pi)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np


@lru_cache(maxsize=64)
def _leggauss(order: int):
    return np.polynomial.legendre.leggauss(order)


def gauss_legendre_panels(a: float, b: float, n_panels: int, order: int = 16):
    """Nodes and weights of a composite Gauss-Legendre rule on ``[a, b]``."""
    if b <= a:
        return np.empty(0), np.empty(0)
    x, w = _leggauss(order)
    edges = np.linspace(a, b, n_panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def graded_panels(breaks, width: float, order: int = 16):
    """Composite rule over consecutive intervals in ``breaks`` with panels of about ``width``."""
    nodes, weights = [], []
    for a, b in zip(breaks[:-1], breaks[1:]):
        n_panels = max(1, int(np.ceil((b - a) / width)))
        x, w = gauss_legendre_panels(a, b, n_panels, order)
        nodes.append(x)
        weights.append(w)
    return np.concatenate(nodes), np.concatenate(weights)


@dataclass(frozen=True)
class PolarQuadrature:
    """Radial nodes/area weights (``2 s ds``) together with an angular node count."""

    radii: np.ndarray
    radial_weights: np.ndarray
    n_angles: int

    @property
    def radius(self) -> float:
        return float(self.radii.max()) if len(self.radii) else 0.0

    def angles(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.n_angles) / self.n_angles

    def points(self):
        """Flattened complex nodes and their ``dA`` weights."""
        theta = self.angles()
        z = (self.radii[:, None] * np.exp(1j * theta)[None, :]).ravel()
        w = np.repeat(self.radial_weights / self.n_angles, self.n_angles)
        return z, w


def polar_quadrature(radius: float, n_angles: int, panel_width: float,
                     order: int = 16, inner: float = 0.0) -> PolarQuadrature:
    s, w = gauss_legendre_panels(inner, radius, max(1, int(np.ceil((radius - inner) / panel_width))), order)
    return PolarQuadrature(radii=s, radial_weights=2.0 * s * w, n_angles=int(n_angles))


def disk_quadrature(center: complex, radius: float, n_radial: int = 48, n_angles: int = 96):
    """Points and ``dA`` weights for the disk ``|w - center| <= radius``."""
    q = polar_quadrature(radius, n_angles, radius / max(1, n_radial // 16), order=16)
    z, w = q.points()
    return center + z, w
