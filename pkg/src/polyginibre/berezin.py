"""Berezin densities, their blow-ups, and the limiting local profiles."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import quadrature
from .kernelcore import EnsembleParams, corr_diagonal, layout
from .specfun import SQRT_2PI, bessel_j1_ratio, hermite_prob, laguerre
from .transforms import level_sum_halfline, poly_bargmann_kernel

INTERIOR, BOUNDARY, EXTERIOR = "interior", "boundary", "exterior"
_CHUNK = 4096


class DegenerateCenterError(ValueError):
    """The kernel diagonal vanishes at the chosen center."""


@dataclass(frozen=True)
class BlowupFrame:
    """Center ``z0`` with local coordinate ``xi = m^{1/2} (z - z0)``."""

    center: complex
    delta: float = 1e-9
    scale_exponent: float = 0.5

    def __post_init__(self):
        if self.scale_exponent != 0.5:
            raise ValueError("the blow-up scale exponent is fixed at 1/2")
        object.__setattr__(self, "center", complex(self.center))

    @property
    def kind(self) -> str:
        r = abs(self.center)
        if r < 1.0 - self.delta:
            return INTERIOR
        if r > 1.0 + self.delta:
            return EXTERIOR
        return BOUNDARY

    def to_plane(self, m: float, xi):
        return self.center + np.asarray(xi) / math.sqrt(m)


@dataclass(frozen=True)
class ProfileSample:
    xi: complex
    density: float
    limit_density: float

    @property
    def gap(self) -> float:
        return abs(self.density - self.limit_density)

    def row(self) -> tuple:
        return (self.xi.real, self.xi.imag, self.density, self.limit_density, self.gap)


PROFILE_COLUMNS = ("xi_re", "xi_im", "density", "limit_density", "gap")


def berezin_density(params: EnsembleParams, z: complex, w):
    """``|Zh(z, w)|^2 / Zh(z, z)``, equal to ``|K(z,w)|^2 e^{-m|w|^2} / K(z,z)``."""
    lay = layout(params)
    fz = lay.features(complex(z))[0]
    diag = float(np.sum(np.abs(fz) ** 2))
    if not diag > 0:
        raise DegenerateCenterError(f"kernel diagonal vanishes at z={z}")
    w_arr = np.atleast_1d(np.asarray(w, dtype=complex)).ravel()
    out = np.empty(len(w_arr))
    for s in range(0, len(w_arr), _CHUNK):
        kz = np.conj(lay.features(w_arr[s:s + _CHUNK])) @ fz
        out[s:s + _CHUNK] = np.abs(kz) ** 2 / diag
    return float(out[0]) if np.ndim(w) == 0 else out.reshape(np.shape(w))


def blowup_density(params: EnsembleParams, frame: BlowupFrame, xi):
    """``m^{-1} berezin_density(z0, z0 + m^{-1/2} xi)``."""
    return berezin_density(params, frame.center, frame.to_plane(params.m, xi)) / params.m


def interior_profile(q: int, xi):
    """Bulk limit ``q^{-1} L^1_{q-1}(|xi|^2)^2 e^{-|xi|^2}``."""
    x = np.abs(np.asarray(xi)) ** 2
    return laguerre(q - 1, 1.0, x) ** 2 * np.exp(-x) / q


def rescaled_interior_profile(q: int, xi_prime):
    """Bulk profile at the finer scale ``(mq)^{-1/2}``: ``q^{-2} L^1_{q-1}(|xi'|^2/q)^2 e^{-|xi'|^2/q}``."""
    return interior_profile(q, np.asarray(xi_prime) / math.sqrt(q)) / q


def bessel_profile(xi_prime):
    """``J_1(2|xi'|)^2 / |xi'|^2``, the ``q -> infinity`` limit of the rescaled bulk profile."""
    return bessel_j1_ratio(np.abs(xi_prime)) ** 2


def boundary_kernel_limit(q: int, xi: complex, eta: complex) -> complex:
    """Sum over levels ``r < q`` of the poly-Bargmann kernels at ``(xi, eta)``."""
    return complex(sum(poly_bargmann_kernel(r, xi, eta) for r in range(q)))


def _boundary_profile_scalar(q: int, xi: complex) -> float:
    total = level_sum_halfline(q, xi, -xi.conjugate(), -xi)
    return float(math.exp(-abs(xi) ** 2) * abs(total) ** 2 / (math.pi * q))


def boundary_profile(q: int, xi):
    """Blow-up Berezin density at a boundary point in the limit::

        e^{-|xi|^2} / (pi q) |sum_r (1/r!) int_{-inf}^{-xi} H_r(t+xi) H_r(t-xibar) e^{-t^2/2} dt|^2
    """
    if np.ndim(xi) == 0:
        return _boundary_profile_scalar(q, complex(xi))
    xi = np.asarray(xi, dtype=complex)
    return np.array([_boundary_profile_scalar(q, complex(v)) for v in xi.ravel()]).reshape(xi.shape)


def one_point_intensity_blowup(params: EnsembleParams, xi):
    """``U(xi) = Zh(z, z) / m`` at ``z = 1 + m^{-1/2} xi``."""
    z = 1.0 + np.asarray(xi, dtype=complex) / math.sqrt(params.m)
    return corr_diagonal(params, z) / params.m


def one_point_intensity_limit(q: int, xi):
    """``sum_{r<q} (r! sqrt(2pi))^{-1} int_{-inf}^{-2 Re xi} H_r(t)^2 e^{-t^2/2} dt``."""
    def one(v):
        a = -2.0 * float(np.real(v))
        return level_sum_halfline(q, 0.0, 0.0, a).real / SQRT_2PI
    if np.ndim(xi) == 0:
        return float(one(xi))
    xi = np.asarray(xi)
    return np.array([one(v) for v in xi.ravel()]).reshape(xi.shape)


def semicircle_intensity(q: int, s):
    """``(2q/pi) int_{-1}^{-s/sqrt q} sqrt(1 - tau^2) dtau``, clamped to ``[0, q]``."""
    upper = np.clip(-np.asarray(s, dtype=float) / math.sqrt(q), -1.0, 1.0)
    prim = 0.5 * (upper * np.sqrt(1.0 - upper ** 2) + np.arcsin(upper))
    out = np.clip((2.0 * q / math.pi) * (prim + math.pi / 4.0), 0.0, q)
    return float(out) if out.ndim == 0 else out


def christoffel_darboux_sum(q: int, x, y):
    """``sum_{r<q} H_r(x) H_r(y) / r!``."""
    x, y = np.asarray(x), np.asarray(y)
    total = np.zeros(np.broadcast(x, y).shape, dtype=np.result_type(x, y, float))
    for r in range(q):
        total = total + hermite_prob(r, x) * hermite_prob(r, y) / math.factorial(r)
    return total if total.ndim else total[()]


def christoffel_darboux_ratio(q: int, x, y, switch: float = 1e-6):
    """Closed ratio form of the Christoffel-Darboux sum; near the diagonal falls back to the sum."""
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    close = np.abs(x - y) < switch
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = ((hermite_prob(q, x) * hermite_prob(q - 1, y) - hermite_prob(q - 1, x) * hermite_prob(q, y))
                 / (math.factorial(q - 1) * (x - y)))
    out = np.where(close, christoffel_darboux_sum(q, x, y), ratio)
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# Profile comparisons
# ---------------------------------------------------------------------------

def limit_profile(q: int, frame: BlowupFrame, xi):
    kind = frame.kind
    if kind == INTERIOR:
        return interior_profile(q, xi)
    if kind == BOUNDARY:
        # boundary_profile is stated at z0 = 1; rotate xi into that frame
        u = frame.center / abs(frame.center)
        return boundary_profile(q, np.asarray(xi) / u)
    raise ValueError("no local limit profile for an exterior center")


def profile_samples(params: EnsembleParams, frame: BlowupFrame, xis) -> list[ProfileSample]:
    xis = np.ravel(np.asarray(xis, dtype=complex))
    dens = np.atleast_1d(blowup_density(params, frame, xis))
    lim = np.atleast_1d(limit_profile(params.q, frame, xis))
    return [ProfileSample(complex(x), float(d), float(l)) for x, d, l in zip(xis, dens, lim)]


def blowup_l1_gap(params: EnsembleParams, frame: BlowupFrame, radius: float = 4.0,
                  n_radial: int = 96, n_angles: int = 128) -> float:
    """``int_{|xi| <= radius} |blow-up density - limit profile| dA(xi)`` by polar quadrature."""
    xi, w = quadrature.disk_quadrature(0.0, radius, n_radial, n_angles)
    dens = blowup_density(params, frame, xi)
    lim = limit_profile(params.q, frame, xi)
    return float(np.sum(w * np.abs(dens - lim)))


def blowup_mass(params: EnsembleParams, frame: BlowupFrame, radius: float = 8.0,
                n_radial: int = 128, n_angles: int = 128) -> float:
    xi, w = quadrature.disk_quadrature(0.0, radius, n_radial, n_angles)
    return float(np.sum(w * blowup_density(params, frame, xi)))
