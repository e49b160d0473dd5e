"""Numerical checks of the limit laws: Szego expansions, kernel gaps, exterior behavior, boundary blow-up."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from . import quadrature
from .berezin import boundary_kernel_limit
from .kernelcore import EnsembleParams, corr_kernel_fock, corr_kernel_poly, layout
from .specfun import (
    log_exp_partial_complex,
    log_exp_partial_scaled,
    log_exp_tail_complex,
    log_exp_tail_scaled,
)


@dataclass
class VerificationReport:
    law: str
    grid: str
    observed_error: float
    tolerance: float
    rate_estimate: float | None = None
    passed: bool = False

    def __post_init__(self):
        self.observed_error = float(self.observed_error)
        self.tolerance = float(self.tolerance)
        self.passed = bool(self.observed_error <= self.tolerance)

    def to_dict(self) -> dict:
        return asdict(self)


REPORT_KEYS = ("law", "grid", "observed_error", "tolerance", "rate_estimate", "passed")


def reports_to_json(reports, indent: int | None = 2) -> str:
    return json.dumps([r.to_dict() for r in reports], indent=indent)


def fit_rate(ms, errors) -> float:
    """Magnitude of the least-squares slope of ``log error`` against ``log m``."""
    slope = np.polyfit(np.log(np.asarray(ms, dtype=float)), np.log(np.asarray(errors, dtype=float)), 1)[0]
    return float(-slope)


# ---------------------------------------------------------------------------
# Szego expansions
# ---------------------------------------------------------------------------

def szego_residual(k: int, l: int, zeta: complex) -> complex:
    """The ``eps`` in Szego's expansion of ``E_k(k zeta') / e^{k zeta'}`` with ``zeta' = l zeta / k``.

    For ``|zeta'| < 1`` the scaled remainder ``1 - E_k e^{-x}`` is compared with
    ``(2 pi k)^{-1/2} (zeta' e^{1-zeta'})^k zeta'/(1-zeta')``; for ``|zeta'| > 1`` the
    scaled partial sum is compared with the same expression with ``zeta'/(zeta'-1)``.
    Everything is done on logarithms, so ``k`` up to ``1e4`` is fine.
    """
    zp = complex(l) * complex(zeta) / k
    if zp == 0 or abs(zp * np.exp(1 - zp)) >= 1 or abs(abs(zp) - 1.0) < 1e-12:
        raise ValueError(f"zeta'={zp} lies outside |zeta e^(1-zeta)| < 1, |zeta| != 1")
    x = k * zp
    real = zp.imag == 0 and zp.real > 0
    log_core = k * (np.log(zp) + 1 - zp) - 0.5 * math.log(2 * math.pi * k)
    if abs(zp) < 1:
        log_val = log_exp_tail_scaled(k, x.real) if real else log_exp_tail_complex(k, x)
        log_model = log_core + np.log(zp / (1 - zp))
    else:
        log_val = log_exp_partial_scaled(k, x.real) if real else log_exp_partial_complex(k, x)
        log_model = log_core + np.log(zp / (zp - 1))
    return complex(np.exp(log_val - log_model) - 1.0)


# ---------------------------------------------------------------------------
# Kernel gap
# ---------------------------------------------------------------------------

def kernel_gap(params: EnsembleParams, z, w):
    """``|Zh_{m,n,q}(z, w) - Zh_{m,q}(z, w)|``."""
    if np.any(np.abs(np.asarray(z) * np.asarray(w)) >= 1):
        raise ValueError("kernel_gap requires |z w| < 1")
    poly = corr_kernel_poly(params, z, w)
    fock = corr_kernel_fock(params.m, params.q, z, w)
    out = np.abs(np.asarray(poly) - np.asarray(fock))
    return float(out) if out.ndim == 0 else out


def kernel_gap_grid(params: EnsembleParams, points) -> float:
    """Sup of the kernel gap over all pairs of ``points``."""
    pts = np.ravel(np.asarray(points, dtype=complex))
    lay = layout(params)
    f = lay.features(pts)
    poly = f @ f.conj().T
    fock = corr_kernel_fock(params.m, params.q, pts[:, None], pts[None, :])
    return float(np.max(np.abs(poly - fock)))


# ---------------------------------------------------------------------------
# Exterior point: angular-first integration
# ---------------------------------------------------------------------------

@dataclass
class _RadialIntegrand:
    radii: np.ndarray
    weights: np.ndarray  # 2 s ds
    n_angles: int


def _angular_values(params: EnsembleParams, z: complex, radii: np.ndarray, n_angles: int) -> np.ndarray:
    """``Zh(z, s e^{i theta_j})`` on a uniform angular grid, one row per radius.

    ``Zh(z, w) = sum_f c_f(s) e^{-i f theta}`` with ``c_f`` gathering the basis
    functions of angular frequency ``f``; an FFT evaluates the trigonometric
    polynomial at every grid angle.
    """
    lay = layout(params)
    freq = lay.frequency
    if n_angles < freq.max() - freq.min() + 1:
        raise ValueError("angular grid too coarse for the frequencies present")
    phi_z = lay.features(z)[0]
    rho = lay.radial(radii)
    coeffs = np.zeros((len(radii), n_angles), dtype=complex)
    np.add.at(coeffs.T, freq % n_angles, (rho * phi_z[None, :]).T)
    # sum_f c_f e^{-2 pi i f j / N} is exactly numpy's forward FFT
    return np.fft.fft(coeffs, axis=1)


def _exterior_radial(params: EnsembleParams, z: complex, inner: float = 0.0) -> _RadialIntegrand:
    m, n, q = params.m, params.n, params.q
    outer = max(2.0 * math.sqrt((n + q) / m) + 6.0 / math.sqrt(m), inner + 1e-9)
    width = 0.25 / math.sqrt(m)
    breaks = [inner, outer] if inner > 0 else [0.0, outer]
    s, w = quadrature.graded_panels(breaks, width, order=16)
    return _RadialIntegrand(s, 2.0 * s * w, 0)


def _default_angles(params: EnsembleParams, l: int = 0) -> int:
    return max(2 * (params.n + params.q) + 1, params.n + params.q + l + 1)


def exterior_moment(params: EnsembleParams, z: complex, l: int, n_angles: int | None = None) -> complex:
    """Principal value ``pv int w^{-l} berezin_density(z, w) dA(w)``.

    Angles are integrated first on a uniform grid that is exact for every
    Fourier mode of ``|Zh|^2 w^{-l}``; the angular averages are bounded near
    ``w = 0`` and the radial integral is done by Gauss-Legendre panels.
    """
    if abs(z) <= 1:
        raise ValueError("exterior_moment needs |z| > 1")
    n_angles = n_angles or _default_angles(params, l)
    rad = _exterior_radial(params, z)
    diag = float(np.sum(np.abs(layout(params).features(z)[0]) ** 2))
    theta = 2 * np.pi * np.arange(n_angles) / n_angles
    total = 0j
    for s in range(0, len(rad.radii), 512):
        radii = rad.radii[s:s + 512]
        vals = np.abs(_angular_values(params, z, radii, n_angles)) ** 2
        avg = vals @ np.exp(-1j * l * theta) / n_angles
        total += np.sum(rad.weights[s:s + 512] * radii ** (-l) * avg)
    return complex(total / diag)


def exterior_mass_outside(params: EnsembleParams, z: complex, rho: float, n_angles: int | None = None) -> float:
    """Berezin mass of ``z`` outside the disk ``|w| < rho``."""
    if abs(z) <= 1 or rho <= 1:
        raise ValueError("exterior_mass_outside needs |z| > 1 and rho > 1")
    n_angles = n_angles or _default_angles(params)
    rad = _exterior_radial(params, z, inner=rho)
    diag = float(np.sum(np.abs(layout(params).features(z)[0]) ** 2))
    total = 0.0
    for s in range(0, len(rad.radii), 512):
        vals = np.abs(_angular_values(params, z, rad.radii[s:s + 512], n_angles)) ** 2
        total += float(np.sum(rad.weights[s:s + 512] * vals.mean(axis=1)))
    return total / diag


def harmonic_moment(z: complex, l: int, n_nodes: int = 4096) -> complex:
    """``int w^{-l} d omega(w, z, exterior disk)`` with the Poisson kernel ``(|z|^2-1)/|z-e^{it}|^2``."""
    z = complex(z)
    if abs(z) <= 1:
        raise ValueError("harmonic_moment needs |z| > 1")
    t = 2 * np.pi * np.arange(n_nodes) / n_nodes
    w = np.exp(1j * t)
    poisson = (abs(z) ** 2 - 1) / np.abs(z - w) ** 2
    return complex(np.mean(poisson * w ** (-l)))


# ---------------------------------------------------------------------------
# Boundary blow-up
# ---------------------------------------------------------------------------

def blown_up_boundary_kernel(params: EnsembleParams, xi: complex, eta: complex) -> complex:
    """``m^{-1} e^{-m - sqrt(m)(xi + etabar)} K_{m,n,q}(1 + xi/sqrt m, 1 + eta/sqrt m)``.

    Computed from the correlation kernel; the exponent reduces to
    ``(|xi|^2 + |eta|^2)/2 - i sqrt(m) (Im xi - Im eta)``.
    """
    m = params.m
    rt = math.sqrt(m)
    xi, eta = complex(xi), complex(eta)
    zh = corr_kernel_poly(params, 1 + xi / rt, 1 + eta / rt)
    expo = 0.5 * (abs(xi) ** 2 + abs(eta) ** 2) - 1j * rt * (xi.imag - eta.imag)
    return complex(zh * np.exp(expo) / m)


def boundary_kernel_gap(params: EnsembleParams, xi: complex, eta: complex) -> float:
    """Distance between the blown-up boundary kernel and its poly-Bargmann limit."""
    if abs(xi) > 4 or abs(eta) > 4:
        raise ValueError("boundary_kernel_gap is defined for |xi|, |eta| <= 4")
    return abs(blown_up_boundary_kernel(params, xi, eta) - boundary_kernel_limit(params.q, xi, eta))
