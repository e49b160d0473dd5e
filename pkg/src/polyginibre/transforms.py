"""Finite-dimensional operator calculus: T_r, the Bargmann transform and poly-Bargmann kernels.

``T_{m,r} f = m^{-r/2} (r!)^{-1/2} e^{m|z|^2} d_z^r (f e^{-m|z|^2})`` is realized
on coefficients. Its action on the orthonormal monomials
``e_{j,m} = m^{(j+1)/2} z^j / sqrt(j!)`` is known in closed form:

* ``j >= r``: ``sqrt(m) sqrt(r!/j!) (sqrt(m) z)^{j-r} L^{j-r}_r(m|z|^2)``
* ``j <  r``: ``sqrt(m) (-1)^{r-j} sqrt(j!/r!) (sqrt(m) zbar)^{r-j} L^{r-j}_j(m|z|^2)``

A second, independent route applies ``T_{m,1}`` repeatedly to polynomials in
``z, zbar`` stored as coefficient arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import quadrature
from .kernelcore import EnsembleParams, corr_subkernel_pure
from .specfun import (
    SQRT_2PI,
    gauss_halfline_moment,
    hermite_prob,
    hermite_prob_coefficients,
    laguerre,
    laguerre_coefficients,
)

MONOMIAL_ANALYTIC = "monomial-analytic"
HERMITE_LINE = "hermite-line"
PURE_LEVEL = "pure-level-r"
POLYANALYTIC_MONOMIAL = "polyanalytic-monomial"
_TAGS = {MONOMIAL_ANALYTIC, HERMITE_LINE, PURE_LEVEL, POLYANALYTIC_MONOMIAL}
MAX_LEVEL = 64


@dataclass(frozen=True)
class CoefficientVector:
    """Expansion coefficients in one of the supported bases.

    For ``polyanalytic-monomial`` the coefficients form a 2-d array ``C[a, b]``
    multiplying ``z^a zbar^b``; every other tag stores a 1-d sequence indexed by
    the basis degree ``j``.
    """

    basis_tag: str
    coefficients: np.ndarray
    level: int | None = None

    def __post_init__(self):
        if self.basis_tag not in _TAGS:
            raise ValueError(f"unknown basis tag {self.basis_tag!r}")
        c = np.asarray(self.coefficients, dtype=complex)
        want = 2 if self.basis_tag == POLYANALYTIC_MONOMIAL else 1
        if c.ndim != want:
            raise ValueError(f"{self.basis_tag} coefficients must be {want}-dimensional")
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        object.__setattr__(self, "coefficients", c)

    def norm(self) -> float:
        return float(np.linalg.norm(self.coefficients))


# ---------------------------------------------------------------------------
# Closed-form images T_{m,r}[e_{j,m}]
# ---------------------------------------------------------------------------

def t_image(r: int, j: int, m: float, z, weighted: bool = False):
    """Pointwise value of ``T_{m,r}[e_{j,m}](z)``, optionally times ``e^{-m|z|^2/2}``."""
    z = np.asarray(z, dtype=complex)
    x = m * np.abs(z) ** 2
    if j >= r:
        p, lag, conj = j - r, laguerre(r, j - r, x), False
        logc = 0.5 * (math.lgamma(r + 1) - math.lgamma(j + 1))
        sign = 1.0
    else:
        p, lag, conj = r - j, laguerre(j, r - j, x), True
        logc = 0.5 * (math.lgamma(j + 1) - math.lgamma(r + 1))
        sign = (-1.0) ** (r - j)
    base = np.conj(z) if conj else z
    with np.errstate(divide="ignore", invalid="ignore"):
        logmag = logc + 0.5 * (p + 1) * math.log(m) + (p * np.log(np.abs(base)) if p else 0.0)
        if weighted:
            logmag = logmag - 0.5 * x
        phase = np.exp(1j * p * np.angle(base))
        out = sign * lag * np.exp(logmag) * phase
    return complex(out) if out.ndim == 0 else out


def t_image_polynomial(r: int, j: int, m: float = 1.0) -> np.ndarray:
    """Coefficient array ``C[a, b]`` of ``T_{m,r}[e_{j,m}]`` expanded in ``z^a zbar^b``."""
    size = max(j, r) + 1
    c = np.zeros((size, size), dtype=complex)
    if j >= r:
        p, deg, alpha = j - r, r, j - r
        pref = math.sqrt(m) * math.sqrt(math.factorial(r) / math.factorial(j)) * m ** (p / 2)
        for i, li in enumerate(laguerre_coefficients(deg, alpha)):
            c[p + i, i] += pref * li * m ** i
    else:
        p, deg, alpha = r - j, j, r - j
        pref = (math.sqrt(m) * (-1) ** (r - j) * math.sqrt(math.factorial(j) / math.factorial(r))
                * m ** (p / 2))
        for i, li in enumerate(laguerre_coefficients(deg, alpha)):
            c[i, p + i] += pref * li * m ** i
    return c


def polynomial_eval(coeffs: np.ndarray, z):
    """Evaluate ``sum C[a, b] z^a zbar^b``."""
    z = np.asarray(z, dtype=complex)
    a = np.arange(coeffs.shape[0])
    b = np.arange(coeffs.shape[1])
    zp = z[..., None] ** a
    zbp = np.conj(z)[..., None] ** b
    return np.einsum("...a,ab,...b->...", zp, coeffs, zbp)


def t1_apply_polynomial(coeffs: np.ndarray, m: float = 1.0) -> np.ndarray:
    """``T_{m,1}`` on a polynomial: ``m^{-1/2} (d_z f - m zbar f)``, exact on coefficients."""
    A, B = coeffs.shape
    out = np.zeros((A, B + 1), dtype=complex)
    a = np.arange(1, A)
    out[:-1, :-1] += a[:, None] * coeffs[1:, :]
    out[:, 1:] -= m * coeffs
    return out / math.sqrt(m)


def tr_apply_polynomial(coeffs: np.ndarray, r: int, m: float = 1.0) -> np.ndarray:
    """``T_{m,r} = (r!)^{-1/2} T_{m,1}^r`` on a polynomial."""
    out = np.asarray(coeffs, dtype=complex)
    for _ in range(r):
        out = t1_apply_polynomial(out, m)
    return out / math.sqrt(math.factorial(r))


@dataclass
class TOpResult:
    """Image of a monomial-analytic vector under ``T_{m,r}``."""

    r: int
    m: float
    input: CoefficientVector
    coefficients: CoefficientVector

    def evaluate(self, z, weighted: bool = False):
        """Pointwise value of ``T_{m,r} f`` (times ``e^{-m|z|^2/2}`` when ``weighted``)."""
        z = np.asarray(z, dtype=complex)
        total = np.zeros(z.shape, dtype=complex)
        for j, c in enumerate(self.input.coefficients):
            if c != 0:
                total = total + c * t_image(self.r, j, self.m, z, weighted)
        return complex(total) if total.ndim == 0 else total

    __call__ = evaluate


def t_op_apply(r: int, m: float, vec: CoefficientVector) -> TOpResult:
    """Apply ``T_{m,r}`` to ``f = sum_j c_j e_{j,m}``.

    The returned coefficients refer to the level-``r`` orthonormal basis made of
    ``e^1_{j-r,r}`` (``j >= r``) and ``e^2_{j,r-j}`` (``j < r``), so they differ
    from the input only by the signs ``(-1)^{r-j}``; the map is an isometry.
    """
    if vec.basis_tag != MONOMIAL_ANALYTIC:
        raise ValueError("t_op_apply expects a monomial-analytic coefficient vector")
    if not 0 <= r <= MAX_LEVEL:
        raise ValueError(f"level must lie in [0, {MAX_LEVEL}], got {r}")
    j = np.arange(len(vec.coefficients))
    signs = np.where(j < r, (-1.0) ** (r - j), 1.0)
    out = CoefficientVector(PURE_LEVEL, vec.coefficients * signs, level=r)
    return TOpResult(r=r, m=float(m), input=vec, coefficients=out)


# ---------------------------------------------------------------------------
# Bargmann transform
# ---------------------------------------------------------------------------

def hermite_function(j: int, t):
    """Normalized Hermite function ``(2pi)^{-1/4} (j!)^{-1/2} H_j(t) e^{-t^2/4}`` on the line."""
    t = np.asarray(t, dtype=float)
    return (hermite_prob(j, t) * np.exp(-0.25 * t * t)
            / ((2 * math.pi) ** 0.25 * math.sqrt(math.factorial(j))))


def bargmann_apply(vec: CoefficientVector) -> CoefficientVector:
    """Bargmann transform on Hermite-function coefficients: the diagonal relabeling to ``z^j/sqrt(j!)``."""
    if vec.basis_tag != HERMITE_LINE:
        raise ValueError("bargmann_apply expects a hermite-line coefficient vector")
    return CoefficientVector(MONOMIAL_ANALYTIC, vec.coefficients.copy())


def poly_bargmann_apply(r: int, vec: CoefficientVector) -> TOpResult:
    """``B_r = T_r o B`` on Hermite-function coefficients (``m = 1``)."""
    return t_op_apply(r, 1.0, bargmann_apply(vec))


# ---------------------------------------------------------------------------
# Poly-Bargmann reproducing kernels
# ---------------------------------------------------------------------------

def hermite_shift_coefficients(r: int, c: complex) -> np.ndarray:
    """Monomial coefficients in ``t`` of ``H_r(t + c)`` (Appell expansion)."""
    out = np.zeros(r + 1, dtype=complex)
    for k in range(r + 1):
        out[: k + 1] += math.comb(r, k) * c ** (r - k) * hermite_prob_coefficients(k)
    return out


MOMENT_ROUTE_MAX_DEGREE = 3


def _hermite_normalized(r: int, t: np.ndarray) -> np.ndarray:
    """``H_r(t) / sqrt(r!)`` by the normalized three-term recurrence (no factorial growth)."""
    prev, cur = np.zeros_like(t), np.ones_like(t)
    for k in range(r):
        prev, cur = cur, (t * cur - math.sqrt(k) * prev) / math.sqrt(k + 1)
    return cur


def _level_products(q: int, t1: np.ndarray, t2: np.ndarray) -> np.ndarray:
    """``sum_{r<q} H_r(t1) H_r(t2) / r!`` from the normalized recurrence."""
    p1, c1 = np.zeros_like(t1), np.ones_like(t1)
    p2, c2 = np.zeros_like(t2), np.ones_like(t2)
    total = c1 * c2
    for k in range(q - 1):
        p1, c1 = c1, (t1 * c1 - math.sqrt(k) * p1) / math.sqrt(k + 1)
        p2, c2 = c2, (t2 * c2 - math.sqrt(k) * p2) / math.sqrt(k + 1)
        total = total + c1 * c2
    return total


def _contour_integral(f, r: int, c1: complex, c2: complex, a: complex) -> complex:
    """Gauss-Legendre along the real axis up to ``Re a``, then the vertical leg up to ``a``."""
    lo = min(a.real, -max(abs(c1), abs(c2))) - 2.0 * math.sqrt(r + 1) - 14.0
    t, w = quadrature.graded_panels([lo, a.real], 0.5, order=20)
    total = np.sum(w * f(t.astype(complex)))
    if a.imag != 0:
        s, ws = quadrature.graded_panels(sorted([0.0, a.imag]), 0.5, order=20)
        sign = 1.0 if a.imag > 0 else -1.0
        total += sign * 1j * np.sum(ws * f(a.real + 1j * s))
    return complex(total)


def _halfline_by_contour(r: int, c1: complex, c2: complex, a: complex) -> complex:
    a = complex(a)

    def f(t):
        return _hermite_normalized(r, t + c1) * _hermite_normalized(r, t + c2) * np.exp(-0.5 * t * t)

    return _contour_integral(f, r, c1, c2, a) * math.factorial(r)


def level_sum_halfline(q: int, c1: complex, c2: complex, a: complex, table=None) -> complex:
    """``sum_{r<q} (1/r!) int_{-inf}^{a} H_r(t + c1) H_r(t + c2) e^{-t^2/2} dt``.

    One quadrature covers every level once the moment route is out of range.
    """
    if q - 1 <= MOMENT_ROUTE_MAX_DEGREE:
        if table is None:
            table = gauss_halfline_moment(2 * (q - 1), a)
        return complex(sum(hermite_product_halfline(r, c1, c2, a, table) / math.factorial(r) for r in range(q)))
    a, c1, c2 = complex(a), complex(c1), complex(c2)

    def f(t):
        return _level_products(q, t + c1, t + c2) * np.exp(-0.5 * t * t)

    return _contour_integral(f, q - 1, c1, c2, a)


def hermite_product_halfline(r: int, c1: complex, c2: complex, a: complex, table=None) -> complex:
    """``int_{-inf}^{a} H_r(t + c1) H_r(t + c2) e^{-t^2/2} dt``.

    Low degrees contract the Appell coefficients against the moment table,
    which is exact up to rounding; past ``MOMENT_ROUTE_MAX_DEGREE`` the
    alternating coefficients cancel badly and a contour quadrature of the
    normalized recurrence is used instead.
    """
    if r > MOMENT_ROUTE_MAX_DEGREE:
        return _halfline_by_contour(r, complex(c1), complex(c2), a)
    prod = np.convolve(hermite_shift_coefficients(r, c1), hermite_shift_coefficients(r, c2))
    if table is None:
        table = gauss_halfline_moment(2 * r, a)
    return table.contract(prod)


def poly_bargmann_kernel(r: int, xi: complex, eta: complex) -> complex:
    """Reproducing kernel of ``B_r[L^2(R_-)]``::

        e^{xi etabar} / (r! sqrt(2pi)) int_{-inf}^{-xi-etabar} H_r(t+xi-eta) H_r(t+etabar-xibar) e^{-t^2/2} dt
    """
    if not 0 <= r <= MAX_LEVEL:
        raise ValueError(f"level must lie in [0, {MAX_LEVEL}], got {r}")
    xi, eta = complex(xi), complex(eta)
    a = -xi - eta.conjugate()
    integral = hermite_product_halfline(r, xi - eta, eta.conjugate() - xi.conjugate(), a)
    return complex(np.exp(xi * eta.conjugate()) * integral / (math.factorial(r) * SQRT_2PI))


# ---------------------------------------------------------------------------
# Pure-level kernels from operator images
# ---------------------------------------------------------------------------

def pure_level_kernel_from_images(params: EnsembleParams, r: int, z, w) -> complex:
    """Correlation kernel of level ``r`` as ``sum_j T_{m,r}[e_{j,m}](z) conj(T_{m,r}[e_{j,m}](w))``, weights included."""
    total = 0j
    for j in range(params.n):
        total += t_image(r, j, params.m, z, True) * np.conj(t_image(r, j, params.m, w, True))
    return complex(total)


def pure_level_projection_check(params: EnsembleParams, r: int, points) -> float:
    """Max ``|corr_subkernel_pure - image Gram sum|`` over all pairs of sample points."""
    if not 0 <= r < params.q:
        raise ValueError(f"level must satisfy 0 <= r < q, got {r}")
    pts = np.ravel(np.asarray(points, dtype=complex))
    worst = 0.0
    for z in pts:
        for w in pts:
            a = corr_subkernel_pure(params, r, complex(z), complex(w))
            b = pure_level_kernel_from_images(params, r, complex(z), complex(w))
            worst = max(worst, abs(a - b))
    return worst

