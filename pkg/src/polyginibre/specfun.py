"""Special functions used throughout the package.

Generalized Laguerre and probabilists' Hermite polynomials by forward
recurrence, the normal CDF continued to complex arguments, the scaled
partial exponential sum ``E_k(x) e^{-x}`` through a log-domain regularized
incomplete gamma function, half-line Gaussian moments with a complex
endpoint, and the Bessel ratio ``J_1(2s)/s``.

All routines are pure functions of their arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special

MAX_DEGREE = 512
SQRT_2PI = math.sqrt(2.0 * math.pi)
_EPS = np.finfo(float).eps
_TINY = 1e-300


class CapacityError(ValueError):
    """Raised when a polynomial degree exceeds ``MAX_DEGREE``."""


def _check_degree(k: int) -> None:
    if k < 0:
        raise ValueError(f"degree must be nonnegative, got {k}")
    if k > MAX_DEGREE:
        raise CapacityError(f"degree {k} exceeds the configured maximum {MAX_DEGREE}")


# ---------------------------------------------------------------------------
# Orthogonal polynomials
# ---------------------------------------------------------------------------

def laguerre(k: int, alpha, x):
    """Generalized Laguerre polynomial ``L^alpha_k(x)``.

    ``alpha`` and ``x`` broadcast against each other. Evaluated with the
    three-term recurrence in the degree::

        (j+1) L_{j+1} = (2j + 1 + alpha - x) L_j - (j + alpha) L_{j-1}
    """
    _check_degree(k)
    alpha = np.asarray(alpha, dtype=float)
    x = np.asarray(x, dtype=float)
    prev = np.ones(np.broadcast(alpha, x).shape)
    if k == 0:
        return prev if prev.ndim else float(prev)
    cur = 1.0 + alpha - x + np.zeros_like(prev)
    for j in range(1, k):
        prev, cur = cur, ((2 * j + 1 + alpha - x) * cur - (j + alpha) * prev) / (j + 1)
    return cur if cur.ndim else float(cur)


def laguerre_coefficients(k: int, alpha: float) -> np.ndarray:
    """Monomial coefficients ``c_i`` with ``L^alpha_k(x) = sum_i c_i x^i``."""
    _check_degree(k)
    i = np.arange(k + 1)
    # binom(k + alpha, k - i) through log-gamma keeps non-integer alpha valid
    logb = (special.gammaln(k + alpha + 1) - special.gammaln(k - i + 1)
            - special.gammaln(alpha + i + 1))
    return (-1.0) ** i * np.exp(logb - special.gammaln(i + 1))


def hermite_prob(r: int, t):
    """Probabilists' Hermite polynomial ``H_r(t)`` (real or complex ``t``)."""
    _check_degree(r)
    t = np.asarray(t)
    if not np.iscomplexobj(t):
        t = t.astype(float)
    prev = np.ones_like(t)
    if r == 0:
        return prev if prev.ndim else prev[()]
    cur = t.copy()
    for j in range(1, r):
        prev, cur = cur, t * cur - j * prev
    return cur if cur.ndim else cur[()]


@lru_cache(maxsize=None)
def _hermite_int_coefficients(r: int) -> tuple:
    prev, cur = (1,), (0, 1)
    if r == 0:
        return prev
    for j in range(1, r):
        nxt = [0] * (j + 2)
        for i, c in enumerate(cur):
            nxt[i + 1] += c
        for i, c in enumerate(prev):
            nxt[i] -= j * c
        prev, cur = cur, tuple(nxt)
    return cur


def hermite_prob_coefficients(r: int) -> np.ndarray:
    """Monomial coefficients of ``H_r`` (lowest degree first), cached."""
    _check_degree(r)
    return np.array(_hermite_int_coefficients(r), dtype=float)


# ---------------------------------------------------------------------------
# Normal CDF
# ---------------------------------------------------------------------------

def normal_cdf(a):
    """``(2 pi)^{-1/2} int_{-inf}^a e^{-t^2/2} dt``, continued to complex ``a``.

    Real input goes through ``ndtr``. Complex input uses the Faddeeva function
    ``w`` on the half-plane where ``erfc(z) = e^{-z^2} w(iz)`` is stable, and
    the reflection ``Phi(a) = 1 - Phi(-a)`` elsewhere.
    """
    a = np.asarray(a)
    if not np.iscomplexobj(a):
        out = special.ndtr(a.astype(float))
        return out if out.ndim else float(out)
    left = a.real <= 0
    b = np.where(left, a, -a)
    # Re(-b) >= 0, so w(-i b / sqrt 2) is the well-conditioned branch
    half_erfc = 0.5 * np.exp(-0.5 * b * b) * special.wofz(-1j * b / math.sqrt(2.0))
    out = np.where(left, half_erfc, 1.0 - half_erfc)
    return out if out.ndim else complex(out)


# ---------------------------------------------------------------------------
# Partial exponential sums
# ---------------------------------------------------------------------------

def _log_gamma_p_series(a: float, x: float) -> float:
    # log P(a, x) for x < a + 1
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(100000):
        ap += 1.0
        term *= x / ap
        total += term
        if term < total * _EPS * 0.5:
            break
    return math.log(total) + a * math.log(x) - x - math.lgamma(a)


def _log_gamma_q_cf(a: float, x: float) -> float:
    # log Q(a, x) for x >= a + 1, modified Lentz
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, 100000):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return math.log(h) + a * math.log(x) - x - math.lgamma(a)


def _log_partial_pair(k: int, x: float) -> tuple[float, float]:
    """``(log E_k(x)e^{-x}, log(1 - E_k(x)e^{-x}))`` for ``x >= 0``."""
    if x < 0:
        raise ValueError(f"x must be nonnegative, got {x}")
    a = k + 1.0
    if x == 0.0:
        return 0.0, -math.inf
    if x < a + 1.0:
        logp = _log_gamma_p_series(a, x)
        return math.log1p(-math.exp(logp)), logp
    logq = _log_gamma_q_cf(a, x)
    return logq, math.log1p(-math.exp(logq))


def log_exp_partial_scaled(k: int, x: float) -> float:
    """``log(E_k(x) e^{-x})`` where ``E_k`` is the degree-``k`` Taylor polynomial of exp."""
    return _log_partial_pair(int(k), float(x))[0]


def log_exp_tail_scaled(k: int, x: float) -> float:
    """``log(1 - E_k(x) e^{-x})``, i.e. the log of the scaled Taylor remainder."""
    return _log_partial_pair(int(k), float(x))[1]


def exp_partial_scaled(k: int, x):
    """``E_k(x) e^{-x} = Q(k + 1, x)``, the regularized upper incomplete gamma.

    Series for ``x < k + 2``, continued fraction beyond; never summed naively.
    """
    if np.ndim(x) == 0:
        return math.exp(log_exp_partial_scaled(k, x))
    x = np.asarray(x, dtype=float)
    return np.exp(np.vectorize(lambda v: log_exp_partial_scaled(k, v))(x))


def log_exp_partial_complex(k: int, x: complex) -> complex:
    """Complex log of ``E_k(x) e^{-x}`` for ``|x| > k``.

    Sums the Taylor terms backward from ``j = k``; the ratios ``j/x`` have
    modulus below one so the sum converges geometrically with no cancellation.
    """
    x = complex(x)
    if abs(x) <= k:
        raise ValueError("backward summation needs |x| > k")
    logx = np.log(x)
    lead = k * logx - math.lgamma(k + 1) - x
    total, term = 1.0 + 0j, 1.0 + 0j
    for j in range(k, 0, -1):
        term *= j / x
        total += term
        if abs(term) < _EPS * abs(total) * 1e-2:
            break
    return complex(lead + np.log(total))


def log_exp_tail_complex(k: int, x: complex) -> complex:
    """Complex log of ``1 - E_k(x) e^{-x}`` for ``|x| < k + 1``."""
    x = complex(x)
    if abs(x) >= k + 1:
        raise ValueError("forward tail summation needs |x| < k + 1")
    if x == 0:
        return complex(-math.inf)
    logx = np.log(x)
    lead = (k + 1) * logx - math.lgamma(k + 2) - x
    total, term = 1.0 + 0j, 1.0 + 0j
    j = k + 1
    for _ in range(1000000):
        j += 1
        term *= x / j
        total += term
        if abs(term) < _EPS * abs(total) * 1e-2:
            break
    return complex(lead + np.log(total))


# ---------------------------------------------------------------------------
# Half-line Gaussian moments
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GaussMomentTable:
    """Moments ``M_k = int_{-inf}^{a} t^k e^{-t^2/2} dt`` for ``k = 0..K``."""

    endpoint: complex
    moments: np.ndarray

    def __len__(self) -> int:
        return len(self.moments)

    def contract(self, coeffs) -> complex:
        """``int_{-inf}^a p(t) e^{-t^2/2} dt`` for ``p`` given by monomial coefficients."""
        coeffs = np.asarray(coeffs)
        if len(coeffs) > len(self.moments):
            raise ValueError("polynomial degree exceeds the moment table")
        return complex(np.dot(coeffs, self.moments[: len(coeffs)]))


def gauss_halfline_moment(kmax: int, a) -> GaussMomentTable:
    """Build the moment table by integration by parts::

        M_0 = sqrt(2 pi) Phi(a),  M_1 = -e^{-a^2/2},
        M_k = -a^{k-1} e^{-a^2/2} + (k - 1) M_{k-2}
    """
    _check_degree(kmax)
    real = np.isrealobj(a) or complex(a).imag == 0.0
    a = float(np.real(a)) if real else complex(a)
    dtype = float if real else complex
    gauss = np.exp(-0.5 * a * a)
    m = np.empty(kmax + 1, dtype=dtype)
    m[0] = SQRT_2PI * normal_cdf(a)
    if kmax >= 1:
        m[1] = -gauss
    apow = a  # a^{k-1}
    for k in range(2, kmax + 1):
        m[k] = -apow * gauss + (k - 1) * m[k - 2]
        apow = apow * a
    return GaussMomentTable(endpoint=complex(a), moments=m)


# ---------------------------------------------------------------------------
# Bessel ratio
# ---------------------------------------------------------------------------

_J1_SERIES_CUTOFF = 8.0


def _j1_ratio_series(s: float) -> float:
    x = s * s
    term = 1.0
    total = 1.0
    i = 0
    while True:
        i += 1
        term *= -x / (i * (i + 1))
        total += term
        if abs(term) < 1e-17 * max(1.0, abs(total)) and i > x:
            return total


def bessel_j1_ratio(s):
    """``J_1(2s)/s``, equal to ``sum_i (-1)^i s^{2i} / (i!(i+1)!)``.

    The alternating series is used up to ``s = 8``; beyond it the value comes
    from ``scipy.special.j1``.
    """
    if np.ndim(s) == 0:
        s = abs(float(s))
        if s <= _J1_SERIES_CUTOFF:
            return _j1_ratio_series(s)
        return float(special.j1(2.0 * s) / s)
    s = np.abs(np.asarray(s, dtype=float))
    return np.array([bessel_j1_ratio(v) for v in s.ravel()]).reshape(s.shape)
