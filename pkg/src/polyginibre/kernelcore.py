"""Orthonormal basis and reproducing kernels of the polyanalytic polynomial spaces.

Every kernel is returned in correlation scaling

    Zh(z, w) = K(z, w) exp(-m (|z|^2 + |w|^2) / 2),

which stays O(m q) in size where the raw kernel overflows. Basis values are
assembled in the log domain before exponentiation for the same reason.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special

from . import quadrature
from .specfun import laguerre

ANALYTIC = "analytic"
ANTIANALYTIC = "antianalytic"


@dataclass(frozen=True)
class EnsembleParams:
    """Parameters of ``Pol_{m,n,q}``: weight scale ``m``, analytic degree bound ``n``, polyanalytic order ``q``."""

    m: float
    n: int
    q: int

    def __post_init__(self):
        if not self.m > 0 or self.m > 1e6:
            raise ValueError(f"m must lie in (0, 1e6], got {self.m}")
        if int(self.n) != self.n or int(self.q) != self.q or self.n < 1 or self.q < 1:
            raise ValueError(f"n and q must be positive integers, got n={self.n}, q={self.q}")
        if self.q > self.n:
            raise ValueError(f"q <= n is required, got q={self.q} > n={self.n}")
        if self.n * self.q > 100_000:
            raise ValueError(f"n*q must not exceed 1e5, got {self.n * self.q}")
        object.__setattr__(self, "m", float(self.m))
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "q", int(self.q))

    @property
    def dim(self) -> int:
        return self.n * self.q


@dataclass(frozen=True)
class ScaledComplex:
    """A complex number stored as ``exp(log_magnitude + i phase)``; zero has ``log_magnitude = -inf``."""

    log_magnitude: float
    phase: float = 0.0

    @classmethod
    def from_complex(cls, value: complex) -> "ScaledComplex":
        if value == 0:
            return cls(-math.inf, 0.0)
        return cls(math.log(abs(value)), math.atan2(complex(value).imag, complex(value).real))

    @staticmethod
    def _wrap(phase: float) -> float:
        p = math.remainder(phase, 2.0 * math.pi)
        return math.pi if p == -math.pi else p

    def __post_init__(self):
        object.__setattr__(self, "phase", 0.0 if self.is_zero else self._wrap(self.phase))

    @property
    def is_zero(self) -> bool:
        return self.log_magnitude == -math.inf

    def __mul__(self, other: "ScaledComplex") -> "ScaledComplex":
        return ScaledComplex(self.log_magnitude + other.log_magnitude, self.phase + other.phase)

    def __truediv__(self, other: "ScaledComplex") -> "ScaledComplex":
        if other.is_zero:
            raise ZeroDivisionError("division by a zero ScaledComplex")
        return ScaledComplex(self.log_magnitude - other.log_magnitude, self.phase - other.phase)

    def to_complex(self) -> complex:
        if self.is_zero:
            return 0j
        return complex(math.exp(self.log_magnitude) * complex(math.cos(self.phase), math.sin(self.phase)))


@dataclass(frozen=True)
class BasisIndex:
    """``(analytic, i, r)`` names ``e^1_{i,r}``; ``(antianalytic, j, k)`` names ``e^2_{j,k}``."""

    family: str
    i_or_j: int
    r_or_k: int

    @property
    def frequency(self) -> int:
        """Angular frequency: the basis function is ``rho(|z|) e^{i freq arg z}``."""
        return self.i_or_j if self.family == ANALYTIC else -self.r_or_k

    @property
    def level(self) -> int:
        """Landau level ``r`` of the pure polyanalytic component containing this function."""
        return self.r_or_k if self.family == ANALYTIC else self.i_or_j + self.r_or_k

    @property
    def degree(self) -> int:
        """Total degree in ``(z, zbar)``."""
        if self.family == ANALYTIC:
            return self.i_or_j + 2 * self.r_or_k
        return self.r_or_k + 2 * self.i_or_j

    def validate(self, params: EnsembleParams) -> None:
        a, b = self.i_or_j, self.r_or_k
        if self.family == ANALYTIC:
            ok = 0 <= b <= params.q - 1 and 0 <= a <= params.n - b - 1
        elif self.family == ANTIANALYTIC:
            ok = 1 <= b <= params.q - 1 and 0 <= a <= params.q - b - 1
        else:
            raise ValueError(f"unknown basis family {self.family!r}")
        if not ok:
            raise ValueError(f"basis index {self} is invalid for {params}")


class BasisLayout:
    """Vectorized description of all ``nq`` basis functions of ``Pol_{m,n,q}``.

    Functions are grouped in blocks sharing one Laguerre degree: the analytic
    blocks ``r = 0..q-1`` with ``alpha = i`` and the antianalytic blocks
    ``k = 1..q-1`` with ``alpha = k``.
    """

    def __init__(self, params: EnsembleParams):
        self.params = params
        m, n, q = params.m, params.n, params.q
        logm = math.log(m)
        blocks = []
        for r in range(q):
            i = np.arange(n - r)
            logc = 0.5 * (math.lgamma(r + 1) - special.gammaln(r + i + 1)) + 0.5 * (i + 1) * logm
            # Laguerre degree r, parameter i, power |z|^i, frequency +i
            blocks.append((ANALYTIC, r, i.astype(float), i, i, logc, np.full(len(i), r)))
        for k in range(1, q):
            j = np.arange(q - k)
            logc = 0.5 * (special.gammaln(j + 1) - special.gammaln(j + k + 1)) + 0.5 * (k + 1) * logm
            blocks.append((ANTIANALYTIC, k, None, j, np.full(len(j), -k), logc, j + k))
        self.blocks = blocks
        self.indices = []
        for fam, key, _, idx, _, _, _ in blocks:
            self.indices += [BasisIndex(fam, int(a), key) for a in idx]
        self.frequency = np.concatenate([b[4] for b in blocks])
        self.level = np.concatenate([b[6] for b in blocks])
        self.is_analytic = np.array([ix.family == ANALYTIC for ix in self.indices])
        self.size = len(self.indices)
        assert self.size == params.dim

    def radial(self, s) -> np.ndarray:
        """Real radial factors ``rho_a(s)`` (weight included), shape ``(len(s), nq)``."""
        s = np.atleast_1d(np.asarray(s, dtype=float))
        m = self.params.m
        x = m * s * s
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            logs = np.log(s)
            out = []
            for fam, key, alpha, idx, _, logc, _ in self.blocks:
                if fam == ANALYTIC:
                    # e^1_{i,r}: z^i L^i_r(m|z|^2)
                    lag = laguerre(key, alpha[None, :], x[:, None])
                    power = idx[None, :] * logs[:, None]
                else:
                    # e^2_{j,k}: zbar^k L^k_j(m|z|^2); degree j varies inside the block
                    lag = np.stack([laguerre(int(j), float(key), x) for j in idx], axis=1)
                    power = key * logs[:, None] + np.zeros(len(idx))[None, :]
                power = np.where(np.isnan(power), 0.0, power)
                if fam == ANALYTIC:
                    power[:, idx == 0] = 0.0
                logmag = logc[None, :] + power - 0.5 * x[:, None] + np.log(np.abs(lag))
                out.append(np.sign(lag) * np.exp(logmag))
        return np.concatenate(out, axis=1)

    def features(self, z) -> np.ndarray:
        """Weighted basis values ``phi_a(z) = e_a(z) e^{-m|z|^2/2}``, shape ``(len(z), nq)``."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        rho = self.radial(np.abs(z))
        theta = np.angle(z)
        return rho * np.exp(1j * theta[:, None] * self.frequency[None, :])


@lru_cache(maxsize=32)
def layout(params: EnsembleParams) -> BasisLayout:
    return BasisLayout(params)


def basis_indices(params: EnsembleParams) -> list[BasisIndex]:
    return list(layout(params).indices)


def basis_weighted(params: EnsembleParams, index: BasisIndex, z) -> complex:
    """Weighted basis function ``e(z) e^{-m|z|^2/2}`` for one index of ``Pol_{m,n,q}``."""
    index.validate(params)
    lay = layout(params)
    col = lay.indices.index(index)
    vals = lay.features(z)[:, col]
    return complex(vals[0]) if np.ndim(z) == 0 else vals


def _fsum_inner(a: np.ndarray, b: np.ndarray) -> complex:
    """``sum a_k conj(b_k)`` from real products, exactly rounded.

    Complex multiplication may be fused (FMA) differently for ``a conj(b)``
    and ``b conj(a)``; splitting into real products keeps the result exactly
    Hermitian in its two arguments.
    """
    ar, ai, br, bi = a.real, a.imag, b.real, b.imag
    re = math.fsum(np.concatenate([ar * br, ai * bi]))
    im = math.fsum(np.concatenate([ai * br, -(ar * bi)]))
    return complex(re, im)


def corr_kernel_poly(params: EnsembleParams, z, w):
    """Correlation kernel of ``Pol_{m,n,q}``.

    Scalar arguments are summed term by term with exact rounding (``math.fsum``),
    which makes the result exactly Hermitian. Array arguments of equal shape are
    evaluated pointwise through BLAS.
    """
    lay = layout(params)
    if np.ndim(z) == 0 and np.ndim(w) == 0:
        return _fsum_inner(lay.features(z)[0], lay.features(w)[0])
    z, w = np.broadcast_arrays(np.asarray(z, dtype=complex), np.asarray(w, dtype=complex))
    out = np.einsum("ij,ij->i", lay.features(z.ravel()), np.conj(lay.features(w.ravel())))
    return out.reshape(z.shape)


def corr_kernel_matrix(params: EnsembleParams, zs, ws=None) -> np.ndarray:
    """Matrix ``[Zh(z_i, w_j)]``; with ``ws`` omitted the result is exactly Hermitian."""
    lay = layout(params)
    fz = lay.features(np.ravel(zs))
    if ws is None:
        mat = fz @ fz.conj().T
        upper = np.triu(mat, 1)
        diag = np.sum(np.abs(fz) ** 2, axis=1)
        return upper + upper.conj().T + np.diag(diag)
    return fz @ lay.features(np.ravel(ws)).conj().T


def corr_diagonal(params: EnsembleParams, z) -> np.ndarray | float:
    """``Zh(z, z)``: a sum of nonnegative squares, evaluated in real arithmetic."""
    lay = layout(params)
    s = np.abs(np.asarray(z))
    rho = lay.radial(np.ravel(s))
    out = np.sum(rho * rho, axis=1).reshape(np.shape(s))
    return float(out) if np.ndim(out) == 0 else out


def corr_kernel_fock(m: float, q: int, z, w):
    """Correlation kernel of the full polyanalytic Fock space ``A^2_{m,q}``.

    ``m L^1_{q-1}(m|z-w|^2) e^{-m|z-w|^2/2} e^{i m Im(z wbar)}``, built from
    modulus and phase so that ``e^{m z wbar}`` is never formed.
    """
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    d = np.abs(z - w) ** 2
    mag = m * laguerre(q - 1, 1.0, m * d) * np.exp(-0.5 * m * d)
    out = mag * np.exp(1j * m * np.imag(z * np.conj(w)))
    return complex(out) if out.ndim == 0 else out


def corr_kernel_split(params: EnsembleParams, z, w):
    """``(Zh^I, Zh^II)``: analytic-side and antianalytic-side partial sums."""
    lay = layout(params)
    fz, fw = lay.features(z)[0], lay.features(w)[0]
    a = lay.is_analytic
    return _fsum_inner(fz[a], fw[a]), _fsum_inner(fz[~a], fw[~a])


def corr_subkernel_pure(params: EnsembleParams, r: int, z, w) -> complex:
    """Correlation kernel of the pure level ``r`` space ``Pol_{m,n,r+1} (-) Pol_{m,n,r}``."""
    if not 0 <= r <= params.q - 1:
        raise ValueError(f"level must satisfy 0 <= r <= q-1 = {params.q - 1}, got {r}")
    lay = layout(params)
    sel = lay.level == r
    return _fsum_inner(lay.features(z)[0][sel], lay.features(w)[0][sel])


# ---------------------------------------------------------------------------
# Gram matrix by quadrature
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadSpec:
    radius: float
    n_angles: int
    panel_width: float
    order: int = 16


@dataclass
class GramResult:
    matrix: np.ndarray
    quad: QuadSpec
    accuracy_warning: bool


def default_quad(params: EnsembleParams) -> QuadSpec:
    n, q, m = params.n, params.q, params.m
    radius = 2.0 * math.sqrt((n + q) / m) + 4.0 / math.sqrt(m)
    return QuadSpec(radius=radius, n_angles=2 * (n + q) + 1, panel_width=0.5 / math.sqrt(m))


def quad_is_sufficient(params: EnsembleParams, quad: QuadSpec) -> bool:
    n, q, m = params.n, params.q, params.m
    return quad.radius >= 2.0 * math.sqrt((n + q) / m) and quad.n_angles >= 2 * (n + q) + 1


def gram_matrix(params: EnsembleParams, quad: QuadSpec | None = None) -> GramResult:
    """Inner products ``<phi_a, phi_b>`` over the plane by tensor polar quadrature."""
    quad = quad or default_quad(params)
    warn = not quad_is_sufficient(params, quad)
    if warn:
        warnings.warn("quadrature does not cover the basis support; Gram entries may be inaccurate")
    pq = quadrature.polar_quadrature(quad.radius, quad.n_angles, quad.panel_width, quad.order)
    z, wts = pq.points()
    lay = layout(params)
    gram = np.zeros((lay.size, lay.size), dtype=complex)
    for start in range(0, len(z), 4096):
        f = lay.features(z[start:start + 4096])
        gram += (f * wts[start:start + 4096, None]).T @ f.conj()
    return GramResult(matrix=gram, quad=quad, accuracy_warning=warn)
