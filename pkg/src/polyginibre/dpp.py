"""Exact sampling of the polyanalytic Ginibre process and determinant identities.

The process is the projection DPP of rank ``nq`` with kernel ``Zh_{m,n,q}``.
Points are drawn sequentially: with ``phi(z)`` the vector of weighted basis
values and ``P_k`` the projection onto the span of the ``phi`` of the points
already placed, the next point has density ``|(1 - P_k) phi(z)|^2 / (nq - k)``.
It is sampled by rejection from the radial density ``Zh(z, z) / nq``.
"""

from __future__ import annotations

import json
import math
import os
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import quadrature
from .kernelcore import EnsembleParams, ScaledComplex, corr_diagonal, corr_kernel_matrix, layout

MAX_POINTS = 5000
STALL_LIMIT = 1_000_000
STALL_ACCEPTANCE = 1e-6


class SamplerStallError(RuntimeError):
    """Rejection sampling failed to accept a point for too many consecutive proposals."""


# ---------------------------------------------------------------------------
# Radial proposal
# ---------------------------------------------------------------------------

@dataclass
class RadialSampler:
    """Piecewise-constant envelope for the radial law of ``Zh(z, z) / nq``.

    Works in the area variable ``u = |z|^2``, in which the first-point density
    is ``Zh(sqrt u) / nq`` with respect to ``du dtheta / 2pi``. Each cell carries
    an envelope height ``c_j`` at least the density on the cell; a proposal
    drawn from the envelope is kept with probability ``density / c_j``, which
    the caller folds into its own acceptance test.
    """

    params: EnsembleParams
    edges: np.ndarray  # cell edges in u
    heights: np.ndarray  # envelope heights c_j
    cdf_grid: np.ndarray = field(repr=False)  # (radius, cumulative mass)

    @classmethod
    def build(cls, params: EnsembleParams, n_cells: int | None = None, margin: float = 0.02) -> "RadialSampler":
        m, n, q = params.m, params.n, params.q
        u_max = (2.0 * math.sqrt((n + q) / m) + 6.0 / math.sqrt(m)) ** 2
        if n_cells is None:
            # the density in u is at most m q / nq = m / n, so this keeps every cell mass below 1e-3
            n_cells = max(2000, math.ceil(1050.0 * u_max * m / n))
        edges = np.linspace(0.0, u_max, n_cells + 1)
        h = edges[1] - edges[0]
        x, w = np.polynomial.legendre.leggauss(8)
        probe = np.concatenate([[0.0], 0.5 * (x + 1.0), [1.0]])
        heights = np.empty(n_cells)
        mass = np.empty(n_cells)
        step = max(1, 2048 * 64 // params.dim)
        for a in range(0, n_cells, step):
            left = edges[a:min(a + step, n_cells)]
            dens = _diag_density(params, left[:, None] + h * probe[None, :])
            heights[a:a + len(left)] = (1.0 + margin) * dens.max(axis=1) + 1e-280  # floor clears subnormal ties
            # Gauss-Legendre cell masses for the reported CDF table
            mass[a:a + len(left)] = 0.5 * h * dens[:, 1:-1] @ w
        cdf = np.concatenate([[0.0], np.cumsum(mass)])
        table = np.column_stack([np.sqrt(edges), cdf])
        return cls(params=params, edges=edges, heights=heights, cdf_grid=table)

    @property
    def total_mass(self) -> float:
        return float(self.cdf_grid[-1, 1])

    def draw(self, rng: np.random.Generator, size: int):
        """Proposals ``z`` and their envelope ratios ``density(z) / c_j``."""
        h = self.edges[1] - self.edges[0]
        cum = np.cumsum(self.heights)
        cell = np.searchsorted(cum, rng.random(size) * cum[-1], side="right")
        cell = np.minimum(cell, len(self.heights) - 1)
        u = self.edges[cell] + h * rng.random(size)
        theta = 2.0 * np.pi * rng.random(size)
        z = np.sqrt(u) * np.exp(1j * theta)
        return z, cell


def _diag_density(params: EnsembleParams, u: np.ndarray) -> np.ndarray:
    return corr_diagonal(params, np.sqrt(u)) / params.dim


@lru_cache(maxsize=16)
def radial_sampler(params: EnsembleParams) -> RadialSampler:
    return RadialSampler.build(params)


# ---------------------------------------------------------------------------
# Configurations
# ---------------------------------------------------------------------------

@dataclass
class Configuration:
    points: np.ndarray
    params: EnsembleParams
    seed: int

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=complex)
        if len(self.points) != self.params.dim:
            raise ValueError(f"a configuration has exactly nq={self.params.dim} points, got {len(self.points)}")
        if not np.all(np.isfinite(self.points)):
            raise ValueError("configuration points must be finite")

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write("re,im\n")
            for p in self.points:
                fh.write(f"{p.real:.17g},{p.imag:.17g}\n")

    def metadata(self) -> dict:
        return {"m": self.params.m, "n": self.params.n, "q": self.params.q, "seed": int(self.seed)}

    def write(self, csv_path) -> str:
        """Write the points CSV and a ``.json`` metadata sidecar next to it."""
        self.to_csv(csv_path)
        meta_path = os.path.splitext(str(csv_path))[0] + ".json"
        with open(meta_path, "w") as fh:
            json.dump(self.metadata(), fh, indent=2, sort_keys=True)
        return meta_path

    @classmethod
    def read(cls, csv_path) -> "Configuration":
        meta_path = os.path.splitext(str(csv_path))[0] + ".json"
        with open(meta_path) as fh:
            meta = json.load(fh)
        data = np.loadtxt(csv_path, delimiter=",", skiprows=1, ndmin=2)
        params = EnsembleParams(meta["m"], meta["n"], meta["q"])
        return cls(data[:, 0] + 1j * data[:, 1], params, meta["seed"])


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based generator; distinct seeds give independent streams."""
    return np.random.Generator(np.random.Philox(int(seed) & 0xFFFFFFFFFFFFFFFF))


def sample_configuration(params: EnsembleParams, seed: int) -> Configuration:
    """Draw one exact sample of the ``nq``-point process, deterministic in ``seed``."""
    N = params.dim
    if N > MAX_POINTS:
        raise ValueError(f"nq={N} exceeds the sampler limit {MAX_POINTS}")
    rng = make_rng(seed)
    lay = layout(params)
    prop = radial_sampler(params)
    basis = np.zeros((N, N), dtype=complex)  # orthonormal rows spanning used directions
    points = np.empty(N, dtype=complex)
    for k in range(N):
        used = basis[:k]
        batch = int(min(1024, max(4, math.ceil(2.0 * N / (N - k)))))
        stalled = 0
        while True:
            z, cell = prop.draw(rng, batch)
            feats = lay.features(z)
            norms = np.sum(np.abs(feats) ** 2, axis=1)
            resid = feats - (feats @ used.conj().T) @ used if k else feats
            rnorm = np.sum(np.abs(resid) ** 2, axis=1)
            # density/envelope times the conditional-to-proposal ratio
            accept = (norms / N) / prop.heights[cell] * np.where(norms > 0, rnorm / np.where(norms > 0, norms, 1.0), 0.0)
            hit = np.flatnonzero(rng.random(batch) < accept)
            if hit.size:
                i = hit[0]
                stalled += i
                break
            stalled = stalled + batch if np.all(accept < STALL_ACCEPTANCE) else 0
            if stalled >= STALL_LIMIT:
                raise SamplerStallError(f"no acceptance in {stalled} proposals at point {k + 1}/{N}")
        v = resid[i]
        if k:
            v = v - (v @ used.conj().T) @ used  # second Gram-Schmidt pass
        basis[k] = v / np.linalg.norm(v)
        points[k] = z[i]
    return Configuration(points, params, seed)


# ---------------------------------------------------------------------------
# Intensities and determinants
# ---------------------------------------------------------------------------

def joint_intensity(params: EnsembleParams, points) -> float:
    """``det[Zh(z_i, z_j)]``, the k-point intensity at the given points."""
    pts = np.ravel(np.asarray(points, dtype=complex))
    if len(pts) < 1:
        raise ValueError("need at least one point")
    mat = corr_kernel_matrix(params, pts)
    return float(np.real(np.linalg.det(mat)))


def vandermonde_poly(points, n: int, q: int) -> ScaledComplex:
    """Polyanalytic Vandermonde determinant with rows ``zbar^s z^t`` (``s`` outer, ``t`` inner)."""
    pts = np.ravel(np.asarray(points, dtype=complex))
    if len(pts) != n * q:
        raise ValueError(f"need exactly nq={n * q} points, got {len(pts)}")
    s = np.repeat(np.arange(q), n)
    t = np.tile(np.arange(n), q)
    mat = np.conj(pts)[None, :] ** s[:, None] * pts[None, :] ** t[:, None]
    # row equilibration keeps LU away from overflow; scales re-enter as logs
    scale = np.max(np.abs(mat), axis=1)
    scale[scale == 0] = 1.0
    sign, logabs = np.linalg.slogdet(mat / scale[:, None])
    if sign == 0:
        return ScaledComplex(-math.inf, 0.0)
    return ScaledComplex(float(logabs + np.sum(np.log(scale))), float(np.angle(sign)))


def det_identity_ratio(params: EnsembleParams, points) -> float:
    """``log det[Zh(z_i,z_j)] - (2 log|Delta_q| - m sum |z_i|^2)``; independent of the configuration.

    Returns ``nan`` (with a warning) when either side is singular.
    """
    pts = np.ravel(np.asarray(points, dtype=complex))
    if len(pts) != params.dim:
        raise ValueError(f"need exactly nq={params.dim} points, got {len(pts)}")
    sign, logdet = np.linalg.slogdet(corr_kernel_matrix(params, pts))
    vdm = vandermonde_poly(pts, params.n, params.q)
    if sign == 0 or vdm.is_zero:
        warnings.warn("singular configuration: determinant identity ratio is indeterminate")
        return math.nan
    return float(logdet - (2.0 * vdm.log_magnitude - params.m * np.sum(np.abs(pts) ** 2)))


@dataclass
class IntensityResult:
    observed: np.ndarray
    expected: np.ndarray
    std_error: np.ndarray
    z_scores: np.ndarray
    runs: int


def _z_scores(counts: np.ndarray, expected: np.ndarray) -> IntensityResult:
    runs = counts.shape[0]
    obs = counts.mean(axis=0)
    se = counts.std(axis=0, ddof=1) / math.sqrt(runs)
    diff = obs - expected
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(se > 0, diff / se, np.where(np.abs(diff) < 1e-9, 0.0, np.inf))
    return IntensityResult(obs, expected, se, z, runs)


def _check_configs(configs) -> EnsembleParams:
    configs = list(configs)
    if len(configs) < 50:
        raise ValueError("empirical intensities need at least 50 configurations")
    params = configs[0].params
    if any(c.params != params for c in configs):
        raise ValueError("all configurations must share the same parameters")
    return params


def expected_annulus_count(params: EnsembleParams, r0: float, r1: float) -> float:
    """``int_{r0 <= |z| < r1} Zh(z, z) dA`` (radial, in the variable ``u = |z|^2``)."""
    width = 0.05 / params.m
    u, w = quadrature.graded_panels([r0 * r0, r1 * r1], max(width, (r1 * r1 - r0 * r0) / 400), order=16)
    return float(np.sum(w * corr_diagonal(params, np.sqrt(u))))


def empirical_intensity(configs, annuli) -> IntensityResult:
    """Mean point count per annulus against ``int_bin Zh(z,z) dA``, with z-scores."""
    params = _check_configs(configs)
    edges = np.asarray(annuli, dtype=float)
    if edges.ndim != 1 or len(edges) < 2 or np.any(np.diff(edges) <= 0) or edges[0] < 0:
        raise ValueError("annulus edges must be a strictly increasing sequence of radii >= 0")
    counts = np.array([np.histogram(np.abs(c.points), bins=edges)[0] for c in configs], dtype=float)
    expected = np.array([expected_annulus_count(params, a, b) for a, b in zip(edges[:-1], edges[1:])])
    return _z_scores(counts, expected)


def empirical_grid_intensity(configs, x_edges, y_edges, order: int = 24) -> IntensityResult:
    """Same as :func:`empirical_intensity` for rectangular bins; results are flattened row-major in x."""
    params = _check_configs(configs)
    xe, ye = np.asarray(x_edges, dtype=float), np.asarray(y_edges, dtype=float)
    for e in (xe, ye):
        if np.any(np.diff(e) <= 0):
            raise ValueError("bin edges must be strictly increasing")
    counts = np.array([np.histogram2d(c.points.real, c.points.imag, bins=[xe, ye])[0].ravel()
                       for c in configs], dtype=float)
    g, gw = np.polynomial.legendre.leggauss(order)
    expected = []
    for x0, x1 in zip(xe[:-1], xe[1:]):
        for y0, y1 in zip(ye[:-1], ye[1:]):
            xs = 0.5 * (x1 - x0) * (g + 1) + x0
            ys = 0.5 * (y1 - y0) * (g + 1) + y0
            Z = xs[:, None] + 1j * ys[None, :]
            W = np.outer(gw, gw) * 0.25 * (x1 - x0) * (y1 - y0) / math.pi
            expected.append(float(np.sum(W * corr_diagonal(params, Z))))
    return _z_scores(counts, np.array(expected))
