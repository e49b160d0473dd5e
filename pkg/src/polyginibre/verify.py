"""Verification suites: each law is checked numerically and summarized as a :class:`VerificationReport`.

Suites are plain functions ``suite(fast) -> list[VerificationReport]``; the
``fast`` flag trims ``m``-grids to at most 200 and shortens Monte Carlo runs.
"""

from __future__ import annotations

import math
import time

import numpy as np
from scipy.special import roots_genlaguerre

from . import dpp, quadrature
from .asymptotics import (
    VerificationReport,
    boundary_kernel_gap,
    exterior_mass_outside,
    exterior_moment,
    fit_rate,
    harmonic_moment,
    kernel_gap_grid,
    szego_residual,
)
from .berezin import (
    BlowupFrame,
    bessel_profile,
    blowup_l1_gap,
    boundary_profile,
    blowup_density,
    christoffel_darboux_ratio,
    christoffel_darboux_sum,
    one_point_intensity_blowup,
    one_point_intensity_limit,
    rescaled_interior_profile,
)
from .kernelcore import (
    EnsembleParams,
    corr_kernel_fock,
    corr_kernel_matrix,
    corr_kernel_poly,
    corr_kernel_split,
    gram_matrix,
)
from .specfun import (
    exp_partial_scaled,
    gauss_halfline_moment,
    laguerre,
    laguerre_coefficients,
    normal_cdf,
)
from .transforms import (
    MONOMIAL_ANALYTIC,
    CoefficientVector,
    polynomial_eval,
    poly_bargmann_kernel,
    pure_level_projection_check,
    t1_apply_polynomial,
    t_image_polynomial,
    t_op_apply,
)

SUITES = ("specfun", "kernels", "bulk", "boundary", "exterior", "dpp", "transforms")


def _rel(a, b) -> float:
    a, b = np.asarray(a), np.asarray(b)
    return float(np.max(np.abs(a - b) / np.maximum(1.0, np.abs(b))))


# ---------------------------------------------------------------------------
# Special functions
# ---------------------------------------------------------------------------

def laguerre_beta(k: int, alpha: float) -> float:
    """Upper bound for the zeros of ``L^alpha_k`` (``k >= 1``)."""
    return alpha + 2 * k - 2 + 2 * math.sqrt(0.25 + (k - 1) * (k + alpha - 1))


def laguerre_inequality_violations(seed: int = 0, n_alpha: int = 16, n_x: int = 100,
                                   k_max: int = 12, alpha_max: float = 15.0, x_max: float = 60.0) -> int:
    """Count failures of the elementary Laguerre estimates on a randomized grid.

    For every ``1 <= k <= k_max`` and random ``alpha`` the checks are
    ``|L| <= (x+alpha+k)^k/k!`` everywhere, ``(x-beta)^k/k! <= (-1)^k L <= x^k/k!``
    for ``x >= beta`` and ``|L| <= x^k/k!`` for ``x >= beta/2``.
    """
    rng = np.random.default_rng(seed)
    slack = 1e-12
    bad = 0
    for k in range(1, k_max + 1):
        fk = math.factorial(k)
        alphas = np.concatenate([[0.0, alpha_max], rng.uniform(0.0, alpha_max, n_alpha - 2)])
        for alpha in alphas:
            beta = laguerre_beta(k, alpha)
            x = np.sort(np.concatenate([rng.uniform(0.0, x_max, n_x // 2),
                                        rng.uniform(beta / 2, beta / 2 + x_max, n_x - n_x // 2)]))
            L = laguerre(k, alpha, x)
            upper = x ** k / fk
            bad += int(np.sum(np.abs(L) > (x + alpha + k) ** k / fk * (1 + slack)))
            hi = x >= beta
            signed = (-1) ** k * L[hi]
            bad += int(np.sum(signed > upper[hi] * (1 + slack) + 1e-300))
            bad += int(np.sum(signed < (x[hi] - beta) ** k / fk * (1 - slack)))
            mid = x >= beta / 2
            bad += int(np.sum(np.abs(L[mid]) > upper[mid] * (1 + slack)))
    return bad


def laguerre_root_violations(k_max: int = 10, alphas=(0.0, 0.5, 1.0, 3.0, 7.5, 15.0)) -> int:
    """Zeros of ``L^alpha_k`` outside ``]0, beta]``, plus sign-change count mismatches.

    For ``k = 1`` the single zero ``alpha + 1`` coincides with ``beta``, so the
    right end is closed (up to rounding).
    """
    bad = 0
    for k in range(1, k_max + 1):
        for alpha in alphas:
            beta = laguerre_beta(k, alpha)
            roots = roots_genlaguerre(k, alpha)[0]
            bad += int(np.sum((roots <= 0) | (roots > beta * (1 + 1e-12))))
            x = np.linspace(0.0, beta * (1 + 1e-6), 20001)
            s = np.sign(laguerre(k, alpha, x))
            bad += int(abs(np.count_nonzero(s[1:] * s[:-1] < 0) - k))
    return bad


def laguerre_definition_gap() -> float:
    """Recurrence evaluation against the explicit coefficient sum."""
    x = np.linspace(0.0, 50.0, 100)
    worst = 0.0
    for k in range(13):
        for alpha in np.linspace(0.0, 15.0, 16):
            ref = np.polynomial.polynomial.polyval(x, laguerre_coefficients(k, alpha))
            scale = np.maximum(1.0, np.abs(np.polynomial.polynomial.polyval(
                x, np.abs(laguerre_coefficients(k, alpha)))))
            worst = max(worst, float(np.max(np.abs(laguerre(k, alpha, x) - ref) / scale)))
    return worst


def berry_esseen_sup(n: int) -> float:
    """``sup_x |E_{n-1}(x) e^{-x} - Phi((n - x)/sqrt n)|``."""
    x = np.linspace(0.0, n + 12.0 * math.sqrt(n) + 20.0, 40001)
    return float(np.max(np.abs(exp_partial_scaled(n - 1, x) - normal_cdf((n - x) / math.sqrt(n)))))


def suite_specfun(fast: bool = False) -> list[VerificationReport]:
    out = []
    out.append(VerificationReport("laguerre recurrence vs definition", "k<=12, alpha<=15, x in [0,50]",
                                  laguerre_definition_gap(), 1e-10))
    out.append(VerificationReport("laguerre elementary estimates", "k<=12, alpha<=15, 100 x per pair",
                                  laguerre_inequality_violations(), 0))
    out.append(VerificationReport("laguerre zeros in ]0, beta]", "k<=10", laguerre_root_violations(), 0))
    x = np.linspace(0.0, 40.0, 201)
    out.append(VerificationReport("sum of L^0_r equals L^1_{q-1}", "q<=12",
                                  max(_rel(sum(laguerre(r, 0.0, x) for r in range(q)), laguerre(q - 1, 1.0, x))
                                      for q in range(1, 13)), 1e-12))
    worst = 0.0
    for alpha in (0.0, 1.5):
        for p in range(1, 7):
            for r in range(7):
                rhs = sum(math.comb(r - s + p - 1, p - 1) * laguerre(s, alpha, x) for s in range(r + 1))
                worst = max(worst, _rel(laguerre(r, alpha + p, x), rhs))
    out.append(VerificationReport("Laguerre order-raising sum", "r, p <= 6", worst, 1e-10))
    xs = np.linspace(0.0, 80.0, 161)
    vals = np.array([exp_partial_scaled(k, xs) for k in range(60)])
    mono = float(max(0.0, -np.min(np.diff(vals, axis=0)), np.max(vals) - 1.0, -np.min(vals)))
    out.append(VerificationReport("E_k(x)e^-x monotone in k, within [0,1]", "k<60, x<=80", mono, 1e-14))
    sups = []
    for n in (100, 400, 1600):
        s = berry_esseen_sup(n)
        sups.append(s)
        out.append(VerificationReport("partial exponential vs normal cdf", f"n={n}", s, 2 / math.sqrt(n)))
    out.append(VerificationReport("Berry-Esseen gap decreases in n", "n=100,400,1600",
                                  float(max(0.0, np.max(np.diff(sups)))), 0.0,
                                  rate_estimate=fit_rate([100, 400, 1600], sups)))
    worst = 0.0
    for a in (-1.3, 0.0, 0.7, 2.0 + 0.5j):
        M = gauss_halfline_moment(12, a).moments
        k = np.arange(2, 13)
        rec = -np.power(complex(a), k - 1) * np.exp(-complex(a) ** 2 / 2) + (k - 1) * M[k - 2]
        worst = max(worst, _rel(M[2:], rec))
    out.append(VerificationReport("half-line Gaussian moment recurrence", "k<=12", worst, 1e-12))
    return out


# ---------------------------------------------------------------------------
# Kernels
# ---------------------------------------------------------------------------

def disk_grid(radius: float = 0.7, res: int = 21) -> np.ndarray:
    """Points of the ``res x res`` square grid on ``[-radius, radius]^2`` that lie in the closed disk."""
    t = np.linspace(-radius, radius, res)
    z = (t[:, None] + 1j * t[None, :]).ravel()
    return z[np.abs(z) <= radius * (1 + 1e-12)]


def kernel_gap_reports(qs=(1, 2, 3), ms=(100, 200)) -> list[VerificationReport]:
    pts = disk_grid()
    out = []
    for q in qs:
        gaps = [kernel_gap_grid(EnsembleParams(m, m, q), pts) for m in ms]
        out.append(VerificationReport("kernel vs Fock kernel", f"m=n={ms[0]}, q={q}, 21x21 grid |z|<=0.7",
                                      gaps[0], 1e-4))
        out.append(VerificationReport("kernel gap halves when m doubles", f"m=n={ms[0]}->{ms[1]}, q={q}",
                                      gaps[1] / gaps[0] if gaps[0] > 0 else 0.0, 0.5,
                                      rate_estimate=fit_rate(ms, gaps) if gaps[1] > 0 else None))
    return out


def gram_report(m=4.0, n=6, q=3) -> VerificationReport:
    g = gram_matrix(EnsembleParams(m, n, q)).matrix
    return VerificationReport("orthonormal basis", f"m={m:g}, n={n}, q={q}",
                              float(np.max(np.abs(g - np.eye(len(g))))), 1e-6)


def szego_reports(fast: bool = False) -> list[VerificationReport]:
    ks = (250, 500, 1000) if fast else (500, 1000, 2000, 4000)
    zetas = (0.5, 0.8, 1.5, 3.0, 0.4 + 0.2j, 2.0 - 1.0j)
    out = []
    worst = [max(abs(szego_residual(k, k, z)) for z in zetas) for k in ks]
    rate = fit_rate(ks, worst)
    out.append(VerificationReport("Szego remainder expansion", f"k={ks[-1]}", worst[-1], 0.05, rate_estimate=rate))
    # the residual is O(1/k)
    out.append(VerificationReport("Szego residual decay rate", f"k in {list(ks)}", abs(rate - 1.0), 0.2,
                                  rate_estimate=rate))
    return out


def suite_kernels(fast: bool = False) -> list[VerificationReport]:
    out = [gram_report()]
    out += kernel_gap_reports()
    p = EnsembleParams(20.0, 12, 3)
    rng = np.random.default_rng(3)
    z = rng.normal(size=8) + 1j * rng.normal(size=8)
    z *= 0.9 / np.max(np.abs(z))
    worst_split = max(abs(sum(corr_kernel_split(p, a, b)) - corr_kernel_poly(p, a, b))
                      / max(1.0, abs(corr_kernel_poly(p, a, b))) for a in z for b in z)
    out.append(VerificationReport("analytic + antianalytic split", "m=20, n=12, q=3", worst_split, 1e-12))
    mat = corr_kernel_matrix(p, z)
    out.append(VerificationReport("kernel matrix Hermitian", "8 points", float(np.max(np.abs(mat - mat.conj().T))), 0.0))
    c = 0.7 - 1.1j
    chi = np.exp(1j * np.imag(c * z))
    gauge = mat * chi[:, None] * np.conj(chi)[None, :]
    out.append(VerificationReport("gauge invariance of joint intensity", "8 points",
                                  _rel(np.linalg.det(gauge).real, np.linalg.det(mat).real), 1e-12))
    out += szego_reports(fast)
    return out


# ---------------------------------------------------------------------------
# Bulk and boundary
# ---------------------------------------------------------------------------

def bulk_reports(m: float = 400.0, qs=(1, 2, 3), centers=(0.0, 0.4, 0.6j)) -> list[VerificationReport]:
    out = []
    for q in qs:
        params = EnsembleParams(m, int(m), q)
        for c in centers:
            gap = blowup_l1_gap(params, BlowupFrame(c))
            out.append(VerificationReport("bulk blow-up profile, L1 over |xi|<=4",
                                          f"m=n={m:g}, q={q}, z0={complex(c)}", gap, 0.05))
    return out


def bessel_gap(q: int = 64, radius: float = 3.0, n_points: int = 3001) -> float:
    s = np.linspace(0.0, radius, n_points)
    return float(np.max(np.abs(rescaled_interior_profile(q, s) - bessel_profile(s))))


def suite_bulk(fast: bool = False) -> list[VerificationReport]:
    out = bulk_reports(100.0 if fast else 400.0)
    out.append(VerificationReport("Bessel limit of rescaled bulk profile", "q=64, |xi'|<=3", bessel_gap(), 0.02))
    return out


def boundary_diag_reports(qs=(1, 2), ms=(100, 200, 400, 800), m_value=400) -> list[VerificationReport]:
    out = []
    for q in qs:
        gaps = [boundary_kernel_gap(EnsembleParams(m, m, q), 0.0, 0.0) for m in ms]
        if m_value in ms:
            out.append(VerificationReport("boundary kernel at xi=eta=0 vs q/2", f"m=n={m_value}, q={q}",
                                          gaps[ms.index(m_value)], 0.1))
        rate = fit_rate(ms, gaps)
        out.append(VerificationReport("boundary kernel gap decay exponent", f"m in {list(ms)}, q={q}",
                                      abs(rate - 0.5), 0.2, rate_estimate=rate))
    return out


def christoffel_darboux_gap(q: int = 8, n_pairs: int = 200, seed: int = 1) -> float:
    rng = np.random.default_rng(seed)
    x = rng.uniform(-3, 3, n_pairs)
    y = rng.uniform(-3, 3, n_pairs)
    y = np.where(np.abs(x - y) < 1e-3, y + 0.5, y)
    return _rel(christoffel_darboux_ratio(q, x, y), christoffel_darboux_sum(q, x, y))


def suite_boundary(fast: bool = False) -> list[VerificationReport]:
    ms = (50, 100, 200) if fast else (100, 200, 400, 800)
    out = boundary_diag_reports(ms=ms, m_value=200 if fast else 400)
    m = ms[-1]
    for q in (1, 2, 3):
        params = EnsembleParams(m, m, q)
        xi = np.array([0.0, 0.5, -0.5, 0.3 + 0.4j, 1.0 - 0.5j, -1.2j])
        dens = blowup_density(params, BlowupFrame(1.0), xi)
        lim = boundary_profile(q, xi)
        out.append(VerificationReport("boundary blow-up profile", f"m=n={m}, q={q}, |xi|<=1.3",
                                      float(np.max(np.abs(dens - lim))), 0.1 * q))
        s = np.linspace(-3.0, 3.0, 13)
        u = one_point_intensity_blowup(params, s)
        out.append(VerificationReport("one-point intensity near the edge", f"m=n={m}, q={q}",
                                      float(np.max(np.abs(u - one_point_intensity_limit(q, s)))), 0.1 * q))
    out.append(VerificationReport("Christoffel-Darboux sum vs ratio", "q=8, random x != y",
                                  christoffel_darboux_gap(), 1e-10))
    return out


# ---------------------------------------------------------------------------
# Exterior
# ---------------------------------------------------------------------------

def exterior_reports(m: float = 200.0, q: int = 2, z: complex = 1.3, rho: float = 1.1, lmax: int = 4):
    params = EnsembleParams(m, int(m), q)
    out = [VerificationReport("Berezin mass outside the disk", f"m=n={m:g}, q={q}, z={z}, rho={rho}",
                              exterior_mass_outside(params, z, rho), 0.05)]
    for l in range(lmax + 1):
        out.append(VerificationReport("exterior moment vs z^-l", f"m=n={m:g}, q={q}, z={z}, l={l}",
                                      abs(exterior_moment(params, z, l) - complex(z) ** (-l)), 0.05))
    out.append(VerificationReport("harmonic measure moments", f"z={z}, l<={lmax}",
                                  max(abs(harmonic_moment(z, l) - complex(z) ** (-l)) for l in range(lmax + 1)),
                                  1e-10))
    return out


def suite_exterior(fast: bool = False) -> list[VerificationReport]:
    out = exterior_reports(200.0)
    ms = (50, 100, 200)
    masses = [exterior_mass_outside(EnsembleParams(m, m, 2), 1.3, 1.1) for m in ms]
    out.append(VerificationReport("outside mass decreases in m", f"m in {list(ms)}",
                                  float(max(0.0, np.max(np.diff(masses)))), 0.0))
    return out


# ---------------------------------------------------------------------------
# DPP
# ---------------------------------------------------------------------------

def count_report(trials: int = 10_000, params=EnsembleParams(5, 5, 2)) -> VerificationReport:
    bad = sum(len(dpp.sample_configuration(params, s).points) != params.dim for s in range(trials))
    return VerificationReport("every sample has nq points", f"{trials} samples, m=n={params.n:g}, q={params.q}",
                              bad, 0)


def grid_intensity_report(runs: int = 2000, seed0: int = 10_000) -> VerificationReport:
    params = EnsembleParams(2, 2, 1)
    configs = [dpp.sample_configuration(params, seed0 + s) for s in range(runs)]
    edges = [-1.5, -0.5, 0.5, 1.5]
    res = dpp.empirical_grid_intensity(configs, edges, edges)
    return VerificationReport("empirical intensity z-scores, 3x3 grid", f"{runs} samples, m=n=2, q=1",
                              float(np.max(np.abs(res.z_scores))), 4.0)


def timing_report(params=EnsembleParams(61, 61, 3), budget: float = 30.0) -> VerificationReport:
    t0 = time.perf_counter()
    dpp.sample_configuration(params, 1)
    return VerificationReport("sampling time (s)", f"m=n={params.n}, q={params.q}", time.perf_counter() - t0, budget)


def det_identity_reports(n_configs: int = 20, seed: int = 7) -> list[VerificationReport]:
    params = EnsembleParams(5, 4, 2)
    rng = np.random.default_rng(seed)
    ratios = []
    for _ in range(n_configs):
        pts = rng.uniform(0.0, 1.0, 8) ** 0.5 * np.exp(2j * np.pi * rng.uniform(size=8))
        ratios.append(dpp.det_identity_ratio(params, pts))
    out = [VerificationReport("determinant identity ratio spread", "20 random configurations, m=5, n=4, q=2",
                              float(np.ptp(ratios)), 1e-6)]
    pts = rng.uniform(-0.6, 0.6, 4) + 1j * rng.uniform(-0.6, 0.6, 4)
    dup = np.concatenate([pts, pts[:1]])
    scale = float(np.prod(np.real(np.diag(corr_kernel_matrix(params, dup)))))
    out.append(VerificationReport("joint intensity vanishes on coincident points", "5 points, 2 equal",
                                  abs(dpp.joint_intensity(params, dup)) / scale, 1e-10))
    return out


def suite_dpp(fast: bool = False) -> list[VerificationReport]:
    out = [count_report(1000 if fast else 10_000), grid_intensity_report(500 if fast else 2000), timing_report()]
    out += det_identity_reports()
    return out


# ---------------------------------------------------------------------------
# Operator calculus
# ---------------------------------------------------------------------------

def isometry_gap(m: float = 3.0, levels=(0, 1, 2, 4), degree: int = 20, seed: int = 5) -> float:
    """Relative error of ``||T_{m,r} f||`` against ``||f||`` with the norm computed by polar quadrature."""
    rng = np.random.default_rng(seed)
    c = rng.normal(size=degree + 1) + 1j * rng.normal(size=degree + 1)
    vec = CoefficientVector(MONOMIAL_ANALYTIC, c)
    worst = 0.0
    for r in levels:
        radius = math.sqrt((4.0 * (degree + r) + 60.0) / m)
        pq = quadrature.polar_quadrature(radius, 2 * (degree + r) + 8, 0.5 / math.sqrt(m), 16)
        z, w = pq.points()
        vals = t_op_apply(r, m, vec).evaluate(z, weighted=True)
        norm = math.sqrt(float(np.sum(w * np.abs(vals) ** 2)))
        worst = max(worst, abs(norm - vec.norm()) / vec.norm())
    return worst


def semigroup_gap(m: float = 2.0, max_degree: int = 12, max_level: int = 6, seed: int = 2) -> float:
    """``T_1 T_{r-1} e_j`` against ``sqrt(r) T_r e_j`` pointwise."""
    rng = np.random.default_rng(seed)
    z = rng.uniform(-1, 1, 32) + 1j * rng.uniform(-1, 1, 32)
    worst = 0.0
    for r in range(1, max_level + 1):
        for j in range(max_degree + 1):
            lhs = polynomial_eval(t1_apply_polynomial(t_image_polynomial(r - 1, j, m), m), z)
            rhs = math.sqrt(r) * polynomial_eval(t_image_polynomial(r, j, m), z)
            worst = max(worst, _rel(lhs, rhs))
    return worst


def suite_transforms(fast: bool = False) -> list[VerificationReport]:
    out = [VerificationReport("T_r isometry", "degree<=20, r in {0,1,2,4}", isometry_gap(), 1e-8),
           VerificationReport("semi-group T_1 T_{r-1} = sqrt(r) T_r", "degree<=12, r<=6", semigroup_gap(), 1e-10)]
    params = EnsembleParams(3.0, 8, 3)
    rng = np.random.default_rng(4)
    pts = rng.uniform(-1, 1, 6) + 1j * rng.uniform(-1, 1, 6)
    worst = max(pure_level_projection_check(params, r, pts) for r in range(params.q))
    out.append(VerificationReport("pure-level kernel from operator images", "m=3, n=8, q=3", worst, 1e-9))
    out.append(VerificationReport("Christoffel-Darboux sum vs ratio", "q=8", christoffel_darboux_gap(), 1e-10))
    xi = np.array([0.0, 0.3 - 0.2j, -0.7 + 0.5j, 1.1j])
    herm = max(abs(poly_bargmann_kernel(r, a, b) - np.conj(poly_bargmann_kernel(r, b, a)))
               for r in range(3) for a in xi for b in xi)
    out.append(VerificationReport("poly-Bargmann kernel Hermitian", "r<=2", herm, 1e-12))
    r0 = max(abs(poly_bargmann_kernel(0, a, b) - np.exp(a * np.conj(b)) * normal_cdf(-a - np.conj(b)))
             for a in xi for b in xi)
    out.append(VerificationReport("level-0 kernel closed form", "4x4 points", r0, 1e-12))
    return out


_SUITE_FUNCS = {
    "specfun": suite_specfun,
    "kernels": suite_kernels,
    "bulk": suite_bulk,
    "boundary": suite_boundary,
    "exterior": suite_exterior,
    "dpp": suite_dpp,
    "transforms": suite_transforms,
}


def run_suite(name: str, fast: bool = False) -> list[VerificationReport]:
    if name == "all":
        return [rep for s in SUITES for rep in _SUITE_FUNCS[s](fast)]
    if name not in _SUITE_FUNCS:
        raise KeyError(f"unknown suite {name!r}; choose from {', '.join(SUITES + ('all',))}")
    return _SUITE_FUNCS[name](fast)
