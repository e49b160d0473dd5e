import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from polyginibre.kernelcore import (
    ANALYTIC,
    ANTIANALYTIC,
    BasisIndex,
    EnsembleParams,
    QuadSpec,
    ScaledComplex,
    basis_indices,
    basis_weighted,
    corr_diagonal,
    corr_kernel_fock,
    corr_kernel_matrix,
    corr_kernel_poly,
    corr_kernel_split,
    corr_subkernel_pure,
    gram_matrix,
    layout,
)

complexes = st.builds(complex, st.floats(-1.2, 1.2), st.floats(-1.2, 1.2))


def basis_oracle(m, index, z):
    """Direct formula with scipy's Laguerre, for moderate arguments."""
    x = m * abs(z) ** 2
    if index.family == ANALYTIC:
        i, r = index.i_or_j, index.r_or_k
        c = math.sqrt(math.factorial(r) / math.factorial(r + i)) * m ** ((i + 1) / 2)
        return c * z ** i * special.eval_genlaguerre(r, i, x) * math.exp(-x / 2)
    j, k = index.i_or_j, index.r_or_k
    c = math.sqrt(math.factorial(j) / math.factorial(j + k)) * m ** ((k + 1) / 2)
    return c * np.conj(z) ** k * special.eval_genlaguerre(j, k, x) * math.exp(-x / 2)


# -- parameters and index bookkeeping ----------------------------------------

@pytest.mark.parametrize("m, n, q", [(0, 3, 1), (-1, 3, 1), (2e6, 3, 1), (1, 2, 3), (1, 0, 1), (1, 3, 0),
                                     (1, 100_001, 1), (1, 2.5, 1)])
def test_invalid_params(m, n, q):
    with pytest.raises(ValueError):
        EnsembleParams(m, n, q)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 30), st.integers(1, 30))
def test_index_count_and_uniqueness(n, q):
    if q > n:
        n, q = q, n
    params = EnsembleParams(1.0, n, q)
    idx = basis_indices(params)
    assert len(idx) == n * q == len(set(idx))
    for ix in idx:
        ix.validate(params)
    # frequency and level fully identify a basis function
    pairs = {(ix.frequency, ix.level) for ix in idx}
    assert len(pairs) == n * q


@pytest.mark.parametrize("ix", [BasisIndex(ANALYTIC, 3, 0), BasisIndex(ANALYTIC, 0, 2), BasisIndex(ANTIANALYTIC, 0, 0),
                                BasisIndex(ANTIANALYTIC, 1, 1), BasisIndex("other", 0, 0)])
def test_invalid_index(ix):
    with pytest.raises(ValueError):
        basis_weighted(EnsembleParams(1.0, 3, 2), ix, 0.3)


def test_scaled_complex_roundtrip_and_zero():
    a, b = ScaledComplex.from_complex(3 - 4j), ScaledComplex.from_complex(-2j)
    assert (a * b).to_complex() == pytest.approx((3 - 4j) * (-2j), rel=1e-14)
    assert (a / b).to_complex() == pytest.approx((3 - 4j) / (-2j), rel=1e-14)
    zero = ScaledComplex.from_complex(0)
    assert zero.is_zero and zero.to_complex() == 0 and (zero * a).is_zero
    assert -math.pi < ScaledComplex(0.0, 7.0).phase <= math.pi
    assert ScaledComplex(0.0, -math.pi).phase == math.pi
    with pytest.raises(ZeroDivisionError):
        a / zero
    huge = ScaledComplex(1e4, 0.3) / ScaledComplex(1e4 - 1.0, 0.1)
    assert huge.to_complex() == pytest.approx(math.e * complex(math.cos(0.2), math.sin(0.2)))


# -- examples ----------------------------------------------------------------

def test_basis_examples():
    p = EnsembleParams(1.0, 3, 2)
    for z in (0.0, 0.7 - 0.2j, 2.0):
        assert basis_weighted(p, BasisIndex(ANALYTIC, 0, 0), z) == pytest.approx(math.exp(-abs(z) ** 2 / 2))
    assert basis_weighted(p, BasisIndex(ANTIANALYTIC, 0, 1), 1.0) == pytest.approx(math.exp(-0.5))
    # m^{(i+1)/2} z^i e^{-m|z|^2/2} at i=1, m=4, z=0.5 equals 4 * 0.5 * e^{-1/2}
    p4 = EnsembleParams(4.0, 3, 1)
    assert basis_weighted(p4, BasisIndex(ANALYTIC, 1, 0), 0.5) == pytest.approx(2 * math.exp(-0.5), rel=1e-14)
    assert basis_weighted(p4, BasisIndex(ANALYTIC, 1, 0), 0.5) == pytest.approx(1.2131, abs=1e-4)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.5, 10), st.integers(1, 8), st.integers(1, 4), complexes)
def test_basis_matches_oracle(m, n, q, z):
    if q > n:
        n, q = q, n
    p = EnsembleParams(m, n, q)
    lay = layout(p)
    got = lay.features(z)[0]
    want = np.array([basis_oracle(m, ix, z) for ix in lay.indices])
    np.testing.assert_allclose(got, want, rtol=1e-10, atol=1e-12 * max(1.0, np.max(np.abs(want))))


def test_kernel_examples():
    p = EnsembleParams(1.0, 1, 1)
    for z, w in [(0.3, -0.2j), (1 + 1j, 0.5)]:
        assert corr_kernel_poly(p, z, w) == pytest.approx(math.exp(-(abs(z) ** 2 + abs(w) ** 2) / 2))
    for m, q in [(3.0, 1), (7.0, 4)]:
        assert corr_kernel_poly(EnsembleParams(m, 5, q), 0, 0) == pytest.approx(m * q, rel=1e-14)
    p = EnsembleParams(100.0, 100, 3)
    assert abs(corr_kernel_poly(p, 0.3, 0.5) - corr_kernel_fock(100.0, 3, 0.3, 0.5)) <= 1e-4


def test_fock_examples():
    z, w = 0.4 + 0.3j, -0.1 + 0.8j
    want = np.exp(z * np.conj(w) - abs(z) ** 2 / 2 - abs(w) ** 2 / 2)
    assert corr_kernel_fock(1.0, 1, z, w) == pytest.approx(want, rel=1e-14)
    assert corr_kernel_fock(1.0, 1, z, z) == pytest.approx(1.0)
    assert corr_kernel_fock(1.0, 2, 0, 0) == pytest.approx(2.0)
    assert corr_kernel_fock(2.0, 1, 0, 1) == pytest.approx(2 * math.exp(-1))


def test_split_examples():
    z, w = 0.3 + 0.1j, -0.4j
    assert corr_kernel_split(EnsembleParams(2.0, 5, 1), z, w)[1] == 0
    a, b = corr_kernel_split(EnsembleParams(2.0, 5, 3), z, z)
    assert a.imag == 0 and b.imag == 0 and a.real >= 0 and b.real >= 0
    rng = np.random.default_rng(0)
    p = EnsembleParams(10.0, 10, 3)
    for _ in range(10):
        z, w = rng.normal(size=2) + 1j * rng.normal(size=2)
        assert abs(sum(corr_kernel_split(p, z, w)) - corr_kernel_poly(p, z, w)) <= 1e-12 * max(1, abs(corr_kernel_poly(p, z, w)))


def test_pure_subkernels():
    rng = np.random.default_rng(1)
    p = EnsembleParams(8.0, 8, 3)
    for _ in range(10):
        z, w = 0.5 * (rng.normal(size=2) + 1j * rng.normal(size=2))
        assert corr_subkernel_pure(p, 0, z, w) == pytest.approx(corr_kernel_poly(EnsembleParams(8.0, 8, 1), z, w), abs=1e-12)
        total = sum(corr_subkernel_pure(p, r, z, w) for r in range(3))
        assert abs(total - corr_kernel_poly(p, z, w)) <= 1e-10
    with pytest.raises(ValueError):
        corr_subkernel_pure(p, 3, 0, 0)


# -- Gram matrix ---------------------------------------------------------------

def test_gram_examples():
    g = gram_matrix(EnsembleParams(4.0, 6, 3))
    assert not g.accuracy_warning
    assert np.max(np.abs(g.matrix - np.eye(18))) <= 1e-6
    one = gram_matrix(EnsembleParams(1.0, 1, 1)).matrix
    assert one.shape == (1, 1) and one[0, 0] == pytest.approx(1.0, abs=1e-12)
    lay = layout(EnsembleParams(4.0, 6, 3))
    mixed = g.matrix[np.ix_(lay.is_analytic, ~lay.is_analytic)]
    assert np.max(np.abs(mixed)) <= 1e-8


def test_gram_flags_insufficient_quadrature():
    p = EnsembleParams(4.0, 6, 3)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        g = gram_matrix(p, QuadSpec(radius=0.5, n_angles=5, panel_width=0.25))
    assert g.accuracy_warning
    assert np.max(np.abs(g.matrix - np.eye(18))) > 1e-3


# -- invariants ------------------------------------------------------------------

@settings(max_examples=25, deadline=None)
@given(st.floats(0.5, 50), st.integers(1, 12), st.integers(1, 4), st.lists(complexes, min_size=2, max_size=12))
def test_hermitian_and_psd(m, n, q, pts):
    if q > n:
        n, q = q, n
    p = EnsembleParams(m, n, q)
    mat = corr_kernel_matrix(p, pts)
    assert np.array_equal(mat, mat.conj().T)
    ev = np.linalg.eigvalsh(mat)
    assert ev[0] >= -1e-8 * max(ev[-1], 1e-300)
    z, w = pts[0], pts[1]
    assert corr_kernel_poly(p, z, w) == np.conj(corr_kernel_poly(p, w, z))


@settings(max_examples=25, deadline=None)
@given(st.floats(0.5, 200), st.integers(1, 40), st.integers(1, 5), st.lists(complexes, min_size=1, max_size=20))
def test_diagonal_bounded_and_monotone_in_q(m, n, q, pts):
    if q > n:
        n, q = q, n
    pts = np.asarray(pts)
    d = corr_diagonal(EnsembleParams(m, n, q), pts)
    assert np.all(d <= m * q * (1 + 1e-12))
    if q < n:
        assert np.all(corr_diagonal(EnsembleParams(m, n, q + 1), pts) >= d * (1 - 1e-12))
    np.testing.assert_allclose(d, np.real(np.diag(corr_kernel_matrix(EnsembleParams(m, n, q), pts))), rtol=1e-12, atol=1e-300)


def test_kernel_gap_decays_geometrically():
    rng = np.random.default_rng(2)
    z = 0.7 * np.sqrt(rng.uniform(size=30)) * np.exp(2j * np.pi * rng.uniform(size=30))
    w = 0.7 * np.sqrt(rng.uniform(size=30)) * np.exp(2j * np.pi * rng.uniform(size=30))
    for q in (1, 2, 3):
        gaps = [np.max(np.abs(corr_kernel_poly(EnsembleParams(m, m, q), z, w) - corr_kernel_fock(m, q, z, w)))
                for m in (50, 100, 200)]
        assert gaps[1] <= 0.5 * gaps[0] and gaps[2] <= 0.5 * gaps[1]


def test_large_m_no_overflow():
    p = EnsembleParams(1e5, 200, 2)
    val = corr_kernel_poly(p, 0.01, 0.012)
    assert np.isfinite(val)
    assert val == pytest.approx(corr_kernel_fock(1e5, 2, 0.01, 0.012), rel=1e-8)


def test_scalar_and_array_paths_agree():
    p = EnsembleParams(30.0, 30, 3)
    z = np.array([0.1, 0.5j, -0.3 + 0.2j])
    w = np.array([0.2 - 0.1j, 0.0, 0.7])
    arr = corr_kernel_poly(p, z, w)
    for a, b, v in zip(z, w, arr):
        assert v == pytest.approx(corr_kernel_poly(p, a, b), rel=1e-12, abs=1e-12)
