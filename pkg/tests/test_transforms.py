import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.polynomial.hermite_e import hermeval
from scipy import integrate

from polyginibre import quadrature
from polyginibre.kernelcore import EnsembleParams, corr_kernel_poly
from polyginibre.specfun import normal_cdf
from polyginibre.transforms import (
    HERMITE_LINE,
    MAX_LEVEL,
    MOMENT_ROUTE_MAX_DEGREE,
    MONOMIAL_ANALYTIC,
    POLYANALYTIC_MONOMIAL,
    PURE_LEVEL,
    CoefficientVector,
    _halfline_by_contour,
    bargmann_apply,
    hermite_function,
    hermite_product_halfline,
    level_sum_halfline,
    poly_bargmann_apply,
    poly_bargmann_kernel,
    polynomial_eval,
    pure_level_kernel_from_images,
    pure_level_projection_check,
    t1_apply_polynomial,
    t_image,
    t_image_polynomial,
    t_op_apply,
    tr_apply_polynomial,
)

points = st.builds(complex, st.floats(-1.5, 1.5), st.floats(-1.5, 1.5))


def monomial(j, m, z):
    return m ** ((j + 1) / 2) * z ** j / math.sqrt(math.factorial(j))


# -- coefficient vectors -----------------------------------------------------------

def test_coefficient_vector_validation():
    with pytest.raises(ValueError):
        CoefficientVector("nope", [1.0])
    with pytest.raises(ValueError):
        CoefficientVector(MONOMIAL_ANALYTIC, [[1.0]])
    with pytest.raises(ValueError):
        CoefficientVector(POLYANALYTIC_MONOMIAL, [1.0])
    with pytest.raises(ValueError):
        CoefficientVector(HERMITE_LINE, [1.0, np.inf])
    assert CoefficientVector(HERMITE_LINE, [3, 4]).norm() == pytest.approx(5.0)


# -- T_r examples and identities --------------------------------------------------------

def test_t0_is_identity():
    rng = np.random.default_rng(0)
    c = rng.normal(size=6) + 1j * rng.normal(size=6)
    res = t_op_apply(0, 2.0, CoefficientVector(MONOMIAL_ANALYTIC, c))
    np.testing.assert_array_equal(res.coefficients.coefficients, c)
    z = np.array([0.3 - 0.2j, 1.1])
    want = sum(cj * monomial(j, 2.0, z) for j, cj in enumerate(c))
    np.testing.assert_allclose(res.evaluate(z), want, rtol=1e-12)


def test_t1_examples():
    z = np.array([0.0, 0.5 + 0.5j, -1.2j])
    np.testing.assert_allclose(t_image(1, 1, 1.0, z), 1 - np.abs(z) ** 2, atol=1e-15)
    np.testing.assert_allclose(t_image(1, 0, 1.0, z), -np.conj(z), atol=1e-15)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 8), st.integers(0, 10), st.floats(0.5, 5), points)
def test_closed_form_matches_repeated_t1(r, j, m, z):
    poly = np.zeros((j + 1, 1), dtype=complex)
    poly[j, 0] = m ** ((j + 1) / 2) / math.sqrt(math.factorial(j))
    via_t1 = polynomial_eval(tr_apply_polynomial(poly, r, m), z)
    closed = t_image(r, j, m, z)
    scale = max(1.0, abs(closed))
    assert abs(via_t1 - closed) <= 1e-10 * scale
    assert abs(polynomial_eval(t_image_polynomial(r, j, m), z) - closed) <= 1e-10 * scale


def test_semigroup_on_basis():
    rng = np.random.default_rng(1)
    z = rng.uniform(-1, 1, 16) + 1j * rng.uniform(-1, 1, 16)
    for m in (1.0, 3.5):
        for r in range(1, 7):
            for j in range(13):
                lhs = polynomial_eval(t1_apply_polynomial(t_image_polynomial(r - 1, j, m), m), z)
                rhs = math.sqrt(r) * polynomial_eval(t_image_polynomial(r, j, m), z)
                np.testing.assert_allclose(lhs, rhs, rtol=1e-10, atol=1e-10 * np.max(np.abs(rhs)))


def _weighted_inner(f, g, m, degree):
    radius = math.sqrt((4.0 * degree + 60.0) / m)
    z, w = quadrature.polar_quadrature(radius, 2 * degree + 8, 0.5 / math.sqrt(m), 16).points()
    return np.sum(w * f(z) * np.conj(g(z)))


@settings(max_examples=8, deadline=None)
@given(st.integers(0, 5), st.floats(0.5, 4), st.integers(0, 2**32 - 1))
def test_isometry_random_vectors(r, m, seed):
    rng = np.random.default_rng(seed)
    c = rng.normal(size=21) + 1j * rng.normal(size=21)
    res = t_op_apply(r, m, CoefficientVector(MONOMIAL_ANALYTIC, c))
    f = lambda z: res.evaluate(z, weighted=True)  # noqa: E731
    norm2 = _weighted_inner(f, f, m, 20 + r).real
    assert math.sqrt(norm2) == pytest.approx(np.linalg.norm(c), rel=1e-8)
    assert res.coefficients.norm() == pytest.approx(np.linalg.norm(c), rel=1e-14)
    assert res.coefficients.basis_tag == PURE_LEVEL and res.coefficients.level == r


def test_levels_are_orthogonal():
    m = 2.0
    for r1, r2 in [(0, 1), (1, 2), (0, 3)]:
        for j1 in range(4):
            for j2 in range(4):
                f = lambda z: t_image(r1, j1, m, z, True)  # noqa: E731
                g = lambda z: t_image(r2, j2, m, z, True)  # noqa: E731
                assert abs(_weighted_inner(f, g, m, 8)) <= 1e-8


def test_level_bounds():
    v = CoefficientVector(MONOMIAL_ANALYTIC, [1.0])
    with pytest.raises(ValueError):
        t_op_apply(MAX_LEVEL + 1, 1.0, v)
    with pytest.raises(ValueError):
        t_op_apply(0, 1.0, CoefficientVector(HERMITE_LINE, [1.0]))


# -- Bargmann --------------------------------------------------------------------------

def test_hermite_functions_orthonormal():
    t = np.linspace(-20, 20, 4001)
    H = np.array([hermite_function(j, t) for j in range(8)])
    gram = H @ H.T * (t[1] - t[0])
    np.testing.assert_allclose(gram, np.eye(8), atol=1e-10)


def test_bargmann_examples():
    unit = CoefficientVector(HERMITE_LINE, [1.0, 0, 0])
    out = bargmann_apply(unit)
    assert out.basis_tag == MONOMIAL_ANALYTIC
    np.testing.assert_array_equal(out.coefficients, [1.0, 0, 0])
    rng = np.random.default_rng(3)
    c = rng.normal(size=7) + 1j * rng.normal(size=7)
    out = bargmann_apply(CoefficientVector(HERMITE_LINE, c))
    np.testing.assert_array_equal(out.coefficients, c)
    assert out.norm() == CoefficientVector(HERMITE_LINE, c).norm()
    with pytest.raises(ValueError):
        bargmann_apply(out)


def test_poly_bargmann_apply_is_level_r_image():
    c = np.array([0.5, -1.0, 0.25j])
    res = poly_bargmann_apply(2, CoefficientVector(HERMITE_LINE, c))
    z = 0.4 - 0.7j
    want = sum(cj * t_image(2, j, 1.0, z) for j, cj in enumerate(c))
    assert res.evaluate(z) == pytest.approx(want)


# -- poly-Bargmann kernels -----------------------------------------------------------------

def test_poly_bargmann_examples():
    assert poly_bargmann_kernel(0, 0, 0) == pytest.approx(0.5, rel=1e-14)
    assert poly_bargmann_kernel(1, 0, 0) == pytest.approx(0.5, rel=1e-14)
    for r in (5, 20, 40, MAX_LEVEL):
        assert poly_bargmann_kernel(r, 0, 0) == pytest.approx(0.5, rel=1e-9)
    with pytest.raises(ValueError):
        poly_bargmann_kernel(MAX_LEVEL + 1, 0, 0)


@settings(max_examples=40, deadline=None)
@given(points, points)
def test_level0_closed_form(xi, eta):
    want = np.exp(xi * np.conj(eta)) * normal_cdf(-xi - np.conj(eta))
    assert abs(poly_bargmann_kernel(0, xi, eta) - want) <= 1e-12 * max(1.0, abs(want))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 24), points, points)
def test_poly_bargmann_hermitian(r, xi, eta):
    a = poly_bargmann_kernel(r, xi, eta)
    b = poly_bargmann_kernel(r, eta, xi)
    assert abs(a - np.conj(b)) <= 1e-9 * max(1.0, abs(a))


@pytest.mark.parametrize("r", [MOMENT_ROUTE_MAX_DEGREE - 1, MOMENT_ROUTE_MAX_DEGREE])
def test_moment_and_contour_routes_overlap(r):
    for c1, c2, a in [(0.3, -0.3, 0.0), (0.2 + 0.4j, -0.5 + 0.1j, 1.5 + 0.5j), (0.1j, -0.1j, -1 - 0.8j)]:
        got = hermite_product_halfline(r, c1, c2, a)
        assert abs(got - _halfline_by_contour(r, c1, c2, a)) <= 1e-10 * math.factorial(r)


@pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")
@pytest.mark.parametrize("r", [2, 16, 30])
def test_halfline_integral_against_quad(r):
    c1, c2, a = 0.3 + 0.2j, -0.4 + 0.1j, 0.8 - 0.6j
    c = [0] * r + [1]
    f = lambda t: hermeval(t + c1, c) * hermeval(t + c2, c) * np.exp(-t * t / 2)  # noqa: E731
    line = [integrate.quad(lambda t: g(f(t)), -np.inf, a.real, epsrel=1e-13, limit=400)[0] for g in (np.real, np.imag)]
    leg = [integrate.quad(lambda s: g(1j * f(a.real + 1j * s)), 0, a.imag, epsrel=1e-13, limit=200)[0]
           for g in (np.real, np.imag)]
    want = complex(line[0] + leg[0], line[1] + leg[1])
    assert abs(hermite_product_halfline(r, c1, c2, a) - want) <= 1e-8 * math.factorial(r)


def test_poly_bargmann_diagonal_real_positive():
    # the kernel of a projection has a real, positive diagonal
    for r in range(4):
        for xi in (0.0, 0.4 - 0.2j, -1.0):
            k = poly_bargmann_kernel(r, xi, xi)
            assert abs(k.imag) < 1e-12 and k.real > 0


# -- pure-level decomposition ----------------------------------------------------------------

def test_pure_level_examples():
    rng = np.random.default_rng(5)
    pts = rng.uniform(-1, 1, 20) + 1j * rng.uniform(-1, 1, 20)
    p = EnsembleParams(2.0, 5, 3)
    assert pure_level_projection_check(p, 0, pts[:6]) <= 1e-12
    for r in (1, 2):
        assert pure_level_projection_check(p, r, pts) <= 1e-9
    with pytest.raises(ValueError):
        pure_level_projection_check(p, 3, pts)


def test_levels_reconstruct_full_kernel():
    p = EnsembleParams(2.0, 5, 3)
    for z, w in [(0.1 + 0.2j, -0.3j), (0.8, 0.5 - 0.5j)]:
        total = sum(pure_level_kernel_from_images(p, r, z, w) for r in range(3))
        assert abs(total - corr_kernel_poly(p, z, w)) <= 1e-9


@pytest.mark.parametrize("q", [2, 4, 7, 15])
def test_level_sum_matches_per_level_sum(q):
    for c1, c2, a in [(0.0, 0.0, -0.4), (0.3 - 0.2j, -0.3 - 0.2j, -0.3 + 0.2j)]:
        want = sum(hermite_product_halfline(r, c1, c2, a) / math.factorial(r) for r in range(q))
        assert abs(level_sum_halfline(q, c1, c2, a) - want) <= 1e-11 * max(1.0, abs(want))
