import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polyginibre.asymptotics import (
    REPORT_KEYS,
    VerificationReport,
    blown_up_boundary_kernel,
    boundary_kernel_gap,
    exterior_mass_outside,
    exterior_moment,
    fit_rate,
    harmonic_moment,
    kernel_gap,
    kernel_gap_grid,
    reports_to_json,
    szego_residual,
)
from polyginibre.berezin import boundary_kernel_limit
from polyginibre.kernelcore import EnsembleParams
from polyginibre.specfun import exp_partial_scaled

# -- reports --------------------------------------------------------------------------


def test_report_pass_rule_and_json():
    ok = VerificationReport("law-a", "grid", 0.01, 0.05)
    bad = VerificationReport("law-b", "grid", 0.06, 0.05, rate_estimate=0.5, passed=True)
    edge = VerificationReport("law-c", "grid", 0.05, 0.05)
    assert ok.passed and not bad.passed and edge.passed
    data = json.loads(reports_to_json([ok, bad]))
    assert [tuple(d) for d in data] == [REPORT_KEYS, REPORT_KEYS]
    assert data[1]["rate_estimate"] == 0.5 and data[0]["rate_estimate"] is None


@settings(max_examples=30, deadline=None)
@given(st.floats(0.1, 3.0), st.floats(1e-3, 10.0))
def test_fit_rate_recovers_power(p, c):
    ms = [100, 200, 400, 800]
    assert fit_rate(ms, [c * m ** -p for m in ms]) == pytest.approx(p, rel=1e-9)


# -- Szego ----------------------------------------------------------------------------------

@pytest.mark.parametrize("zeta", [0.5, 1.5])
def test_szego_examples(zeta):
    assert abs(szego_residual(2000, 2000, zeta)) <= 0.05


@pytest.mark.parametrize("zeta", [1.0, 0.0, -1.0])
def test_szego_domain(zeta):
    with pytest.raises(ValueError):
        szego_residual(100, 100, zeta)


def test_szego_residual_shrinks_with_k():
    for zeta in (0.5, 1.5, 0.4 + 0.2j, 3.0):
        res = [abs(szego_residual(k, k, zeta)) for k in (250, 1000, 4000)]
        assert res[1] < res[0] and res[2] < res[1]
        assert fit_rate([250, 1000, 4000], res) == pytest.approx(1.0, abs=0.1)


def test_szego_real_matches_direct_sum():
    # at small k the scaled partial sum can be summed directly
    k, zeta = 30, 1.6
    x = k * zeta
    direct = exp_partial_scaled(k, x)
    model = (zeta * math.exp(1 - zeta)) ** k / math.sqrt(2 * math.pi * k) * zeta / (zeta - 1)
    assert szego_residual(k, k, zeta) == pytest.approx(direct / model - 1, rel=1e-9)


# -- kernel gap --------------------------------------------------------------------------------

def test_kernel_gap_examples():
    assert kernel_gap(EnsembleParams(100.0, 100, 3), 0.5, 0.5) <= 1e-6
    assert kernel_gap(EnsembleParams(40.0, 40, 3), 0.0, 0.0) <= 1e-12
    # at z = w = 0.5 the gap is already at rounding level for m = 50
    for m in (50, 100, 200):
        assert kernel_gap(EnsembleParams(m, m, 2), 0.5, 0.5) <= 1e-13 * m * 2
    gaps = [kernel_gap(EnsembleParams(m, m, 2), 0.7, 0.7) for m in (50, 100, 200)]
    assert gaps[1] <= 0.5 * gaps[0] and gaps[2] <= 0.5 * gaps[1]
    with pytest.raises(ValueError):
        kernel_gap(EnsembleParams(10.0, 10, 1), 1.0, 1.0)


def test_kernel_gap_grid_is_pairwise_sup():
    p = EnsembleParams(30.0, 30, 2)
    pts = np.array([0.1, 0.6j, -0.5 + 0.3j, 0.7])
    want = max(kernel_gap(p, z, w) for z in pts for w in pts)
    assert kernel_gap_grid(p, pts) == pytest.approx(want, rel=1e-9, abs=1e-15)


# -- exterior -----------------------------------------------------------------------------------

def test_harmonic_examples():
    assert harmonic_moment(1.5, 0) == pytest.approx(1.0, abs=1e-12)
    assert harmonic_moment(1.5, 2) == pytest.approx(1 / 2.25, abs=1e-12)
    assert harmonic_moment(2j, 1) == pytest.approx(-0.5j, abs=1e-12)
    with pytest.raises(ValueError):
        harmonic_moment(0.5, 1)


@settings(max_examples=40, deadline=None)
@given(st.floats(1.05, 4.0), st.floats(0, 2 * math.pi), st.integers(0, 6))
def test_harmonic_moment_is_exact(r, t, l):
    z = r * complex(math.cos(t), math.sin(t))
    assert abs(harmonic_moment(z, l) - z ** (-l)) <= 1e-10


def test_exterior_moment_examples():
    p = EnsembleParams(200.0, 200, 2)
    assert abs(exterior_moment(p, 1.3, 0) - 1.0) <= 1e-6
    for l in range(1, 5):
        assert abs(exterior_moment(p, 1.3, l) - 1.3 ** -l) <= 0.05
    assert abs(exterior_moment(EnsembleParams(400.0, 400, 1), 2.0, 1) - 0.5) <= 0.02
    with pytest.raises(ValueError):
        exterior_moment(p, 0.9, 1)


def test_exterior_moment_matches_harmonic_off_axis():
    p = EnsembleParams(100.0, 100, 2)
    z = 1.2 * np.exp(0.8j)
    for l in (0, 1, 3):
        assert abs(exterior_moment(p, z, l) - harmonic_moment(z, l)) <= 0.05


def test_exterior_angular_exactness():
    p = EnsembleParams(60.0, 60, 2)
    base = 2 * (p.n + p.q) + 1
    for l in (0, 2):
        a = exterior_moment(p, 1.4, l, n_angles=base + l)
        b = exterior_moment(p, 1.4, l, n_angles=2 * (base + l))
        assert abs(a - b) < 1e-12


def test_exterior_mass_examples():
    assert exterior_mass_outside(EnsembleParams(200.0, 200, 2), 1.3, 1.1) <= 0.05
    masses = [exterior_mass_outside(EnsembleParams(m, m, 2), 1.3, 1.1) for m in (100, 200, 400)]
    assert masses[0] > masses[1] > masses[2]
    assert exterior_mass_outside(EnsembleParams(50.0, 50, 1), 1.2, 1.0 + 1e-9) <= 1 + 1e-9
    with pytest.raises(ValueError):
        exterior_mass_outside(EnsembleParams(50.0, 50, 1), 1.2, 0.9)


# -- boundary blow-up ----------------------------------------------------------------------------

def test_boundary_kernel_examples():
    assert boundary_kernel_gap(EnsembleParams(400.0, 400, 2), 0, 0) <= 0.1
    assert boundary_kernel_limit(2, 0, 0) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        boundary_kernel_gap(EnsembleParams(400.0, 400, 2), 5.0, 0)


def test_boundary_gap_rate_on_real_axis():
    for x in (0.0, 0.7, -1.2):
        g = [boundary_kernel_gap(EnsembleParams(m, m, 1), x, x) for m in (400, 1600)]
        assert 0.3 <= g[1] / g[0] <= 0.8


@settings(max_examples=20, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.sampled_from([50.0, 200.0]), st.integers(1, 3))
def test_blown_up_diagonal_real_positive(x, y, m, q):
    k = blown_up_boundary_kernel(EnsembleParams(m, int(m), q), complex(x, y), complex(x, y))
    assert k.real > 0 and abs(k.imag) <= 1e-12 * k.real


def test_blown_up_kernel_hermitian():
    p = EnsembleParams(200.0, 200, 2)
    xi, eta = 0.4 - 0.3j, -0.6 + 0.2j
    a = blown_up_boundary_kernel(p, xi, eta)
    b = blown_up_boundary_kernel(p, eta, xi)
    assert a == pytest.approx(np.conj(b), rel=1e-10)
