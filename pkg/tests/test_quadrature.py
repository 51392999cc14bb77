import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special

from nlgrad.quadrature import (IntegralDivergence, QuadratureSpec, bessel_j,
                               bessel_zero_panels, gauss_legendre, integrate_graded,
                               integrate_oscillatory, integrate_panels)


def test_gauss_legendre_integrates_polynomials_exactly():
    x, w = gauss_legendre(8)
    # nodes on (0, 1): integral of t^k is 1/(k+1) up to degree 15
    for k in range(16):
        assert np.dot(w, x**k) == pytest.approx(1.0 / (k + 1), rel=1e-13)


@pytest.mark.parametrize("power", [0.1, 0.5, 0.9])
def test_graded_singular_power(power):
    val = integrate_graded(lambda t: t**-power, 0.0, 1.0, singular_at_a=True)
    assert val == pytest.approx(1.0 / (1.0 - power), rel=1e-9)


def test_graded_log_singularity():
    val = integrate_graded(lambda t: -math.log(t), 0.0, 1.0, singular_at_a=True)
    assert val == pytest.approx(1.0, rel=1e-9)


def test_divergent_integral_raises():
    with pytest.raises(IntegralDivergence):
        integrate_graded(lambda t: 1.0 / t, 0.0, 1.0, singular_at_a=True)


def test_bad_interval_rejected():
    with pytest.raises(ValueError):
        integrate_graded(lambda t: 1.0, 1.0, 0.5)


def test_spec_validation():
    with pytest.raises(ValueError):
        QuadratureSpec(rel_tol=0.0)
    with pytest.raises(ValueError):
        QuadratureSpec(gauss_points=2)


@pytest.mark.parametrize("freq", [0.5, 3.0, 40.0])
def test_oscillatory_sine_with_singular_weight(freq):
    # int_0^1 t^-1/2 sin(w t) dt = sqrt(2 pi / w) S(sqrt(2 w / pi)), S the Fresnel sine integral
    w = 2 * math.pi * freq
    ref = math.sqrt(2 * math.pi / w) * special.fresnel(math.sqrt(2 * w / math.pi))[0]
    val = integrate_oscillatory(lambda t: t**-0.5, 1.0, freq, "sin", singular_origin=True)
    assert val == pytest.approx(ref, rel=1e-8)


def test_oscillatory_cosine_polynomial():
    freq = 7.25
    w = 2 * math.pi * freq
    exact = math.sin(w) / w
    val = integrate_oscillatory(lambda t: np.ones_like(t), 1.0, freq, "cos")
    assert val == pytest.approx(exact, abs=1e-13)


@pytest.mark.parametrize("nu", [0.5, 1.0, 1.5])
def test_bessel_matches_scipy(nu):
    x = np.concatenate([np.linspace(1e-6, 5, 200), np.geomspace(5, 1e4, 200)])
    assert np.allclose(bessel_j(nu, x), special.jv(nu, x), rtol=1e-9, atol=1e-14)


@settings(max_examples=30, deadline=None)
@given(freq=st.floats(0.2, 50.0), length=st.floats(0.3, 3.0))
def test_bessel_panel_edges_sit_near_zeros(freq, length):
    edges = bessel_zero_panels(1.0, freq, length)
    assert np.all(np.diff(edges) > 0) and np.all(edges < length)
    if edges.size:
        vals = np.abs(special.jv(1.0, 2 * math.pi * freq * edges))
        assert np.all(vals < 0.1)


def test_panels_singular_origin():
    edges = np.linspace(0.1, 1.0, 10)
    assert integrate_panels(lambda t: t**-0.5, edges) == pytest.approx(2.0, rel=1e-10)


def power_series_j1(x, terms=40):
    return sum((-1) ** m * (x / 2) ** (1 + 2 * m) / (math.factorial(m) * math.factorial(m + 1))
               for m in range(terms))


def test_bessel_special_values():
    assert abs(bessel_j(0.5, math.pi)) < 1e-12
    assert bessel_j(1.0, 0.0) == 0.0 and bessel_j(0.5, 0.0) == 0.0 and bessel_j(1.5, 0.0) == 0.0
    assert bessel_j(1.0, 1.0) == pytest.approx(power_series_j1(1.0), abs=1e-10)
    assert power_series_j1(1.0) == pytest.approx(0.4400505857, abs=1e-10)


@settings(max_examples=50, deadline=None)
@given(x=st.floats(0.1, 50.0))
def test_bessel_half_integer_recurrence(x):
    j_minus_half = math.sqrt(2 / (math.pi * x)) * math.cos(x)
    assert bessel_j(1.5, x) == pytest.approx(bessel_j(0.5, x) / x - j_minus_half, abs=1e-10)


@settings(max_examples=50, deadline=None)
@given(x=st.floats(0.0, 8.0))
def test_bessel_j1_small_argument_accuracy(x):
    assert abs(bessel_j(1.0, x) - power_series_j1(x)) < 1e-12


def test_oscillatory_examples():
    assert abs(integrate_oscillatory(lambda t: np.ones_like(t), 1.0, 1.0, "sin")) < 1e-10
    assert integrate_oscillatory(lambda t: np.zeros_like(t), 1.0, 3.0, "sin") == 0.0
    assert integrate_graded(lambda t: 0.0, 0.0, 1.0, True) == 0.0
    fine = QuadratureSpec(rel_tol=1e-11)
    ref = integrate_graded(lambda t: t**-1.5 * math.sin(20 * math.pi * t), 0.0, 1.0, True, fine,
                           points=[j / 20 for j in range(1, 20)])
    val = integrate_oscillatory(lambda t: t**-1.5, 1.0, 10.0, "sin", singular_origin=True)
    assert val == pytest.approx(ref, rel=1e-6)
