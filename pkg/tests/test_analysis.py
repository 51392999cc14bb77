import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import catalog
from nlgrad.analysis import (MORREY_SEED, compactness_proxy, modulus_profile, morrey_check,
                             orlicz_condition_check, poincare_estimate, translation_estimate)
from nlgrad.fields import GridField, GridSpec, make_bump
from nlgrad.kernels import CATALOG_KINDS, power_kernel
from nlgrad.operators import gradient_fft


def test_poincare_bounded_below_on_centred_interval():
    rep = poincare_estimate(catalog("indicator_riesz", 1), [(-0.5, 0.5)], [1 / 64, 1 / 128, 1 / 256])
    assert all(rep.converged)
    assert min(rep.sigma_min) / max(rep.sigma_min) > 0.5
    assert abs(rep.trend) < 0.05


def test_poincare_degrades_for_vanishing_kernel():
    rep = poincare_estimate(power_kernel(1, -0.3), [(0.0, 1.0)], [1 / 64, 1 / 128, 1 / 256])
    assert rep.trend > 0.1


def test_bounded_positive_class_is_stable_without_decay():
    kernel = power_kernel(1, 0.0)
    rep = poincare_estimate(kernel, [(0.0, 1.0)], [1 / 64, 1 / 128, 1 / 256])
    assert abs(rep.trend) < 0.05
    assert not compactness_proxy(kernel).decays


def test_poincare_empty_interior_rejected():
    with pytest.raises(ValueError):
        poincare_estimate(catalog("indicator_riesz", 1), [(0.0, 0.001)], [1 / 64])


@settings(max_examples=5, deadline=None)
@given(alpha=st.floats(0.1, 10.0))
def test_poincare_scales_with_kernel(alpha):
    kernel = catalog("indicator_riesz", 1)
    base = poincare_estimate(kernel, [(0.0, 1.0)], [1 / 32]).sigma_min[0]
    scaled = poincare_estimate(kernel.scaled(alpha), [(0.0, 1.0)], [1 / 32]).sigma_min[0]
    assert scaled == pytest.approx(alpha * base, rel=1e-6)


def test_compactness_starts_at_four_over_epsilon():
    kernel = catalog("indicator_riesz", 1)
    rep = compactness_proxy(kernel, samples=12)
    assert rep.k[0] == pytest.approx(4 / kernel.epsilon)
    assert rep.decays and rep.exponent == pytest.approx(-0.5, abs=0.05)


@pytest.mark.parametrize("kind", CATALOG_KINDS)
def test_modulus_envelope_constant(kind):
    prof = modulus_profile(catalog(kind, 1), 2.0)
    assert prof.envelope_constant <= 100
    assert prof.almost_increasing_constant <= 10


def bump_and_gradient(kernel, h):
    u = make_bump(GridSpec.centered(1, 0.6, h), [0.0], 0.3)
    return u, gradient_fft(kernel, None, u)


SHIFT_CELLS = (2, 4, 8, 16, 32)


@pytest.mark.parametrize("s", [0.5, 0.75])
def test_translation_ratios(s):
    kernel = catalog("indicator_riesz", 1, s)
    h = 1 / 256
    u, G = bump_and_gradient(kernel, h)
    zetas = [m * h for m in SHIFT_CELLS]
    rep = translation_estimate(kernel, u, [0.0] + zetas, 2.0, G)
    assert rep["rows"][0] == (0.0, 0.0)
    ratios = np.array([r for _, r in rep["rows"][1:]])
    assert np.all(np.isfinite(ratios))
    # smooth u: |u - u(. + zeta)| ~ zeta while omega(zeta) = zeta^s, so the ratio grows like zeta^(1-s)
    slope = np.polyfit(np.log(zetas), np.log(ratios), 1)[0]
    assert slope == pytest.approx(1 - s, abs=0.1)
    if s == 0.75:
        assert ratios.max() / ratios.min() < 3
    coarse, Gc = bump_and_gradient(kernel, 2 * h)
    other = translation_estimate(kernel, coarse, zetas, 2.0, Gc)
    assert other["sup"] == pytest.approx(rep["sup"], rel=0.2)


def test_translation_validates_shifts():
    kernel = catalog("indicator_riesz", 1)
    u, G = bump_and_gradient(kernel, 1 / 128)
    with pytest.raises(ValueError):
        translation_estimate(kernel, u, [0.5 / 128], 2.0, G)
    with pytest.raises(ValueError):
        translation_estimate(kernel, u, [0.25], 2.0, G)


def test_morrey_ratio_finite_and_zero_field():
    kernel = catalog("indicator_riesz", 1, 0.75)
    u, G = bump_and_gradient(kernel, 1 / 256)
    assert math.isfinite(morrey_check(kernel, u, 2.0, G=G))
    assert morrey_check(kernel, GridField.zeros(u.spec), 2.0) == 0.0
    assert MORREY_SEED == 0x6E6C6772


def test_morrey_requires_sigma_p_above_n():
    kernel = catalog("indicator_riesz", 1, 0.25)
    u, G = bump_and_gradient(kernel, 1 / 128)
    with pytest.raises(ValueError):
        morrey_check(kernel, u, 2.0, G=G)


def test_morrey_deterministic():
    kernel = catalog("indicator_riesz", 1, 0.75)
    u, G = bump_and_gradient(kernel, 1 / 128)
    assert morrey_check(kernel, u, 2.0, G=G) == morrey_check(kernel, u, 2.0, G=G)


def test_orlicz_critical_young_function_is_positive():
    s, p = 0.5, 1.5
    kernel = catalog("indicator_riesz", 1, s)
    verdict = orlicz_condition_check(kernel, p, lambda t: t ** (1 / p - s))
    assert verdict.positive
    assert np.allclose(verdict.ratio, 1.0, rtol=1e-9)


def test_orlicz_linear_young_function_is_positive():
    # the ratio is t^(1 + s/n - 1/p), which grows without bound
    kernel = catalog("indicator_riesz", 1, 0.5)
    verdict = orlicz_condition_check(kernel, 1.5, lambda t: t)
    assert verdict.positive and verdict.ratio[-1] > verdict.ratio[0]


def test_orlicz_exponential_young_function_is_negative():
    kernel = catalog("indicator_riesz", 1, 0.25)
    verdict = orlicz_condition_check(kernel, 1.05, np.log1p)
    assert not verdict.positive


def test_orlicz_rejects_supercritical_and_nonmonotone():
    kernel = catalog("indicator_riesz", 1, 0.5)
    with pytest.raises(ValueError):
        orlicz_condition_check(kernel, 2.5, lambda t: t)
    with pytest.raises(ValueError):
        orlicz_condition_check(kernel, 1.5, lambda t: np.sin(np.log(t)) + 2)
