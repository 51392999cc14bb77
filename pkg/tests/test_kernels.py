import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import catalog
from nlgrad.kernels import (CATALOG_KINDS, KernelCatalogEntry, KernelConfigError,
                            check_h0, check_h3_h4, check_hypotheses, classify_growth,
                            load_kernel_config, make_catalog_kernel, power_kernel,
                            sphere_area, zero_kernel)


def test_sphere_area_values():
    assert sphere_area(1) == pytest.approx(2.0)
    assert sphere_area(2) == pytest.approx(2 * math.pi)
    assert sphere_area(3) == pytest.approx(4 * math.pi)


def test_indicator_profile_matches_power_law():
    kernel = catalog("indicator_riesz", 1)
    t = np.array([0.01, 0.25, 0.9])
    assert np.allclose(kernel(t), t ** -0.5)
    assert kernel(1.5) == 0.0


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("kind", CATALOG_KINDS)
def test_catalog_satisfies_hypotheses(kind, n):
    rep = check_hypotheses(catalog(kind, n))
    assert rep.all_ok, rep.notes


def test_nonintegrable_profile_fails_h0():
    rep = check_hypotheses(power_kernel(1, 2.0))
    assert rep.h0_ok is False
    assert not rep.all_ok


def test_zero_kernel_is_rejected():
    assert check_h0(zero_kernel(1)).h0_ok is False


def test_fitted_exponents_for_log_variants():
    enhanced = check_h3_h4(catalog("log_enhanced", 1, 0.4))
    damped = check_h3_h4(catalog("log_damped", 1, 0.4))
    assert enhanced.sigma == pytest.approx(0.4, abs=2e-3)
    assert damped.gamma == pytest.approx(0.4, abs=2e-3)


def test_growth_classes_differ():
    assert classify_growth(catalog("indicator_riesz", 1)) != classify_growth(power_kernel(1, -0.3))


@pytest.mark.parametrize("kind,s", [("bogus", 0.5), ("indicator_riesz", 1.2),
                                    ("indicator_riesz", 0.0)])
def test_bad_catalog_entries(kind, s):
    with pytest.raises(ValueError):
        KernelCatalogEntry(kind, s)


def test_log_damped_needs_small_horizon():
    with pytest.raises(ValueError):
        make_catalog_kernel(KernelCatalogEntry("log_damped", 0.5, delta=1.0), 1)


def test_config_roundtrip(tmp_path):
    path = tmp_path / "k.ini"
    path.write_text("[kernel]\nkind = smooth_riesz\ns = 0.3\nn = 2\n")
    kernel = load_kernel_config(path)
    assert kernel.n == 2 and kernel.meta["s"] == 0.3 and kernel.meta["chi"] == "bump"


@pytest.mark.parametrize("text", ["[other]\nkind = indicator_riesz\n",
                                  "[kernel]\nkind = indicator_riesz\ns = abc\n",
                                  "[kernel]\nkind = mystery\n",
                                  "[kernel]\nkind = power\n",
                                  "not an ini file"])
def test_config_errors(tmp_path, text):
    path = tmp_path / "bad.ini"
    path.write_text(text)
    with pytest.raises(KernelConfigError):
        load_kernel_config(path)


def test_missing_config():
    with pytest.raises(KernelConfigError):
        load_kernel_config("/nonexistent/kernel.ini")


@settings(max_examples=25, deadline=None)
@given(alpha=st.floats(0.1, 10.0), t=st.floats(1e-4, 0.99))
def test_scaling_multiplies_profile(alpha, t):
    kernel = catalog("log_enhanced", 2)
    assert kernel.scaled(alpha)(t) == pytest.approx(alpha * kernel(t), rel=1e-12)


@settings(max_examples=25, deadline=None)
@given(kind=st.sampled_from(CATALOG_KINDS), t=st.floats(1e-6, 0.99))
def test_profiles_positive_inside_horizon(kind, t):
    kernel = catalog(kind, 1)
    if t < kernel.delta:
        assert kernel(t) > 0
