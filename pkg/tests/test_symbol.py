import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import catalog
from nlgrad.kernels import CATALOG_KINDS
from nlgrad.symbol import (SpectralSymbol, bound_report, comparison_multiplier,
                           default_k_grid, lambda_multiplier, qhat, qhat_bessel, qhat_sine,
                           qhat_zero, tabulate_symbol)

S = 0.5


def oracle_qhat(n, k, s=S):
    """Radial Fourier transform of Q(r) = (r^-a - 1)/a on r < 1, a = n + s - 1, via mpmath."""
    mpmath.mp.dps = 30
    a = n + s - 1
    q = lambda r: (r ** (-a) - 1) / a
    w = 2 * mpmath.pi * k
    if n == 1:
        f = lambda r: 2 * q(r) * mpmath.cos(w * r)
    elif n == 2:
        f = lambda r: 2 * mpmath.pi * q(r) * mpmath.besselj(0, w * r) * r
    else:
        f = lambda r: 2 * q(r) * mpmath.sin(w * r) * r / k
    pts = [0] + [mpmath.mpf(j) / (2 * k) for j in range(1, int(2 * k) + 1)] + [1]
    pts = sorted(set(p for p in pts if p <= 1))
    return float(mpmath.quad(f, pts))


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("k", [0.3, 2.0, 17.5])
def test_symbol_against_oracle(n, k):
    kernel = catalog("indicator_riesz", n, S)
    ref = oracle_qhat(n, k)
    assert qhat_bessel(kernel, k) == pytest.approx(ref, rel=1e-8)
    assert qhat_sine(kernel, k) == pytest.approx(ref, rel=1e-8)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_zero_frequency_is_l1_norm(n):
    kernel = catalog("indicator_riesz", n, S)
    area = {1: 2.0, 2: 2 * math.pi, 3: 4 * math.pi}[n]
    l1 = area / n / (1 - S)
    assert qhat(kernel, 0.0) == pytest.approx(l1, rel=1e-9)
    assert qhat(kernel, 1e-3) == pytest.approx(l1, rel=1e-4)


@settings(max_examples=20, deadline=None)
@given(kind=st.sampled_from(CATALOG_KINDS), k=st.floats(0.01, 300.0))
def test_symbol_positive(kind, k):
    assert qhat(catalog(kind, 1), k) > 0


@settings(max_examples=20, deadline=None)
@given(xi=st.lists(st.floats(-50, 50), min_size=2, max_size=2))
def test_multiplier_is_odd_and_imaginary(xi):
    kernel = catalog("indicator_riesz", 2)
    xi = np.array(xi)
    lam = lambda_multiplier(kernel, xi)
    assert np.all(lam.real == 0)
    assert np.allclose(lambda_multiplier(kernel, -xi), -lam)


def test_multiplier_vanishes_at_origin():
    assert np.all(lambda_multiplier(catalog("smooth_riesz", 3), np.zeros(3)) == 0)


def test_interpolated_symbol_tracks_direct_values():
    kernel = catalog("log_enhanced", 1)
    sym = tabulate_symbol(kernel, default_k_grid(200.0, 200))
    for k in (0.37, 4.1, 55.5, 181.0):
        assert sym(k) == pytest.approx(qhat(kernel, k), rel=1e-4)
    with pytest.raises(ValueError):
        sym(500.0)


def test_tabulation_rejects_unsorted_grid():
    with pytest.raises(ValueError):
        tabulate_symbol(catalog("indicator_riesz", 1), [0.0, 2.0, 1.0])


def test_invalid_method():
    with pytest.raises(ValueError):
        qhat(catalog("indicator_riesz", 1), 1.0, "laplace")


def test_bound_report_envelope_ratio():
    rep = bound_report(catalog("indicator_riesz", 1), k_max=300.0, samples=12)
    assert 0 < rep.lower_ratio <= rep.upper_ratio < 10 * rep.lower_ratio
    assert all(math.isfinite(v) for v in rep.derivative_ratios.values())


def test_bound_report_empty_range():
    assert bound_report(catalog("indicator_riesz", 1), k_max=1.0).empty


def test_identical_kernels_give_unit_multiplier():
    sym = tabulate_symbol(catalog("variable_exponent", 1), default_k_grid(100.0, 40))
    rep = comparison_multiplier(sym, sym)
    assert np.all(rep.m == 1.0) and rep.sup_m == rep.inf_m == 1.0


def test_comparison_requires_shared_grid():
    kernel = catalog("indicator_riesz", 1)
    a = tabulate_symbol(kernel, default_k_grid(50.0, 20))
    b = tabulate_symbol(kernel, default_k_grid(50.0, 21))
    with pytest.raises(ValueError):
        comparison_multiplier(a, b)


def test_symbol_csv(tmp_path):
    kernel = catalog("indicator_riesz", 1)
    sym = tabulate_symbol(kernel, default_k_grid(50.0, 10))
    path = tmp_path / "sym.csv"
    sym.write_csv(path, kernel, 0.9, 1.1)
    rows = path.read_text().splitlines()
    assert rows[0] == "k,qhat,lower_envelope,upper_envelope" and len(rows) == 12
    assert float(rows[1].split(",")[1]) == pytest.approx(qhat_zero(kernel))
