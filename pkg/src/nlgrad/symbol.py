"""Fourier symbol of the potential and derived multipliers.

Convention: ``f^(xi) = int f(x) exp(-2 pi i x.xi) dx``.  The potential's
transform is radial, so everything is a function of ``k = |xi|``.  Two
independent quadrature routes are offered:

* ``sine``: a half-sphere average of one-dimensional sine transforms of
  ``f(t) = t^(n-2) rho_bar(t)``.
* ``bessel``: a single Hankel-type integral against ``J_{n/2}``.

The gradient's multiplier is ``lambda(xi) = 2 pi i xi Qhat(|xi|)``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from scipy.interpolate import CubicSpline, PchipInterpolator

from .kernels import RadialKernel, sphere_area
from .potential import ball_mass
from .quadrature import (
    DEFAULT_SPEC,
    QuadratureSpec,
    bessel_j,
    bessel_zero_panels,
    gauss_legendre,
    integrate_oscillatory,
    integrate_panels,
)

__all__ = [
    "SpectralSymbol",
    "BoundReport",
    "ComparisonReport",
    "qhat_sine",
    "qhat_bessel",
    "qhat",
    "qhat_zero",
    "tabulate_symbol",
    "default_k_grid",
    "lambda_multiplier",
    "bound_report",
    "comparison_multiplier",
]

OUTER_GAUSS = 64


def qhat_zero(kernel: RadialKernel) -> float:
    """Qhat(0) = L1 norm of Q."""
    return sphere_area(kernel.n) / kernel.n * ball_mass(kernel, kernel.delta)


def _check_k(k: float) -> float:
    k = float(k)
    if not (k > 0 and math.isfinite(k)):
        raise ValueError("k must be positive; use qhat_zero for k = 0")
    return k


def _outer_panels(k: float, delta: float, lo: float, hi: float) -> np.ndarray:
    """Panel edges so that each 64-point panel sees only a few oscillations."""
    count = max(1, int(math.ceil(k * delta * (hi - lo) / 6.0)))
    return np.linspace(lo, hi, count + 1)


def _sine_inner(kernel: RadialKernel, omegas: np.ndarray, spec: QuadratureSpec) -> np.ndarray:
    """I(omega) = int_0^delta f(r) sin(2 pi omega r) dr for each omega."""
    out = np.empty(omegas.shape)
    for idx, om in np.ndenumerate(omegas):
        out[idx] = integrate_oscillatory(kernel.f, kernel.delta, float(om), "sin",
                                         singular_origin=True, spec=spec)
    return out


def qhat_sine(kernel: RadialKernel, k: float, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Qhat(k) through sine transforms of f averaged over the half sphere."""
    k = _check_k(k)
    n = kernel.n
    if n == 1:
        return _sine_inner(kernel, np.array([k]), spec)[0] / (math.pi * k)
    x, w = gauss_legendre(OUTER_GAUSS)
    if n == 2:
        # z1 = cos(theta), theta in (0, pi/2); the half circle doubles it
        edges = _outer_panels(k, kernel.delta, 0.0, 0.5 * math.pi)
        total = 0.0
        for a, b in zip(edges[:-1], edges[1:]):
            theta = a + (b - a) * x
            z1 = np.cos(theta)
            total += (b - a) * float(np.dot(w, z1 * _sine_inner(kernel, k * z1, spec)))
        return 2.0 * total / (math.pi * k)
    # n == 3: surface element 2 pi dz1 on the upper half sphere
    edges = _outer_panels(k, kernel.delta, 0.0, 1.0)
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        z1 = a + (b - a) * x
        total += (b - a) * float(np.dot(w, z1 * _sine_inner(kernel, k * z1, spec)))
    return 2.0 * math.pi * total / (math.pi * k)


def qhat_bessel(kernel: RadialKernel, k: float, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Qhat(k) = k^(-n/2) int rho_bar(t) t^(n/2-1) J_{n/2}(2 pi k t) dt."""
    k = _check_k(k)
    n = kernel.n
    nu = 0.5 * n
    scale = 2.0 * math.pi * k

    def integrand(t):
        return kernel(t) * t ** (nu - 1.0) * bessel_j(nu, scale * t)

    edges = bessel_zero_panels(nu, k, kernel.delta)
    edges = np.append(edges, kernel.delta)
    if edges.size > spec.max_subdivisions:
        raise ValueError("too many oscillations for the panel budget")
    return k ** (-nu) * integrate_panels(integrand, edges, True, spec.gauss_points)


def qhat(kernel: RadialKernel, k: float, method: str = "bessel",
         spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    if k == 0:
        return qhat_zero(kernel)
    if method == "sine":
        return qhat_sine(kernel, k, spec)
    if method == "bessel":
        return qhat_bessel(kernel, k, spec)
    raise ValueError("method must be 'sine' or 'bessel'")


def default_k_grid(k_max: float = 500.0, samples: int = 400, k_min: float = 1e-2) -> np.ndarray:
    """0 followed by ``samples`` log-spaced magnitudes in [k_min, k_max]."""
    return np.concatenate([[0.0], np.logspace(math.log10(k_min), math.log10(k_max), samples)])


@dataclass
class SpectralSymbol:
    """Tabulated Qhat on a radial frequency grid.

    Between samples: monotone cubic in log k for k >= 1, linear below
    (``interpolation="log"``), or a cubic spline in k for dense uniform
    tabulations (``interpolation="cubic"``).
    """

    k_samples: np.ndarray
    qhat: np.ndarray
    method: str
    kernel_label: str
    interpolation: str = "log"

    def __post_init__(self) -> None:
        self.k_samples = np.asarray(self.k_samples, dtype=float)
        self.qhat = np.asarray(self.qhat, dtype=float)
        if self.interpolation not in ("log", "cubic"):
            raise ValueError("interpolation must be 'log' or 'cubic'")
        self._spline = None
        if self.interpolation == "cubic":
            self._spline = CubicSpline(self.k_samples, self.qhat)
        hi = self.k_samples >= 1.0
        self._hi = None
        if np.count_nonzero(hi) >= 2:
            self._hi = PchipInterpolator(np.log(self.k_samples[hi]), self.qhat[hi], extrapolate=False)
            self._k1 = float(self.k_samples[hi][0])

    def __call__(self, k) -> np.ndarray:
        k = np.asarray(k, dtype=float)
        if np.any(k < 0) or np.any(k > self.k_samples[-1] * (1 + 1e-12)):
            raise ValueError("frequency outside the tabulated range")
        if self._spline is not None:
            return self._spline(k)
        scalar = k.ndim == 0
        k = np.atleast_1d(k)
        out = np.interp(k, self.k_samples, self.qhat)
        if self._hi is not None:
            sel = k >= self._k1
            out[sel] = self._hi(np.log(np.minimum(k[sel], self.k_samples[-1])))
        return out[0] if scalar else out

    def write_csv(self, path: str | Path, kernel: Optional[RadialKernel] = None,
                  lower_ratio: float = math.nan, upper_ratio: float = math.nan) -> None:
        """Columns k, qhat, lower_envelope, upper_envelope."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["k", "qhat", "lower_envelope", "upper_envelope"])
            for k, q in zip(self.k_samples, self.qhat):
                if kernel is not None and k > 0:
                    env = float(kernel(1.0 / k)) / k**kernel.n
                    lo, up = lower_ratio * env, upper_ratio * env
                else:
                    lo = up = math.nan
                w.writerow([repr(float(k)), repr(float(q)), repr(float(lo)), repr(float(up))])


def tabulate_symbol(kernel: RadialKernel, k_grid: Optional[Sequence[float]] = None,
                    method: str = "bessel", spec: QuadratureSpec = DEFAULT_SPEC) -> SpectralSymbol:
    ks = default_k_grid() if k_grid is None else np.asarray(k_grid, dtype=float)
    if np.any(np.diff(ks) <= 0) or ks[0] < 0:
        raise ValueError("k grid must be increasing and nonnegative")
    vals = np.array([qhat(kernel, float(k), method, spec) for k in ks])
    return SpectralSymbol(ks, vals, method, kernel.label)


def lambda_multiplier(kernel_or_symbol, xi) -> np.ndarray:
    """2 pi i xi Qhat(|xi|) for xi of shape (..., n); zero at xi = 0."""
    xi = np.asarray(xi, dtype=float)
    if not np.all(np.isfinite(xi)):
        raise ValueError("xi must be finite")
    mag = np.linalg.norm(np.atleast_1d(xi), axis=-1) if xi.ndim else abs(float(xi))
    mag = np.asarray(mag, dtype=float)
    if isinstance(kernel_or_symbol, SpectralSymbol):
        qv = kernel_or_symbol(mag)
    else:
        flat = mag.reshape(-1)
        uniq, inv = np.unique(flat, return_inverse=True)
        vals = np.array([qhat(kernel_or_symbol, float(k)) if k > 0 else 0.0 for k in uniq])
        qv = vals[inv].reshape(mag.shape)
    qv = np.where(mag > 0, qv, 0.0)
    return 2j * math.pi * xi * (qv[..., None] if xi.ndim else qv)


@dataclass
class BoundReport:
    k_range: tuple
    k: np.ndarray = field(default_factory=lambda: np.zeros(0))
    qhat: np.ndarray = field(default_factory=lambda: np.zeros(0))
    ratios: np.ndarray = field(default_factory=lambda: np.zeros(0))
    lower_ratio: float = math.nan
    upper_ratio: float = math.nan
    k2_lower: float = math.nan
    derivative_ratios: dict = field(default_factory=dict)

    @property
    def empty(self) -> bool:
        return self.k.size == 0


def bound_report(kernel: RadialKernel, k_min: Optional[float] = None, k_max: float = 500.0,
                 samples: int = 48, method: str = "bessel",
                 symbol: Optional[SpectralSymbol] = None) -> BoundReport:
    """Two-sided envelope ratios Qhat k^n / rho_bar(1/k) and derivative ratios.

    Values are computed by direct evaluation at log-spaced k (the optional
    ``symbol`` is used only for the samples it already holds in range).
    Derivatives are central differences in k with step 1e-3 k.
    """
    k_min = 2.0 / kernel.epsilon if k_min is None else float(k_min)
    if k_min > k_max:
        return BoundReport(k_range=(k_min, k_max))
    ks = np.logspace(math.log10(k_min), math.log10(k_max), samples)
    q = np.array([qhat(kernel, float(k), method) for k in ks])
    env = kernel(1.0 / ks) / ks**kernel.n
    ratios = q / env
    h = 1e-3 * ks
    qp = np.array([qhat(kernel, float(k), method) for k in ks + h])
    qm = np.array([qhat(kernel, float(k), method) for k in ks - h])
    d1 = (qp - qm) / (2 * h)
    d2 = (qp - 2 * q + qm) / h**2
    denom = q + 1.0 / ks
    deriv = {1: float(np.max(np.abs(d1) * ks / denom)),
             2: float(np.max(np.abs(d2) * ks**2 / denom))}
    return BoundReport(
        k_range=(k_min, k_max),
        k=ks,
        qhat=q,
        ratios=ratios,
        lower_ratio=float(np.min(ratios)),
        upper_ratio=float(np.max(ratios)),
        k2_lower=float(np.min(q * ks**2)),
        derivative_ratios=deriv,
    )


@dataclass
class ComparisonReport:
    k: np.ndarray
    m: np.ndarray
    sup_m: float
    inf_m: float
    mihlin: dict


def comparison_multiplier(symbol1: SpectralSymbol, symbol2: SpectralSymbol,
                          k_grid: Optional[Sequence[float]] = None) -> ComparisonReport:
    """m = Qhat_1 / Qhat_2 on a shared grid, with |d^a m/dk^a| k^a for a = 1, 2."""
    if k_grid is None:
        if symbol1.k_samples.shape != symbol2.k_samples.shape or not np.allclose(
                symbol1.k_samples, symbol2.k_samples):
            raise ValueError("symbols are sampled on different grids; pass k_grid")
        ks = symbol1.k_samples
        q1, q2 = symbol1.qhat, symbol2.qhat
    else:
        ks = np.asarray(k_grid, dtype=float)
        q1, q2 = symbol1(ks), symbol2(ks)
    if np.any(q1 <= 0) or np.any(q2 <= 0):
        raise ValueError("symbols must be positive to form their ratio")
    m = q1 / q2
    pos = ks > 0
    kp, mp = ks[pos], m[pos]
    mihlin = {1: 0.0, 2: 0.0}
    if kp.size >= 3:
        d1 = np.gradient(mp, kp)
        d2 = np.gradient(d1, kp)
        mihlin = {1: float(np.max(np.abs(d1) * kp)), 2: float(np.max(np.abs(d2) * kp**2))}
    return ComparisonReport(k=ks, m=m, sup_m=float(np.max(m)), inf_m=float(np.min(m)),
                            mihlin=mihlin)
