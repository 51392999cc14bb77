"""Numerical integration for singular endpoint and oscillatory integrals.

Three tools live here:

* :func:`integrate_graded` wraps QUADPACK's adaptive Gauss-Kronrod driver
  (via :func:`scipy.integrate.quad`) and, for endpoint singularities, first
  applies the exponential substitution ``t = a + (b - a) exp(-v)`` so that
  uniform steps in ``v`` become geometric steps toward ``a``.  Integrals that
  do not converge raise :class:`IntegralDivergence`.
* :func:`integrate_oscillatory` integrates ``g(r) * sin(2 pi k r)`` (or ``cos``)
  over ``(0, L]`` by cutting at the half-period lattice ``j / (2k)`` and
  applying a fixed Gauss-Legendre rule per panel.  The first panel is graded
  geometrically toward the origin so that integrable singularities of ``g``
  are resolved.
* :func:`bessel_j` evaluates ``J_nu`` for ``nu`` in ``{1/2, 1, 3/2}``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import integrate as _sp_integrate

__all__ = [
    "QuadratureSpec",
    "IntegralDivergence",
    "integrate_graded",
    "integrate_oscillatory",
    "oscillatory_batch",
    "gauss_legendre",
    "integrate_panels",
    "bessel_zero_panels",
    "bessel_j",
]


class IntegralDivergence(ArithmeticError):
    """Raised when an integral fails to converge (treated as infinite)."""


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-14
    max_subdivisions: int = 2**15
    gauss_points: int = 16

    def __post_init__(self) -> None:
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.gauss_points < 4:
            raise ValueError("gauss_points must be >= 4")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be positive")


DEFAULT_SPEC = QuadratureSpec()

_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def gauss_legendre(m: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the m-point Gauss-Legendre rule on [0, 1]."""
    if m not in _GL_CACHE:
        x, w = np.polynomial.legendre.leggauss(m)
        _GL_CACHE[m] = (0.5 * (x + 1.0), 0.5 * w)
    return _GL_CACHE[m]


def _quad(fun, a, b, spec, points=None):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        out = _sp_integrate.quad(
            fun,
            a,
            b,
            epsabs=spec.abs_tol,
            epsrel=spec.rel_tol,
            limit=spec.max_subdivisions,
            points=points,
            full_output=1,
        )
    value, err, info = out[0], out[1], out[2]
    ier = 0 if len(out) == 3 else 1
    return value, err, ier, info


def _accept(value: float, err: float, ier: int, spec: QuadratureSpec) -> bool:
    if not (math.isfinite(value) and math.isfinite(err)):
        return False
    if ier == 0:
        return True
    # QUADPACK flags roundoff trouble even when the answer is fine; accept
    # if the error estimate is still small.
    return err <= max(1e3 * spec.abs_tol, math.sqrt(spec.rel_tol) * abs(value))


def integrate_graded(
    f: Callable[[float], float],
    a: float,
    b: float,
    singular_at_a: bool = False,
    spec: QuadratureSpec = DEFAULT_SPEC,
    points: Sequence[float] | None = None,
) -> float:
    """Integrate ``f`` over ``(a, b]`` with adaptive Gauss-Kronrod.

    With ``singular_at_a`` the integrand is pulled back through
    ``t = a + (b - a) exp(-v)``; ``points`` (in ``t``) are mapped accordingly.
    Raises :class:`IntegralDivergence` when the integral does not converge.
    """
    if not (0 <= a < b) or not math.isfinite(b):
        raise ValueError("need 0 <= a < b < inf")

    def fs(t):
        try:
            val = float(f(t))
        except (OverflowError, ZeroDivisionError) as exc:
            raise IntegralDivergence(f"integrand overflow at t={t!r}") from exc
        if not math.isfinite(val):
            raise IntegralDivergence(f"integrand not finite at t={t!r}")
        return val

    width = b - a
    if not singular_at_a:
        pts = None
        if points:
            pts = sorted(p for p in points if a < p < b) or None
        value, err, ier, _ = _quad(fs, a, b, spec, pts)
        if not _accept(value, err, ier, spec):
            raise IntegralDivergence(f"no convergence on [{a}, {b}] (err={err:.3g})")
        return value

    # Largest v that still separates t from a in floating point.
    if a == 0.0:
        v_max = math.log(width / 1e-300)
    else:
        v_max = math.log(width / (4.0 * np.finfo(float).eps * a))
    v_max = min(v_max, 740.0)

    def phi(v):
        e = math.exp(-v)
        return fs(a + width * e) * width * e

    def phi_finite(v):
        try:
            return math.isfinite(phi(v))
        except IntegralDivergence:
            return False

    # Back off until the integrand (and the two tail probes) are representable.
    while v_max > 60.0 and not all(phi_finite(v_max - d) for d in (0.0, 20.0, 40.0)):
        v_max -= 10.0

    breaks = [0.0]
    v = 1.0
    while v < v_max:
        breaks.append(v)
        v *= 2.0
    breaks.append(v_max)
    if points:
        for p in points:
            if a < p < b:
                breaks.append(math.log(width / (p - a)))
    breaks = sorted(set(x for x in breaks if 0.0 <= x <= v_max))

    total = 0.0
    total_err = 0.0
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        value, err, ier, _ = _quad(phi, lo, hi, spec)
        if not _accept(value, err, ier, spec):
            raise IntegralDivergence(
                f"no convergence toward singular endpoint (v in [{lo:.3g}, {hi:.3g}])"
            )
        total += value
        total_err += err

    # Tail beyond v_max: geometric decay model phi(v) ~ c exp(-lam v).
    p_end = phi(v_max)
    if p_end != 0.0:
        p_mid = phi(v_max - 20.0)
        p_lo = phi(v_max - 40.0)
        if p_mid == 0.0 or p_lo == 0.0 or (p_end > 0) != (p_mid > 0):
            raise IntegralDivergence("integrand does not decay toward singular endpoint")
        lam1 = math.log(abs(p_mid / p_end)) / 20.0
        lam2 = math.log(abs(p_lo / p_mid)) / 20.0
        if lam1 <= 1e-3 or lam2 <= 1e-3 or abs(lam1 - lam2) > 0.1 * lam1:
            raise IntegralDivergence("integrand does not decay toward singular endpoint")
        tail = p_end / lam1
        if abs(tail) > 1e-2 * max(abs(total), spec.abs_tol):
            raise IntegralDivergence("endpoint tail too heavy to certify convergence")
        total += tail
    if not math.isfinite(total):
        raise IntegralDivergence("non-finite result")
    return total


# ---------------------------------------------------------------------------
# Oscillatory integrals
# ---------------------------------------------------------------------------

_GRADE_RATIO = 0.25
_GRADE_BATCH = 32
_MAX_GRADE_LEVELS = 480


def _graded_integral(func, p1, m):
    """Integral of func over (0, p1] with geometric panels toward 0.

    Levels shrink by a factor 4; once the per-level contributions decay
    geometrically the remainder is summed in closed form.
    """
    x, w = gauss_legendre(m)
    total = 0.0
    prev = None
    last = None
    level = 0
    hi = p1
    while level < _MAX_GRADE_LEVELS:
        his = hi * _GRADE_RATIO ** np.arange(_GRADE_BATCH)
        los = his * _GRADE_RATIO
        widths = his - los
        r = los[:, None] + widths[:, None] * x[None, :]
        contrib = (func(r) @ w) * widths
        if not np.all(np.isfinite(contrib)):
            raise FloatingPointError("integrand evaluated to a non-finite value")
        for c in contrib:
            total += c
            prev, last = last, c
        level += _GRADE_BATCH
        hi = los[-1]
        if last == 0.0 or abs(last) <= 1e-15 * abs(total):
            return total
        if prev is not None and prev != 0.0:
            q = last / prev
            if 0.0 < q < 0.99 and abs(last * q / (1.0 - q)) <= 1e-13 * abs(total):
                return total + last * q / (1.0 - q)
    if prev is not None and prev != 0.0:
        q = last / prev
        if 0.0 < q < 1.0:
            return total + last * q / (1.0 - q)
    return total


def integrate_panels(func, edges, singular_origin: bool = True, m: int = 16) -> float:
    """Integral of func over (0, edges[-1]] split at the given panel edges.

    The first panel (0, edges[0]] is graded toward 0 when ``singular_origin``;
    every other panel gets a fixed m-point Gauss-Legendre rule.  Panel sums
    are reduced left to right.
    """
    edges = np.asarray(edges, dtype=float)
    x, w = gauss_legendre(m)
    p1 = float(edges[0])
    if singular_origin:
        total = _graded_integral(func, p1, m)
    else:
        total = float(func(p1 * x) @ w) * p1
    if edges.size > 1:
        lo = edges[:-1]
        widths = np.diff(edges)
        r = lo[:, None] + widths[:, None] * x[None, :]
        panels = (func(r) @ w) * widths
        if not np.all(np.isfinite(panels)):
            raise FloatingPointError("integrand evaluated to a non-finite value")
        for p in panels:
            total += p
    return total


def _pairwise_average(partials: np.ndarray, depth: int = 3) -> float:
    s = np.asarray(partials, dtype=float)
    for _ in range(depth):
        if s.size < 2:
            break
        s = 0.5 * (s[1:] + s[:-1])
    return float(s[-1])


def _oscillatory_single(g, length, omega, phase_fn, singular, spec):
    m = spec.gauss_points
    hp = 0.5 / omega
    scale = 2.0 * math.pi * omega

    def func(r):
        return g(r) * phase_fn(scale * r)

    if hp >= length:
        return integrate_panels(func, [length], singular, m)
    n_full = int(math.floor(length / hp + 1e-12))
    if n_full <= spec.max_subdivisions:
        edges = hp * np.arange(1, n_full + 1, dtype=float)
        if length - edges[-1] > 1e-14 * length:
            edges = np.append(edges, length)
        return integrate_panels(func, edges, singular, m)
    # Too many half periods: truncate and accelerate the partial sums.
    edges = hp * np.arange(1, spec.max_subdivisions + 1, dtype=float)
    head = integrate_panels(func, edges[:-8], singular, m)
    x, w = gauss_legendre(m)
    lo = edges[-9:-1]
    r = lo[:, None] + hp * x[None, :]
    partials = head + np.cumsum((func(r) @ w) * hp)
    return _pairwise_average(partials, depth=3)


def _phase(phase: str):
    if phase == "sin":
        return np.sin
    if phase == "cos":
        return np.cos
    raise ValueError("phase must be 'sin' or 'cos'")


def integrate_oscillatory(
    g: Callable[[np.ndarray], np.ndarray],
    length: float,
    frequency: float,
    phase: str = "sin",
    singular_origin: bool = False,
    spec: QuadratureSpec = DEFAULT_SPEC,
) -> float:
    """Integral of ``g(r) * phase(2 pi frequency r)`` over ``(0, length]``.

    ``g`` must accept numpy arrays.  Panels follow the half-period lattice
    ``j / (2 frequency)``; if the panel count would exceed
    ``spec.max_subdivisions`` the partial sums are truncated and accelerated
    by three rounds of pairwise averaging.
    """
    if not frequency > 0 or not math.isfinite(frequency):
        raise ValueError("frequency must be positive and finite")
    if not length > 0:
        raise ValueError("length must be positive")
    return _oscillatory_single(g, float(length), float(frequency), _phase(phase),
                               singular_origin, spec)


def oscillatory_batch(g, length, frequencies, phase="sin", singular_origin=False,
                      spec: QuadratureSpec = DEFAULT_SPEC) -> np.ndarray:
    """Vectorised convenience wrapper over many frequencies."""
    freqs = np.asarray(frequencies, dtype=float)
    out = np.empty(freqs.shape)
    ph = _phase(phase)
    for idx, fr in np.ndenumerate(freqs):
        out[idx] = _oscillatory_single(g, float(length), float(fr), ph,
                                       singular_origin, spec)
    return out


def bessel_zero_panels(nu: float, frequency: float, length: float) -> np.ndarray:
    """Panel edges at the asymptotic zeros of J_nu(2 pi frequency t) in (0, length]."""
    scale = 2.0 * math.pi * frequency
    m_max = int(math.ceil(length * scale / math.pi + 1))
    m = np.arange(1, m_max + 1, dtype=float)
    zeros = math.pi * (m + nu / 2.0 - 0.25) / scale
    return zeros[zeros < length]


# ---------------------------------------------------------------------------
# Bessel functions
# ---------------------------------------------------------------------------

# Rational approximations for J1 (Cephes j1.c, S. L. Moshier).
_RP1 = np.array([-8.99971225705559398224e8, 4.52228297998194034323e11,
                 -7.27494245221818276015e13, 3.68295732863852883286e15])
_RQ1 = np.array([6.20836478118054335476e2, 2.56987256757748830383e5,
                 8.35146791431949253037e7, 2.21511595479792499675e10,
                 4.74914122079991414898e12, 7.84369607876235854894e14,
                 8.95222336184627338078e16, 5.32278620332680085395e18])
_PP1 = np.array([7.62125616208173112003e-4, 7.31397056940917570436e-2,
                 1.12719608129684925192e0, 5.11207951146807644818e0,
                 8.42404590141772420927e0, 5.21451598682361504063e0,
                 1.00000000000000000254e0])
_PQ1 = np.array([5.71323128072548699714e-4, 6.88455908754495404082e-2,
                 1.10514232634061696926e0, 5.07386386128601488557e0,
                 8.39985554327604159757e0, 5.20982848682361821619e0,
                 9.99999999999999997461e-1])
_QP1 = np.array([5.10862594750176621635e-2, 4.98213872951233449420e0,
                 7.58238284132545283818e1, 3.66779609360150777800e2,
                 7.10856304998926107277e2, 5.97489612400613639965e2,
                 2.11688757100572135698e2, 2.52070205858023719784e1])
_QQ1 = np.array([7.42373277035675149943e1, 1.05644886038262816351e3,
                 4.98641058337653607651e3, 9.56231892404756170795e3,
                 7.99704160447350683650e3, 2.82619278517639096600e3,
                 3.36093607810698293419e2])
_Z1 = 1.46819706421238932572e1
_Z2 = 4.92184563216946036703e1
_J1_SPLIT = 5.0


def _polevl(x, coef):
    ans = np.full_like(x, coef[0])
    for c in coef[1:]:
        ans = ans * x + c
    return ans


def _p1evl(x, coef):
    ans = x + coef[0]
    for c in coef[1:]:
        ans = ans * x + c
    return ans


def _j1(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    small = x <= _J1_SPLIT
    if np.any(small):
        xs = x[small]
        z = xs * xs
        w = _polevl(z, _RP1) / _p1evl(z, _RQ1)
        out[small] = w * xs * (z - _Z1) * (z - _Z2)
    big = ~small
    if np.any(big):
        xb = x[big]
        w = 5.0 / xb
        z = w * w
        p = _polevl(z, _PP1) / _polevl(z, _PQ1)
        q = _polevl(z, _QP1) / _p1evl(z, _QQ1)
        xn = xb - 0.75 * math.pi
        out[big] = math.sqrt(2.0 / math.pi) * (p * np.cos(xn) - w * q * np.sin(xn)) / np.sqrt(xb)
    return out


def _sin_over_x_minus_cos(x: np.ndarray) -> np.ndarray:
    """sin(x)/x - cos(x) without cancellation for small x."""
    out = np.empty_like(x)
    small = x < 1.0
    xs = x[small]
    z = xs * xs
    acc = np.zeros_like(xs)
    term = np.ones_like(xs)
    # sum_{m>=1} (-1)^(m+1) 2m x^(2m) / (2m+1)!
    fact = 1.0
    for m in range(1, 12):
        term = term * z
        fact *= (2 * m) * (2 * m + 1)
        acc += (-1) ** (m + 1) * 2 * m * term / fact
    out[small] = acc
    xb = x[~small]
    out[~small] = np.sin(xb) / xb - np.cos(xb)
    return out


def bessel_j(nu: float, x) -> np.ndarray | float:
    """Bessel function of the first kind for nu in {1/2, 1, 3/2}, x >= 0."""
    arr = np.asarray(x, dtype=float)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    if np.any(~np.isfinite(arr)):
        raise ValueError("x must be finite")
    if np.any(arr < 0):
        raise ValueError("bessel_j is defined here for x >= 0 only")
    out = np.zeros_like(arr)
    pos = arr > 0
    xp = arr[pos]
    if nu == 0.5:
        out[pos] = np.sqrt(2.0 / (math.pi * xp)) * np.sin(xp)
    elif nu == 1 or nu == 1.0:
        out[pos] = _j1(xp)
    elif nu == 1.5:
        out[pos] = np.sqrt(2.0 / (math.pi * xp)) * _sin_over_x_minus_cos(xp)
    else:
        raise ValueError("nu must be one of 1/2, 1, 3/2")
    return float(out[0]) if scalar else out
