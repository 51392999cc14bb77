"""Radial kernels, the example catalog, and sampled hypothesis checks.

A kernel is described entirely by its radial profile ``rho_bar(t)``.  The
quantity that most checks look at is ``f(t) = t**(n-2) * rho_bar(t)``.

Checks are sampled on log-spaced radii (512 per decade over
``[1e-8 delta, delta]``).  Exponent fitting for the almost-monotone
conditions additionally uses a closed-form ``log_profile`` when the kernel
supplies one, which allows sampling thousands of decades below the
floating-point range of ``t`` itself.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .quadrature import IntegralDivergence, integrate_graded

__all__ = [
    "RadialKernel",
    "KernelCatalogEntry",
    "HypothesisReport",
    "KernelEvaluationError",
    "KernelConfigError",
    "make_catalog_kernel",
    "power_kernel",
    "zero_kernel",
    "sample_radii",
    "check_h0",
    "check_h1",
    "check_h2",
    "check_h3_h4",
    "classify_growth",
    "t2f_limit_check",
    "check_hypotheses",
    "load_kernel_config",
    "sphere_area",
    "CATALOG_KINDS",
]

CATALOG_KINDS = ("indicator_riesz", "smooth_riesz", "log_enhanced", "log_damped",
                 "variable_exponent")

ALMOST_MONOTONE_SLACK = 10.0
EXPONENT_LATTICE = 1000
DEEP_DECADES = 4000


class KernelEvaluationError(ValueError):
    """The profile produced negative or non-finite values."""


class KernelConfigError(ValueError):
    """Malformed kernel configuration file."""


def sphere_area(n: int) -> float:
    """Surface measure of the unit sphere in R^n (2, 2 pi, 4 pi)."""
    return {1: 2.0, 2: 2.0 * math.pi, 3: 4.0 * math.pi}[n]


Profile = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class RadialKernel:
    """Radial kernel rho(x) = profile(|x|) supported in the ball of radius delta.

    ``log_profile`` is optional: a closed form of ``log(profile(exp(l)))``
    valid for ``exp(l) <= epsilon`` that stays finite where ``exp(l)``
    underflows.  ``meta`` holds catalog parameters such as ``s``.
    """

    n: int
    profile: Profile
    delta: float
    epsilon: float
    profile_dt: Optional[Profile] = None
    label: str = "kernel"
    log_profile: Optional[Callable[[np.ndarray], np.ndarray]] = None
    meta: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self) -> None:
        if self.n not in (1, 2, 3):
            raise ValueError("dimension n must be 1, 2 or 3")
        if not (self.delta > 0 and math.isfinite(self.delta)):
            raise ValueError("delta must be positive and finite")
        if not (0 < self.epsilon <= self.delta):
            raise ValueError("epsilon must lie in (0, delta]")

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            val = np.asarray(self.profile(t), dtype=float)
        return np.where(t > self.delta, 0.0, val)

    def scalar(self, t: float) -> float:
        return float(self(t))

    def rho(self, x: np.ndarray) -> np.ndarray:
        """Kernel at points ``x`` of shape (..., n)."""
        r = np.linalg.norm(np.asarray(x, dtype=float), axis=-1)
        return self(r)

    def f(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return t ** (self.n - 2) * self(t)

    def scaled(self, alpha: float) -> "RadialKernel":
        prof, dprof, lprof = self.profile, self.profile_dt, self.log_profile
        return replace(
            self,
            profile=lambda t: alpha * prof(t),
            profile_dt=None if dprof is None else (lambda t: alpha * dprof(t)),
            log_profile=None if lprof is None else (lambda l: math.log(alpha) + lprof(l)),
            label=f"{alpha:g}*{self.label}",
        )


# ---------------------------------------------------------------------------
# Catalog
# ---------------------------------------------------------------------------

_CHI_PLATEAU = 0.6


def _smootherstep(u):
    u = np.clip(u, 0.0, 1.0)
    return u**5 * (126 - 420 * u + 540 * u**2 - 315 * u**3 + 70 * u**4)


def _smootherstep_dt(u):
    inside = (u > 0) & (u < 1)
    u = np.clip(u, 0.0, 1.0)
    d = 630 * u**4 * (1 - u) ** 4
    return np.where(inside, d, 0.0)


def _bump_chi(delta):
    """Polynomial cutoff: 1 on [0, 0.6 delta], C^4 decay to 0 at delta."""
    width = (1.0 - _CHI_PLATEAU) * delta

    def chi(t):
        return np.maximum(0.0, 1.0 - _smootherstep((np.asarray(t) - _CHI_PLATEAU * delta) / width))

    def chi_dt(t):
        return -_smootherstep_dt((np.asarray(t) - _CHI_PLATEAU * delta) / width) / width

    return chi, chi_dt


def _indicator_chi(delta):
    def chi(t):
        return np.where(np.asarray(t) <= delta, 1.0, 0.0)

    def chi_dt(t):
        return np.zeros_like(np.asarray(t, dtype=float))

    return chi, chi_dt


@dataclass(frozen=True)
class KernelCatalogEntry:
    """One of the catalog kernel families with its parameters.

    For ``variable_exponent`` the exponent is ``s_func(t)`` if given, otherwise
    ``s + s_amp * step((t - epsilon)/(delta - epsilon))`` with a smooth step,
    so the exponent is constant on ``[0, epsilon]`` and rises beyond it.
    """

    kind: str
    s: float = 0.5
    delta: Optional[float] = None
    epsilon: Optional[float] = None
    chi: str = "indicator"
    s_amp: Optional[float] = None
    s_func: Optional[Callable[[np.ndarray], np.ndarray]] = None
    s_func_dt: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __post_init__(self) -> None:
        if self.kind not in CATALOG_KINDS:
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if not (0.0 < self.s < 1.0):
            raise ValueError("s must lie in (0, 1)")
        if self.chi not in ("indicator", "bump"):
            raise ValueError("chi must be 'indicator' or 'bump'")


def _default_delta(kind: str) -> float:
    return 0.5 if kind == "log_damped" else 1.0


def make_catalog_kernel(entry: KernelCatalogEntry, n: int) -> RadialKernel:
    """Build the RadialKernel for a catalog entry in dimension ``n``."""
    if n not in (1, 2, 3):
        raise ValueError("dimension n must be 1, 2 or 3")
    kind, s = entry.kind, entry.s
    delta = float(entry.delta) if entry.delta is not None else _default_delta(kind)
    eps = float(entry.epsilon) if entry.epsilon is not None else 0.5 * delta
    if kind in ("log_enhanced", "log_damped") and delta >= 1.0 and kind == "log_damped":
        raise ValueError("log_damped needs delta < 1 (the profile blows up at t = 1)")
    if kind == "log_enhanced" and delta > 1.0:
        raise ValueError("log_enhanced needs delta <= 1")
    chi_kind = "bump" if kind == "smooth_riesz" else entry.chi
    chi, chi_dt = (_bump_chi if chi_kind == "bump" else _indicator_chi)(delta)
    alpha = n + s - 1.0
    meta = {"kind": kind, "s": s, "chi": chi_kind}

    if kind in ("indicator_riesz", "smooth_riesz"):
        def core(t):
            return t ** (-alpha)

        def core_dt(t):
            return -alpha * t ** (-alpha - 1.0)

        def core_log(l):
            return -alpha * l

        meta.update(sigma=s, gamma=s)
    elif kind == "log_enhanced":
        def core(t):
            return -np.log(t) * t ** (-alpha)

        def core_dt(t):
            return t ** (-alpha - 1.0) * (-1.0 + alpha * np.log(t))

        def core_log(l):
            return np.log(-l) - alpha * l

        meta.update(sigma=s)
    elif kind == "log_damped":
        def core(t):
            return t ** (-alpha) / (-np.log(t))

        def core_dt(t):
            L = -np.log(t)
            return t ** (-alpha - 1.0) * (-alpha / L + 1.0 / L**2)

        def core_log(l):
            return -alpha * l - np.log(-l)

        meta.update(gamma=s)
    else:  # variable_exponent
        if entry.s_func is not None:
            s_of, s_dt = entry.s_func, entry.s_func_dt
        else:
            amp = entry.s_amp if entry.s_amp is not None else 0.2 * min(s, 1.0 - s)
            span = delta - eps

            def s_of(t, amp=amp):
                return s + amp * _smootherstep((np.asarray(t) - eps) / span) if span > 0 else s + 0 * t

            def s_dt(t, amp=amp):
                return amp * _smootherstep_dt((np.asarray(t) - eps) / span) / span if span > 0 else 0 * t

        probe = s_of(np.linspace(0.0, delta, 1001))
        if np.any(probe <= 0) or np.any(probe >= 1):
            raise ValueError("variable exponent must stay inside (0, 1)")
        near = s_of(np.linspace(0.0, eps, 1001))
        meta.update(sigma=float(np.min(near)), gamma=float(np.max(near)))

        def core(t):
            return t ** (-(n - 1.0 + s_of(t)))

        def core_dt(t):
            if s_dt is None:
                raise NotImplementedError
            base = core(t)
            return base * (-(n - 1.0 + s_of(t)) / t - s_dt(t) * np.log(t))

        def core_log(l):
            return -(n - 1.0 + s_of(np.exp(l))) * l

    def profile(t):
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            val = np.where((t > 0) & (t <= delta), core(np.where(t > 0, t, 1.0)) * chi(t), 0.0)
        return val

    def profile_dt(t):
        t = np.asarray(t, dtype=float)
        tt = np.where((t > 0) & (t < delta), t, 0.5 * delta)
        val = core_dt(tt) * chi(tt) + core(tt) * chi_dt(tt)
        return np.where((t > 0) & (t < delta), val, 0.0)

    def log_profile(l):
        l = np.asarray(l, dtype=float)
        t = np.exp(l)
        with np.errstate(divide="ignore"):
            logchi = np.log(chi(t))
        return core_log(l) + logchi

    has_dt = not (kind == "variable_exponent" and entry.s_func is not None and entry.s_func_dt is None)
    label = f"{kind}(s={s:g})" + ("" if chi_kind == "indicator" or kind == "smooth_riesz" else "[bump]")
    return RadialKernel(
        n=n,
        profile=profile,
        delta=delta,
        epsilon=eps,
        profile_dt=profile_dt if has_dt else None,
        label=label,
        log_profile=log_profile,
        meta=meta,
    )


def power_kernel(n: int, exponent: float, delta: float = 1.0,
                 epsilon: Optional[float] = None) -> RadialKernel:
    """Profile ``t**(-exponent)`` on ``(0, delta]``, zero beyond."""
    p = float(exponent)

    def profile(t):
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            return np.where((t > 0) & (t <= delta), np.where(t > 0, t, 1.0) ** (-p), 0.0)

    def profile_dt(t):
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            return np.where((t > 0) & (t < delta), -p * np.where(t > 0, t, 1.0) ** (-p - 1), 0.0)

    return RadialKernel(
        n=n,
        profile=profile,
        delta=delta,
        epsilon=epsilon if epsilon is not None else 0.5 * delta,
        profile_dt=profile_dt,
        label=f"power(t^-{p:g})",
        log_profile=lambda l: -p * np.asarray(l, dtype=float),
        meta={"kind": "power", "exponent": p},
    )


def zero_kernel(n: int, delta: float = 1.0) -> RadialKernel:
    return RadialKernel(n=n, profile=lambda t: np.zeros_like(np.asarray(t, dtype=float)),
                        delta=delta, epsilon=0.5 * delta, label="zero")


# ---------------------------------------------------------------------------
# Reports and checks
# ---------------------------------------------------------------------------


@dataclass
class HypothesisReport:
    h0_ok: Optional[bool] = None
    h1_ok: Optional[bool] = None
    h2_ok: Optional[bool] = None
    h3_ok: Optional[bool] = None
    h4_ok: Optional[bool] = None
    mu: Optional[float] = None
    sigma: Optional[float] = None
    gamma: Optional[float] = None
    ck: list = field(default_factory=list)
    limit_class: Optional[str] = None
    notes: list = field(default_factory=list)

    def merge(self, other: "HypothesisReport") -> "HypothesisReport":
        for name in ("h0_ok", "h1_ok", "h2_ok", "h3_ok", "h4_ok", "mu", "sigma",
                     "gamma", "limit_class"):
            val = getattr(other, name)
            if val is not None:
                setattr(self, name, val)
        if other.ck:
            self.ck = list(other.ck)
        self.notes.extend(other.notes)
        return self

    @property
    def all_ok(self) -> bool:
        return all(bool(v) for v in (self.h0_ok, self.h1_ok, self.h2_ok, self.h3_ok, self.h4_ok))


def sample_radii(kernel: RadialKernel, per_decade: int = 512, decades: int = 8) -> np.ndarray:
    """Log-spaced radii over [10**-decades * delta, delta]."""
    count = per_decade * decades + 1
    return kernel.delta * np.logspace(-decades, 0, count)


def _evaluate(kernel: RadialKernel, t: np.ndarray) -> np.ndarray:
    vals = kernel(t)
    if not np.all(np.isfinite(vals)):
        bad = t[~np.isfinite(vals)][0]
        raise KernelEvaluationError(f"profile is not finite at t={bad:.3e}")
    return vals


def check_h0(kernel: RadialKernel, grid: Optional[np.ndarray] = None) -> HypothesisReport:
    """Nonnegativity, the two integrability conditions, and positivity near 0."""
    grid = sample_radii(kernel) if grid is None else np.asarray(grid, dtype=float)
    vals = _evaluate(kernel, grid)
    rep = HypothesisReport()
    ok = True
    if np.any(vals < 0):
        rep.notes.append("profile takes negative values")
        ok = False
    n, delta, eps = kernel.n, kernel.delta, kernel.epsilon
    near = vals[grid <= eps]
    inf_near = float(np.min(near)) if near.size else 0.0
    if not inf_near > 0:
        rep.notes.append("inf of profile on (0, epsilon] is not positive")
        ok = False
    if ok:
        try:
            integrate_graded(lambda t: kernel.scalar(t) * t ** (n - 1), 0.0, delta, True)
        except IntegralDivergence as exc:
            rep.notes.append(f"int_0^delta rho t^(n-1) dt diverges: {exc}")
            ok = False
    if ok:
        r = min(eps, delta)
        try:
            integrate_graded(lambda t: kernel.scalar(t) * t ** (n - 2), r, delta, False)
        except IntegralDivergence as exc:
            rep.notes.append(f"int_r^delta rho t^(n-2) dt diverges: {exc}")
            ok = False
    rep.h0_ok = ok
    return rep


def check_h1(kernel: RadialKernel, grid: Optional[np.ndarray] = None) -> HypothesisReport:
    """Monotone decrease of f and the doubling constant mu on (0, epsilon)."""
    grid = sample_radii(kernel) if grid is None else np.asarray(grid, dtype=float)
    rep = HypothesisReport()
    fvals = grid ** (kernel.n - 2) * _evaluate(kernel, grid)
    rises = np.diff(fvals) > 1e-12 * np.abs(fvals[:-1])
    decreasing = not np.any(rises)
    if not decreasing:
        where = grid[1:][rises][0]
        rep.notes.append(f"f increases near t={where:.4g}")
    t = grid[(grid < kernel.epsilon)]
    f_t = t ** (kernel.n - 2) * kernel(t)
    f_half = (t / 2) ** (kernel.n - 2) * kernel(t / 2)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = f_t / f_half
    if t.size == 0 or not np.all(np.isfinite(ratios)):
        rep.h1_ok = False
        rep.notes.append("doubling ratio undefined on samples")
        return rep
    mu = float(np.max(ratios))
    # round up by a few ulps so that mu*f(t/2) >= f(t) holds as computed
    mu = float(np.nextafter(np.nextafter(mu, np.inf), np.inf))
    rep.mu = mu if 0 < mu < 1 else None
    rep.h1_ok = bool(decreasing and 0 < mu < 1)
    if not 0 < mu < 1:
        rep.notes.append(f"doubling ratio sup f(t)/f(t/2) = {mu:.4g} is not < 1")
    return rep


def _central_diff(fun, t, h, order):
    if order == 1:
        return (fun(t + h) - fun(t - h)) / (2 * h)
    if order == 2:
        return (fun(t + h) - 2 * fun(t) + fun(t - h)) / h**2
    if order == 3:
        return (fun(t + 2 * h) - 2 * fun(t + h) + 2 * fun(t - h) - fun(t - 2 * h)) / (2 * h**3)
    if order == 4:
        return (fun(t + 2 * h) - 4 * fun(t + h) + 6 * fun(t) - 4 * fun(t - h)
                + fun(t - 2 * h)) / h**4
    raise ValueError("order must be 1..4")


_FD_STEP = {1: 1e-3, 2: 1e-3, 3: 1e-2, 4: 1e-2}


def check_h2(kernel: RadialKernel, grid: Optional[np.ndarray] = None,
             k_max: int = 4) -> HypothesisReport:
    """Smoothness bounds on f over (0, epsilon).

    ``ck[0]`` is the smallest C with -C f' >= f/t; ``ck[k]`` bounds
    |f^(k)| t^k / f for k = 1..k_max.  Derivatives come from central finite
    differences at relative steps eta and eta/2; disagreement between the two
    beyond 5% flags a non-smooth profile.
    """
    if not 1 <= k_max <= 4:
        raise ValueError("k_max must be between 1 and 4")
    grid = sample_radii(kernel) if grid is None else np.asarray(grid, dtype=float)
    margin = 1.0 - 3.0 * max(_FD_STEP.values())
    t = grid[grid < kernel.epsilon * margin]
    rep = HypothesisReport()
    f = kernel.f
    ft = f(t)
    if np.any(ft <= 0) or not np.all(np.isfinite(ft)):
        rep.h2_ok = False
        rep.notes.append("f not positive and finite on (0, epsilon)")
        return rep

    if kernel.profile_dt is not None:
        dfdt = (kernel.n - 2) * t ** (kernel.n - 3) * kernel(t) + t ** (kernel.n - 2) * kernel.profile_dt(t)
    else:
        dfdt = _central_diff(f, t, 1e-5 * t, 1)
    ok = True
    if np.any(dfdt >= 0):
        ok = False
        rep.notes.append("f' is not negative on (0, epsilon)")
        c0 = math.inf
    else:
        c0 = float(np.max(ft / (t * -dfdt)))
    ck = [c0]
    for order in range(1, k_max + 1):
        eta = _FD_STEP[order]
        d1 = _central_diff(f, t, eta * t, order)
        d2 = _central_diff(f, t, 0.5 * eta * t, order)
        scale = t**order / ft
        r1, r2 = np.abs(d1) * scale, np.abs(d2) * scale
        mismatch = np.abs(d1 - d2) * scale / np.maximum(1.0, r2)
        if not np.all(np.isfinite(mismatch)) or np.max(mismatch) > 0.05:
            ok = False
            where = t[np.argmax(np.where(np.isfinite(mismatch), mismatch, np.inf))]
            rep.notes.append(f"order-{order} finite differences unstable near t={where:.4g}")
        ck.append(float(np.max(r2)))
    rep.ck = ck
    rep.h2_ok = bool(ok and math.isfinite(c0))
    return rep


def _log_samples(kernel: RadialKernel, deep: bool):
    """Log-radii (increasing) on (0, epsilon) and log of t^(n-1) rho_bar."""
    eps = kernel.epsilon
    fine = np.log(sample_radii(kernel))
    fine = fine[fine < math.log(eps)]
    if deep and kernel.log_profile is not None:
        top = math.log(eps)
        coarse = np.linspace(top - DEEP_DECADES * math.log(10.0), fine[0], DEEP_DECADES * 32,
                             endpoint=False)
        l = np.concatenate([coarse, fine])
        with np.errstate(divide="ignore", invalid="ignore"):
            lv = (kernel.n - 1) * l + np.asarray(kernel.log_profile(l), dtype=float)
    else:
        l = fine
        with np.errstate(divide="ignore"):
            lv = (kernel.n - 1) * l + np.log(_evaluate(kernel, np.exp(l)))
    return l, lv


def _rise_violation(l, lv, expo):
    """max over t < t' of log g(t') - log g(t) for g = t^expo * t^(n-1) rho."""
    g = expo * l + lv
    later_max = np.maximum.accumulate(g[::-1])[::-1]
    return float(np.max(later_max - g))


def _fall_violation(l, lv, expo):
    """max over t < t' of log h(t) - log h(t') for h = t^expo * t^(n-1) rho."""
    g = expo * l + lv
    later_min = np.minimum.accumulate(g[::-1])[::-1]
    return float(np.max(g - later_min))


def check_h3_h4(kernel: RadialKernel, grid: Optional[np.ndarray] = None) -> HypothesisReport:
    """Fit sigma (largest) and gamma (smallest) on a 1e-3 lattice.

    sigma: t^(n+sigma-1) rho_bar almost decreasing on (0, epsilon) with slack 10.
    gamma: t^(n+gamma-1) rho_bar almost increasing on (0, epsilon) with slack 10.
    """
    rep = HypothesisReport()
    deep = kernel.log_profile is not None and grid is None
    l, lv = _log_samples(kernel, deep)
    if not np.all(np.isfinite(lv)):
        rep.h3_ok = rep.h4_ok = False
        rep.notes.append("profile vanishes or is infinite on (0, epsilon)")
        return rep
    if not deep:
        rep.notes.append("exponents fitted on the finite sample grid only; resolution is coarse")
    slack = math.log(ALMOST_MONOTONE_SLACK)
    lattice = np.arange(1, EXPONENT_LATTICE) / EXPONENT_LATTICE

    # sigma: violation increases with the exponent
    if _rise_violation(l, lv, lattice[0]) > slack:
        rep.h3_ok = False
        rep.notes.append("no sigma in (0,1) makes t^(n+sigma-1) rho almost decreasing")
    else:
        lo, hi = 0, len(lattice) - 1
        if _rise_violation(l, lv, lattice[hi]) <= slack:
            lo = hi
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if _rise_violation(l, lv, lattice[mid]) <= slack:
                lo = mid
            else:
                hi = mid
        rep.sigma = float(lattice[lo])
        rep.h3_ok = True

    # gamma: violation decreases with the exponent
    if _fall_violation(l, lv, lattice[-1]) > slack:
        rep.h4_ok = False
        rep.notes.append("no gamma in (0,1) makes t^(n+gamma-1) rho almost increasing")
    else:
        lo, hi = 0, len(lattice) - 1
        if _fall_violation(l, lv, lattice[0]) <= slack:
            hi = 0
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if _fall_violation(l, lv, lattice[mid]) <= slack:
                hi = mid
            else:
                lo = mid
        rep.gamma = float(lattice[hi])
        rep.h4_ok = True
    return rep


def classify_growth(kernel: RadialKernel, tol_residual: float = 0.05) -> str:
    """Classify lim t^(n-1) rho_bar(t) as t -> 0 by a log-log slope fit."""
    l = np.linspace(math.log(1e-8 * kernel.delta), math.log(1e-4 * kernel.delta), 257)
    if kernel.log_profile is not None:
        lv = (kernel.n - 1) * l + np.asarray(kernel.log_profile(l), dtype=float)
    else:
        with np.errstate(divide="ignore"):
            lv = (kernel.n - 1) * l + np.log(_evaluate(kernel, np.exp(l)))
    if not np.all(np.isfinite(lv)):
        return "inconclusive"
    slope, intercept = np.polyfit(l, lv, 1)
    resid = lv - (slope * l + intercept)
    if float(np.sqrt(np.mean(resid**2))) > tol_residual:
        return "inconclusive"
    if abs(slope) < 0.02:
        return "bounded_positive"
    return "vanishes" if slope > 0 else "diverges"


def t2f_limit_check(kernel: RadialKernel, k_max: int = 40) -> bool:
    """Whether t^2 f(t) -> 0 along t_k = epsilon 2^-k.

    True when the tail of the sequence is strictly decreasing and either drops
    below 1e-6 eps^2 f(eps) by k_max, or decays geometrically (ratio <= 0.99)
    fast enough that extrapolation crosses that level within 1000 halvings.
    """
    eps = kernel.epsilon
    t = eps * 2.0 ** -np.arange(0, k_max + 1)
    v = t**2 * kernel.f(t)
    if not np.all(np.isfinite(v)) or v[0] <= 0:
        return False
    threshold = 1e-6 * v[0]
    tail = v[-10:]
    if not np.all(np.diff(tail) < 0):
        return False
    if tail[-1] < threshold:
        return True
    ratio = float(np.exp(np.mean(np.diff(np.log(tail)))))
    if ratio > 0.99:
        return False
    needed = math.log(threshold / tail[-1]) / math.log(ratio)
    return needed <= 1000


def check_hypotheses(kernel: RadialKernel, k_max: int = 4) -> HypothesisReport:
    """Run every check and merge the partial reports."""
    rep = check_h0(kernel)
    if not rep.h0_ok:
        rep.h1_ok = rep.h2_ok = rep.h3_ok = rep.h4_ok = False
        rep.notes.append("later hypotheses skipped because (H0) failed")
        return rep
    rep.merge(check_h1(kernel))
    rep.merge(check_h2(kernel, k_max=k_max))
    rep.merge(check_h3_h4(kernel))
    rep.limit_class = classify_growth(kernel)
    if rep.sigma is not None and rep.gamma is not None and rep.sigma > rep.gamma:
        rep.notes.append("fitted sigma exceeds gamma")
    return rep


# ---------------------------------------------------------------------------
# Config files
# ---------------------------------------------------------------------------


def load_kernel_config(path: str | Path) -> RadialKernel:
    """Parse an INI file with a [kernel] section into a RadialKernel.

    Keys: kind, s, delta, epsilon, n, chi (indicator|bump).  Two extra kinds
    are accepted for experiments: ``power`` (key ``exponent``) and ``zero``.
    """
    path = Path(path)
    if not path.is_file():
        raise KernelConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser()
    try:
        parser.read_string(path.read_text())
    except configparser.Error as exc:
        raise KernelConfigError(str(exc)) from exc
    if "kernel" not in parser:
        raise KernelConfigError("missing [kernel] section")
    sec = parser["kernel"]

    def num(key, default=None, cast=float):
        raw = sec.get(key)
        if raw is None or raw.strip() == "":
            return default
        try:
            return cast(raw.strip())
        except ValueError as exc:
            raise KernelConfigError(f"bad value for {key}: {raw!r}") from exc

    kind = (sec.get("kind") or "").strip()
    n = num("n", 1, int)
    delta = num("delta")
    eps = num("epsilon")
    try:
        if kind == "power":
            exponent = num("exponent")
            if exponent is None:
                raise KernelConfigError("kind=power needs an exponent")
            return power_kernel(n, exponent, delta if delta else 1.0, eps)
        if kind == "zero":
            return zero_kernel(n, delta if delta else 1.0)
        entry = KernelCatalogEntry(
            kind=kind,
            s=num("s", 0.5),
            delta=delta,
            epsilon=eps,
            chi=(sec.get("chi") or "indicator").strip(),
            s_amp=num("s_amp"),
        )
        return make_catalog_kernel(entry, n)
    except KernelConfigError:
        raise
    except ValueError as exc:
        raise KernelConfigError(str(exc)) from exc
