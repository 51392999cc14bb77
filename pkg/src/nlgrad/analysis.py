"""Poincare constants, compactness diagnostics, moduli of continuity and embedding checks."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import fft as sfft
from scipy.sparse.linalg import LinearOperator, cg

from .fields import GridField, GridSpec, GridVectorField, lp_norm
from .ftc import omega
from .kernels import RadialKernel, check_h3_h4
from .operators import _freqs, gradient_fft, paired_modes, potential_on_torus
from .potential import PotentialTable, tabulate_Q
from .symbol import qhat

__all__ = [
    "PoincareReport",
    "CompactnessReport",
    "ModulusProfile",
    "OrliczVerdict",
    "poincare_estimate",
    "compactness_proxy",
    "modulus_profile",
    "translation_estimate",
    "morrey_check",
    "orlicz_condition_check",
    "MORREY_SEED",
]

MORREY_SEED = 0x6E6C6772


@dataclass
class PoincareReport:
    resolutions: list
    sigma_min: list
    poincare_constant: list
    trend: float
    converged: list = field(default_factory=list)
    iterations: list = field(default_factory=list)


def _box_points(region: Sequence, h: float) -> tuple:
    """Lattice points h*Z^n strictly inside the box ``region`` = [(a, b), ...]."""
    counts, starts = [], []
    for a, b in region:
        j0 = math.floor(a / h) + 1
        j1 = math.ceil(b / h) - 1
        if j1 < j0:
            raise ValueError("the region contains no interior grid points")
        counts.append(j1 - j0 + 1)
        starts.append(j0 * h)
    return tuple(counts), tuple(starts)


def _normal_operator(kernel: RadialKernel, table: PotentialTable, h: float, counts: tuple):
    """Matrix-free A^T A for A: interior values -> FFT-route gradient on R^n."""
    n = len(counts)
    m = int(math.ceil(kernel.delta / h))
    shape = tuple(sfft.next_fast_len(c + 2 * m + 4, real=True) for c in counts)
    q = potential_on_torus(kernel, table, h, shape)
    qhat_grid = sfft.rfftn(q).real * h**n
    freqs = _freqs(shape, h)
    mag2 = sum(f**2 for f in freqs)
    symbol2 = (4 * math.pi**2) * mag2 * qhat_grid**2 * paired_modes(shape)
    crop = tuple(slice(0, c) for c in counts)
    size = math.prod(counts)

    def apply(x):
        big = np.zeros(shape)
        big[crop] = x.reshape(counts)
        out = sfft.irfftn(symbol2 * sfft.rfftn(big), shape)
        return out[crop].reshape(-1)

    return LinearOperator((size, size), matvec=apply, dtype=float), apply


def _smallest_singular(op, apply, size: int, cg_tol: float, cg_maxiter: int,
                       max_outer: int = 400, tol: float = 1e-6):
    rng = np.random.default_rng(12345)
    x = np.ones(size) + 0.01 * rng.standard_normal(size)
    x /= np.linalg.norm(x)
    mu_old = math.inf
    ok = True
    outer = 0
    settled = False
    for outer in range(1, max_outer + 1):
        y, info = cg(op, x, rtol=cg_tol, maxiter=cg_maxiter)
        if info != 0:
            ok = False
        x = y / np.linalg.norm(y)
        mu = float(np.dot(x, apply(x)))
        if abs(mu - mu_old) <= tol * mu:
            settled = True
            break
        mu_old = mu
    ok = ok and settled
    return math.sqrt(max(mu, 0.0)), ok, outer


def poincare_estimate(kernel: RadialKernel, omega_region: Sequence,
                      resolutions: Sequence[float], table: Optional[PotentialTable] = None,
                      cg_tol: float = 1e-8, cg_maxiter: int = 10_000) -> PoincareReport:
    """Smallest singular value of u -> D u on fields vanishing outside a box.

    Inverse iteration on A^T A with conjugate-gradient inner solves; h-weighted
    norms on both sides cancel, so sigma_min is discretization-consistent.
    """
    region = [tuple(map(float, ab)) for ab in omega_region]
    if len(region) != kernel.n:
        raise ValueError("region needs one interval per dimension")
    table = tabulate_Q(kernel) if table is None else table
    sig, conv, iters = [], [], []
    for h in resolutions:
        counts, _ = _box_points(region, h)
        op, apply = _normal_operator(kernel, table, h, counts)
        s, ok, it = _smallest_singular(op, apply, math.prod(counts), cg_tol, cg_maxiter)
        sig.append(s)
        conv.append(ok)
        iters.append(it)
    hs = np.asarray(resolutions, dtype=float)
    trend = float(np.polyfit(np.log(hs), np.log(sig), 1)[0]) if len(hs) >= 2 else math.nan
    return PoincareReport(list(hs), sig, [1.0 / s if s > 0 else math.inf for s in sig],
                          trend, conv, iters)


@dataclass
class CompactnessReport:
    k: np.ndarray
    M: np.ndarray
    decays: bool
    exponent: float


def compactness_proxy(kernel: RadialKernel, k_max: float = 2000.0, samples: int = 48,
                      method: str = "bessel") -> CompactnessReport:
    """M(k) = 1/(2 pi k Qhat(k)) on [4/epsilon, k_max] and its log-log slope."""
    k0 = 4.0 / kernel.epsilon
    if k_max <= k0:
        raise ValueError("k_max must exceed 4/epsilon")
    ks = np.logspace(math.log10(k0), math.log10(k_max), samples)
    M = np.array([1.0 / (2 * math.pi * k * qhat(kernel, float(k), method)) for k in ks])
    slope = float(np.polyfit(np.log(ks), np.log(M), 1)[0])
    # a power decay must be resolvable at the fit tolerance of 0.05
    decays = bool(slope < -0.05 and M[-1] < M[0])
    return CompactnessReport(ks, M, decays, slope)


@dataclass
class ModulusProfile:
    alpha: float
    t_samples: np.ndarray
    omega: np.ndarray
    omega_alpha: np.ndarray
    sigma: float
    gamma: float
    envelope_constant: float
    almost_increasing_constant: float


def modulus_profile(kernel: RadialKernel, p: float, sigma: Optional[float] = None,
                    gamma: Optional[float] = None, decades: int = 8,
                    per_decade: int = 64) -> ModulusProfile:
    """omega on (10^-decades delta, epsilon) with the envelope constant
    C = max(sup omega t^-sigma, sup t^gamma / omega)."""
    if sigma is None or gamma is None:
        rep = check_h3_h4(kernel)
        sigma = rep.sigma if sigma is None else sigma
        gamma = rep.gamma if gamma is None else gamma
    if sigma is None or gamma is None:
        raise ValueError("envelope exponents are unavailable for this kernel")
    n = kernel.n
    t = np.logspace(math.log10(kernel.delta) - decades, math.log10(kernel.epsilon), decades * per_decade)
    t = t[t < kernel.epsilon]
    w = omega(kernel, t)
    C = float(max(np.max(w * t ** (-sigma)), np.max(t**gamma / w)))
    # almost increasing: omega(t) <= K omega(t') whenever t < t'
    later_max = np.maximum.accumulate(w[::-1])[::-1]
    K = float(np.max(w / later_max))
    alpha = n / p
    return ModulusProfile(alpha, t, w, w * t ** (-alpha), float(sigma), float(gamma), C, K)


def _shift(data: np.ndarray, steps: Sequence[int]) -> np.ndarray:
    """v(x + zeta) with zero fill, zeta = steps * h."""
    out = np.zeros_like(data)
    src, dst = [], []
    for s, L in zip(steps, data.shape):
        if s >= 0:
            src.append(slice(s, L))
            dst.append(slice(0, L - s))
        else:
            src.append(slice(0, L + s))
            dst.append(slice(-s, L))
    out[tuple(dst)] = data[tuple(src)]
    return out


def translation_estimate(kernel: RadialKernel, u: GridField, shifts: Sequence[float],
                         p: float = 2.0, G: Optional[GridVectorField] = None,
                         table: Optional[PotentialTable] = None) -> dict:
    """|u - u(. + zeta)|_p / (omega(|zeta|) |G u|_p) for shifts along the first axis.

    ``shifts`` are physical lengths; each must be a lattice multiple and below epsilon/3.
    """
    h = u.spec.spacing
    if G is None:
        G = gradient_fft(kernel, table, u)
    gnorm = lp_norm(G, p)
    rows = []
    for z in shifts:
        z = float(z)
        steps = round(z / h)
        if abs(steps * h - z) > 1e-9 * max(h, abs(z)):
            raise ValueError(f"shift {z} is not on the grid lattice")
        if abs(z) >= kernel.epsilon / 3:
            raise ValueError("shifts must stay below epsilon / 3")
        if steps == 0:
            rows.append((0.0, 0.0))
            continue
        vec = [steps] + [0] * (u.spec.n - 1)
        diff = GridField(u.spec, u.data - _shift(u.data, vec))
        ratio = lp_norm(diff, p) / (float(omega(kernel, abs(z))) * gnorm) if gnorm else 0.0
        rows.append((abs(z), ratio))
    ratios = [r for _, r in rows]
    return {"rows": rows, "sup": max(ratios) if ratios else 0.0}


def morrey_check(kernel: RadialKernel, u: GridField, p: float, sigma: Optional[float] = None,
                 G: Optional[GridVectorField] = None, pairs: int = 100_000,
                 seed: int = MORREY_SEED, table: Optional[PotentialTable] = None) -> float:
    """sup over random pairs with |x - y| < epsilon of |u(x) - u(y)| / omega_alpha(|x - y|),
    divided by |G u|_p, with omega_alpha(t) = omega(t) t^(-n/p)."""
    n, h = u.spec.n, u.spec.spacing
    if sigma is None:
        sigma = check_h3_h4(kernel).sigma
    if sigma is None or not sigma * p > n:
        raise ValueError("the Morrey estimate needs sigma * p > n")
    if not np.any(u.data):
        return 0.0
    if G is None:
        G = gradient_fft(kernel, table, u)
    gnorm = lp_norm(G, p)
    rng = np.random.default_rng(seed)
    reach = int(math.ceil(kernel.epsilon / h)) - 1
    shape = np.array(u.spec.shape)
    x = rng.integers(0, shape, size=(pairs, n))
    d = rng.integers(-reach, reach + 1, size=(pairs, n))
    y = x + d
    dist = np.sqrt(np.sum(d.astype(float) ** 2, axis=1)) * h
    keep = (dist > 0) & (dist < kernel.epsilon) & np.all((y >= 0) & (y < shape), axis=1)
    x, y, dist = x[keep], y[keep], dist[keep]
    ux = u.data[tuple(x.T)]
    uy = u.data[tuple(y.T)]
    wa = omega(kernel, dist) * dist ** (-n / p)
    return float(np.max(np.abs(ux - uy) / wa)) / gnorm


@dataclass
class OrliczVerdict:
    positive: bool
    t: np.ndarray
    ratio: np.ndarray
    tail_infimum: float


def orlicz_condition_check(kernel: RadialKernel, p: float,
                           young_inverse: Callable[[np.ndarray], np.ndarray],
                           gamma: Optional[float] = None, samples: int = 201) -> OrliczVerdict:
    """Sample A^-1(t) / (omega(t^(-1/n)) t^(1/p)) on t in [1e2, 1e12].

    Positive iff the infimum over the top two decades exceeds 1e-6.
    """
    n = kernel.n
    if gamma is None:
        gamma = check_h3_h4(kernel).gamma
    if gamma is None or not gamma * p < n:
        raise ValueError("the Orlicz embedding needs gamma * p < n")
    t = np.logspace(2, 12, samples)
    if np.any(t ** (-1.0 / n) >= kernel.epsilon):
        raise ValueError("sampled radii t^(-1/n) leave (0, epsilon)")
    ainv = np.asarray(young_inverse(t), dtype=float)
    if np.any(np.diff(ainv) < 0) or not np.all(np.isfinite(ainv)):
        raise ValueError("A^-1 is not monotone on the samples")
    ratio = ainv / (omega(kernel, t ** (-1.0 / n)) * t ** (1.0 / p))
    top = t >= 1e10
    inf_top = float(np.min(ratio[top]))
    return OrliczVerdict(inf_top > 1e-6, t, ratio, inf_top)
