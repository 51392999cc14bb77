"""Nonlocal gradient and divergence on uniform grids.

Two routes compute the gradient of a compactly supported grid field:

* direct: a lattice sum of difference quotients against the kernel, with a
  near-origin correction ``c * grad_h u`` (4th-order central differences),
* fft: the potential Q is sampled on a zero-padded torus, convolved with u by
  FFT and differentiated spectrally.

Both routes treat the singular origin the same way.  A smooth radial window
``psi`` (1 near 0, 0 beyond ``r_window``) is used to match the continuum
moment that the lattice misses: for the direct route the first moment
``int psi rho (z/|z|^2) (z . grad u)``, for the fft route the mass
``int psi Q``.  This removes the O(h^(1-s)) bias of pointwise sampling and
leaves errors of order h^(3-s).

The direct route is one odd vector stencil ``K`` (lattice weights plus the
finite-difference correction folded in), applied as ``u * sum(K) - K * u``
with FFT-based linear convolution.  Because every discrete identity below is
stated for that single stencil, integration by parts, the Leibniz rule and
commutation with mollifiers hold to rounding error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numpy.polynomial import Polynomial
from scipy import fft as sfft
from scipy.signal import fftconvolve

from .fields import GridField, GridSpec, GridVectorField, lp_norm
from .kernels import RadialKernel, sphere_area
from .potential import PotentialTable, tabulate_Q
from .quadrature import IntegralDivergence, integrate_graded

__all__ = [
    "StencilCache",
    "WraparoundError",
    "CarryoverResult",
    "build_stencil",
    "window",
    "gradient_direct",
    "divergence_direct",
    "gradient_fft",
    "potential_on_torus",
    "leibniz_remainder",
    "check_ibp",
    "leibniz_check",
    "mollify_commute_check",
    "carryover_check",
    "sobolev_control",
    "local_gradient",
    "SUPERSAMPLE",
]

SUPERSAMPLE = 16
FD4 = ((1, 8.0 / 12.0), (2, -1.0 / 12.0))
_SMOOTHERSTEP = Polynomial([0, 0, 0, 0, 0, 126, -420, 540, -315, 70])


class WraparoundError(RuntimeError):
    """Circular convolution spilled across the periodic seam."""


def window(r, r_window: float):
    """psi(r) = 1 - smootherstep(r / r_window): 1 at 0, C^4, 0 beyond r_window."""
    u = np.clip(np.asarray(r, dtype=float) / r_window, 0.0, 1.0)
    return 1.0 - _SMOOTHERSTEP(u)


def _window_moment(n: int, r_window: float, t):
    """Psi(t) = int_0^t psi(tau) tau^(n-1) dtau for t <= r_window."""
    u = np.asarray(t, dtype=float) / r_window
    inner = (_SMOOTHERSTEP * Polynomial([0] * (n - 1) + [1])).integ()
    return r_window**n * (u**n / n - inner(u))


def default_window_radius(kernel: RadialKernel) -> float:
    return 0.5 * kernel.epsilon


@dataclass
class StencilCache:
    """Lattice offsets z in the kernel support with weights rho(z) h^n.

    ``weights`` include the cut-cell fraction for cells crossing |z| = delta.
    ``kernel_array`` is the dense odd vector stencil, shape (n, 2m+1, ...),
    with the near-cell correction folded into the offsets 1 and 2 cells away
    along each axis.
    """

    kernel_label: str
    spec_key: tuple
    offsets: np.ndarray
    weights: np.ndarray
    near_cell_coefficient: float
    window_radius: float
    half_width: int
    kernel_array: np.ndarray = field(repr=False)
    weight_array: np.ndarray = field(repr=False)

    @property
    def stencil_sum(self) -> np.ndarray:
        return self.kernel_array.reshape(self.kernel_array.shape[0], -1).sum(axis=1)


def _cut_fraction(idx: np.ndarray, h: float, delta: float, n: int) -> np.ndarray:
    """Fraction of each cell [z - h/2, z + h/2]^n lying in the closed ball B_delta."""
    sub = (np.arange(SUPERSAMPLE) + 0.5) / SUPERSAMPLE - 0.5
    pts = np.stack(np.meshgrid(*([sub] * n), indexing="ij"), axis=-1).reshape(-1, n)
    out = np.empty(idx.shape[0])
    for k0 in range(0, idx.shape[0], 256):
        z = (idx[k0:k0 + 256, None, :] + pts[None, :, :]) * h
        out[k0:k0 + 256] = np.mean(np.sum(z**2, axis=-1) <= delta**2, axis=1)
    return out


_STENCILS: dict = {}


def build_stencil(kernel: RadialKernel, spec: GridSpec,
                  r_window: Optional[float] = None) -> StencilCache:
    """Stencil for ``kernel`` at the grid spacing of ``spec`` (cached)."""
    if kernel.n != spec.n:
        raise ValueError("kernel and grid dimensions differ")
    h, n, delta = spec.spacing, spec.n, kernel.delta
    r_window = default_window_radius(kernel) if r_window is None else float(r_window)
    key = (id(kernel), n, h, r_window)
    hit = _STENCILS.get(key)
    if hit is not None and hit[0] is kernel:
        return hit[1]
    m = int(math.ceil(delta / h + 0.5 * math.sqrt(n))) + 1
    m = max(m, 2)
    ax = np.arange(-m, m + 1)
    idx = np.stack(np.meshgrid(*([ax] * n), indexing="ij"), axis=-1).reshape(-1, n)
    r = h * np.sqrt(np.sum(idx.astype(float) ** 2, axis=1))
    frac = np.where(r <= delta, 1.0, 0.0)
    band = np.abs(r - delta) <= 0.5 * h * math.sqrt(n) + 1e-12 * h
    band &= r > 0
    if np.any(band):
        frac[band] = _cut_fraction(idx[band].astype(float), h, delta, n)
    rho = np.zeros_like(r)
    live = (frac > 0) & (r > 0)
    rho[live] = kernel(np.minimum(r[live], delta))
    w = rho * frac * h**n
    if not np.all(np.isfinite(w)) or np.any(w < 0):
        raise ValueError("kernel weights must be finite and nonnegative")

    # near-cell coefficient: continuum first moment minus what the lattice sees
    sig = sphere_area(n)
    cont = integrate_graded(
        lambda t: float(window(t, r_window)) * kernel.scalar(t) * t ** (n - 1),
        0.0, min(r_window, delta), True)
    lattice = float(np.sum(window(r[live], r_window) * w[live]))
    c = (sig * cont - lattice) / n

    kern = np.zeros((n, r.size))
    with np.errstate(invalid="ignore", divide="ignore"):
        for i in range(n):
            kern[i, live] = w[live] * idx[live, i] * h / r[live] ** 2
    shape = (2 * m + 1,) * n
    kern = kern.reshape((n,) + shape)
    for i in range(n):
        for step, a in FD4:
            hi = [m] * n
            lo = [m] * n
            hi[i] += step
            lo[i] -= step
            kern[(i,) + tuple(hi)] += c * a / h
            kern[(i,) + tuple(lo)] -= c * a / h
    cache = StencilCache(
        kernel_label=kernel.label,
        spec_key=(n, h),
        offsets=idx[live] * h,
        weights=w[live],
        near_cell_coefficient=c,
        window_radius=r_window,
        half_width=m,
        kernel_array=kern,
        weight_array=w.reshape(shape),
    )
    _STENCILS[key] = (kernel, cache)
    return cache


def _check_extent(kernel: RadialKernel, spec: GridSpec) -> None:
    extent = (min(spec.shape) - 1) * spec.spacing
    if kernel.delta > extent:
        raise ValueError("kernel horizon exceeds the grid extent")


def _conv(a: np.ndarray, k: np.ndarray) -> np.ndarray:
    """Linear convolution (zero extension) cropped to the shape of ``a``."""
    return fftconvolve(a, k, mode="same")


def local_gradient(data: np.ndarray, h: float, axis: int) -> np.ndarray:
    """4th-order central difference with zero extension."""
    out = np.zeros_like(data)
    pad = np.pad(data, [(2, 2) if i == axis else (0, 0) for i in range(data.ndim)])
    sl = lambda s: tuple(slice(2 + s, 2 + s + data.shape[axis]) if i == axis else slice(None)
                         for i in range(data.ndim))
    for step, a in FD4:
        out += a * (pad[sl(step)] - pad[sl(-step)])
    return out / h


def _apply(stencil: StencilCache, data: np.ndarray, comp: int) -> np.ndarray:
    """sum_z (v(x) - v(x - z)) K_comp(z) for one scalar array v."""
    k = stencil.kernel_array[comp]
    return data * float(k.sum()) - _conv(data, k)


def gradient_direct(kernel: RadialKernel, u: GridField,
                    stencil: Optional[StencilCache] = None) -> GridVectorField:
    """Direct lattice quadrature of the nonlocal gradient."""
    _check_extent(kernel, u.spec)
    st = build_stencil(kernel, u.spec) if stencil is None else stencil
    comps = [_apply(st, u.data, i) for i in range(u.spec.n)]
    return GridVectorField(u.spec, comps)


def divergence_direct(kernel: RadialKernel, Phi: GridVectorField,
                      stencil: Optional[StencilCache] = None) -> GridField:
    """Same stencil contracted with the components of Phi."""
    _check_extent(kernel, Phi.spec)
    st = build_stencil(kernel, Phi.spec) if stencil is None else stencil
    total = sum(_apply(st, Phi.components[i].data, i) for i in range(Phi.spec.n))
    return GridField(Phi.spec, total)


def leibniz_remainder(kernel: RadialKernel, f: GridField, g: GridField,
                      stencil: Optional[StencilCache] = None) -> GridVectorField:
    """K_f(g)(x) = sum_z (f(x) - f(x - z)) g(x - z) K(z)."""
    st = build_stencil(kernel, f.spec) if stencil is None else stencil
    comps = []
    for i in range(f.spec.n):
        k = st.kernel_array[i]
        comps.append(f.data * _conv(g.data, k) - _conv(f.data * g.data, k))
    return GridVectorField(f.spec, comps)


# ---------------------------------------------------------------------------
# FFT route
# ---------------------------------------------------------------------------


def potential_on_torus(kernel: RadialKernel, table: PotentialTable, h: float,
                       shape: tuple, r_window: Optional[float] = None) -> np.ndarray:
    """Q sampled at the wrapped lattice offsets of a torus of ``shape``.

    The origin value is chosen so that the windowed lattice mass equals the
    continuum ``int psi Q``.
    """
    n = len(shape)
    r_window = default_window_radius(kernel) if r_window is None else float(r_window)
    axes = [np.minimum(np.arange(L), L - np.arange(L)) * h for L in shape]
    r2 = np.zeros(shape)
    for i, a in enumerate(axes):
        r2 = r2 + a.reshape([-1 if j == i else 1 for j in range(n)]) ** 2
    r = np.sqrt(r2)
    q = np.zeros(shape)
    inside = (r > 0) & (r < kernel.delta)
    q[inside] = table(r[inside])
    # continuum int psi Q, integrated by parts against Psi(t)
    rm = min(r_window, kernel.delta)
    Psi = lambda t: float(_window_moment(n, r_window, t))
    tail = integrate_graded(lambda t: Psi(t) * kernel.scalar(t) / t, 0.0, rm, True)
    q_rm = float(table(np.array([rm]))[0]) if rm < kernel.delta else 0.0
    cont = sphere_area(n) * (Psi(rm) * q_rm + tail)
    near = inside & (r < r_window)
    lattice = float(np.sum(window(r[near], r_window) * q[near])) * h**n
    q.flat[0] = (cont - lattice) / h**n
    return q


def _freqs(shape: tuple, h: float, real_last: bool = True) -> list:
    """Frequencies of each torus axis, broadcastable (rfft layout on the last axis)."""
    n = len(shape)
    out = []
    for i, L in enumerate(shape):
        f = sfft.rfftfreq(L, h) if (real_last and i == n - 1) else sfft.fftfreq(L, h)
        out.append(f.reshape([-1 if j == i else 1 for j in range(n)]))
    return out


def paired_modes(shape: tuple, real_last: bool = True) -> np.ndarray:
    """False on the unpaired Nyquist hyperplanes of even-length axes.

    Those modes have no real odd counterpart, so derivative-type multipliers
    are set to zero there.
    """
    n = len(shape)
    mask = np.ones([(L // 2 + 1) if (real_last and i == n - 1) else L
                    for i, L in enumerate(shape)], dtype=bool)
    for i, L in enumerate(shape):
        if L % 2 == 0:
            idx = [slice(None)] * n
            idx[i] = L // 2
            mask[tuple(idx)] = False
    return mask


def padded_shape(spec: GridSpec, kernel: RadialKernel, pad: Optional[int] = None) -> tuple:
    m = int(math.ceil(kernel.delta / spec.spacing))
    pad = m + 2 if pad is None else int(pad)
    return tuple(sfft.next_fast_len(s + 2 * pad, real=True) for s in spec.shape), pad


def gradient_fft(kernel: RadialKernel, table: Optional[PotentialTable], u: GridField,
                 pad: Optional[int] = None, return_spectrum: bool = False):
    """grad (Q * u) by FFT on a zero-padded torus, cropped back to u's grid."""
    spec = u.spec
    _check_extent(kernel, spec)
    if table is None:
        table = tabulate_Q(kernel)
    shape, pad = padded_shape(spec, kernel, pad)
    h, n = spec.spacing, spec.n
    big = np.zeros(shape)
    crop = tuple(slice(pad, pad + s) for s in spec.shape)
    big[crop] = u.data
    qhat = sfft.rfftn(potential_on_torus(kernel, table, h, shape)).real * h**n
    uhat = sfft.rfftn(big)
    conv_hat = qhat * uhat
    conv = sfft.irfftn(conv_hat, shape)
    total = float(np.sum(conv**2))
    seam = 0.0
    for i in range(n):
        seam += float(np.sum(np.take(conv, [0, shape[i] - 1], axis=i) ** 2))
    if total > 0 and seam > 1e-12 * total:
        raise WraparoundError("padding too small: convolution wraps across the torus seam")
    freqs = _freqs(shape, h)
    conv_hat = conv_hat * paired_modes(shape)
    comps = []
    for i in range(n):
        gi = sfft.irfftn(2j * math.pi * freqs[i] * conv_hat, shape)
        comps.append(gi[crop])
    out = GridVectorField(spec, comps)
    if return_spectrum:
        return out, {"shape": shape, "pad": pad, "qhat_grid": qhat, "freqs": freqs}
    return out


# ---------------------------------------------------------------------------
# Identity checks
# ---------------------------------------------------------------------------


def _inner(a: np.ndarray, b: np.ndarray, h: float, n: int) -> float:
    return float(np.sum(a * b)) * h**n


def check_ibp(kernel: RadialKernel, u: GridField, Phi: GridVectorField) -> float:
    """|<G u, Phi> + <u, div Phi>| / (|u|_2 |Phi|_2)."""
    nu, nphi = lp_norm(u, 2), lp_norm(Phi, 2)
    if nu == 0 or nphi == 0:
        return 0.0
    G = gradient_direct(kernel, u)
    D = divergence_direct(kernel, Phi)
    h, n = u.spec.spacing, u.spec.n
    lhs = sum(_inner(G.components[i].data, Phi.components[i].data, h, n) for i in range(n))
    rhs = _inner(u.data, D.data, h, n)
    return abs(lhs + rhs) / (nu * nphi)


def leibniz_check(kernel: RadialKernel, f: GridField, g: GridField) -> float:
    """|G(fg) - f G g - K_f(g)|_2 / |G(fg)|_2 (0 when G(fg) vanishes)."""
    st = build_stencil(kernel, f.spec)
    fg = GridField(f.spec, f.data * g.data)
    left = gradient_direct(kernel, fg, st)
    Gg = gradient_direct(kernel, g, st)
    K = leibniz_remainder(kernel, f, g, st)
    res = left.data - f.data[None] * Gg.data - K.data
    denom = float(np.sqrt(np.sum(left.data**2)))
    num = float(np.sqrt(np.sum(res**2)))
    if denom == 0:
        return num
    return num / denom


def _mollifier(spec: GridSpec, width: float) -> np.ndarray:
    m = int(math.floor(width / spec.spacing))
    if m < 2:
        raise ValueError("mollifier width must span at least two grid cells")
    ax = np.arange(-m, m + 1) * spec.spacing
    grids = np.meshgrid(*([ax] * spec.n), indexing="ij")
    r2 = sum(g**2 for g in grids) / width**2
    phi = np.where(r2 < 1, np.exp(1.0 - 1.0 / np.where(r2 < 1, 1.0 - r2, 1.0)), 0.0)
    return phi / phi.sum()


def mollify_commute_check(kernel: RadialKernel, u: GridField, mollifier_width: float) -> float:
    """|G(phi * u) - phi * G u|_2 / |G u|_2 with a normalized discrete bump phi."""
    phi = _mollifier(u.spec, mollifier_width)
    Gu = gradient_direct(kernel, u)
    denom = float(np.sqrt(np.sum(Gu.data**2)))
    if denom == 0:
        return 0.0
    left = gradient_direct(kernel, GridField(u.spec, _conv(u.data, phi)))
    right = np.stack([_conv(c.data, phi) for c in Gu.components])
    return float(np.sqrt(np.sum((left.data - right) ** 2))) / denom


@dataclass
class CarryoverResult:
    comparable: bool
    residual: float
    difference_integral: float
    note: str = ""


def carryover_check(kernel1: RadialKernel, kernel2: RadialKernel, u: GridField) -> CarryoverResult:
    """|G1 u - G2 u - F * u|_2 / |G1 u|_2 with F(z) = (z/|z|^2)(rho2 - rho1)(z).

    Refuses (comparable=False) when int |rho1 - rho2| t^(n-2) dt diverges.
    """
    n = u.spec.n
    if kernel1.n != n or kernel2.n != n:
        raise ValueError("kernel and grid dimensions differ")
    reach = max(kernel1.delta, kernel2.delta)
    try:
        total = integrate_graded(
            lambda t: abs(kernel1.scalar(t) - kernel2.scalar(t)) * t ** (n - 2), 0.0, reach, True)
    except IntegralDivergence as exc:
        return CarryoverResult(False, math.nan, math.inf, f"difference not integrable: {exc}")
    st1 = build_stencil(kernel1, u.spec)
    st2 = build_stencil(kernel2, u.spec)
    g1 = gradient_direct(kernel1, u, st1)
    g2 = gradient_direct(kernel2, u, st2)
    # F on the lattice, using each kernel's cell weights (rho * cut fraction * h^n)
    m = max(st1.half_width, st2.half_width)
    w1 = np.pad(st1.weight_array, m - st1.half_width)
    w2 = np.pad(st2.weight_array, m - st2.half_width)
    h = u.spec.spacing
    ax = np.arange(-m, m + 1) * h
    grids = np.meshgrid(*([ax] * n), indexing="ij")
    r2 = sum(g**2 for g in grids)
    with np.errstate(invalid="ignore", divide="ignore"):
        scale = np.where(r2 > 0, (w2 - w1) / np.where(r2 > 0, r2, 1.0), 0.0)
    Fu = np.stack([_conv(u.data, grids[i] * scale) for i in range(n)])
    res = g1.data - g2.data - Fu
    denom = float(np.sqrt(np.sum(g1.data**2)))
    num = float(np.sqrt(np.sum(res**2)))
    return CarryoverResult(True, num / denom if denom else num, total)


def sobolev_control(kernel: RadialKernel, u: GridField, p: float = 2.0) -> tuple:
    """(C, observed) where C = 2 int min(1, 1/|z|) rho and observed =
    |G u|_p / (|u|_p + |grad_h u|_p)."""
    n = kernel.n
    sig = sphere_area(n)
    cut = min(1.0, kernel.delta)
    inner = integrate_graded(lambda t: kernel.scalar(t) * t ** (n - 1), 0.0, cut, True)
    outer = 0.0
    if kernel.delta > 1.0:
        outer = integrate_graded(lambda t: kernel.scalar(t) * t ** (n - 2), 1.0, kernel.delta)
    C = 2.0 * sig * (inner + outer)
    G = gradient_direct(kernel, u)
    grad = GridVectorField(u.spec, [local_gradient(u.data, u.spec.spacing, i) for i in range(n)])
    denom = lp_norm(u, p) + lp_norm(grad, p)
    observed = lp_norm(G, p) / denom if denom else 0.0
    return C, observed
