"""Inversion of the nonlocal gradient: the multiplier W, the kernel V and reconstruction.

``W(xi) = -i xi / (2 pi |xi|^2 Qhat(|xi|))`` inverts the gradient symbol
``2 pi i xi Qhat`` on every nonzero mode.  The lost constant is recovered
from the support condition: the reconstruction must vanish on average
outside the dilated region.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from scipy import fft as sfft
from scipy.ndimage import distance_transform_edt

from .fields import GridField, GridSpec, GridVectorField
from .kernels import RadialKernel
from .operators import _freqs, padded_shape, paired_modes
from .symbol import SpectralSymbol, qhat, qhat_zero

__all__ = [
    "ReconstructionKernel",
    "build_reconstruction",
    "symbol_on_magnitudes",
    "reconstruct",
    "vrho_bound_profile",
    "vrho_gradient_profile",
    "vrho_lp_bounds",
    "radial_symmetry_residual",
    "omega",
    "write_v_profile_csv",
    "EXACT_MAGNITUDE_BUDGET",
]

EXACT_MAGNITUDE_BUDGET = 4000
UNIFORM_STEP = 1.0 / 16.0
TAPER_START = 0.5


def omega(kernel: RadialKernel, t) -> np.ndarray:
    """omega(t) = 1 / (t^(n-1) rho_bar(t))."""
    t = np.asarray(t, dtype=float)
    return 1.0 / (t ** (kernel.n - 1) * kernel(t))


def symbol_on_magnitudes(kernel: RadialKernel, mags: np.ndarray,
                         symbol: Optional[SpectralSymbol] = None,
                         method: str = "bessel") -> tuple:
    """Qhat at every entry of ``mags`` and the SpectralSymbol used.

    Exact evaluation at each distinct magnitude when there are at most
    EXACT_MAGNITUDE_BUDGET of them; otherwise a cubic spline through a
    uniform tabulation with step 1/(16 delta).
    """
    mags = np.asarray(mags, dtype=float)
    if symbol is not None:
        if mags.max() > symbol.k_samples[-1] * (1 + 1e-12):
            raise ValueError("symbol does not reach the largest grid frequency")
        return symbol(mags), symbol
    uniq, inv = np.unique(np.round(mags, 12), return_inverse=True)
    if uniq.size <= EXACT_MAGNITUDE_BUDGET:
        vals = np.array([qhat(kernel, float(k), method) for k in uniq])
        used = SpectralSymbol(uniq, vals, method, kernel.label)
        return vals[inv].reshape(mags.shape), used
    step = UNIFORM_STEP / kernel.delta
    ks = np.arange(0.0, uniq[-1] + 4 * step, step)
    vals = np.array([qhat(kernel, float(k), method) for k in ks])
    used = SpectralSymbol(ks, vals, method, kernel.label, interpolation="cubic")
    return used(mags), used


def _raised_cosine(k: np.ndarray, r0: float, r1: float) -> np.ndarray:
    u = np.clip((k - r0) / (r1 - r0), 0.0, 1.0)
    return 0.5 * (1.0 + np.cos(math.pi * u))


@dataclass
class ReconstructionKernel:
    symbol: SpectralSymbol
    w_multiplier: np.ndarray
    torus_shape: tuple
    pad: int
    spec: GridSpec
    kernel: RadialKernel = field(repr=False)
    chi_cutoff_radius: float = 0.0
    v_grid: Optional[GridVectorField] = None
    v_low: Optional[np.ndarray] = field(default=None, repr=False)
    v_high: Optional[np.ndarray] = field(default=None, repr=False)
    qhat_grid: Optional[np.ndarray] = field(default=None, repr=False)
    freqs: list = field(default_factory=list, repr=False)

    def product_residual(self) -> float:
        """max |W . (2 pi i xi Qhat) - 1| over nonzero paired modes."""
        lam = [2j * math.pi * f * self.qhat_grid for f in self.freqs]
        prod = sum(w * l for w, l in zip(self.w_multiplier, lam))
        mag2 = sum(f**2 for f in self.freqs)
        nz = np.broadcast_to(mag2 > 0, prod.shape) & paired_modes(self.torus_shape)
        return float(np.max(np.abs(prod[nz] - 1.0))) if np.any(nz) else 0.0


def build_reconstruction(kernel: RadialKernel, spec: GridSpec,
                         symbol: Optional[SpectralSymbol] = None,
                         tabulate_v: bool = False, pad: Optional[int] = None,
                         method: str = "bessel") -> ReconstructionKernel:
    """W on the padded torus of ``spec`` (same torus as the FFT gradient)."""
    if kernel.n != spec.n:
        raise ValueError("kernel and grid dimensions differ")
    shape, pad = padded_shape(spec, kernel, pad)
    h, n = spec.spacing, spec.n
    freqs = _freqs(shape, h)
    mag = np.sqrt(sum(f**2 for f in freqs))
    q, used = symbol_on_magnitudes(kernel, mag, symbol, method)
    q = np.asarray(q, dtype=float)
    if np.any(q[mag > 0] <= 0):
        raise ValueError("symbol is not positive at a needed mode")
    live = (mag > 0) & paired_modes(shape)
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(live, 1.0 / (2.0 * math.pi * np.where(mag > 0, mag, 1.0) ** 2 * q), 0.0)
    w = [-1j * f * scale for f in freqs]
    rk = ReconstructionKernel(
        symbol=used, w_multiplier=np.array(np.broadcast_arrays(*w)), torus_shape=shape,
        pad=pad, spec=spec, kernel=kernel, chi_cutoff_radius=2.0 / kernel.epsilon,
        qhat_grid=q, freqs=freqs)
    if tabulate_v:
        _tabulate_v(rk, mag)
    return rk


def _tabulate_v(rk: ReconstructionKernel, mag: np.ndarray) -> None:
    """V = IFFT(chi W) + IFFT((1 - chi) W), centred on the torus.

    W does not decay, so the high part is tapered radially between half the
    Nyquist radius and the Nyquist radius; a square cutoff would leave sinc
    ridges along the axes.
    """
    h, n, shape = rk.spec.spacing, rk.spec.n, rk.torus_shape
    if len(set(shape)) != 1:
        raise ValueError("V tabulation needs a cubic torus")
    r0 = rk.chi_cutoff_radius
    chi = _raised_cosine(mag, r0, 2.0 * r0)
    nyq = 0.5 / h
    taper = _raised_cosine(mag, TAPER_START * nyq, nyq)
    low = np.stack([sfft.fftshift(sfft.irfftn(chi * w, shape)) for w in rk.w_multiplier]) / h**n
    high = np.stack([sfft.fftshift(sfft.irfftn((1 - chi) * taper * w, shape)) for w in rk.w_multiplier]) / h**n
    L = shape[0]
    tor = GridSpec(n, shape, h, (-(L // 2) * h,) * n)
    rk.v_low, rk.v_high = low, high
    rk.v_grid = GridVectorField(tor, list(low + high))


def _embed(spec: GridSpec, shape: tuple, pad: int, data: np.ndarray) -> np.ndarray:
    big = np.zeros(shape)
    big[tuple(slice(pad, pad + s) for s in spec.shape)] = data
    return big


def reconstruct(recon: ReconstructionKernel, G: GridVectorField,
                omega_mask: np.ndarray) -> GridField:
    """u with D u = G, the constant fixed by a zero mean outside the dilated region."""
    spec = G.spec
    if spec.key() != recon.spec.key():
        raise ValueError("gradient field and reconstruction kernel use different grids")
    mask = np.asarray(omega_mask, dtype=bool)
    if mask.shape != spec.shape:
        raise ValueError("mask shape does not match the grid")
    shape, pad = recon.torus_shape, recon.pad
    uhat = 0
    for i in range(spec.n):
        uhat = uhat + recon.w_multiplier[i] * sfft.rfftn(_embed(spec, shape, pad, G.components[i].data))
    u = sfft.irfftn(uhat, shape)
    big_mask = _embed(spec, shape, pad, mask.astype(float)) > 0.5
    if np.any(big_mask):
        dist = distance_transform_edt(~big_mask) * spec.spacing
        exterior = dist > recon.kernel.delta
    else:
        exterior = np.ones(shape, dtype=bool)
    if not np.any(exterior):
        raise ValueError("no grid points outside the dilated region to fix the constant")
    u = u - float(np.mean(u[exterior]))
    crop = tuple(slice(pad, pad + s) for s in spec.shape)
    return GridField(spec, u[crop])


def _radial_samples(rk: ReconstructionKernel, lo: float, hi: float):
    """Points of the tabulated V with lo < |x| < hi: (|x|, |V|)."""
    v = rk.v_grid
    coords = v.spec.coordinates()
    r = np.sqrt(sum(c**2 for c in coords))
    sel = (r > lo) & (r < hi)
    vabs = np.sqrt(np.sum(v.data**2, axis=0))
    return r[sel], vabs[sel], sel


def vrho_bound_profile(rk: ReconstructionKernel, lo_cells: float = 4.0) -> dict:
    """sup over lo_cells*h < |x| < epsilon of |V(x)| |x|^(2n-1) rho(x)."""
    if rk.v_grid is None:
        raise ValueError("V was not tabulated")
    h, n, k = rk.spec.spacing, rk.spec.n, rk.kernel
    r, vabs, _ = _radial_samples(rk, lo_cells * h, k.epsilon)
    prod = vabs * r ** (2 * n - 1) * k(r)
    i = int(np.argmax(prod))
    return {"sup": float(prod[i]), "argmax": float(r[i]), "r": r, "product": prod}


def vrho_gradient_profile(rk: ReconstructionKernel, lo_cells: float = 4.0) -> dict:
    """sup of |grad_h V(x)| |x|^(2n) rho(x) on the same range (central differences)."""
    if rk.v_grid is None:
        raise ValueError("V was not tabulated")
    h, n, k = rk.spec.spacing, rk.spec.n, rk.kernel
    data = rk.v_grid.data
    jac2 = np.zeros(data.shape[1:])
    for i in range(n):
        for j in range(n):
            jac2 += np.gradient(data[i], h, axis=j) ** 2
    r, _, sel = _radial_samples(rk, lo_cells * h, k.epsilon)
    prod = np.sqrt(jac2[sel]) * r ** (2 * n) * k(r)
    return {"sup": float(np.max(prod)), "r": r, "product": prod}


def radial_symmetry_residual(rk: ReconstructionKernel) -> float:
    """Largest violation of vector radiality under reflections and axis swaps, relative to max |V|."""
    if rk.v_grid is None:
        raise ValueError("V was not tabulated")
    V = rk.v_grid.data
    n = V.shape[0]
    L = V.shape[1]
    scale = float(np.max(np.abs(V)))
    if scale == 0:
        return 0.0
    # index j on the centred torus sits at (j - L//2) h; reflection maps j -> L - j (mod L)
    refl = (-np.arange(L)) % L if L % 2 == 0 else (L - 1 - np.arange(L))
    worst = 0.0
    for ax in range(n):
        flipped = np.take(V, refl, axis=1 + ax)
        for i in range(n):
            sign = -1.0 if i == ax else 1.0
            a = V[i]
            b = sign * flipped[i]
            if L % 2 == 0:
                # the first row has no partner inside the torus window
                keep = [slice(None)] * n
                keep[ax] = slice(1, None)
                a, b = a[tuple(keep)], b[tuple(keep)]
            worst = max(worst, float(np.max(np.abs(a - b))))
    for i in range(n):
        for j in range(i + 1, n):
            perm = list(range(n))
            perm[i], perm[j] = perm[j], perm[i]
            swapped = np.transpose(V, [0] + [1 + p for p in perm])
            worst = max(worst, float(np.max(np.abs(V[i] - swapped[j]))))
    return worst / scale


def vrho_lp_bounds(rk: ReconstructionKernel, p: float, r_list: Sequence[float],
                   shift_list: Sequence[int], R: Optional[float] = None,
                   sigma: Optional[float] = None) -> dict:
    """L^{p'} norms of V on balls and of its lattice translates, against the omega envelopes.

    ``shift_list`` holds shifts in grid cells along the first axis.
    """
    if rk.v_grid is None:
        raise ValueError("V was not tabulated")
    if not p > 1:
        raise ValueError("p must exceed 1")
    k, h, n = rk.kernel, rk.spec.spacing, rk.spec.n
    if sigma is not None and not sigma * p > n:
        raise ValueError("the bounds need sigma * p > n")
    pp = math.inf if math.isinf(p) else p / (p - 1.0)
    V = rk.v_grid.data
    vabs = np.sqrt(np.sum(V**2, axis=0))
    coords = rk.v_grid.spec.coordinates()
    r = np.sqrt(sum(c**2 for c in coords))

    def norm(vals):
        if math.isinf(pp):
            return float(np.max(vals)) if vals.size else 0.0
        return float(np.sum(vals**pp) * h**n) ** (1.0 / pp)

    ball_rows = []
    for rad in r_list:
        nv = norm(vabs[r < rad])
        env = float(omega(k, rad)) * rad ** (-n / p)
        ball_rows.append((float(rad), nv, nv / env))
    R = k.epsilon if R is None else float(R)
    inside = r < R
    shift_rows = []
    for m in shift_list:
        m = int(m)
        if m == 0:
            shift_rows.append((0.0, 0.0, 0.0))
            continue
        shifted = np.roll(V, -m, axis=1)
        diff = np.sqrt(np.sum((V - shifted) ** 2, axis=0))
        nd = norm(diff[inside])
        z = abs(m) * h
        env = float(omega(k, z)) * z ** (-n / p)
        shift_rows.append((z, nd, nd / env))
    return {"balls": ball_rows, "shifts": shift_rows, "p_conjugate": pp}


def write_v_profile_csv(rk: ReconstructionKernel, path: str | Path) -> None:
    """Radial profile of |V| along the first axis with the envelope 1/(|x|^(2n-1) rho)."""
    if rk.v_grid is None:
        raise ValueError("V was not tabulated")
    V = rk.v_grid.data
    n, h, k = rk.spec.n, rk.spec.spacing, rk.kernel
    L = V.shape[1]
    centre = [L // 2] * n
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["r", "abs_v", "envelope"])
        for j in range(1, L // 2):
            idx = tuple([slice(None), centre[0] + j] + centre[1:])
            r = j * h
            rho = float(k(np.array([r]))[0])
            env = 1.0 / (r ** (2 * n - 1) * rho) if rho > 0 else math.inf
            w.writerow([repr(r), repr(float(np.linalg.norm(V[idx]))), repr(env)])
