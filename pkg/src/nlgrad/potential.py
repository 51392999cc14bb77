"""The radial potential Q(r) = int_r^delta rho_bar(t)/t dt and its tabulation."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

import numpy as np
from scipy.interpolate import PchipInterpolator

from .kernels import RadialKernel, sphere_area
from .quadrature import gauss_legendre, integrate_graded

__all__ = [
    "PotentialTable",
    "DecayReport",
    "eval_Q",
    "ball_mass",
    "ball_integral_Q",
    "tabulate_Q",
    "check_Q_decay",
    "default_radii",
]


def eval_Q(kernel: RadialKernel, r: float) -> float:
    """Q at a single radius r > 0 by adaptive quadrature in log t."""
    if not r > 0:
        raise ValueError("Q is only evaluated at r > 0")
    if r >= kernel.delta:
        return 0.0
    a, b = math.log(r), math.log(kernel.delta)
    pts = []
    if kernel.meta.get("chi") == "bump":
        pts.append(math.log(0.6 * kernel.delta))
    val = integrate_graded(lambda u: kernel.scalar(math.exp(a + u)), 0.0, b - a, False,
                           points=[p - a for p in pts if a < p < b])
    return val


def ball_mass(kernel: RadialKernel, b: float) -> float:
    """int_0^b rho_bar(t) t^(n-1) dt (graded toward the origin)."""
    b = min(b, kernel.delta)
    n = kernel.n
    return integrate_graded(lambda t: kernel.scalar(t) * t ** (n - 1), 0.0, b, True)


def ball_integral_Q(kernel: RadialKernel, b: float) -> float:
    """Integral of Q over the ball B_b."""
    n = kernel.n
    sig = sphere_area(n)
    return sig / n * (ball_mass(kernel, b) + b**n * (eval_Q(kernel, b) if b < kernel.delta else 0.0))


def default_radii(kernel: RadialKernel, per_decade: int = 2000, decades: int = 7) -> np.ndarray:
    return kernel.delta * np.logspace(-decades, 0, per_decade * decades + 1)


@dataclass
class PotentialTable:
    radii: np.ndarray
    values: np.ndarray
    l1_norm: float
    cell_averages: dict = field(default_factory=dict)
    delta: float = 1.0
    label: str = ""

    def __post_init__(self) -> None:
        self._interp = PchipInterpolator(np.log(self.radii), self.values, extrapolate=False)

    def __call__(self, r) -> np.ndarray:
        """Monotone cubic interpolation in log r; 0 beyond delta."""
        r = np.asarray(r, dtype=float)
        out = np.zeros(r.shape)
        inside = (r > 0) & (r < self.delta)
        if np.any(r[inside] < self.radii[0]):
            raise ValueError("radius below the tabulated range")
        out[inside] = self._interp(np.log(r[inside]))
        return out

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["r", "Q"])
            for r, q in zip(self.radii, self.values):
                w.writerow([repr(float(r)), repr(float(q))])


def _cumulative_Q(kernel: RadialKernel, radii: np.ndarray, gauss: int = 8) -> np.ndarray:
    """Q at sorted radii via Gauss-Legendre panels in log t between samples."""
    edges = np.append(radii, kernel.delta) if radii[-1] < kernel.delta else radii.copy()
    x, w = gauss_legendre(gauss)
    la, lb = np.log(edges[:-1]), np.log(edges[1:])
    u = la[:, None] + (lb - la)[:, None] * x[None, :]
    panel = (kernel(np.exp(u)) @ w) * (lb - la)
    tail = np.concatenate([np.cumsum(panel[::-1])[::-1], [0.0]])
    return tail[: radii.size]


def tabulate_Q(kernel: RadialKernel, radii: Optional[np.ndarray] = None,
               cell_radii: Iterable[float] = ()) -> PotentialTable:
    """Tabulate Q, its L1 norm, and ball averages of Q for each radius in cell_radii."""
    radii = default_radii(kernel) if radii is None else np.asarray(radii, dtype=float)
    if radii.ndim != 1 or radii.size < 2 or np.any(np.diff(radii) <= 0):
        raise ValueError("radii must be strictly increasing")
    if radii[0] <= 0 or radii[-1] > kernel.delta * (1 + 1e-12):
        raise ValueError("radii must lie in (0, delta]")
    # bump cutoffs have a C^4 seam; make sure it is a panel edge
    extra = [0.6 * kernel.delta] if kernel.meta.get("chi") == "bump" else []
    grid = np.union1d(radii, [e for e in extra if radii[0] < e < radii[-1]])
    vals_all = _cumulative_Q(kernel, grid)
    values = np.interp(radii, grid, vals_all) if grid.size != radii.size else vals_all
    values[radii >= kernel.delta] = 0.0
    n = kernel.n
    sig = sphere_area(n)
    l1 = sig / n * ball_mass(kernel, kernel.delta)
    avgs = {}
    for h in cell_radii:
        h = float(h)
        vol = sig / n * h**n
        avgs[h] = ball_integral_Q(kernel, h) / vol
    return PotentialTable(radii=radii, values=values, l1_norm=l1, cell_averages=avgs,
                          delta=kernel.delta, label=kernel.label)


@dataclass(frozen=True)
class DecayReport:
    sup: float
    argmax: float
    finite: bool


def check_Q_decay(table: PotentialTable, kernel: RadialKernel, M: float) -> DecayReport:
    """sup over tabulated r in [M, delta) of Q(r) r^(n-1)."""
    if M < table.radii[0]:
        raise ValueError("table does not cover [M, delta]")
    sel = table.radii >= M
    r = table.radii[sel]
    prod = np.where(r < kernel.delta, table.values[sel] * r ** (kernel.n - 1), 0.0)
    if prod.size == 0:
        return DecayReport(0.0, M, True)
    i = int(np.argmax(prod))
    sup = float(prod[i])
    return DecayReport(sup, float(r[i]), math.isfinite(sup))
