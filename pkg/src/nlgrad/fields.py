"""Uniform-grid scalar and vector fields, bump test functions, norms and file I/O."""

from __future__ import annotations

import csv
import math
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

__all__ = [
    "GridSpec",
    "GridField",
    "GridVectorField",
    "FieldFormatError",
    "MagicMismatchError",
    "DimensionMismatchError",
    "TruncatedPayloadError",
    "make_bump",
    "bump_profile",
    "lp_norm",
    "write_field",
    "read_field",
    "write_vector_field",
    "read_vector_field",
    "write_csv_slice",
    "MAX_POINTS",
]

MAX_POINTS = 2**26
MAGIC = b"NLGF"
VERSION = 1


@dataclass(frozen=True)
class GridSpec:
    """Isotropic grid: point i along each axis sits at origin + i*spacing."""

    n: int
    shape: tuple
    spacing: float
    origin: tuple

    def __post_init__(self) -> None:
        if self.n not in (1, 2, 3):
            raise ValueError("grid dimension must be 1, 2 or 3")
        shape = tuple(int(s) for s in np.atleast_1d(self.shape))
        origin = tuple(float(o) for o in np.atleast_1d(self.origin))
        if len(shape) != self.n or len(origin) != self.n:
            raise ValueError("shape and origin need one entry per axis")
        if min(shape) < 8:
            raise ValueError("at least 8 points per axis are required")
        if math.prod(shape) > MAX_POINTS:
            raise ValueError("grid exceeds the 2^26 point guard")
        if not (self.spacing > 0 and math.isfinite(self.spacing)):
            raise ValueError("spacing must be positive")
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "spacing", float(self.spacing))

    @classmethod
    def centered(cls, n: int, half_width: float, spacing: float) -> "GridSpec":
        """Grid symmetric about 0 covering [-half_width, half_width]^n."""
        m = int(round(half_width / spacing))
        return cls(n, (2 * m + 1,) * n, spacing, (-m * spacing,) * n)

    @property
    def size(self) -> int:
        return math.prod(self.shape)

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.n

    def axes(self) -> list:
        return [o + self.spacing * np.arange(s) for o, s in zip(self.origin, self.shape)]

    def coordinates(self) -> list:
        return np.meshgrid(*self.axes(), indexing="ij")

    def key(self) -> tuple:
        return (self.n, self.shape, self.spacing, self.origin)


class GridField:
    """Real samples on a GridSpec; the array is read-only once wrapped."""

    def __init__(self, spec: GridSpec, data) -> None:
        arr = np.array(data, dtype=np.float64, copy=True)
        if arr.size != spec.size:
            raise ValueError("data length does not match the grid")
        arr = arr.reshape(spec.shape)
        arr.setflags(write=False)
        self.spec = spec
        self.data = arr

    @classmethod
    def zeros(cls, spec: GridSpec) -> "GridField":
        return cls(spec, np.zeros(spec.shape))

    def __add__(self, other: "GridField") -> "GridField":
        _same(self.spec, other.spec)
        return GridField(self.spec, self.data + other.data)

    def __sub__(self, other: "GridField") -> "GridField":
        _same(self.spec, other.spec)
        return GridField(self.spec, self.data - other.data)

    def __mul__(self, alpha) -> "GridField":
        if isinstance(alpha, GridField):
            _same(self.spec, alpha.spec)
            return GridField(self.spec, self.data * alpha.data)
        return GridField(self.spec, float(alpha) * self.data)

    __rmul__ = __mul__

    def __neg__(self) -> "GridField":
        return GridField(self.spec, -self.data)


class GridVectorField:
    """n scalar components on a shared grid."""

    def __init__(self, spec: GridSpec, components: Sequence) -> None:
        comps = [c if isinstance(c, GridField) else GridField(spec, c) for c in components]
        if len(comps) != spec.n:
            raise ValueError("a vector field needs exactly n components")
        for c in comps:
            _same(spec, c.spec)
        self.spec = spec
        self.components = tuple(comps)

    @classmethod
    def zeros(cls, spec: GridSpec) -> "GridVectorField":
        return cls(spec, [np.zeros(spec.shape)] * spec.n)

    @property
    def data(self) -> np.ndarray:
        """Stacked array of shape (n, *shape)."""
        return np.stack([c.data for c in self.components])

    def __add__(self, other):
        return GridVectorField(self.spec, list(self.data + other.data))

    def __sub__(self, other):
        return GridVectorField(self.spec, list(self.data - other.data))

    def __mul__(self, alpha):
        return GridVectorField(self.spec, list(float(alpha) * self.data))

    __rmul__ = __mul__


def _same(a: GridSpec, b: GridSpec) -> None:
    if a.key() != b.key():
        raise ValueError("fields live on different grids")


def bump_profile(x2):
    """exp(1 - 1/(1 - x2)) for x2 < 1, else 0 (x2 is the squared scaled radius)."""
    x2 = np.asarray(x2, dtype=float)
    out = np.zeros(x2.shape)
    inside = x2 < 1.0
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - x2[inside]))
    return out


def make_bump(spec: GridSpec, center, radius: float, amplitude: float = 1.0) -> GridField:
    """Smooth compactly supported bump amplitude*exp(1 - 1/(1 - |x-c|^2/R^2))."""
    center = np.atleast_1d(np.asarray(center, dtype=float))
    if center.size != spec.n:
        raise ValueError("center needs n coordinates")
    if radius <= 2 * spec.spacing:
        raise ValueError("bump radius must exceed two grid spacings")
    for ax, c in zip(spec.axes(), center):
        if c - radius < ax[0] - 1e-12 or c + radius > ax[-1] + 1e-12:
            raise ValueError("bump does not fit inside the grid")
    coords = spec.coordinates()
    r2 = sum((x - c) ** 2 for x, c in zip(coords, center)) / radius**2
    return GridField(spec, amplitude * bump_profile(r2))


def lp_norm(field, p: float) -> float:
    """(sum |u_i|^p h^n)^(1/p), the max for p = inf; vector fields use the pointwise length."""
    if not p >= 1:
        raise ValueError("p must be at least 1")
    if isinstance(field, GridVectorField):
        vals = np.sqrt(np.sum(field.data**2, axis=0))
    else:
        vals = np.abs(field.data)
    if math.isinf(p):
        return float(np.max(vals)) if vals.size else 0.0
    peak = float(np.max(vals)) if vals.size else 0.0
    if peak == 0.0:
        return 0.0
    # scale by the peak to avoid overflow for large p
    total = float(np.sum((vals / peak) ** p)) * field.spec.cell_volume
    return peak * total ** (1.0 / p)


class FieldFormatError(ValueError):
    """Base class for malformed field files."""


class MagicMismatchError(FieldFormatError):
    pass


class DimensionMismatchError(FieldFormatError):
    pass


class TruncatedPayloadError(FieldFormatError):
    pass


def write_field(path: str | Path, field: GridField) -> None:
    spec = field.spec
    header = MAGIC + struct.pack("<II", VERSION, spec.n)
    header += struct.pack(f"<{spec.n}Q", *spec.shape)
    header += struct.pack("<d", spec.spacing)
    header += struct.pack(f"<{spec.n}d", *spec.origin)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(field.data, dtype="<f8").tobytes())


def read_field(path: str | Path, expect_n: int | None = None) -> GridField:
    raw = Path(path).read_bytes()
    if raw[:4] != MAGIC:
        raise MagicMismatchError(f"{path}: not a field file (bad magic)")
    if len(raw) < 12:
        raise TruncatedPayloadError(f"{path}: header truncated")
    version, n = struct.unpack_from("<II", raw, 4)
    if version != VERSION:
        raise FieldFormatError(f"{path}: unsupported version {version}")
    if n not in (1, 2, 3) or (expect_n is not None and n != expect_n):
        raise DimensionMismatchError(f"{path}: dimension {n} not accepted")
    head = 12 + 8 * n + 8 + 8 * n
    if len(raw) < head:
        raise TruncatedPayloadError(f"{path}: header truncated")
    shape = struct.unpack_from(f"<{n}Q", raw, 12)
    (spacing,) = struct.unpack_from("<d", raw, 12 + 8 * n)
    origin = struct.unpack_from(f"<{n}d", raw, 20 + 8 * n)
    count = math.prod(shape)
    if len(raw) - head < 8 * count:
        raise TruncatedPayloadError(f"{path}: payload shorter than the header claims")
    if len(raw) - head > 8 * count:
        raise FieldFormatError(f"{path}: trailing bytes after payload")
    data = np.frombuffer(raw, dtype="<f8", count=count, offset=head)
    return GridField(GridSpec(n, shape, spacing, origin), data)


def _component_path(path: str | Path, i: int) -> Path:
    return Path(f"{path}.c{i}")


def write_vector_field(path: str | Path, field: GridVectorField) -> list:
    out = []
    for i, comp in enumerate(field.components):
        p = _component_path(path, i)
        write_field(p, comp)
        out.append(p)
    return out


def read_vector_field(path: str | Path) -> GridVectorField:
    first = read_field(_component_path(path, 0))
    comps = [first] + [read_field(_component_path(path, i), first.spec.n)
                       for i in range(1, first.spec.n)]
    return GridVectorField(first.spec, comps)


def write_csv_slice(path: str | Path, field, axis_index: Sequence[int] = ()) -> None:
    """CSV of a 1D field or a 2D slice.

    For n = 1 columns are x, value(s); for n >= 2 the leading axes beyond two
    are fixed at ``axis_index`` and columns are x0, x1, value(s).
    """
    vector = isinstance(field, GridVectorField)
    spec = field.spec
    arr = field.data if vector else field.data[None]
    if spec.n == 3:
        k = axis_index[0] if axis_index else spec.shape[2] // 2
        arr = arr[..., k]
    names = [f"c{i}" for i in range(arr.shape[0])] if vector else ["value"]
    axes = spec.axes()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if spec.n == 1:
            w.writerow(["x"] + names)
            for i, x in enumerate(axes[0]):
                w.writerow([repr(float(x))] + [repr(float(v)) for v in arr[:, i]])
        else:
            w.writerow(["x0", "x1"] + names)
            for i, x0 in enumerate(axes[0]):
                for j, x1 in enumerate(axes[1]):
                    w.writerow([repr(float(x0)), repr(float(x1))]
                               + [repr(float(v)) for v in arr[:, i, j]])
